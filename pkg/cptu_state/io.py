"""
CSV boundary: sounding input and profile, path and cavity outputs.
"""

import logging
import math
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any, TextIO

import pandas as pd
from pydantic import ValidationError

from .exceptions import InputError
from .models import CavityResult, CptuRecord, Method, ProfileRow, TriaxialResult

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.6g"
REQUIRED_COLUMNS = ("depth", "u2", "sigma_v0", "sigma_v0_eff")
OPTIONAL_COLUMNS = ("u1", "u0", "k0")


def _clean(value: Any) -> Any:
    if isinstance(value, float) and math.isnan(value):
        return None
    return value


def read_sounding(path: str | Path) -> list[CptuRecord]:
    """
    Parse a sounding CSV with header depth,qc,u2,u1,u0,sigma_v0,sigma_v0_eff,k0.

    ``qt`` is accepted in place of ``qc``; u1, u0 and k0 may be absent or empty.

    Raises:
        InputError: If the file is empty or unparseable, misses a column or has
            an invalid row
    """
    try:
        frame = pd.read_csv(path)
    except pd.errors.EmptyDataError as e:
        raise InputError(f"Sounding file {path} is empty") from e
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise InputError(f"Cannot parse sounding file {path}: {e}") from e

    missing = [col for col in REQUIRED_COLUMNS if col not in frame.columns]
    if not {"qc", "qt"} & set(frame.columns):
        missing.append("qc")
    if missing:
        raise InputError(f"Sounding file {path} lacks columns: {', '.join(missing)}")
    if frame.empty:
        raise InputError(f"Sounding file {path} has no records")

    records = []
    for i, raw in enumerate(frame.to_dict(orient="records"), start=1):
        data = {key: _clean(value) for key, value in raw.items()}
        if data.get("u0") is None:
            data.pop("u0", None)
        try:
            records.append(CptuRecord.model_validate(data))
        except ValidationError as e:
            raise InputError(f"Invalid record {i} in {path}: {e}") from e

    logger.info("Read %d records from %s", len(records), path)
    return records


def profile_frame(rows: Sequence[ProfileRow], methods: Iterable[Method]) -> pd.DataFrame:
    """Profile rows as depth,Qp,Bq1,Bq2,Qprime_<m>,psi_<m>,flags columns."""
    selected = list(methods)
    columns = ["depth", "Qp", "Bq1", "Bq2"]
    columns += [f"Qprime_{m}" for m in selected]
    columns += [f"psi_{m}" for m in selected]
    columns.append("flags")

    records = []
    for row in rows:
        record: dict[str, Any] = {
            "depth": row.depth,
            "Qp": row.q_p,
            "Bq1": row.b_q1,
            "Bq2": row.b_q2,
            "flags": ";".join(row.flags),
        }
        for method in selected:
            record[f"Qprime_{method}"] = row.q_prime.get(method)
            record[f"psi_{method}"] = row.psi.get(method)
        records.append(record)
    return pd.DataFrame(records, columns=columns)


def path_frame(result: TriaxialResult) -> pd.DataFrame:
    """Triaxial path as eps_q,p_eff,q,du,e columns."""
    return pd.DataFrame(
        {
            "eps_q": [s.eps_q for s in result.path],
            "p_eff": [s.p_eff for s in result.path],
            "q": [s.q_dev for s in result.path],
            "du": [s.excess_pore_pressure for s in result.path],
            "e": [s.void_ratio for s in result.path],
        }
    )


def cavity_frame(results: dict[str, CavityResult]) -> pd.DataFrame:
    """One row per cavity geometry."""
    return pd.DataFrame(
        [{"geometry": kind, **result.model_dump()} for kind, result in results.items()]
    )


def write_csv(frame: pd.DataFrame, dest: str | Path | TextIO) -> None:
    """Write with a fixed six significant digit float format."""
    frame.to_csv(dest, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
