"""
Bundled reference tables: element test results for Materials A-E and the
steady state CPTu and cavity metrics of six simulation series.
"""

import hashlib
import io
import json
import logging
from functools import lru_cache
from importlib import resources
from typing import Any

import pandas as pd
from pydantic import BaseModel, ConfigDict, ValidationError

from .exceptions import InputError, IntegrityError
from .models import CasmMaterial, CptuRecord, FixtureCptuRow, FixtureMaterialRow

logger = logging.getLogger(__name__)

REFERENCE_SERIES = "reference"
SIGMA_V0_EFF = 100.0
_MATERIAL_COLUMNS = ("n_shape", "r_spacing", "gamma_c")


class SeriesDefinition(BaseModel):
    """Material changes and test conditions of one simulation series."""

    model_config = ConfigDict(frozen=True)

    name: str
    label: str
    overrides: dict[str, float]
    rho: float
    k0: float
    rows: str
    note: str | None = None


def _read_data(name: str) -> bytes:
    return resources.files("cptu_state").joinpath("data", name).read_bytes()


@lru_cache(maxsize=1)
def _manifest() -> dict[str, Any]:
    try:
        manifest: dict[str, Any] = json.loads(_read_data("manifest.json"))
    except (OSError, json.JSONDecodeError) as e:
        raise IntegrityError(f"Fixture manifest is unreadable: {e}") from e
    return manifest


def _verified_table(key: str) -> pd.DataFrame:
    """Read a bundled table after checking its checksum and row count."""
    entry = _manifest()["tables"][key]
    raw = _read_data(entry["file"])

    digest = hashlib.sha256(raw).hexdigest()
    if digest != entry["sha256"]:
        raise IntegrityError(
            f"Checksum mismatch for {entry['file']}: expected {entry['sha256']}, "
            f"got {digest}"
        )

    frame = pd.read_csv(io.BytesIO(raw), dtype={"series": str, "material": str})
    if len(frame) != entry["rows"]:
        raise IntegrityError(
            f"{entry['file']} holds {len(frame)} rows, expected {entry['rows']}"
        )
    return frame


@lru_cache(maxsize=1)
def load_fixtures() -> tuple[tuple[FixtureMaterialRow, ...], tuple[FixtureCptuRow, ...]]:
    """
    Load and verify both reference tables.

    Returns:
        (material rows, CPTu rows)

    Raises:
        IntegrityError: If a table does not match its manifest entry
    """
    materials = _verified_table("materials")
    cptu = _verified_table("cptu")

    try:
        material_rows = tuple(
            FixtureMaterialRow(
                series=row["series"],
                material=row["material"],
                overrides={col: float(row[col]) for col in _MATERIAL_COLUMNS},
                psi_0=row["psi_0"],
                su_peak=row["su_peak"],
                su_res=row["su_res"],
                i_b=row["i_b"],
            )
            for row in materials.to_dict(orient="records")
        )
        cptu_rows = tuple(
            FixtureCptuRow.model_validate(row) for row in cptu.to_dict(orient="records")
        )
    except (KeyError, ValidationError) as e:
        raise IntegrityError(f"Bundled fixtures are malformed: {e}") from e

    logger.debug(
        "Loaded %d material rows and %d CPTu rows", len(material_rows), len(cptu_rows)
    )
    return material_rows, cptu_rows


def series_names() -> list[str]:
    """Series identifiers in table order."""
    return list(_manifest()["series"])


def series_definition(series: str) -> SeriesDefinition:
    """
    Overrides and test conditions of a series.

    Raises:
        InputError: If the series is unknown
    """
    definitions = _manifest()["series"]
    if series not in definitions:
        raise InputError(
            f"Unknown series '{series}', expected one of {', '.join(definitions)}"
        )
    return SeriesDefinition(name=series, **definitions[series])


def reference_material(
    material_id: str, series: str = REFERENCE_SERIES
) -> CasmMaterial:
    """
    Build the CASM parameter set of a fixture material in a series.

    Args:
        material_id: Material letter A-E
        series: Simulation series

    Returns:
        Validated material

    Raises:
        InputError: If the material or series is unknown
    """
    definition = series_definition(series)
    material_rows, _ = load_fixtures()
    row = next((r for r in material_rows if r.material == material_id), None)
    if row is None:
        raise InputError(f"Unknown fixture material '{material_id}'")

    base = CasmMaterial.model_validate({**_manifest()["base_material"], **row.overrides})
    if not definition.overrides:
        return base

    material = base.with_overrides(**definition.overrides)
    if {"lambda", "kappa"} & definition.overrides.keys():
        material = material.with_overrides(gamma_c=material.implied_gamma_c)
    return material


def synthetic_record(
    row: FixtureCptuRow, k0: float | None = None, depth: float = 0.0
) -> CptuRecord:
    """
    CPTu record that reproduces a table row's Q_p, B_q1 and B_q2.

    The vertical effective stress is 100 kPa with zero ambient pore pressure;
    K0 defaults to the series value.
    """
    k0 = series_definition(row.series).k0 if k0 is None else k0
    p0_eff = (1.0 + 2.0 * k0) / 3.0 * SIGMA_V0_EFF
    net = row.q_p * p0_eff
    return CptuRecord(
        depth=depth,
        q_c=p0_eff + net,
        u2=row.b_q2 * net,
        u1=row.b_q1 * net,
        u0=0.0,
        sigma_v0=SIGMA_V0_EFF,
        sigma_v0_eff=SIGMA_V0_EFF,
        k0=k0,
    )


def fixtures_frame(table: str) -> pd.DataFrame:
    """
    One of the bundled tables as a DataFrame.

    Raises:
        InputError: If ``table`` is not ``materials`` or ``cptu``
    """
    material_rows, cptu_rows = load_fixtures()
    if table == "materials":
        return pd.DataFrame(
            [
                {
                    "series": r.series,
                    "material": r.material,
                    **r.overrides,
                    "psi_0": r.psi_0,
                    "su_peak": r.su_peak,
                    "su_res": r.su_res,
                    "i_b": r.i_b,
                }
                for r in material_rows
            ]
        )
    if table == "cptu":
        return pd.DataFrame([r.model_dump() for r in cptu_rows])
    raise InputError(f"Unknown fixture table '{table}', expected materials or cptu")
