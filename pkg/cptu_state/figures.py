"""
Curve data for the geometric factor, inversion parameters, fixture round
trips and the K0 correction. Every function returns a DataFrame ready to be
written as CSV.
"""

import logging
from collections.abc import Callable

import numpy as np
import pandas as pd

from .config import InterpretConfig
from .exceptions import DomainError, InputError, NonPhysicalResistanceError
from .fixtures import load_fixtures, reference_material, series_definition, synthetic_record
from .inversion import (
    ASSUMED_K0,
    cq_factor,
    effective_resistance_for_method,
    invert_psi,
    k0_correction,
    method_params,
)
from .models import Method

logger = logging.getLogger(__name__)

CQ_SLOPES = (0.5, 1.0, 1.4)
KBAR_M = 1.4
KBAR_CQ = 1.35
K0_LAMBDAS = (0.02, 0.054, 0.08, 0.1, 0.15, 0.2, 0.25)


def _grid(start: float, stop: float, num: int) -> np.ndarray:
    return np.round(np.linspace(start, stop, num), 10)


def cq_curves() -> pd.DataFrame:
    """c_q against principal stress rotation for a few CSL slopes."""
    return pd.DataFrame(
        [
            {"M": M, "rho": rho, "c_q": cq_factor(rho, M)}
            for M in CQ_SLOPES
            for rho in _grid(90.0, 180.0, 91)
        ]
    )


def kbar_mbar_curves() -> pd.DataFrame:
    """k_bar and m_bar of every method against lambda."""
    rows = []
    for lambda_ in _grid(0.02, 0.25, 47):
        for method in Method:
            try:
                params = method_params(method, lambda_, KBAR_M, KBAR_CQ)
            except DomainError:
                rows.append(
                    {"lambda": lambda_, "method": str(method), "k_bar": None, "m_bar": None}
                )
                continue
            rows.append(
                {
                    "lambda": lambda_,
                    "method": str(method),
                    "k_bar": params.k_bar,
                    "m_bar": params.m_bar,
                }
            )
    return pd.DataFrame(rows)


def roundtrip_points(face_pressure: bool = True) -> pd.DataFrame:
    """
    Estimated against input state parameter for every fixture row.

    Args:
        face_pressure: Use the recorded u1 for this_work; when False the
            shoulder pressure scaled by beta is used instead
    """
    _, cptu_rows = load_fixtures()
    rows = []
    for row in cptu_rows:
        definition = series_definition(row.series)
        material = reference_material(row.material, row.series)
        cfg = InterpretConfig.from_material(material, rho=definition.rho)
        record = synthetic_record(row)
        if not face_pressure:
            record = record.model_copy(update={"u1": None})

        for method in Method:
            q_prime: float | None = None
            psi: float | None = None
            try:
                params = method_params(
                    method, cfg.lambda_, cfg.M, cfg.geometric_factor
                )
                q_prime = effective_resistance_for_method(method, record, cfg)
                psi = invert_psi(q_prime, params)
            except (DomainError, NonPhysicalResistanceError) as e:
                logger.warning("%s %s %s: %s", row.series, row.material, method, e)
            rows.append(
                {
                    "series": row.series,
                    "material": row.material,
                    "method": str(method),
                    "psi_0": row.psi_0,
                    "q_prime": q_prime,
                    "psi_est": psi,
                }
            )
    return pd.DataFrame(rows)


def k0_curves() -> pd.DataFrame:
    """K0 correction of the cavity-based method against K0 and lambda."""
    rows = []
    for lambda_ in K0_LAMBDAS:
        m_bar = 1.0 / lambda_
        assumed = k0_correction(ASSUMED_K0, m_bar)
        for k0 in _grid(0.4, 1.0, 13):
            delta = k0_correction(k0, m_bar)
            rows.append(
                {
                    "lambda": lambda_,
                    "k0": k0,
                    "delta_psi": delta,
                    "error_vs_assumed": delta - assumed,
                }
            )
    return pd.DataFrame(rows)


def compare_methods(
    series: str | None = None, face_pressure: bool = True
) -> pd.DataFrame:
    """
    Mean absolute and mean signed error of each method over the fixtures.

    Returns one row per (series, method) plus an ``all`` row per method.

    Raises:
        InputError: If ``series`` is given but unknown
    """
    points = roundtrip_points(face_pressure)
    if series is not None:
        series_definition(series)
        points = points[points["series"] == series]

    points = points.assign(error=points["psi_est"] - points["psi_0"])
    points = points.dropna(subset=["error"])

    def summarise(frame: pd.DataFrame, label: str) -> pd.DataFrame:
        stats = frame.groupby("method", sort=False)["error"].agg(
            n="count", mae=lambda e: e.abs().mean(), bias="mean"
        )
        return stats.reset_index().assign(series=label)

    per_series = [
        summarise(group, str(name))
        for name, group in points.groupby("series", sort=False)
    ]
    summary = pd.concat([*per_series, summarise(points, "all")], ignore_index=True)
    return summary[["series", "method", "n", "mae", "bias"]]


FIGURES: dict[str, Callable[[], pd.DataFrame]] = {
    "cq": cq_curves,
    "kbar_mbar": kbar_mbar_curves,
    "roundtrip": roundtrip_points,
    "k0": k0_curves,
}


def figure_data(which: str) -> pd.DataFrame:
    """
    Curve points for a named figure.

    Raises:
        InputError: If the figure key is unknown
    """
    if which not in FIGURES:
        raise InputError(
            f"Unknown figure '{which}', expected one of {', '.join(FIGURES)}"
        )
    return FIGURES[which]()
