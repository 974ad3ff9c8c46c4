"""
Normalized CPTu metrics and inversion of the initial state parameter.

Cone metrics are normalized with the initial mean stress, so every record
needs K0. Three parameterizations of Q' = k_bar exp(-m_bar psi) are
supported: the cavity-based one with a geometric factor c_q and the two
regression-based ones.
"""

import logging
import math
from collections.abc import Iterable, Sequence

import numpy as np

from .config import InterpretConfig
from .exceptions import (
    DomainError,
    InputError,
    NonPhysicalResistanceError,
    NumericalError,
)
from .models import (
    CptuRecord,
    InversionParams,
    K0Policy,
    Method,
    NormalizedMetrics,
    ProfileRow,
)

logger = logging.getLogger(__name__)

ASSUMED_K0 = 0.7
# k_bar of the Pezeshki-Ahmadi fit is M (3.3 - 0.035 / lambda).
PEZESHKI_AHMADI_LAMBDA_MIN = 0.035 / 3.3
_SQRT3 = math.sqrt(3.0)
_ORACLE_RTOL = 1e-10


def normalized_metrics(rec: CptuRecord) -> NormalizedMetrics:
    """
    Mean-stress normalized tip resistance and pore pressure ratios.

    Args:
        rec: CPTu record carrying K0

    Returns:
        Q_p, B_q1 (when u1 is present), B_q2 and the effective resistances

    Raises:
        InputError: If K0 is missing, p'_0 is not positive, or q_c equals p_0
    """
    if rec.k0 is None:
        raise InputError(f"Record at depth {rec.depth} has no K0")

    p0_eff = (1.0 + 2.0 * rec.k0) / 3.0 * rec.sigma_v0_eff
    if p0_eff <= 0:
        raise InputError(f"Mean effective stress at depth {rec.depth} is not positive")
    p0 = p0_eff + rec.u0

    net = rec.q_c - p0
    if math.isclose(net, 0.0, abs_tol=1e-9):
        raise InputError(f"B_q is undefined at depth {rec.depth}: q_c equals p_0")

    q_p = net / p0_eff
    b_q2 = (rec.u2 - rec.u0) / net
    b_q1 = None if rec.u1 is None else (rec.u1 - rec.u0) / net
    return NormalizedMetrics(
        q_p=q_p,
        b_q1=b_q1,
        b_q2=b_q2,
        q_eff_u1=None if b_q1 is None else q_p * (1.0 - b_q1) + 1.0,
        q_eff_u2=q_p * (1.0 - b_q2) + 1.0,
        p0=p0,
        p0_eff=p0_eff,
    )


def cq_factor(rho: float, M: float) -> float:
    """
    Ratio of cone effective tip resistance to spherical cavity effective
    limit pressure.

    Args:
        rho: Angle of the major principal stress to the vertical, degrees
        M: Triaxial CSL slope

    Returns:
        c_q; exactly 1 for rho = 120 degrees (smooth cone)

    Raises:
        InputError: If rho lies outside [90, 180]
    """
    if not 90.0 <= rho <= 180.0:
        raise InputError(f"Principal stress angle must lie in [90, 180], got {rho}")
    two_rho = math.radians(2.0 * rho)
    return (
        M + 3.0 * M * math.cos(two_rho) - 3.0 * _SQRT3 * M * math.sin(two_rho) + 6.0
    ) / (4.0 * M + 6.0)


def cone_resistance_tensor(p_cs_eff: float, M: float, rho: float, u: float) -> float:
    """
    Tip resistance from the traction on a 60 degree cone face.

    The critical state principal stresses are rotated by rho, the traction on
    the face is resolved vertically and divided by the projected area ratio
    cos 60.
    """
    if not 90.0 <= rho <= 180.0:
        raise InputError(f"Principal stress angle must lie in [90, 180], got {rho}")
    angle = math.radians(rho)
    c, s = math.cos(angle), math.sin(angle)
    rotation = np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])
    sigma_1 = p_cs_eff * (1.0 + 2.0 * M / 3.0)
    sigma_3 = p_cs_eff * (1.0 - M / 3.0)
    principal = np.diag([sigma_3, sigma_1, sigma_3])
    stress = rotation @ principal @ rotation.T + u * np.eye(3)

    normal = np.array([_SQRT3 / 2.0, -0.5, 0.0])
    traction = stress @ normal
    return float(-traction[1] / math.cos(math.radians(60.0)))


def cone_resistance_oracle(p_cs_eff: float, M: float, rho: float, u: float) -> float:
    """
    Cone tip resistance at critical state, closed form.

    Raises:
        InputError: If rho lies outside [90, 180]
        NumericalError: If the closed form and the tensor construction disagree
    """
    two_rho = math.radians(2.0 * rho)
    direct = (
        p_cs_eff
        + p_cs_eff
        * M
        * (1.0 / 6.0 + math.cos(two_rho) / 2.0 - _SQRT3 * math.sin(two_rho) / 2.0)
        + u
    )
    brute = cone_resistance_tensor(p_cs_eff, M, rho, u)
    if not math.isclose(direct, brute, rel_tol=_ORACLE_RTOL, abs_tol=1e-12):
        raise NumericalError(
            f"Cone resistance mismatch: closed form {direct}, tensor {brute}"
        )
    return direct


def method_params(
    method: Method, lambda_: float, M: float, c_q: float = 1.0
) -> InversionParams:
    """
    Inversion pair (k_bar, m_bar) for a method.

    Args:
        method: Parameterization
        lambda_: CSL slope in e - ln p'
        M: Triaxial CSL slope
        c_q: Geometric factor, used by this_work only

    Raises:
        InputError: If lambda is not positive
        DomainError: If the parameterization gives k_bar <= 0 or m_bar <= 0
    """
    if lambda_ <= 0:
        raise InputError(f"lambda must be positive, got {lambda_}")

    match method:
        case Method.THIS_WORK:
            k_bar = c_q * (1.0 + 2.0 * M / 3.0)
            m_bar = 1.0 / lambda_
        case Method.PLEWES:
            k_bar = M * (3.0 + 0.37 / lambda_)
            m_bar = 11.9 - 30.62 * lambda_
        case Method.PEZESHKI_AHMADI:
            k_bar = M * (3.3 - 0.035 / lambda_)
            m_bar = 6.0 + 0.1735 / lambda_

    if k_bar <= 0:
        raise DomainError(
            f"{method} gives non-positive k_bar={k_bar:.4g} for lambda={lambda_}"
        )
    if m_bar <= 0:
        raise DomainError(
            f"{method} gives non-positive m_bar={m_bar:.4g} for lambda={lambda_}"
        )
    return InversionParams(method=method, k_bar=k_bar, m_bar=m_bar)


def effective_resistance_for_method(
    method: Method, rec: CptuRecord, cfg: InterpretConfig
) -> float:
    """
    Normalized effective resistance Q' with each method's own B_q.

    this_work uses the face pressure u1 when recorded, otherwise beta times
    the shoulder excess pressure. plewes uses B_q2. pezeshki_ahmadi takes
    B_q relative to the total vertical stress.

    Raises:
        InputError: If the metrics or the method's B_q are undefined
    """
    metrics = normalized_metrics(rec)

    match method:
        case Method.THIS_WORK:
            if metrics.q_eff_u1 is not None:
                return metrics.q_eff_u1
            return metrics.q_p * (1.0 - cfg.beta * metrics.b_q2) + 1.0
        case Method.PLEWES:
            return metrics.q_eff_u2
        case Method.PEZESHKI_AHMADI:
            net_vertical = rec.q_c - rec.sigma_v0
            if math.isclose(net_vertical, 0.0, abs_tol=1e-9):
                raise InputError(
                    f"B_q is undefined at depth {rec.depth}: q_c equals sigma_v0"
                )
            b_q = (rec.u2 - rec.u0) / net_vertical
            return metrics.q_p * (1.0 - b_q) + 1.0


def forward_resistance(psi: float, params: InversionParams) -> float:
    """Q' = k_bar exp(-m_bar psi)."""
    return params.k_bar * math.exp(-params.m_bar * psi)


def invert_psi(q_prime: float, params: InversionParams) -> float:
    """
    State parameter from normalized effective resistance.

    Raises:
        DomainError: If k_bar is not positive
        NonPhysicalResistanceError: If Q' is zero or negative
    """
    if params.k_bar <= 0:
        raise DomainError(f"Cannot invert with non-positive k_bar={params.k_bar}")
    if q_prime <= 0:
        raise NonPhysicalResistanceError(
            f"Normalized effective resistance {q_prime:.4g} is not positive"
        )
    return -math.log(q_prime / params.k_bar) / params.m_bar


def k0_correction(k0: float, m_bar: float) -> float:
    """
    State parameter shift between isotropic and K0 normalization.

    psi = psi_iso - (1 / m_bar) ln(3 / (1 + 2 K0)), where psi_iso normalizes
    by the vertical effective stress.
    """
    if k0 <= 0:
        raise InputError(f"K0 must be positive, got {k0}")
    if m_bar <= 0:
        raise InputError(f"m_bar must be positive, got {m_bar}")
    return math.log(3.0 / (1.0 + 2.0 * k0)) / m_bar


def estimate_beta(records: Iterable[CptuRecord]) -> float:
    """
    Median face to shoulder excess pore pressure ratio.

    Raises:
        InputError: If no record carries both u1 and a non-zero u2 excess
    """
    ratios = [
        (rec.u1 - rec.u0) / (rec.u2 - rec.u0)
        for rec in records
        if rec.u1 is not None and rec.u2 != rec.u0
    ]
    if not ratios:
        raise InputError("No record carries both u1 and u2 excess pore pressures")
    return float(np.median(ratios))


def _all_params(
    cfg: InterpretConfig, methods: Sequence[Method]
) -> dict[Method, InversionParams | None]:
    params: dict[Method, InversionParams | None] = {}
    for method in methods:
        try:
            params[method] = method_params(
                method, cfg.lambda_, cfg.M, cfg.geometric_factor
            )
        except DomainError as e:
            logger.warning("%s", e)
            params[method] = None
    return params


def _interpret_record(
    rec: CptuRecord,
    cfg: InterpretConfig,
    params: dict[Method, InversionParams | None],
) -> ProfileRow:
    flags: list[str] = []
    if rec.k0 is None:
        if cfg.k0_policy is not K0Policy.ASSUME_0_7:
            logger.warning("No K0 at depth %s, record skipped", rec.depth)
            return ProfileRow(depth=rec.depth, flags=["missing_k0"])
        rec = rec.model_copy(update={"k0": ASSUMED_K0})
        flags.append("k0_assumed")

    try:
        metrics = normalized_metrics(rec)
    except InputError as e:
        logger.warning("%s", e)
        return ProfileRow(depth=rec.depth, flags=[*flags, "bq_undefined"])

    row = ProfileRow(
        depth=rec.depth,
        q_p=metrics.q_p,
        b_q1=metrics.b_q1,
        b_q2=metrics.b_q2,
        flags=flags,
    )
    flags = row.flags
    for method, method_param in params.items():
        row.q_prime[method] = None
        row.psi[method] = None
        if method_param is None:
            flags.append(f"kbar_nonpositive_{method}")
            continue

        try:
            q_prime = effective_resistance_for_method(method, rec, cfg)
        except InputError as e:
            logger.warning("%s", e)
            if "bq_undefined" not in flags:
                flags.append("bq_undefined")
            continue
        row.q_prime[method] = q_prime

        try:
            psi = invert_psi(q_prime, method_param)
        except NonPhysicalResistanceError:
            logger.warning(
                "Non-physical Q'=%.4g at depth %s for %s", q_prime, rec.depth, method
            )
            flags.append(f"nonphysical_{method}")
            continue

        if psi < 0:
            flags.append(f"dilatant_extrapolation_{method}")
        row.psi[method] = psi

    return row


def interpret_profile(
    records: Sequence[CptuRecord],
    cfg: InterpretConfig,
    methods: Iterable[Method] | None = None,
) -> list[ProfileRow]:
    """
    Invert the state parameter at every depth of a sounding.

    Records that cannot be interpreted are kept as flagged rows.

    Args:
        records: Sounding records in any order
        cfg: Interpretation settings
        methods: Methods to apply; all when None

    Returns:
        One row per record, ordered by depth

    Raises:
        InputError: If there are no records
    """
    if not records:
        raise InputError("Cannot interpret an empty profile")

    selected = set(Method) if methods is None else set(methods)
    ordered = [method for method in Method if method in selected]
    params = _all_params(cfg, ordered)

    rows = [
        _interpret_record(rec, cfg, params)
        for rec in sorted(records, key=lambda r: r.depth)
    ]
    flagged = sum(1 for row in rows if row.flags)
    logger.info("Interpreted %d records, %d flagged", len(rows), flagged)
    return rows
