"""
Closed-form undrained limit pressures of spherical and cylindrical cavities
expanding in CASM soil.

The effective limit pressure depends only on the critical state line. The
total limit pressure and hence the limit pore pressure also depend on the
shear stiffness and on the yield surface shape.
"""

import logging
import math
from typing import Literal

from pydantic import BaseModel, ConfigDict

from .exceptions import DomainError, InputError, NumericalError
from .material import csl_slope_M
from .models import CasmMaterial, CavityResult, SlopeGeometry

logger = logging.getLogger(__name__)

_MAX_SERIES_TERMS = 1_000_000


class CavityGeometry(BaseModel):
    """Spherical or cylindrical cavity."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["spherical", "cylindrical"] = "spherical"

    @property
    def m_d(self) -> int:
        return 2 if self.kind == "spherical" else 1

    @property
    def alpha(self) -> float:
        """Share of q_cs carried by the radial stress: m_d / (m_d + 1)."""
        return self.m_d / (self.m_d + 1)

    def m_alpha(self, material: CasmMaterial) -> float:
        """CSL slope in triaxial compression (sphere) or plane strain (cylinder)."""
        geometry = (
            SlopeGeometry.TRIAXIAL
            if self.kind == "spherical"
            else SlopeGeometry.PLANE_STRAIN
        )
        return csl_slope_M(material.phi_cs, geometry)


def normalized_effective_resistance(
    psi_0: float, material: CasmMaterial, geom: CavityGeometry
) -> float:
    """sigma'_c / p'_0 = (1 + alpha M_alpha) exp(-psi_0 / lambda)."""
    return (1.0 + geom.alpha * geom.m_alpha(material)) * math.exp(
        -psi_0 / material.lambda_
    )


def effective_limit_pressure(
    p_eff_0: float, psi_0: float, material: CasmMaterial, geom: CavityGeometry
) -> float:
    """
    Effective limit cavity pressure with the cavity wall at critical state.

    Args:
        p_eff_0: Initial mean effective stress in kPa
        psi_0: Initial state parameter
        material: Soil parameter set
        geom: Cavity geometry

    Returns:
        sigma'_c in kPa

    Raises:
        InputError: If p_eff_0 is not positive
    """
    if p_eff_0 <= 0:
        raise InputError(f"Mean effective stress must be positive, got {p_eff_0}")
    return p_eff_0 * normalized_effective_resistance(psi_0, material, geom)


def dilog_series(x: float, tol: float = 1e-12) -> float:
    """
    Dilogarithm Li2(x) = sum x^k / k^2 for 0 <= x < 1.

    Terms are added until the geometric bound on the remainder drops below
    ``tol``.

    Raises:
        DomainError: If x is outside [0, 1)
        InputError: If tol is not positive
        NumericalError: If the series needs more than a million terms
    """
    if not 0.0 <= x < 1.0:
        raise DomainError(f"Dilogarithm series requires 0 <= x < 1, got {x}")
    if tol <= 0:
        raise InputError(f"Series tolerance must be positive, got {tol}")

    total = 0.0
    power = 1.0
    for k in range(1, _MAX_SERIES_TERMS + 1):
        power *= x
        total += power / (k * k)
        if power * x / ((k + 1) ** 2 * (1.0 - x)) < tol:
            return total

    raise NumericalError(
        f"Dilogarithm series did not reach tolerance {tol} at x={x} "
        f"within {_MAX_SERIES_TERMS} terms"
    )


def total_limit_pressure(
    p_eff_0: float,
    material: CasmMaterial,
    geom: CavityGeometry,
    *,
    psi_0: float,
    g0: float,
    r0: float | None = None,
    u0: float = 0.0,
    tol: float = 1e-12,
) -> CavityResult:
    """
    Total limit pressure, limit pore pressure and normalized cavity metrics.

    Args:
        p_eff_0: Initial mean effective stress in kPa
        material: Soil parameter set
        geom: Cavity geometry
        psi_0: Initial state parameter
        g0: Shear modulus in kPa
        r0: Isotropic overconsolidation ratio p_c0 / p'_0; material OCR if None
        u0: Ambient pore pressure in kPa
        tol: Dilogarithm series tolerance

    Returns:
        Cavity limit state and its normalized metrics

    Raises:
        InputError: For non-positive stress or stiffness, or r0 < 1
        DomainError: If r0 = 1, or the stiffness term leaves A3 outside (0, 1)
        NumericalError: If the dilogarithm series does not converge
    """
    r0 = material.ocr if r0 is None else r0
    if p_eff_0 <= 0:
        raise InputError(f"Mean effective stress must be positive, got {p_eff_0}")
    if g0 <= 0:
        raise InputError(f"Shear modulus must be positive, got {g0}")
    if r0 < 1:
        raise InputError(f"Overconsolidation ratio must be at least 1, got {r0}")

    if r0 == 1:
        raise DomainError(
            "R0 = 1 (normally consolidated) makes the total limit pressure "
            "unbounded: A3 = 0 and ln A3 diverges"
        )

    m_d = geom.m_d
    m_alpha = geom.m_alpha(material)
    p_cs = p_eff_0 * math.exp(-psi_0 / material.lambda_)
    q_cs = m_alpha * p_cs

    shape = (math.log(r0) / math.log(material.r_spacing)) ** (1.0 / material.n_shape)
    a3 = 1.0 - math.exp(-shape * m_alpha * p_eff_0 / (2.0 * g0))
    if not 0.0 < a3 < 1.0:
        raise DomainError(f"Auxiliary term A3={a3} lies outside (0, 1)")
    a4 = dilog_series(a3, tol) / (m_d + 1)

    p0 = p_eff_0 + u0
    sigma_c = p0 - m_d / (m_d + 1) * q_cs * math.log(a3) + 2.0 * g0 * m_d * a4
    sigma_c_eff = effective_limit_pressure(p_eff_0, psi_0, material, geom)
    u_c = sigma_c - sigma_c_eff

    net = sigma_c - p0
    if net == 0:
        raise DomainError("Cavity limit pressure equals the initial total stress")
    q_bar_p = net / p_eff_0
    b_bar_q = (u_c - u0) / net
    logger.debug(
        "%s cavity: A3=%.6g sigma_c=%.5g sigma'_c=%.5g u_c=%.5g",
        geom.kind,
        a3,
        sigma_c,
        sigma_c_eff,
        u_c,
    )
    return CavityResult(
        sigma_c=sigma_c,
        sigma_c_eff=sigma_c_eff,
        u_c=u_c,
        q_bar_p=q_bar_p,
        b_bar_q=b_bar_q,
        q_eff_bar=sigma_c_eff / p_eff_0,
    )
