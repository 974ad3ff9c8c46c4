"""
Critical state line, state parameter and in-situ state initialization.

All stresses are effective and compression positive (kPa). Void ratio is
tracked directly in e - ln p' space; the isotropic compression line passes
through (p_ref, e_ref) with slope lambda and unloading follows kappa.
"""

import logging
import math

from .exceptions import InputError
from .models import CasmMaterial, SlopeGeometry, SoilState, StartMode

logger = logging.getLogger(__name__)


def csl_slope_M(
    phi_cs: float, geometry: SlopeGeometry = SlopeGeometry.TRIAXIAL
) -> float:
    """
    Slope of the critical state line in p'-q space.

    Args:
        phi_cs: Critical state friction angle in degrees, 0 <= phi_cs < 90
        geometry: Triaxial compression or plane strain

    Returns:
        6 sin(phi) / (3 - sin(phi)) in triaxial compression, 2 sin(phi) in
        plane strain

    Raises:
        InputError: If the angle is out of range
    """
    if not 0.0 <= phi_cs < 90.0:
        raise InputError(f"Friction angle must lie in [0, 90) degrees, got {phi_cs}")

    sin_phi = math.sin(math.radians(phi_cs))
    if geometry is SlopeGeometry.PLANE_STRAIN:
        return 2.0 * sin_phi
    return 6.0 * sin_phi / (3.0 - sin_phi)


def csl_void_ratio(p_eff: float, material: CasmMaterial) -> float:
    """Void ratio on the critical state line at mean effective stress p_eff."""
    if p_eff <= 0:
        raise InputError(f"Mean effective stress must be positive, got {p_eff}")
    return material.gamma_c - material.lambda_ * math.log(p_eff / material.p_ref)


def state_parameter(state: SoilState, material: CasmMaterial) -> float:
    """Current void ratio minus the CSL void ratio at the same p'."""
    return state.void_ratio - csl_void_ratio(state.p_eff, material)


def initialize_in_situ(material: CasmMaterial, sigma_v0_eff: float) -> SoilState:
    """
    Build the at-rest state of a slightly overconsolidated deposit.

    The soil is loaded along the ICL to p_c = OCR * p'_0 and unloaded along
    kappa to p'_0, with p'_0 and q_0 set by K0 and the vertical stress.

    Args:
        material: Soil parameter set
        sigma_v0_eff: Effective vertical stress in kPa

    Returns:
        Initial soil state

    Raises:
        InputError: If the vertical stress is not positive
    """
    if sigma_v0_eff <= 0:
        raise InputError(
            f"Effective vertical stress must be positive, got {sigma_v0_eff}"
        )

    p_eff = (1.0 + 2.0 * material.k0) / 3.0 * sigma_v0_eff
    q_dev = (1.0 - material.k0) * sigma_v0_eff
    p_c = material.ocr * p_eff
    void_ratio = (
        material.e_ref
        - material.lambda_ * math.log(p_c / material.p_ref)
        + material.kappa * math.log(p_c / p_eff)
    )

    state = SoilState(p_eff=p_eff, q_dev=q_dev, void_ratio=void_ratio, p_c=p_c)
    logger.debug(
        "In-situ state p'=%.4g q=%.4g e=%.6f psi=%.5f",
        p_eff,
        q_dev,
        void_ratio,
        state_parameter(state, material),
    )
    return state


def initial_state(
    material: CasmMaterial,
    sigma_v0_eff: float,
    start_mode: StartMode = StartMode.IN_SITU_ANISOTROPIC,
) -> SoilState:
    """In-situ state, or the same p', e and p_c with the deviator removed."""
    state = initialize_in_situ(material, sigma_v0_eff)
    if start_mode is StartMode.ISOTROPIC:
        return state.model_copy(update={"q_dev": 0.0})
    return state
