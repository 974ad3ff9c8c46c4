"""
CPTu state parameter toolkit

Critical state element tests and cavity expansion solutions in CASM, and
inversion of the initial state parameter of contractive soils from
undrained piezocone soundings.
"""

from .casm import simulate_undrained_triaxial
from .cavity import CavityGeometry, effective_limit_pressure, total_limit_pressure
from .config import InterpretConfig, TriaxialConfig
from .inversion import interpret_profile, invert_psi, method_params
from .material import initialize_in_situ, state_parameter
from .models import CasmMaterial, CptuRecord, Method, SoilState

__version__ = "0.1.0"
__all__ = [
    "CasmMaterial",
    "CavityGeometry",
    "CptuRecord",
    "InterpretConfig",
    "Method",
    "SoilState",
    "TriaxialConfig",
    "effective_limit_pressure",
    "initialize_in_situ",
    "interpret_profile",
    "invert_psi",
    "method_params",
    "simulate_undrained_triaxial",
    "state_parameter",
    "total_limit_pressure",
]
