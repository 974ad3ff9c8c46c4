"""
Pydantic models for soil parameters, element-test output, cavity solutions
and CPTu records.
"""

import json
import math
from enum import StrEnum
from pathlib import Path
from typing import Any

from pydantic import (
    AliasChoices,
    BaseModel,
    ConfigDict,
    Field,
    field_validator,
    model_validator,
)

from .exceptions import InputError


class SlopeGeometry(StrEnum):
    """Loading condition selecting the CSL slope in p'-q space."""

    TRIAXIAL = "triaxial"
    PLANE_STRAIN = "plane_strain"


class StartMode(StrEnum):
    """Initial stress state of an element test."""

    IN_SITU_ANISOTROPIC = "in_situ_anisotropic"
    ISOTROPIC = "isotropic"


class Method(StrEnum):
    """State parameter inversion methods."""

    THIS_WORK = "this_work"
    PLEWES = "plewes"
    PEZESHKI_AHMADI = "pezeshki_ahmadi"


class K0Policy(StrEnum):
    """What to do with records that carry no K0."""

    GIVEN = "given"
    ASSUME_0_7 = "assume_0_7"


class CasmMaterial(BaseModel):
    """CASM constitutive and critical state parameter set.

    Stresses in kPa, angles in degrees. ``lambda`` is exposed as ``lambda_``
    in Python and read/written under its plain name in JSON.
    """

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    lambda_: float = Field(alias="lambda", gt=0)
    kappa: float = Field(gt=0)
    nu: float = Field(gt=0, lt=0.5)
    phi_cs: float = Field(gt=0, lt=90)
    n_shape: float = Field(ge=1)
    r_spacing: float = Field(gt=1)
    m_flow: float = Field(gt=1)
    gamma_c: float
    e_ref: float = Field(gt=0)
    p_ref: float = Field(default=100.0, gt=0)
    ocr: float = Field(ge=1)
    k0: float = Field(gt=0, le=1)

    @model_validator(mode="after")
    def lambda_exceeds_kappa(self) -> "CasmMaterial":
        if self.lambda_ <= self.kappa:
            raise ValueError("lambda must exceed kappa")
        if not 0 < self.M < 3:
            raise ValueError("critical state slope M must lie in (0, 3)")
        return self

    @property
    def M(self) -> float:
        """Triaxial compression CSL slope."""
        from .material import csl_slope_M

        return csl_slope_M(self.phi_cs, SlopeGeometry.TRIAXIAL)

    @property
    def lambda_star(self) -> float:
        return self.lambda_ / (1.0 + self.e_ref)

    @property
    def kappa_star(self) -> float:
        return self.kappa / (1.0 + self.e_ref)

    @property
    def plastic_ratio(self) -> float:
        """Plastic volumetric ratio (lambda - kappa) / lambda."""
        return (self.lambda_ - self.kappa) / self.lambda_

    @property
    def implied_gamma_c(self) -> float:
        """CSL intercept at p_ref implied by the yield surface spacing ratio.

        This is where the element model reaches critical state; it differs
        slightly from a tabulated ``gamma_c`` when both are given independently.
        """
        return self.e_ref - (self.lambda_ - self.kappa) * math.log(self.r_spacing)

    def with_overrides(self, **fields: float) -> "CasmMaterial":
        """Return a validated copy with some parameters replaced."""
        data = self.model_dump(by_alias=True)
        for key, value in fields.items():
            data["lambda" if key == "lambda_" else key] = value
        return CasmMaterial.model_validate(data)

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True, indent=2)

    @classmethod
    def from_json(cls, path: str | Path) -> "CasmMaterial":
        """Load a material definition from a JSON file."""
        try:
            with open(path, encoding="utf-8") as fh:
                data: dict[str, Any] = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise InputError(f"Cannot read material file {path}: {e}") from e
        return cls.model_validate(data)


class SoilState(BaseModel):
    """Point state in triaxial invariant space."""

    model_config = ConfigDict(frozen=True)

    p_eff: float = Field(gt=0)
    q_dev: float = Field(ge=0)
    void_ratio: float = Field(gt=0)
    p_c: float = Field(gt=0)

    @property
    def eta(self) -> float:
        return self.q_dev / self.p_eff


class PathSample(BaseModel):
    """One recorded point of an undrained triaxial path."""

    eps_q: float
    p_eff: float
    q_dev: float
    excess_pore_pressure: float
    void_ratio: float


class TriaxialResult(BaseModel):
    """Undrained triaxial compression output."""

    path: list[PathSample]
    su_peak: float = Field(ge=0)
    su_res: float = Field(ge=0)
    brittleness: float
    final_state: SoilState
    g_modulus: float = Field(gt=0)

    @field_validator("path")
    @classmethod
    def path_not_empty(cls, v: list[PathSample]) -> list[PathSample]:
        if not v:
            raise ValueError("Triaxial path cannot be empty")
        return v


class CavityResult(BaseModel):
    """Limit pressures and normalized metrics of an undrained cavity."""

    sigma_c: float
    sigma_c_eff: float
    u_c: float
    q_bar_p: float
    b_bar_q: float
    q_eff_bar: float


class CptuRecord(BaseModel):
    """Raw CPTu readings at one depth (kPa, m)."""

    model_config = ConfigDict(populate_by_name=True)

    depth: float = Field(ge=0)
    q_c: float = Field(validation_alias=AliasChoices("q_c", "qc", "qt", "q_t"))
    u2: float
    u1: float | None = None
    u0: float = 0.0
    sigma_v0: float = Field(ge=0)
    sigma_v0_eff: float = Field(ge=0)
    k0: float | None = Field(default=None, gt=0)

    @model_validator(mode="after")
    def total_exceeds_effective(self) -> "CptuRecord":
        if self.sigma_v0 < self.sigma_v0_eff:
            raise ValueError("sigma_v0 must not be smaller than sigma_v0_eff")
        return self


class NormalizedMetrics(BaseModel):
    """Mean-stress normalized cone metrics."""

    q_p: float
    b_q1: float | None = None
    b_q2: float
    q_eff_u1: float | None = None
    q_eff_u2: float
    p0: float
    p0_eff: float = Field(gt=0)


class InversionParams(BaseModel):
    """Inversion pair (k_bar, m_bar) of Q' = k_bar exp(-m_bar psi)."""

    model_config = ConfigDict(frozen=True)

    method: Method
    k_bar: float = Field(allow_inf_nan=False)
    m_bar: float = Field(gt=0, allow_inf_nan=False)


class ProfileRow(BaseModel):
    """Interpreted state parameter at one sounding depth."""

    depth: float
    q_p: float | None = None
    b_q1: float | None = None
    b_q2: float | None = None
    q_prime: dict[Method, float | None] = Field(default_factory=dict)
    psi: dict[Method, float | None] = Field(default_factory=dict)
    flags: list[str] = Field(default_factory=list)


class FixtureMaterialRow(BaseModel):
    """Element-test reference row."""

    series: str
    material: str
    overrides: dict[str, float]
    psi_0: float
    su_peak: float
    su_res: float
    i_b: float


class FixtureCptuRow(BaseModel):
    """Steady-state CPTu and cavity reference row."""

    series: str
    material: str
    psi_0: float
    su_peak: float
    su_res: float
    q_p: float
    b_q1: float
    b_q2: float
    q_eff_u1: float
    q_eff_u2: float
    q_eff_beta: float
    cav_sph: float
    cav_cyl: float
