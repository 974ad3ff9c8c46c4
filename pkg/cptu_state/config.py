"""
Configuration objects for element tests, profile interpretation and runtime.
"""

import json
import logging
import os
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, field_validator

from .exceptions import InputError
from .models import CasmMaterial, K0Policy, StartMode


class TriaxialConfig(BaseModel):
    """Undrained triaxial driver settings."""

    model_config = ConfigDict(frozen=True)

    max_dev_strain: float = Field(default=0.50, gt=0)
    step_dev_strain: float = Field(default=1e-4, gt=0)
    substep_rel_tol: float = Field(default=1e-6, gt=0)
    yield_tol: float = Field(default=1e-8, gt=0)
    start_mode: StartMode = StartMode.IN_SITU_ANISOTROPIC


class InterpretConfig(BaseModel):
    """Profile interpretation settings.

    Either ``c_q`` is given directly or it is derived from the principal
    stress rotation ``rho`` (120 degrees for a smooth cone; rough cones show
    angles around 150 degrees).
    """

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    lambda_: float = Field(alias="lambda", gt=0)
    M: float = Field(gt=0, lt=3)
    c_q: float | None = Field(default=None, gt=0)
    rho: float = Field(default=120.0, ge=90, le=180)
    beta: float = Field(default=1.2, gt=0)
    k0_policy: K0Policy = K0Policy.GIVEN

    @property
    def geometric_factor(self) -> float:
        """c_q, given or computed from rho."""
        if self.c_q is not None:
            return self.c_q
        from .inversion import cq_factor

        return cq_factor(self.rho, self.M)

    @classmethod
    def from_material(cls, material: CasmMaterial, **overrides: Any) -> "InterpretConfig":
        """Take lambda and M from a material definition."""
        data: dict[str, Any] = {"lambda": material.lambda_, "M": material.M}
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls.model_validate(data)

    @classmethod
    def from_json(cls, path: str | Path, **overrides: Any) -> "InterpretConfig":
        """Load a JSON config; non-None keyword overrides win."""
        try:
            with open(path, encoding="utf-8") as fh:
                data: dict[str, Any] = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise InputError(f"Cannot read interpretation config {path}: {e}") from e
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls.model_validate(data)


class RuntimeConfig(BaseModel):
    """Process-level settings."""

    log_level: str = "WARNING"

    @field_validator("log_level")
    @classmethod
    def known_level(cls, v: str) -> str:
        level = v.upper()
        if level not in logging.getLevelNamesMapping():
            raise ValueError(f"Unknown log level: {v}")
        return level

    @classmethod
    def from_env(cls) -> "RuntimeConfig":
        """Create config from environment variables."""
        log_level = os.getenv("CPTU_STATE_LOG_LEVEL")

        if not log_level:
            return cls()

        return cls(log_level=log_level)
