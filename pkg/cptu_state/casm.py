"""
CASM constitutive relations in triaxial invariant space and an undrained
triaxial compression driver.

Volumetric strains are compression positive. Rates use kappa* and lambda*
normalised with the reference void ratio, so the elastic and hardening laws
are the rate forms of linear e - ln p' lines.
"""

import logging
import math

from scipy.optimize import bisect

from .config import TriaxialConfig
from .exceptions import DomainError, InputError, IntegrationError
from .models import CasmMaterial, PathSample, SoilState, TriaxialResult

logger = logging.getLogger(__name__)

# Flow rule is singular at eta = 0; the driver evaluates it no lower than this.
_ETA_FLOOR = 1e-9
_MIN_SUBSTEP = 1e-12
_MAX_DRIFT_ITER = 10


def _yield(p: float, q: float, p_c: float, M: float, n: float, ln_r: float) -> float:
    return (q / (M * p)) ** n + math.log(p / p_c) / ln_r


def _dilatancy(eta: float, M: float, m: float) -> float:
    return (m - 1.0) / m * (M**m - eta**m) / eta ** (m - 1.0)


def yield_value(state: SoilState, material: CasmMaterial) -> float:
    """
    Evaluate the CASM yield function at a state.

    Args:
        state: Current stress state and preconsolidation pressure
        material: Soil parameter set

    Returns:
        f; negative inside the yield surface, zero on it
    """
    return _yield(
        state.p_eff,
        state.q_dev,
        state.p_c,
        material.M,
        material.n_shape,
        math.log(material.r_spacing),
    )


def shear_modulus(p_eff_0: float, kappa_star: float, nu: float) -> float:
    """Constant shear modulus fixed at the initial mean effective stress."""
    return 3.0 * (1.0 - 2.0 * nu) / (2.0 * (1.0 + nu)) * p_eff_0 / kappa_star


def elastic_moduli(
    p_eff_0: float, material: CasmMaterial, e0: float
) -> tuple[float, float]:
    """
    Tangent bulk modulus and constant shear modulus.

    Args:
        p_eff_0: Mean effective stress in kPa
        material: Soil parameter set
        e0: Void ratio normalising kappa into kappa*

    Returns:
        (bulk, shear) in kPa

    Raises:
        InputError: If the mean stress is not positive
    """
    if p_eff_0 <= 0:
        raise InputError(f"Mean effective stress must be positive, got {p_eff_0}")
    kappa_star = material.kappa / (1.0 + e0)
    return p_eff_0 / kappa_star, shear_modulus(p_eff_0, kappa_star, material.nu)


def dilatancy(eta: float, material: CasmMaterial) -> float:
    """
    Plastic dilatancy d = deps_v^p / deps_q^p at stress ratio eta.

    Raises:
        DomainError: If eta is not positive (flow rule singular)
    """
    if eta <= 0:
        raise DomainError(f"Flow rule is undefined for stress ratio {eta}")
    return _dilatancy(eta, material.M, material.m_flow)


def hardening_rate(
    p_c: float, d_eps_v_p: float, material: CasmMaterial, e0: float
) -> float:
    """Change of preconsolidation pressure for a plastic volumetric increment."""
    if p_c <= 0:
        raise InputError(f"Preconsolidation pressure must be positive, got {p_c}")
    lambda_star = material.lambda_ / (1.0 + e0)
    kappa_star = material.kappa / (1.0 + e0)
    return p_c * d_eps_v_p / (lambda_star - kappa_star)


def residual_strength_analytic(
    p_eff_0: float, psi_0: float, material: CasmMaterial
) -> float:
    """Undrained residual strength M/2 * p'_0 exp(-psi_0 / lambda)."""
    if p_eff_0 <= 0:
        raise InputError(f"Mean effective stress must be positive, got {p_eff_0}")
    return 0.5 * material.M * p_eff_0 * math.exp(-psi_0 / material.lambda_)


def rigidity_index(g_modulus: float, su: float) -> float:
    """Rigidity index G / S_u."""
    if su <= 0:
        raise InputError(f"Undrained strength must be positive, got {su}")
    return g_modulus / su


class UndrainedTriaxialDriver:
    """
    Strain-driven undrained triaxial compression of a CASM element.

    The total volumetric strain is held at zero, so elastic and plastic
    volumetric strains cancel at every step. Plastic steps use modified Euler
    substepping with local error control followed by yield surface drift
    correction.
    """

    def __init__(
        self, material: CasmMaterial, config: TriaxialConfig | None = None
    ) -> None:
        """Initialize with a material and driver settings."""
        self.material = material
        self.config = config or TriaxialConfig()

        self._M = material.M
        self._n = material.n_shape
        self._m = material.m_flow
        self._ln_r = math.log(material.r_spacing)
        self._kappa_star = material.kappa_star
        self._h_coef = 1.0 / (material.lambda_star - material.kappa_star)
        self._three_g = 0.0
        self._void_ratio = 0.0
        self._substep = self.config.step_dev_strain

    def _f(self, p: float, q: float, p_c: float) -> float:
        return _yield(p, q, p_c, self._M, self._n, self._ln_r)

    def _gradients(
        self, p: float, q: float, p_c: float
    ) -> tuple[float, float, float, float]:
        """Return (f_p, f_q, dilatancy, consistency denominator)."""
        ratio_n = (q / (self._M * p)) ** self._n
        f_q = self._n * ratio_n / q if q > 0 else 0.0
        f_p = (1.0 / self._ln_r - self._n * ratio_n) / p
        d = _dilatancy(max(q / p, _ETA_FLOOR), self._M, self._m)
        bulk = p / self._kappa_star
        denom = f_p * bulk * d + self._three_g * f_q + d * self._h_coef / self._ln_r
        return f_p, f_q, d, denom

    def _plastic_rate(
        self, p: float, q: float, p_c: float, d_eps_q: float
    ) -> tuple[float, float, float]:
        """Elastoplastic increments (dp, dq, dp_c) for an undrained shear increment."""
        _, f_q, d, denom = self._gradients(p, q, p_c)
        d_lambda = self._three_g * f_q * d_eps_q / denom if denom > 0 else 0.0
        if d_lambda <= 0:
            return 0.0, self._three_g * d_eps_q, 0.0

        bulk = p / self._kappa_star
        return (
            -bulk * d * d_lambda,
            self._three_g * (d_eps_q - d_lambda),
            p_c * d * self._h_coef * d_lambda,
        )

    def _correct_drift(
        self, p: float, q: float, p_c: float
    ) -> tuple[float, float, float]:
        """Return the state to the yield surface along the plastic flow."""
        tol = self.config.yield_tol
        for _ in range(_MAX_DRIFT_ITER):
            f = self._f(p, q, p_c)
            if abs(f) <= tol:
                return p, q, p_c

            f_p, f_q, d, denom = self._gradients(p, q, p_c)
            d_lambda = f / denom
            bulk = p / self._kappa_star
            p_new = p - d_lambda * bulk * d
            q_new = q - d_lambda * self._three_g
            p_c_new = p_c + d_lambda * p_c * d * self._h_coef

            if p_new <= 0 or q_new < 0 or abs(self._f(p_new, q_new, p_c_new)) > abs(f):
                # Consistent correction diverged; project normal to the surface.
                scale = f / (f_p * f_p + f_q * f_q)
                p_new, q_new, p_c_new = p - scale * f_p, q - scale * f_q, p_c
            p, q, p_c = p_new, q_new, p_c_new

        if abs(self._f(p, q, p_c)) > tol:
            raise IntegrationError(
                "Yield surface drift correction did not converge",
                self._state(p, q, p_c),
            )
        return p, q, p_c

    def _integrate_plastic(
        self, p: float, q: float, p_c: float, d_eps_q: float
    ) -> tuple[float, float, float]:
        """Modified Euler integration of one plastic strain increment."""
        tol = self.config.substep_rel_tol
        done = 0.0
        while done < d_eps_q:
            step = min(self._substep, d_eps_q - done)
            dp1, dq1, dpc1 = self._plastic_rate(p, q, p_c, step)
            p1, q1, p_c1 = p + dp1, q + dq1, p_c + dpc1
            p_new = q_new = p_c_new = 0.0

            if p1 > 0 and q1 >= 0 and p_c1 > 0:
                dp2, dq2, dpc2 = self._plastic_rate(p1, q1, p_c1, step)
                p_new = p + 0.5 * (dp1 + dp2)
                q_new = q + 0.5 * (dq1 + dq2)
                p_c_new = p_c + 0.5 * (dpc1 + dpc2)
                error = max(
                    0.5 * math.hypot(dp2 - dp1, dq2 - dq1) / math.hypot(p_new, q_new),
                    0.5 * abs(dpc2 - dpc1) / p_c_new if p_c_new > 0 else math.inf,
                )
            else:
                error = math.inf

            if error > tol or p_new <= 0 or q_new < 0:
                factor = 0.9 * math.sqrt(tol / error) if math.isfinite(error) else 0.1
                self._substep = step * max(factor, 0.1)
                logger.debug("Substep rejected, error %.3g, retry with %.3g", error, self._substep)
                if self._substep < _MIN_SUBSTEP:
                    raise IntegrationError(
                        "Substep fell below the minimum size",
                        self._state(p, q, p_c),
                    )
                continue

            p, q, p_c = self._correct_drift(p_new, q_new, p_c_new)
            done += step
            growth = 0.9 * math.sqrt(tol / error) if error > 0 else 1.1
            self._substep = step * min(growth, 1.1)

        return p, q, p_c

    def _step(
        self, p: float, q: float, p_c: float, d_eps_q: float
    ) -> tuple[float, float, float]:
        """Advance one driver increment, splitting at first yield if needed."""
        tol = self.config.yield_tol
        f0 = self._f(p, q, p_c)
        if f0 >= -tol:
            return self._integrate_plastic(p, q, p_c, d_eps_q)

        dq_elastic = self._three_g * d_eps_q
        if self._f(p, q + dq_elastic, p_c) <= tol:
            return p, q + dq_elastic, p_c

        alpha = bisect(
            lambda a: self._f(p, q + a * dq_elastic, p_c), 0.0, 1.0, xtol=1e-15
        )
        q_yield = q + alpha * dq_elastic
        logger.debug("First yield at p'=%.4g q=%.4g", p, q_yield)
        return self._integrate_plastic(p, q_yield, p_c, (1.0 - alpha) * d_eps_q)

    def _state(self, p: float, q: float, p_c: float) -> SoilState:
        return SoilState(
            p_eff=p, q_dev=max(q, 0.0), void_ratio=self._void_ratio, p_c=p_c
        )

    def run(self, initial: SoilState) -> TriaxialResult:
        """
        Shear the element to the configured deviatoric strain.

        Args:
            initial: Starting state, inside or on the yield surface

        Returns:
            Sampled path with peak and residual strengths

        Raises:
            InputError: If the initial state lies outside the yield surface
            IntegrationError: If substepping or drift correction fails
        """
        cfg = self.config
        if yield_value(initial, self.material) > cfg.yield_tol:
            raise InputError("Initial state lies outside the yield surface")

        p0, q0 = initial.p_eff, initial.q_dev
        _, g_modulus = elastic_moduli(p0, self.material, self.material.e_ref)
        self._three_g = 3.0 * g_modulus
        self._void_ratio = initial.void_ratio
        self._substep = cfg.step_dev_strain

        n_steps = max(1, round(cfg.max_dev_strain / cfg.step_dev_strain))
        d_eps_q = cfg.max_dev_strain / n_steps
        p, q, p_c = p0, q0, initial.p_c

        path = [
            PathSample(
                eps_q=0.0,
                p_eff=p,
                q_dev=q,
                excess_pore_pressure=0.0,
                void_ratio=self._void_ratio,
            )
        ]
        logger.debug("Undrained triaxial: %d steps of %.3g", n_steps, d_eps_q)
        for i in range(1, n_steps + 1):
            p, q, p_c = self._step(p, q, p_c, d_eps_q)
            path.append(
                PathSample(
                    eps_q=i * d_eps_q,
                    p_eff=p,
                    q_dev=q,
                    excess_pore_pressure=(q - q0) / 3.0 - (p - p0),
                    void_ratio=self._void_ratio,
                )
            )

        su_peak = max(sample.q_dev for sample in path) / 2.0
        su_res = q / 2.0
        brittleness = 1.0 - su_res / su_peak if su_peak > 0 else 0.0
        logger.debug(
            "Su peak %.4g, residual %.4g, I_b %.4f", su_peak, su_res, brittleness
        )
        return TriaxialResult(
            path=path,
            su_peak=su_peak,
            su_res=su_res,
            brittleness=brittleness,
            final_state=self._state(p, q, p_c),
            g_modulus=g_modulus,
        )


def simulate_undrained_triaxial(
    material: CasmMaterial,
    initial: SoilState,
    config: TriaxialConfig | None = None,
) -> TriaxialResult:
    """Run an undrained triaxial compression test from ``initial``."""
    return UndrainedTriaxialDriver(material, config).run(initial)
