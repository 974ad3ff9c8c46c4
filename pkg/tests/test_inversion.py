"""
Tests for normalized metrics and state parameter inversion.
"""

import math

import numpy as np
import pytest

from cptu_state.config import InterpretConfig
from cptu_state.exceptions import DomainError, InputError, NonPhysicalResistanceError
from cptu_state.fixtures import load_fixtures, reference_material, synthetic_record
from cptu_state.inversion import (
    PEZESHKI_AHMADI_LAMBDA_MIN,
    cone_resistance_oracle,
    cone_resistance_tensor,
    cq_factor,
    effective_resistance_for_method,
    estimate_beta,
    forward_resistance,
    interpret_profile,
    invert_psi,
    k0_correction,
    method_params,
    normalized_metrics,
)
from cptu_state.models import CptuRecord, InversionParams, K0Policy, Method

M_REF = 0.98383


def make_record(**overrides):
    """CPTu record at 100 kPa vertical effective stress, K0 = 0.6."""
    data = {
        "depth": 5.0,
        "q_c": 214.86,
        "u2": 162.76,
        "u0": 0.0,
        "sigma_v0": 100.0,
        "sigma_v0_eff": 100.0,
        "k0": 0.6,
    }
    data.update(overrides)
    return CptuRecord(**data)


def reference_rows():
    _, cptu_rows = load_fixtures()
    return [r for r in cptu_rows if r.series == "reference"]


class TestNormalizedMetrics:
    """Test normalized_metrics."""

    def test_material_a_record(self):
        """Test the record that reproduces the Material A row."""
        metrics = normalized_metrics(make_record())

        assert metrics.p0_eff == pytest.approx(73.3333, abs=1e-4)
        assert metrics.q_p == pytest.approx(1.93, abs=5e-3)
        assert metrics.b_q2 == pytest.approx(1.15, abs=5e-3)
        assert metrics.q_eff_u2 == pytest.approx(0.71, abs=5e-3)
        assert metrics.b_q1 is None
        assert metrics.q_eff_u1 is None

    def test_unit_resistance(self):
        """Test q_c = p0 + p'0 with no excess pressure."""
        p0_eff = 220.0 / 3.0
        metrics = normalized_metrics(make_record(q_c=2 * p0_eff + 10.0, u2=10.0, u0=10.0))

        assert metrics.q_p == pytest.approx(1.0)
        assert metrics.b_q2 == pytest.approx(0.0)
        assert metrics.q_eff_u2 == pytest.approx(2.0)

    def test_equal_transducers(self):
        """Test u1 = u2 gives equal pore pressure ratios."""
        metrics = normalized_metrics(make_record(u1=162.76))
        assert metrics.b_q1 == metrics.b_q2
        assert metrics.q_eff_u1 == metrics.q_eff_u2

    def test_undefined_bq(self):
        """Test q_c = p0 is refused."""
        with pytest.raises(InputError, match="undefined"):
            normalized_metrics(make_record(q_c=220.0 / 3.0))

    def test_missing_k0(self):
        """Test records without K0 cannot be normalized."""
        with pytest.raises(InputError, match="K0"):
            normalized_metrics(make_record(k0=None))

    def test_qt_alias(self):
        """Test q_t is accepted in place of q_c."""
        record = CptuRecord(
            depth=1.0, qt=300.0, u2=50.0, sigma_v0=100.0, sigma_v0_eff=80.0, k0=0.5
        )
        assert record.q_c == 300.0


class TestGeometricFactor:
    """Test cq_factor and the cone resistance oracle."""

    @pytest.mark.parametrize("M", [0.5, 0.98, 1.33, 1.4])
    def test_smooth_cone_is_one(self, M):
        """Test c_q(120) = 1."""
        assert cq_factor(120.0, M) == pytest.approx(1.0, abs=1e-12)

    def test_rough_cone(self):
        """Test c_q(150) = (7M + 6) / (4M + 6)."""
        assert cq_factor(150.0, M_REF) == pytest.approx(
            (7 * M_REF + 6) / (4 * M_REF + 6)
        )
        assert cq_factor(150.0, M_REF) == pytest.approx(1.297, abs=1e-3)
        assert cq_factor(121.0, M_REF) > 1.0

    @pytest.mark.parametrize("M", [0.2, 0.7, 1.0, 1.5])
    def test_increasing_up_to_rough_peak(self, M):
        """Test c_q increases on [120, 150] and peaks at 150."""
        values = [cq_factor(rho, M) for rho in np.linspace(120.0, 150.0, 31)]
        assert all(b > a for a, b in zip(values, values[1:], strict=False))
        assert max(cq_factor(rho, M) for rho in np.linspace(90.0, 180.0, 91)) == (
            pytest.approx(values[-1])
        )

    @pytest.mark.parametrize("rho", [89.9, 180.1])
    def test_domain(self, rho):
        """Test angles outside [90, 180] are refused."""
        with pytest.raises(InputError):
            cq_factor(rho, 1.0)
        with pytest.raises(InputError):
            cone_resistance_oracle(50.0, 1.0, rho, 0.0)

    def test_oracle_smooth_cone(self):
        """Test q_c equals the spherical cavity pressure for a smooth cone."""
        assert cone_resistance_oracle(40.0, M_REF, 120.0, 0.0) == pytest.approx(
            (1.0 + 2.0 * M_REF / 3.0) * 40.0
        )

    def test_oracle_hydrostatic(self):
        """Test M = 0 gives p'_cs + u for every angle."""
        for rho in (90.0, 120.0, 150.0, 180.0):
            assert cone_resistance_oracle(40.0, 0.0, rho, 15.0) == pytest.approx(55.0)

    def test_tensor_and_closed_form_agree(self):
        """Test the traction construction over a grid of angles and slopes."""
        for M in (0.3, 0.98, 1.33, 1.8):
            for rho in np.linspace(90.0, 180.0, 19):
                direct = cone_resistance_oracle(35.0, M, rho, 12.0)
                brute = cone_resistance_tensor(35.0, M, rho, 12.0)
                assert brute == pytest.approx(direct, rel=1e-10)
                ratio = (direct - 12.0) / ((1.0 + 2.0 * M / 3.0) * 35.0)
                assert ratio == pytest.approx(cq_factor(rho, M), rel=1e-12)


class TestMethodParams:
    """Test method_params."""

    def test_this_work(self):
        """Test the cavity-based parameters."""
        params = method_params(Method.THIS_WORK, 0.054, M_REF, 1.0)
        assert params.k_bar == pytest.approx(1.6559, abs=1e-4)
        assert params.m_bar == pytest.approx(18.5185, abs=1e-4)

    def test_plewes(self):
        """Test the Plewes parameters."""
        params = method_params(Method.PLEWES, 0.054, M_REF)
        assert params.k_bar == pytest.approx(9.692, abs=1e-3)
        assert params.m_bar == pytest.approx(10.2465, abs=1e-4)
        assert method_params(Method.PLEWES, 0.1, 1.4).m_bar == pytest.approx(8.838)

    def test_pezeshki_ahmadi(self):
        """Test the Pezeshki-Ahmadi parameters."""
        params = method_params(Method.PEZESHKI_AHMADI, 0.054, M_REF)
        assert params.k_bar == pytest.approx(M_REF * (3.3 - 0.035 / 0.054))
        assert params.m_bar == pytest.approx(6.0 + 0.1735 / 0.054)

    def test_pezeshki_ahmadi_boundary(self):
        """Test k_bar crosses zero at lambda = 0.0106."""
        assert PEZESHKI_AHMADI_LAMBDA_MIN == pytest.approx(0.0106, abs=1e-4)
        with pytest.raises(DomainError, match="non-positive k_bar"):
            method_params(Method.PEZESHKI_AHMADI, 0.0106, M_REF)
        with pytest.raises(DomainError):
            method_params(Method.PEZESHKI_AHMADI, 0.005, M_REF)
        assert method_params(Method.PEZESHKI_AHMADI, 0.0107, M_REF).k_bar > 0

    def test_rejects_non_positive_lambda(self):
        """Test lambda must be positive."""
        with pytest.raises(InputError):
            method_params(Method.THIS_WORK, 0.0, M_REF)


class TestEffectiveResistance:
    """Test effective_resistance_for_method."""

    def setup_method(self):
        """Set up the Material A record and reference config."""
        self.row = reference_rows()[0]
        self.record = synthetic_record(self.row)
        self.cfg = InterpretConfig.from_material(reference_material("A"))

    def test_this_work_with_face_pressure(self):
        """Test u1 is used when present."""
        assert effective_resistance_for_method(
            Method.THIS_WORK, self.record, self.cfg
        ) == pytest.approx(0.29, abs=0.01)

    def test_this_work_with_beta(self):
        """Test beta times u2 when u1 is absent."""
        record = self.record.model_copy(update={"u1": None})
        assert effective_resistance_for_method(
            Method.THIS_WORK, record, self.cfg
        ) == pytest.approx(0.267, abs=1e-3)

    def test_plewes(self):
        """Test the shoulder pressure resistance."""
        assert effective_resistance_for_method(
            Method.PLEWES, self.record, self.cfg
        ) == pytest.approx(0.71, abs=5e-3)

    def test_pezeshki_ahmadi_uses_vertical_stress(self):
        """Test B_q relative to the total vertical stress."""
        expected_bq = self.record.u2 / (self.record.q_c - self.record.sigma_v0)
        assert effective_resistance_for_method(
            Method.PEZESHKI_AHMADI, self.record, self.cfg
        ) == pytest.approx(self.row.q_p * (1.0 - expected_bq) + 1.0)


class TestInvertPsi:
    """Test invert_psi, forward_resistance and k0_correction."""

    def setup_method(self):
        """Set up the reference parameter pairs."""
        self.this_work = method_params(Method.THIS_WORK, 0.054, M_REF, 1.0)
        self.plewes = method_params(Method.PLEWES, 0.054, M_REF)

    def test_critical_state(self):
        """Test Q' = k_bar gives psi = 0."""
        assert invert_psi(self.this_work.k_bar, self.this_work) == 0.0

    def test_material_a(self):
        """Test the Material A inversions."""
        assert invert_psi(0.29, self.this_work) == pytest.approx(0.094, abs=1e-3)
        assert invert_psi(0.71, self.plewes) == pytest.approx(0.255, abs=1e-3)

    @pytest.mark.parametrize("q_prime", [0.0, -0.3])
    def test_non_physical(self, q_prime):
        """Test Q' <= 0 is refused."""
        with pytest.raises(NonPhysicalResistanceError):
            invert_psi(q_prime, self.this_work)

    def test_non_positive_k_bar(self):
        """Test inversion refuses k_bar <= 0."""
        params = InversionParams(method=Method.PEZESHKI_AHMADI, k_bar=-0.1, m_bar=60.0)
        with pytest.raises(DomainError):
            invert_psi(0.5, params)

    def test_round_trip(self):
        """Test invert_psi undoes forward_resistance."""
        params = InversionParams(method=Method.THIS_WORK, k_bar=2.3, m_bar=14.0)
        for psi in (-0.05, 0.0, 0.02, 0.1, 0.25):
            assert invert_psi(forward_resistance(psi, params), params) == pytest.approx(
                psi, abs=1e-12
            )

    def test_decreasing_in_resistance(self):
        """Test psi falls as Q' grows."""
        values = [invert_psi(q, self.this_work) for q in (0.2, 0.5, 1.0, 2.0)]
        assert values == sorted(values, reverse=True)

    def test_k0_correction(self):
        """Test the K0 correction values."""
        assert k0_correction(1.0, 18.0) == 0.0
        assert k0_correction(0.7, 1.0 / 0.054) == pytest.approx(0.0120, abs=1e-4)
        with pytest.raises(InputError):
            k0_correction(0.0, 18.0)

    def test_k0_assumption_error_bound(self):
        """Test assuming K0 = 0.7 costs less than 0.02 for lambda below 0.0896."""
        threshold = 0.02 / math.log(3.0 / 2.4)
        assert threshold == pytest.approx(0.0896, abs=1e-4)
        for lambda_ in np.linspace(0.01, 0.089, 20):
            m_bar = 1.0 / lambda_
            assumed = k0_correction(0.7, m_bar)
            worst = max(
                abs(k0_correction(k0, m_bar) - assumed)
                for k0 in np.linspace(0.5, 1.0, 51)
            )
            assert worst < 0.02
        m_bar = 1.0 / 0.1
        assert abs(k0_correction(1.0, m_bar) - k0_correction(0.7, m_bar)) > 0.02

    def test_k0_decomposition(self):
        """Test psi = psi_iso - correction, psi_iso normalizing by sigma'_v0."""
        record = synthetic_record(reference_rows()[0])
        cfg = InterpretConfig.from_material(reference_material("A"))
        params = method_params(Method.THIS_WORK, cfg.lambda_, cfg.M, 1.0)

        psi = invert_psi(
            effective_resistance_for_method(Method.THIS_WORK, record, cfg), params
        )
        isotropic = record.model_copy(update={"k0": 1.0})
        psi_iso = invert_psi(
            effective_resistance_for_method(Method.THIS_WORK, isotropic, cfg), params
        )

        assert psi == pytest.approx(psi_iso - k0_correction(0.6, params.m_bar))


class TestEstimateBeta:
    """Test estimate_beta."""

    def test_median_ratio(self):
        """Test the median of u1/u2 excess ratios."""
        records = [
            make_record(u0=10.0, u2=110.0, u1=130.0),
            make_record(u0=10.0, u2=110.0, u1=120.0),
            make_record(u0=10.0, u2=110.0, u1=140.0),
            make_record(u0=10.0, u2=110.0),
        ]
        assert estimate_beta(records) == pytest.approx(1.2)

    def test_no_face_pressure(self):
        """Test records without u1 cannot calibrate beta."""
        with pytest.raises(InputError, match="u1"):
            estimate_beta([make_record()])


class TestInterpretProfile:
    """Test interpret_profile."""

    def setup_method(self):
        """Set up the Material A interpretation config."""
        self.cfg = InterpretConfig.from_material(reference_material("A"))

    def test_empty(self):
        """Test an empty profile is refused."""
        with pytest.raises(InputError, match="empty"):
            interpret_profile([], self.cfg)

    def test_single_record(self):
        """Test a profile of one equals direct inversion."""
        record = make_record()
        rows = interpret_profile([record], self.cfg, {Method.PLEWES})

        params = method_params(Method.PLEWES, self.cfg.lambda_, self.cfg.M)
        expected = invert_psi(
            effective_resistance_for_method(Method.PLEWES, record, self.cfg), params
        )
        assert len(rows) == 1
        assert rows[0].psi == {Method.PLEWES: pytest.approx(expected)}
        assert rows[0].flags == []

    def test_sorted_by_depth(self):
        """Test rows come out ordered by depth."""
        records = [make_record(depth=d) for d in (7.0, 1.0, 3.0)]
        rows = interpret_profile(records, self.cfg)
        assert [row.depth for row in rows] == [1.0, 3.0, 7.0]

    def test_reference_round_trip(self):
        """Test this_work recovers psi_0 of the smooth reference series."""
        rows = reference_rows()
        records = [synthetic_record(r, depth=float(i)) for i, r in enumerate(rows)]
        no_face = [r.model_copy(update={"u1": None}) for r in records]

        with_u1 = interpret_profile(records, self.cfg, {Method.THIS_WORK})
        with_beta = interpret_profile(no_face, self.cfg, {Method.THIS_WORK})

        for row, a, b in zip(rows, with_u1, with_beta, strict=True):
            assert a.psi[Method.THIS_WORK] == pytest.approx(row.psi_0, abs=0.02)
            assert b.psi[Method.THIS_WORK] == pytest.approx(row.psi_0, abs=0.02)
        assert with_u1[0].psi[Method.THIS_WORK] == pytest.approx(0.094, abs=2e-3)
        assert with_beta[0].psi[Method.THIS_WORK] == pytest.approx(0.099, abs=2e-3)

    def test_method_ordering(self):
        """Test this_work beats Pezeshki-Ahmadi, which beats Plewes."""
        rows = reference_rows()
        records = [synthetic_record(r, depth=float(i)) for i, r in enumerate(rows)]
        profile = interpret_profile(records, self.cfg)

        def mae(method):
            return np.mean(
                [abs(p.psi[method] - r.psi_0) for p, r in zip(profile, rows, strict=True)]
            )

        assert mae(Method.THIS_WORK) < mae(Method.PEZESHKI_AHMADI) < mae(Method.PLEWES)
        assert all(
            p.psi[Method.PLEWES] > r.psi_0 for p, r in zip(profile, rows, strict=True)
        )

    def test_non_physical_record_is_flagged(self):
        """Test Q' <= 0 flags the row and the rest is computed."""
        p0_eff = 220.0 / 3.0
        bad = make_record(depth=2.0, q_c=2 * p0_eff, u2=3 * p0_eff)
        good = make_record(depth=4.0)

        rows = interpret_profile([good, bad], self.cfg, {Method.PLEWES})

        assert rows[0].psi[Method.PLEWES] is None
        assert rows[0].q_prime[Method.PLEWES] == pytest.approx(-1.0)
        assert "nonphysical_plewes" in rows[0].flags
        assert rows[1].psi[Method.PLEWES] is not None

    def test_missing_k0_is_flagged(self):
        """Test records without K0 are skipped under the given policy."""
        rows = interpret_profile([make_record(k0=None)], self.cfg)
        assert rows[0].flags == ["missing_k0"]
        assert rows[0].psi == {}

    def test_assumed_k0(self):
        """Test K0 = 0.7 is substituted and annotated."""
        cfg = self.cfg.model_copy(update={"k0_policy": K0Policy.ASSUME_0_7})
        rows = interpret_profile([make_record(k0=None)], cfg, {Method.THIS_WORK})
        expected = interpret_profile([make_record(k0=0.7)], cfg, {Method.THIS_WORK})

        assert rows[0].flags == ["k0_assumed"]
        assert rows[0].psi == expected[0].psi

    def test_undefined_bq_is_flagged(self):
        """Test q_c = p0 flags the row."""
        rows = interpret_profile([make_record(q_c=220.0 / 3.0)], self.cfg)
        assert rows[0].flags == ["bq_undefined"]
        assert rows[0].q_p is None

    def test_non_positive_k_bar_is_flagged(self):
        """Test small lambda disables Pezeshki-Ahmadi only."""
        cfg = self.cfg.model_copy(update={"lambda_": 0.01})
        rows = interpret_profile([make_record()], cfg)

        assert "kbar_nonpositive_pezeshki_ahmadi" in rows[0].flags
        assert rows[0].psi[Method.PEZESHKI_AHMADI] is None
        assert rows[0].psi[Method.THIS_WORK] is not None

    def test_dilatant_extrapolation_is_flagged(self):
        """Test psi < 0 is computed and annotated."""
        p0_eff = 220.0 / 3.0
        dense = make_record(q_c=p0_eff + 5 * p0_eff, u2=0.0)
        rows = interpret_profile([dense], self.cfg, {Method.THIS_WORK})

        assert rows[0].psi[Method.THIS_WORK] < 0
        assert rows[0].flags == ["dilatant_extrapolation_this_work"]
