"""
Tests for the bundled reference tables.
"""

from unittest.mock import patch

import pytest

from cptu_state import fixtures
from cptu_state.exceptions import InputError, IntegrityError
from cptu_state.fixtures import (
    fixtures_frame,
    load_fixtures,
    reference_material,
    series_definition,
    series_names,
    synthetic_record,
)
from cptu_state.inversion import normalized_metrics


def find_row(series, material):
    _, cptu_rows = load_fixtures()
    return next(r for r in cptu_rows if r.series == series and r.material == material)


class TestLoadFixtures:
    """Test load_fixtures."""

    def test_counts(self):
        """Test five materials and thirty CPTu rows."""
        material_rows, cptu_rows = load_fixtures()
        assert len(material_rows) == 5
        assert len(cptu_rows) == 30
        assert {r.series for r in cptu_rows} == set(series_names())

    def test_reference_a(self):
        """Test the first CPTu row."""
        row = find_row("reference", "A")
        assert row.q_p == 1.93
        assert row.b_q1 == 1.37
        assert row.b_q2 == 1.15

    def test_poisson_e(self):
        """Test the last CPTu row."""
        row = find_row("poisson", "E")
        assert row.q_p == 4.31
        assert row.b_q2 == 0.73

    def test_material_rows(self):
        """Test the Material A element test row."""
        material_rows, _ = load_fixtures()
        row = material_rows[0]
        assert row.material == "A"
        assert row.overrides == {"n_shape": 10.0, "r_spacing": 12.0, "gamma_c": 0.908}
        assert row.su_peak == 26.12

    def test_brittleness_consistency(self):
        """Test I_b = 1 - S_res / S_peak within 0.002."""
        material_rows, _ = load_fixtures()
        for row in material_rows:
            assert 1.0 - row.su_res / row.su_peak == pytest.approx(row.i_b, abs=0.002)

    def test_effective_resistance_identities(self):
        """Test Q_p(1 - B_q) + 1 within the propagated printed rounding."""
        _, cptu_rows = load_fixtures()

        for row in cptu_rows:
            for b, printed, scale in (
                (row.b_q1, row.q_eff_u1, 1.0),
                (row.b_q2, row.q_eff_u2, 1.0),
                (1.2 * row.b_q2, row.q_eff_beta, 1.2),
            ):
                computed = row.q_p * (1.0 - b) + 1.0
                allowed = (
                    0.005 * abs(1.0 - b) + 0.005 * scale * row.q_p + 0.005 + 1e-9
                )
                assert abs(computed - printed) <= allowed, (row.series, row.material)


class TestIntegrity:
    """Test checksum and count verification."""

    def setup_method(self):
        """Clear cached tables."""
        load_fixtures.cache_clear()
        fixtures._manifest.cache_clear()

    def teardown_method(self):
        """Clear tables loaded under the patch."""
        load_fixtures.cache_clear()
        fixtures._manifest.cache_clear()

    def test_corrupted_table(self):
        """Test a modified table fails its checksum."""
        real_read = fixtures._read_data

        def tampered(name):
            data = real_read(name)
            if name == "cptu.csv":
                return data.replace(b"1.93", b"1.94", 1)
            return data

        with patch("cptu_state.fixtures._read_data", side_effect=tampered):
            with pytest.raises(IntegrityError, match="Checksum mismatch"):
                load_fixtures()

    def test_truncated_table(self):
        """Test a row count mismatch is detected."""
        manifest = fixtures._manifest()

        with patch.dict(manifest["tables"]["materials"], {"rows": 6}):
            with pytest.raises(IntegrityError, match="expected 6"):
                load_fixtures()

    def test_unreadable_manifest(self):
        """Test a broken manifest is an integrity error."""
        fixtures._manifest.cache_clear()
        with patch("cptu_state.fixtures._read_data", return_value=b"{not json"):
            with pytest.raises(IntegrityError, match="manifest"):
                load_fixtures()


class TestReferenceMaterial:
    """Test reference_material and series definitions."""

    def test_reference_a(self):
        """Test the reference parameters of Material A."""
        material = reference_material("A")
        assert material.lambda_ == 0.054
        assert material.kappa == 0.016
        assert material.n_shape == 10
        assert material.r_spacing == 12
        assert material.gamma_c == 0.908
        assert material.ocr == 1.1
        assert material.k0 == 0.6

    def test_lambda_series(self):
        """Test compressibility overrides and the recomputed intercept."""
        material = reference_material("B", "lambda")
        assert material.lambda_ == 0.106
        assert material.kappa == 0.032
        assert material.gamma_c == pytest.approx(material.implied_gamma_c)

    def test_friction_series(self):
        """Test the friction series changes phi and K0."""
        material = reference_material("C", "friction")
        assert material.phi_cs == 33.0
        assert material.k0 == 0.47
        assert series_definition("friction").k0 == 0.47

    def test_rough_series(self):
        """Test the rough series uses a 150 degree principal stress angle."""
        definition = series_definition("rough")
        assert definition.rho == 150.0
        assert definition.note is not None
        assert reference_material("A", "rough") == reference_material("A")

    def test_unknown(self):
        """Test unknown materials and series."""
        with pytest.raises(InputError, match="material"):
            reference_material("F")
        with pytest.raises(InputError, match="series"):
            reference_material("A", "dense")


class TestSyntheticRecord:
    """Test synthetic_record."""

    def test_reproduces_row(self):
        """Test the record reproduces Q_p, B_q1 and B_q2."""
        for series in ("reference", "friction"):
            row = find_row(series, "D")
            metrics = normalized_metrics(synthetic_record(row))
            assert metrics.q_p == pytest.approx(row.q_p, abs=1e-12)
            assert metrics.b_q1 == pytest.approx(row.b_q1, abs=1e-12)
            assert metrics.b_q2 == pytest.approx(row.b_q2, abs=1e-12)

    def test_series_k0(self):
        """Test K0 comes from the series unless given."""
        row = find_row("friction", "A")
        assert synthetic_record(row).k0 == 0.47
        assert synthetic_record(row, k0=0.7).k0 == 0.7


class TestFixturesFrame:
    """Test fixtures_frame."""

    def test_materials(self):
        """Test the materials table columns."""
        frame = fixtures_frame("materials")
        assert list(frame.columns) == [
            "series",
            "material",
            "n_shape",
            "r_spacing",
            "gamma_c",
            "psi_0",
            "su_peak",
            "su_res",
            "i_b",
        ]
        assert len(frame) == 5

    def test_cptu(self):
        """Test the CPTu table size."""
        assert fixtures_frame("cptu").shape == (30, 13)

    def test_unknown(self):
        """Test unknown table names."""
        with pytest.raises(InputError):
            fixtures_frame("table4")
