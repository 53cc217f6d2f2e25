import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from attractorlab.spectral import (SpectrumError, block_eigenvalues,
                                   c1_obstruction_check, linearization_spectrum,
                                   make_spectrum, spectral_gap)


class TestMakeSpectrum:
    def test_linear_identity_family(self):
        spec = make_spectrum("linear", {"c": 1.0}, 5)
        assert np.allclose(spec.values, [1, 2, 3, 4, 5])

    def test_quadratic(self):
        spec = make_spectrum("quadratic", {}, 4)
        assert np.allclose(spec.values, [1, 4, 9, 16])

    def test_power_against_direct_exponentiation(self):
        spec = make_spectrum("power", {"kappa": 1.5}, 3)
        assert np.allclose(spec.values, [n**1.5 for n in (1, 2, 3)], rtol=1e-15)

    def test_explicit_rejects_non_monotone_with_index(self):
        with pytest.raises(SpectrumError, match="index 2"):
            make_spectrum("explicit", {"values": [1.0, 3.0, 2.0]}, 3)

    def test_analytic_extension_beyond_truncation(self):
        spec = make_spectrum("linear", {"c": 2.0}, 4)
        assert spec.lam(10) == 20.0
        explicit = make_spectrum("explicit", {"values": [1.0, 2.0]}, 2)
        with pytest.raises(SpectrumError):
            explicit.lam(3)


class TestSpectralGap:
    def test_linear_constant_gaps(self):
        assert spectral_gap(make_spectrum("linear", {"c": 1.0}, 6)) == 1.0

    def test_quadratic_unbounded(self):
        assert spectral_gap(make_spectrum("quadratic", {}, 6)) == "unbounded"

    def test_power_above_one_unbounded(self):
        assert spectral_gap(make_spectrum("power", {"kappa": 1.5}, 6)) == "unbounded"

    def test_explicit_max_gap(self):
        spec = make_spectrum("explicit", {"values": [1, 2, 4, 5, 7, 8]}, 6)
        assert spectral_gap(spec) == 2.0

    @given(st.lists(st.floats(min_value=0.01, max_value=10.0), min_size=3, max_size=12))
    def test_prefix_monotonicity(self, increments):
        vals = np.cumsum([1.0] + increments)
        spec = make_spectrum("explicit", {"values": list(vals)}, len(vals))
        for k in range(2, len(vals)):
            prefix = spec.truncated(k)
            assert spectral_gap(prefix) <= spectral_gap(spec) + 1e-12


class TestBlockEigenvalues:
    def test_known_complex_pairs(self):
        r1, r2 = block_eigenvalues(1.0, 2.0, 1.0)
        assert r1 == pytest.approx(complex(-1.5, math.sqrt(3) / 2), abs=1e-12)
        r1, r2 = block_eigenvalues(2.0, 3.0, 2.0)
        assert r1 == pytest.approx(complex(-2.5, 0.5 * math.sqrt(15)), abs=1e-12)

    def test_discriminant_boundary_double_root(self):
        r1, r2 = block_eigenvalues(1.0, 2.0, 0.5)
        assert r1 == r2 == pytest.approx(-1.5)

    @given(st.floats(min_value=0.1, max_value=50.0),
           st.floats(min_value=0.0, max_value=50.0),
           st.floats(min_value=0.0, max_value=30.0))
    def test_roots_satisfy_characteristic_polynomial(self, lam_a, gap, coupling):
        lam_b = lam_a + gap
        for root in block_eigenvalues(lam_a, lam_b, coupling):
            residual = root**2 + (lam_a + lam_b) * root + lam_a * lam_b + coupling**2
            scale = max(abs(root) ** 2, lam_a * lam_b + coupling**2)
            assert abs(residual) <= 1e-12 * scale

    def test_non_real_iff_coupling_beats_gap(self):
        assert block_eigenvalues(1.0, 2.0, 0.6)[0].imag != 0.0
        assert block_eigenvalues(1.0, 2.0, 0.4)[0].imag == 0.0


class TestLinearizationSpectrum:
    def test_minus_site_no_real_eigenvalues(self):
        spec = make_spectrum("linear", {"c": 1.0}, 8)
        out = linearization_spectrum(spec, 1.0, "minus")
        assert out.real_count == 0
        assert out.dense_mismatch <= 1e-9

    def test_plus_site_single_unstable_real(self):
        spec = make_spectrum("linear", {"c": 1.0}, 9)
        out = linearization_spectrum(spec, 2.0, "plus")
        assert out.real_count == 1
        assert out.real_eigenvalues[0] == pytest.approx(1.0, abs=1e-12)

    def test_small_coupling_all_real(self):
        spec = make_spectrum("linear", {"c": 1.0}, 8)
        out = linearization_spectrum(spec, 0.4, "minus")
        assert out.real_count == 8

    def test_orphaned_mode_rejected(self):
        spec = make_spectrum("linear", {"c": 1.0}, 7)
        with pytest.raises(SpectrumError, match="orphan"):
            linearization_spectrum(spec, 1.0, "minus")
        spec = make_spectrum("linear", {"c": 1.0}, 8)
        with pytest.raises(SpectrumError, match="orphan"):
            linearization_spectrum(spec, 1.0, "plus")

    def test_block_assembly_matches_dense_to_tolerance(self):
        spec = make_spectrum("explicit", {"values": [1.0, 2.5, 2.7, 4.0, 4.1, 6.0]}, 6)
        out = linearization_spectrum(spec, 1.3, "minus")
        assert out.dense_mismatch <= 1e-9


class TestObstruction:
    def test_contradiction_in_regime(self):
        spec = make_spectrum("linear", {"c": 1.0}, 33)
        verdict = c1_obstruction_check(spec, 2.0, 33)
        assert verdict.parity_contradiction
        assert verdict.minus_real_count == 0
        assert verdict.plus_real_count == 1
        assert verdict.minus_truncation == 32
        assert verdict.plus_truncation == 33

    def test_gap_condition_regime_no_obstruction(self):
        spec = make_spectrum("linear", {"c": 1.0}, 32)
        verdict = c1_obstruction_check(spec, 0.4, 32)
        assert not verdict.parity_contradiction
        assert not verdict.in_regime

    def test_explicit_spectrum_against_dense_oracle(self):
        # Dense eigensolver on the assembled 4x4 minus-site matrix gives zero
        # real eigenvalues (every in-block gap is below 2L), and the 3-mode
        # plus site has exactly one unstable real mode, so the parity clash
        # is certified here.
        spec = make_spectrum("explicit", {"values": [1.0, 2.0, 4.0, 5.0]}, 4)
        minus = linearization_spectrum(spec, 1.6, "minus")
        assert minus.real_count == 0 and minus.dense_mismatch <= 1e-9
        verdict = c1_obstruction_check(spec, 1.6, 4)
        assert verdict.minus_real_count == 0
        assert verdict.plus_real_count == 1
        assert verdict.parity_contradiction
