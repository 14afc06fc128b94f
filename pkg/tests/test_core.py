import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fdnls.core import (
    Field,
    Lattice,
    ModelParams,
    Representation,
    dyadic_scales,
    forward_dft,
    forward_dft_direct,
    fractional_symbol,
    inverse_dft,
    lebesgue_norm_h,
    littlewood_paley_project,
    low_pass_project,
    minimal_dyadic_scale,
    shell_mask,
    single_mode_field,
    sobolev_norm_h,
    symbol_sigma_h,
)

TWO_PI = 2.0 * math.pi


def random_field(lattice, seed):
    rng = np.random.Generator(np.random.Philox(seed))
    v = rng.normal(size=lattice.n_sites) + 1j * rng.normal(size=lattice.n_sites)
    return Field(lattice, v)


class TestLattice:
    def test_mesh_is_derived_from_m(self):
        lat = Lattice(7)
        assert lat.h * lat.M == pytest.approx(math.pi, abs=0)
        assert lat.n_sites == 14
        assert len(lat.sites()) == len(lat.dual()) == 14

    def test_sites_cover_half_open_torus(self):
        lat = Lattice(4)
        assert lat.sites()[0] == pytest.approx(-math.pi)
        assert lat.sites()[-1] == pytest.approx(math.pi - lat.h)

    def test_rejects_bad_size(self):
        with pytest.raises(ValueError):
            Lattice(0)

    def test_mode_index_range(self):
        lat = Lattice(4)
        assert lat.index_of_mode(-4) == 0
        with pytest.raises(ValueError):
            lat.index_of_mode(4)


class TestModelParams:
    def test_alpha_range(self):
        ModelParams(2.0, -1)
        with pytest.raises(ValueError):
            ModelParams(2.5, -1)
        with pytest.raises(ValueError):
            ModelParams(0.0, -1)

    def test_mu_values(self):
        with pytest.raises(ValueError):
            ModelParams(1.5, 2)


class TestTransforms:
    def test_constant_hits_zero_mode_only(self):
        lat = Lattice(6)
        f = Field(lat, np.full(12, 3.0 + 0j))
        g = forward_dft(f)
        expected = np.zeros(12, dtype=complex)
        expected[lat.index_of_mode(0)] = TWO_PI * 3.0
        np.testing.assert_allclose(g.values, expected, atol=1e-12)

    @pytest.mark.parametrize("n", [1, -3, 5])
    def test_single_mode_orthogonality(self, n):
        lat = Lattice(6)
        f = single_mode_field(lat, n, 1.0)
        g = forward_dft(f)
        expected = np.zeros(12, dtype=complex)
        expected[lat.index_of_mode(n)] = TWO_PI
        np.testing.assert_allclose(g.values, expected, atol=1e-12)

    @pytest.mark.parametrize("M", [8, 12, 50])
    def test_fft_agrees_with_direct_summation(self, M):
        f = random_field(Lattice(M), seed=M)
        fast = forward_dft(f)
        slow = forward_dft_direct(f)
        np.testing.assert_allclose(fast.values, slow.values, atol=1e-10)

    @pytest.mark.parametrize("M", [8, 12])
    def test_roundtrip_identity(self, M):
        f = random_field(Lattice(M), seed=3 * M + 1)
        back = inverse_dft(forward_dft(f))
        scale = np.max(np.abs(f.values))
        assert np.max(np.abs(back.values - f.values)) <= 1e-12 * scale

    def test_representation_mismatch_rejected(self):
        f = random_field(Lattice(4), seed=0)
        with pytest.raises(ValueError):
            inverse_dft(f)
        with pytest.raises(ValueError):
            forward_dft(forward_dft(f))

    @given(seed=st.integers(0, 2**32 - 1), M=st.sampled_from([4, 8, 16, 50]))
    @settings(max_examples=25, deadline=None)
    def test_parseval(self, seed, M):
        f = random_field(Lattice(M), seed)
        lhs = lebesgue_norm_h(f, 2) ** 2
        rhs = np.sum(np.abs(forward_dft(f).values) ** 2) / TWO_PI
        assert abs(lhs - rhs) <= 1e-10 * lhs


class TestSymbol:
    def test_vanishes_at_zero(self):
        assert symbol_sigma_h(Lattice(5), 1.3, 0) == 0.0

    def test_boundary_alias_value(self):
        # sin(pi/2) = 1 forces (2/h)^alpha
        val = symbol_sigma_h(Lattice(5), 2.0, -5)
        assert val == pytest.approx((10.0 / math.pi) ** 2, rel=1e-14)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            symbol_sigma_h(Lattice(5), 2.0, 5)

    def test_second_order_convergence_to_continuum(self):
        # sigma_h(3) -> 3^1.5 at O(h^2)
        target = 3.0**1.5
        errs, hs = [], []
        for M in (8, 16, 32, 64, 128):
            lat = Lattice(M)
            errs.append(abs(symbol_sigma_h(lat, 1.5, 3) - target))
            hs.append(lat.h)
        order = np.polyfit(np.log(hs), np.log(errs), 1)[0]
        assert order >= 1.9

    @given(M=st.sampled_from([4, 8, 50]), alpha=st.floats(0.25, 2.0))
    @settings(max_examples=25, deadline=None)
    def test_even_and_monotone_in_abs_k(self, M, alpha):
        lat = Lattice(M)
        k = np.arange(0, M + 1)
        vals = fractional_symbol(lat.h, alpha, k)
        assert np.all(np.diff(vals) >= -1e-14)
        neg = fractional_symbol(lat.h, alpha, -k)
        np.testing.assert_allclose(vals, neg, rtol=1e-14)


class TestLittlewoodPaley:
    def test_minimal_scale_power_of_two_mesh(self):
        assert minimal_dyadic_scale(Lattice(8)) == pytest.approx(1.0 / 16.0)
        assert minimal_dyadic_scale(Lattice(50)) == pytest.approx(1.0 / 64.0)

    @pytest.mark.parametrize("M", [8, 50])
    def test_partition_of_identity(self, M):
        f = random_field(Lattice(M), seed=11)
        total = np.zeros(f.lattice.n_sites, dtype=complex)
        for N in dyadic_scales(f.lattice):
            total += littlewood_paley_project(f, N).values
        np.testing.assert_allclose(total, f.values, atol=1e-12)

    def test_shells_mutually_orthogonal(self):
        lat = Lattice(16)
        f = random_field(lat, seed=2)
        scales = dyadic_scales(lat)
        pieces = [forward_dft(littlewood_paley_project(f, N)).values for N in scales]
        for i in range(len(pieces)):
            for j in range(i + 1, len(pieces)):
                assert abs(np.vdot(pieces[i], pieces[j])) <= 1e-18

    def test_single_mode_shell_membership_exhaustive(self):
        lat = Lattice(8)
        for k in lat.dual():
            f = single_mode_field(lat, int(k), 1.0)
            for N in dyadic_scales(lat):
                proj = littlewood_paley_project(f, N)
                if shell_mask(lat, N)[lat.index_of_mode(int(k))]:
                    np.testing.assert_allclose(proj.values, f.values, atol=1e-12)
                else:
                    np.testing.assert_allclose(proj.values, 0.0, atol=1e-12)

    def test_base_scale_is_complement(self):
        lat = Lattice(8)
        pieces = sum(shell_mask(lat, N).astype(int) for N in dyadic_scales(lat))
        assert np.all(pieces == 1)

    def test_invalid_scale_rejected(self):
        lat = Lattice(8)
        with pytest.raises(ValueError):
            littlewood_paley_project(random_field(lat, 0), 0.3)
        with pytest.raises(ValueError):
            littlewood_paley_project(random_field(lat, 0), 2.0)

    def test_low_pass_keeps_band(self):
        lat = Lattice(8)
        f = random_field(lat, seed=9)
        g = forward_dft(low_pass_project(f, 0.5))
        outside = np.abs(lat.dual()) > 4
        np.testing.assert_allclose(g.values[outside], 0.0, atol=1e-14)


class TestNorms:
    def test_sobolev_constant_field(self):
        lat = Lattice(8)
        f = Field(lat, np.full(16, 2.5 + 0j))
        for s in (-1.0, 0.0, 1.7):
            assert sobolev_norm_h(f, s) == pytest.approx(math.sqrt(TWO_PI) * 2.5, rel=1e-12)

    def test_sobolev_single_mode(self):
        lat = Lattice(8)
        f = single_mode_field(lat, 3, 1.0)
        for s in (0.5, 2.0):
            expected = math.sqrt(TWO_PI) * (1 + 9) ** (s / 2)
            assert sobolev_norm_h(f, s) == pytest.approx(expected, rel=1e-12)

    def test_s_zero_matches_l2(self):
        f = random_field(Lattice(16), seed=4)
        assert sobolev_norm_h(f, 0.0) == pytest.approx(lebesgue_norm_h(f, 2), rel=1e-12)

    def test_lebesgue_constant_field(self):
        lat = Lattice(8)
        f = Field(lat, np.ones(16, dtype=complex))
        for p in (1.0, 2.0, 4.0):
            assert lebesgue_norm_h(f, p) == pytest.approx(TWO_PI ** (1 / p), rel=1e-12)
        assert lebesgue_norm_h(f, math.inf) == pytest.approx(1.0)

    @given(seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=20, deadline=None)
    def test_hoelder_interpolation(self, seed):
        f = random_field(Lattice(8), seed)
        l2 = lebesgue_norm_h(f, 2)
        bound = math.sqrt(lebesgue_norm_h(f, 1) * lebesgue_norm_h(f, math.inf))
        assert l2 <= bound * (1 + 1e-12)

    def test_embedding_constant_attained_by_delta(self):
        # ||f||_q <= h^(1/q - 1/p) ||f||_p, equality at a single-site mass
        lat = Lattice(8)
        v = np.zeros(16, dtype=complex)
        v[3] = 1.0
        delta = Field(lat, v)
        for p, q in ((1.0, 2.0), (2.0, math.inf), (1.0, math.inf)):
            inv_q = 0.0 if q == math.inf else 1.0 / q
            factor = lat.h ** (inv_q - 1.0 / p)
            lhs = lebesgue_norm_h(delta, q)
            assert lhs == pytest.approx(factor * lebesgue_norm_h(delta, p), rel=1e-12)
            g = random_field(lat, seed=77)
            assert lebesgue_norm_h(g, q) <= factor * lebesgue_norm_h(g, p) * (1 + 1e-12)

    def test_p_below_one_rejected(self):
        with pytest.raises(ValueError):
            lebesgue_norm_h(random_field(Lattice(4), 0), 0.5)

    def test_lebesgue_requires_physical(self):
        g = forward_dft(random_field(Lattice(4), 0))
        with pytest.raises(ValueError):
            lebesgue_norm_h(g, 2)
