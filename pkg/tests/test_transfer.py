import math

import numpy as np
import pytest

from fdnls.core import Field, Lattice, forward_dft
from fdnls.transfer import (
    ContinuumField,
    cell_average_multiplier,
    continuum_single_mode,
    discretize_dh,
    discretize_dh_quadrature,
    embed_continuum,
    interpolant_coeffs_quadrature,
    interpolate_ph,
    interpolate_pointwise,
    interpolation_multiplier,
    l2_distance,
    l2_torus_error,
    l2_torus_error_quadrature,
)

TWO_PI = 2.0 * math.pi


def random_bandlimited(fine, k_band, seed):
    rng = np.random.Generator(np.random.Philox(seed))
    coeffs = np.zeros(fine.n_sites, dtype=complex)
    band = np.abs(fine.dual()) <= k_band
    coeffs[band] = rng.normal(size=band.sum()) + 1j * rng.normal(size=band.sum())
    return ContinuumField(fine, coeffs)


def random_lattice_field(lattice, seed):
    rng = np.random.Generator(np.random.Philox(seed))
    v = rng.normal(size=lattice.n_sites) + 1j * rng.normal(size=lattice.n_sites)
    return Field(lattice, v)


class TestContinuumField:
    def test_band_enforced_at_construction(self):
        fine = Lattice(64)
        coeffs = np.ones(128, dtype=complex)
        u = ContinuumField(fine, coeffs)
        assert np.all(u.coeffs[np.abs(fine.dual()) > u.k_ref] == 0)

    def test_values_match_pointwise_evaluation(self):
        fine = Lattice(64)
        u = random_bandlimited(fine, 10, seed=1)
        np.testing.assert_allclose(u.values(), u.eval_at(fine.sites()), atol=1e-12)

    def test_embedding_preserves_the_function(self):
        fine = Lattice(64)
        u = random_bandlimited(fine, 10, seed=2)
        big = embed_continuum(u, Lattice(128))
        assert l2_distance(u, big) <= 1e-14
        assert big.k_ref == u.k_ref


class TestCellAveraging:
    def test_constant_is_fixed_point(self):
        fine = Lattice(128)
        u = continuum_single_mode(fine, 1, 0.0)
        u.coeffs[fine.index_of_mode(0)] = TWO_PI * 4.0
        g = discretize_dh(ContinuumField(fine, u.coeffs), Lattice(16))
        np.testing.assert_allclose(g.values, 4.0, atol=1e-12)

    def test_single_mode_picks_up_average_factor(self):
        fine, coarse = Lattice(128), Lattice(16)
        n = 3
        u = continuum_single_mode(fine, n, 1.0)
        g = discretize_dh(u, coarse)
        factor = (np.exp(1j * coarse.h * n) - 1.0) / (1j * coarse.h * n)
        expected = factor * np.exp(1j * n * coarse.sites())
        np.testing.assert_allclose(g.values, expected, atol=1e-12)

    def test_spectral_route_matches_quadrature(self):
        fine, coarse = Lattice(256), Lattice(16)
        u = random_bandlimited(fine, 30, seed=3)
        spectral = discretize_dh(u, coarse)
        quad = discretize_dh_quadrature(u, coarse)
        assert np.max(np.abs(spectral.values - quad.values)) <= 1e-10

    @pytest.mark.parametrize("seed", [0, 1, 2, 3])
    def test_contraction_into_l2h(self, seed):
        fine, coarse = Lattice(256), Lattice(16)
        u = random_bandlimited(fine, 60, seed=seed)
        g = discretize_dh(u, coarse)
        l2h = math.sqrt(coarse.h * np.sum(np.abs(g.values) ** 2))
        assert l2h <= u.l2_norm() * (1 + 1e-12)

    def test_rejects_coarse_reference(self):
        with pytest.raises(ValueError):
            discretize_dh(random_bandlimited(Lattice(64), 10, 0), Lattice(16))


class TestInterpolationMultiplier:
    def test_values(self):
        lat = Lattice(16)
        assert interpolation_multiplier(lat, 0) == pytest.approx(1.0)
        assert interpolation_multiplier(lat, lat.M) == pytest.approx(
            4.0 / math.pi**2, rel=1e-12
        )

    def test_second_order_flatness_at_fixed_mode(self):
        errs, hs = [], []
        for M in (8, 16, 32, 64, 128):
            lat = Lattice(M)
            errs.append(abs(1.0 - interpolation_multiplier(lat, 3)))
            hs.append(lat.h)
        order = np.polyfit(np.log(hs), np.log(errs), 1)[0]
        assert order == pytest.approx(2.0, abs=0.05)


class TestLinearInterpolant:
    def test_constant_stays_constant(self):
        g = Field(Lattice(8), np.full(16, 1.5 + 0.5j))
        u = interpolate_ph(g, Lattice(128))
        np.testing.assert_allclose(u.values(), 1.5 + 0.5j, atol=1e-12)

    def test_sup_bound(self):
        g = random_lattice_field(Lattice(16), seed=5)
        vals = interpolate_pointwise(g, Lattice(256))
        assert np.max(np.abs(vals)) <= 3.0 * np.max(np.abs(g.values)) + 1e-12

    def test_multiplier_coeffs_match_piecewise_integration(self):
        g = random_lattice_field(Lattice(16), seed=6)
        fine = Lattice(256)
        u = interpolate_ph(g, fine)
        ks = fine.dual()[u.band]
        quad = interpolant_coeffs_quadrature(g, ks)
        # L2(torus) distance over the shared band
        dist = np.linalg.norm(u.coeffs[u.band] - quad) / math.sqrt(TWO_PI)
        assert dist <= 1e-10


class TestTorusError:
    def test_identical_inputs_give_zero(self):
        g = random_lattice_field(Lattice(16), seed=7)
        u = interpolate_ph(g, Lattice(256))
        assert l2_torus_error(g, u) == 0.0

    def test_single_mode_linear_coefficient(self):
        # || p_h d_h e^{ix} - e^{ix} || / h -> sqrt(pi/2)
        ratios = []
        for M in (16, 32, 64):
            fine, coarse = Lattice(16 * M), Lattice(M)
            u = continuum_single_mode(fine, 1, 1.0)
            g = discretize_dh(u, coarse)
            ratios.append(l2_torus_error(g, u) / coarse.h)
        assert ratios[-1] == pytest.approx(math.sqrt(math.pi / 2.0), rel=0.02)

    def test_spectral_vs_quadrature_cross_check(self):
        # the quadrature route sees the interpolant's above-band tail; for a
        # low-frequency field the two agree to the documented truncation level
        fine, coarse = Lattice(256), Lattice(16)
        u = random_bandlimited(fine, 8, seed=8)
        g = discretize_dh(u, coarse)
        spectral = l2_torus_error(g, u)
        quad = l2_torus_error_quadrature(g, u)
        assert quad == pytest.approx(spectral, rel=1e-2)

    def test_smooth_field_first_order_rate(self):
        # || p_h d_h f - f || <= C h ||f||_{H^1}: fitted order >= 0.98
        fine = Lattice(1024)
        u = random_bandlimited(fine, 6, seed=9)
        errs, hs = [], []
        for M in (16, 32, 64, 128):
            coarse = Lattice(M)
            errs.append(l2_torus_error(discretize_dh(u, coarse), u))
            hs.append(coarse.h)
        order = np.polyfit(np.log(hs), np.log(errs), 1)[0]
        assert order >= 0.98

    @pytest.mark.parametrize("s", [0.5, 1.0])
    def test_fractional_regularity_rate(self, s):
        # randomized data with |u_hat| ~ <k>^{-s-1/2-eps}: order ~ min(s, 1)
        rng = np.random.Generator(np.random.Philox(10))
        fine = Lattice(2048)
        k = fine.dual()
        coeffs = (1.0 + k.astype(float) ** 2) ** (-0.5 * (s + 0.55)) * np.exp(
            1j * rng.uniform(0, TWO_PI, size=k.shape)
        )
        coeffs[k == 0] = 0.0
        u = ContinuumField(fine, coeffs)
        errs, hs = [], []
        for M in (16, 32, 64, 128, 256):
            coarse = Lattice(M)
            errs.append(l2_torus_error(discretize_dh(u, coarse), u))
            hs.append(coarse.h)
        order = np.polyfit(np.log(hs), np.log(errs), 1)[0]
        assert order == pytest.approx(min(s, 1.0), abs=0.12)

    def test_requires_fine_reference(self):
        g = random_lattice_field(Lattice(16), seed=0)
        u = random_bandlimited(Lattice(64), 10, seed=0)
        with pytest.raises(ValueError):
            l2_torus_error(g, u)


def test_cell_average_multiplier_at_zero():
    assert cell_average_multiplier(0.1, np.asarray([0]))[0] == 1.0 + 0.0j
