"""Discretization / interpolation operators linking the torus and the lattice.

The continuum torus is represented by a fine reference grid (M_ref at least
8x any coarse lattice it is compared against) carrying exact Fourier
coefficients u_hat(k) = integral of u(x) exp(-ikx) dx, truncated at the
bandlimit K_ref = M_ref/2 - 1.  Cell averaging (``discretize``) and
piecewise-linear interpolation (``interpolate``) are realized spectrally:

    discretize:   mode k picks up the factor (exp(ihk) - 1)/(ihk), with the
                  aliasing sum over k' + 2Mq folded into the coarse dual;
    interpolate:  exact coefficients P(k) * F_h[g](k), where
                  P(k) = (sin(hk/2)/(hk/2))^2 and F_h[g] is extended
                  (2 pi / h)-periodically.

The L2(torus) error functional is evaluated on the Fourier side over the
retained band; the truncation error is O(K_ref^{-s} ||u||_{H^s}) and is kept
at least two orders below any measured discretization error by the 8x grid
ratio.  Pointwise/quadrature routes are provided as independent cross-checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    TWO_PI,
    Field,
    Lattice,
    Representation,
    forward_dft,
    inverse_dft,
)


@dataclass
class ContinuumField:
    """Bandlimited function on the torus, stored by its Fourier coefficients.

    ``coeffs[i]`` is u_hat(k) for k = i - M_ref, k = -M_ref..M_ref-1.  Content
    above the bandlimit is zeroed at construction (enforced truncation).
    """

    lattice: Lattice
    coeffs: np.ndarray
    k_ref: int | None = None

    def __post_init__(self):
        if self.k_ref is None:
            self.k_ref = self.lattice.M // 2 - 1
        if not (0 < self.k_ref < self.lattice.M):
            raise ValueError(f"bandlimit {self.k_ref} outside (0, {self.lattice.M})")
        c = np.asarray(self.coeffs, dtype=np.complex128).copy()
        if c.shape != (self.lattice.n_sites,):
            raise ValueError(
                f"coeffs must have shape ({self.lattice.n_sites},), got {c.shape}"
            )
        c[np.abs(self.lattice.dual()) > self.k_ref] = 0.0
        self.coeffs = c

    @property
    def band(self) -> np.ndarray:
        return np.abs(self.lattice.dual()) <= self.k_ref

    def values(self) -> np.ndarray:
        """Samples on the fine grid (exact for a bandlimited function)."""
        g = Field(self.lattice, self.coeffs, Representation.FREQUENCY)
        return inverse_dft(g).values

    def as_field(self) -> Field:
        return Field(self.lattice, self.values(), Representation.PHYSICAL)

    def eval_at(self, x) -> np.ndarray:
        """Direct trigonometric summation at arbitrary points (FFT-free)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        k = self.lattice.dual()[self.band]
        c = self.coeffs[self.band]
        return (np.exp(1j * np.outer(x, k)) @ c) / TWO_PI

    def l2_norm(self) -> float:
        return float(np.linalg.norm(self.coeffs) / math.sqrt(TWO_PI))

    def sobolev_norm(self, s: float) -> float:
        w = (1.0 + self.lattice.dual().astype(float) ** 2) ** (0.5 * s)
        return float(np.linalg.norm(w * self.coeffs) / math.sqrt(TWO_PI))

    def lp_norm(self, p: float) -> float:
        v = self.values()
        if p == math.inf:
            return float(np.max(np.abs(v)))
        return float((self.lattice.h * np.sum(np.abs(v) ** p)) ** (1.0 / p))

    def copy(self) -> "ContinuumField":
        return ContinuumField(self.lattice, self.coeffs.copy(), self.k_ref)


def continuum_from_samples(lattice: Lattice, values: np.ndarray,
                           k_ref: int | None = None) -> ContinuumField:
    """Interpret fine-grid samples as a bandlimited function (coefficients by DFT)."""
    coeffs = forward_dft(Field(lattice, values, Representation.PHYSICAL)).values
    return ContinuumField(lattice, coeffs, k_ref)


def continuum_single_mode(lattice: Lattice, k: int, amplitude: complex,
                          k_ref: int | None = None) -> ContinuumField:
    """amplitude * exp(ikx) as a ContinuumField (u_hat(k) = 2 pi * amplitude)."""
    coeffs = np.zeros(lattice.n_sites, dtype=np.complex128)
    coeffs[lattice.index_of_mode(k)] = TWO_PI * amplitude
    return ContinuumField(lattice, coeffs, k_ref)


def cell_average_multiplier(h: float, k) -> np.ndarray:
    """(exp(ihk) - 1)/(ihk) with the continuous extension 1 at k = 0."""
    k = np.asarray(k, dtype=float)
    out = np.ones(k.shape, dtype=np.complex128)
    nz = k != 0
    out[nz] = (np.exp(1j * h * k[nz]) - 1.0) / (1j * h * k[nz])
    return out


def interpolation_multiplier(lattice: Lattice, k) -> np.ndarray | float:
    """P(k) = (sin(hk/2)/(hk/2))^2 for any integer (or real) k; P(0) = 1."""
    k = np.asarray(k, dtype=float)
    out = np.sinc(0.5 * lattice.h * k / math.pi) ** 2
    return out if out.ndim else float(out)


def _fold_to_coarse(fine: Lattice, coarse: Lattice, weighted: np.ndarray) -> np.ndarray:
    """Accumulate fine-dual content onto the coarse dual modulo 2M."""
    kf = fine.dual()
    idx = ((kf + coarse.M) % coarse.n_sites)  # 0..2M-1, representing k' = idx - M
    acc = np.zeros(coarse.n_sites, dtype=np.complex128)
    np.add.at(acc, idx, weighted)
    return acc


def discretize_dh(f: ContinuumField, coarse: Lattice) -> Field:
    """Cell averaging d_h f(x) = (1/h) * integral of f over [x, x+h).

    Spectral route: each fine mode k is weighted by the cell-average
    multiplier and folded onto the coarse dual (aliasing sum truncated at the
    bandlimit, which holds the full content of f).
    """
    if coarse.M * 8 > f.lattice.M:
        raise ValueError(
            f"reference grid too coarse: M_ref = {f.lattice.M} < 8 * {coarse.M}"
        )
    weighted = f.coeffs * cell_average_multiplier(coarse.h, f.lattice.dual())
    coeffs = _fold_to_coarse(f.lattice, coarse, weighted)
    return inverse_dft(Field(coarse, coeffs, Representation.FREQUENCY))


def discretize_dh_quadrature(f: ContinuumField, coarse: Lattice,
                             nodes_per_cell: int = 24) -> Field:
    """Cell averages by Gauss-Legendre quadrature; independent oracle for d_h."""
    if f.lattice.M % coarse.M != 0:
        raise ValueError("quadrature route requires M_ref divisible by M")
    nodes, weights = np.polynomial.legendre.leggauss(nodes_per_cell)
    h = coarse.h
    x0 = coarse.sites()
    # map [-1, 1] to each cell [x0, x0 + h)
    pts = x0[:, None] + 0.5 * h * (nodes[None, :] + 1.0)
    vals = f.eval_at(pts.ravel()).reshape(pts.shape)
    averages = 0.5 * vals @ weights  # (1/h) * (h/2) * sum w f
    return Field(coarse, averages, Representation.PHYSICAL)


def interpolate_ph(g: Field, target: Lattice) -> ContinuumField:
    """Piecewise-linear interpolant of g, carried by its exact Fourier coefficients.

    The coefficients are P(k) * F_h[g](k) for |k| <= K_ref(target); this is
    exact for every retained mode (the interpolant's k^{-2} tail above the
    bandlimit is the documented truncation).
    """
    if g.representation is not Representation.PHYSICAL:
        raise ValueError("interpolate_ph expects a physical-space field")
    if target.M < 8 * g.lattice.M:
        raise ValueError(
            f"target grid too coarse: M_ref = {target.M} < 8 * {g.lattice.M}"
        )
    gh = forward_dft(g).values
    kf = target.dual()
    idx = (kf + g.lattice.M) % g.lattice.n_sites  # periodic extension of F_h[g]
    coeffs = interpolation_multiplier(g.lattice, kf) * gh[idx]
    return ContinuumField(target, coeffs)


def interpolate_pointwise(g: Field, target: Lattice) -> np.ndarray:
    """Exact samples of the linear interpolant on the fine grid (no truncation)."""
    if g.representation is not Representation.PHYSICAL:
        raise ValueError("interpolate_pointwise expects a physical-space field")
    if target.M % g.lattice.M != 0:
        raise ValueError("pointwise route requires M_ref divisible by M")
    r = target.M // g.lattice.M
    left = np.repeat(g.values, r)
    right = np.repeat(np.roll(g.values, -1), r)  # periodic wrap at the seam
    frac = np.tile(np.arange(r) / r, g.lattice.n_sites)
    return left + (right - left) * frac


def interpolant_coeffs_quadrature(g: Field, k_values, nodes_per_cell: int = 24) -> np.ndarray:
    """Exact Fourier coefficients of the interpolant by per-cell quadrature.

    Independent of the multiplier algebra: integrates the linear pieces
    against exp(-ikx) cell by cell with Gauss-Legendre nodes.
    """
    if g.representation is not Representation.PHYSICAL:
        raise ValueError("expects a physical-space field")
    k_values = np.asarray(k_values)
    h = g.lattice.h
    x0 = g.lattice.sites()
    a = g.values
    b = (np.roll(g.values, -1) - g.values) / h
    nodes, weights = np.polynomial.legendre.leggauss(nodes_per_cell)
    s = 0.5 * h * (nodes + 1.0)  # offsets within a cell
    cell_vals = a[:, None] + b[:, None] * s[None, :]
    out = np.empty(k_values.shape, dtype=np.complex128)
    for i, k in enumerate(k_values.ravel()):
        phase = np.exp(-1j * k * (x0[:, None] + s[None, :]))
        out.ravel()[i] = 0.5 * h * np.sum((cell_vals * phase) @ weights)
    return out


def l2_torus_error(g: Field, u: ContinuumField) -> float:
    """|| p_h g - u ||_{L2(torus)} evaluated on the Fourier side.

    (2 pi)^{-1/2} l2 over |k| <= K_ref of P(k) F_h[g](k) - u_hat(k); exact for
    the retained band, with truncation error O(K_ref^{-s} ||u||_{H^s}).
    """
    if u.lattice.M < 8 * g.lattice.M:
        raise ValueError(
            f"reference grid too coarse: M_ref = {u.lattice.M} < 8 * {g.lattice.M}"
        )
    gh = forward_dft(g.to_physical()).values
    kf = u.lattice.dual()
    idx = (kf + g.lattice.M) % g.lattice.n_sites
    interp = interpolation_multiplier(g.lattice, kf) * gh[idx]
    diff = np.where(u.band, interp - u.coeffs, 0.0)
    return float(np.linalg.norm(diff) / math.sqrt(TWO_PI))


def l2_torus_error_quadrature(g: Field, u: ContinuumField,
                              nodes_per_cell: int = 32) -> float:
    """Cross-check route: || p_h g - u ||_{L2} by per-cell Gauss-Legendre quadrature.

    Uses the exact (untruncated) interpolant, so it differs from the spectral
    value by the interpolant's above-band tail.
    """
    if u.lattice.M % g.lattice.M != 0:
        raise ValueError("quadrature route requires M_ref divisible by M")
    h = g.lattice.h
    x0 = g.lattice.sites()
    a = g.to_physical().values
    b = (np.roll(a, -1) - a) / h
    nodes, weights = np.polynomial.legendre.leggauss(nodes_per_cell)
    s = 0.5 * h * (nodes + 1.0)
    pts = x0[:, None] + s[None, :]
    interp_vals = a[:, None] + b[:, None] * s[None, :]
    u_vals = u.eval_at(pts.ravel()).reshape(pts.shape)
    sq = np.abs(interp_vals - u_vals) ** 2
    return float(math.sqrt(0.5 * h * np.sum(sq @ weights)))


def embed_continuum(u: ContinuumField, target: Lattice) -> ContinuumField:
    """The same bandlimited function carried on a finer grid (bandlimit kept)."""
    if target.M < u.lattice.M:
        raise ValueError("embedding target must be at least as fine")
    coeffs = np.zeros(target.n_sites, dtype=np.complex128)
    src = u.lattice.dual()
    coeffs[src + target.M] = u.coeffs
    return ContinuumField(target, coeffs, u.k_ref)


def l2_distance(u: ContinuumField, v: ContinuumField) -> float:
    """L2(torus) distance between two bandlimited fields (bands may differ)."""
    ku = u.lattice.dual()
    kv = v.lattice.dual()
    lo = min(ku[0], kv[0])
    hi = max(ku[-1], kv[-1])
    grid = np.arange(lo, hi + 1)
    cu = np.zeros(grid.shape, dtype=np.complex128)
    cv = np.zeros(grid.shape, dtype=np.complex128)
    cu[np.searchsorted(grid, ku)] = u.coeffs
    cv[np.searchsorted(grid, kv)] = v.coeffs
    return float(np.linalg.norm(cu - cv) / math.sqrt(TWO_PI))
