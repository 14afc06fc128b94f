"""Periodic lattice, discrete Fourier calculus, fractional symbols, and norms.

The mesh has 2M sites x_j = h*j for j = -M..M-1 with h = pi/M, so the lattice
fills the torus [-pi, pi).  The dual frequency set is the same index range
k = -M..M-1.  Transforms use the normalization

    F_h[f](k)      = h * sum_x f(x) exp(-i k x),
    F_h^{-1}[g](x) = (2 pi)^{-1} * sum_k g(k) exp(i k x),

for which Parseval reads ||f||_{L2_h}^2 = (2 pi)^{-1} sum_k |F_h f(k)|^2.
Arrays are stored in "natural" order (index j or k running -M..M-1); the
conversion to the standard FFT layout happens at the transform boundary.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field as _field

import numpy as np

TWO_PI = 2.0 * math.pi


class Representation(enum.Enum):
    PHYSICAL = "physical"
    FREQUENCY = "frequency"


@dataclass(frozen=True)
class Lattice:
    """Uniform periodic mesh with 2M sites; h = pi/M is derived, never stored."""

    M: int

    def __post_init__(self):
        if not isinstance(self.M, (int, np.integer)) or self.M < 1:
            raise ValueError(f"M must be a positive integer, got {self.M!r}")

    @property
    def h(self) -> float:
        return math.pi / self.M

    @property
    def n_sites(self) -> int:
        return 2 * self.M

    def sites(self) -> np.ndarray:
        """Lattice points h*j, j = -M..M-1 (monotone, covering [-pi, pi))."""
        return self.h * np.arange(-self.M, self.M)

    def dual(self) -> np.ndarray:
        """Integer frequencies k = -M..M-1."""
        return np.arange(-self.M, self.M)

    def index_of_mode(self, k: int) -> int:
        """Array index of dual frequency k (k = -M is admissible, +M is not)."""
        if not (-self.M <= k < self.M):
            raise ValueError(f"mode {k} outside dual range [-{self.M}, {self.M})")
        return int(k) + self.M


@dataclass
class ModelParams:
    """Levy index alpha in (0, 2] and nonlinearity sign mu in {-1, +1}."""

    alpha: float
    mu: int

    def __post_init__(self):
        if not (0.0 < self.alpha <= 2.0):
            raise ValueError(f"alpha must lie in (0, 2], got {self.alpha}")
        if self.mu not in (-1, 1):
            raise ValueError(f"mu must be -1 or +1, got {self.mu}")


def require_dispersive_alpha(params: ModelParams, context: str) -> None:
    """Reject alpha outside (1, 2]; the dispersive/continuum-limit theory needs alpha > 1."""
    if not (1.0 < params.alpha <= 2.0):
        raise ValueError(
            f"alpha must lie in (1, 2] for {context} "
            f"(the dispersive estimates degenerate at alpha <= 1); got {params.alpha}"
        )


@dataclass
class Field:
    """Complex-valued function on a lattice or its dual.

    Treated as immutable by convention: every operation returns a new Field.
    """

    lattice: Lattice
    values: np.ndarray
    representation: Representation = Representation.PHYSICAL

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != (self.lattice.n_sites,):
            raise ValueError(
                f"values must have shape ({self.lattice.n_sites},), got {v.shape}"
            )
        self.values = v

    def copy(self) -> "Field":
        return Field(self.lattice, self.values.copy(), self.representation)

    def to_frequency(self) -> "Field":
        if self.representation is Representation.FREQUENCY:
            return self
        return forward_dft(self)

    def to_physical(self) -> "Field":
        if self.representation is Representation.PHYSICAL:
            return self
        return inverse_dft(self)


def _to_standard(values: np.ndarray) -> np.ndarray:
    # natural order (-M..M-1) -> standard FFT order (0..M-1, -M..-1)
    return np.fft.ifftshift(values)


def _to_natural(values: np.ndarray) -> np.ndarray:
    return np.fft.fftshift(values)


def forward_dft(f: Field) -> Field:
    """F_h f(k) = h * sum_x f(x) exp(-ikx) on the dual lattice."""
    if f.representation is not Representation.PHYSICAL:
        raise ValueError("forward_dft expects a physical-space field")
    coeffs = f.lattice.h * _to_natural(np.fft.fft(_to_standard(f.values)))
    return Field(f.lattice, coeffs, Representation.FREQUENCY)


def inverse_dft(g: Field) -> Field:
    """F_h^{-1} g(x) = (2 pi)^{-1} * sum_k g(k) exp(ikx)."""
    if g.representation is not Representation.FREQUENCY:
        raise ValueError("inverse_dft expects a frequency-space field")
    values = _to_natural(np.fft.ifft(_to_standard(g.values))) / g.lattice.h
    return Field(g.lattice, values, Representation.PHYSICAL)


def forward_dft_direct(f: Field) -> Field:
    """O(M^2) summation transform; kept as an independent oracle for the FFT path."""
    if f.representation is not Representation.PHYSICAL:
        raise ValueError("forward_dft_direct expects a physical-space field")
    x = f.lattice.sites()
    k = f.lattice.dual()
    kernel = np.exp(-1j * np.outer(k, x))
    return Field(f.lattice, f.lattice.h * kernel @ f.values, Representation.FREQUENCY)


def inverse_dft_direct(g: Field) -> Field:
    if g.representation is not Representation.FREQUENCY:
        raise ValueError("inverse_dft_direct expects a frequency-space field")
    x = g.lattice.sites()
    k = g.lattice.dual()
    kernel = np.exp(1j * np.outer(x, k))
    return Field(g.lattice, kernel @ g.values / TWO_PI, Representation.PHYSICAL)


def fractional_symbol(h: float, alpha: float, xi) -> np.ndarray | float:
    """Lattice symbol |(2/h) sin(h xi / 2)|^alpha, defined for any real xi."""
    xi = np.asarray(xi, dtype=float)
    out = np.abs((2.0 / h) * np.sin(0.5 * h * xi)) ** alpha
    return out if out.ndim else float(out)


def symbol_sigma_h(lattice: Lattice, alpha: float, k) -> np.ndarray | float:
    """Symbol evaluated on dual frequencies; rejects k outside the dual range."""
    karr = np.asarray(k)
    if np.any(karr < -lattice.M) or np.any(karr >= lattice.M):
        raise ValueError(f"dual frequency outside [-{lattice.M}, {lattice.M})")
    return fractional_symbol(lattice.h, alpha, karr)


def continuum_symbol(alpha: float, k) -> np.ndarray | float:
    """|k|^alpha, the h -> 0 limit of the lattice symbol."""
    out = np.abs(np.asarray(k, dtype=float)) ** alpha
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# norms


def lebesgue_norm_h(f: Field, p: float) -> float:
    """(h * sum |f|^p)^(1/p) against the normalized counting measure; p = inf -> max."""
    if f.representation is not Representation.PHYSICAL:
        raise ValueError("lebesgue_norm_h expects a physical-space field")
    if p == math.inf:
        return float(np.max(np.abs(f.values)))
    if p < 1:
        raise ValueError(f"p must satisfy p >= 1, got {p}")
    return float((f.lattice.h * np.sum(np.abs(f.values) ** p)) ** (1.0 / p))


def sobolev_norm_h(f: Field, s: float) -> float:
    """Discrete H^s norm: ((2 pi)^{-1} sum <k>^{2s} |F_h f(k)|^2)^(1/2)."""
    g = f.to_frequency()
    k = g.lattice.dual()
    weight = (1.0 + k.astype(float) ** 2) ** s
    return float(math.sqrt(np.sum(weight * np.abs(g.values) ** 2) / TWO_PI))


def mass_l2h(f: Field) -> float:
    """Conserved mass ||f||_{L2_h}^2."""
    if f.representation is Representation.PHYSICAL:
        return float(f.lattice.h * np.sum(np.abs(f.values) ** 2))
    return float(np.sum(np.abs(f.values) ** 2) / TWO_PI)


# ---------------------------------------------------------------------------
# Littlewood-Paley projections
#
# Dyadic scales N run over powers of two with N_* <= N <= 1 where
# N_* = 2^(ceil(log2(h/pi)) - 1).  For 2 N_* <= N <= 1 the projector keeps the
# half-open frequency shell pi N / (2h) < |k| <= pi N / h; the N_* projector is
# the complement, which makes the family an exact resolution of the identity.
# The alias point k = -M (|k| = M) belongs to the N = 1 shell.


def minimal_dyadic_scale(lattice: Lattice) -> float:
    # ceil(log2(1/M)) == -floor(log2(M)), exact in integer arithmetic
    floor_log2_m = lattice.M.bit_length() - 1
    return 2.0 ** (-(floor_log2_m + 1))


def dyadic_scales(lattice: Lattice) -> list[float]:
    """All admissible scales, ascending from N_* to 1."""
    scales = []
    n = minimal_dyadic_scale(lattice)
    while n <= 1.0:
        scales.append(n)
        n *= 2.0
    return scales


def _validate_scale(lattice: Lattice, N: float) -> float:
    n_star = minimal_dyadic_scale(lattice)
    if not (n_star <= N <= 1.0):
        raise ValueError(f"dyadic scale {N} outside [{n_star}, 1]")
    j = math.log2(N)
    if 2.0 ** round(j) != N:
        raise ValueError(f"dyadic scale must be a power of two, got {N}")
    return n_star


def shell_mask(lattice: Lattice, N: float) -> np.ndarray:
    """Boolean mask over the dual range selecting the scale-N frequency shell."""
    n_star = _validate_scale(lattice, N)
    absk = np.abs(lattice.dual())
    if N == n_star:
        # complement of the dyadic shells: everything at or below M * N_*
        return absk <= lattice.M * n_star
    return (absk > 0.5 * lattice.M * N) & (absk <= lattice.M * N)


def low_pass_mask(lattice: Lattice, N: float) -> np.ndarray:
    """Mask for P_{<=N}: |k| <= pi N / h."""
    _validate_scale(lattice, N)
    return np.abs(lattice.dual()) <= lattice.M * N


def littlewood_paley_project(f: Field, N: float) -> Field:
    """P_N f: zero all frequency content outside the scale-N shell."""
    mask = shell_mask(f.lattice, N)
    g = f.to_frequency()
    projected = Field(g.lattice, np.where(mask, g.values, 0.0), Representation.FREQUENCY)
    if f.representation is Representation.PHYSICAL:
        return projected.to_physical()
    return projected


def low_pass_project(f: Field, N: float) -> Field:
    """P_{<=N} f, the sum of all shells at scales up to N."""
    mask = low_pass_mask(f.lattice, N)
    g = f.to_frequency()
    projected = Field(g.lattice, np.where(mask, g.values, 0.0), Representation.FREQUENCY)
    if f.representation is Representation.PHYSICAL:
        return projected.to_physical()
    return projected


def single_mode_field(lattice: Lattice, k: int, amplitude: complex) -> Field:
    """amplitude * exp(i k x) sampled on the lattice."""
    lattice.index_of_mode(k)
    return Field(lattice, amplitude * np.exp(1j * k * lattice.sites()))
