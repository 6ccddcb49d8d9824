"""Even periodic fields on a uniform grid and Fourier multipliers acting on them.

The grid is x_j = -P/2 + j P/N, so x_{N/2} = 0 is the crest node and x_0 the
trough. Solvers work with cosine coefficients c_k, k = 0..N/2, where
phi(x) = sum_k c_k cos(2 pi k x / P).
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import GridMismatch, InvalidParameter
from .kernel import bessel_symbol, check_s, dp_symbol


@dataclass(frozen=True)
class PeriodicGrid:
    P: float
    N: int

    def __post_init__(self):
        if not (np.isfinite(self.P) and self.P > 0):
            raise InvalidParameter("period P must be positive and finite")
        if int(self.N) != self.N or self.N < 8 or self.N % 2:
            raise InvalidParameter("grid size N must be an even integer >= 8")
        object.__setattr__(self, "P", float(self.P))
        object.__setattr__(self, "N", int(self.N))

    @property
    def nodes(self):
        return -0.5 * self.P + np.arange(self.N) * (self.P / self.N)

    @property
    def dx(self):
        return self.P / self.N

    @property
    def n_modes(self):
        return self.N // 2 + 1

    @property
    def frequencies(self):
        """2 pi k / P for k = 0..N/2."""
        return 2 * np.pi * np.arange(self.n_modes) / self.P

    @property
    def crest_index(self):
        return self.N // 2

    def field(self, values):
        return PeriodicField(self, values)

    def sample(self, func):
        return PeriodicField(self, func(self.nodes))


class PeriodicField:
    """Real samples of a P-periodic function on a :class:`PeriodicGrid`.

    The value array is copied and frozen on construction.
    """

    def __init__(self, grid, values):
        v = np.array(values, dtype=float)
        if v.shape != (grid.N,):
            raise GridMismatch(f"expected {grid.N} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InvalidParameter("field values must be finite")
        v.flags.writeable = False
        self.grid = grid
        self.values = v

    def __repr__(self):
        return f"PeriodicField(P={self.grid.P}, N={self.grid.N})"

    def __len__(self):
        return self.grid.N

    def mirror(self):
        """Values at the reflected nodes, v[(N - j) mod N]."""
        return np.roll(self.values[::-1], 1)

    def evenness_defect(self):
        scale = max(np.max(np.abs(self.values)), np.finfo(float).tiny)
        return float(np.max(np.abs(self.values - self.mirror())) / scale)

    def is_even(self, rtol=1e-12):
        return self.evenness_defect() <= rtol

    def mean(self):
        return float(np.mean(self.values))

    def max(self):
        return float(np.max(self.values))

    def min(self):
        return float(np.min(self.values))

    def at_crest(self):
        return float(self.values[self.grid.crest_index])

    def at_trough(self):
        return float(self.values[0])

    def cosine_coefficients(self):
        return cosine_coefficients(self)


@dataclass(frozen=True)
class MultiplierSpec:
    """Fourier multiplier sampled at 2 pi k / P, k = 0..N/2."""

    kind: str  # "bessel" or "dp"
    s: float
    grid: PeriodicGrid

    def __post_init__(self):
        if self.kind not in ("bessel", "dp"):
            raise InvalidParameter(f"unknown multiplier kind {self.kind!r}")
        object.__setattr__(self, "s", check_s(self.s))

    @classmethod
    def bessel(cls, grid, s):
        return cls("bessel", s, grid)

    @classmethod
    def dp(cls, grid, s):
        return cls("dp", s, grid)

    @cached_property
    def symbol(self):
        xi = self.grid.frequencies
        sym = bessel_symbol(xi, self.s) if self.kind == "bessel" else dp_symbol(xi, self.s)
        sym.flags.writeable = False
        return sym


def to_spectrum(f):
    """Complex coefficients f_k for k = -N/2..N/2-1 with f(x) = sum f_k e^{2 pi i k x / P}.

    f_0 is the mean. The (-1)^k factor accounts for the grid starting at -P/2.
    """
    N = f.grid.N
    F = np.fft.fft(f.values) / N
    k = np.fft.fftfreq(N, 1.0 / N).astype(int)
    F = F * np.where(k % 2, -1.0, 1.0)
    return np.fft.fftshift(F)


def from_spectrum(coeffs, grid):
    coeffs = np.asarray(coeffs, dtype=complex)
    if coeffs.shape != (grid.N,):
        raise GridMismatch("spectrum length does not match grid")
    F = np.fft.ifftshift(coeffs)
    k = np.fft.fftfreq(grid.N, 1.0 / grid.N).astype(int)
    F = F * np.where(k % 2, -1.0, 1.0)
    return PeriodicField(grid, np.fft.ifft(F * grid.N).real)


def _check_grid(f, m):
    if f.grid != m.grid:
        raise GridMismatch("field and multiplier live on different grids")


def apply_multiplier(f, m):
    """Multiply each Fourier coefficient of ``f`` by the symbol at |k|."""
    _check_grid(f, m)
    F = np.fft.rfft(f.values)
    return PeriodicField(f.grid, np.fft.irfft(F * m.symbol, f.grid.N))


def spectral_derivative(f, order):
    if order not in (1, 2):
        raise InvalidParameter("derivative order must be 1 or 2")
    N = f.grid.N
    F = np.fft.rfft(f.values)
    ik = 1j * f.grid.frequencies
    if order == 1:
        ik[-1] = 0.0  # Nyquist mode has no real odd counterpart
    return PeriodicField(f.grid, np.fft.irfft(F * ik**order, N))


def cosine_coefficients(f):
    """c_k, k = 0..N/2, of an even field: f(x_j) = sum_k c_k cos(2 pi k x_j / P)."""
    N = f.grid.N
    F = np.fft.rfft(f.values).real / N
    F[1:-1] *= 2.0
    F[1::2] *= -1.0
    return F


def from_cosine(c, grid):
    c = np.asarray(c, dtype=float)
    if c.shape != (grid.n_modes,):
        raise GridMismatch("cosine coefficient count does not match grid")
    F = c * grid.N
    F[1:-1] *= 0.5
    F = F.astype(complex)
    F[1::2] *= -1.0
    return PeriodicField(grid, np.fft.irfft(F, grid.N))


def dealiased_product(f, g):
    """Pointwise product with the 3/2 padding rule: modes above N/2 are discarded."""
    if f.grid != g.grid:
        raise GridMismatch("fields live on different grids")
    N = f.grid.N
    M = 2 * ((3 * N + 3) // 4)
    def pad(v):
        F = np.fft.rfft(v)
        F[-1] *= 0.5  # split the Nyquist mode between +-N/2
        G = np.zeros(M // 2 + 1, dtype=complex)
        G[: N // 2 + 1] = F
        return np.fft.irfft(G, M) * (M / N)
    H = np.fft.rfft(pad(f.values) * pad(g.values)) * (N / M)
    H = H[: N // 2 + 1]
    H[-1] *= 2.0
    return PeriodicField(f.grid, np.fft.irfft(H, N))


class CosineBasis:
    """Dense matrices for even fields on the half grid y_m = m P / N, m = 0..N/2.

    ``synthesis @ c`` gives nodal values from cosine coefficients and
    ``analysis`` inverts it. With ``dealias=True`` products are formed on a
    padded grid with M >= 3N/2 nodes per period and truncated back to N/2
    modes; otherwise products are pointwise on the solution grid.
    """

    def __init__(self, grid, dealias=False):
        self.grid = grid
        self.dealias = bool(dealias)
        n = grid.n_modes
        self.synthesis, self.analysis = self._matrices(grid.N, n)
        if dealias:
            M = 2 * ((3 * grid.N + 3) // 4)
            S, A = self._matrices(M, M // 2 + 1)
            self.q_synthesis = S[:, :n]
            self.q_analysis = A[:n, :]
        else:
            self.q_synthesis = self.synthesis
            self.q_analysis = self.analysis

    @staticmethod
    def _matrices(N, n_coef):
        m = np.arange(N // 2 + 1)
        k = np.arange(N // 2 + 1)
        S = np.cos(2 * np.pi * np.outer(m, k) / N)
        # discrete orthogonality of DCT-I: trapezoid weights on both ends
        w = np.full(m.size, 2.0 / N)
        w[0] = w[-1] = 1.0 / N
        A = (S * w[:, None]).T
        A[0] *= 0.5
        A[-1] *= 0.5
        A *= 2.0
        return S[:, :n_coef], A[:n_coef]

    def values(self, c):
        return self.synthesis @ c

    def full_values(self, c):
        """Values on the full grid x_j, j = 0..N-1, from half-grid nodal values."""
        h = self.values(c)
        N = self.grid.N
        out = np.empty(N)
        out[N // 2:] = h[:-1]
        out[: N // 2 + 1] = h[::-1]
        return out

    def product(self, a, b):
        """Cosine coefficients of the product of two even fields."""
        return self.q_analysis @ ((self.q_synthesis @ a) * (self.q_synthesis @ b))

    def product_matrix(self, a):
        """Matrix of v -> a v in cosine coefficients."""
        return self.q_analysis @ ((self.q_synthesis @ a)[:, None] * self.q_synthesis)
