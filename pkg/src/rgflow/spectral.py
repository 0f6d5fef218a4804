"""Real and frequency-space representations on a uniform periodic grid.

Spectra use the continuum normalization ``coeffs(w) ~ int f(x) exp(-iwx) dx``,
so ``coeffs(0)`` is the mass.  The derivative spectrum ``f^'(w)`` is carried
as a second array, obtained by transforming ``-i x f(x)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import fft as sfft

from .kernels import weighted_sup


@dataclass(frozen=True)
class Grid:
    """Nodes x_j = -X + j dx on [-X, X), frequencies w_k = pi k / X."""

    X: float = 40.0
    N: int = 4096

    def __post_init__(self):
        if not self.X > 0:
            raise ValueError("half width X must be positive")
        if self.N < 2 or self.N & (self.N - 1):
            raise ValueError(f"N must be a power of two, got {self.N}")

    @property
    def dx(self):
        return 2.0 * self.X / self.N

    @property
    def dw(self):
        return math.pi / self.X

    @cached_property
    def x(self):
        out = -self.X + self.dx * np.arange(self.N)
        out.flags.writeable = False
        return out

    @cached_property
    def k(self):
        out = np.arange(-self.N // 2, self.N // 2)
        out.flags.writeable = False
        return out

    @cached_property
    def w(self):
        out = self.dw * self.k
        out.flags.writeable = False
        return out

    @cached_property
    def zero_index(self):
        return self.N // 2

    @cached_property
    def _sign(self):
        # exp(i w_k X) = (-1)^k exactly
        return np.where(self.k % 2 == 0, 1.0, -1.0)

    def to_dict(self):
        return {"X": self.X, "N": self.N}


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.N,):
            raise ValueError(f"expected {self.grid.N} samples, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function has non-finite values")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def _check(self, other):
        if other.grid != self.grid:
            raise ValueError("grid functions live on different grids")

    def __add__(self, other):
        self._check(other)
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return GridFunction(self.grid, self.values - other.values)

    def __mul__(self, scalar):
        return GridFunction(self.grid, float(scalar) * self.values)

    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(self.grid, -self.values)

    @property
    def sup_abs(self):
        return float(np.abs(self.values).max())

    @property
    def mass(self):
        # trapezoid on the periodic grid; equals coeffs(0) of the spectrum
        return float(self.values.sum() * self.grid.dx)

    def to_csv(self, path):
        np.savetxt(path, np.column_stack([self.grid.x, self.values]), delimiter=",",
                   header="x,value", comments="", fmt="%.17g")

    @classmethod
    def from_csv(cls, path):
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        x = data[:, 0]
        n = len(x)
        X = float(f"{-x[0]:.12g}")  # the written nodes carry round-off
        return cls(Grid(X, n), data[:, 1])


@dataclass(frozen=True, eq=False)
class SpectralFunction:
    grid: Grid
    coeffs: np.ndarray
    deriv_coeffs: np.ndarray

    def __post_init__(self):
        for name in ("coeffs", "deriv_coeffs"):
            a = np.array(getattr(self, name), dtype=complex)
            if a.shape != (self.grid.N,):
                raise ValueError(f"{name} has shape {a.shape}, expected ({self.grid.N},)")
            a.flags.writeable = False
            object.__setattr__(self, name, a)

    def __sub__(self, other):
        return SpectralFunction(self.grid, self.coeffs - other.coeffs, self.deriv_coeffs - other.deriv_coeffs)

    def __add__(self, other):
        return SpectralFunction(self.grid, self.coeffs + other.coeffs, self.deriv_coeffs + other.deriv_coeffs)

    def __mul__(self, scalar):
        return SpectralFunction(self.grid, scalar * self.coeffs, scalar * self.deriv_coeffs)

    __rmul__ = __mul__

    @property
    def mass(self):
        return float(self.coeffs[self.grid.zero_index].real)

    def to_csv(self, path):
        c, d = self.coeffs, self.deriv_coeffs
        np.savetxt(path, np.column_stack([self.grid.w, c.real, c.imag, d.real, d.imag]), delimiter=",",
                   header="w,re,im,re',im'", comments="", fmt="%.17g")

    @classmethod
    def from_csv(cls, path):
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        n = data.shape[0]
        X = float(f"{-math.pi * (n // 2) / data[0, 0]:.12g}")
        return cls(Grid(X, n), data[:, 1] + 1j * data[:, 2], data[:, 3] + 1j * data[:, 4])


# -- built-in profiles ---------------------------------------------------------

@dataclass(frozen=True)
class Profile:
    """Analytic initial-data family evaluated by :func:`sample`."""

    kind: str
    amplitude: float = 1.0
    sigma: float = 1.0
    center: float = 0.0
    p: float = 1.0

    KINDS = ("gaussian", "fixed_point", "bump", "dipole")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown profile kind {self.kind!r}")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        y = x - self.center
        if self.kind == "gaussian":
            return self.amplitude * np.exp(-0.5 * (y / self.sigma) ** 2)
        if self.kind == "fixed_point":
            p1 = float(self.p) + 1.0
            return self.amplitude * math.sqrt(p1 / (4 * math.pi)) * np.exp(-p1 * y * y / 4.0)
        if self.kind == "dipole":
            return self.amplitude * y * np.exp(-0.5 * (y / self.sigma) ** 2)
        # C-infinity bump supported on |y| < sigma
        z = y / self.sigma
        out = np.zeros_like(z)
        inside = np.abs(z) < 1
        out[inside] = self.amplitude * np.exp(1.0 - 1.0 / (1.0 - z[inside] ** 2))
        return out

    def to_dict(self):
        return {"kind": self.kind, "amplitude": self.amplitude, "sigma": self.sigma,
                "center": self.center, "p": self.p}

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def gaussian(amplitude=1.0, sigma=1.0, center=0.0):
    return Profile("gaussian", amplitude, sigma, center)


def fixed_point(p, amplitude=1.0):
    return Profile("fixed_point", amplitude, p=p)


def bump(amplitude=1.0, width=1.0, center=0.0):
    return Profile("bump", amplitude, width, center)


def dipole(amplitude=1.0, sigma=1.0, center=0.0):
    return Profile("dipole", amplitude, sigma, center)


def sample(profile, grid):
    """Pointwise evaluation of a built-in profile on the grid nodes."""
    return GridFunction(grid, profile(grid.x))


# -- transforms ------------------------------------------------------------------

def _fwd(values, grid):
    return grid.dx * grid._sign * sfft.fftshift(sfft.fft(values))


def to_spectrum(f):
    """Continuum-normalized transform of f together with the transform of -ix f."""
    g = f.grid
    return SpectralFunction(g, _fwd(f.values, g), _fwd(-1j * g.x * f.values, g))


def from_spectrum(F):
    """Real samples whose spectrum is ``F.coeffs`` (the derivative array is implied)."""
    g = F.grid
    vals = sfft.ifft(sfft.ifftshift(F.coeffs * g._sign)) / g.dx
    return GridFunction(g, vals.real)


def bq_norm_argmax(F, q):
    """(value, w*) of sup_k (1 + |w_k|^q)(|coeffs_k| + |deriv_k|), ties to smallest |w|."""
    val, k = weighted_sup(F.grid.w, F.coeffs, F.deriv_coeffs, float(q))
    return val, float(F.grid.w[k])


def bq_norm(F, q):
    """Weighted Fourier norm of a spectral function (sup over grid frequencies)."""
    return bq_norm_argmax(F, q)[0]


def norm(f, q):
    """B_q norm of a grid function."""
    return bq_norm(to_spectrum(f), q)


def heat_propagate(F, ds):
    """Apply the heat multiplier exp(-ds w^2), product rule for the derivative array."""
    if ds < 0:
        raise ValueError("ds must be non-negative")
    w = F.grid.w
    e = np.exp(-ds * w * w)
    return SpectralFunction(F.grid, e * F.coeffs, e * (F.deriv_coeffs - 2.0 * ds * w * F.coeffs))


# -- evaluation at arbitrary arithmetic frequency progressions -----------------

_SPLIT = 134217729.0  # 2**27 + 1


def _turns(coef, n):
    """frac(coef * n) for integer-valued float arrays n < 2**26, coherently in coef.

    coef is split as hi + lo with hi carrying <= 26 significant bits, so that
    hi * n is exact and its fractional part loses nothing.
    """
    t = _SPLIT * coef
    hi = t - (t - coef)
    lo = coef - hi
    a = hi * n
    a = a - np.floor(a)
    return a + lo * n


def _cis(turns):
    return np.exp(-2j * math.pi * turns)


def dft_progression(values, x0, dx, w0, dw, M):
    """dx * sum_j values_j exp(-i w_m x_j) for w_m = w0 + m dw, x_j = x0 + j dx.

    Bluestein chirp-z evaluation with exactly reduced chirp phases; O((N + M)
    log(N + M)) and accurate to a few ulps of the input scale.  Indices are
    centred first so that symmetric grids carry no large linear phases.
    """
    v = np.asarray(values)
    N = v.size
    jc, mc = N // 2, M // 2
    xm = x0 + jc * dx
    wm = w0 + mc * dw
    j = np.arange(N, dtype=float) - jc
    m = np.arange(M, dtype=float) - mc
    # (m - j) in centred indices for every lag of the linear convolution
    lag = np.arange(-(N - 1), M, dtype=float) + (jc - mc)
    # m j dw dx = (m^2 + j^2 - (m - j)^2) dw dx / 2
    tau = dw * dx / (4 * math.pi)
    y = v * _cis(_turns(wm * dx / (2 * math.pi), j) + _turns(tau, j * j))
    kern = np.conj(_cis(_turns(tau, lag * lag)))
    P = sfft.next_fast_len(N + M - 1)
    hpad = np.zeros(P, dtype=complex)
    hpad[:M] = kern[N - 1:]
    hpad[P - (N - 1):] = kern[:N - 1]
    conv = sfft.ifft(sfft.fft(y, P) * sfft.fft(hpad))[:M]
    post = _cis(_turns(dw * xm / (2 * math.pi), m) + _turns(tau, m * m))
    return dx * np.exp(-1j * wm * xm) * post * conv


def dilate(f, a, grid=None):
    """Spectrum of v(x) = a f(a x) on ``grid`` (default f's grid).

    v^(w) = f^(w / a) and v^'(w) = f^'(w / a) / a, evaluated directly from the
    samples of f; no interpolation of stored spectra is involved.
    """
    g = f.grid
    tg = g if grid is None else grid
    w0 = tg.w[0] / a
    dw = tg.dw / a
    c = dft_progression(f.values, g.x[0], g.dx, w0, dw, tg.N)
    d = dft_progression(-1j * g.x * f.values, g.x[0], g.dx, w0, dw, tg.N) / a
    return SpectralFunction(tg, c, d)
