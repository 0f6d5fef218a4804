"""Time integration of u_t = c(t) u_xx + lambda d(t) F(u) on a window [t0, t1].

Three independent routes:

* :func:`picard_solve` iterates the Duhamel map u -> u_f + N(u) in frequency
  space on a fixed set of time nodes;
* :func:`etd_evolve` is a first-order exponential integrator (exact linear
  part) used for production runs, optionally growing the periodic box;
* :func:`oracle_solve` is a Crank-Nicolson finite-difference solver in real
  space with Dirichlet walls, sharing nothing with the spectral path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft
from scipy.signal import resample

from . import kernels
from .errors import NoContraction, RadiusExceeded
from .problem import s_of
from .spectral import (Grid, GridFunction, SpectralFunction, bq_norm, from_spectrum, heat_propagate,
                       to_spectrum)


@dataclass(frozen=True)
class SolverConfig:
    """Discretization knobs.

    ``substeps`` is the number of time steps per solve window (and per
    doubling of t for long windows).  ``rho_guard`` overrides the working
    bound on sup|u|; ``None`` picks half of rho0 for finite radius and 1 for
    entire nonlinearities.
    """

    substeps: int = 16
    picard_tol: float = 1e-10
    picard_max_iters: int = 50
    rho_guard: float = None

    def __post_init__(self):
        if int(self.substeps) != self.substeps or self.substeps < 8:
            raise ValueError("substeps must be an integer >= 8")
        if self.picard_tol < 0 or self.picard_max_iters < 1:
            raise ValueError("picard_tol must be >= 0 and picard_max_iters >= 1")
        if self.rho_guard is not None and not self.rho_guard > 0:
            raise ValueError("rho_guard must be positive")

    def to_dict(self):
        return {"substeps": self.substeps, "picard_tol": self.picard_tol,
                "picard_max_iters": self.picard_max_iters, "rho_guard": self.rho_guard}


def resolve_guard(spec, cfg=None):
    if cfg is not None and cfg.rho_guard is not None:
        return float(cfg.rho_guard)
    from .certificates import rho_guard_default

    return rho_guard_default(spec)


@dataclass(frozen=True, eq=False)
class Trajectory:
    spec: object
    times: tuple
    slices: tuple
    sup_abs: np.ndarray
    mass: np.ndarray
    bq: np.ndarray
    info: dict = field(default_factory=dict)

    @property
    def final(self):
        return self.slices[-1]

    def sup_norm_L(self):
        """max over stored times of the B_q norm."""
        return float(np.max(self.bq))

    def to_csv(self, path):
        data = np.column_stack([np.asarray(self.times), self.sup_abs, self.mass, self.bq])
        np.savetxt(path, data, delimiter=",", header="t,sup_abs,mass,bq_norm", comments="", fmt="%.17g")

    def dump_profiles(self, directory, every=1):
        import os

        os.makedirs(directory, exist_ok=True)
        for i in range(0, len(self.times), every):
            self.slices[i].to_csv(os.path.join(directory, f"slice_{i:05d}.csv"))


def _make_trajectory(spec, times, slices, q, info, spectra=None):
    sup = np.array([s.sup_abs for s in slices])
    if spectra is None:
        spectra = [to_spectrum(s) for s in slices]
    mass = np.array([S.mass for S in spectra])
    bq = np.array([bq_norm(S, q) for S in spectra])
    return Trajectory(spec, tuple(float(t) for t in times), tuple(slices), sup, mass, bq, info)


def time_nodes(t0, t1, count):
    """count+1 nodes on [t0, t1]: uniform when t1/t0 <= 4, geometric otherwise."""
    if t1 / t0 <= 4:
        out = np.linspace(t0, t1, count + 1)
    else:
        out = t0 * (t1 / t0) ** (np.arange(count + 1) / count)
    out[0], out[-1] = t0, t1
    return out


# -- building blocks ---------------------------------------------------------------

def linear_solve(f, spec, t):
    """u_f(., t): heat multiplier with the accumulated diffusion time s(t)."""
    if t < 1:
        raise ValueError("t must be >= 1")
    return from_spectrum(heat_propagate(to_spectrum(f), s_of(spec.diffusion, t)))


def _rhs_values(values, spec, t, guard):
    m = float(np.max(np.abs(values)))
    if m >= guard:
        raise RadiusExceeded(f"sup|u| = {m:.6g} reached the working bound {guard:.6g} at t = {t:.6g}")
    coef = spec.lam * spec.d(t)
    if coef == 0:
        return np.zeros_like(values)
    return coef * spec.nonlinearity(values)


def nonlinear_rhs(u, spec, t, guard=None):
    """lambda d(t) F(u) evaluated pointwise."""
    if guard is None:
        guard = resolve_guard(spec)
    return GridFunction(u.grid, _rhs_values(u.values, spec, t, guard))


# -- Picard / Duhamel ----------------------------------------------------------------

def _lagrange_mid(vals, i):
    """Cubic Lagrange value at the midpoint of [tau_i, tau_{i+1}] on uniform-in-index nodes.

    Falls back to the one-sided stencils at the ends (and to lower order for
    fewer than four nodes).  Interpolation is in the node index, which is
    exact for the uniform layout and smooth for geometric nodes.
    """
    n = len(vals)
    if n < 4:
        return 0.5 * (vals[i] + vals[i + 1])
    lo = min(max(i - 1, 0), n - 4)
    x = i + 0.5 - lo
    # Lagrange weights for nodes 0..3 at position x
    w0 = -(x - 1) * (x - 2) * (x - 3) / 6.0
    w1 = x * (x - 2) * (x - 3) / 2.0
    w2 = -x * (x - 1) * (x - 3) / 2.0
    w3 = x * (x - 1) * (x - 2) / 6.0
    return w0 * vals[lo] + w1 * vals[lo + 1] + w2 * vals[lo + 2] + w3 * vals[lo + 3]


def _duhamel(G, times, svals, smid, hs):
    """N^(tau_i) for i = 0..M given source spectra G_i (coeff, deriv pairs).

    Interval recursion with Simpson's rule per interval; the heat factor
    exp(-(s_{i+1} - s(tau)) w^2) is applied exactly to each sample.
    """
    grid = G[0].grid
    zero = SpectralFunction(grid, np.zeros(grid.N), np.zeros(grid.N))
    out = [zero]
    M = len(times) - 1
    Gc = [g.coeffs for g in G]
    Gd = [g.deriv_coeffs for g in G]
    for i in range(M):
        gm = SpectralFunction(grid, _lagrange_mid(Gc, i), _lagrange_mid(Gd, i))
        h = hs[i]
        ds = svals[i + 1] - svals[i]
        dm = svals[i + 1] - smid[i]
        acc = heat_propagate(G[i], ds) + 4.0 * heat_propagate(gm, dm) + G[i + 1]
        out.append(heat_propagate(out[-1], ds) + (h / 6.0) * acc)
    return out


def picard_solve(f, spec, L, cfg=None, t0=1.0):
    """Fixed point of u = u_f + N(u) on [t0, L], seeded with u_f.

    The residual reported per iteration is max_i ||N^(k+1)(tau_i) - N^(k)(tau_i)||_q,
    i.e. ||T(u^(k)) - u^(k)||_L.  Iteration stops below ``picard_tol`` or
    once the residual stagnates at round-off relative to ||N||_L.
    """
    cfg = cfg or SolverConfig()
    if not L > t0:
        raise ValueError("L must exceed the window start")
    q = spec.q
    guard = resolve_guard(spec, cfg)
    M = max(16, int(math.ceil(cfg.substeps * max(1.0, math.log2(L / t0)))))
    times = time_nodes(t0, L, M)
    mids = 0.5 * (times[:-1] + times[1:])
    s0 = s_of(spec.diffusion, t0)
    svals = np.asarray(s_of(spec.diffusion, times), dtype=float) - s0
    smid = np.asarray(s_of(spec.diffusion, mids), dtype=float) - s0
    hs = np.diff(times)

    F0 = to_spectrum(f)
    lin = [heat_propagate(F0, s) for s in svals]
    lin_vals = [from_spectrum(S).values for S in lin]

    nl = None
    residuals = []
    u_vals = lin_vals
    it = 0
    while True:
        it += 1
        G = [to_spectrum(GridFunction(f.grid, _rhs_values(u, spec, t, guard))) for u, t in zip(u_vals, times)]
        new = _duhamel(G, times, svals, smid, hs)
        if nl is None:
            res = max(bq_norm(S, q) for S in new)
        else:
            res = max(bq_norm(a - b, q) for a, b in zip(new, nl))
        size = max(bq_norm(S, q) for S in new)
        if not math.isfinite(res):
            raise NoContraction(f"Picard residual became non-finite at iteration {it}")
        residuals.append(res)
        nl = new
        u_vals = [lv + from_spectrum(S).values for lv, S in zip(lin_vals, nl)]
        if res <= cfg.picard_tol or res <= 1e-14 * size:
            break
        if it >= cfg.picard_max_iters:
            raise NoContraction(f"no convergence after {it} iterations (residual {res:.3e})")
    slices = [GridFunction(f.grid, v) for v in u_vals]
    spectra = [a + b for a, b in zip(lin, nl)]
    info = {"method": "picard", "iterations": it, "residuals": residuals, "nodes": M + 1}
    return _make_trajectory(spec, times, slices, q, info, spectra)


# -- exponential integrator ---------------------------------------------------------

def _phi1(z):
    out = np.ones_like(z)
    big = z > 1e-8
    out[big] = -np.expm1(-z[big]) / z[big]
    out[~big] = 1.0 - 0.5 * z[~big]
    return out


def _grow(values, grid):
    """Double the box; keep N when the upper half of the spectrum is negligible."""
    N = grid.N
    spec = sfft.fft(values)
    mag = np.abs(spec)
    hi = mag[N // 4: 3 * N // 4 + 1].max()
    new = Grid(2.0 * grid.X, N) if hi <= 1e-15 * mag.max() else Grid(2.0 * grid.X, 2 * N)
    out = np.zeros(new.N)
    if new.N == N:
        # new node j sits on old node 2j - N/2
        j = np.arange(N // 4, 3 * N // 4)
        out[j] = values[2 * j - N // 2]
    else:
        out[N // 2: N // 2 + N] = values
    return out, new


def _needs_growth(values):
    N = values.size
    m = np.abs(values).max()
    if m == 0:
        return False
    tail = max(np.abs(values[: N // 4]).max(), np.abs(values[3 * N // 4:]).max())
    return tail > 1e-14 * m


def etd_evolve(f, spec, t0, t1, cfg=None, grow_domain=False, record_every=1, max_points=2 ** 18):
    """First-order exponential time differencing from t0 to t1.

    u^ <- exp(-ds w^2) u^ + h phi1(ds w^2) (lambda d F(u))^, ds = s(t_{k+1}) - s(t_k).
    With ``grow_domain`` the periodic box doubles whenever the solution's
    tails (|x| > X/2) exceed 1e-14 of its maximum, so that long runs do not
    feel the periodic images.
    """
    cfg = cfg or SolverConfig()
    if not 1 <= t0 < t1:
        raise ValueError("need 1 <= t0 < t1")
    guard = resolve_guard(spec, cfg)
    K = cfg.substeps * max(1, int(math.ceil(math.log2(t1 / t0) - 1e-12)))
    times = time_nodes(t0, t1, K)
    svals = np.asarray(s_of(spec.diffusion, times), dtype=float)
    grid = f.grid
    u = np.array(f.values)
    rec_t, rec = [t0], [GridFunction(grid, u)]
    regrids = []
    for k in range(K):
        if grow_domain and _needs_growth(u):
            u, grid = _grow(u, grid)
            if grid.N > max_points:
                raise RuntimeError(f"box growth needs {grid.N} points, above max_points={max_points}")
            regrids.append((float(times[k]), grid.X, grid.N))
        h = times[k + 1] - times[k]
        ds = svals[k + 1] - svals[k]
        w2 = grid.w ** 2
        uh = grid.dx * grid._sign * sfft.fftshift(sfft.fft(u))
        g = _rhs_values(u, spec, times[k], guard)
        if np.any(g):
            gh = grid.dx * grid._sign * sfft.fftshift(sfft.fft(g))
            uh = np.exp(-ds * w2) * uh + h * _phi1(ds * w2) * gh
        else:
            uh = np.exp(-ds * w2) * uh
        u = (sfft.ifft(sfft.ifftshift(uh * grid._sign)) / grid.dx).real
        if (k + 1) % record_every == 0 or k + 1 == K:
            rec_t.append(times[k + 1])
            rec.append(GridFunction(grid, u))
    info = {"method": "etd1", "steps": K, "regrids": regrids}
    return _make_trajectory(spec, rec_t, rec, spec.q, info)


def evolve_long(f, spec, t1, cfg=None, t0=1.0, samples_per_doubling=4):
    """Long direct solve with a growing box, recording a few slices per doubling of t."""
    cfg = cfg or SolverConfig()
    every = max(1, cfg.substeps // samples_per_doubling)
    return etd_evolve(f, spec, t0, t1, cfg, grow_domain=True, record_every=every)


# -- Crank-Nicolson oracle -----------------------------------------------------------

def oracle_solve(f, spec, t1, fine_grid=None, steps=None, cfg=None, t0=1.0):
    """Independent finite-difference solution at t1 on ``fine_grid``.

    ``f`` is a GridFunction (band-limited interpolation onto the fine grid
    when the grids differ) or a callable profile sampled directly.
    """
    if not t1 > t0:
        raise ValueError("t1 must exceed t0")
    if fine_grid is None:
        fine_grid = f.grid if isinstance(f, GridFunction) else Grid()
    if isinstance(f, GridFunction):
        if f.grid == fine_grid:
            u0 = f.values
        elif f.grid.X == fine_grid.X:
            u0 = resample(f.values, fine_grid.N)
        else:
            raise ValueError("oracle grid must share the half width of the data grid")
    else:
        u0 = f(fine_grid.x)
    guard = resolve_guard(spec, cfg)
    if steps is None:
        steps = int(math.ceil(2000 * (t1 - t0)))
    times = np.linspace(t0, t1, steps + 1)
    mids = 0.5 * (times[:-1] + times[1:])
    c_mid = np.asarray(spec.diffusion.c(mids), dtype=float)
    lam = spec.lam
    g_start = np.array([lam * spec.d(t) for t in times[:-1]])
    g_mid = np.array([lam * spec.d(t) for t in mids])
    nl = spec.nonlinearity
    coeffs = [a for _, a in nl.coefficients]
    u, fail = kernels.cn_imex_run(np.asarray(u0, dtype=float), fine_grid.dx, times, c_mid, g_start, g_mid,
                                  [float(d) for d in nl.degrees], coeffs, guard)
    if fail >= 0:
        raise RadiusExceeded(f"oracle solution reached the working bound {guard:.6g} near t = {times[min(fail, steps)]:.6g}")
    return GridFunction(fine_grid, u)
