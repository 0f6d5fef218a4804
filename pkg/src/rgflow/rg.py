"""Renormalization-group map: solve on [1, L], then rescale parabolically.

R_{L,n} f(x) = L^{(p+1)/2} u_n(L^{(p+1)/2} x, L) where u_n solves the n-th
rescaled problem with initial data f.  Its linear part has the closed form
F(R0 g)(w) = g^(w / L^{(p+1)/2}) exp(-w^2 s_n(L) / L^{p+1}).
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InadmissibleData, RGFlowError
from .problem import rescale_coefficients, s_of, r_of, spec_to_dict
from .solver import SolverConfig, picard_solve
from .spectral import (Grid, GridFunction, SpectralFunction, bq_norm, dilate, fixed_point, from_spectrum,
                       heat_propagate, sample, to_spectrum)


def fixed_point_profile(p, grid):
    """Samples of sqrt((p+1)/4pi) exp(-(p+1) x^2 / 4); unit mass, spectrum exp(-w^2/(p+1))."""
    if not p > 0:
        raise ValueError("p must be positive")
    return sample(fixed_point(p), grid)


def scale_factor(p, L):
    return float(L) ** ((float(p) + 1.0) / 2.0)


def s_n(diffusion, L, n):
    """s_n(L) = int_1^L c_n(v) dv for c_n(t) = L^{-np} c(L^n t)."""
    return s_of(diffusion.rescaled(n, L), float(L))


def linear_rg_spectrum(g, L, n, spec):
    """Spectral form of R0_{L,n} g, evaluated straight from the samples of g."""
    p = spec.p
    a = scale_factor(p, L)
    D = dilate(g, a)
    return heat_propagate(D, s_n(spec.diffusion, L, n) / float(L) ** (float(p) + 1.0))


def linear_rg_apply(g, L, n, spec):
    """R0_{L,n} g as grid samples."""
    return from_spectrum(linear_rg_spectrum(g, L, n, spec))


def fixed_point_image_spectrum(p, diffusion, L, n, grid):
    """Closed-form spectrum of R0_{L^n} f_p*: exp(-b w^2), b = 1/(p+1) + r(L^n)/L^{n(p+1)}."""
    b = _image_width(p, diffusion, L, n)
    w = grid.w
    e = np.exp(-b * w * w)
    return SpectralFunction(grid, e, -2.0 * b * w * e)


def _image_width(p, diffusion, L, n):
    p1 = float(p) + 1.0
    Ln = float(L) ** n
    return 1.0 / p1 + r_of(diffusion, Ln) / Ln ** p1


def fixed_point_image(p, diffusion, L, n, grid):
    """R0_{L^n} f_p* sampled in real space (a Gaussian of unit mass)."""
    b = _image_width(p, diffusion, L, n)
    x = grid.x
    return GridFunction(grid, np.exp(-x * x / (4.0 * b)) / math.sqrt(4.0 * math.pi * b))


def decompose(f_n, n, L, spec):
    """(A_n, g_n) with f_n = A_n R0_{L^n} f_p* + g_n and g_n^(0) = 0."""
    A = f_n.mass
    ref = fixed_point_image(spec.p, spec.diffusion, L, n, f_n.grid)
    return A, f_n - A * ref


def original_slice(f_n, n, L, p):
    """Undo the rescaling: (u(., L^n), L^n) with u(x, L^n) = a^{-1} f_n(x / a), a = L^{n(p+1)/2}.

    The returned samples live on the stretched grid with half width a X.
    """
    a = float(L) ** (n * (float(p) + 1.0) / 2.0)
    g = f_n.grid
    return GridFunction(Grid(g.X * a, g.N), f_n.values / a), float(L) ** n


# -- nonlinear RG step -------------------------------------------------------------

def _window(f, idx, spec, base, cfg):
    """One solve-and-rescale in base ``base`` with problem index ``idx``.

    Returns the rescaled data and the (t, amplitude, mass) samples of the
    original-variable solution along the window.
    """
    spec_i = rescale_coefficients(spec, idx, base)
    traj = picard_solve(f, spec_i, base, cfg)
    a = scale_factor(spec.p, base)
    out = from_spectrum(dilate(traj.final, a))
    tscale = float(base) ** idx
    ascale = tscale ** (-(float(spec.p) + 1.0) / 2.0)
    ts = tscale * np.asarray(traj.times)
    amps = ascale * traj.sup_abs
    return out, (ts, amps, traj.mass.copy()), traj


def _split(L, max_window):
    if L <= max_window:
        return 1, float(L)
    k = int(math.ceil(math.log(L) / math.log(max_window) - 1e-12))
    return k, float(L) ** (1.0 / k)


def _rg_apply(f_n, n, spec, L, cfg, max_window):
    k, base = _split(L, max_window)
    series = []
    iters = []
    f = f_n
    for m in range(k):
        f, ser, traj = _window(f, n * k + m, spec, base, cfg)
        series.append(ser)
        iters.append(traj.info["iterations"])
    return f, series, iters


def rg_apply(f_n, n, spec, L, cfg=None, strict=False, eps_n=None, max_window=2.0):
    """R_{L,n} f_n.

    Windows with L above ``max_window`` are realized as k sub-steps with
    L' = L^{1/k}, using R_{L,n} = R_{L',nk+k-1} ... R_{L',nk}; this is the same
    map but keeps each Picard window short.  With ``strict`` the data must
    satisfy ||f_n|| < eps_n.
    """
    cfg = cfg or SolverConfig()
    _admissibility(f_n, n, spec, L, strict, eps_n)
    return _rg_apply(f_n, n, spec, L, cfg, max_window)[0]


def _admissibility(f_n, n, spec, L, strict, eps_n):
    from .certificates import eps_n as eps_n_fn

    if eps_n is None:
        eps_n = eps_n_fn(spec, L, n)
    fnorm = bq_norm(to_spectrum(f_n), spec.q)
    ok = fnorm < eps_n
    if not ok:
        msg = f"step {n}: ||f_n|| = {fnorm:.3e} is not below eps_n = {eps_n:.3e}"
        if strict:
            raise InadmissibleData(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=3)
    return fnorm, eps_n, ok


# -- iterated flow -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RGStep:
    n: int
    f_n: GridFunction
    A_n: float
    g_norm: float
    lambda_n: float
    eps_n: float
    admissible: bool
    f_norm: float
    g0: float = 0.0
    picard_iterations: tuple = ()


@dataclass(frozen=True, eq=False)
class RGTrace:
    spec: object
    L: float
    steps: tuple
    A_limit_estimate: float
    times: np.ndarray = None
    amplitudes: np.ndarray = None
    masses: np.ndarray = None
    halted: str = None

    @property
    def A(self):
        return np.array([s.A_n for s in self.steps])

    @property
    def g_norms(self):
        return np.array([s.g_norm for s in self.steps])

    def amplitude_series(self):
        """(t, amplitude) pairs of the reconstructed original-variable solution."""
        return list(zip(self.times.tolist(), self.amplitudes.tolist()))

    def rows(self):
        return [(s.n, s.A_n, s.g_norm, s.lambda_n, s.f_norm, s.eps_n, s.admissible) for s in self.steps]

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("n,A_n,g_norm,lambda_n,f_norm,eps_n,admissible\n")
            for r in self.rows():
                fh.write(f"{r[0]},{r[1]!r},{r[2]!r},{r[3]!r},{r[4]!r},{r[5]!r},{str(r[6]).lower()}\n")

    def amplitude_csv(self, path):
        with open(path, "w") as fh:
            fh.write("t,amplitude,mass\n")
            for t, a, m in zip(self.times, self.amplitudes, self.masses):
                fh.write(f"{float(t)!r},{float(a)!r},{float(m)!r}\n")

    def to_dict(self):
        grid = self.steps[0].f_n.grid if self.steps else None
        return {
            "spec": spec_to_dict(self.spec),
            "grid": grid.to_dict() if grid else None,
            "L": self.L,
            "A_limit_estimate": self.A_limit_estimate,
            "halted": self.halted,
            "steps": [dict(zip(("n", "A_n", "g_norm", "lambda_n", "f_norm", "eps_n", "admissible"), r))
                      for r in self.rows()],
        }

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)


def rg_flow(f, spec, L, N_steps, cfg=None, strict=False, max_window=2.0):
    """Iterate f_{n+1} = R_{L,n} f_n, recording N_steps + 1 states f_0..f_N.

    A solver failure stops the flow; the trace keeps the completed steps and
    the error text in ``halted`` (strict-mode inadmissibility is raised).
    """
    from .certificates import eps_n as eps_n_fn

    cfg = cfg or SolverConfig()
    if N_steps < 1:
        raise ValueError("N_steps must be >= 1")
    L = float(L)
    q = spec.q
    steps = []
    ts, amps, masses = [], [], []
    halted = None
    f_n = f
    for n in range(N_steps + 1):
        A, g = decompose(f_n, n, L, spec)
        G = to_spectrum(g)
        eps = eps_n_fn(spec, L, n)
        fnorm = bq_norm(to_spectrum(f_n), q)
        lam_n = rescale_coefficients(spec, n, L).lam
        step_kwargs = dict(n=n, f_n=f_n, A_n=A, g_norm=bq_norm(G, q), lambda_n=lam_n, eps_n=eps,
                           admissible=bool(fnorm < eps), f_norm=fnorm, g0=abs(G.coeffs[f_n.grid.zero_index]))
        if n == N_steps:
            steps.append(RGStep(**step_kwargs))
            break
        if strict and not fnorm < eps:
            raise InadmissibleData(f"step {n}: ||f_n|| = {fnorm:.3e} is not below eps_n = {eps:.3e}")
        try:
            nxt, series, iters = _rg_apply(f_n, n, spec, L, cfg, max_window)
        except RGFlowError as exc:
            steps.append(RGStep(**step_kwargs))
            halted = f"step {n}: {type(exc).__name__}: {exc}"
            break
        steps.append(RGStep(**step_kwargs, picard_iterations=tuple(iters)))
        for t_, a_, m_ in series:
            sl = slice(0, None) if not ts else slice(1, None)  # drop duplicated window starts
            ts.append(t_[sl])
            amps.append(a_[sl])
            masses.append(m_[sl])
        f_n = nxt
    cat = (lambda xs: np.concatenate(xs) if xs else np.zeros(0))
    return RGTrace(spec, L, tuple(steps), steps[-1].A_n, cat(ts), cat(amps), cat(masses), halted)
