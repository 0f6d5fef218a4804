"""Observables extracted from solver and RG output.

Decay exponents from amplitude series, distance of a rescaled slice to the
Gaussian profile, extrapolated mass limits, and the log-factor probe for
critical nonlinearities.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats

from .errors import DegenerateSeries, NonConvergent
from .spectral import Grid, SpectralFunction, bq_norm, dilate


@dataclass(frozen=True)
class DecayFit:
    gamma_est: float
    stderr: float
    window: tuple
    residual_rms: float
    n_samples: int = 0
    intercept: float = 0.0

    def to_dict(self):
        return asdict(self)

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)

    def plot_csv(self, series, path):
        """log t, log amplitude and the fitted line for every sample of ``series``."""
        t, a = _split_series(series)
        lt = np.log(t)
        fit = self.intercept - 0.5 * self.gamma_est * lt
        with open(path, "w") as fh:
            fh.write("log_t,log_amplitude,fit\n")
            for x, y, z in zip(lt, np.log(a), fit):
                fh.write(f"{float(x)!r},{float(y)!r},{float(z)!r}\n")


def _split_series(series):
    if isinstance(series, tuple) and len(series) == 2 and np.ndim(series[0]) == 1:
        t, a = series
    else:
        arr = np.asarray(series, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise DegenerateSeries("series must be a list of (t, amplitude) pairs")
        t, a = arr[:, 0], arr[:, 1]
    t = np.asarray(t, dtype=float)
    a = np.asarray(a, dtype=float)
    order = np.argsort(t, kind="stable")
    return t[order], a[order]


def _select(t, a, window, min_samples):
    if window is not None:
        lo, hi = window
        m = (t >= lo * (1 - 1e-12)) & (t <= hi * (1 + 1e-12))
    else:
        m = t >= t[-1] / 10.0
        if m.sum() < min_samples:
            m = np.zeros_like(m)
            m[-min_samples:] = True
    return t[m], a[m]


def fit_decay_exponent(series, window=None, min_samples=8):
    """Least-squares slope of log amplitude vs log t; gamma = -2 slope.

    By default only the latest decade [t_max/10, t_max] is used (extended
    backwards to ``min_samples`` points if needed).
    """
    t, a = _split_series(series)
    if t.size < min_samples:
        raise DegenerateSeries(f"need at least {min_samples} samples, got {t.size}")
    if np.any(a <= 0) or np.any(t <= 0):
        raise DegenerateSeries("times and amplitudes must be positive")
    if t[-1] / t[0] < 10.0 * (1 - 1e-12):
        raise DegenerateSeries("series spans less than one decade in t")
    ts, as_ = _select(t, a, window, min_samples)
    if ts.size < 3 or ts[-1] <= ts[0]:
        raise DegenerateSeries("fit window holds too few distinct times")
    x, y = np.log(ts), np.log(as_)
    res = stats.linregress(x, y)
    resid = y - (res.intercept + res.slope * x)
    return DecayFit(float(-2.0 * res.slope), float(2.0 * res.stderr), (float(ts[0]), float(ts[-1])),
                    float(np.sqrt(np.mean(resid ** 2))), int(ts.size), float(res.intercept))


def _profile_spectrum(grid, p, A):
    w = grid.w
    p1 = float(p) + 1.0
    e = np.exp(-w * w / p1)
    return SpectralFunction(grid, A * e, A * (-2.0 * w / p1) * e)


def rescaled_slice_spectrum(u_t, t, p, grid=None):
    """Spectrum of t^{(p+1)/2} u(t^{(p+1)/2} x, t) on ``grid`` (default 40 / 4096)."""
    a = float(t) ** ((float(p) + 1.0) / 2.0)
    return dilate(u_t, a, grid or Grid())


def profile_distance(u_t, t, p, A, q, grid=None):
    """||t^{(p+1)/2} u(t^{(p+1)/2} ., t) - A f_p*||_q, rescaling done in frequency space."""
    if not t > 1:
        raise ValueError("t must exceed 1")
    V = rescaled_slice_spectrum(u_t, t, p, grid)
    return bq_norm(V - _profile_spectrum(V.grid, p, A), q)


def _sequence(obj):
    from .rg import RGTrace
    from .solver import Trajectory

    if isinstance(obj, RGTrace):
        return np.asarray(obj.A, dtype=float)
    if isinstance(obj, Trajectory):
        return np.asarray(obj.mass, dtype=float)
    return np.asarray(obj, dtype=float)


def estimate_A(obj):
    """Limit of the A_n (RG trace) or mass (trajectory) sequence.

    Aitken extrapolation on the last three terms, assuming geometric
    convergence.  Differences at round-off level return the last term.
    """
    a = _sequence(obj)
    if a.size < 3:
        raise DegenerateSeries("need at least three terms")
    a0, a1, a2 = a[-3:]
    d1, d2 = a1 - a0, a2 - a1
    floor = 64 * np.finfo(float).eps * max(abs(a0), abs(a1), abs(a2))
    if abs(d2) <= floor:
        return float(a2)
    if abs(d2) >= abs(d1):
        raise NonConvergent(f"successive differences do not shrink ({d1:.3e} -> {d2:.3e})")
    return float(a2 - d2 * d2 / (d2 - d1))


@dataclass(frozen=True)
class LogCorrection:
    mu: float
    stderr: float
    window: tuple

    def to_dict(self):
        return asdict(self)


def log_correction_fit(series, gamma_fixed, window=None, min_samples=4):
    """Fit amplitude t^{gamma/2} ~ (log t)^{-mu}; returns mu and its standard error."""
    t, a = _split_series(series)
    if window is not None:
        t, a = _select(t, a, window, min_samples)
    if t.size < min_samples:
        raise DegenerateSeries(f"need at least {min_samples} samples")
    if np.any(a <= 0) or np.any(t <= 1):
        raise DegenerateSeries("need t > 1 and positive amplitudes")
    x = np.log(np.log(t))
    y = np.log(a) + 0.5 * gamma_fixed * np.log(t)
    if np.ptp(x) == 0:
        raise DegenerateSeries("all samples at the same time")
    res = stats.linregress(x, y)
    return LogCorrection(float(-res.slope), float(res.stderr), (float(t[0]), float(t[-1])))
