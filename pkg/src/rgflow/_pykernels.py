"""Pure numpy/scipy implementations of the hot kernels.

Signatures mirror :mod:`rgflow._ckernels`; :mod:`rgflow.kernels` picks one.
"""

import numpy as np
from scipy.linalg import solve_banded

BACKEND = "python"


def series_eval(u, degrees, coeffs):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    for j, a in zip(degrees, coeffs):
        if float(j).is_integer():
            out += a * u ** int(j)
        else:
            out += a * np.sign(u) * np.abs(u) ** float(j)
    return out


def weighted_sup(w, c, d, q):
    """max_k (1 + |w_k|^q)(|c_k| + |d_k|) and the index attaining it.

    Ties resolve to the smallest |w_k|, then the lowest index.
    """
    aw = np.abs(w)
    vals = (1.0 + aw ** q) * (np.abs(c) + np.abs(d))
    best = vals.max()
    cand = np.flatnonzero(vals == best)
    k = cand[np.argmin(aw[cand])]
    return float(best), int(k)


def cn_imex_run(u0, dx, times, c_mid, g_start, g_mid, degrees, coeffs, guard):
    """Crank-Nicolson diffusion with an explicit-midpoint reaction term.

    Node 0 and the (implicit) node N carry homogeneous Dirichlet data.
    ``g_start[k]``/``g_mid[k]`` are lambda d(t) at t_k and t_{k+1/2}.
    Returns ``(u, k_fail)`` with ``k_fail = -1`` on success, else the step at
    which sup|u| reached ``guard``.
    """
    u = np.array(u0, dtype=float)
    u[0] = 0.0
    n = u.size - 1  # interior unknowns u[1:]
    ab = np.empty((3, n))
    for k in range(len(times) - 1):
        h = times[k + 1] - times[k]
        if np.abs(u).max() >= guard:
            return u, k
        v = u[1:]
        lap = np.empty(n)
        lap[1:-1] = v[:-2] - 2 * v[1:-1] + v[2:]
        lap[0] = -2 * v[0] + v[1]
        lap[-1] = v[-2] - 2 * v[-1]
        lap /= dx * dx
        half = v + 0.5 * h * (c_mid[k] * lap + g_start[k] * series_eval(v, degrees, coeffs))
        if np.abs(half).max() >= guard:
            return u, k
        mu = c_mid[k] * h / (2 * dx * dx)
        rhs = v + mu * dx * dx * lap + h * g_mid[k] * series_eval(half, degrees, coeffs)
        ab[0, :] = -mu
        ab[1, :] = 1 + 2 * mu
        ab[2, :] = -mu
        u[1:] = solve_banded((1, 1), ab, rhs, overwrite_b=True, check_finite=False)
    if np.abs(u).max() >= guard:
        return u, len(times) - 1
    return u, -1
