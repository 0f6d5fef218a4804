"""Explicit constants of the existence / RG contraction argument and a basin verdict.

All suprema over w are found by a coarse scan followed by golden-section
refinement around the best scan point.  Nothing here is interval-rigorous;
values are float evaluations of closed forms.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import InvalidDelta, RadiusExceeded
from .problem import PurePower, r_of, s_of, spec_to_dict
from .spectral import Grid, bq_norm, sample, fixed_point, to_spectrum


def _line_integral(q):
    """int_R dx / (1 + |x|^q) = 2 pi / (q sin(pi / q))."""
    if not q > 1 + 1e-9:
        raise ValueError(f"q must exceed 1, got {q}")
    return 2.0 * math.pi / (q * math.sin(math.pi / q))


def const_C(q):
    """C(q) = (2^{q+1} + 3) int dx / (1 + |x|^q); 11 pi for q = 2."""
    return (2.0 ** (q + 1) + 3.0) * _line_integral(q)


def const_Cq_embed(q):
    """C_q with sup|h| <= C_q ||h||: (1/2pi) int dw / (1 + |w|^q)."""
    return _line_integral(q) / (2.0 * math.pi)


def rho0(spec, override=None):
    """Working radius pi rho / C(q); 1 for entire F (declared convention)."""
    if override is not None:
        return float(override)
    rho = spec.nonlinearity.radius
    if math.isinf(rho):
        return 1.0
    return math.pi * rho / const_C(spec.q)


def rho_guard_default(spec):
    rho = spec.nonlinearity.radius
    return 1.0 if math.isinf(rho) else 0.5 * rho0(spec)


def series_sums(nonlinearity, z, q=2.0):
    """(S0, S1, S2) at z: sums of (C/2pi)^{j-1} |a_j| z^j, z^{j-2} and j z^{j-2}."""
    C = const_C(q)
    rho = nonlinearity.radius
    if not math.isinf(rho) and not z < 2.0 * math.pi * rho / C:
        raise RadiusExceeded(f"z = {z} is outside the convergence region (< {2 * math.pi * rho / C})")
    k = C / (2.0 * math.pi)
    S0 = S1 = S2 = 0.0
    for j, a in nonlinearity.coefficients:
        j = float(j)
        base = k ** (j - 1.0) * abs(a)
        S0 += base * z ** j
        S1 += base * z ** (j - 2.0)
        S2 += j * base * z ** (j - 2.0)
    return S0, S1, S2


def _s2(spec, r0):
    return series_sums(spec.nonlinearity, r0, spec.q)[2]


def C_n(spec, L, n, rho0_value=None):
    """8 (sqrt(s_n(L)) + 1)^3 (L - 1) S2(rho0)."""
    r0 = rho0(spec, rho0_value)
    sn = s_of(spec.diffusion.rescaled(n, L), float(L))
    return 8.0 * (math.sqrt(sn) + 1.0) ** 3 * (L - 1.0) * _s2(spec, r0)


def _eps_from(Cn, sn, spec, r0):
    return min(1.0 / (2.0 * Cn), r0 / (2.0 * const_Cq_embed(spec.q) * (1.0 + math.sqrt(sn))))


def eps_local(spec, L, rho0_value=None):
    """Smallness threshold for the single window [1, L]."""
    return eps_n(spec, L, 0, rho0_value)


def eps_n(spec, L, n, rho0_value=None):
    r0 = rho0(spec, rho0_value)
    sn = s_of(spec.diffusion.rescaled(n, L), float(L))
    return _eps_from(C_n(spec, L, n, r0), sn, spec, r0)


def _sup(fun, hi, n_scan=10_000):
    """max of fun on [0, hi]: scan then golden-section refinement."""
    w = np.linspace(0.0, hi, n_scan + 1)
    v = fun(w)
    i = int(np.argmax(v))
    best = float(v[i])
    if 0 < i < n_scan:
        res = minimize_scalar(lambda x: -float(fun(np.array([x]))[0]), bracket=(w[i - 1], w[i], w[i + 1]),
                              method="golden", tol=1e-12)
        if -res.fun > best and w[i - 1] <= res.x <= w[i + 1]:
            best = float(-res.fun)
    return best


def _L0(p, diffusion):
    """Beyond L0, |r_n(L)| / L^{p+1} < 1/(2(p+1)) for every n."""
    if diffusion is None or isinstance(diffusion, PurePower):
        return 1.0
    p1 = float(p) + 1.0
    thr = 1.0 / (2.0 * p1)
    # r_n(L) = L^{-n(p+1)} (r(L^{n+1}) - r(L^n)); for the perturbed family the
    # worst n is 0 whenever beta > 0, so the condition is |r(L)| / L^{p+1} < thr
    phi = lambda L: abs(r_of(diffusion, L)) / L ** p1 - thr
    grid = np.geomspace(1.0 + 1e-9, 1e8, 4000)
    vals = np.array([phi(L) for L in grid])
    bad = np.flatnonzero(vals >= 0)
    if bad.size == 0:
        return 1.0
    i = bad[-1]
    if i + 1 >= grid.size:
        return math.inf
    return float(brentq(phi, grid[i], grid[i + 1], xtol=1e-14, rtol=1e-14))


def contraction_const(p, q, diffusion=None):
    """(C, L1) of the linear contraction estimate ||R0 g|| <= C L^{-(p+1)/2} ||g||."""
    p1 = float(p) + 1.0
    fun = lambda w: (1.0 + w + 3.0 * w * w / p1) * (1.0 + w ** q) * np.exp(-w * w / (6.0 * p1))
    C = _sup(fun, 20.0 * math.sqrt(p1))
    L1 = max(_L0(p, diffusion), 3.0 ** (1.0 / p1))
    return C, L1


def n0_for(diffusion, L, p=None, n_max=64):
    """Smallest n0 with |r(L^n) L^{-n(p+1)}| < 1/(2(p+1)) for all n0 <= n <= n_max."""
    if isinstance(diffusion, PurePower):
        return 0
    p1 = float(diffusion.p if p is None else p) + 1.0
    ok = [abs(r_of(diffusion, float(L) ** n)) / float(L) ** (n * p1) < 1.0 / (2.0 * p1) for n in range(n_max + 1)]
    n0 = n_max + 1
    for n in range(n_max, -1, -1):
        if not ok[n]:
            break
        n0 = n
    return n0


def rate_const_M(p, q):
    """(M, n0_for) for the asymptotic fixed-point rate ||R0_{L^n} f* - f*|| <= M |r(L^n)| L^{-n(p+1)}."""
    p1 = float(p) + 1.0
    fun = lambda w: (1.0 + w ** q) * np.exp(-w * w / (2.0 * p1)) * (2.0 * w + w * w + 2.0 * w ** 3 / p1)
    M = _sup(fun, 20.0 * math.sqrt(p1))
    return M, n0_for


def C_pq(p, q, grid=None):
    """Upper bound for ||f_p*||: max of the grid norm and the continuous supremum."""
    grid = grid or Grid()
    p1 = float(p) + 1.0
    fun = lambda w: (1.0 + w ** q) * (1.0 + 2.0 * w / p1) * np.exp(-w * w / p1)
    analytic = _sup(fun, 20.0 * math.sqrt(p1))
    return max(bq_norm(to_spectrum(sample(fixed_point(p), grid)), q), analytic)


def K_pq(p, q, diffusion, L, grid=None, n_min=32):
    """Bound for sup_n ||R0_{L^n} f_p*||.

    Explicit norms of the closed-form images for n <= max(n_min, n0), and
    beyond n0 the envelope (1+|w|^q)(1 + 3|w|/(p+1)) exp(-w^2/(2(p+1))), valid
    since then 1/(2(p+1)) < b_n < 3/(2(p+1)).
    """
    from .rg import fixed_point_image_spectrum

    grid = grid or Grid()
    p1 = float(p) + 1.0
    n_top = max(n_min, n0_for(diffusion, L, p))
    sampled = max(bq_norm(fixed_point_image_spectrum(p, diffusion, L, n, grid), q) for n in range(n_top + 1))
    fun = lambda w: (1.0 + w ** q) * (1.0 + 3.0 * w / p1) * np.exp(-w * w / (2.0 * p1))
    return max(sampled, _sup(fun, 20.0 * math.sqrt(p1)))


def K_const(spec, L, Kpq, rho0_value=None):
    p1 = float(spec.p) + 1.0
    r0 = rho0(spec, rho0_value)
    return (8.0 * (L - 1.0) * (math.sqrt(3.0 * L ** p1 / (2.0 * p1)) + 1.0) ** 3
            * (L ** (p1 * spec.q / 2.0) + Kpq) * _s2(spec, r0))


def sigma(spec, L, rho0_value=None, K=None, grid=None):
    p1 = float(spec.p) + 1.0
    r0 = rho0(spec, rho0_value)
    if K is None:
        K = K_const(spec, L, K_pq(spec.p, spec.q, spec.diffusion, L, grid), r0)
    bound = r0 / (2.0 * const_Cq_embed(spec.q) * (1.0 + math.sqrt(3.0 * L ** p1 / (2.0 * p1))))
    return min(1.0 / (2.0 * K), bound)


def delta_interval(spec):
    """Open interval of admissible delta: delta in (0,1) and delta - 1 > 2e."""
    lo = max(0.0, 1.0 + 2.0 * spec.coupling_exponent)
    return lo, 1.0


def default_delta(spec):
    lo, hi = delta_interval(spec)
    if lo >= hi:
        raise InvalidDelta("no admissible delta: the nonlinearity is not supercritical")
    return min(0.5, 0.5 * (lo + hi))


def check_delta(spec, delta):
    lo, hi = delta_interval(spec)
    if not (0 < delta < 1):
        raise InvalidDelta(f"delta = {delta} is not in (0, 1)")
    if not delta - 1 > 2.0 * spec.coupling_exponent:
        raise InvalidDelta(f"delta = {delta} violates delta - 1 > {2.0 * spec.coupling_exponent}")


def G_sequence(spec, L, delta, fnorm, Kpq, rho0_value=None, n_max=64):
    """G_1..G_{n_max} from their recursive definition (bounds ||f_n|| <= G_n ||f||)."""
    r0 = rho0(spec, rho0_value)
    Cs = [C_n(spec, L, j, r0) for j in range(n_max + 1)]
    e = spec.coupling_exponent
    x = L ** ((delta - 1.0) / 2.0)
    G = [x + Kpq * (1.0 + Cs[0] * fnorm)]
    acc = 0.0
    for n in range(1, n_max):
        if not G[-1] < 1e100:
            # far outside the basin; the sequence has blown up
            G.extend([math.inf] * (n_max - n))
            break
        acc += Cs[n] * G[n - 1] ** 2 * L ** (n * e) * fnorm
        G.append(x ** (n + 1) + Kpq * (1.0 + Cs[0] * fnorm + acc))
    return G


@dataclass
class CertificateBundle:
    q: float
    p: float
    L: float
    delta: float
    C_of_q: float
    C_q_embed: float
    rho0: float
    S0: float
    S1: float
    S2: float
    C0: float
    eps_local: float
    eps_n: list
    sigma: float
    K: float
    C_pq: float
    K_pq: float
    contraction_C: float
    L1: float
    M: float
    n0: int
    L_delta: float
    G: float
    eps_bar: float
    f_norm: float
    basin_ok: bool
    G_n: list = field(default_factory=list)
    inequalities: list = field(default_factory=list)

    def failed(self):
        return [i["name"] for i in self.inequalities if not i["holds"]]

    def to_dict(self):
        return asdict(self)

    def to_json(self, path=None):
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True, default=float)
        if path:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    def pretty(self):
        lines = []
        for k, v in self.to_dict().items():
            if k in ("eps_n", "G_n", "inequalities"):
                continue
            lines.append(f"{k:>14s} = {v}")
        lines.append(f"{'eps_n[0..]':>14s} = {self.eps_n[:4]} ... (min {min(self.eps_n):.6g})")
        lines.append("inequalities:")
        for i in self.inequalities:
            mark = "ok  " if i["holds"] else "FAIL"
            lines.append(f"  [{mark}] {i['name']}: {i['lhs']:.6g} vs {i['rhs']:.6g}")
        return "\n".join(lines)


def basin_check(f, spec, L, delta=None, rho0_value=None, grid=None, n_eps=32, n_G=64):
    """Evaluate the full constant chain for data f and step L."""
    if delta is None:
        delta = default_delta(spec)
    check_delta(spec, delta)
    grid = grid or f.grid
    p, q, L = spec.p, spec.q, float(L)
    p1 = float(p) + 1.0
    r0 = rho0(spec, rho0_value)
    S0, S1, S2 = series_sums(spec.nonlinearity, r0, q)
    C0 = C_n(spec, L, 0, r0)
    eps_list = [eps_n(spec, L, n, r0) for n in range(n_eps + 1)]
    Cc, L1 = contraction_const(p, q, spec.diffusion)
    M, _ = rate_const_M(p, q)
    n0 = n0_for(spec.diffusion, L)
    cpq = C_pq(p, q, grid)
    kpq = K_pq(p, q, spec.diffusion, L, grid)
    K = K_const(spec, L, kpq, r0)
    sig = sigma(spec, L, r0, K)
    L_delta = max(L1, (2.0 * Cc * (1.0 + cpq)) ** (2.0 / (float(p) + delta)))
    x = L ** ((delta - 1.0) / 2.0)
    G = 1.0 + kpq / (1.0 - x) if x < 1 else math.inf
    eps_bar = min(sig / G, 1.0 / (2.0 * K * G * G * L ** ((1.0 - delta) / 2.0)))
    fnorm = bq_norm(to_spectrum(f), q)
    Gn = G_sequence(spec, L, delta, fnorm, kpq, r0, n_G)

    ineq = []

    def add(name, lhs, rhs, holds):
        ineq.append({"name": name, "lhs": float(lhs), "rhs": float(rhs), "holds": bool(holds)})

    add("L > L1", L, L1, L > L1)
    add("L > L_delta", L, L_delta, L > L_delta)
    add("||f|| < eps_bar", fnorm, eps_bar, fnorm < eps_bar)
    add("K G^2 ||f|| < 1/(2 L^((1-delta)/2))", K * G * G * fnorm, 0.5 / L ** ((1 - delta) / 2), K * G * G * fnorm < 0.5 / L ** ((1 - delta) / 2))
    add("eps_bar <= sigma", eps_bar, sig, eps_bar <= sig)
    add("sigma <= min eps_n", sig, min(eps_list), sig <= min(eps_list))
    add("max G_n < G", max(Gn), G, max(Gn) < G)
    basin_ok = (L > L_delta) and (fnorm < eps_bar)
    return CertificateBundle(float(q), float(p), L, float(delta), const_C(q), const_Cq_embed(q), r0, S0, S1, S2, C0,
                             eps_list[0], eps_list, sig, K, cpq, kpq, Cc, L1, M, n0, L_delta, G, eps_bar, fnorm,
                             bool(basin_ok), Gn, ineq)
