"""Problem data for u_t = c(t) u_xx + lambda d(t) F(u), u(x, 1) = f(x).

The diffusion coefficient is ``c(t) = t**p`` or ``t**p (1 + a t**-beta)``, the
nonlinearity a finite series ``F(u) = sum_j a_j u**j`` and the optional
reaction factor ``d(t) = t**r``.  Everything here is an immutable value type.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from numbers import Rational
from typing import Union

import numpy as np

from .errors import InvalidHypothesis

Number = Union[int, float, Fraction]

CRITICAL_TOL = 1e-12


def _log1p_power(t, k):
    """(t**k - 1)/k, accurate near t = 1 and k = 0 (limit ln t)."""
    lt = np.log(t)
    if k == 0:
        return lt
    return np.expm1(float(k) * lt) / float(k)


@dataclass(frozen=True)
class PurePower:
    """c(t) = t**p."""

    p: Number

    form = "pure_power"

    def c(self, t):
        return np.power(t, float(self.p))

    def s(self, t):
        return _log1p_power(np.asarray(t, dtype=float), float(self.p) + 1.0)

    def r(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))

    def rescaled(self, n, L):
        return self

    def params(self):
        return {}


@dataclass(frozen=True)
class PerturbedPower:
    """c(t) = t**p (1 + a t**-beta) with beta > 0."""

    p: Number
    a: float
    beta: float

    form = "perturbed_power"

    def c(self, t):
        t = np.asarray(t, dtype=float)
        return t ** float(self.p) * (1.0 + self.a * t ** -float(self.beta))

    def r(self, t):
        # s(t) - (t^{p+1}-1)/(p+1) = a * int_1^t v^{p-beta} dv
        k = float(self.p) + 1.0 - float(self.beta)
        return self.a * _log1p_power(np.asarray(t, dtype=float), k)

    def s(self, t):
        t = np.asarray(t, dtype=float)
        return _log1p_power(t, float(self.p) + 1.0) + self.r(t)

    def rescaled(self, n, L):
        # L^{-np} c(L^n t) = t^p (1 + a L^{-n beta} t^{-beta})
        return PerturbedPower(self.p, self.a * float(L) ** (-n * float(self.beta)), self.beta)

    def params(self):
        return {"a": self.a, "beta": self.beta}


Diffusion = Union[PurePower, PerturbedPower]


def s_of(diffusion, t):
    """Accumulated diffusion time s(t) = int_1^t c(v) dv (closed form)."""
    out = diffusion.s(t)
    return float(out) if np.ndim(out) == 0 else out


def r_of(diffusion, t):
    """Deviation r(t) = s(t) - (t^{p+1} - 1)/(p+1); identically zero for pure powers."""
    out = diffusion.r(t)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class NonlinearitySeries:
    """F(u) = sum a_j u**j over ``coefficients`` = ((j, a_j), ...).

    ``min_degree`` is the exponent alpha; it defaults to the lowest listed
    degree.  ``radius`` is the analyticity radius rho (``math.inf`` for entire
    F).  Non-integer degrees are evaluated as the odd extension
    sign(u)|u|**j.
    """

    coefficients: tuple
    radius: float = math.inf
    min_degree: Number = None

    def __post_init__(self):
        coeffs = tuple((d, float(a)) for d, a in self.coefficients)
        if not coeffs:
            raise InvalidHypothesis("H3", "nonlinearity needs at least one term", "coefficients")
        object.__setattr__(self, "coefficients", coeffs)
        if self.min_degree is None:
            object.__setattr__(self, "min_degree", min(d for d, _ in coeffs))
        if any(d < self.min_degree for d, _ in coeffs):
            raise InvalidHypothesis("H3", "a listed degree is below min_degree", "coefficients")
        if not self.radius > 0:
            raise InvalidHypothesis("H3", "analyticity radius must be positive", "radius")

    @property
    def degrees(self):
        return tuple(d for d, _ in self.coefficients)

    def __call__(self, u):
        from .kernels import series_eval

        return series_eval(np.asarray(u, dtype=float), self.degrees, [a for _, a in self.coefficients])


@dataclass(frozen=True)
class ProblemSpec:
    diffusion: Diffusion
    nonlinearity: NonlinearitySeries
    lam: float
    q: float = 2.0
    r: Number = 0
    exploratory: bool = False

    @property
    def p(self):
        return self.diffusion.p

    @property
    def alpha(self):
        return self.nonlinearity.min_degree

    def d(self, t):
        """Reaction factor d(t) = t**r."""
        return 1.0 if self.r == 0 else float(t) ** float(self.r)

    @property
    def coupling_exponent(self):
        """Exponent e with lambda_n = L**(n e) lambda."""
        p, r, a = float(self.p), float(self.r), float(self.alpha)
        return (p + 3.0 + 2.0 * r - a * (p + 1.0)) / 2.0


def make_problem(diffusion, nonlinearity, lam, q=2.0, r=0, exploratory=False):
    """Validate the hypotheses and return a :class:`ProblemSpec`.

    ``exploratory=True`` relaxes p > 0 to p >= 0 and admits non-integer
    degrees, for the subcritical and critical experiments that sit outside
    the certified regime.
    """
    p = diffusion.p
    if not q > 1:
        raise InvalidHypothesis("H1", f"q must exceed 1, got {q}", "q")
    if exploratory:
        if not p >= 0:
            raise InvalidHypothesis("H2", f"p must be non-negative, got {p}", "p")
    elif not p > 0:
        raise InvalidHypothesis("H2", f"p must be positive, got {p}", "p")
    if isinstance(diffusion, PerturbedPower):
        if not diffusion.beta > 0:
            raise InvalidHypothesis("H2", "beta must be positive so that c(t) = t^p + o(t^p)", "c_params.beta")
        if not diffusion.a > -1:
            raise InvalidHypothesis("H2", "c(t) must stay positive for t > 1 (need a > -1)", "c_params.a")
    if not abs(lam) <= 1:
        raise InvalidHypothesis("lambda-range", f"|lambda| <= 1 required, got {lam}", "lambda")
    if not nonlinearity.min_degree > 1:
        raise InvalidHypothesis("H3", "F must be superlinear (alpha > 1)", "coefficients")
    if not exploratory:
        for d in nonlinearity.degrees:
            if d != int(d) or d < 2:
                raise InvalidHypothesis("H3", f"degree {d} is not an integer >= 2", "coefficients")
    return ProblemSpec(diffusion, nonlinearity, float(lam), float(q), r, exploratory)


@dataclass(frozen=True)
class CriticalityClass:
    tag: str  # "Supercritical" | "Critical" | "Subcritical"
    alpha_critical: Number


def _exact(x):
    return isinstance(x, Rational)


def classify_criticality(spec):
    """Compare alpha with the critical exponent (p + 3 + 2r)/(p + 1)."""
    p, r, a = spec.p, spec.r, spec.alpha
    if _exact(p) and _exact(r) and _exact(a):
        ac = Fraction(p + 3 + 2 * r) / Fraction(p + 1)
        cmp = (a > ac) - (a < ac)
    else:
        ac = (float(p) + 3 + 2 * float(r)) / (float(p) + 1)
        diff = float(a) - ac
        cmp = 0 if abs(diff) <= CRITICAL_TOL * max(1.0, abs(ac)) else (1 if diff > 0 else -1)
    tag = {1: "Supercritical", 0: "Critical", -1: "Subcritical"}[cmp]
    return CriticalityClass(tag, ac)


def rescale_coefficients(spec, n, L):
    """Coefficients of the n-th renormalized problem.

    c_n(t) = L^{-np} c(L^n t), lambda_n = L^{n e} lambda and
    a_j -> L^{n (alpha - j)(p + 1)/2} a_j, so that lambda_n F_n reproduces the
    parabolically rescaled nonlinear term.  The analyticity radius of F_n
    grows by L^{n (p + 1)/2}.
    """
    if n == 0:
        return spec
    L = float(L)
    p1 = float(spec.p) + 1.0
    alpha = float(spec.alpha)
    nl = spec.nonlinearity
    coeffs = tuple((d, a * L ** (n * (alpha - float(d)) * p1 / 2.0)) for d, a in nl.coefficients)
    radius = nl.radius * L ** (n * p1 / 2.0)
    return replace(
        spec,
        diffusion=spec.diffusion.rescaled(n, L),
        nonlinearity=NonlinearitySeries(coeffs, radius, nl.min_degree),
        lam=spec.lam * L ** (n * spec.coupling_exponent),
    )


# -- JSON form ---------------------------------------------------------------

SPEC_KEYS = {"p", "c_form", "c_params", "lambda", "q", "r", "coefficients", "radius", "min_degree", "exploratory"}


def spec_to_dict(spec):
    nl = spec.nonlinearity
    return {
        "p": spec.p,
        "c_form": spec.diffusion.form,
        "c_params": spec.diffusion.params(),
        "lambda": spec.lam,
        "q": spec.q,
        "r": spec.r,
        "coefficients": [[d, a] for d, a in nl.coefficients],
        "radius": None if math.isinf(nl.radius) else nl.radius,
        "min_degree": nl.min_degree,
        "exploratory": spec.exploratory,
    }


def _num(x):
    if isinstance(x, float) and x.is_integer():
        return int(x)
    return x


def spec_from_dict(d):
    """Inverse of :func:`spec_to_dict`; validates via :func:`make_problem`."""
    unknown = set(d) - SPEC_KEYS
    if unknown:
        from .errors import ValidationError

        raise ValidationError(f"spec.{sorted(unknown)[0]}", "unknown field")
    p = _num(d["p"])
    form = d.get("c_form", "pure_power")
    params = d.get("c_params") or {}
    if form == "pure_power":
        diffusion = PurePower(p)
    elif form == "perturbed_power":
        diffusion = PerturbedPower(p, float(params["a"]), float(params["beta"]))
    else:
        from .errors import ValidationError

        raise ValidationError("spec.c_form", f"unknown diffusion form {form!r}")
    radius = d.get("radius")
    coeffs = tuple((_num(j), float(a)) for j, a in d["coefficients"])
    md = d.get("min_degree")
    nl = NonlinearitySeries(coeffs, math.inf if radius is None else float(radius), None if md is None else _num(md))
    return make_problem(diffusion, nl, d["lambda"], d.get("q", 2.0), _num(d.get("r", 0)), bool(d.get("exploratory", False)))
