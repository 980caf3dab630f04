"""Algebraic parameter constraints for the closed-form solutions.

Each family maps a parameter dict (``a, b, c, beta, k`` and ``R`` for the
box) to a list of polynomial residuals; all residuals vanish exactly when the
corresponding quasi-exact solution exists.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import mpmath
from mpmath import mpf

from .errors import NoRootsInRange, NonPolynomialConstraint, NotInCatalog
from .precision import to_mpf
from .roots import real_roots


@dataclass(frozen=True)
class Family:
    name: str
    fn: Callable
    names: tuple
    doc: str = ""


def _soft1(a, b, c, beta, k, **_):
    return [
        4 * a * b**2 + beta * (c**2 * (k + 1) - 8 * b**3),
        2 * a * b * c + c**2 * (k + 1) - 8 * b**3,
    ]


def _soft2(a, b, c, beta, k, **_):
    tail = beta * c * (c**2 * (1 + k) * (3 + k) - 16 * b**3 * (3 + 2 * k))
    return [
        4 * a * b**2 * (-4 * b * k + 3 * beta * c * (1 + k)) + beta * tail,
        8 * a**2 * b**3 + 2 * a * b * (-16 * b**3 * beta + beta * c**2 * (1 + k) + 2 * b * c * (3 + k)) + tail,
    ]


def _soft3(a, b, c, beta, k, **_):
    big = (576 * b**6 + c**4 * (3 + k) * (5 + k)) * (1 + k) - 16 * b**3 * c**2 * (24 + 5 * k * (5 + k))
    first = (
        48 * a**2 * b**4 * beta * (1 + k)
        - 8 * a * b**2 * (48 * b**3 * beta**2 * (1 + k) - 12 * b**2 * k * (1 + k) + 8 * b * beta * c * k * (2 + k) - 3 * beta**2 * c**2 * (1 + k) * (3 + k))
        + beta**3 * big
    )
    second = (
        8 * a**2 * b**3 * (-4 * b * k + 3 * beta * c * (1 + k))
        + 2 * a * b * (
            (beta**2 * c**3 * (3 + k) - 48 * b**4 * beta) * (1 + k)
            - 8 * b**2 * c * k * (5 + k)
            + 6 * b * beta * c**2 * (1 + k) * (5 + k)
            - 8 * b**3 * beta**2 * c * (9 + 7 * k)
        )
        + beta**2 * big
    )
    return [first, second]


def _root_eq(b, c, beta, k, **_):
    return [
        -16 * b**3 * k
        + 4 * b**2 * beta * c * (3 + 5 * k)
        + b * beta**2 * (32 * b**3 - 8 * c**2 * (1 + k))
        + c * beta**3 * (c**2 * (1 + k) - 8 * b**3)
    ]


def root_eq_a(b, c, beta, k):
    """Softcore strength that pairs with the ``root_eq`` family (second-degree solution)."""
    return 4 * b * beta - beta * c**2 / (4 * b**2) + (c / b - 2 / beta - beta * c**2 / (4 * b**2)) * k


def _case1(a, b, c, k, **_):
    return [2 * a * b + (k - 1) * c]


def _case2(a, b, c, k, **_):
    return [8 * b**3 * (1 - k) + 4 * b**2 * a**2 + 4 * k * c * b * a + c**2 * (k**2 - 1)]


def _case3(a, b, c, k, **_):
    return [
        32 * a * (1 - 2 * k) * b**4
        + 8 * (a**3 - 2 * c * (k - 1) * (3 + 2 * k)) * b**3
        + 12 * a**2 * c * (1 + k) * b**2
        - 2 * a * c**2 * (1 - 3 * k * (2 + k)) * b
        + c**3 * (k**2 - 1) * (k + 3)
    ]


def _box1(a, b, c, beta, k, R, **_):
    return [
        4 * a * b**2 + 2 * b * c * (3 + k) + (2 * a * b * c + c**2 * (3 + k)) * R + 4 * b**2 * c * R**2,
        2 * b * (beta * c * (3 + k) - 4 * b * k)
        + c * (beta * c * (3 + k) - 4 * b * k) * R
        + (16 * b**3 - 2 * a * b * c + 4 * b**2 * beta * c - c**2 * (1 + k)) * R**2,
        8 * b**2 * beta * k + 4 * b * beta * c * k * R + (4 * a * b**2 + beta * (c**2 * (1 + k) - 16 * b**3)) * R**2,
    ]


FAMILIES = {
    "soft1": Family("soft1", _soft1, ("soft1.a", "soft1.b"), "first-degree soft solution 1 + c r/(2b)"),
    "soft2": Family("soft2", _soft2, ("soft2.a", "soft2.b"), "second-degree soft solution"),
    "soft3": Family("soft3", _soft3, ("soft3.a", "soft3.b"), "third-degree soft solution"),
    "root_eq": Family("root_eq", _root_eq, ("root_eq",), "beta relation of the second-degree solution with a = root_eq_a"),
    "case1": Family("case1", _case1, ("case1",), "beta = 0, f = 1"),
    "case2": Family("case2", _case2, ("case2",), "beta = 0, first degree"),
    "case3": Family("case3", _case3, ("case3",), "beta = 0, second degree"),
    "box1": Family("box1", _box1, ("box1.a", "box1.b", "box1.c"), "box, f = 1 + (c/(2b) + 1/R) r"),
}
PARAMETERS = ("a", "b", "c", "beta", "k", "R")


def get_family(name: str) -> Family:
    try:
        return FAMILIES[name]
    except KeyError:
        raise NotInCatalog(f"unknown constraint family {name!r}") from None


def _normalise(params: dict) -> dict:
    p = dict(params)
    if "k" not in p and "d" in p:
        p["k"] = p.pop("d") + 2 * p.pop("ell", 0)
    p.pop("d", None)
    p.pop("ell", None)
    p.setdefault("beta", 0)
    p.setdefault("R", None)
    return p


def evaluate(name: str, params: dict) -> list:
    return get_family(name).fn(**_normalise(params))


MAX_FREE_DEGREE = 8


def _exact(x) -> bool:
    return isinstance(x, (int, Fraction))


def _interpolate(ys, xs):
    """Monomial coefficients of the interpolating polynomial (Newton form, expanded)."""
    n = len(xs)
    coef = list(ys)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j])
    poly = [coef[-1]]
    for i in range(n - 2, -1, -1):
        # poly = poly * (x - xs[i]) + coef[i]
        shifted = [0] + poly
        for j in range(len(poly)):
            shifted[j] = shifted[j] - xs[i] * poly[j]
        shifted[0] = shifted[0] + coef[i]
        poly = shifted
    return poly


def constraint_polynomial(family, fixed: dict, free: str, equation: int = 0) -> list:
    """Coefficients (lowest first) of one constraint as a polynomial in ``free``."""
    fam = get_family(family)
    fixed = _normalise({**fixed, free: 0})
    exact = all(_exact(v) for k, v in fixed.items() if k != free and v is not None)
    xs = [Fraction(i) if exact else mpf(i) for i in range(1, MAX_FREE_DEGREE + 4)]
    ys = []
    for x in xs:
        vals = fam.fn(**{**fixed, free: x})
        ys.append(vals[equation])
    fit_x, fit_y = xs[: MAX_FREE_DEGREE + 1], ys[: MAX_FREE_DEGREE + 1]
    poly = _interpolate(fit_y, fit_x)
    scale = max(abs(v) for v in poly) or 1
    cut = 0 if exact else scale * mpf(10) ** (-mpmath.mp.dps + 10)
    poly = [v if abs(v) > cut else v * 0 for v in poly]
    while len(poly) > 1 and poly[-1] == 0:
        poly.pop()
    for x, y in zip(xs[MAX_FREE_DEGREE + 1 :], ys[MAX_FREE_DEGREE + 1 :]):
        val = 0
        for c in reversed(poly):
            val = val * x + c
        if abs(val - y) > (0 if exact else cut * abs(x) ** len(poly) + cut):
            raise NonPolynomialConstraint(f"{fam.name}[{equation}] is not a polynomial of degree <= {MAX_FREE_DEGREE} in {free}")
    return poly


def _rationalise(x, polys, max_den=10**6):
    # exact coefficients: return a rational root when one sits at x
    q = Fraction(mpmath.nstr(x, mpmath.mp.dps)).limit_denominator(max_den)
    if all(sum(c * q**i for i, c in enumerate(p)) == 0 for p in polys):
        return q
    return x


def solve_family(family, fixed: dict, free: str, interval, *, equation=None, tol=None) -> list:
    """Real roots of the constraint(s) in the free parameter within ``interval``.

    With ``equation=None`` the roots of the first non-constant equation are
    kept only if every equation of the family vanishes there (to ``tol``
    relative to the size of its terms).  An explicit index solves that
    equation alone.
    """
    fam = get_family(family)
    if free not in PARAMETERS:
        raise ValueError(f"unknown parameter {free!r}")
    lo, hi = (to_mpf(x) for x in interval)
    count = len(fam.fn(**_normalise({**fixed, free: Fraction(1) if all(_exact(v) for v in fixed.values()) else mpf(1)})))
    indices = range(count) if equation is None else [equation]
    polys = [constraint_polynomial(fam.name, fixed, free, i) for i in indices]
    active = [p for p in polys if len(p) > 1]
    if not active:
        raise NoRootsInRange(f"{fam.name} does not depend on {free}")
    primary = min(active, key=len)
    tol = mpf(10) ** (-mpmath.mp.dps + 15) if tol is None else to_mpf(tol)
    roots = []
    for x in real_roots([to_mpf(c) for c in primary], (lo, hi)):
        ok = True
        for p in polys:
            val = sum(to_mpf(c) * x**i for i, c in enumerate(p))
            size = sum(abs(to_mpf(c)) * abs(x) ** i for i, c in enumerate(p)) or 1
            if abs(val) > tol * size:
                ok = False
        if ok:
            roots.append(_rationalise(x, polys) if all(_exact(c) for p in polys for c in p) else x)
    if not roots:
        raise NoRootsInRange(f"{fam.name} has no real root in {free} on [{lo}, {hi}]")
    return roots
