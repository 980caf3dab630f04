"""Dense polynomials and truncated Taylor series.

Polynomials are plain sequences of coefficients, lowest degree first.  The
helpers are agnostic to the scalar type, so the same code runs on ``mpf``,
``Fraction`` or ``int`` inputs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath

from .errors import CenterMismatch, OrderExhausted, PoleAtCenter


def _zero_like(seq):
    for x in seq:
        return x * 0
    return 0


def poly_trim(p: Sequence) -> list:
    p = list(p)
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def poly_degree(p: Sequence) -> int:
    """Degree of ``p``; the zero polynomial has degree -1."""
    p = poly_trim(p)
    if len(p) == 1 and p[0] == 0:
        return -1
    return len(p) - 1


def poly_eval(p: Sequence, x):
    acc = _zero_like(p)
    for coeff in reversed(p):
        acc = acc * x + coeff
    return acc


def poly_add(p: Sequence, q: Sequence) -> list:
    n = max(len(p), len(q))
    zero = _zero_like(p) if p else _zero_like(q)
    return [(p[i] if i < len(p) else zero) + (q[i] if i < len(q) else zero) for i in range(n)]


def poly_scale(p: Sequence, s) -> list:
    return [s * x for x in p]


def poly_sub(p: Sequence, q: Sequence) -> list:
    return poly_add(p, poly_scale(q, -1))


def poly_mul(p: Sequence, q: Sequence) -> list:
    if not p or not q:
        return []
    out = [_zero_like(p) * _zero_like(q)] * (len(p) + len(q) - 1)
    for i, x in enumerate(p):
        if x == 0:
            continue
        for j, y in enumerate(q):
            out[i + j] = out[i + j] + x * y
    return out


def poly_deriv(p: Sequence) -> list:
    if len(p) <= 1:
        return [_zero_like(p)]
    return [i * p[i] for i in range(1, len(p))]


def poly_shift(p: Sequence, x0) -> list:
    """Coefficients of ``p(x0 + t)`` in powers of ``t`` (repeated synthetic division)."""
    c = list(p)
    n = len(c)
    for i in range(n):
        for j in range(n - 2, i - 1, -1):
            c[j] = c[j] + x0 * c[j + 1]
    return c


def poly_from_roots(roots: Sequence, lead=1) -> list:
    out = [lead]
    for r in roots:
        out = poly_mul(out, [-r, 1])
    return out


@dataclass(frozen=True)
class TaylorSeries:
    """Truncated Taylor expansion ``sum coeffs[i] (r - center)**i``, i <= order."""

    center: object
    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))
        if not self.coeffs:
            raise ValueError("a series needs at least one coefficient")

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def value(self):
        return self.coeffs[0]

    def derivative_at_center(self, n: int):
        """n-th derivative at the center, n! * coeffs[n]."""
        if n > self.order:
            raise OrderExhausted(f"derivative {n} requested from a series of order {self.order}")
        return math.factorial(n) * self.coeffs[n]

    def evaluate(self, r):
        return poly_eval(self.coeffs, r - self.center)

    def truncate(self, order: int) -> "TaylorSeries":
        if order > self.order:
            raise OrderExhausted(f"cannot extend a series of order {self.order} to {order}")
        return TaylorSeries(self.center, self.coeffs[: order + 1])

    def _check(self, other: "TaylorSeries"):
        if self.center != other.center:
            raise CenterMismatch(f"series centered at {self.center} and {other.center}")

    def __add__(self, other):
        if not isinstance(other, TaylorSeries):
            return TaylorSeries(self.center, (self.coeffs[0] + other,) + self.coeffs[1:])
        self._check(other)
        n = min(self.order, other.order) + 1
        return TaylorSeries(self.center, [x + y for x, y in zip(self.coeffs[:n], other.coeffs[:n])])

    __radd__ = __add__

    def __neg__(self):
        return TaylorSeries(self.center, [-x for x in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, TaylorSeries):
            return series_mul(self, other)
        return TaylorSeries(self.center, [x * other for x in self.coeffs])

    __rmul__ = __mul__


def series_from_poly(p: Sequence, center, order: int) -> TaylorSeries:
    shifted = poly_shift(p, center) if p else [center * 0]
    zero = center * 0
    coeffs = [shifted[i] if i < len(shifted) else zero for i in range(order + 1)]
    return TaylorSeries(center, coeffs)


def series_from_rational(numer: Sequence, denom: Sequence, center, order: int) -> TaylorSeries:
    """Taylor expansion of ``numer(r)/denom(r)`` about ``center`` through ``order``."""
    if order < 0:
        raise ValueError("order must be non-negative")
    d = poly_shift(denom, center)
    n = poly_shift(numer, center) if numer else [center * 0]
    scale = max(abs(x) for x in d)
    if scale == 0:
        raise PoleAtCenter("denominator is identically zero")
    if isinstance(d[0], mpmath.mpf) or isinstance(center, mpmath.mpf):
        tiny = scale * mpmath.mpf(10) ** (-mpmath.mp.dps)
    else:
        tiny = 0
    if abs(d[0]) <= tiny:
        raise PoleAtCenter(f"denominator vanishes at r0 = {center}")
    inv = Fraction(1, d[0]) if isinstance(d[0], int) else 1 / d[0]
    q = []
    for j in range(order + 1):
        acc = n[j] if j < len(n) else center * 0
        for i in range(1, min(j, len(d) - 1) + 1):
            acc = acc - d[i] * q[j - i]
        q.append(acc * inv)
    return TaylorSeries(center, q)


def series_mul(x: TaylorSeries, y: TaylorSeries) -> TaylorSeries:
    """Cauchy product truncated to the smaller order."""
    x._check(y)
    n = min(x.order, y.order) + 1
    a, b = x.coeffs, y.coeffs
    out = []
    for k in range(n):
        acc = a[0] * b[k]
        for i in range(1, k + 1):
            acc = acc + a[i] * b[k - i]
        out.append(acc)
    return TaylorSeries(x.center, out)


def series_diff(x: TaylorSeries) -> TaylorSeries:
    """Term-by-term derivative; the order drops by one."""
    if x.order == 0:
        raise OrderExhausted("cannot differentiate a series of order 0")
    return TaylorSeries(x.center, [(k + 1) * x.coeffs[k + 1] for k in range(x.order)])
