"""Bracketed root refinement and real-root isolation for polynomials."""
from __future__ import annotations

from typing import Callable, Sequence

import mpmath
from mpmath import mpf

from .errors import DegenerateInterval, MaxIterationsExceeded, NoSignChange
from .precision import to_mpf
from .series import poly_deriv, poly_degree, poly_eval, poly_trim


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def find_root_bracketed(
    f: Callable,
    lo,
    hi,
    tol=None,
    *,
    max_iter: int = 2000,
    initial_bisections: int = 3,
):
    """Root of ``f`` inside ``[lo, hi]`` given a sign change at the ends.

    A few bisection steps narrow the bracket, then Illinois (modified regula
    falsi) steps take over.  Whenever an Illinois step fails to halve the
    bracket a bisection step is forced, so convergence is never slower than
    bisection.  Returns the bracket end with the smaller ``|f|`` once the
    bracket is no wider than ``tol`` (or ``f`` hits zero exactly).
    """
    lo, hi = to_mpf(lo), to_mpf(hi)
    if lo > hi:
        lo, hi = hi, lo
    if tol is None:
        tol = mpf(10) ** (-mpmath.mp.dps + 5) * max(1, abs(lo), abs(hi))
    tol = to_mpf(tol)
    flo, fhi = f(lo), f(hi)
    slo, shi = _sign(flo), _sign(fhi)
    if slo == 0:
        return lo
    if shi == 0:
        return hi
    if slo == shi:
        raise NoSignChange(f"f has the same sign at {mpmath.nstr(lo, 12)} and {mpmath.nstr(hi, 12)}")

    side = 0
    width_before = hi - lo
    stalled = 0
    for it in range(max_iter):
        width = hi - lo
        if width <= tol:
            return lo if abs(flo) <= abs(fhi) else hi
        bisect = it < initial_bisections or stalled >= 2
        x = None
        if not bisect:
            denom = fhi - flo
            if denom != 0:
                x = to_mpf(hi - fhi * (hi - lo) / denom)
                if not lo < x < hi:
                    x = None
        if x is None:
            x = lo + width / 2
            stalled = 0
        fx = f(x)
        sx = _sign(fx)
        if sx == 0:
            return x
        if sx == slo:
            lo, flo = x, fx
            if side == -1:
                fhi = fhi / 2
            side = -1
        else:
            hi, fhi = x, fx
            if side == 1:
                flo = flo / 2
            side = 1
        if hi - lo > width_before / 2:
            stalled += 1
        else:
            stalled = 0
            width_before = hi - lo
    raise MaxIterationsExceeded(f"no convergence within {max_iter} iterations")


def _scaled_zero(p: Sequence, x, eps) -> bool:
    scale = sum(abs(c) * abs(x) ** i for i, c in enumerate(p))
    return abs(poly_eval(p, x)) <= eps * scale


def _critical_points(p: Sequence, lo, hi, eps) -> list:
    dp = poly_deriv(p)
    pts = []
    for a, b in _isolate(dp, lo, hi, eps):
        if a == b:
            pts.append(a)
        else:
            pts.append(find_root_bracketed(lambda x: poly_eval(dp, x), a, b))
    return pts


def _isolate(p: Sequence, lo, hi, eps) -> list:
    p = poly_trim(p)
    deg = poly_degree(p)
    if deg <= 0:
        return []
    nodes = [lo] + [x for x in _critical_points(p, lo, hi, eps) if lo < x < hi] + [hi]
    zero = [_scaled_zero(p, x, eps) for x in nodes]
    values = [poly_eval(p, x) for x in nodes]
    out = []
    for i, x in enumerate(nodes):
        if zero[i] and (not out or out[-1] != (x, x)):
            out.append((x, x))
        if i + 1 < len(nodes) and not zero[i] and not zero[i + 1]:
            if _sign(values[i]) != _sign(values[i + 1]):
                out.append((x, nodes[i + 1]))
    return out


def isolate_real_roots(poly: Sequence, interval) -> list:
    """Disjoint intervals, each holding exactly one real root of ``poly``.

    The interval is cut at the critical points (found recursively from the
    derivative), so ``poly`` is monotone on every piece and a sign change
    brackets exactly one root.  A root that coincides with a cut point
    (a multiple root, or a root on the boundary) comes back as the
    degenerate interval ``(x, x)``.
    """
    lo, hi = (to_mpf(v) for v in interval)
    if not lo < hi:
        raise DegenerateInterval(f"empty interval [{lo}, {hi}]")
    coeffs = [to_mpf(c) for c in poly]
    if poly_degree(coeffs) < 0:
        raise ValueError("polynomial is identically zero")
    eps = mpf(10) ** (-mpmath.mp.dps + 6)
    return _isolate(coeffs, lo, hi, eps)


def real_roots(poly: Sequence, interval, tol=None) -> list:
    """Refined real roots of ``poly`` in ``interval``, ascending."""
    coeffs = [to_mpf(c) for c in poly]
    out = []
    for a, b in isolate_real_roots(coeffs, interval):
        out.append(a if a == b else find_root_bracketed(lambda x: poly_eval(coeffs, x), a, b, tol))
    return out
