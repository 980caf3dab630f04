"""Asymptotic iteration method for ``y'' = lambda0(r) y' + s0(r) y``.

The iteration ``lambda_n = lambda_{n-1}' + s_{n-1} + lambda0 lambda_{n-1}``,
``s_n = s_{n-1}' + s0 lambda_{n-1}`` is evaluated at a point ``r0``, and
energies are the roots of ``delta_N = lambda_N s_{N-1} - lambda_{N-1} s_N``.

Two evaluation routes are provided.

``series``
    Propagates ``lambda_n`` and ``s_n`` as truncated Taylor series about
    ``r0``.  Faithful to the definition, O(N**3), used as a reference.

``taylor`` (default)
    Differentiating ``y'' = lambda0 y' + s0 y`` n times gives
    ``y^(n+2) = lambda_n y' + s_n y``.  For the two local solutions with
    ``(y, y') = (1, 0)`` and ``(0, 1)`` at ``r0`` this reads
    ``s_n(r0) = y_a^(n+2)(r0)`` and ``lambda_n(r0) = y_b^(n+2)(r0)``, so one
    Taylor recurrence for the local solutions yields every ``delta_n`` in
    O(N) work.  The hot loop runs on gmpy2 ``mpfr`` values.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import gmpy2
import mpmath
from mpmath import mpf

from .errors import NoConvergence, NoSignChange, OrderExhausted, PoleAtCenter, SoftcoreError
from .precision import PrecisionContext, to_fraction, to_mpf, to_mpfr
from .roots import find_root_bracketed
from .series import (
    TaylorSeries,
    poly_add,
    poly_eval,
    poly_from_roots,
    poly_mul,
    poly_scale,
    poly_shift,
    series_diff,
    series_from_poly,
    series_from_rational,
    series_mul,
)

log = logging.getLogger(__name__)

DEFAULT_SCHEDULE = tuple(range(20, 201, 10))
GRID_PER_UNIT = 64


@dataclass(frozen=True)
class PartialFractions:
    """``poly(r) + sum kappa / (r - pole)`` with simple poles."""

    poly: tuple = (0,)
    poles: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "poly", tuple(self.poly) or (0,))
        object.__setattr__(self, "poles", tuple((k, p) for k, p in self.poles))

    def __call__(self, r):
        val = poly_eval(self.poly, r)
        for kappa, pole in self.poles:
            val = val + kappa / (r - pole)
        return val

    def pole_set(self) -> list:
        return [p for _, p in self.poles]

    def over(self, poles: Sequence) -> list:
        """Numerator over the common denominator ``prod (r - p)`` for ``p`` in ``poles``."""
        num = poly_mul(list(self.poly), poly_from_roots(poles))
        for kappa, pole in self.poles:
            rest = [p for p in poles if p is not pole and p != pole]
            if len(rest) != len(poles) - 1:
                raise ValueError("pole list does not contain each seed pole exactly once")
            num = poly_add(num, poly_scale(poly_from_roots(rest), kappa))
        return num

    def series(self, center, order: int) -> TaylorSeries:
        out = series_from_poly(list(self.poly), center, order)
        for kappa, pole in self.poles:
            out = out + kappa * series_from_rational([1], [-pole, 1], center, order)
        return out

    def numeric(self) -> "PartialFractions":
        return PartialFractions(tuple(to_mpf(x) for x in self.poly), tuple((to_mpf(k), to_mpf(p)) for k, p in self.poles))

    def shifted(self, constant) -> "PartialFractions":
        poly = list(self.poly)
        poly[0] = poly[0] + constant
        return PartialFractions(tuple(poly), self.poles)


@dataclass(frozen=True)
class AimSeed:
    """Initial pair ``(lambda0, s0)``; ``s0 = s0_base + energy_coeff * E``.

    ``energy_coeff`` marks the affine slot through which the energy enters.
    """

    lambda0: PartialFractions
    s0: PartialFractions
    energy_coeff: object = -1
    label: str = ""

    def at(self, E) -> "AimSeed":
        """Seed with the energy substituted (``energy_coeff`` becomes 0)."""
        return AimSeed(self.lambda0, self.s0.shifted(self.energy_coeff * E), 0, self.label)

    def numeric(self) -> "AimSeed":
        """Copy with every coefficient converted to ``mpf`` at the current precision."""
        return AimSeed(self.lambda0.numeric(), self.s0.numeric(), to_mpf(self.energy_coeff), self.label)

    def exact(self) -> "AimSeed":
        """Copy with every coefficient as an exact Fraction (mpf values are dyadic rationals)."""
        pf = lambda f: PartialFractions(tuple(to_fraction(x) for x in f.poly), tuple((to_fraction(k), to_fraction(p)) for k, p in f.poles))
        return AimSeed(pf(self.lambda0), pf(self.s0), to_fraction(self.energy_coeff), self.label)

    def poles(self) -> list:
        out = []
        for p in self.lambda0.pole_set() + self.s0.pole_set():
            if not any(p == q for q in out):
                out.append(p)
        return out

    def structure(self) -> tuple:
        """Hashable description used to compare seeds structurally."""
        return (self.lambda0.poly, self.lambda0.poles, self.s0.poly, self.s0.poles, self.energy_coeff)


@dataclass(frozen=True)
class AimState:
    n: int
    lambda_n: TaylorSeries
    s_n: TaylorSeries


@dataclass(frozen=True)
class EigenResult:
    energy: object
    iterations_N: int
    r0: object
    digits: int
    delta_residual: object
    node_count: int | None = None
    status: str = "converged"
    history: tuple = field(default=(), repr=False)

    @property
    def converged(self) -> bool:
        return self.status == "converged"


# ---------------------------------------------------------------- series route


def aim_iterate(seed: AimSeed, r0, N_max: int, E=None, order: int | None = None) -> list:
    """States ``0..N_max`` of the iteration as truncated series about ``r0``."""
    if N_max < 1:
        raise ValueError("N_max must be at least 1")
    if E is not None:
        seed = seed.at(E)
    elif seed.energy_coeff != 0:
        raise ValueError("seed still has a free energy slot; pass E")
    order = N_max + 4 if order is None else order
    lam0 = seed.lambda0.series(r0, order)
    s0 = seed.s0.series(r0, order)
    states = [AimState(0, lam0, s0)]
    lam, s = lam0, s0
    for n in range(1, N_max + 1):
        if lam.order == 0:
            raise OrderExhausted(f"series order {order} exhausted at iteration {n}")
        lam_next = series_diff(lam) + s + series_mul(lam0, lam)
        s_next = series_diff(s) + series_mul(s0, lam)
        lam, s = lam_next, s_next
        states.append(AimState(n, lam, s))
    return states


def _normalised(p, q):
    big = max(abs(p), abs(q))
    if big == 0:
        return p * 0
    return (p - q) / big


def _delta_series(seed: AimSeed, r0, N: int):
    states = aim_iterate(seed, r0, N)
    a, b = states[N], states[N - 1]
    return _normalised(a.lambda_n.value() * b.s_n.value(), b.lambda_n.value() * a.s_n.value())


# ---------------------------------------------------------------- taylor route


@dataclass(frozen=True)
class _Shifted:
    """``D y'' = L y' + S y`` with all polynomials re-expanded about ``r0``.

    Built in exact (dyadic) rational arithmetic and divided through by
    ``D(r0)``; ``S = S0 + E Se`` stays exact until an energy is supplied, so
    an energy that cancels ``s0`` identically gives ``S = 0`` exactly.
    """

    D: tuple
    L: tuple
    S0: tuple  # Fractions
    Se: tuple  # Fractions, coefficient polynomial of E in S

    @classmethod
    def build(cls, seed: AimSeed, r0) -> "_Shifted":
        seed = seed.exact()
        x0 = to_fraction(r0)
        poles = seed.poles()
        D = poly_from_roots(poles)
        L = seed.lambda0.over(poles)
        S0 = seed.s0.over(poles)
        Se = poly_scale(D, seed.energy_coeff)
        D, L, S0, Se = (poly_shift(p, x0) for p in (D, L, S0, Se))
        scale = max(abs(x) for x in D)
        if abs(D[0]) <= scale * to_fraction(mpf(10) ** (-mpmath.mp.dps)):
            raise PoleAtCenter(f"r0 = {mpmath.nstr(to_mpf(r0), 15)} sits on a pole of the seed")
        inv = 1 / D[0]
        return cls(
            tuple(to_mpfr(x * inv) for x in D),
            tuple(to_mpfr(x * inv) for x in L),
            tuple(x * inv for x in S0),
            tuple(x * inv for x in Se),
        )

    def s_coeffs(self, E) -> list:
        Eq = to_fraction(E)
        return [to_mpfr(s0 + Eq * se) for s0, se in zip(self.S0, self.Se)]


def _local_solutions(sh: _Shifted, E, M: int):
    """Taylor coefficients 0..M of the two local solutions."""
    D, L = sh.D, sh.L
    S = sh.s_coeffs(E)
    nD, nL, nS = len(D), len(L), len(S)
    out = []
    for y0, y1 in ((1, 0), (0, 1)):
        y = [gmpy2.mpfr(y0), gmpy2.mpfr(y1)]
        for m in range(M - 1):
            acc = gmpy2.mpfr(0)
            for i in range(1, min(nD, m + 1)):
                j = m - i + 2
                acc += D[i] * (j * (j - 1)) * y[j]
            for i in range(min(nL, m + 1)):
                j = m - i + 1
                if j >= 1:
                    acc -= L[i] * j * y[j]
            for i in range(min(nS, m + 1)):
                acc -= S[i] * y[m - i]
            y.append(-acc / ((m + 2) * (m + 1)))
        out.append(y)
    return out


def _mpfr_precision():
    # the hot loop follows mpmath's working precision, whoever set it
    return gmpy2.context(gmpy2.get_context(), precision=mpmath.mp.prec)


class DeltaEvaluator:
    """Evaluates ``delta_N(E)`` for a fixed seed and ``r0`` (taylor route)."""

    def __init__(self, seed: AimSeed, r0):
        self.seed = seed
        self.r0 = to_mpf(r0)
        with _mpfr_precision():
            self._shifted = _Shifted.build(seed, self.r0)

    def sequence(self, E, N_max: int) -> list:
        """``[delta_1, ..., delta_{N_max}]`` at energy ``E``."""
        with _mpfr_precision():
            a, b = _local_solutions(self._shifted, E, N_max + 2)
            return [to_mpf(_normalised(b[N + 2] * a[N + 1], b[N + 1] * a[N + 2])) for N in range(1, N_max + 1)]

    def __call__(self, E, N: int):
        with _mpfr_precision():
            a, b = _local_solutions(self._shifted, E, N + 2)
            return to_mpf(_normalised(b[N + 2] * a[N + 1], b[N + 1] * a[N + 2]))


def delta(seed: AimSeed, E, r0, N: int, method: str = "taylor"):
    """Normalised termination condition ``delta_N(E; r0)``."""
    if N < 1:
        raise ValueError("N must be at least 1")
    if method == "taylor":
        return DeltaEvaluator(seed, r0)(E, N)
    if method == "series":
        return _delta_series(seed.numeric().at(to_mpf(E)), to_mpf(r0), N)
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------- root search


def _local_bracket(f, guess, lo, hi, width):
    """Smallest symmetric window around ``guess`` (clipped to [lo, hi]) with a sign change."""
    w = width
    while True:
        a, b = max(lo, guess - w), min(hi, guess + w)
        fa, fb = f(a), f(b)
        if (fa > 0) != (fb > 0) or fa == 0 or fb == 0:
            return a, b
        if a == lo and b == hi:
            return None
        w *= 4


def _resolved(f, root, tol) -> bool:
    """True when ``f`` has a genuine sign change across ``root +- tol``.

    Late in the schedule delta can sink into rounding noise, where roots of
    successive N agree by accident.  The sign change must survive a second
    evaluation at 50% more bits.
    """
    a, b = root - tol, root + tol
    fa, fb = f(a), f(b)
    if fa == 0 or fb == 0 or (fa > 0) == (fb > 0):
        return False
    with mpmath.workprec(mpmath.mp.prec * 3 // 2):
        ga, gb = f(a), f(b)
    return (ga > 0) == (fa > 0) and (gb > 0) == (fb > 0) and abs(fa - ga) < abs(ga) / 2 and abs(fb - gb) < abs(gb) / 2


def track_root(family: Callable, bracket, tol, N_schedule: Iterable[int], limits=None):
    """Follow a root of ``family(N)`` inside ``bracket`` as ``N`` runs through the schedule.

    The first N with a sign change over the whole bracket seeds the search;
    later N look in a window around the previous root that widens until a
    sign change appears, never leaving ``limits`` (default: the bracket).
    Returns ``(root, N, history, |f(root)|)`` at the first N whose root
    agrees with the previous one to within ``tol`` and changes sign across
    ``root +- tol``.
    """
    lo, hi = (to_mpf(x) for x in bracket)
    wlo, whi = (lo, hi) if limits is None else (to_mpf(x) for x in limits)
    tol = to_mpf(tol)
    history = []
    guess = None
    step = (hi - lo) / 64
    rtol = tol / 1000
    for N in N_schedule:
        f = family(N)
        if guess is None:
            flo, fhi = f(lo), f(hi)
            win = (lo, hi) if (flo > 0) != (fhi > 0) or flo == 0 or fhi == 0 else None
        else:
            win = _local_bracket(f, guess, wlo, whi, step)
        if win is None:
            history.append((N, None))
            continue
        root = find_root_bracketed(f, win[0], win[1], rtol)
        history.append((N, root))
        if guess is not None:
            if abs(root - guess) <= tol and _resolved(f, root, tol):
                return root, N, history, abs(f(root))
            step = max(abs(root - guess) * 4, tol)
        guess = root
    if all(e is None for _, e in history):
        raise NoSignChange(f"no sign change on [{mpmath.nstr(lo, 12)}, {mpmath.nstr(hi, 12)}] for any N")
    raise NoConvergence("roots did not settle over the N schedule", history)


def find_eigenvalue(
    seed: AimSeed,
    bracket,
    r0,
    tol=None,
    N_schedule: Iterable[int] = DEFAULT_SCHEDULE,
    *,
    context: PrecisionContext | None = None,
    evaluator: DeltaEvaluator | None = None,
    limits=None,
) -> EigenResult:
    """Root of ``delta_N(E; r0)`` in ``bracket``, converged along ``N_schedule``.

    Convergence is declared at the first N whose root agrees with the root at
    the previous schedule entry to within ``tol`` (default
    ``10**(20 - digits)``).
    """
    context = context or PrecisionContext.from_env()
    with context.activate():
        tol = context.default_tol if tol is None else to_mpf(tol)
        ev = evaluator or DeltaEvaluator(seed, r0)
        family = lambda N: (lambda E: ev(E, N))
        root, N, history, resid = track_root(family, bracket, tol, N_schedule, limits)
        return EigenResult(root, N, ev.r0, context.digits, resid, history=tuple(history))


def _result_from_failure(exc: NoConvergence, r0, digits) -> EigenResult:
    best = exc.best
    roots = [(n, e) for n, e in exc.history if e is not None]
    n_best = roots[-1][0] if roots else 0
    return EigenResult(best, n_best, r0, digits, None, status="unconverged", history=tuple(exc.history))


def scan_spectrum(
    seed: AimSeed,
    E_range,
    count: int,
    r0,
    tol=None,
    N_schedule: Iterable[int] = DEFAULT_SCHEDULE,
    *,
    N_scan: int | None = None,
    context: PrecisionContext | None = None,
    grid_per_unit: int = GRID_PER_UNIT,
) -> list:
    """Lowest ``count`` eigenvalues in ``E_range`` (ascending).

    Brackets come from sign changes of ``delta_{N_scan}`` on a uniform grid;
    grid cells whose end values are small relative to their neighbours are
    re-sampled four times finer to catch close pairs.  Each bracket is then
    handed to :func:`find_eigenvalue`.  Levels whose roots fail to settle
    come back with ``status="unconverged"`` and the best estimate.
    """
    context = context or PrecisionContext.from_env()
    schedule = list(N_schedule)
    if count <= 0:
        return []
    with context.activate():
        lo, hi = (to_mpf(x) for x in E_range)
        if not lo < hi:
            return []
        ev = DeltaEvaluator(seed, r0)
        N_scan = N_scan or schedule[0]
        brackets = scan_brackets(lambda E: ev(E, N_scan), lo, hi, grid_per_unit)
        results = []
        for i, (a, b) in enumerate(brackets):
            if len(results) >= count:
                break
            left = (brackets[i - 1][1] + a) / 2 if i > 0 else lo
            right = (b + brackets[i + 1][0]) / 2 if i + 1 < len(brackets) else hi
            try:
                res = find_eigenvalue(
                    seed,
                    (a, b),
                    r0,
                    tol,
                    [n for n in schedule if n >= N_scan],
                    context=context,
                    evaluator=ev,
                    limits=(left, right),
                )
            except NoConvergence as exc:
                res = _result_from_failure(exc, ev.r0, context.digits)
            except NoSignChange:
                log.debug("bracket [%s, %s] lost its sign change", a, b)
                continue
            results.append(res)
        return results


def scan_brackets(f: Callable, lo, hi, grid_per_unit: int = GRID_PER_UNIT) -> list:
    n = max(8, int(math.ceil(float(hi - lo) * grid_per_unit)))
    xs = [lo + (hi - lo) * i / n for i in range(n + 1)]
    fs = [f(x) for x in xs]
    out = []
    for i in range(n):
        a, b, fa, fb = xs[i], xs[i + 1], fs[i], fs[i + 1]
        if fa == 0:
            out.append((a - (b - a) / 2, a + (b - a) / 2))
            continue
        if (fa > 0) != (fb > 0) and fb != 0:
            out.append((a, b))
            continue
        # same sign: a close pair of roots can hide in one cell when |f| dips
        nb = [abs(fs[j]) for j in (i - 1, i + 2) if 0 <= j <= n]
        if nb and min(abs(fa), abs(fb)) < min(nb) / 4:
            sub = [a + (b - a) * j / 4 for j in range(5)]
            fsub = [fa] + [f(x) for x in sub[1:4]] + [fb]
            for j in range(4):
                if (fsub[j] > 0) != (fsub[j + 1] > 0):
                    out.append((sub[j], sub[j + 1]))
    return out


def choose_r0(problem, E_hint) -> mpf:
    """Heuristic evaluation point: largest root modulus of ``V_eff(r) = E_hint``.

    Box problems use ``R / 2``.  The result is rounded to one significant
    figure; if ``V_eff - E_hint`` has no real root the fallback is 1.
    """
    if problem.R is not None:
        return to_mpf(problem.R) / 2
    a, b, c, beta, k = (to_mpf(x) for x in (problem.a, problem.b, problem.c, problem.beta, problem.k))
    E = to_mpf(E_hint)
    cf = (k - 1) * (k - 3) / 4
    # r^2 (r + beta) (V_eff - E), lowest degree first
    poly = poly_add(poly_mul([cf], [beta, 1]), [0, 0, a])
    poly = poly_add(poly, poly_mul([0, 0, 0, c], [beta, 1]))
    poly = poly_add(poly, poly_mul([0, 0, 0, 0, b * b], [beta, 1]))
    poly = poly_add(poly, poly_mul([0, 0, -E], [beta, 1]))
    while len(poly) > 1 and poly[-1] == 0:
        poly.pop()
    if len(poly) < 2:
        return mpf(1)
    roots = mpmath.polyroots(list(reversed(poly)), maxsteps=200, extraprec=60)
    real = [abs(mpmath.re(z)) for z in roots if abs(mpmath.im(z)) <= mpf(10) ** -20 * max(1, abs(z))]
    real = [x for x in real if x > 0]
    if not real:
        return mpf(1)
    top = max(real)
    return to_mpf(float(mpmath.nstr(top, 1)))
