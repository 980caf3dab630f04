"""Polynomial solutions of ``p2 y'' + p1 y' - p0 y = 0`` with polynomial coefficients.

Two coefficient classes are supported, labelled by ``K``:

* ``K = 4``: ``deg p2 <= 4``, ``deg p1 <= 3``, ``deg p0 <= 2`` (free problems);
* ``K = 5``: ``deg p2 <= 5``, ``deg p1 <= 4``, ``deg p0 <= 3`` (box problems).

Collecting the coefficient of ``r**m`` after inserting ``y = sum c_j r**j``
gives one row of a banded linear system.  Entry ``off`` of row ``m``
multiplies ``c_{m+off}``; offsets run from ``h`` (the highest offset carrying
a nonzero coefficient) down to ``2 - K``.  All routines are written against
that single banded description, so any degree is handled the same way.

Everything here works on ``Fraction`` as well as ``mpf`` inputs.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import mpmath

from .errors import (
    DegenerateLeadingCoefficients,
    LeadingCoefficientVanishes,
    UnsupportedDegree,
)
from .precision import to_mpf
from .series import poly_add, poly_deriv, poly_mul, poly_scale, poly_trim

MAX_DEGREE = 10


def _is_exact(x) -> bool:
    return isinstance(x, (int, Fraction))


def _default_tol(values) -> object:
    if all(_is_exact(v) for v in values):
        return 0
    return mpmath.mpf(10) ** (-mpmath.mp.dps + 12)


def _pad(p: Sequence, n: int) -> tuple:
    p = list(p)
    if len(poly_trim(p)) > n:
        raise ValueError(f"coefficient list {p} longer than {n}")
    p = p[:n] if len(p) > n else p
    return tuple(p + [0] * (n - len(p)))


@dataclass(frozen=True)
class PolyODE:
    """``p2 y'' + p1 y' - p0 y = 0``; coefficient lists are lowest degree first."""

    p2: tuple
    p1: tuple
    p0: tuple
    K: int = 0

    def __post_init__(self):
        K = self.K or max(4, len(poly_trim(self.p2)) - 1, len(poly_trim(self.p1)), len(poly_trim(self.p0)) + 1)
        if K not in (4, 5):
            raise ValueError(f"unsupported coefficient class K={K}")
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "p2", _pad(self.p2, K + 1))
        object.__setattr__(self, "p1", _pad(self.p1, K))
        object.__setattr__(self, "p0", _pad(self.p0, K - 1))

    # (a_{K,0}, a_{K-1,0}, tau_{K-2,0}) in the usual labelling
    @property
    def leading(self) -> tuple:
        return self.p2[self.K], self.p1[self.K - 1], self.p0[self.K - 2]

    @property
    def lowest_offset(self) -> int:
        return 2 - self.K

    @property
    def highest_offset(self) -> int:
        h = self.lowest_offset
        for off in range(2, self.lowest_offset - 1, -1):
            if any(x != 0 for x in self._entries(off)):
                return off
        return h

    def _entries(self, off: int) -> tuple:
        out = []
        i2, i1, i0 = 2 - off, 1 - off, -off
        if 0 <= i2 < len(self.p2):
            out.append(self.p2[i2])
        if 0 <= i1 < len(self.p1):
            out.append(self.p1[i1])
        if 0 <= i0 < len(self.p0):
            out.append(self.p0[i0])
        return tuple(out)

    def band(self, m: int, off: int):
        """Coefficient of ``c_{m+off}`` in the ``r**m`` row."""
        j = m + off
        if j < 0:
            return 0
        val = 0
        i2, i1, i0 = 2 - off, 1 - off, -off
        if 0 <= i2 < len(self.p2) and j >= 2:
            val = val + self.p2[i2] * (j * (j - 1))
        if 0 <= i1 < len(self.p1) and j >= 1:
            val = val + self.p1[i1] * j
        if 0 <= i0 < len(self.p0):
            val = val - self.p0[i0]
        return val

    def apply(self, y: Sequence) -> list:
        """Coefficients of ``p2 y'' + p1 y' - p0 y`` for a polynomial ``y``."""
        d1 = poly_deriv(y)
        d2 = poly_deriv(d1)
        out = poly_add(poly_mul(self.p2, d2), poly_mul(self.p1, d1))
        return poly_add(out, poly_scale(poly_mul(self.p0, y), -1))


@dataclass(frozen=True)
class RecurrenceSystem:
    """Banded recurrence ``sum_off band(m, off) c_{m+off} = 0`` for every row ``m``."""

    ode: PolyODE
    high: int
    low: int

    @property
    def bandwidth(self) -> int:
        return self.high - self.low + 1

    @property
    def offsets(self) -> range:
        return range(self.high, self.low - 1, -1)

    def coefficients(self, m: int) -> tuple:
        """Band entries of row ``m``, highest offset first (alpha, beta, gamma, ...)."""
        return tuple(self.ode.band(m, off) for off in self.offsets)

    @property
    def coefficient_fn(self) -> Callable[[int], tuple]:
        return self.coefficients

    def row_value(self, m: int, c: Sequence):
        acc = 0
        for off in self.offsets:
            j = m + off
            if 0 <= j < len(c):
                acc = acc + self.ode.band(m, off) * c[j]
        return acc

    def first_row(self) -> int:
        """Lowest row index that involves any coefficient ``c_j`` with ``j >= 0``."""
        return -self.high

    def matrix(self, degree: int) -> list:
        """Rows of the full linear system for a degree-``degree`` polynomial."""
        rows = []
        for m in range(self.first_row(), degree - self.low + 1):
            rows.append([self.ode.band(m, j - m) if self.low <= j - m <= self.high else 0 for j in range(degree + 1)])
        return rows


@dataclass(frozen=True)
class PolynomialSolution:
    coeffs: tuple
    degree: int
    residual: object
    defects: tuple = field(default=())

    def __call__(self, r):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * r + c
        return acc


@dataclass(frozen=True)
class DeterminantCondition:
    matrices: tuple
    residuals: tuple
    scaled: tuple
    tol: object

    @property
    def satisfied(self) -> bool:
        return all(abs(s) <= self.tol for s in self.scaled)


def necessary_condition(ode: PolyODE, n: int):
    """``tau_lead - (n(n-1) a_{K,0} + n a_{K-1,0})``; zero when degree ``n`` is allowed."""
    if n < 0:
        raise ValueError("degree must be non-negative")
    aK, aK1, tau = ode.leading
    if aK == 0 and aK1 == 0 and tau == 0:
        raise DegenerateLeadingCoefficients("leading coefficients a_{K,0}, a_{K-1,0}, tau_{K-2,0} all vanish")
    return tau - (n * (n - 1) * aK + n * aK1)


def build_recurrence(ode: PolyODE) -> RecurrenceSystem:
    return RecurrenceSystem(ode, ode.highest_offset, ode.lowest_offset)


def _forward(rec: RecurrenceSystem, degree: int) -> list:
    h = rec.high
    c = [1]
    for j in range(1, degree + 1):
        m = j - h
        pivot = rec.ode.band(m, h)
        if pivot == 0:
            raise DegenerateLeadingCoefficients(f"recurrence pivot for c_{j} vanishes (row {m})")
        acc = 0
        for off in rec.offsets:
            if off == h:
                continue
            i = m + off
            if 0 <= i < len(c):
                acc = acc + rec.ode.band(m, off) * c[i]
        c.append(-acc / pivot if not (_is_exact(acc) and _is_exact(pivot)) else -Fraction(acc) / Fraction(pivot))
    return c


def _defect_rows(rec: RecurrenceSystem, degree: int) -> list:
    rows = list(range(degree - rec.high + 1, degree - rec.low + 1))
    first = rec.first_row()
    # when h = 0 the c_0 row is not used by the forward sweep
    if first not in rows and not any(first == j - rec.high for j in range(1, degree + 1)):
        rows.insert(0, first)
    return rows


def solve_polynomial(ode: PolyODE, degree: int, tol=None) -> PolynomialSolution:
    """Run the recurrence forward from ``c_0 = 1`` and report the termination defects.

    ``defects`` holds the rows beyond the forward sweep (the last one is the
    necessary condition); ``residual`` is their largest magnitude.
    """
    if degree < 0 or degree > MAX_DEGREE:
        raise UnsupportedDegree(f"degree {degree} outside 0..{MAX_DEGREE}")
    rec = build_recurrence(ode)
    c = _forward(rec, degree)
    defects = tuple(rec.row_value(m, c) for m in _defect_rows(rec, degree))
    if degree > 0:
        scale = max(abs(x) for x in c)
        ltol = _default_tol(c) if tol is None else tol
        if c[-1] == 0 or abs(c[-1]) <= ltol * scale:
            raise LeadingCoefficientVanishes(f"c_{degree} vanishes; the solution has lower degree")
    residual = max((abs(d) for d in defects), default=0)
    return PolynomialSolution(tuple(c), degree, residual, defects)


def _uniform(matrix) -> list:
    # Fractions if every entry is exact, otherwise mpf throughout (the two do not mix)
    rows = [list(row) for row in matrix]
    if all(isinstance(x, (int, Fraction)) for row in rows for x in row):
        return [[Fraction(x) for x in row] for row in rows]
    return [[to_mpf(x) for x in row] for row in rows]


def det(matrix: Sequence[Sequence]):
    """Determinant by Gaussian elimination with partial pivoting (exact for Fractions)."""
    a = _uniform(matrix)
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    result = 1
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(a[r][col]))
        if a[piv][col] == 0:
            return a[0][0] * 0
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            sign = -sign
        p = a[col][col]
        result = result * p
        for r in range(col + 1, n):
            f = a[r][col] / p
            if f != 0:
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return sign * result


def kernel_vector(matrix: Sequence[Sequence], tol=None) -> list:
    """Null vector of a (rectangular) matrix, normalised to first entry 1.

    Used only to cross-check the forward recurrence against the full system.
    """
    a = _uniform(matrix)
    ncols = len(a[0])
    flat = [x for row in a for x in row]
    tol = _default_tol(flat) * max(abs(x) for x in flat) if tol is None else tol
    pivots = []
    row = 0
    for col in range(ncols):
        piv = max(range(row, len(a)), key=lambda r: abs(a[r][col]), default=None)
        if piv is None or abs(a[piv][col]) <= tol:
            continue
        a[row], a[piv] = a[piv], a[row]
        p = a[row][col]
        a[row] = [x / p for x in a[row]]
        for r in range(len(a)):
            if r != row and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[row])]
        pivots.append(col)
        row += 1
        if row == len(a):
            break
    free = [c for c in range(ncols) if c not in pivots]
    if not free:
        raise ValueError("matrix has a trivial kernel")
    f = free[0]
    v = [0] * ncols
    v[f] = 1
    for r, col in enumerate(pivots):
        v[col] = -a[r][f]
    if v[0] == 0:
        raise ValueError("kernel vector has vanishing constant term")
    return [x / v[0] for x in v]


def _row_scaled_det(rows: list):
    scaled = []
    for row in rows:
        s = max(abs(x) for x in row)
        scaled.append([x / s for x in row] if s != 0 else row)
    return det(scaled)


def determinant_conditions(ode: PolyODE, degree: int, tol=None) -> DeterminantCondition:
    """Sufficiency determinants for a degree-``degree`` polynomial solution.

    The recurrence rows that fix ``c_1..c_n`` are bordered in turn by each
    row that must vanish for termination (all but the necessary-condition
    row).  That yields two determinants for the ``K = 4`` class and three
    for ``K = 5`` (one when the origin is a plain regular point, ``h = 0``).
    """
    if degree < 0 or degree > MAX_DEGREE:
        raise UnsupportedDegree(f"degree {degree} outside 0..{MAX_DEGREE}")
    rec = build_recurrence(ode)
    h, low = rec.high, rec.low

    def row(m):
        return [ode.band(m, j - m) if low <= j - m <= h else 0 for j in range(degree + 1)]

    base = [row(m) for m in range(1 - h, degree - h + 1)]
    extras = list(range(degree - h + 1, degree - low))
    matrices, residuals, scaled = [], [], []
    for m in extras:
        mat = base + [row(m)]
        matrices.append(tuple(tuple(r) for r in mat))
        residuals.append(det(mat))
        scaled.append(_row_scaled_det(mat))
    if tol is None:
        tol = _default_tol([x for m in matrices for r in m for x in r])
    return DeterminantCondition(tuple(matrices), tuple(residuals), tuple(scaled), tol)


def substitution_residual(ode: PolyODE, solution: PolynomialSolution) -> list:
    """Coefficients of the ODE applied to the polynomial (all zero for an exact solution)."""
    return ode.apply(list(solution.coeffs))


def solve_parameter_constraints(family, fixed: dict, free: str, interval, *, equation=None, tol=None) -> list:
    """Real roots in ``interval`` of a shipped constraint family in one free parameter."""
    from .constraints import solve_family

    return solve_family(family, fixed, free, interval, equation=equation, tol=tol)
