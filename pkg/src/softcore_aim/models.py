"""Softcore Coulomb problems: ``V(r) = a/(r+beta) + c r + b^2 r^2`` in ``d`` dimensions.

With ``k = d + 2 ell`` the radial function is written as
``u(r) = r^((k-1)/2) exp(-c r/(2b) - b r^2/2) f(r)`` (times ``(R - r)`` inside a
box of radius ``R``).  This module builds the ODE satisfied by ``f``, the AIM
seeds, the closed-form quasi-exact solutions and the wavefunction samples.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Sequence

import mpmath
from mpmath import mpf

from .aim import AimSeed, DeltaEvaluator, PartialFractions, track_root, DEFAULT_SCHEDULE
from .errors import InvalidProblem, NotInCatalog, RequiresBetaZero, UnsupportedDegree
from .polysolve import PolyODE
from .precision import PrecisionContext, to_mpf
from .roots import real_roots
from .series import poly_eval

log = logging.getLogger(__name__)


def as_number(x):
    """Exact where possible: ints and rational strings become Fractions."""
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, (Fraction, mpf)):
        return x
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except ValueError:
            return mpf(x)
    return to_mpf(x)


@dataclass(frozen=True)
class ProblemSpec:
    a: object
    b: object
    c: object
    beta: object = 0
    d: int = 3
    ell: int = 0
    R: object = None

    def __post_init__(self):
        for name in ("a", "b", "c", "beta"):
            object.__setattr__(self, name, as_number(getattr(self, name)))
        if self.R is not None:
            object.__setattr__(self, "R", as_number(self.R))
        if int(self.d) != self.d or int(self.ell) != self.ell:
            raise InvalidProblem("d and ell must be integers")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "ell", int(self.ell))
        if self.b <= 0:
            raise InvalidProblem(f"b must be positive, got {self.b}")
        if self.beta < 0:
            raise InvalidProblem(f"beta must be non-negative, got {self.beta}")
        if self.d < 2 or self.ell < 0:
            raise InvalidProblem(f"need d >= 2 and ell >= 0, got d={self.d}, ell={self.ell}")
        if self.R is not None and self.R <= 0:
            raise InvalidProblem(f"box radius must be positive, got {self.R}")
        if self.beta == 0 and self.a != 0 and self.d == 2 and self.R is None:
            raise InvalidProblem("beta = 0 with a Coulomb term requires d >= 3")

    @property
    def k(self) -> int:
        return self.d + 2 * self.ell

    @property
    def confined(self) -> bool:
        return self.R is not None

    @property
    def exact(self) -> bool:
        vals = (self.a, self.b, self.c, self.beta) + ((self.R,) if self.R is not None else ())
        return all(isinstance(v, Fraction) for v in vals)

    def values(self) -> tuple:
        """``(a, b, c, beta, k, R)``: Fractions when all inputs are exact, otherwise mpf."""
        vals = (self.a, self.b, self.c, self.beta)
        R = self.R
        if not self.exact:
            vals = tuple(to_mpf(v) for v in vals)
            R = to_mpf(R) if R is not None else None
        return vals + (self.k, R)

    def potential(self, r):
        return self.a / (r + self.beta) + self.c * r + self.b**2 * r**2

    def with_(self, **changes) -> "ProblemSpec":
        return replace(self, **changes)


@dataclass(frozen=True)
class HeunParams:
    alpha: object
    beta_h: object
    gamma: object
    delta: object


@dataclass(frozen=True)
class WavefunctionSample:
    r: object
    u: object
    parts: tuple  # (prefactor, exponential, polynomial, box factor)


# ------------------------------------------------------------------ ODE


def build_ode(spec: ProblemSpec, E) -> PolyODE:
    """ODE ``p2 f'' + p1 f' - p0 f = 0`` for the polynomial factor ``f``."""
    a, b, c, be, k, R = spec.values()
    E = as_number(E)
    if not spec.exact or not isinstance(E, Fraction):
        a, b, c, be, E = (to_mpf(x) for x in (a, b, c, be, E))
        R = to_mpf(R) if R is not None else None
    if not spec.confined:
        p2 = [0, -4 * b**2 * be, -4 * b**2]
        p1 = [4 * b**2 * be * (1 - k), 4 * b * (b + c * be - b * k), 4 * b * (c + 2 * b**2 * be), 8 * b**3]
        t20 = c**2 + 4 * b**2 * (E - b * k)
        t21 = -4 * a * b**2 + be * c**2 + 4 * b**2 * be * E - 2 * b * c * (k - 1) - 4 * b**3 * be * k
        t22 = -2 * b * be * c * (k - 1)
        return PolyODE(tuple(p2), tuple(p1), (t22, t21, t20), K=4)
    p2 = [0, 4 * b**2 * be * R, 4 * b**2 * (R - be), -4 * b**2]
    p1 = [
        4 * b**2 * be * (k - 1) * R,
        -4 * b * (be * c * R + b * (be + be * k + R - k * R)),
        -4 * b * (b - be * c + b * k + 2 * b**2 * be * R + c * R),
        4 * b * (c + 2 * b**2 * (be - R)),
        8 * b**3,
    ]
    ce = c**2 + 4 * b**2 * E
    t30 = -(4 * b**3 * (2 + k) - ce)
    t31 = -(4 * a * b**2 + 2 * b * c * (1 + k) + ce * (R - be) + 4 * b**3 * (be * (k + 2) - k * R))
    t32 = -(2 * b * (be * c * (1 + k) - 2 * b * (k - 1)) + (be * ce - 4 * a * b**2 - 2 * b * c * (k - 1) - 4 * b**3 * be * k) * R)
    t33 = 2 * b * be * (k - 1) * (2 * b + c * R)
    return PolyODE(tuple(p2), tuple(p1), (t33, t32, t31, t30), K=5)


# ------------------------------------------------------------------ AIM seeds


def _pf(poly: Sequence, poles: Sequence) -> PartialFractions:
    merged = []
    for kappa, pole in poles:
        for i, (k0, p0) in enumerate(merged):
            if p0 == pole:
                merged[i] = (k0 + kappa, p0)
                break
        else:
            merged.append((kappa, pole))
    return PartialFractions(tuple(poly), tuple((k, p) for k, p in merged if k != 0))


def factored_family(b, beta, k) -> tuple:
    """``(a, c)`` for which ``1 + r/beta`` is an exact factor (first-degree solution)."""
    return (2 * b * beta**2 - (k + 1)) / beta, 2 * b / beta


def build_aim_seed(spec: ProblemSpec, variant: str = "generic") -> AimSeed:
    """``(lambda0, s0)`` for ``f''= lambda0 f' + s0 f``; ``s0`` carries ``-E``.

    ``variant="factored"`` divides out the exact factor ``1 + r/beta`` and is
    only available on the one-parameter family returned by
    :func:`factored_family`.
    """
    a, b, c, be, k, R = spec.values()
    zero = a * 0
    if spec.confined:
        if variant != "generic":
            raise InvalidProblem(f"variant {variant!r} is not available in a box")
        lam = _pf([c / b, 2 * b], [(1 - k, zero), (-2 + zero, R)])
        s0 = _pf(
            [b * (2 + k) - c**2 / (4 * b**2)],
            [
                (a, -be),
                ((k - 1) * (2 * b + c * R) / (2 * b * R), zero),
                ((b * (1 - k) + R * (c + 2 * b**2 * R)) / (b * R), R),
            ],
        )
        return AimSeed(lam, s0, -1, "box")
    if variant == "factored":
        if be == 0:
            raise InvalidProblem("the factored seed needs beta > 0")
        fa, fc = factored_family(b, be, k)
        if abs(fa - a) > _loose(a) or abs(fc - c) > _loose(c):
            raise InvalidProblem("parameters are not on the factored family a=(2b beta^2-(k+1))/beta, c=2b/beta")
        lam = _pf([2 / be, 2 * b], [(1 - k, zero), (-2 + zero, -be)])
        s0 = _pf([2 * b + b * k - 1 / be**2], [])
        return AimSeed(lam, s0, -1, "factored")
    if variant != "generic":
        raise InvalidProblem(f"unknown seed variant {variant!r}")
    lam = _pf([c / b, 2 * b], [(1 - k, zero)])
    s0 = _pf([(4 * b**3 * k - c**2) / (4 * b**2)], [(c * (k - 1) / (2 * b), zero), (a, -be)])
    return AimSeed(lam, s0, -1, "pure" if be == 0 else "soft")


def _loose(x):
    if isinstance(x, Fraction):
        return 0
    return mpf(10) ** (-mpmath.mp.dps + 10) * max(1, abs(x))


# ------------------------------------------------------------------ exact solutions


def exact_energy(spec: ProblemSpec, degree: int):
    """Energy singled out by the degree-``degree`` necessary condition."""
    if degree < 0:
        raise UnsupportedDegree("degree must be non-negative")
    _, b, c, _, k, _ = spec.values()
    if spec.confined:
        if degree == 0:
            raise UnsupportedDegree("a box problem has no degree-0 polynomial solution")
        return b * (2 * degree + k + 2) - c**2 / (4 * b**2)
    return b * (2 * degree + k) - c**2 / (4 * b**2)


@dataclass(frozen=True)
class CatalogEntry:
    family: str
    degree: int
    polynomial: Callable  # spec -> coefficient list
    energy: Callable  # spec -> E
    constraints: Callable  # spec -> list of residuals
    names: tuple = field(default=())

    def check(self, spec: ProblemSpec) -> list:
        return self.constraints(spec)


def _params(spec: ProblemSpec) -> dict:
    return dict(zip(("a", "b", "c", "beta", "k", "R"), spec.values()))


def _soft_poly(degree):
    def coeffs(s):
        a, b, c, be, k, _ = s.values()
        out = [1 + a * 0, c / (2 * b)]
        if degree >= 2:
            m = 16 if degree == 2 else 24
            out.append((4 * a * b**2 + be * ((k + 1) * c**2 - m * b**3)) / (8 * b**2 * be * k))
        if degree >= 3:
            out.append(
                (4 * a * b**2 * (3 * be * c * (1 + k) - 4 * b * k) + be**2 * c * (c**2 * (1 + k) * (3 + k) - 8 * b**3 * (9 + 7 * k)))
                / (48 * b**3 * be**2 * k * (1 + k))
            )
        return out

    return coeffs


def _pure_poly(degree):
    def coeffs(s):
        a, b, c, _, k, _ = s.values()
        out = [1 + a * 0]
        if degree >= 1:
            out.append((2 * a * b + (k - 1) * c) / (2 * b * (k - 1)))
        if degree >= 2:
            out.append((16 * b**3 * (1 - k) + 4 * b**2 * a**2 + 4 * k * c * b * a + c**2 * (k**2 - 1)) / (8 * b**2 * k * (k - 1)))
        return out

    return coeffs


def _box_poly(s):
    a, b, c, _, _, R = s.values()
    return [1 + a * 0, c / (2 * b) + 1 / R]


def _catalog():
    from . import constraints as C

    def cons(name):
        return lambda s: C.evaluate(name, _params(s))

    free_energy = lambda n: (lambda s: exact_energy(s, n))
    entries = {}
    for n in (1, 2, 3):
        entries[("soft", n)] = CatalogEntry("soft", n, _soft_poly(n), free_energy(n), cons(f"soft{n}"), C.FAMILIES[f"soft{n}"].names)
    for n in (0, 1, 2):
        entries[("pure", n)] = CatalogEntry("pure", n, _pure_poly(n), free_energy(n), cons(f"case{n + 1}"), C.FAMILIES[f"case{n + 1}"].names)
    entries[("box", 1)] = CatalogEntry("box", 1, _box_poly, lambda s: exact_energy(s, 1), cons("box1"), C.FAMILIES["box1"].names)
    return entries


def exact_solution_catalog(family: str, degree: int) -> CatalogEntry:
    """Closed-form quasi-exact solution of the given family and polynomial degree.

    Families: ``soft`` (beta > 0, degrees 1-3), ``pure`` (beta = 0, degrees
    0-2) and ``box`` (degree 1).
    """
    try:
        return _catalog()[(family, degree)]
    except KeyError:
        raise NotInCatalog(f"no catalog entry for family {family!r}, degree {degree}") from None


def catalog_keys() -> list:
    return sorted(_catalog())


# ------------------------------------------------------------------ Heun


def heun_map(spec: ProblemSpec, E) -> HeunParams:
    """Biconfluent Heun parameters of the ``beta = 0`` problem."""
    if spec.beta != 0 or spec.confined:
        raise RequiresBetaZero("the Heun correspondence needs beta = 0 and no box")
    b = to_mpf(spec.b)
    a, c, E = to_mpf(spec.a), to_mpf(spec.c), to_mpf(as_number(E))
    return HeunParams(
        alpha=spec.k - 2,
        beta_h=c * b ** mpf(-1.5),
        gamma=E / b + c**2 / (4 * b**3),
        delta=2 * a / mpmath.sqrt(b),
    )


# ------------------------------------------------------------------ wavefunctions


def evaluate_wavefunction(spec: ProblemSpec, energy, polynomial: Sequence, r_grid: Sequence) -> list:
    """Samples of the un-normalised ``u(r)`` on ``r_grid``.

    ``energy`` is not needed to evaluate the closed form; it is accepted so
    callers pass a complete eigenpair and is otherwise unused.
    """
    b, c, k = (to_mpf(x) for x in (spec.b, spec.c, spec.k))
    R = to_mpf(spec.R) if spec.confined else None
    coeffs = [to_mpf(x) for x in polynomial]
    out = []
    for r in r_grid:
        r = to_mpf(r)
        if r <= 0 or (R is not None and r > R):
            raise ValueError(f"r = {r} outside the domain")
        pre = r ** ((k - 1) / 2)
        ex = mpmath.exp(-c * r / (2 * b) - b * r**2 / 2)
        f = poly_eval(coeffs, r)
        box = R - r if R is not None else mpf(1)
        out.append(WavefunctionSample(r, pre * ex * f * box, (pre, ex, f, box)))
    return out


def node_count(polynomial: Sequence, upper=None) -> int:
    """Strict sign changes of the polynomial factor on ``(0, upper)``."""
    coeffs = [to_mpf(x) for x in polynomial]
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    if len(coeffs) <= 1:
        return 0
    if upper is None:
        # Cauchy bound on the root moduli
        upper = 1 + max(abs(x / coeffs[-1]) for x in coeffs[:-1])
    upper = to_mpf(upper)
    roots = [x for x in real_roots(coeffs, (0, upper)) if 0 < x < upper]
    pts = [mpf(0)] + roots + [upper]
    signs = []
    for lo, hi in zip(pts, pts[1:]):
        v = poly_eval(coeffs, (lo + hi) / 2)
        if v != 0:
            signs.append(v > 0)
    changes = sum(1 for s, t in zip(signs, signs[1:]) if s != t)
    if len(roots) != changes:
        log.warning("polynomial has %d roots in (0, %s) but %d sign changes", len(roots), upper, changes)
    return changes


# ------------------------------------------------------------------ confinement radius


def radius_for_energy(
    spec: ProblemSpec,
    E_target,
    R_bracket,
    tol=None,
    N_schedule=DEFAULT_SCHEDULE,
    *,
    context: PrecisionContext | None = None,
) -> "RadiusResult":
    """Box radius for which ``E_target`` is an eigenvalue (``r0 = R/2`` throughout)."""
    context = context or PrecisionContext.from_env()
    with context.activate():
        E = to_mpf(as_number(E_target))

        def family(N):
            def f(R):
                s = spec.with_(R=R)
                return DeltaEvaluator(build_aim_seed(s), R / 2)(E, N)

            return f

        tol = context.default_tol if tol is None else to_mpf(tol)
        root, N, history, resid = track_root(family, R_bracket, tol, N_schedule)
        return RadiusResult(root, N, resid, tuple(history), context.digits)


@dataclass(frozen=True)
class RadiusResult:
    R: object
    iterations_N: int
    delta_residual: object
    history: tuple
    digits: int


# ------------------------------------------------------------------ degeneracy and fixtures


def degeneracy_orbit(d: int, ell: int) -> list:
    """All ``(d', ell')`` with ``d' >= 2`` sharing ``k = d + 2 ell``."""
    if d < 2 or ell < 0:
        raise InvalidProblem("need d >= 2 and ell >= 0")
    k = d + 2 * ell
    return [(k - 2 * l, l) for l in range(0, (k - 2) // 2 + 1)]


def intro_model(v, omega, ell: int = 0) -> tuple:
    """``V = v(-(ell+1)/r + omega r) + omega^2 r^2`` in three dimensions.

    Returns the equivalent :class:`ProblemSpec` and its exact ground energy
    ``(3 + 2 ell) omega - v^2/4``.
    """
    v, omega = as_number(v), as_number(omega)
    spec = ProblemSpec(a=-v * (ell + 1), b=omega, c=v * omega, beta=0, d=3, ell=ell)
    return spec, (3 + 2 * ell) * omega - v**2 / 4
