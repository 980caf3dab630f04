import random
from fractions import Fraction as F

import pytest
import sympy as sp

from oracles import coeffs, polynomial_ode, undetermined
from softcore_aim.errors import DegenerateLeadingCoefficients, LeadingCoefficientVanishes, UnsupportedDegree
from softcore_aim.models import ProblemSpec, build_ode, exact_energy
from softcore_aim.polysolve import (
    PolyODE,
    build_recurrence,
    det,
    determinant_conditions,
    necessary_condition,
    solve_polynomial,
    substitution_residual,
)


def _sym(x):
    return sp.Rational(x.numerator, x.denominator) if isinstance(x, F) else sp.Integer(x)


def _matches_oracle(spec, E):
    ode = build_ode(spec, E)
    P2, P1, P0 = polynomial_ode(spec.a, spec.b, spec.c, spec.beta, spec.k, E, spec.R)
    n = ode.K + 1
    ours = [[_sym(x) for x in ode.p2], [_sym(x) for x in ode.p1] + [0], [-_sym(x) for x in ode.p0] + [0, 0]]
    ref = [coeffs(P, n) for P in (P2, P1, P0)]
    for sign in (1, -1):
        if all(sp.simplify(o - sign * q) == 0 for row_o, row_r in zip(ours, ref) for o, q in zip(row_o, row_r)):
            return True
    return False


@pytest.mark.parametrize(
    "spec,E",
    [
        (ProblemSpec(F(3, 2), 2, -1, F(1, 3), 3, 1), F(17, 5)),
        (ProblemSpec(-2, 1, 3, 0, 4, 0), F(-7, 2)),
        (ProblemSpec(F(1, 2), F(3, 4), F(-2, 7), F(5, 2), 2, 2, R=F(9, 4)), F(11, 3)),
    ],
)
def test_ode_coefficients_match_symbolic_derivation(spec, E):
    assert _matches_oracle(spec, E)


@pytest.mark.parametrize("degree", [0, 1, 2])
def test_pure_defects_match_symbolic(degree):
    # beta = 0: one constraint at each degree; the recurrence defect must be the
    # oracle's defect up to a factor free of a.
    spec = ProblemSpec(F(-5, 3), F(3, 2), F(2, 5), 0, 3, 1)
    E = exact_energy(spec, degree)
    a = sp.Symbol("a")
    P2, P1, P0 = polynomial_ode(a, spec.b, spec.c, 0, spec.k, E)
    _, ref = undetermined(P2, P1, P0, degree)
    assert len(ref) == 1
    root = sp.solve(ref[0], a)
    trials = [F(7, 2), F(1, 9)] + [F(int(sp.numer(x)), int(sp.denom(x))) for x in root if x.is_Rational]
    for trial in trials:
        sol = solve_polynomial(build_ode(spec.with_(a=trial), E), degree)
        assert (sol.residual == 0) == (ref[0].subs(a, _sym(trial)) == 0)


def test_polynomial_matches_undetermined_coefficients():
    # first-degree soft solution on the factored family (b = beta = 1, k = 4)
    spec = ProblemSpec(-3, 1, 2, 1, 4, 0)
    E = exact_energy(spec, 1)
    assert E == 5
    sol = solve_polynomial(build_ode(spec, E), 1)
    assert sol.residual == 0
    P2, P1, P0 = polynomial_ode(-3, 1, 2, 1, 4, E)
    cs, defects = undetermined(P2, P1, P0, 1)
    assert defects == []
    assert list(sol.coeffs) == [1, F(cs[0].p, cs[0].q)]
    assert all(x == 0 for x in substitution_residual(build_ode(spec, E), sol))


def test_box_table_entry_is_exact():
    spec = ProblemSpec(F(55, 63), F(47, 252), F(-47, 1512), 4, 3, 0, R=3)
    E = exact_energy(spec, 1)
    assert E == F(187, 144)
    ode = build_ode(spec, E)
    assert build_recurrence(ode).bandwidth == 5
    cond = determinant_conditions(ode, 1)
    assert len(cond.residuals) == 3 and all(x == 0 for x in cond.residuals)
    sol = solve_polynomial(ode, 1)
    assert sol.residual == 0
    assert sol.coeffs[1] == spec.c / (2 * spec.b) + F(1, 3)


def test_band_structure_and_counts():
    free = build_ode(ProblemSpec(1, 1, 1, 1, 3, 0), F(7))
    pure = build_ode(ProblemSpec(1, 1, 1, 0, 3, 0), F(7))
    assert build_recurrence(free).bandwidth == 4
    assert len(determinant_conditions(free, 2).residuals) == 2
    assert len(determinant_conditions(pure, 2).residuals) == 1


def test_necessary_condition_is_the_energy_quantisation():
    spec = ProblemSpec(F(2), F(5, 3), F(-1, 2), F(1, 4), 5, 0)
    for n in range(4):
        assert necessary_condition(build_ode(spec, exact_energy(spec, n)), n) == 0
        assert necessary_condition(build_ode(spec, exact_energy(spec, n) + 1), n) != 0


def test_errors():
    with pytest.raises(DegenerateLeadingCoefficients):
        necessary_condition(PolyODE((0, 1), (1,), (0,), K=4), 1)
    with pytest.raises(UnsupportedDegree):
        solve_polynomial(build_ode(ProblemSpec(1, 1, 1, 1, 3, 0), F(5)), 11)
    # c_1 = 0 identically: a = -(k-1)c/(2b) makes the linear term vanish at beta = 0
    spec = ProblemSpec(-1, 1, 1, 0, 3, 0)
    ode = build_ode(spec, exact_energy(spec, 1))
    with pytest.raises(LeadingCoefficientVanishes):
        solve_polynomial(ode, 1)


def test_det_against_sympy():
    rng = random.Random(4)
    for n in range(1, 6):
        m = [[F(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(n)] for _ in range(n)]
        ref = sp.Matrix([[_sym(x) for x in row] for row in m]).det()
        assert det(m) == F(int(sp.numer(ref)), int(sp.denom(ref)))
