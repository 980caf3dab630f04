"""Acceptance criteria, one test per criterion.

Each check returns ``(passed, detail)``; the verdicts are collected in
``RESULTS`` and printed one line per criterion at the end of the session
(see ``conftest.py``).  Run the module directly to print them without pytest.
"""
from __future__ import annotations

import functools
import sys
import time
from fractions import Fraction as F

import mpmath
import pytest
from mpmath import mpf

from softcore_aim import (
    PrecisionContext,
    ProblemSpec,
    build_aim_seed,
    degeneracy_orbit,
    exact_energy,
    find_eigenvalue,
    radius_for_energy,
)
from softcore_aim.constraints import solve_family
from softcore_aim.precision import to_mpf
from softcore_aim.tables import SETUPS, TABLE_II, TABLE_III, TABLE_VI, run_table

from test_properties import (
    FD_SPECS,
    check_fd_agreement,
    check_recurrence_determinant,
    check_series_kernel,
    check_termination,
)

RESULTS = {}


@functools.lru_cache(maxsize=None)
def report(table_id, extra_digits=0):
    return run_table(table_id, SETUPS[table_id].digits + extra_digits)


def _e(x):
    return mpmath.nstr(to_mpf(x), 3)


def _table(table_id):
    rep = report(table_id)
    bad = [r.label for r in rep.rows if not r.ok]
    detail = f"{len(rep.rows)} rows, max |dev| {_e(rep.max_deviation)} (< {SETUPS[table_id].accept}), {rep.seconds:.1f} s"
    if bad:
        detail += f"; outside: {', '.join(bad)}"
    return rep, not bad, detail


def crit_1():
    rep, ok, detail = _table("I")
    ok = ok and len(rep.rows) == 12 and rep.seconds < 60
    return ok, detail


def _chain(d, ell):
    # members printed next to E_{0 ell}^{d}
    return [(d - 2, ell + 1)] + [(d + 2 + 2 * j, ell - 1 - j) for j in range(ell)]


def crit_2():
    rep, ok, detail = _table("II")
    broken = []
    for d, vals in TABLE_II.items():
        for ell in range(len(vals)):
            members = _chain(d, ell)
            if not set(members) <= set(degeneracy_orbit(d, ell)):
                broken.append((d, ell))
                continue
            seeds = {build_aim_seed(ProblemSpec(1, 1, 1, 1, dd, ll)).structure() for dd, ll in [(d, ell)] + members}
            if len(seeds) != 1:
                broken.append((d, ell))
    detail += f"; degeneracy chains with identical seeds: {12 - len(broken)}/12"
    return ok and len(rep.rows) == 12 and not broken, detail


def crit_3():
    rep, ok, detail = _table("III")
    exact_ok = 0
    for d, (c, vals) in TABLE_III.items():
        spec = ProblemSpec(1, 1, F(c), 0, d, 0)
        E = exact_energy(spec, 0)
        row = next(r for r in rep.rows if r.label == f"E_00 d={d}")
        if E == spec.b * spec.k - spec.c**2 / (4 * spec.b**2) and abs(to_mpf(E) - mpf(vals[0])) < mpf("1e-18") and row.ok:
            exact_ok += 1
    detail += f"; exact N=3 rows: {exact_ok}/4"
    return ok and len(rep.rows) == 28 and exact_ok == 4 and report("III").digits >= 40, detail


def crit_4():
    rep, ok, detail = _table("IV")
    flagged = [r for r in rep.rows if "earlier reference" in r.note]
    detail += f"; rows where the earlier reference disagrees, matched: {sum(r.ok for r in flagged)}/{len(flagged)}"
    return ok and len(rep.rows) == 8 and len(flagged) == 2, detail


def crit_5():
    rep, ok, detail = _table("V")
    return ok and len(rep.rows) == 4, detail


def crit_6():
    rep = report("VI")
    exact = [r for r in rep.rows if r.computed == F(r.published)]
    worst = max(to_mpf(r.extra["constraint_residual"]) for r in rep.rows)
    ok = len(rep.rows) == 6 and len(exact) == 6 and worst < mpf(10) ** -30 and rep.passed
    return ok, f"exact rationals {len(exact)}/6 ({', '.join(str(r.computed) for r in rep.rows)}), max constraint residual {_e(worst)}"


def crit_7():
    rep, ok, detail = _table("VII")
    notes = [f"{r.label}: {r.note}" for r in rep.rows if r.note]
    if notes:
        detail += "; " + "; ".join(notes)
    return ok and len(rep.rows) == 16, detail


def crit_8():
    expected = ["0.7602375195232495", "3.8540719170773636"]
    with mpmath.workdps(40):
        roots = solve_family("root_eq", {"b": 1, "c": 1, "k": 4}, "beta", (F(1, 10**6), 10**4))
        ok = len(roots) == 2
        for x, ref in zip(roots, expected):
            unit = mpf(10) ** (mpmath.floor(mpmath.log10(mpf(ref))) - 15)
            ok = ok and abs(to_mpf(x) - mpf(ref)) <= unit
        shown = ", ".join(mpmath.nstr(to_mpf(x), 20) for x in roots)
    return ok, f"positive roots {shown} vs {', '.join(expected)} (one unit in the 16th digit)"


def crit_9():
    ctx = PrecisionContext(40)
    spec = ProblemSpec(1, 1, -1, 1, 3, 0)
    out, ok = [], True
    for E, ref in ((9, "1.074414209270221205"), (10, "1.016954256339063400")):
        res = radius_for_energy(spec, E, (F(1, 2), 2), mpf(10) ** -25, context=ctx)
        with ctx.activate():
            box = ProblemSpec(1, 1, -1, 1, 3, 0, R=res.R)
            fwd = find_eigenvalue(build_aim_seed(box), (E - 1, E + 1), res.R / 2, mpf(10) ** -25, context=ctx)
            dev = abs(res.R - mpf(ref))
            back = abs(fwd.energy - E)
        ok = ok and dev < mpf("1e-18") and back < mpf("1e-18") and fwd.status == "converged"
        out.append(f"E={E}: R={mpmath.nstr(res.R, 22)} (|dR| {_e(dev)}, forward |dE| {_e(back)})")
    return ok, "; ".join(out)


def crit_10a():
    worst = check_termination()
    return worst < mpf(10) ** -30, f"max |delta_N| over catalog solutions at three r0 values {_e(worst)}"


def crit_10b():
    stats = check_recurrence_determinant(per_degree=100)
    ok = all(agree == total and total >= 100 for agree, total, _ in stats.values())
    parts = [f"deg {d}: {a}/{t} agree ({p} planted)" for d, (a, t, p) in sorted(stats.items())]
    return ok and sorted(stats) == [0, 1, 2, 3, 4], "; ".join(parts)


def crit_10c():
    worst, used, skipped = check_fd_agreement(FD_SPECS)
    detail = f"{used} specs x 2 levels, max |E_aim - E_fd| {worst:.2e}"
    if skipped:
        detail += f"; {len(skipped)} specs left out because AIM reported them unconverged"
    return used >= 10 and worst < 1e-8, detail


def crit_10d():
    parts, ok = [], True
    for table_id, setup in SETUPS.items():
        lo, hi = report(table_id), report(table_id, 10)
        if setup.exact:
            same = all(a.computed == b.computed for a, b in zip(lo.rows, hi.rows))
            ok = ok and same and len(lo.rows) == len(hi.rows)
            parts.append(f"{table_id}: {'identical' if same else 'DIFFERENT'}")
            continue
        diffs = [abs(to_mpf(a.computed) - to_mpf(b.computed)) for a, b in zip(lo.rows, hi.rows)]
        worst = max(diffs)
        ok = ok and len(diffs) == len(lo.rows) == len(hi.rows) and worst < mpf(setup.accept)
        parts.append(f"{table_id}: {_e(worst)}")
    return ok, "max |E(digits) - E(digits+10)| " + ", ".join(parts)


def crit_10e():
    ok = check_series_kernel(trials=200)
    return ok, "200 randomized Leibniz and rational round-trip cases in exact arithmetic" + ("" if ok else ", mismatch found")


CRITERIA = {
    "1 Table I": crit_1,
    "2 Table II": crit_2,
    "3 Table III": crit_3,
    "4 Table IV": crit_4,
    "5 Table V": crit_5,
    "6 Table VI": crit_6,
    "7 Table VII": crit_7,
    "8 constraint roots": crit_8,
    "9 inverse radius": crit_9,
    "10a polynomial termination": crit_10a,
    "10b determinants vs recurrence": crit_10b,
    "10c finite-difference oracle": crit_10c,
    "10d precision scaling": crit_10d,
    "10e series kernel": crit_10e,
}


def verdict(name):
    start = time.perf_counter()
    ok, detail = CRITERIA[name]()
    RESULTS[name] = (ok, f"{'PASS' if ok else 'FAIL'}  {name}: {detail} [{time.perf_counter() - start:.1f} s]")
    return ok, RESULTS[name][1]


@pytest.mark.parametrize("name", list(CRITERIA))
def test_criterion(name):
    ok, line = verdict(name)
    print(line)
    assert ok, line


if __name__ == "__main__":
    for name in CRITERIA:
        print(verdict(name)[1], flush=True)
    sys.exit(0 if all(ok for ok, _ in RESULTS.values()) else 1)
