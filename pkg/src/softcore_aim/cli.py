"""Command-line interface: ``softcore-aim <command> --config FILE [overrides]``.

Exit codes: 0 success, 1 the configuration is not an exact solution
(``exact`` only), 2 partial (some levels failed), 3 configuration error,
4 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import mpmath
from mpmath import mpf

from . import __version__
from .aim import find_eigenvalue, scan_spectrum, choose_r0
from .config import RunConfig, load_config, parse_config
from .constraints import root_eq_a, solve_family
from .errors import ConfigError, NoConvergence, NoRootsInRange, NotInCatalog, SoftcoreError
from .models import (
    ProblemSpec,
    build_aim_seed,
    build_ode,
    evaluate_wavefunction,
    exact_energy,
    exact_solution_catalog,
    node_count,
    radius_for_energy,
)
from .aim import DeltaEvaluator
from .polysolve import determinant_conditions, necessary_condition, solve_polynomial
from .precision import PrecisionContext, default_digits, to_decimal, to_mpf
from .tables import SETUPS, format_report, run_table

EXIT_OK, EXIT_NOT_EXACT, EXIT_PARTIAL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3, 4
MANIFEST_SCHEMA = "softcore-aim/run-manifest"
MANIFEST_VERSION = 1

log = logging.getLogger("softcore_aim")


@dataclass
class Outcome:
    header: list
    rows: list = field(default_factory=list)
    code: int = EXIT_OK
    report: str = ""


class Runner:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        digits = cfg.get("digits") or default_digits()
        try:
            self.ctx = PrecisionContext(digits, cfg.get("guard_digits"))
        except ValueError as exc:
            raise ConfigError(str(exc), line=cfg.lines.get("digits"), field="digits") from None

    # -------------------------------------------------------------- helpers
    def num(self, x) -> str:
        return to_decimal(x, self.ctx.digits)

    def exact_or_num(self, x) -> str:
        return str(x) if isinstance(x, Fraction) else self.num(x)

    def schedule(self) -> list:
        lo, step, hi = self.cfg.get("nmin"), self.cfg.get("nstep"), self.cfg.get("nmax")
        if lo < 1 or step < 1 or hi < lo:
            raise ConfigError("need 1 <= nmin <= nmax and nstep >= 1", field="nmax")
        return list(range(lo, hi + 1, step))

    def tol(self):
        t = self.cfg.get("tol")
        return self.ctx.default_tol if t is None else to_mpf(t)

    def specs(self, with_free=None) -> list:
        cfg = self.cfg
        needed = [k for k in ("a", "b", "c") if k != with_free]
        cfg.require(*needed)
        out = []
        for d in cfg.get("d"):
            for ell in cfg.get("ell"):
                vals = {k: cfg.get(k) for k in ("a", "b", "c", "beta", "R")}
                if with_free:
                    vals[with_free] = 1 if with_free != "beta" else 1
                try:
                    out.append(ProblemSpec(vals["a"], vals["b"], vals["c"], vals["beta"], d, ell, vals["R"]))
                except SoftcoreError as exc:
                    raise ConfigError(str(exc)) from None
        return out

    def r0_for(self, spec, E_hint):
        r0 = self.cfg.get("r0")
        if r0 is not None:
            r0 = to_mpf(r0)
            if r0 <= 0 or (spec.confined and r0 >= to_mpf(spec.R)):
                raise ConfigError(f"r0 = {mpmath.nstr(r0, 8)} is outside the radial domain", line=self.cfg.lines.get("r0"), field="r0")
            return r0
        return choose_r0(spec, E_hint)

    def energy_range(self, spec, count):
        lo, hi = self.cfg.get("e_min"), self.cfg.get("e_max")
        if lo is None:
            lo = energy_floor(spec) - 1
        if hi is None:
            b = to_mpf(spec.b)
            hi = to_mpf(lo) + 4 * b * (count + 1) + 10
            if spec.confined:
                hi += (mpmath.pi * (count + spec.ell / 2 + 1) / to_mpf(spec.R)) ** 2 * 2
        return to_mpf(lo), to_mpf(hi)

    # -------------------------------------------------------------- commands
    def solve(self) -> Outcome:
        out = Outcome(["d", "ell", "n", "energy", "N", "r0", "status", "delta_residual"])
        count = self.cfg.get("count")
        if count < 1:
            raise ConfigError("count must be at least 1", line=self.cfg.lines.get("count"), field="count")
        schedule = self.schedule()
        failures = total = 0
        with self.ctx.activate():
            tol = self.tol()
            for spec in self.specs():
                seed = build_aim_seed(spec, self.cfg.get("variant"))
                hint = exact_energy(spec, 1)
                r0 = self.r0_for(spec, hint)
                rng = self.energy_range(spec, count)
                try:
                    res = scan_spectrum(
                        seed, rng, count, r0, tol, schedule, context=self.ctx, grid_per_unit=self.cfg.get("grid_per_unit")
                    )
                except SoftcoreError as exc:
                    log.error("d=%d ell=%d: %s", spec.d, spec.ell, exc)
                    res = []
                for n in range(count):
                    total += 1
                    if n < len(res):
                        r = res[n]
                        if not r.converged:
                            failures += 1
                        resid = "" if r.delta_residual is None else to_decimal(r.delta_residual, 6)
                        energy = "" if r.energy is None else self.num(r.energy)
                        out.rows.append([spec.d, spec.ell, n, energy, r.iterations_N, self.num(r.r0), r.status, resid])
                    else:
                        failures += 1
                        out.rows.append([spec.d, spec.ell, n, "", "", self.num(r0), "missing", ""])
        if failures:
            out.code = EXIT_NUMERIC if failures == total else EXIT_PARTIAL
        return out

    def _exact_candidates(self):
        """Problems (with any free parameter solved) and their catalog entry."""
        cfg = self.cfg
        cfg.require("family", "degree")
        family, degree = cfg.get("family"), cfg.get("degree")
        try:
            entry = exact_solution_catalog(family, degree)
        except NotInCatalog as exc:
            raise ConfigError(str(exc), field="family") from None
        cons_name = {"soft": f"soft{degree}", "pure": f"case{degree + 1}", "box": "box1"}[family]
        free = cfg.get("free")
        params = ("a", "b", "c", "beta", "R")
        missing = [p for p in params if p not in cfg.values and p != "R" and p != "beta"]
        if family == "box" and not cfg.has("R"):
            missing.append("R")
        derived_a = family == "soft" and degree == 2 and not cfg.has("a")
        if derived_a:
            # second-degree family with a tied to (b, c, beta): a = root_eq_a, beta from root_eq
            missing = [p for p in missing if p != "a"]
            cons_name = "root_eq"
            if free is None and "beta" not in cfg.values:
                free = "beta"
        if free is None and missing:
            if len(missing) > 1:
                raise ConfigError(f"more than one parameter missing: {', '.join(missing)}")
            free = missing[0]
        out = []
        for d in cfg.get("d"):
            for ell in cfg.get("ell"):
                fixed = {p: cfg.get(p) for p in params if cfg.has(p) and p != free}
                fixed.pop("R", None) if family != "box" else None
                fixed["k"] = d + 2 * ell
                fixed.setdefault("beta", Fraction(0))
                if derived_a:
                    fixed.pop("a", None)
                roots = [None]
                if free:
                    lo = cfg.get("lo") if cfg.has("lo") else (Fraction(0) if free in ("beta", "R", "b") else Fraction(-100))
                    hi = cfg.get("hi") if cfg.has("hi") else Fraction(100)
                    fam_fixed = {k: v for k, v in fixed.items() if not (derived_a and k == "a")}
                    if free == "beta" and fam_fixed.get("beta") == 0:
                        fam_fixed.pop("beta")
                    try:
                        roots = solve_family(cons_name, fam_fixed, free, (lo, hi), equation=cfg.get("equation"))
                    except NoRootsInRange as exc:
                        log.warning("%s", exc)
                        roots = []
                    roots = [x for x in roots if not (free in ("beta", "R", "b") and x <= 0)]
                for x in roots:
                    vals = dict(fixed)
                    if free:
                        vals[free] = x
                    if derived_a:
                        vals["a"] = root_eq_a(to_mpf(vals["b"]), to_mpf(vals["c"]), to_mpf(vals["beta"]), vals["k"])
                    try:
                        spec = ProblemSpec(vals["a"], vals["b"], vals["c"], vals.get("beta", 0), d, ell, vals.get("R"))
                    except SoftcoreError as exc:
                        log.warning("skipping root %s: %s", x, exc)
                        continue
                    out.append((spec, entry, free, x))
        return out

    def exact(self) -> Outcome:
        out = Outcome(
            ["d", "ell", "family", "degree", "free", "free_value", "energy", "energy_exact", "polynomial",
             "constraint_residual", "determinant_residual", "recurrence_residual", "aim_residual", "exact"]
        )
        with self.ctx.activate():
            cands = self._exact_candidates()
            if not cands:
                out.code = EXIT_NUMERIC
                return out
            limit = mpf(10) ** (-self.ctx.digits + 15)
            all_exact = True
            for spec, entry, free, x in cands:
                E = entry.energy(spec)
                cons = max(abs(to_mpf(v)) for v in entry.check(spec))
                ode = build_ode(spec, E)
                dets = determinant_conditions(ode, entry.degree)
                det_res = max((abs(to_mpf(v)) for v in dets.scaled), default=mpf(0))
                poly = entry.polynomial(spec)
                try:
                    rec_res = to_mpf(solve_polynomial(ode, entry.degree).residual)
                except SoftcoreError:
                    rec_res = mpf("inf")
                r0 = self.r0_for(spec, E)
                ev = DeltaEvaluator(build_aim_seed(spec), r0)
                seq = ev.sequence(to_mpf(E), entry.degree + 4)
                aim_res = max(abs(v) for v in seq[entry.degree:])
                scale = max(1, max(abs(to_mpf(v)) for v in (spec.a, spec.b, spec.c)))
                ok = cons <= limit * scale**6 and det_res <= limit and rec_res <= limit * scale**6 and aim_res <= limit
                all_exact &= ok
                out.rows.append([
                    spec.d, spec.ell, entry.family, entry.degree, free or "", "" if x is None else self.num(x),
                    self.num(E), str(E) if isinstance(E, Fraction) else "",
                    " ".join(self.exact_or_num(c) for c in poly),
                    to_decimal(cons, 6), to_decimal(det_res, 6), to_decimal(rec_res, 6), to_decimal(aim_res, 6),
                    "yes" if ok else "no",
                ])
            if not all_exact:
                out.code = EXIT_NOT_EXACT
        return out

    def constraints(self) -> Outcome:
        cfg = self.cfg
        cfg.require("family", "free", "lo", "hi")
        out = Outcome(["family", "free", "root", "residual"])
        free = cfg.get("free")
        with self.ctx.activate():
            fixed = {p: cfg.get(p) for p in ("a", "b", "c", "beta", "R") if cfg.has(p) and p != free}
            if free != "beta" and "beta" not in cfg.values:
                fixed.pop("beta", None)
            rows = []
            for d in cfg.get("d"):
                for ell in cfg.get("ell"):
                    fx = dict(fixed, k=d + 2 * ell)
                    try:
                        roots = solve_family(cfg.get("family"), fx, free, (cfg.get("lo"), cfg.get("hi")), equation=cfg.get("equation"))
                    except NotInCatalog as exc:
                        raise ConfigError(str(exc), field="family") from None
                    except NoRootsInRange:
                        roots = []
                    from .constraints import evaluate

                    for x in roots:
                        res = max(abs(to_mpf(v)) for v in evaluate(cfg.get("family"), dict(fx, **{free: x})))
                        rows.append([cfg.get("family"), free, self.num(x), to_decimal(res, 6)])
            out.rows = rows
            if not rows:
                out.code = EXIT_NUMERIC
        return out

    def wavefunction(self) -> Outcome:
        out = Outcome(["r", "u", "polynomial"])
        with self.ctx.activate():
            cands = self._exact_candidates()
            idx = self.cfg.get("root_index")
            if not cands or idx >= len(cands):
                out.code = EXIT_NUMERIC
                return out
            spec, entry, _, _ = cands[idx]
            poly = entry.polynomial(spec)
            E = entry.energy(spec)
            r_min, r_max, step = (to_mpf(self.cfg.get(k)) for k in ("r_min", "r_max", "r_step"))
            if spec.confined:
                r_max = min(r_max, to_mpf(spec.R))
            if r_min <= 0 or step <= 0 or r_max < r_min:
                raise ConfigError("wavefunction grid must satisfy 0 < r_min <= r_max and r_step > 0", field="r_min")
            n = int(mpmath.floor((r_max - r_min) / step + mpf("1e-9")))
            grid = [r_min + i * step for i in range(n + 1)]
            if spec.confined and grid[-1] != r_max:
                grid.append(r_max)
            samples = evaluate_wavefunction(spec, E, poly, grid)
            for s in samples:
                out.rows.append([self.num(s.r), self.num(s.u), self.num(s.parts[2])])
            nodes = node_count(poly, spec.R if spec.confined else None)
            out.report = f"energy {self.exact_or_num(E)}; polynomial nodes {nodes}"
        return out

    def radius(self) -> Outcome:
        cfg = self.cfg
        cfg.require("energy", "r_lo", "r_hi")
        out = Outcome(["energy", "R", "N", "forward_energy", "forward_residual"])
        with self.ctx.activate():
            E = to_mpf(cfg.get("energy"))
            for spec in self.specs():
                base = spec.with_(R=None)
                res = radius_for_energy(base, E, (cfg.get("r_lo"), cfg.get("r_hi")), self.tol(), self.schedule(), context=self.ctx)
                boxed = base.with_(R=res.R)
                w = abs(E) / 20 + mpf("0.1")
                fwd = find_eigenvalue(build_aim_seed(boxed), (E - w, E + w), res.R / 2, self.tol(), self.schedule(), context=self.ctx)
                out.rows.append([self.num(E), self.num(res.R), res.iterations_N, self.num(fwd.energy), to_decimal(abs(fwd.energy - E), 6)])
        return out

    def table(self, table_id=None) -> Outcome:
        tid = table_id or self.cfg.get("table")
        if tid not in SETUPS:
            raise ConfigError(f"unknown table {tid!r}; choose one of {', '.join(SETUPS)}", field="table")
        digits = self.cfg.get("digits")
        rep = run_table(tid, digits)
        out = Outcome(["table", "entry", "computed", "published", "deviation", "N", "status", "ok", "note"])
        for r in rep.rows:
            comp = "" if r.computed is None else (str(r.computed) if isinstance(r.computed, Fraction) else to_decimal(r.computed, rep.digits))
            dev = "" if r.deviation is None else (str(r.deviation) if isinstance(r.deviation, Fraction) else to_decimal(r.deviation, 6))
            out.rows.append([tid, r.label, comp, r.published, dev, r.N or "", r.status, "yes" if r.ok else "no", r.note])
        out.report = format_report(rep)
        out.code = EXIT_OK if rep.passed else EXIT_PARTIAL
        return out


def energy_floor(spec: ProblemSpec):
    """A lower bound for the spectrum used as the default bottom of the scan."""
    a, b, c, beta = (to_mpf(x) for x in (spec.a, spec.b, spec.c, spec.beta))
    k = spec.k
    floor_lin = -c**2 / (4 * b**2) if c < 0 else mpf(0)
    if a >= 0:
        coul = mpf(0)
    elif beta > 0:
        coul = a / beta
    else:
        coul = -(a**2) / (k - 1) ** 2 if k > 1 else -mpf(10) ** 6
    return coul + floor_lin


def _write_csv(outcome: Outcome) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(outcome.header)
    for row in outcome.rows:
        w.writerow(row)
    return buf.getvalue()


def _manifest(command: str, cfg: RunConfig, outcome: Outcome, digits: int, seconds: float) -> dict:
    return {
        "schema": MANIFEST_SCHEMA,
        "schema_version": MANIFEST_VERSION,
        "artifact_version": __version__,
        "command": command,
        "digits": digits,
        "config": cfg.resolved(),
        "exit_code": outcome.code,
        "columns": outcome.header,
        "results": [dict(zip(outcome.header, (str(v) for v in row))) for row in outcome.rows],
        "report": outcome.report,
        "wall_time_s": round(seconds, 3),
    }


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="softcore-aim", description="Spectra and exact solutions of softcore Coulomb problems.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("solve", "exact", "constraints", "wavefunction", "radius", "table"):
        sp = sub.add_parser(name)
        if name == "table":
            sp.add_argument("table_id", nargs="?", help="I..VII")
        sp.add_argument("--config", help="key = value configuration file (or a JSON manifest)")
        sp.add_argument("--digits", type=int)
        sp.add_argument("--r0")
        sp.add_argument("--nmax", type=int)
        sp.add_argument("--out")
        sp.add_argument("--format", choices=("csv", "json"))
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override any config key")
        sp.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    start = time.perf_counter()
    try:
        cfg = load_config(args.config) if args.config else parse_config("")
        for key, val in (("digits", args.digits), ("r0", args.r0), ("nmax", args.nmax), ("out", args.out), ("format", args.format)):
            if val is not None:
                cfg.set(key, val)
        for item in args.set:
            if "=" not in item:
                raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
            k, v = item.split("=", 1)
            cfg.set(k.strip(), v.strip())
        mode = cfg.raw("mode")
        if mode is not None and mode != args.command:
            raise ConfigError(f"config mode {mode!r} does not match command {args.command!r}", field="mode")
        cfg.values["mode"] = args.command
        runner = Runner(cfg)
        if args.command == "table":
            outcome = runner.table(args.table_id)
        else:
            outcome = getattr(runner, args.command)()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SoftcoreError, ZeroDivisionError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    seconds = time.perf_counter() - start
    fmt = cfg.get("format")
    text = _write_csv(outcome) if fmt == "csv" else json.dumps(_manifest(args.command, cfg, outcome, runner.ctx.digits, seconds), indent=2) + "\n"
    out = cfg.get("out")
    if out:
        Path(out).write_text(text)
        if outcome.report:
            print(outcome.report)
    else:
        if outcome.report and fmt == "csv" and args.command == "table":
            print(outcome.report)
        else:
            sys.stdout.write(text)
            if outcome.report:
                print(outcome.report, file=sys.stderr)
    return outcome.code


if __name__ == "__main__":
    sys.exit(main())
