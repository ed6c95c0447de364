"""Command-line entry point: verification campaigns with machine-readable reports.

Exit codes: 0 pass, 1 usage error, 2 verification failure, 3 suspected misprint.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import algebra, fd, report
from .jet import VectorField, check_symmetry
from .model import CASES, PARAM_NAMES, ModelParams, ParamError
from .solutions import CASE_IDS, get_spec
from .solutions.verify import TOLERANCES, build_solution, verify_case
from . import expr as E

EXIT_PASS, EXIT_USAGE, EXIT_FAIL, EXIT_MISPRINT = 0, 1, 2, 3
FORMATS = ("json", "csv", "text")
INJECTIONS = {"y-dy": lambda: VectorField(E.ZERO, E.ZERO, E.var("y"), E.ZERO, name="Y(y d/dy)")}
PARAM_FILE_KEYS = set(PARAM_NAMES) | {"case_params", "constants"}
SYMMETRY_TOL = {"zero_test_rel": 1e-9, "trials": 200}
BRACKET_TOL = {"zero_test_rel": 1e-9, "trials": 200, "random_draws": 5, "jacobi_triples": 20}
CONVERGE_BAND = 0.2
CSV_SAMPLES = 50


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    cases: list
    params: dict = field(default_factory=dict)
    case_params: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)
    seed: int = 42
    out: Path | None = None
    fmt: str = "json"
    inject: str | None = None
    scheme: str = "adi"
    stencil: str = "central"
    levels: tuple = fd.DEFAULT_LADDER
    expect_order: float = 2.0

    def model_params(self, case: str) -> ModelParams:
        return ModelParams.for_case(case, **self.params)


def _load_params(path) -> tuple:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as err:
        raise UsageError(f"cannot read parameter file {path}: {err}") from err
    if not isinstance(data, dict):
        raise UsageError("parameter file must hold a JSON object")
    unknown = set(data) - PARAM_FILE_KEYS
    if unknown:
        raise UsageError(f"unknown parameter keys: {sorted(unknown)}")
    model = {k: v for k, v in data.items() if k in PARAM_NAMES}
    for k, v in model.items():
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise UsageError(f"parameter {k} must be a number")
    return model, dict(data.get("case_params", {})), dict(data.get("constants", {}))


def _parse_levels(text: str) -> tuple:
    try:
        levels = tuple(tuple(int(n) for n in lvl.split("x")) for lvl in text.split(","))
    except ValueError as err:
        raise UsageError(f"bad --levels {text!r}; expected e.g. 21x21x20,41x41x40,81x81x80") from err
    if len(levels) < 3 or any(len(l) != 3 for l in levels):
        raise UsageError("--levels needs at least three NXxNYxNT entries")
    return levels


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _pmap(fn, items):
    """Run independent cases concurrently; results keep the input order."""
    items = list(items)
    if len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=min(4, len(items))) as pool:
        return list(pool.map(fn, items))


def cmd_verify_symmetries(cfg: RunConfig):
    def run(case):
        p = cfg.model_params(case)
        cat = algebra.generators(case)
        fields = list(cat.fields)
        if cfg.inject:
            fields.append(INJECTIONS[cfg.inject]())
        gens = [check_symmetry(X, p, seed=cfg.seed).as_dict() for X in fields]
        extras = [check_symmetry(X.with_name(n), p, seed=cfg.seed).as_dict()
                  for n, X in sorted(cat.extras.items())]
        return {"case": case, "params": p.as_dict(), "generators": gens, "extras": extras}

    results = _pmap(run, cfg.cases)
    failing = [f"{r['case']}:{g['field']}" for r in results for g in r["generators"] + r["extras"]
               if not g["passed"]]
    rep = report.envelope(cfg.command, {r["case"]: r["params"] for r in results}, cfg.seed,
                          SYMMETRY_TOL, {"cases": results, "failing": failing}, not failing)
    lines = []
    for r in results:
        for g in r["generators"] + r["extras"]:
            lines.append(f"{r['case']:7s} {g['field']:12s} {'pass' if g['passed'] else 'FAIL'}"
                         f"  max_rel={g['max_residual']:.3g}")
    rows = [(r["case"], g["field"], g["passed"], g["max_residual"])
            for r in results for g in r["generators"] + r["extras"]]
    csv = report.csv_text(("case", "field", "passed", "max_residual"), rows)
    return rep, "\n".join(lines) + "\n", csv, EXIT_PASS if not failing else EXIT_FAIL


def cmd_brackets(cfg: RunConfig):
    def run(case):
        tab = algebra.verify_bracket_table(case, seed=cfg.seed)
        jac = algebra.jacobi_check(case, seed=cfg.seed)
        d = tab.as_dict()
        d["jacobi"] = [{"triple": [i, j, k], "passed": ok, "max_residual": res}
                       for i, j, k, ok, res in jac]
        d["jacobi_passed"] = all(t[3] for t in jac)
        d["params"] = ModelParams.for_case(case).as_dict()
        return d, algebra.render_table(case, tab)

    out = _pmap(run, cfg.cases)
    results = [d for d, _ in out]
    failing = [f"{d['case']}:[X{c['cell'][0]},X{c['cell'][1]}]" for d in results
               for c in d["cells"] if not c["passed"]]
    failing += [f"{d['case']}:jacobi" for d in results if not d["jacobi_passed"]]
    rep = report.envelope(cfg.command, {d["case"]: d["params"] for d in results}, cfg.seed,
                          BRACKET_TOL, {"tables": results, "failing": failing}, not failing)
    text = []
    for d, table in out:
        text.append(f"case {d['case']}  ({'pass' if d['passed'] else 'FAIL'}; "
                    f"jacobi {'pass' if d['jacobi_passed'] else 'FAIL'})")
        text.append(table)
        for c in d["cells"]:
            if not c["passed"]:
                text.append(f"  mismatch [X{c['cell'][0]},X{c['cell'][1]}]: stated {c['stated']}; "
                            f"computed components {c['computed']}")
        text.append("")
    rows = [(d["case"], c["cell"][0], c["cell"][1], c["passed"], c["exact"], c["max_residual"])
            for d in results for c in d["cells"]]
    csv = report.csv_text(("case", "i", "j", "passed", "exact", "max_residual"), rows)
    return rep, "\n".join(text), csv, EXIT_PASS if not failing else EXIT_FAIL


def _split_overrides(cfg: RunConfig, case_id: str) -> tuple:
    spec = get_spec(case_id)
    cp = {k: v for k, v in cfg.case_params.items() if k in spec.free_params}
    cs = {k: v for k, v in cfg.constants.items() if k in spec.constants}
    return spec, cp, cs


def _samples(case_id: str, cfg: RunConfig) -> list:
    spec, cp, cs = _split_overrides(cfg, case_id)
    sol = build_solution(case_id, cfg.model_params(spec.family), cp, cs)
    rng = np.random.default_rng(cfg.seed)
    pts = {n: rng.uniform(*sol.box[n], CSV_SAMPLES) for n in ("t", "x", "y")}
    u = np.asarray(sol.evaluate(pts["t"], pts["x"], pts["y"]), dtype=complex)
    return [(case_id, pts["t"][i], pts["x"][i], pts["y"][i], u[i].real, u[i].imag)
            for i in range(CSV_SAMPLES)]


def cmd_solutions(cfg: RunConfig):
    known = set()
    for cid in cfg.cases:
        spec = get_spec(cid)
        known |= set(spec.free_params) | set(spec.constants)
    stray = (set(cfg.case_params) | set(cfg.constants)) - known
    if stray:
        raise UsageError(f"case parameters not used by the selected cases: {sorted(stray)}")

    def run(cid):
        spec, cp, cs = _split_overrides(cfg, cid)
        try:
            p = cfg.model_params(spec.family)
        except ParamError as err:
            raise UsageError(str(err)) from err
        return verify_case(cid, p, cp, cs, seed=cfg.seed).as_dict()

    results = _pmap(run, cfg.cases)
    failed = [r["case"] for r in results if r["status"] == "failed"]
    flagged = [r["case"] for r in results if r["status"] == "suspected-misprint"]
    status = "fail" if failed else ("suspected-misprint" if flagged else "pass")
    params = {fam: cfg.model_params(fam).as_dict()
              for fam in sorted({get_spec(c).family for c in cfg.cases})}
    summary = {"verified": [r["case"] for r in results if r["status"] == "verified"],
               "suspected_misprint": flagged, "failed": failed}
    rep = report.envelope(cfg.command, params, cfg.seed, TOLERANCES,
                          {"cases": results, "summary": summary}, not failed and not flagged,
                          status)
    lines = []
    for r in results:
        tiers = r.get("tiers", {})
        bits = []
        for name in ("reduction", "ansatz_consistency", "closed_form_ode", "full_pde"):
            t = tiers.get(name)
            if t is None:
                continue
            if not t.get("applicable", True):
                bits.append(f"{name}=n/a")
            else:
                bits.append(f"{name}={'ok' if t['passed'] else 'x'}")
        extra = f" implicated={','.join(r['implicated'])}" if r["implicated"] else ""
        lines.append(f"{r['case']:6s} {r['status']:18s} {' '.join(bits)}{extra}")
    rows = []
    for cid in cfg.cases:
        if cid in failed:
            continue
        rows.extend(_samples(cid, cfg))
    csv = report.csv_text(("case", "t", "x", "y", "u", "u_imag"), rows)
    code = EXIT_FAIL if failed else (EXIT_MISPRINT if flagged else EXIT_PASS)
    return rep, "\n".join(lines) + "\n", csv, code


def cmd_converge(cfg: RunConfig):
    def run(case):
        fam = get_spec(case).family if case in CASE_IDS else "const"
        p = cfg.model_params(fam)
        kw = {}
        if case in CASE_IDS:
            spec, cp, cs = _split_overrides(cfg, case)
            kw = {"case_params": cp, "constants": cs}
        rep = fd.convergence_order(case, p, levels=cfg.levels, scheme=cfg.scheme,
                                   x_stencil=cfg.stencil, **kw)
        d = rep.as_dict()
        lo, hi = cfg.expect_order - CONVERGE_BAND, cfg.expect_order + CONVERGE_BAND
        d["passed"] = bool(rep.exact or (rep.orders is not None
                                         and all(lo <= o <= hi for o in rep.orders)))
        d["params"] = p.as_dict()
        return d, (case, p, kw)

    out = _pmap(run, cfg.cases)
    results = [d for d, _ in out]
    failing = [d["case"] for d in results if not d["passed"]]
    tol = {"exact": 1e-10, "order_band": [cfg.expect_order - CONVERGE_BAND,
                                          cfg.expect_order + CONVERGE_BAND]}
    rep = report.envelope(cfg.command, {d["case"]: d["params"] for d in results}, cfg.seed,
                          tol, {"ladders": results, "failing": failing}, not failing)
    lines = []
    for d in results:
        orders = "exact" if d["exact"] else (
            "non-monotone" if d["orders"] is None else ", ".join(f"{o:.3f}" for o in d["orders"]))
        lines.append(f"{d['case']:6s} {'pass' if d['passed'] else 'FAIL'}  errors="
                     f"{', '.join(f'{e:.3e}' for e in d['errors'])}  orders={orders}")
    rows = []
    for _, (case, p, kw) in (out if cfg.fmt == "csv" else []):
        # the finest level is re-solved only when the grid values are requested
        nx, ny, nt = cfg.levels[-1]
        grid = fd.GridSpec(nx=nx, ny=ny, nt=nt, y_range=(p.m + 0.2, p.m + 1.5),
                           scheme=cfg.scheme, x_stencil=cfg.stencil)
        u = fd.manufactured(case, p, **kw)
        sol = fd.solve(p, grid, lambda X, Y: u(grid.t_range[1], X, Y), u, case_id=case)
        X, Y = np.meshgrid(grid.x, grid.y, indexing="ij")
        t0 = grid.t_range[0]
        exact = u(t0, X, Y)
        rows.extend((case, t0, xv, yv, uv, ev) for xv, yv, uv, ev in
                    zip(X.ravel(), Y.ravel(), sol.final.ravel(), exact.ravel()))
    csv = report.csv_text(("case", "t", "x", "y", "u", "u_exact"), rows)
    return rep, "\n".join(lines) + "\n", csv, EXIT_PASS if not failing else EXIT_FAIL


COMMANDS = {
    "verify-symmetries": cmd_verify_symmetries,
    "brackets": cmd_brackets,
    "solutions": cmd_solutions,
    "converge": cmd_converge,
}


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bsmlie", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "verify-symmetries": "check every generator of a case's symmetry algebra",
        "brackets": "verify a case's bracket table and the Jacobi identity",
        "solutions": "three-tier verification of invariant solutions",
        "converge": "finite-difference convergence ladder against a manufactured solution",
    }
    for name, text in helps.items():
        sp = sub.add_parser(name, help=text)
        sel = sp.add_mutually_exclusive_group(required=True)
        sel.add_argument("--case", action="append", metavar="ID",
                         help="case selector; may be repeated")
        sel.add_argument("--all", action="store_true", help="select every case")
        sp.add_argument("--params", metavar="FILE", help="JSON file of parameter overrides")
        sp.add_argument("--seed", type=int, default=42)
        sp.add_argument("--out", metavar="DIR", help="write the report into DIR")
        sp.add_argument("--format", choices=FORMATS, default="json", dest="fmt")
        if name == "verify-symmetries":
            sp.add_argument("--inject", choices=sorted(INJECTIONS), help=argparse.SUPPRESS)
        if name == "converge":
            sp.add_argument("--scheme", choices=("adi", "explicit"), default="adi")
            sp.add_argument("--stencil", choices=("central", "forward"), default="central",
                            help="x first-derivative stencil; 'forward' is first order")
            sp.add_argument("--levels", help="ladder, e.g. 21x21x20,41x41x40,81x81x80")
            sp.add_argument("--expect-order", type=float, default=2.0)
    return parser


def _resolve_cases(command: str, args) -> list:
    if command in ("verify-symmetries", "brackets"):
        pool = list(CASES)
    elif command == "solutions":
        pool = list(CASE_IDS)
    else:
        pool = ["2.1-2", "2.3-1"]
    if args.all:
        return pool
    out = []
    for c in args.case:
        valid = pool if command != "converge" else list(CASE_IDS) + ["x", "exp-rt"]
        if c not in valid:
            raise UsageError(f"unknown case {c!r} for {command}; expected one of {valid}")
        if c not in out:
            out.append(c)
    return out


def make_config(args) -> RunConfig:
    cfg = RunConfig(args.command, _resolve_cases(args.command, args), seed=args.seed,
                    out=Path(args.out) if args.out else None, fmt=args.fmt)
    if args.params:
        cfg.params, cfg.case_params, cfg.constants = _load_params(args.params)
    if args.command == "verify-symmetries":
        cfg.inject = args.inject
    if args.command == "converge":
        cfg.scheme, cfg.stencil, cfg.expect_order = args.scheme, args.stencil, args.expect_order
        if args.levels:
            cfg.levels = _parse_levels(args.levels)
    for case in CASES:
        # reject inconsistent overrides before any work starts
        try:
            cfg.model_params(case)
        except ParamError as err:
            if args.command in ("verify-symmetries", "brackets") and case in cfg.cases:
                raise UsageError(str(err)) from err
    return cfg


def run(cfg: RunConfig):
    rep, text, csv, code = COMMANDS[cfg.command](cfg)
    body = {"json": report.dumps(rep), "text": text, "csv": csv}[cfg.fmt]
    return rep, body, code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = make_config(args)
        _, body, code = run(cfg)
    except (UsageError, ParamError) as err:
        print(f"bsmlie: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    if cfg.out is not None:
        ext = {"json": "json", "text": "txt", "csv": "csv"}[cfg.fmt]
        path = report.write(cfg.out / f"{cfg.command}.{ext}", body)
        print(path)
    else:
        try:
            sys.stdout.write(body)
            sys.stdout.flush()
        except BrokenPipeError:
            # downstream reader closed early (e.g. `| head`); keep the exit code
            sys.stdout = open(os.devnull, "w")
    return code


if __name__ == "__main__":
    sys.exit(main())
