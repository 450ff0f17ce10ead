"""Command-line front end.

Subcommands::

    bdm eval       evaluate one hypothesis on user data or statistics
    bdm reproduce  recompute the reference tables and compare cell by cell
    bdm simulate   false-positive and uniformity studies
    bdm list       the example catalog

Exit codes: 0 ok, 2 usage, 3 data validation, 4 numerical failure,
5 a reproduced cell outside its tolerance band.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass

from .discrepancy import Threshold, bdt_decide, partition_bdm, scalar_bdm
from .fbst import ReferenceFunction, e_value_mc, e_value_scalar
from .models import (
    JOINT_MODELS,
    MODELS,
    PHI_NAMES,
    SCALAR_MODELS,
    TWO_POPULATION_MODELS,
    DataError,
    EngineConfig,
    catalog,
    catalog_manifest,
    joint_hypothesis,
    joint_model,
    list_entries,
    run_entry,
    scalar_model,
    stats_from_data,
    two_population_model,
    validate_stats,
)
from .numerics import (
    BracketError,
    DomainError,
    NonConvergenceError,
    NonUnimodalError,
    QuadratureSpec,
    RngStream,
)
from .posteriors import MethodUnsupportedError, partition_probabilities
from .simulate import SimulationPlan, bdm_trend, false_positive_study, uniformity_study

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC, EXIT_GOLDEN = 0, 2, 3, 4, 5

FULL_SCALE = 50_000
DESK_SCALE = 5_000

# printed false-positive rates: method -> omega -> {n: rate}
TABLE1 = {
    "ev-flat": {0.90: (0.102, 0.100, 0.099, 0.098), 0.95: (0.052, 0.050, 0.051, 0.049),
                0.99: (0.011, 0.010, 0.011, 0.011)},
    "ev-prior": {0.90: (0.101, 0.102, 0.100, 0.098), 0.95: (0.051, 0.050, 0.051, 0.049),
                 0.99: (0.010, 0.010, 0.011, 0.011)},
    "bdm": {0.90: (0.103, 0.102, 0.101, 0.099), 0.95: (0.053, 0.049, 0.052, 0.049),
            0.99: (0.010, 0.009, 0.011, 0.011)},
}
TABLE1_N = (10, 100, 1000, 10000)
TREND_MLE = (0.8, 1.2, 1.6, 3.2, 3.6, 4.0)

TARGETS = ("table1", "table2", "table3", "table4", "table5", "table6", "fig3", "examples", "all")


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Settings echoed into every report."""

    seed: int
    rel_tol: float
    abs_tol: float
    max_depth: int
    draws: int
    omega: float
    format: str
    output: str | None

    @property
    def quadrature(self) -> QuadratureSpec:
        return QuadratureSpec(self.rel_tol, self.abs_tol, self.max_depth)

    def engine(self) -> EngineConfig:
        return EngineConfig(self.draws, self.quadrature, self.omega)

    def as_dict(self) -> dict:
        return {"seed": self.seed, "rel_tol": self.rel_tol, "abs_tol": self.abs_tol,
                "max_depth": self.max_depth, "draws": self.draws, "omega": self.omega,
                "format": self.format}


# ------------------------------------------------------------- formatting

def _sig(x):
    """Round floats (recursively) to 6 significant digits for output."""
    if isinstance(x, bool) or x is None:
        return x
    if isinstance(x, float):
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.6g}")
    if isinstance(x, dict):
        return {k: _sig(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_sig(v) for v in x]
    return x


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "pass" if x else "FAIL"
    if isinstance(x, float):
        return f"{x:.6g}"
    if x is None:
        return "-"
    return str(x)


def _rows_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _fmt(v) if not isinstance(v, bool) else str(v).lower() for k, v in r.items()})
    return buf.getvalue()


def _rows_text(rows: list[dict]) -> str:
    if not rows:
        return ""
    cols = list(rows[0])
    cells = [[_fmt(r[c]) for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths)).rstrip()]
    lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() for row in cells]
    return "\n".join(lines) + "\n"


def _emit(text: str, cfg: RunConfig):
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _report(cfg: RunConfig, inputs: dict, results: dict, rows: list[dict], citations=()):
    """Write a report as JSON (full object), CSV or text (flat rows)."""
    if cfg.format == "json":
        doc = {"config": cfg.as_dict(), "inputs": _sig(inputs), "results": _sig(results),
               "citations": sorted(set(citations))}
        _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", cfg)
    elif cfg.format == "csv":
        _emit(_rows_csv(rows), cfg)
    else:
        _emit(_rows_text(rows), cfg)


# ------------------------------------------------------------------ input

def _parse_kv(text: str) -> dict:
    out = {}
    for part in text.replace("\n", ",").split(","):
        part = part.split("#", 1)[0].strip()
        if not part:
            continue
        if "=" not in part:
            raise DataError(f"expected key=value, got {part!r}")
        k, v = (s.strip() for s in part.split("=", 1))
        try:
            out[k] = float(v)
        except ValueError:
            raise DataError(f"statistic {k} has a non-numeric value {v!r}") from None
    if not out:
        raise DataError("empty statistics stanza")
    return out


def read_data_file(path: str) -> tuple[str, object]:
    """("stats", dict) for a key=value stanza, else ("data", list of floats).

    One observation per line; ``#`` starts a comment; a non-numeric first
    line is taken as a header.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None
    lines = [ln.split("#", 1)[0].strip() for ln in raw.splitlines()]
    lines = [ln for ln in lines if ln]
    if lines and all("=" in ln for ln in lines):
        return "stats", _parse_kv("\n".join(lines))
    values = []
    for i, ln in enumerate(lines):
        try:
            values.append(float(ln.split(",")[0]))
        except ValueError:
            if i == 0:
                continue
            raise DataError(f"{path}: non-numeric observation {ln!r}") from None
    if not values:
        raise DataError(f"{path}: no observations")
    return "data", values


def _load_inputs(args, model: str) -> list[dict]:
    groups = []
    if args.data:
        for path in args.data.split(","):
            kind, payload = read_data_file(path.strip())
            stats = payload if kind == "stats" else stats_from_data(model, payload)
            groups.append(stats)
    if args.stats:
        for chunk in args.stats.split(";"):
            chunk = chunk.strip()
            if chunk.startswith("@"):
                kind, payload = read_data_file(chunk[1:])
                if kind != "stats":
                    raise DataError(f"{chunk[1:]} is not a key=value stanza")
                groups.append(payload)
            elif chunk:
                groups.append(_parse_kv(chunk))
    if not groups:
        raise UsageError("provide --data or --stats")
    want = 2 if model in TWO_POPULATION_MODELS else 1
    if len(groups) != want:
        raise UsageError(f"model {model!r} takes {want} data set(s), got {len(groups)}")
    return [validate_stats(model, g) for g in groups]


def _references(which: str) -> list[ReferenceFunction]:
    return {"none": [], "flat": [ReferenceFunction.flat()], "prior": [ReferenceFunction.prior()],
            "both": [ReferenceFunction.flat(), ReferenceFunction.prior()]}[which]


def _parse_phi(spec: str) -> tuple[str, float]:
    if "=" not in spec:
        raise UsageError("--h-phi takes name=value")
    name, value = spec.split("=", 1)
    try:
        return name.strip(), float(value)
    except ValueError:
        raise UsageError(f"--h-phi value {value!r} is not a number") from None


# -------------------------------------------------------------- commands

def cmd_eval(args, cfg: RunConfig) -> int:
    model = args.model
    stats = _load_inputs(args, model)
    refs = _references(args.evalue)
    results: dict = {}
    rng = RngStream(cfg.seed, 0)
    threshold = Threshold(cfg.omega)

    if model in SCALAR_MODELS:
        if args.h is None or args.h_phi:
            raise UsageError(f"model {model!r} takes a scalar hypothesis --h")
        post = scalar_model(model, stats[0], args.nu0)
        if any(r.kind == "prior" for r in refs) and not post.has_prior:
            raise UsageError(f"model {model!r} carries no prior to use as reference")
        res = scalar_bdm(post, args.h)
        hypothesis = f"theta = {args.h:g}"
        results.update(delta=res.delta, median=res.median, cdf_at_h=res.cdf_at_h,
                       external_interval=list(res.external_interval.as_tuple()))
        for r in refs:
            results[f"ev_{r.kind}"] = e_value_scalar(post, r, args.h).ev_bar
    elif model in JOINT_MODELS:
        if not args.h_phi or args.h is not None:
            raise UsageError(f"model {model!r} takes --h-phi with one of {', '.join(PHI_NAMES[model])}")
        name, value = _parse_phi(args.h_phi)
        try:
            hyp, curves = joint_hypothesis(model, name, value)
        except DomainError as exc:
            raise UsageError(str(exc)) from None
        post = joint_model(model, stats[0])
        hypothesis = f"{name} = {value:g}"
        results.update(_partition(post, hyp, cfg, rng))
        for k, r in enumerate(refs):
            ev = e_value_mc(post, curves, r, cfg.draws, rng.child(k))
            results[f"ev_{r.kind}"] = ev.ev_bar
            results[f"ev_{r.kind}_se"] = ev.mc_std_err
    else:
        kind = TWO_POPULATION_MODELS[model][1]
        if args.h_phi:
            name, diff = _parse_phi(args.h_phi)
            if name != kind:
                raise UsageError(f"model {model!r} takes --h-phi {kind}=<value>")
        elif args.h is not None:
            diff = args.h
        else:
            raise UsageError(f"model {model!r} takes --h <difference> or --h-phi {kind}=<value>")
        if refs:
            raise UsageError("e-values are not available for two-population models")
        post, hyp = two_population_model(model, stats[0], stats[1], diff)
        hypothesis = f"{kind} = {diff:g}"
        results.update(_partition(post, hyp, cfg, rng))

    results["decision"] = bdt_decide(results["delta"], threshold).value
    inputs = {"model": model, "statistics": stats, "hypothesis": hypothesis}
    if args.nu0 is not None:
        inputs["nu0"] = args.nu0
    rows = [{"quantity": k, "value": v if not isinstance(v, list) else " ".join(_fmt(x) for x in v)}
            for k, v in results.items()]
    _report(cfg, inputs, results, rows)
    return EXIT_OK


def _partition(post, hyp, cfg: RunConfig, rng: RngStream) -> dict:
    try:
        pp = partition_probabilities(post, hyp, "quadrature", spec=cfg.quadrature)
    except MethodUnsupportedError:
        pp = partition_probabilities(post, hyp, "monte-carlo", rng.child(99), cfg.draws)
    out = {"delta": partition_bdm(pp).delta, "p_a": pp.p_a, "p_b": pp.p_b,
           "p_external": pp.external, "p_method": pp.p_method}
    if pp.mc_std_err is not None:
        out["p_std_err"] = pp.mc_std_err
    return out


def _cell(target, cell, computed, expected, lo, hi, citation):
    return {"target": target, "cell": cell, "computed": float(computed), "expected": expected,
            "lo": lo, "hi": hi, "pass": bool(lo <= computed <= hi), "citation": citation}


class _EntryRunner:
    """Runs catalog entries once per command and caches the reports."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.ids = list(catalog())
        self.cache = {}

    def __call__(self, entry_id):
        if entry_id not in self.cache:
            rng = RngStream(self.cfg.seed, self.ids.index(entry_id))
            self.cache[entry_id] = run_entry(entry_id, self.cfg.engine(), rng)
        return self.cache[entry_id]


def _table_cells(target: str, runner: _EntryRunner) -> list[dict]:
    cells = []
    for eid, entry in catalog().items():
        if not any(x.citation == target for x in entry.expected):
            continue
        rep = runner(eid)
        for x in entry.expected:
            if x.citation != target and x.quantity != "delta":
                continue
            v = rep.quantities[x.quantity]
            lo, hi = x.lo, x.hi
            if f"{x.quantity}_se" in rep.quantities and runner.cfg.draws < FULL_SCALE:
                # Monte-Carlo cells: the band widens as sqrt(50000 / draws)
                half = 0.5 * (hi - lo) * math.sqrt(FULL_SCALE / runner.cfg.draws)
                lo, hi = max(x.value - half, 0.0), min(x.value + half, 1.0)
            cells.append(_cell(target, f"{eid}:{x.quantity}", v, x.value, lo, hi, x.citation))
    return cells


def _example_cells(runner: _EntryRunner) -> list[dict]:
    cells = []
    for eid, entry in catalog().items():
        rep = runner(eid)
        for c in rep.checks:
            if c["citation"].startswith(("example", "gi-")):
                cells.append(_cell("examples", f"{eid}:{c['quantity']}", c["computed"], c["expected"],
                                   c["lo"], c["hi"], c["citation"]))
    return cells


def _table1_cells(args, cfg: RunConfig) -> list[dict]:
    sizes = TABLE1_N if args.full_n else TABLE1_N[:3]
    s = args.S or (DESK_SCALE if args.desk_scale else FULL_SCALE)
    plan = SimulationPlan("exp", 1.2, 1.2, sizes, s, cfg.draws, (0.90, 0.95, 0.99), cfg.seed)
    table = false_positive_study(plan, workers=args.workers)
    cells = []
    for w in plan.omegas:
        alpha = 1.0 - w
        half = 3.0 * math.sqrt(alpha * (1 - alpha) / s)
        for n in sizes:
            for method in ("ev-flat", "ev-prior", "bdm"):
                printed = TABLE1[method][round(w, 2)][TABLE1_N.index(n)]
                cells.append(_cell("table1", f"{method} omega={w:g} n={n}", table.rate(method, w, n),
                                   printed, alpha - half, alpha + half, "table1"))
    return cells


def _fig3_cells() -> list[dict]:
    n_range = list(range(1, 201))
    tr = bdm_trend(TREND_MLE, n_range, 2.4)
    col = tr.column(1.2)
    cells = [_cell("fig3", "mle=1.2 n=6", col[5], 0.832, 0.827, 0.837, "example1[A]"),
             _cell("fig3", "mle=1.2 n=24", col[23], 0.997, 0.992, 1.0, "example1[C]")]
    for m in (0.8, 1.2):
        inc = float(all(b >= a for a, b in zip(tr.column(m)[:-1], tr.column(m)[1:])))
        cells.append(_cell("fig3", f"mle={m:g} nondecreasing in n", inc, 1.0, 1.0, 1.0, "fig3"))
    for m in TREND_MLE:
        cells.append(_cell("fig3", f"mle={m:g} delta at n=200", tr.column(m)[-1], 1.0, 0.99, 1.0, "fig3"))
    return cells


def cmd_reproduce(args, cfg: RunConfig) -> int:
    targets = TARGETS[:-1] if args.target == "all" else (args.target,)
    runner = _EntryRunner(cfg)
    cells = []
    for t in targets:
        if t == "table1":
            cells += _table1_cells(args, cfg)
        elif t == "fig3":
            cells += _fig3_cells()
        elif t == "examples":
            cells += _example_cells(runner)
        else:
            cells += _table_cells(t, runner)
    failed = [c for c in cells if not c["pass"]]
    inputs = {"target": args.target, "desk_scale": args.desk_scale, "S": args.S,
              "full_n": args.full_n}
    results = {"cells": cells, "total": len(cells), "failed": len(failed)}
    _report(cfg, inputs, results, cells, [c["citation"] for c in cells])
    if cfg.format == "text" and not cfg.output:
        sys.stdout.write(f"{len(cells) - len(failed)}/{len(cells)} cells within tolerance\n")
    return EXIT_GOLDEN if failed else EXIT_OK


def cmd_simulate(args, cfg: RunConfig) -> int:
    plan = SimulationPlan(args.model, args.theta_star, args.h, tuple(args.n), args.S, cfg.draws,
                          tuple(args.omega or (0.90, 0.95, 0.99)), cfg.seed, args.ev_method)
    table = false_positive_study(plan, workers=args.workers)
    results = {"rates": table.rows()}
    if args.uniformity:
        results["uniformity"] = [r.as_dict() for r in uniformity_study(plan, args.level, args.workers)]
    if cfg.format == "csv":
        _emit(table.to_csv(), cfg)
    else:
        _report(cfg, {"plan": plan.as_dict()}, results, table.rows())
        if args.uniformity and cfg.format == "text" and not cfg.output:
            sys.stdout.write(_rows_text(results["uniformity"]))
    return EXIT_OK


def cmd_list(args, cfg: RunConfig) -> int:
    if args.json or cfg.format == "json":
        _emit(json.dumps(catalog_manifest(args.filter), indent=2, sort_keys=True) + "\n", cfg)
        return EXIT_OK
    rows = [{"id": e["id"], "model": e["model"], "description": e["description"]}
            for e in list_entries(args.filter)]
    _emit(_rows_csv(rows) if cfg.format == "csv" else _rows_text(rows), cfg)
    return EXIT_OK


# ------------------------------------------------------------------ parser

def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("run configuration")
    g.add_argument("--seed", type=int, default=None, help="random seed (default: $BDM_SEED or 0)")
    g.add_argument("--format", choices=("json", "csv", "text"), default="text")
    g.add_argument("--output", "-o", default=None, help="write the report here instead of stdout")
    g.add_argument("--rel-tol", type=float, default=1e-10)
    g.add_argument("--abs-tol", type=float, default=1e-12)
    g.add_argument("--max-depth", type=int, default=60)
    g.add_argument("--draws", type=int, default=None,
                   help="Monte-Carlo posterior draws (default 50000; 5000 with --desk-scale)")
    g.add_argument("--omega", type=_float_list, default=None,
                   help="rejection threshold for delta (default 0.95); simulate takes a list "
                        "(default 0.90,0.95,0.99)")

    p = argparse.ArgumentParser(prog="bdm", description="Bayesian discrepancy measure and test.")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", parents=[common], help="evaluate one hypothesis")
    e.add_argument("--model", required=True, choices=MODELS)
    e.add_argument("--data", help="CSV file(s), comma separated for two populations")
    e.add_argument("--stats", help="key=value,... statistics; ';' separates populations; @file reads a stanza")
    e.add_argument("--h", type=float, default=None, help="hypothesized value (or difference)")
    e.add_argument("--h-phi", default=None, help="name=value for a functional of the parameters")
    e.add_argument("--evalue", choices=("none", "flat", "prior", "both"), default="none")
    e.add_argument("--nu0", type=float, default=None, help="known shape of the 'ig-mean' model")
    e.set_defaults(func=cmd_eval)

    r = sub.add_parser("reproduce", parents=[common], help="recompute reference tables")
    r.add_argument("target", choices=TARGETS)
    r.add_argument("--desk-scale", action="store_true", help="5000 replications and draws")
    r.add_argument("--S", type=int, default=None, help="replications for table1")
    r.add_argument("--full-n", action="store_true", help="include n = 10000 in table1")
    r.add_argument("--workers", type=int, default=None)
    r.set_defaults(func=cmd_reproduce)

    s = sub.add_parser("simulate", parents=[common], help="false-positive and uniformity studies")
    s.add_argument("--model", choices=("exp", "poisson"), default="exp")
    s.add_argument("--theta-star", type=float, default=1.2)
    s.add_argument("--h", type=float, default=1.2)
    s.add_argument("--n", type=_int_list, default=[10, 100, 1000])
    s.add_argument("--S", type=int, default=DESK_SCALE)
    s.add_argument("--ev-method", choices=("level-set", "monte-carlo"), default="level-set")
    s.add_argument("--uniformity", action="store_true", help="also run the KS uniformity test")
    s.add_argument("--level", type=float, default=0.01)
    s.add_argument("--workers", type=int, default=None)
    s.set_defaults(func=cmd_simulate)

    li = sub.add_parser("list", parents=[common], help="list the example catalog")
    li.add_argument("--json", action="store_true", help="machine-readable manifest")
    li.add_argument("--filter", default=None, help="keep ids or models containing this text")
    li.set_defaults(func=cmd_list)
    return p


def _config(args) -> RunConfig:
    seed = args.seed
    if seed is None:
        env = os.environ.get("BDM_SEED")
        try:
            seed = int(env) if env else 0
        except ValueError:
            raise UsageError(f"BDM_SEED must be an integer, got {env!r}") from None
    draws = args.draws or (DESK_SCALE if getattr(args, "desk_scale", False) else FULL_SCALE)
    omegas = args.omega or [0.95]
    if len(omegas) != 1 and args.command != "simulate":
        raise UsageError("--omega takes a single threshold here")
    if any(not (0.0 < w < 1.0) for w in omegas):
        raise UsageError("--omega must lie in (0, 1)")
    omega = omegas[0] if len(omegas) == 1 else 0.95
    if draws < 1 or seed < 0:
        raise UsageError("--draws must be positive and --seed non-negative")
    return RunConfig(seed, args.rel_tol, args.abs_tol, args.max_depth, draws, omega,
                     args.format, args.output)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
        return args.func(args, cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"bdm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MethodUnsupportedError as exc:
        print(f"bdm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NonConvergenceError, NonUnimodalError, BracketError) as exc:
        print(f"bdm: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DomainError as exc:
        print(f"bdm: invalid data: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
