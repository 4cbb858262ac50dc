"""Campaign runner: decomposition and optimization tables over seeds.

Usage::

    svgdecomp defaults > campaign.yaml
    svgdecomp decompose --config campaign.yaml --out results
    svgdecomp optimize --config campaign.yaml --out results --jobs 4
    svgdecomp report results/decompose.csv --out results
    svgdecomp verify
"""

import argparse
import csv
import io
import json
import logging
import os
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import yaml

from ._validation import ConfigurationError
from .baselines import dg_decompose, rdg_decompose
from .cc import OptimizerConfig, decc_optimize, write_history
from .grouping import svg_decompose
from .metrics import dis, rho_split
from .problems import CountingObjective, build_problem, ground_truth
from .surrogate import write_trace

LOG = logging.getLogger("svgdecomp")

COLUMNS = ["function", "algorithm", "seed", "n", "m", "rho1", "rho2", "fes", "dis", "best_f", "wall_ms"]
METRICS = ["rho1", "rho2", "fes", "dis", "best_f"]
ALGORITHMS = ("svg", "dg", "rdg")


class FatalError(Exception):
    """Configuration or I/O problem that stops the whole campaign."""


@dataclass
class CampaignConfig:
    functions: list = field(default_factory=lambda: [1])
    n: int = 100
    m: int = 10
    seeds: list = field(default_factory=lambda: [0, 1, 2])
    algorithms: list = field(default_factory=lambda: ["svg"])
    max_fes: int = 3_000_000
    pop_size: int = None
    generations_per_turn: int = 50
    format: str = "csv"
    out: str = "results"

    def validate(self):
        if not self.seeds:
            raise ConfigurationError("seeds must be nonempty")
        if not self.functions:
            raise ConfigurationError("functions must be nonempty")
        if not (isinstance(self.max_fes, int) and self.max_fes > 0):
            raise ConfigurationError(f"max_fes must be a positive integer, got {self.max_fes!r}")
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise ConfigurationError(f"unknown algorithm {a!r}; expected one of {ALGORITHMS}")
        if self.format not in ("csv", "json"):
            raise ConfigurationError(f"format must be csv or json, got {self.format!r}")
        return self


def load_config(path=None):
    doc = {}
    if path is not None:
        try:
            with open(path) as fh:
                doc = yaml.safe_load(fh) or {}
        except OSError as exc:
            raise FatalError(f"cannot read config {path}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise FatalError(f"malformed config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise FatalError("config must be a key/value document")
    known = {f.name for f in fields(CampaignConfig)}
    unknown = set(doc) - known
    if unknown:
        raise FatalError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return CampaignConfig(**doc)


# ---------------------------------------------------------------------------
# single rows


def _decompose(problem, algorithm, seed, objective, trace):
    if algorithm == "svg":
        return svg_decompose(problem, random_state=seed, objective=objective, trace=trace)
    if algorithm == "dg":
        return dg_decompose(problem, objective=objective)
    return rdg_decompose(problem, objective=objective)


def run_row(task):
    """Run one ``(function, algorithm, seed)`` cell; returns ``(row, error, extra)``."""
    fid, algorithm, seed, cfg, optimize, timing, trace_dir = task
    key = {"function": f"f{fid}", "algorithm": algorithm, "seed": seed}
    try:
        t0 = time.perf_counter()
        problem = build_problem(fid, cfg["n"], cfg["m"], seed)
        budget = cfg["max_fes"] if optimize else None
        obj = CountingObjective(problem, budget)
        trace = [] if trace_dir and algorithm == "svg" else None
        dec = _decompose(problem, algorithm, seed, obj, trace)
        rho1, rho2 = rho_split(ground_truth(problem), dec)
        row = dict(key, n=problem.n, m=problem.m, rho1=rho1, rho2=rho2,
                   fes=dec.fes_used, dis=dis(dec, problem), best_f=None, wall_ms=None)
        extra = {"exhausted": dec.exhausted, "history": None, "trace": trace}
        if optimize:
            ocfg = OptimizerConfig(max_fes=cfg["max_fes"], pop_size=cfg["pop_size"],
                                   generations_per_turn=cfg["generations_per_turn"], seed=seed)
            res = decc_optimize(problem, dec, ocfg, objective=obj)
            row["best_f"] = res.best_f
            row["fes"] = res.fes_used
            extra["history"] = res.history
            extra["exhausted"] = dec.exhausted or res.exhausted
        if timing:
            row["wall_ms"] = round(1000.0 * (time.perf_counter() - t0), 3)
        return row, None, extra
    except Exception as exc:  # reported per row, the campaign continues
        return None, dict(key, error=f"{type(exc).__name__}: {exc}"), None


# ---------------------------------------------------------------------------
# row files


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _sort_key(row):
    fn = row["function"]
    num = int(fn[1:]) if fn[1:].isdigit() else 10**9
    return (num, fn, row["algorithm"], int(row["seed"]))


def write_rows(rows, path, fmt):
    rows = sorted(rows, key=_sort_key)
    if fmt == "json":
        text = json.dumps([{c: r.get(c) for c in COLUMNS} for r in rows], indent=1) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(COLUMNS)
        for r in rows:
            writer.writerow([_fmt(r.get(c)) for c in COLUMNS])
        text = buf.getvalue()
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _parse(value, column):
    if value in ("", None):
        return None
    if column in ("function", "algorithm"):
        return value
    if column in ("seed", "n", "m", "fes"):
        return int(value)
    return float(value)


def read_rows(path):
    with open(path, newline="") as fh:
        if path.endswith(".json"):
            return [{c: r.get(c) for c in COLUMNS} for r in json.load(fh)]
        return [{c: _parse(r.get(c), c) for c in COLUMNS} for r in csv.DictReader(fh)]


# ---------------------------------------------------------------------------
# campaigns


def run_campaign(cfg, *, optimize=False, out=None, fmt=None, jobs=1, seed_offset=0,
                 timing=False, trace_dir=None):
    """Run every missing row and write the merged table; returns ``(rows, errors)``."""
    cfg.validate()
    out = out or cfg.out
    fmt = fmt or cfg.format
    name = "optimize" if optimize else "decompose"
    try:
        os.makedirs(out, exist_ok=True)
        if trace_dir:
            os.makedirs(trace_dir, exist_ok=True)
    except OSError as exc:
        raise FatalError(f"cannot create output directory {out}: {exc}") from exc
    path = os.path.join(out, f"{name}.{fmt}")

    rows = read_rows(path) if os.path.exists(path) else []
    done = {(r["function"], r["algorithm"], int(r["seed"])) for r in rows}
    shared = {"n": cfg.n, "m": cfg.m, "max_fes": cfg.max_fes, "pop_size": cfg.pop_size,
              "generations_per_turn": cfg.generations_per_turn}
    tasks = [
        (fid, alg, seed + seed_offset, shared, optimize, timing, trace_dir)
        for fid in cfg.functions
        for alg in cfg.algorithms
        for seed in cfg.seeds
        if (f"f{fid}", alg, seed + seed_offset) not in done
    ]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_row, tasks))
    else:
        results = [run_row(t) for t in tasks]

    errors, exhausted = [], []
    for row, err, extra in results:
        if err is not None:
            LOG.error("%s %s seed %s: %s", err["function"], err["algorithm"], err["seed"], err["error"])
            errors.append(err)
            continue
        rows.append(row)
        tag = f"{row['function']}_{row['algorithm']}_s{row['seed']}"
        if extra["exhausted"]:
            exhausted.append(row)
        try:
            if extra["history"] is not None:
                os.makedirs(os.path.join(out, "histories"), exist_ok=True)
                write_history(extra["history"], os.path.join(out, "histories", f"{tag}.csv"))
            if extra["trace"] is not None:
                write_trace(extra["trace"], os.path.join(trace_dir, f"{tag}.csv"))
        except OSError as exc:
            raise FatalError(f"cannot write {tag} side files: {exc}") from exc

    try:
        write_rows(rows, path, fmt)
        if errors:
            with open(os.path.join(out, f"{name}_errors.csv"), "w", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(["function", "algorithm", "seed", "error"])
                for e in errors:
                    writer.writerow([e["function"], e["algorithm"], e["seed"], e["error"]])
        if exhausted:
            with open(os.path.join(out, f"{name}_exhausted.csv"), "w", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(["function", "algorithm", "seed", "fes"])
                for r in sorted(exhausted, key=_sort_key):
                    writer.writerow([r["function"], r["algorithm"], r["seed"], r["fes"]])
    except OSError as exc:
        raise FatalError(f"cannot write results to {out}: {exc}") from exc
    return rows, errors


# ---------------------------------------------------------------------------
# aggregation


def aggregate(rows):
    """Median, mean and population std of each metric per (function, algorithm)."""
    if not rows:
        raise ConfigurationError("no rows to aggregate")
    cells = {}
    for r in sorted(rows, key=_sort_key):
        cells.setdefault((r["function"], r["algorithm"]), []).append(r)
    out = []
    for (fn, alg), rs in cells.items():
        agg = {"function": fn, "algorithm": alg, "runs": len(rs)}
        for metric in METRICS:
            vals = [float(r[metric]) for r in rs if r.get(metric) is not None]
            if vals:
                agg[f"{metric}_median"] = statistics.median(vals)
                agg[f"{metric}_mean"] = statistics.fmean(vals)
                agg[f"{metric}_std"] = statistics.pstdev(vals)
            else:
                agg[f"{metric}_median"] = agg[f"{metric}_mean"] = agg[f"{metric}_std"] = None
        out.append(agg)
    return out


def report_columns():
    cols = ["function", "algorithm", "runs"]
    for metric in METRICS:
        cols += [f"{metric}_median", f"{metric}_mean", f"{metric}_std"]
    return cols


def write_report(aggs, path, fmt):
    cols = report_columns()

    def cell(v):
        if v is None:
            return ""
        if isinstance(v, float):
            return f"{v:.2e}"
        return str(v)

    if fmt == "json":
        text = json.dumps([{c: cell(a.get(c)) for c in cols} for a in aggs], indent=1) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(cols)
        for a in aggs:
            writer.writerow([cell(a.get(c)) for c in cols])
        text = buf.getvalue()
    with open(path, "w", newline="") as fh:
        fh.write(text)


# ---------------------------------------------------------------------------
# verify


def verify():
    """Quick scaled checks; returns a list of ``(name, passed, detail)``."""
    import numpy as np

    from .grouping import dbtg
    from .detection import DetectionConfig
    from .metrics import nmi
    from .problems import FunctionProblem

    checks = []
    for seed in range(3):
        p = build_problem(1, 100, 10, seed)
        d = svg_decompose(p, random_state=seed)
        r1, _ = rho_split(ground_truth(p), d)
        checks.append((f"f1 n=100 seed {seed}: rho1=100, FEs in [19000, 28000], dis<=1e-5",
                       r1 == 100 and 19000 <= d.fes_used <= 28000 and dis(d, p) <= 1e-5,
                       f"rho1={r1:.2f} fes={d.fes_used} dis={dis(d, p):.2e}"))

    def fig3(x):
        return (x[0] - x[4]) ** 2 + (x[0] - 1) ** 2 + x[1] ** 2 + x[2] ** 2 + x[3] ** 2

    lb, ub = -np.ones(5), 3 * np.ones(5)
    obj = CountingObjective(FunctionProblem(fig3, lb, ub))
    cfg = DetectionConfig.from_bounds(lb, ub)
    x1 = 0.5 * (cfg.cv[4] + 1)
    cfg.cv[0] = x1
    stats = {}
    found, fes = dbtg(obj, 0, [1, 2, 3, 4], x1, 1e-3, cfg, stats=stats)
    checks.append(("chain example: grouping finds {x5} with 3 detections",
                   found == [4] and stats["detections"] == 3 and fes == 9,
                   f"found={found} detections={stats['detections']}"))
    n = 6
    checks.append(("nmi(singletons, whole) = 0",
                   abs(nmi([[i] for i in range(n)], [list(range(n))], n)) < 1e-12, ""))
    return checks


# ---------------------------------------------------------------------------
# entry point


def _parser():
    parser = argparse.ArgumentParser(prog="svgdecomp", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("decompose", "optimize"):
        p = sub.add_parser(name, help=f"run a {name} campaign")
        p.add_argument("--config")
        p.add_argument("--out")
        p.add_argument("--format", choices=["csv", "json"])
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--seed-offset", type=int, default=0)
        p.add_argument("--functions", type=int, nargs="+")
        p.add_argument("--seeds", type=int, nargs="+")
        p.add_argument("--algorithms", nargs="+")
        p.add_argument("--n", type=int)
        p.add_argument("--m", type=int)
        p.add_argument("--max-fes", type=int)
        p.add_argument("--timing", action="store_true", help="fill wall_ms (breaks byte-identical reruns)")
        p.add_argument("--trace-dir", help="dump SVG sample traces as CSV into this directory")
    p = sub.add_parser("report", help="aggregate a rows file")
    p.add_argument("rows")
    p.add_argument("--out", default=".")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    sub.add_parser("defaults", help="print the default campaign config")
    sub.add_parser("verify", help="run quick scaled acceptance checks")
    return parser


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "defaults":
            sys.stdout.write(yaml.safe_dump(asdict(CampaignConfig()), sort_keys=False))
            return 0
        if args.command == "verify":
            checks = verify()
            for name, ok, detail in checks:
                print(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}".rstrip())
            return 0 if all(ok for _, ok, _ in checks) else 2
        if args.command == "report":
            try:
                rows = read_rows(args.rows)
            except (OSError, ValueError, KeyError) as exc:
                raise FatalError(f"cannot read rows from {args.rows}: {exc}") from exc
            if not rows:
                raise FatalError(f"{args.rows} holds no rows")
            try:
                os.makedirs(args.out, exist_ok=True)
                path = os.path.join(args.out, f"report.{args.format}")
                write_report(aggregate(rows), path, args.format)
            except OSError as exc:
                raise FatalError(f"cannot write report to {args.out}: {exc}") from exc
            print(path)
            return 0

        cfg = load_config(args.config)
        for key in ("functions", "seeds", "algorithms", "n", "m", "max_fes"):
            value = getattr(args, key)
            if value is not None:
                setattr(cfg, key, value)
        rows, errors = run_campaign(
            cfg,
            optimize=args.command == "optimize",
            out=args.out,
            fmt=args.format,
            jobs=args.jobs,
            seed_offset=args.seed_offset,
            timing=args.timing,
            trace_dir=args.trace_dir,
        )
        if errors and not rows:
            return 2
        return 0
    except (FatalError, ConfigurationError) as exc:
        print(f"svgdecomp: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
