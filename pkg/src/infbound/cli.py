"""Command-line front end.

    infbound bound <file> [--ub] [--lb] [--tub T] [--tlb T [--mc-init N]]
                          [--mc N] [--exact] [--seed S] [--per-node] [--json OUT]
    infbound sweep <spec.json> --out DIR --seed S [--jobs K]
    infbound gen <family> <params...> --seed S [--lcc] [--prob P] -o FILE

Exit codes: 0 ok, 1 usage / invalid parameters, 2 unreadable or invalid
model file, 3 exact enumeration cap exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import InfboundError, ModelError, TooManyEdgesError
from .generators import FAMILIES, GenSpec, generate
from .graph import ICModel, load_edge_list, save_edge_list
from .nblb import nb_lb
from .nbub import nb_ub
from .oracle import exact_influence, mc_influence, variance_upper_bound
from .tunable import t_nb_lb, t_nb_ub

EXIT_USAGE, EXIT_PARSE, EXIT_CAP = 1, 2, 3
DEFAULT_MC = 10_000
DEFAULT_GRID = [round(0.1 * i, 1) for i in range(1, 10)]

CSV_COLUMNS = [
    "family", "n", "edges", "p", "replicate", "sigma_plus", "sigma_minus",
    "mc_mean", "mc_stderr", "mc_samples", "exact", "variance_bound", "error",
]
AGG_COLUMNS = ["family", "p", "rows", "gap_plus", "gap_minus"]


def fmt(x) -> str:
    """Numbers as text: floats with 17 significant digits, ints as is."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return "null"
    return format(x, ".17g")


def to_json(obj, indent=0) -> str:
    """JSON with every float printed via :func:`fmt`."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (bool, np.bool_, int, np.integer, float, np.floating)):
        return fmt(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {to_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(to_json(v, indent + 1) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def derive_seed(master: int, *path: int) -> int:
    """A 63-bit seed determined by ``master`` and an index path."""
    ss = np.random.SeedSequence(entropy=int(master) % 2**64, spawn_key=tuple(int(i) for i in path))
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


# --- bound ------------------------------------------------------------------


def compute_report(
    model: ICModel,
    ub=True,
    lb=True,
    tub=None,
    tlb=None,
    mc_init=None,
    mc=None,
    exact=False,
    rng_seed=0,
    per_node=False,
    timings=False,
) -> dict:
    """Run the requested estimators on ``model`` and collect a report dict."""
    report = {
        "model": {
            "n": model.n,
            "edges": model.n_edges,
            "seeds": list(model.seeds),
            "sha256": model.fingerprint(),
        },
        "rng_seed": int(rng_seed),
    }
    clock = {}
    nodes = {}

    def timed(name, fn):
        t0 = time.perf_counter()
        out = fn()
        clock[name] = time.perf_counter() - t0
        return out

    if ub:
        table = timed("nb_ub", lambda: nb_ub(model, keep_table=False))
        report["sigma_plus"] = table.sigma_plus
        nodes["ub"] = table.node_bound
    if lb:
        vec = timed("nb_lb", lambda: nb_lb(model))
        report["sigma_minus"] = vec.sigma_minus
        nodes["lb"] = vec.lb
    if ub and lb:
        report["variance_bound"] = variance_upper_bound(report["sigma_plus"], report["sigma_minus"])
    tunable = {}
    if tub is not None:
        table = timed("t_nb_ub", lambda: t_nb_ub(model, tub, keep_table=False))
        tunable["ub"] = {str(tub): table.sigma_plus}
        nodes[f"tub_{tub}"] = table.node_bound
    if tlb is not None:
        mode = "mc" if mc_init else "exact"
        vec = timed(
            "t_nb_lb",
            lambda: t_nb_lb(model, tlb, mode=mode, mc_samples=mc_init or 0, rng_seed=derive_seed(rng_seed, 1)),
        )
        tunable["lb"] = {str(tlb): vec.sigma_minus, "probabilistic": vec.probabilistic}
        nodes[f"tlb_{tlb}"] = vec.lb
    if tunable:
        report["tunable"] = tunable
    if mc:
        est = timed("mc", lambda: mc_influence(model, mc, derive_seed(rng_seed, 0), node_probs=per_node))
        report["mc"] = {"mean": est.mean, "stderr": est.stderr, "samples": est.samples, "probabilistic": True}
        if per_node:
            nodes["mc"] = est.node_p
    if exact:
        res = timed("exact", lambda: exact_influence(model))
        report["exact"] = res.sigma
        nodes["exact"] = res.p
    if per_node:
        report["per_node"] = {k: [float(x) for x in v] for k, v in nodes.items()}
    if timings:
        report["timings"] = clock
    return report


def cmd_bound(args) -> int:
    model = load_edge_list(args.file)
    if args.prob is not None:
        model = model.with_prob(args.prob)
    any_flag = args.ub or args.lb or args.tub is not None or args.tlb is not None or args.mc or args.exact
    report = compute_report(
        model,
        ub=args.ub or not any_flag,
        lb=args.lb or not any_flag,
        tub=args.tub,
        tlb=args.tlb,
        mc_init=args.mc_init,
        mc=args.mc,
        exact=args.exact,
        rng_seed=args.seed,
        per_node=args.per_node,
        timings=args.timings,
    )
    text = to_json(report) + "\n"
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


# --- sweep --------------------------------------------------------------------


@dataclass
class SweepSpec:
    networks: list  # dicts: family, n, param, [take_lcc], [name]
    p_grid: list = field(default_factory=lambda: list(DEFAULT_GRID))
    replicates: int = 1
    estimators: tuple = ("ub", "lb", "mc")
    mc_samples: int = DEFAULT_MC

    @classmethod
    def from_dict(cls, d):
        nets = d.get("networks") or [d["network"]]
        spec = cls(
            networks=[dict(x) for x in nets],
            p_grid=[float(p) for p in d.get("p_grid", DEFAULT_GRID)],
            replicates=int(d.get("replicates", 1)),
            estimators=tuple(d.get("estimators", ("ub", "lb", "mc"))),
            mc_samples=int(d.get("mc_samples", DEFAULT_MC)),
        )
        spec.validate()
        return spec

    def validate(self):
        from .errors import InvalidParamsError

        if self.replicates < 1:
            raise InvalidParamsError("replicates must be >= 1")
        if not self.p_grid or any(not 0.0 < p <= 1.0 for p in self.p_grid):
            raise InvalidParamsError("p grid values must lie in (0, 1]")
        bad = set(self.estimators) - {"ub", "lb", "mc", "exact"}
        if bad:
            raise InvalidParamsError(f"unknown estimators {sorted(bad)}")
        for net in self.networks:
            if net.get("family") not in FAMILIES:
                raise InvalidParamsError(f"unknown family {net.get('family')!r}")


def _sweep_cell(args):
    """All p values for one (network template, replicate) pair."""
    spec, net_idx, rep, master = args
    net = spec.networks[net_idx]
    name = net.get("name", net["family"])
    gen = GenSpec(
        family=net["family"],
        n=int(net["n"]),
        param=float(net["param"]),
        rng_seed=derive_seed(master, net_idx, rep),
        take_lcc=bool(net.get("take_lcc", True)),
    )
    rows = []
    try:
        base = generate(gen)
    except InfboundError as exc:
        for pi, p in enumerate(spec.p_grid):
            rows.append(((net_idx, rep, pi), {"family": name, "n": gen.n, "p": p, "replicate": rep, "error": str(exc)}))
        return rows
    for pi, p in enumerate(spec.p_grid):
        row = {"family": name, "n": base.n, "edges": base.n_edges, "p": p, "replicate": rep}
        try:
            model = base.with_prob(p)
            if "ub" in spec.estimators:
                row["sigma_plus"] = nb_ub(model, keep_table=False).sigma_plus
            if "lb" in spec.estimators:
                row["sigma_minus"] = nb_lb(model).sigma_minus
            if "ub" in spec.estimators and "lb" in spec.estimators:
                row["variance_bound"] = variance_upper_bound(row["sigma_plus"], row["sigma_minus"])
            if "mc" in spec.estimators:
                est = mc_influence(model, spec.mc_samples, derive_seed(master, net_idx, rep, pi))
                row.update(mc_mean=est.mean, mc_stderr=est.stderr, mc_samples=est.samples)
            if "exact" in spec.estimators:
                row["exact"] = exact_influence(model).sigma
        except InfboundError as exc:
            row["error"] = str(exc)
        rows.append(((net_idx, rep, pi), row))
    return rows


def run_sweep(spec: SweepSpec, master_seed: int, jobs: int = 1) -> list[dict]:
    """Rows for every (network, replicate, p) cell, in a fixed order."""
    cells = [(spec, i, r, master_seed) for i in range(len(spec.networks)) for r in range(spec.replicates)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_sweep_cell, cells))
    else:
        parts = [_sweep_cell(c) for c in cells]
    keyed = [kr for part in parts for kr in part]
    keyed.sort(key=lambda kr: kr[0])
    return [row for _, row in keyed]


def aggregate(rows: list[dict]) -> list[dict]:
    """Mean relative gaps of both bounds against the MC mean, per (family, p)."""
    groups = {}
    for row in rows:
        if row.get("error") or "mc_mean" not in row:
            continue
        groups.setdefault((row["family"], row["p"]), []).append(row)
    out = []
    for (family, p), grp in groups.items():
        agg = {"family": family, "p": p, "rows": len(grp)}
        if all("sigma_plus" in r for r in grp):
            agg["gap_plus"] = float(np.mean([(r["sigma_plus"] - r["mc_mean"]) / r["mc_mean"] for r in grp]))
        if all("sigma_minus" in r for r in grp):
            agg["gap_minus"] = float(np.mean([(r["mc_mean"] - r["sigma_minus"]) / r["mc_mean"] for r in grp]))
        out.append(agg)
    return out


def write_csv(rows, columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        cells = []
        for c in columns:
            v = row.get(c)
            if v is None:
                cells.append("")
            elif isinstance(v, str):
                cells.append(v)
            else:
                cells.append(fmt(v))
        w.writerow(cells)
    return buf.getvalue()


def cmd_sweep(args) -> int:
    with open(args.spec, encoding="utf-8") as fh:
        spec = SweepSpec.from_dict(json.load(fh))
    rows = run_sweep(spec, args.seed, args.jobs)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "rows.csv"), "w", encoding="utf-8") as fh:
        fh.write(write_csv(rows, CSV_COLUMNS))
    with open(os.path.join(args.out, "aggregate.csv"), "w", encoding="utf-8") as fh:
        fh.write(write_csv(aggregate(rows), AGG_COLUMNS))
    return 0


# --- gen ----------------------------------------------------------------------


def cmd_gen(args) -> int:
    model = generate(
        GenSpec(
            family=args.family,
            n=args.n,
            param=args.param,
            rng_seed=args.seed,
            take_lcc=args.lcc,
            uniform_p=args.prob,
        )
    )
    if args.output:
        save_edge_list(model, args.output)
    else:
        from .graph import dumps_edge_list

        sys.stdout.write(dumps_edge_list(model))
    return 0


# --- entry point --------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(prog="infbound", description="Bounds on influence in the independent cascade model.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("bound", help="compute bounds for a model file")
    b.add_argument("file")
    b.add_argument("--ub", action="store_true", help="nonbacktracking upper bound")
    b.add_argument("--lb", action="store_true", help="nonbacktracking lower bound")
    b.add_argument("--tub", type=int, metavar="T", help="tunable upper bound with horizon T")
    b.add_argument("--tlb", type=int, metavar="T", help="tunable lower bound with horizon T")
    b.add_argument("--mc-init", type=int, metavar="N", help="initialise --tlb with N Monte Carlo samples")
    b.add_argument("--mc", type=int, metavar="N", help="Monte Carlo estimate with N samples")
    b.add_argument("--exact", action="store_true", help="exact influence by enumeration")
    b.add_argument("--prob", type=float, help="override every edge probability")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--per-node", action="store_true")
    b.add_argument("--timings", action="store_true", help="include wall-clock timings (not reproducible)")
    b.add_argument("--json", metavar="OUT")
    b.set_defaults(func=cmd_bound)

    s = sub.add_parser("sweep", help="run a parameter sweep from a JSON spec")
    s.add_argument("spec")
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_sweep)

    g = sub.add_parser("gen", help="generate a random network")
    g.add_argument("family", choices=FAMILIES)
    g.add_argument("n", type=int)
    g.add_argument("param", type=float, help="p (er), d (regular) or alpha (sf, tree)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--lcc", action="store_true")
    g.add_argument("--prob", type=float, default=0.1, help="uniform transmission probability")
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "mc_init", None) and args.tlb is None:
            parser.error("--mc-init requires --tlb")
    except SystemExit as exc:
        return exc.code
    try:
        return args.func(args)
    except TooManyEdgesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (InfboundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
