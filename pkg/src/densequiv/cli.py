"""Command-line entry point: ``densequiv <command> [options]``.

Results go to stdout as JSON (floats at 12 significant digits, infinities as
the strings ``"inf"``/``"-inf"``); bulk data goes to the files named by
``--out``, ``--svg`` or ``--trace``. Exit codes: 0 success, 1 usage error,
2 infeasible constraint, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import exact, fitting, graphon, graphs, mcmc, phase, variational
from .errors import Degenerate, HullBoundary, InfeasibleConstraint, NoConvergence, OutOfRegime

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _clean(x):
    """Recursively convert to JSON-ready values with 12 significant digits."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_clean(v) for v in x]
    if isinstance(x, (bool, np.bool_)) or x is None or isinstance(x, str):
        return bool(x) if isinstance(x, np.bool_) else x
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, Fraction):
        x = float(x)
    x = float(x)
    if math.isnan(x):
        return None
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(f"{x:.12g}")


def emit(obj) -> None:
    print(json.dumps(_clean(obj)))


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc


def _families(text: str):
    try:
        return graphs.parse_families(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _snap(table, target):
    target = np.asarray(target, dtype=float)
    if target.size != table.m:
        raise UsageError(f"expected {table.m} target values, got {target.size}")
    key = exact.snap_to_key(table, target)
    dens = table.key_density(key)
    return key, dens, {
        "requested": target,
        "key": list(key),
        "density": dens,
        "snapped": bool(np.any(np.abs(dens - target) > 1e-12)),
    }


# --- commands ------------------------------------------------------------------------


def cmd_enumerate(a):
    table = exact.enumerate_graphs(a.n, _families(a.families), chunks=a.chunks, threads=a.threads)
    if a.out:
        table.to_csv(a.out)
    emit({"n": a.n, "families": [f.name for f in table.families], "keys": len(table.counts), "total": table.total})


def cmd_fit(a):
    table = exact.enumerate_graphs(a.n, _families(a.families), threads=a.threads)
    target = np.array(_floats(a.target))
    snap = None
    if not a.no_snap:
        _, target, snap = _snap(table, target)
    res = fitting.fit_theta_detailed(table, target, tol=a.tol, max_iter=a.max_iter)
    out = {"theta": res.theta, "iterations": res.iterations, "residual": res.residual}
    if snap is not None:
        out["snap"] = snap
    emit(out)


def cmd_entropy(a):
    table = exact.enumerate_graphs(a.n, _families(a.families), threads=a.threads)
    if (a.target is None) == (a.key is None):
        raise UsageError("give exactly one of --target and --key")
    if a.key is not None:
        key, snap = tuple(int(x) for x in a.key.split(",")), None
    else:
        key, _, snap = _snap(table, _floats(a.target))
    r = fitting.relative_entropy(table, key, tol=a.tol)
    emit(
        {
            "key": list(r.key),
            "theta": r.theta,
            "omega": r.omega,
            "S_n": r.S_n,
            "s_n": r.s_n,
            "psi_n": r.psi_n,
            "on_boundary": r.on_boundary,
            "snap": snap,
        }
    )


def cmd_variational(a):
    model = a.model
    if model == "edge-triangle":
        if a.t1 is None or a.t2 is None:
            raise UsageError("edge-triangle needs --t1 and --t2")
        theta_inf = None if a.theta_inf is None else _floats(a.theta_inf)
        v = variational.s_inf("edge-triangle", a.t1, a.t2, theta_inf=theta_inf)
    else:
        t = {"edge": a.t1, "triangle": a.t2}.get(model, a.t)
        if t is None:
            t = a.t
        if t is None:
            raise UsageError(f"{model} needs a target (--t1, --t2 or --t)")
        if model == "star" and a.j is None:
            raise UsageError("star needs --j")
        v = variational.s_inf(model, t, j=a.j)
    emit(
        {
            "theta_inf": v.theta_inf,
            "u_star": v.u_star,
            "s_inf_kind": v.kind,
            "case": v.case,
            "value": v.value,
            "terms": v.terms,
            "notes": v.notes,
        }
    )


def cmd_minrate(a):
    fams = _families(a.families)
    if a.target is not None:
        target = _floats(a.target)
    else:
        lookup = {"edge": a.t1, "triangle": a.t2}
        target = [lookup.get(f.kind) for f in fams]
        if any(t is None for t in target):
            raise UsageError("give --target or --t1/--t2 matching --families")
    r = variational.min_rate_on_levelset(
        fams, target, blocks=a.blocks, restarts=a.restarts, seed=a.seed, workers=a.threads or 1
    )
    if a.out:
        graphon.write_graphon(r.graphon, a.out)
    emit(
        {
            "families": [f.name for f in fams],
            "target": target,
            "value": r.value,
            "violation": r.violation,
            "restart": r.restart,
            "feasible_restarts": r.feasible_restarts,
            "jensen_bound": variational.jensen_bound(fams, target),
            "constant_candidate": variational.constant_candidate(fams, target),
            "widths": r.graphon.widths,
            "values": r.graphon.values,
        }
    )


def cmd_classify(a):
    if a.graph:
        g = graphs.read_graph(a.graph)
        t1 = float(graphs.hom_density(graphs.EDGE, g))
        t2 = float(graphs.hom_density(graphs.TRIANGLE, g))
    else:
        if a.t1 is None or a.t2 is None:
            raise UsageError("classify needs --t1 and --t2, or --graph")
        t1, t2 = a.t1, a.t2
    if not (0 <= t1 <= 1 and 0 <= t2 <= 1):
        raise UsageError("densities must lie in [0, 1]")
    p = phase.classify(t1, t2)
    emit({"t1": p.t1, "t2": p.t2, "verdict": p.verdict, "case": p.case})
    if p.verdict == "Infeasible":
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_sweep(a):
    pts = phase.sweep(a.grid)
    if a.out:
        phase.write_csv(pts, a.out)
    if a.svg:
        phase.write_svg(pts, a.svg)
    counts: dict[str, int] = {}
    for p in pts:
        counts[p.verdict] = counts.get(p.verdict, 0) + 1
    emit({"grid": a.grid, "points": len(pts), "verdicts": counts})


def cmd_sample(a):
    fams = _families(a.families)
    initial = None
    if a.graph:
        n, edges = graphs.read_edge_list(a.graph)
        if n != a.n:
            raise UsageError(f"--graph has {n} vertices but --n is {a.n}")
        initial = mcmc.adjacency_matrix(n, edges)
    try:
        cfg = mcmc.SamplerConfig(a.n, fams, _floats(a.theta), a.steps, a.burnin, a.thin, a.seed, a.chains)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    s = mcmc.run_chain(cfg, initial=initial, threads=a.threads, keep_trace=bool(a.trace))
    if a.trace:
        with open(a.trace, "w") as fh:
            fh.write(",".join(["chain", "record"] + [f.name for f in fams]) + "\n")
            for c, tr in enumerate(s.traces):
                for r, row in enumerate(tr):
                    fh.write(",".join([str(c), str(r)] + [f"{x:.12g}" for x in row]) + "\n")
    emit({"n": a.n, "theta": list(cfg.theta), **s.as_dict()})


def cmd_scallop(a):
    sc = graphon.scallop_graphon(a.epsilon)
    if a.out:
        graphon.write_graphon(sc.graphon, a.out)
    emit(
        {
            "epsilon": a.epsilon,
            "c": sc.c,
            "p": sc.p,
            "edge_density": graphon.density(graphs.EDGE, sc.graphon),
            "triangle_density": graphon.density(graphs.TRIANGLE, sc.graphon),
            "triangle_unordered": graphon.scallop_triangle_unordered(a.epsilon),
            "rate": graphon.rate_functional(sc.graphon),
            "note": "triangle_density counts homomorphisms; triangle_unordered is one sixth of it",
        }
    )


# --- parser --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="JSON on stdout (the default; accepted for scripts)")
    common.add_argument("--threads", type=int, default=None, help="cap on worker threads")
    common.add_argument("--seed", type=int, default=0)

    p = _Parser(prog="densequiv", description="Canonical vs microcanonical dense graph ensembles.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func)
        return sp

    sp = add("enumerate", cmd_enumerate, "exact statistics table over all graphs on n vertices")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--families", required=True, help="comma list: edge, wedge, triangle, starJ")
    sp.add_argument("--chunks", type=int, default=1)
    sp.add_argument("--out", help="CSV output path")

    sp = add("fit", cmd_fit, "canonical multiplier for a density target")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--families", required=True)
    sp.add_argument("--target", required=True, help="t1[,t2,...]")
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--max-iter", type=int, default=200)
    sp.add_argument("--no-snap", action="store_true", help="fit the real target as given")

    sp = add("entropy", cmd_entropy, "finite-n relative entropy for a snapped target")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--families", required=True)
    sp.add_argument("--target", help="densities, snapped to the nearest non-empty key")
    sp.add_argument("--key", help="raw integer statistics, used as given")
    sp.add_argument("--tol", type=float, default=1e-10)

    sp = add("variational", cmd_variational, "limiting relative entropy verdict")
    sp.add_argument("--model", required=True, choices=["edge", "triangle", "star", "wedge", "edge-triangle"])
    sp.add_argument("--t1", type=float)
    sp.add_argument("--t2", type=float)
    sp.add_argument("--t", type=float, help="target for single-family models")
    sp.add_argument("--j", type=int)
    sp.add_argument("--theta-inf", help="theta1,theta2 estimate for the broken-case lower bound")

    sp = add("minrate", cmd_minrate, "minimise the rate over step graphons on a density level set")
    sp.add_argument("--families", default="edge,triangle")
    sp.add_argument("--t1", type=float)
    sp.add_argument("--t2", type=float)
    sp.add_argument("--target")
    sp.add_argument("--blocks", type=int, default=4)
    sp.add_argument("--restarts", type=int, default=16)
    sp.add_argument("--out", help="write the best graphon here")

    sp = add("classify", cmd_classify, "equivalence verdict for an edge-triangle point")
    sp.add_argument("--t1", type=float)
    sp.add_argument("--t2", type=float)
    sp.add_argument("--graph", help="classify the densities of this graph file")

    sp = add("sweep", cmd_sweep, "classify a grid over the unit square")
    sp.add_argument("--grid", type=int, required=True)
    sp.add_argument("--out", help="CSV output path")
    sp.add_argument("--svg", help="SVG output path")

    sp = add("sample", cmd_sample, "Metropolis sampling of the canonical ensemble")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--families", required=True)
    sp.add_argument("--theta", required=True)
    sp.add_argument("--steps", type=int, required=True)
    sp.add_argument("--burnin", type=int, default=0)
    sp.add_argument("--thin", type=int, default=1)
    sp.add_argument("--chains", type=int, default=1)
    sp.add_argument("--graph", help="initial graph file")
    sp.add_argument("--trace", help="CSV trace output path")

    sp = add("scallop", cmd_scallop, "minimal-triangle graphon at edge density 1/2 + epsilon")
    sp.add_argument("--epsilon", type=float, required=True)
    sp.add_argument("--out", help="graphon output path")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args) or EXIT_OK
    except UsageError as exc:
        print(f"densequiv {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InfeasibleConstraint, HullBoundary) as exc:
        print(f"densequiv {args.command}: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (Degenerate, NoConvergence, OutOfRegime) as exc:
        print(f"densequiv {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"densequiv {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"densequiv {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
