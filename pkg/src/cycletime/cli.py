"""Command-line driver.

Exit codes: 0 ok / converges, 1 input error, 2 no cycle time,
3 indeterminate tie, 4 a reproduction check failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import sys

import numpy as np

from . import exponents, report, scenarios, structure, tropical, verdict
from .errors import CycleTimeError
from .exponents import DEFAULT_STEPS, DEFAULT_TRIALS
from .law import BACKWARD, FORWARD, Deterministic, load_law_file
from .structure import DEFAULT_EPSILON

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NO_CYCLE_TIME = 2
EXIT_INDETERMINATE = 3
EXIT_CHECK_FAILED = 4


class InputError(Exception):
    pass


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _nonnegative(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def _node_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated node numbers, got {text!r}") from None


def _add_output(p: argparse.ArgumentParser, formats=("json", "text")) -> None:
    p.add_argument("--format", choices=formats, default="json")
    p.add_argument("--output", "-o", help="write the report here instead of stdout")


def _add_sampling(p: argparse.ArgumentParser, steps: int = DEFAULT_STEPS,
                  trials: int = DEFAULT_TRIALS) -> None:
    p.add_argument("--steps", "-n", type=_positive, default=steps, help=f"horizon n (default {steps})")
    p.add_argument("--trials", "-T", type=_positive, default=trials, help=f"independent trials (default {trials})")
    p.add_argument("--seed", type=int, help="required whenever the law is random")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cycletime",
        description="Cycle time of max-plus recursions x(n+1) = A(n) x(n) with random matrices.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="decide whether the cycle time exists")
    p.add_argument("model")
    _add_sampling(p)
    p.add_argument("--epsilon-gamma", type=float, default=DEFAULT_EPSILON,
                   help="tolerance for ties between estimated exponents")
    _add_output(p)

    p = sub.add_parser("simulate", help="checkpoint series and empirical limit law")
    p.add_argument("model")
    _add_sampling(p, trials=1)
    p.add_argument("--coordinate", "-c", type=_positive, action="append",
                   help="1-based coordinate to report (repeatable; default all)")
    p.add_argument("--mode", choices=("forward", "backward"), default="forward")
    p.add_argument("--radius", type=float, default=verdict.DEFAULT_RADIUS,
                   help="cluster radius for the limit histogram")
    _add_output(p, ("json", "text", "csv"))

    p = sub.add_parser("estimate-gamma", help="top / bottom / per-component exponents")
    p.add_argument("model")
    _add_sampling(p)
    _add_output(p)

    p = sub.add_parser("semigroup", help="pattern semigroup and block reachability")
    p.add_argument("model")
    p.add_argument("--cap", type=_positive, default=structure.DEFAULT_SEMIGROUP_CAP)
    p.add_argument("--rows", type=_node_list, help="1-based node set I")
    p.add_argument("--cols", type=_node_list, help="1-based node set J")
    _add_output(p)

    p = sub.add_parser("reproduce", help="run the checks of a bundled scenario")
    p.add_argument("name", choices=sorted(scenarios.SCENARIOS))
    p.add_argument("--seed", type=int)
    p.add_argument("--steps", "-n", type=_positive)
    p.add_argument("--trials", "-T", type=_positive)
    p.add_argument("--gamma1", type=float, default=0.3)
    p.add_argument("--gamma2", type=float, default=0.2)
    p.add_argument("--p", type=float, default=0.5, dest="prob")
    _add_output(p)

    p = sub.add_parser("oracle", help="brute-force reference values")
    p.add_argument("kind", choices=("karp", "paths", "exact-dist"))
    p.add_argument("model", nargs="?", help="model file (karp also accepts --matrix)")
    p.add_argument("--matrix", help="JSON matrix for karp, e.g. '[[0,3],[1,\"-inf\"]]'")
    p.add_argument("--sequence", help="comma-separated atom names or 1-based indices (paths)")
    p.add_argument("--steps", "-n", type=_nonnegative, default=2)
    p.add_argument("--coordinate", "-c", type=_positive, default=1)
    _add_output(p, ("json", "text", "csv"))
    return parser


# ---------------------------------------------------------------- helpers


def _load(path: str):
    return load_law_file(path)


def _seed(law, seed):
    if seed is None and not law.is_deterministic:
        raise InputError("this law is random: pass --seed")
    return seed


def _coordinate(law, c: int) -> int:
    if not 1 <= c <= law.dimension:
        raise InputError(f"coordinate {c} outside 1..{law.dimension}")
    return c - 1


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(rows: list[list]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _text_lines(obj, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines = []
    for key, val in obj.items():
        if isinstance(val, dict):
            lines.append(f"{pad}{key}:")
            lines.extend(_text_lines(val, indent + 1))
        elif isinstance(val, list) and val and all(isinstance(v, dict) for v in val):
            lines.append(f"{pad}{key}:")
            for item in val:
                sub = _text_lines(item, indent + 2)
                lines.append(f"{pad}  - {sub[0].strip()}")
                lines.extend(sub[1:])
        else:
            lines.append(f"{pad}{key}: {val}")
    return lines


def _render(obj: dict, fmt: str) -> str:
    if fmt == "text":
        return "\n".join(_text_lines(obj)) + "\n"
    return report.dumps(obj)


# ---------------------------------------------------------------- subcommands


def cmd_analyze(args) -> int:
    law = _load(args.model)
    seed = _seed(law, args.seed)
    v = verdict.decide_cycle_time(law, args.steps, args.trials, seed, args.epsilon_gamma)
    if args.format == "text":
        text = f"model: {args.model}\n" + report.verdict_text(v)
    else:
        out = report.verdict_json(v, law)
        out["config"] = {"steps": args.steps, "trials": args.trials, "seed": seed,
                         "epsilonGamma": args.epsilon_gamma}
        text = report.dumps(out)
    _emit(text, args.output)
    if v.converges is True:
        return EXIT_OK
    if v.converges is False:
        return EXIT_NO_CYCLE_TIME
    return EXIT_INDETERMINATE


def cmd_simulate(args) -> int:
    law = _load(args.model)
    seed = _seed(law, args.seed)
    coords = [_coordinate(law, c) for c in (args.coordinate or range(1, law.dimension + 1))]
    direction = BACKWARD if args.mode == "backward" else FORWARD
    marks, values = verdict.checkpoint_series(law, args.steps, args.trials, 0 if seed is None else seed,
                                              direction)
    if args.format == "csv":
        rows = [["trial", "k"] + [f"x{c + 1}/k" for c in coords]]
        for t in range(values.shape[0]):
            for m, k in enumerate(marks):
                rows.append([t, k] + [tropical.value_to_json(float(values[t, m, c])) for c in coords])
        _emit(_csv(rows), args.output)
        return EXIT_OK
    series = []
    for m, k in enumerate(marks):
        col = values[:, m]
        series.append({
            "k": k,
            "mean": [tropical.value_to_json(float(col[:, c].mean())) for c in coords],
            "min": [tropical.value_to_json(float(col[:, c].min())) for c in coords],
            "max": [tropical.value_to_json(float(col[:, c].max())) for c in coords],
        })
    finals = values[:, -1]
    limit_law = []
    for c in coords:
        clusters = verdict.cluster_values(finals[:, c], args.radius)
        limit_law.append({
            "coordinate": c + 1,
            "clusters": [{"center": tropical.value_to_json(cl.center), "mass": cl.mass, "count": cl.count}
                         for cl in clusters],
        })
    out = {
        "model": report.law_summary(law),
        "config": {"steps": args.steps, "trials": args.trials, "seed": seed, "mode": args.mode,
                   "coordinates": [c + 1 for c in coords], "radius": args.radius},
        "checkpoints": series,
        "final": [[tropical.value_to_json(float(finals[t, c])) for c in coords]
                  for t in range(finals.shape[0])],
        "limitLaw": limit_law,
        "provenance": "mc",
    }
    if args.format == "text":
        lines = [f"{args.mode} simulation, n={args.steps}, trials={args.trials}, seed={seed}"]
        for row in series:
            lines.append(f"  k={row['k']:>8}  mean={row['mean']}")
        for entry in limit_law:
            parts = ", ".join(f"{cl['center']:.4g}: {cl['mass']:.4f}" if isinstance(cl["center"], float)
                              else f"{cl['center']}: {cl['mass']:.4f}" for cl in entry["clusters"])
            lines.append(f"  limit law of coordinate {entry['coordinate']}: {parts}")
        _emit("\n".join(lines) + "\n", args.output)
    else:
        _emit(report.dumps(out), args.output)
    return EXIT_OK


def cmd_estimate_gamma(args) -> int:
    law = _load(args.model)
    seed = _seed(law, args.seed)
    top = exponents.top_exponent(law, args.steps, args.trials, seed)
    out = {"model": report.law_summary(law),
           "config": {"steps": args.steps, "trials": args.trials, "seed": seed},
           "top": top.to_json()}
    if all(report.row_condition_per_atom(law)):
        out["bottom"] = exponents.estimate_bottom_exponent(law, args.steps, args.trials, seed).to_json()
    else:
        out["bottom"] = None
    cond = structure.condense(structure.build_support_graph(law))
    comps = exponents.component_exponents(law, cond, args.steps, args.trials, seed)
    out["components"] = [
        {"id": report.comp_label(c.id), "nodes": report.nodes_json(c.nodes), "trivial": c.trivial,
         "gamma": comps[c.id].to_json()}
        for c in cond.components
    ]
    best = max(comps.values(), key=lambda e: e.value)
    out["maxComponentGamma"] = best.to_json()
    _emit(_render(out, args.format), args.output)
    return EXIT_OK


def cmd_semigroup(args) -> int:
    law = _load(args.model)
    sg = structure.semigroup_closure(law, args.cap)
    out = {
        "model": report.law_summary(law),
        "size": len(sg),
        "generators": [tropical.matrix_to_json(m) for m in sg.generator_matrices()],
        "elements": [tropical.matrix_to_json(m) for m in sg.matrices()],
    }
    if (args.rows is None) != (args.cols is None):
        raise InputError("--rows and --cols go together")
    if args.rows is not None:
        rows = [_coordinate(law, i) for i in args.rows]
        cols = [_coordinate(law, j) for j in args.cols]
        cert = structure.block_reachability_certificate(sg, rows, cols)
        out["certificate"] = {
            "I": report.nodes_json(cert.I),
            "J": report.nodes_json(cert.J),
            "found": cert.found,
            "witness": None if cert.witness is None else tropical.matrix_to_json(cert.witness),
            "scanned": cert.scanned,
        }
    if args.format == "text":
        lines = [f"pattern semigroup: {len(sg)} elements"]
        if "certificate" in out:
            c = out["certificate"]
            lines.append(f"I={c['I']} -> J={c['J']}: {'witness ' + json.dumps(c['witness']) if c['found'] else 'none'}")
        _emit("\n".join(lines) + "\n", args.output)
    else:
        _emit(report.dumps(out), args.output)
    return EXIT_OK


def cmd_reproduce(args) -> int:
    if args.seed is None:
        raise InputError("reproduce runs Monte Carlo checks: pass --seed")
    kwargs = {"seed": args.seed}
    if args.name == "example1":
        if args.steps:
            kwargs["n"] = args.steps
        if args.trials:
            kwargs["trials"] = args.trials
        checks = scenarios.reproduce_example1(args.gamma1, args.gamma2, **kwargs)
        params = {"gamma1": args.gamma1, "gamma2": args.gamma2}
    else:
        if args.steps:
            kwargs["n"] = args.steps
        if args.trials:
            kwargs["small_trials"] = args.trials
        checks = scenarios.reproduce_example2(args.prob, **kwargs)
        params = {"p": args.prob}
    ok = scenarios.all_passed(checks)
    if args.format == "text":
        lines = [f"{args.name} {params} seed={args.seed}"]
        lines += [f"  {'PASS' if c.passed else 'FAIL'}  {c.name}" for c in checks]
        text = "\n".join(lines) + "\n"
    else:
        text = report.dumps({"scenario": args.name, "params": params, "seed": args.seed,
                             "passed": ok, "checks": [c.to_json() for c in checks]})
    _emit(text, args.output)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _atom_index(law, token: str) -> int:
    labels = law.labels
    if token in labels:
        return labels.index(token)
    try:
        k = int(token)
    except ValueError:
        raise InputError(f"unknown atom {token!r}; atoms are {labels}") from None
    if not 1 <= k <= len(labels):
        raise InputError(f"atom index {k} outside 1..{len(labels)}")
    return k - 1


def _paths_entry(law, seq: tuple[int, ...]) -> dict:
    mats = [law.stack[k] for k in seq]
    d = law.dimension
    prod = tropical.product_range(mats).reconstruct()
    oracle = np.array([[tropical.path_weight_oracle(mats, i, j) for j in range(d)] for i in range(d)])
    return {
        "atoms": [law.labels[k] for k in seq],
        "product": tropical.matrix_to_json(prod),
        "pathMax": tropical.matrix_to_json(oracle),
        "match": bool(np.array_equal(prod, oracle)),
    }


def cmd_oracle(args) -> int:
    if args.kind == "karp":
        if args.matrix is not None:
            try:
                a = tropical.as_matrix(json.loads(args.matrix), square=True)
            except json.JSONDecodeError as exc:
                raise InputError(f"--matrix is not valid JSON: {exc}") from None
        elif args.model:
            law = _load(args.model)
            if not isinstance(law, Deterministic) and not law.is_deterministic:
                raise InputError("karp needs a deterministic model or --matrix")
            a = law.stack[0]
        else:
            raise InputError("karp needs a model or --matrix")
        out = {"kind": "karp", "value": tropical.value_to_json(exponents.karp_max_cycle_mean(a)),
               "mode": "exact"}
        rows = [["value"], [out["value"]]]
    elif args.kind == "paths":
        if not args.model:
            raise InputError("paths needs a model")
        law = _load(args.model)
        if args.sequence:
            seqs = [tuple(_atom_index(law, t.strip()) for t in args.sequence.split(",") if t.strip())]
            if not seqs[0]:
                raise InputError("--sequence is empty")
        else:
            if args.steps < 1:
                raise InputError("paths needs --steps >= 1")
            seqs = list(itertools.product(range(len(law.labels)), repeat=args.steps))
        entries = [_paths_entry(law, s) for s in seqs]
        out = {"kind": "paths", "sequences": entries, "allMatch": all(e["match"] for e in entries)}
        rows = [["atoms", "match"]] + [[" ".join(e["atoms"]), e["match"]] for e in entries]
    else:
        if not args.model:
            raise InputError("exact-dist needs a model")
        law = _load(args.model)
        coord = _coordinate(law, args.coordinate)
        dist = verdict.exact_small_n_distribution(law, args.steps, coord)
        out = {"kind": "exact-dist", "steps": args.steps, "coordinate": args.coordinate,
               "distribution": {str(tropical.value_to_json(v)): p for v, p in dist.items()}}
        rows = [["value", "prob"]] + [[tropical.value_to_json(v), p] for v, p in dist.items()]
    if args.format == "csv":
        _emit(_csv(rows), args.output)
    elif args.format == "text":
        _emit("\n".join(",".join(str(x) for x in r) for r in rows) + "\n", args.output)
    else:
        _emit(report.dumps(out), args.output)
    return EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "estimate-gamma": cmd_estimate_gamma,
    "semigroup": cmd_semigroup,
    "reproduce": cmd_reproduce,
    "oracle": cmd_oracle,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors; that code means "no cycle time" here
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return COMMANDS[args.command](args)
    except (InputError, CycleTimeError, ValueError, OSError) as exc:
        print(f"cycletime {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
