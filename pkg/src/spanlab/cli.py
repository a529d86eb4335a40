"""Command-line interface: gen, bandwidth, colour, assign, embed,
adversary, regcheck, experiment."""

from __future__ import annotations

import argparse
import csv
import json
import sys

from .graph import GnpParams, generate_gnp, min_degree, read_edge_list, write_edge_list


def _read_vertex_set(path: str) -> set[int]:
    with open(path) as fh:
        return {int(tok) for line in fh for tok in line.split()}


def cmd_gen(args) -> int:
    g = generate_gnp(GnpParams(args.n, args.p, args.seed))
    write_edge_list(g, args.out)
    print(f"wrote {args.out}: n={g.n} m={g.edge_count}")
    return 0


def cmd_bandwidth(args) -> int:
    from .labelling import exact_bandwidth, heuristic_labelling

    g = read_edge_list(args.graph)
    if args.exact:
        bw, lab = exact_bandwidth(g)
        kind = "exact"
    else:
        lab = heuristic_labelling(g)
        bw = lab.bandwidth
        kind = "heuristic"
    print(f"{kind} bandwidth: {bw}")
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["vertex", "position"])
            for v, pos in enumerate(lab.position):
                writer.writerow([v, pos])
    return 0


def cmd_colour(args) -> int:
    from .labelling import heuristic_labelling, proper_colouring

    g = read_edge_list(args.graph)
    lab = heuristic_labelling(g)
    col = proper_colouring(g, args.k, lab)
    used = len(set(col.colour))
    print(f"proper colouring with {used} colours (budget {args.k + 1})")
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["vertex", "colour"])
            for v, c in enumerate(col.colour):
                writer.writerow([v, c])
    return 0


def cmd_regcheck(args) -> int:
    from .regularity import PairParams, test_lower_regular

    g = read_edge_list(args.graph)
    xs = _read_vertex_set(args.x_set)
    ys = _read_vertex_set(args.y_set)
    pp = PairParams(eps=args.eps, d=args.d, p=args.p)
    verdict = test_lower_regular(g, pp, xs, ys, seed=args.seed)
    payload = {
        "kind": verdict.kind,
        "trials": verdict.trials,
        "witness_sizes": (
            [len(s) for s in verdict.witness] if verdict.witness else None
        ),
        "witness_density": verdict.witness_density,
    }
    print(json.dumps(payload, indent=2))
    return 0 if verdict.kind != "witness" else 1


def cmd_assign(args) -> int:
    from .backbone import augmented_backbone
    from .experiments import random_banded_graph
    from .partitioner import assign_H

    h, lab, col = random_banded_graph(args.n, args.k, args.bandwidth, args.degree, args.seed)
    reduced = augmented_backbone(args.r, args.k)
    base, extra = divmod(args.n, args.r * args.k)
    from .backbone import IntegerPartition

    values = []
    at = 0
    for i in range(args.r):
        row = []
        for j in range(args.k):
            row.append(base + (1 if at < extra else 0))
            at += 1
        values.append(tuple(row))
    m = IntegerPartition(tuple(values))
    a = assign_H(h, lab, col, reduced, m, xi=args.xi, beta=args.bandwidth / args.n)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(json.dumps({"r": args.r, "k": args.k, "xi": args.xi}) + "\n")
            writer = csv.writer(fh)
            writer.writerow(["vertex", "i", "j"])
            for v, (i, j) in enumerate(a.f):
                writer.writerow([v, i, j])
    print(f"assignment ok: |X| = {len(a.special)}")
    return 0


def cmd_embed(args) -> int:
    from .embedder import FailureCert, greedy_embed
    from .experiments import cycle_pattern, cycle_square_pattern

    g = read_edge_list(args.graph)
    if args.pattern == "hamilton":
        h, lab = cycle_pattern(g.n)
    else:
        h, lab = cycle_square_pattern(g.n)
    out = greedy_embed(h, g, lab, backtrack_budget=args.budget, seed=args.seed)
    if isinstance(out, FailureCert):
        print(json.dumps(out.to_json()))
        return 1
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["h_vertex", "g_vertex"])
            for hv in sorted(out.map):
                writer.writerow([hv, out.map[hv]])
    print(f"embedded {len(out.map)} vertices")
    return 0


def cmd_adversary(args) -> int:
    from .adversary import build_adversarial_instance, verify_no_F_on_X

    inst = build_adversarial_instance(args.n, args.p, args.eps, args.seed)
    verdict = verify_no_F_on_X(inst)
    rule_counts: dict[str, int] = {}
    for u, v in inst.g.edges():
        key = "-".join(sorted((inst.part_of(u), inst.part_of(v))))
        rule_counts[key] = rule_counts.get(key, 0) + 1
    report = {
        "n": args.n,
        "p": args.p,
        "eps": args.eps,
        "seed": args.seed,
        "x_size": len(inst.x_set),
        "y_sizes": [len(inst.y1), len(inst.y2)],
        "z_sizes": [len(z) for z in inst.z_parts],
        "min_degree": min_degree(inst.g),
        "edges_by_rule": rule_counts,
        "no_F_through_X": verdict,
    }
    text = json.dumps(report, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return 0 if verdict else 1


def cmd_experiment(args) -> int:
    from .experiments import ExperimentSpec, run_resilience_sweep

    spec = ExperimentSpec(
        ns=tuple(args.n),
        ps=tuple(args.p),
        patterns=tuple(args.pattern),
        adversaries=tuple(args.adversary),
        alphas=tuple(args.alpha),
        seeds=tuple(range(args.seeds)),
        backtrack_budget=args.budget,
        out=args.out,
    )
    records = run_resilience_sweep(spec, workers=args.workers)
    outcomes: dict[str, int] = {}
    for rec in records:
        outcomes[rec.outcome] = outcomes.get(rec.outcome, 0) + 1
    print(json.dumps(outcomes, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spanlab")
    parser.add_argument("--seed", type=int, default=0, help="master seed")
    parser.add_argument("--out", help="output path")
    parser.add_argument("--workers", type=int, default=1)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a seeded G(n,p) edge list")
    p.add_argument("n", type=int)
    p.add_argument("p", type=float)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bandwidth", help="bandwidth labelling of a graph file")
    p.add_argument("graph")
    p.add_argument("--exact", action="store_true")
    p.set_defaults(func=cmd_bandwidth)

    p = sub.add_parser("colour", help="proper colouring of a graph file")
    p.add_argument("graph")
    p.add_argument("-k", type=int, default=3)
    p.set_defaults(func=cmd_colour)

    p = sub.add_parser("regcheck", help="regularity verdict for a pair of vertex sets")
    p.add_argument("graph")
    p.add_argument("x_set")
    p.add_argument("y_set")
    p.add_argument("--eps", type=float, default=0.25)
    p.add_argument("-d", type=float, default=0.3)
    p.add_argument("-p", type=float, default=1.0)
    p.set_defaults(func=cmd_regcheck)

    p = sub.add_parser("assign", help="block-scan assignment of a random banded H")
    p.add_argument("-n", type=int, default=1000)
    p.add_argument("-k", type=int, default=2)
    p.add_argument("-r", type=int, default=2)
    p.add_argument("--bandwidth", type=int, default=10)
    p.add_argument("--degree", type=float, default=3.0)
    p.add_argument("--xi", type=float, default=0.05)
    p.set_defaults(func=cmd_assign)

    p = sub.add_parser("embed", help="greedy-embed a cycle pattern into a graph file")
    p.add_argument("graph")
    p.add_argument("--pattern", choices=["hamilton", "hamilton-square"], default="hamilton")
    p.add_argument("--budget", type=int, default=100_000)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("adversary", help="build and certify an adversarial instance")
    p.add_argument("-n", type=int, default=500)
    p.add_argument("-p", type=float, default=0.3)
    p.add_argument("--eps", type=float, default=0.3)
    p.set_defaults(func=cmd_adversary)

    p = sub.add_parser("experiment", help="run a resilience sweep grid")
    p.add_argument("-n", type=int, nargs="+", default=[60])
    p.add_argument("-p", type=float, nargs="+", default=[1.0])
    p.add_argument("--pattern", nargs="+", default=["hamilton"])
    p.add_argument("--adversary", nargs="+", default=["thin"])
    p.add_argument("--alpha", type=float, nargs="+", default=[0.55])
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--budget", type=int, default=100_000)
    p.set_defaults(func=cmd_experiment)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
