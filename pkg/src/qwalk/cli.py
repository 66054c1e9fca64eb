"""Command-line harness: generate graphs, certify them, run walks and
tree embeddings, and execute seeded experiments.

Exit codes: 0 when all assertions pass, 1 on an assertion failure,
2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from .certify import certify
from .experiments import EXPERIMENTS, ExperimentConfig, run_experiment
from .graph import gen_complete, gen_gnp, gen_two_clique_bridge, load_graph, save_graph
from .trees import (gen_nary_tree, gen_path_tree, gen_random_tree,
                    image_subgraph, random_homomorphism, save_homomorphism)
from .walks import ListModel, balanced_start, run_walk, save_trace, walk_subgraph


def _add_generate(sub):
    p = sub.add_parser("generate", help="write a graph in edge-list format")
    p.add_argument("--kind", choices=["gnp", "complete", "two-clique"],
                   default="gnp")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--eps", type=float, default=0.3,
                   help="clique-size parameter for two-clique hosts")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)


def _add_certify(sub):
    p = sub.add_parser("certify", help="quasirandomness certification report")
    p.add_argument("--graph", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--out")


def _add_walk(sub):
    p = sub.add_parser("walk", help="run one seeded walk")
    p.add_argument("--graph", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--steps", type=int)
    p.add_argument("--alpha", type=float,
                   help="walk length alpha*n^2 when --steps is absent")
    p.add_argument("--start", type=int)
    p.add_argument("--eps", type=float, default=0.05,
                   help="balance tolerance for the default start")
    p.add_argument("--trace")
    p.add_argument("--subgraph")


def _add_tree(sub):
    p = sub.add_parser("tree", help="embed a rooted tree into a host graph")
    p.add_argument("--host", required=True)
    p.add_argument("--kind", choices=["path", "nary", "random"], required=True)
    p.add_argument("--edges", type=int, help="path/random tree edge count")
    p.add_argument("--branching", type=int)
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--max-degree", type=int, default=4)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--root-image", type=int, default=0)
    p.add_argument("--out-map")
    p.add_argument("--out-subgraph")


def _add_experiment(sub):
    p = sub.add_parser("experiment", help="run a named seeded experiment")
    p.add_argument("name", choices=sorted(EXPERIMENTS))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float)
    p.add_argument("--generator",
                   choices=["gnp", "complete", "two_clique_bridge"],
                   default="gnp")
    p.add_argument("--generator-eps", type=float,
                   help="clique-size parameter for two_clique_bridge")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--start", type=int)
    p.add_argument("--config", help="JSON config file; flags override it")
    p.add_argument("--out")
    p.add_argument("--format", choices=["json"], default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qwalk",
        description="random-walk and tree-embedding laboratory for "
                    "quasirandom graphs")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_generate(sub)
    _add_certify(sub)
    _add_walk(sub)
    _add_tree(sub)
    _add_experiment(sub)
    return parser


def _cmd_generate(args) -> int:
    if args.kind == "gnp":
        g = gen_gnp(args.n, args.p, args.seed)
    elif args.kind == "complete":
        g = gen_complete(args.n)
    else:
        g = gen_two_clique_bridge(args.n, args.eps)
    save_graph(g, args.out)
    print(f"wrote {g} to {args.out}")
    return 0


def _cmd_certify(args) -> int:
    g = load_graph(args.graph)
    report = certify(g, args.eps, trials=args.trials, seed=args.seed,
                     exhaustive=args.exhaustive)
    text = report.to_json()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return 0 if report.quasirandom else 1


def _cmd_walk(args) -> int:
    g = load_graph(args.graph)
    if args.steps is None:
        if args.alpha is None:
            print("error: need --steps or --alpha", file=sys.stderr)
            return 2
        steps = int(args.alpha * g.n * g.n)
    else:
        steps = args.steps
    start = args.start if args.start is not None else balanced_start(g, args.eps)
    model = ListModel(g, args.seed)
    trace = run_walk(g, model, start, steps)
    sub = walk_subgraph(trace)
    print(json.dumps({"start": start, "steps": steps,
                      "distinct_edges": len(sub),
                      "distinct_vertices": int((trace.visit_counts > 0).sum())},
                     sort_keys=True))
    if args.trace:
        save_trace(trace, args.trace)
    if args.subgraph:
        save_graph(sub.to_graph(), args.subgraph)
    return 0


def _cmd_tree(args) -> int:
    g = load_graph(args.host)
    if args.kind == "path":
        if args.edges is None:
            print("error: path trees need --edges", file=sys.stderr)
            return 2
        tree = gen_path_tree(args.edges)
    elif args.kind == "nary":
        if args.branching is None:
            print("error: nary trees need --branching", file=sys.stderr)
            return 2
        tree = gen_nary_tree(args.branching, args.depth)
    else:
        if args.edges is None:
            print("error: random trees need --edges", file=sys.stderr)
            return 2
        tree = gen_random_tree(args.edges + 1, args.max_degree, args.seed)
    model = ListModel(g, args.seed)
    hom = random_homomorphism(g, tree, model, args.root_image)
    sub = image_subgraph(hom)
    print(json.dumps({"tree_vertices": tree.size,
                      "tree_max_degree": tree.max_degree,
                      "image_edges": len(sub)}, sort_keys=True))
    if args.out_map:
        save_homomorphism(hom, args.out_map)
    if args.out_subgraph:
        save_graph(sub.to_graph(), args.out_subgraph)
    return 0


def _cmd_experiment(args) -> int:
    base = {}
    if args.config:
        with open(args.config) as fh:
            base = json.load(fh)
    base.update({"experiment": args.name, "n": args.n, "seed": args.seed,
                 "generator": args.generator, "alpha": args.alpha,
                 "eps": args.eps, "trials": args.trials})
    if args.start is not None:
        base["start"] = args.start
    params = dict(base.get("generator_params", {}))
    if args.p is not None:
        params["p"] = args.p
    if args.generator_eps is not None:
        params["eps"] = args.generator_eps
    base["generator_params"] = params
    cfg = ExperimentConfig(**base)
    report = run_experiment(cfg)
    text = report.to_json()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return 0 if report.passed else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "generate": _cmd_generate,
        "certify": _cmd_certify,
        "walk": _cmd_walk,
        "tree": _cmd_tree,
        "experiment": _cmd_experiment,
    }
    try:
        return handlers[args.command](args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
