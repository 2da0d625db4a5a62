"""Command-line front end: generate, distances, mst, cluster, evaluate.

Every command writes its fully resolved configuration as
``<command>.config.json`` next to its outputs. Exit status is 0 on success,
1 on validation failures and 2 on I/O failures.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .errors import ValidationError
from .evaluate import compare_ensemble
from .files import ensemble_to_csv, read_ensemble_csv, write_bundle
from .graph import ArcSet, check_graph_properties, clusterize, connected_components, mst
from .metrics import MetricKind, build_distance_matrix, read_distance_csv
from .simgen import NetworkSpec, random_network, synthesize
from .spectral import WelchConfig

OUT_ENV = "COHTOPO_OUT"
DEFAULT_OUT = "cohtopo-out"

EXIT_OK, EXIT_VALIDATION, EXIT_IO = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _welch_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--segment-length", type=int, default=128, help="Welch segment length (power of two)")
    p.add_argument("--overlap", type=float, default=0.5, help="segment overlap fraction in [0, 1)")
    p.add_argument("--window", default="hann", help="window name understood by scipy.signal.get_window")


def _welch(args) -> WelchConfig:
    return WelchConfig(args.segment_length, args.overlap, args.window)


def build_parser() -> argparse.ArgumentParser:
    default_out = os.environ.get(OUT_ENV, DEFAULT_OUT)
    parser = _Parser(prog="cohtopo", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="simulate a random tree network")
    g.add_argument("--nodes", type=int, default=10)
    g.add_argument("--steps", type=int, default=1000)
    g.add_argument("--noise-ratio", type=float, default=0.5)
    g.add_argument("--seed", type=int, default=1)

    d = sub.add_parser("distances", help="pairwise distance matrix of an ensemble CSV")
    d.add_argument("ensemble")
    d.add_argument("--metric", choices=["correlation", "static", "coherence"], default="coherence")
    _welch_args(d)

    m = sub.add_parser("mst", help="minimum spanning tree of a distance CSV")
    m.add_argument("distances")

    c = sub.add_parser("cluster", help="per-node minimum-cost clusterization of a distance CSV")
    c.add_argument("distances")
    c.add_argument("--connect", action="store_true", help="impose connectivity (returns the MST)")

    e = sub.add_parser("evaluate", help="score correlation vs coherence reconstructions")
    e.add_argument("spec")
    e.add_argument("ensemble")
    _welch_args(e)

    for p in (g, d, m, c, e):
        p.add_argument("--out", default=default_out, help=f"output directory (env {OUT_ENV})")
    return parser


def _config(args, **extra) -> str:
    doc = {k: v for k, v in vars(args).items() if k != "func"}
    doc.update(extra)
    doc["version"] = __version__
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def cmd_generate(args) -> dict[str, str]:
    spec = random_network(args.nodes, args.noise_ratio, seed=args.seed)
    run = synthesize(spec, args.steps, seed=args.seed)
    truth = ArcSet(spec.n, tuple(spec.edges()))
    return {
        "network.json": spec.to_json(),
        "ensemble.csv": ensemble_to_csv(run.ensemble),
        "truth.dot": truth.to_dot("truth"),
        "generate.config.json": _config(args, max_noise_correlation=run.max_noise_correlation()),
    }


def cmd_distances(args) -> dict[str, str]:
    ens = read_ensemble_csv(args.ensemble)
    kind = MetricKind.parse(args.metric)
    welch = _welch(args)
    if kind is not MetricKind.COHERENCE:
        welch = None
    dm = build_distance_matrix(ens, kind, welch)
    return {
        f"distances_{kind.value}.csv": dm.to_csv(),
        f"distances_{kind.value}.config.json": _config(
            args, metric=kind.value, welch=welch.as_dict() if welch else None
        ),
    }


def cmd_mst(args) -> dict[str, str]:
    dm = read_distance_csv(args.distances)
    tree = mst(dm)
    return {
        "mst.dot": tree.to_dot("mst"),
        "mst_edges.csv": tree.to_csv(),
        "mst.config.json": _config(args),
    }


def cmd_cluster(args) -> dict[str, str]:
    dm = read_distance_csv(args.distances)
    if args.connect:
        tree = mst(dm)
        return {
            "mst.dot": tree.to_dot("mst"),
            "mst_edges.csv": tree.to_csv(),
            "cluster.config.json": _config(args),
        }
    forest = clusterize(dm)
    report = check_graph_properties(forest, dm)
    comps = connected_components(forest)
    listing = "".join(" ".join(str(dm.ids[k]) for k in block) + "\n" for block in comps)
    return {
        "forest.dot": forest.to_dot("forest"),
        "forest_edges.csv": forest.to_csv(),
        "components.txt": listing,
        "properties.txt": "\n".join(report.lines()) + "\n",
        "cluster.config.json": _config(args),
    }


def cmd_evaluate(args) -> dict[str, str]:
    spec = NetworkSpec.from_json(Path(args.spec).read_text())
    ens = read_ensemble_csv(args.ensemble)
    report = compare_ensemble(spec, ens, _welch(args))
    files = report.files()
    files["evaluate.config.json"] = _config(args, welch=_welch(args).as_dict())
    return files


COMMANDS = {
    "generate": cmd_generate,
    "distances": cmd_distances,
    "mst": cmd_mst,
    "cluster": cmd_cluster,
    "evaluate": cmd_evaluate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        files = COMMANDS[args.command](args)
        written = write_bundle(args.out, files)
    except ValidationError as exc:
        print(f"cohtopo {args.command}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"cohtopo {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO
    for path in written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
