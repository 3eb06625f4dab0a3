"""Command-line interface for rnapars."""

from __future__ import annotations

import argparse
import json
import logging
from collections.abc import Sequence
from itertools import combinations
from pathlib import Path

from rich.console import Console
from slugify import slugify

from .config import Settings, read_config_file
from .const import (
    DEFAULT_HEIGHT,
    DEFAULT_MAX_LENGTH,
    DEFAULT_THETA,
    META_FILE,
    STRUCTURES_FILE,
    TREE_FILE,
    logger,
)
from .distances import Constraint, Metric, bp_distance, tree_distance
from .exporter import (
    DISTANCE_COLUMNS,
    MEDIAN_COLUMNS,
    AssignmentExporter,
    OutputFormat,
    frame,
    write_newick,
    write_results,
    write_structures,
)
from .experiment import DEFAULT_METHODS, parse_methods, run_experiment
from .median import solve_median
from .oracle import brute_median
from .readers import (
    degap,
    parse_newick,
    project_consensus,
    read_newick,
    read_stockholm,
    read_structures,
)
from .sampling import SamplerConfig, replicate_seeds, sample_phylogeny
from .smallpars import Solver, solve_small_parsimony
from .structure import SecondaryStructure
from .tree import RnaTree, to_tree

console = Console(stderr=True)

TRUE_WORDS = frozenset({"1", "true", "yes", "on"})
GLOBAL_OPTIONS = frozenset({"verbose", "quiet", "out", "format"})


def _structures(path: Path, min_hairpin: int) -> list[tuple[str, SecondaryStructure]]:
    return degap(read_structures(path), min_hairpin)


def _trees(path: Path, min_hairpin: int) -> list[tuple[str, RnaTree]]:
    return [(name, to_tree(s)) for name, s in _structures(path, min_hairpin)]


def cmd_distance(args: argparse.Namespace) -> None:
    """Compare structures pairwise, or the first against the rest."""
    structures = _structures(args.structures, args.min_hairpin)
    metric = Metric(args.metric)

    if args.pairs == "all":
        pairs = list(combinations(structures, 2))
    else:
        pairs = [(structures[0], other) for other in structures[1:]]

    rows = []

    for (id1, first), (id2, second) in pairs:
        if metric is Metric.BP:
            value = bp_distance(first, second)
        else:
            value = tree_distance(metric, to_tree(first), to_tree(second))

        rows.append({"id1": id1, "id2": id2, "metric": str(metric), "value": value})

    write_results(frame(rows, DISTANCE_COLUMNS), args.out, args.format)


def cmd_median(args: argparse.Namespace) -> None:
    """Compute the median of all input structures."""
    trees = [tree for _, tree in _trees(args.structures, args.min_hairpin)]
    result = solve_median(trees, Metric(args.metric), Constraint(args.constraint))
    row = {
        "method": "median",
        "metric": str(result.metric),
        "constraint": str(result.constraint),
        "dotbracket": result.tree.to_dotbracket(),
        "num_base_pairs": result.tree.num_base_pairs,
        "mcost": result.cost,
    }
    write_results(frame([row], MEDIAN_COLUMNS), args.out, args.format)


def cmd_oracle(args: argparse.Namespace) -> None:
    """Compute a median by exhaustive search, for checking the solvers."""
    trees = [tree for _, tree in _trees(args.structures, args.min_hairpin)]
    cost, tree = brute_median(
        trees, Metric(args.metric), Constraint(args.constraint), cap=args.oracle_cap
    )
    row = {
        "method": "brute-force",
        "metric": args.metric,
        "constraint": args.constraint,
        "dotbracket": tree.to_dotbracket(),
        "num_base_pairs": tree.num_base_pairs,
        "mcost": cost,
    }
    write_results(frame([row], MEDIAN_COLUMNS), args.out, args.format)


def cmd_smallpars(args: argparse.Namespace) -> None:
    """Infer the structures of the internal nodes of a phylogeny."""
    leaf_trees = dict(_trees(args.structures, args.min_hairpin))
    phylogeny = read_newick(args.tree)
    assignment = solve_small_parsimony(
        phylogeny,
        leaf_trees,
        Metric(args.metric),
        Constraint(args.constraint),
        Solver(args.solver),
        max_rounds=args.max_rounds,
    )
    logger.info("SP cost %s over %s edges", assignment.sp_cost, len(phylogeny.edges))
    exporter = AssignmentExporter(phylogeny=phylogeny, assignment=assignment)
    write_results(exporter.table, args.out, args.format)


def cmd_sample(args: argparse.Namespace) -> None:
    """Write random datasets of complete binary phylogenies."""
    args.output_dir.mkdir(parents=True, exist_ok=True)
    width = max(3, len(str(args.replicates)))

    for replicate, seed in enumerate(replicate_seeds(args.seed, args.replicates), 1):
        config = SamplerConfig(
            length=args.length, theta=args.theta, height=args.height, seed=seed
        )
        phylogeny, structures = sample_phylogeny(config)
        target = args.output_dir / f"replicate-{replicate:0{width}d}"
        target.mkdir(exist_ok=True)
        write_structures(target / STRUCTURES_FILE, structures.items())
        write_newick(target / TREE_FILE, phylogeny)
        meta = config.model_dump() | {"replicate": replicate}
        (target / META_FILE).write_text(
            json.dumps(meta, indent=2) + "\n", encoding="utf-8"
        )
        logger.info("Wrote %s structures to %s", len(structures), target)


def cmd_experiment(args: argparse.Namespace) -> None:
    """Run the inference methods over every dataset under a directory."""
    table = run_experiment(
        args.datasets,
        methods=parse_methods(args.methods),
        threads=args.threads,
        max_rounds=args.max_rounds,
        timing=not args.no_timing,
        rank_divergence=args.rank_divergence,
        min_hairpin=args.min_hairpin,
    )
    write_results(table, args.out, args.format)


def cmd_ingest(args: argparse.Namespace) -> None:
    """Turn a Stockholm family into a dataset directory."""
    alignment = read_stockholm(args.stockholm)
    records = project_consensus(alignment.rows, alignment.ss_cons)
    structures = degap(records, args.min_hairpin)
    name = slugify(alignment.name or args.stockholm.stem)
    length = structures[0][1].length

    if length > args.max_length:
        logger.warning("Skipping %s: length %s above %s", name, length, args.max_length)
        return

    if len({structure for _, structure in structures}) == 1:
        logger.warning("Skipping %s: all structures are identical", name)
        return

    target = args.output_dir / name
    target.mkdir(parents=True, exist_ok=True)
    write_structures(target / STRUCTURES_FILE, structures)

    if args.tree is not None:
        write_newick(target / TREE_FILE, read_newick(args.tree))
    elif alignment.newick:
        write_newick(target / TREE_FILE, parse_newick(alignment.newick))
    else:
        logger.warning("%s has no phylogeny; pass --tree to add one", name)

    logger.info(
        "Ingested %s structures of length %s into %s", len(structures), length, target
    )


def _add_metric_options(parser: argparse.ArgumentParser, solver: bool = False) -> None:
    parser.add_argument(
        "--metric", choices=[metric.value for metric in Metric], default="rf"
    )
    parser.add_argument(
        "--constraint",
        choices=[constraint.value for constraint in Constraint],
        default="nc",
    )

    if solver:
        parser.add_argument(
            "--solver", choices=[value.value for value in Solver], default="exact"
        )


def _add_min_hairpin(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--min-hairpin",
        type=int,
        default=0,
        help="unpair pairs enclosing fewer positions after gap removal",
    )


def build_parser() -> tuple[argparse.ArgumentParser, list[argparse.ArgumentParser]]:
    """Return the top-level parser and its subcommand parsers."""
    parser = argparse.ArgumentParser(
        prog="rnapars",
        description="Medians and small parsimony for RNA secondary structures.",
    )
    parser.add_argument("--verbose", action="store_true", help="log debug messages")
    parser.add_argument("--quiet", action="store_true", help="log warnings only")
    parser.add_argument("--config", type=Path, help="key=value file of option defaults")
    parser.add_argument("--out", type=Path, help="write results here, not stdout")
    parser.add_argument(
        "--format", type=OutputFormat, choices=list(OutputFormat), default="csv"
    )
    commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    distance = commands.add_parser("distance", help=cmd_distance.__doc__)
    distance.add_argument("structures", type=Path)
    distance.add_argument(
        "--metric", choices=[metric.value for metric in Metric], default="rf"
    )
    distance.add_argument("--pairs", choices=["all", "first-vs-rest"], default="all")
    _add_min_hairpin(distance)
    distance.set_defaults(handler=cmd_distance)

    median = commands.add_parser("median", help=cmd_median.__doc__)
    median.add_argument("structures", type=Path)
    _add_metric_options(median)
    _add_min_hairpin(median)
    median.set_defaults(handler=cmd_median)

    smallpars = commands.add_parser("smallpars", help=cmd_smallpars.__doc__)
    smallpars.add_argument("structures", type=Path)
    smallpars.add_argument("tree", type=Path)
    _add_metric_options(smallpars, solver=True)
    smallpars.add_argument("--max-rounds", type=int)
    _add_min_hairpin(smallpars)
    smallpars.set_defaults(handler=cmd_smallpars)

    sample = commands.add_parser("sample", help=cmd_sample.__doc__)
    sample.add_argument("--length", type=int, default=DEFAULT_MAX_LENGTH)
    sample.add_argument("--theta", type=int, default=DEFAULT_THETA)
    sample.add_argument("--height", type=int, default=DEFAULT_HEIGHT)
    sample.add_argument("--seed", type=int, default=0)
    sample.add_argument("--replicates", type=int, default=1)
    sample.add_argument("--output-dir", type=Path, required=True)
    sample.set_defaults(handler=cmd_sample)

    experiment = commands.add_parser("experiment", help=cmd_experiment.__doc__)
    experiment.add_argument("datasets", type=Path)
    experiment.add_argument(
        "--methods",
        default=",".join(DEFAULT_METHODS),
        help="comma-separated methods; an empty list gives a header-only table",
    )
    experiment.add_argument("--max-rounds", type=int)
    experiment.add_argument("--threads", type=int)
    experiment.add_argument(
        "--no-timing", action="store_true", help="write 0 as every wall time"
    )
    experiment.add_argument("--rank-divergence", action="store_true")
    _add_min_hairpin(experiment)
    experiment.set_defaults(handler=cmd_experiment)

    ingest = commands.add_parser("ingest", help=cmd_ingest.__doc__)
    ingest.add_argument("stockholm", type=Path)
    ingest.add_argument("--output-dir", type=Path, required=True)
    ingest.add_argument("--tree", type=Path)
    ingest.add_argument("--max-length", type=int, default=DEFAULT_MAX_LENGTH)
    _add_min_hairpin(ingest)
    ingest.set_defaults(handler=cmd_ingest)

    oracle = commands.add_parser("oracle", help=argparse.SUPPRESS)
    oracle.add_argument("structures", type=Path)
    _add_metric_options(oracle)
    oracle.add_argument("--cap", dest="oracle_cap", type=int)
    _add_min_hairpin(oracle)
    oracle.set_defaults(handler=cmd_oracle)

    subparsers = [distance, median, smallpars, sample, experiment, ingest, oracle]

    return parser, subparsers


def apply_config(
    parser: argparse.ArgumentParser,
    subparsers: Sequence[argparse.ArgumentParser],
    values: dict[str, str],
) -> None:
    """
    Make config file values the defaults of the matching options.

    Keys held by Settings are left to it, so the environment can still
    override them.
    """
    for target in [parser, *subparsers]:
        defaults: dict[str, object] = {}

        for key, value in values.items():
            if key in Settings.model_fields:
                continue

            if (key in GLOBAL_OPTIONS) != (target is parser):
                continue

            current = target.get_default(key)
            if isinstance(current, bool):
                defaults[key] = value.lower() in TRUE_WORDS
            else:
                defaults[key] = value

        target.set_defaults(**defaults)


def parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    """Parse arguments, with defaults from ``--config`` and the environment."""
    parser, subparsers = build_parser()
    args = parser.parse_args(argv)
    values = read_config_file(args.config) if args.config else {}

    if values:
        apply_config(parser, subparsers, values)
        args = parser.parse_args(argv)

    settings = Settings.load(values)

    for key in Settings.model_fields:
        if hasattr(args, key) and getattr(args, key) is None:
            setattr(args, key, getattr(settings, key))

    return args


def main(argv: Sequence[str] | None = None) -> int:
    """Run one command and return its exit code."""
    try:
        args = parse_args(argv)

        if args.verbose:
            logger.setLevel(logging.DEBUG)
        elif args.quiet:
            logger.setLevel(logging.WARNING)

        args.handler(args)
    except (ValueError, OSError) as error:
        console.print(f"error: {error}", style="red", markup=False, highlight=False)
        return 2
    except Exception as error:
        logger.exception("Internal error")
        console.print(f"internal error: {error}", markup=False, highlight=False)
        return 1

    return 0


if __name__ == "__main__":
    raise SystemExit(main())
