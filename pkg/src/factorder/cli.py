"""Command-line surface: train, order, evaluate, compare, synth, inspect.

Exit codes: 0 success, 1 usage or configuration error, 2 data error
(unparseable or invalid input files, incompatible fact sets), 3 internal
error. Every command validates its inputs before writing anything, and
all file writes are atomic.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import synthetic
from .domain import (
    PlannerConfig,
    SCHEMES,
    load_dataset,
    load_domain_schema,
    make_fact_set,
    save_dataset,
    save_domain_schema,
    validate_dataset,
)
from .encoding import training_examples_for_stage
from .errors import (
    CompatibilityError,
    ConfigurationError,
    DataFormatError,
    DeserializationError,
    DuplicateFactError,
    FactOrderingError,
    InputError,
    TrainingError,
    UnknownTypeError,
)
from .evaluation import (
    SignificanceConfig,
    compare_schemes,
    cross_validate,
    stratified_folds,
)
from .pipeline import load_planner, order_facts, save_planner, train_planner
from .report import (
    format_accuracy_table,
    format_comparison_table,
    write_comparison_files,
    write_report_files,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3

#: Default directory for report outputs when --report has no directory part.
REPORT_DIR_ENV = "FACTORDER_REPORT_DIR"

_DATA_ERRORS = (
    DataFormatError,
    DeserializationError,
    CompatibilityError,
    InputError,
    UnknownTypeError,
    DuplicateFactError,
    TrainingError,
)


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; this surface reserves 2 for
    data errors, so remap usage problems to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _report_path(path: str) -> str:
    directory = os.environ.get(REPORT_DIR_ENV)
    if directory and not os.path.dirname(path):
        return os.path.join(directory, path)
    return path


def _scheme_params(args, scheme: str) -> dict:
    if scheme == "knn":
        return {"k": args.k}
    if scheme == "decision-tree":
        return {
            "min_instances_per_leaf": args.min_leaf,
            "pruning_enabled": not args.no_prune,
            "confidence_factor": args.confidence,
        }
    if scheme == "fixed-order":
        if args.canonical_order is None:
            raise ConfigurationError(
                "fixed-order scheme needs a canonical_order entry in the schema file"
            )
        return {"canonical_order": list(args.canonical_order)}
    return {}


def _add_scheme_flags(parser) -> None:
    parser.add_argument("--k", type=int, default=1, help="neighbours for the knn scheme")
    parser.add_argument("--min-leaf", type=int, default=2, help="decision-tree minimum instances per node")
    parser.add_argument("--no-prune", action="store_true", help="disable decision-tree pruning")
    parser.add_argument("--confidence", type=float, default=0.25, help="decision-tree pruning confidence factor")


def _load_corpus(args):
    catalog, canonical = load_domain_schema(args.schema)
    dataset = load_dataset(args.data, catalog)
    args.canonical_order = canonical
    return dataset


def _build_config(args, scheme: str, sequence_length: int) -> PlannerConfig:
    return PlannerConfig(
        sequence_length=sequence_length,
        scheme=scheme,
        scheme_params=_scheme_params(args, scheme),
        rng_seed=getattr(args, "seed", 0),
    )


def cmd_train(args) -> int:
    dataset = _load_corpus(args)
    config = _build_config(args, args.scheme, dataset.sequence_length)
    planner = train_planner(dataset, config)
    save_planner(planner, args.out)
    print(
        f"trained {args.scheme} planner: {dataset.sequence_length} stages, "
        f"{dataset.catalog.size} fact types, {len(dataset.instances)} instances -> {args.out}"
    )
    return EXIT_OK


def _iter_fact_lines(args):
    if args.facts is not None:
        yield [name.strip() for name in args.facts.split(",")]
        return
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"stdin is not JSON lines: {exc.msg}") from exc
        if isinstance(record, dict):
            record = record.get("facts")
        if not isinstance(record, list):
            raise DataFormatError("each stdin line must be a JSON array or {\"facts\": [...]}")
        yield record


def cmd_order(args) -> int:
    planner = load_planner(args.model)
    for names in _iter_fact_lines(args):
        try:
            facts = make_fact_set(planner.catalog, names)
            ordered = order_facts(planner, facts)
        except (UnknownTypeError, DuplicateFactError, InputError) as exc:
            raise InputError(f"cannot order {names}: {exc}") from exc
        print(",".join(planner.catalog.name_of(t) for t in ordered.positions))
    return EXIT_OK


def cmd_evaluate(args) -> int:
    dataset = _load_corpus(args)
    config = _build_config(args, args.scheme, dataset.sequence_length)
    folds = stratified_folds(dataset, args.folds, args.seed)
    report = cross_validate(dataset, config, folds)
    print(format_accuracy_table(report))
    if args.report:
        paths = write_report_files(report, _report_path(args.report))
        print("wrote " + ", ".join(paths))
    return EXIT_OK


def cmd_compare(args) -> int:
    dataset = _load_corpus(args)
    config_a = _build_config(args, args.scheme_a, dataset.sequence_length)
    config_b = _build_config(args, args.scheme_b, dataset.sequence_length)
    folds = stratified_folds(dataset, args.folds, args.seed)
    comparison = compare_schemes(
        dataset, config_a, config_b, folds, SignificanceConfig(alpha=args.alpha)
    )
    print(format_comparison_table(comparison))
    if args.report:
        paths = write_comparison_files(comparison, _report_path(args.report))
        print("wrote " + ", ".join(paths))
    return EXIT_OK


def cmd_synth(args) -> int:
    spec = synthetic.generate_domain(
        args.types,
        args.kind,
        args.seed,
        sequence_length=args.length,
        noise=args.noise,
        with_terminal=args.with_terminal,
    )
    dataset = synthetic.generate_dataset(spec, args.instances)
    stem, _ = os.path.splitext(args.out)
    ids = [f"syn-{i + 1:06d}" for i in range(len(dataset.instances))]
    save_dataset(args.out, dataset, ids=ids)
    synthetic.save_spec(stem + ".spec.json", spec)
    canonical = [spec.catalog.name_of(t) for t in spec.policy.priority]
    save_domain_schema(stem + ".schema.json", spec.catalog, canonical)
    print(
        f"generated {len(dataset.instances)} instances ({spec.kind}, {spec.num_types} types, "
        f"n={spec.sequence_length}, noise={spec.noise}, seed={spec.seed}) -> {args.out}"
    )
    print(f"sidecars: {stem}.spec.json, {stem}.schema.json")
    return EXIT_OK


def cmd_inspect(args) -> int:
    if args.model:
        planner = load_planner(args.model)
        print(
            f"planner: scheme={planner.config.scheme} n={planner.config.sequence_length} "
            f"types={planner.catalog.size}"
        )
        for stage, model in enumerate(planner.stage_models, start=1):
            detail = ""
            if model.scheme == "knn":
                detail = f" stored={model.matrix.shape[0]} k={model.k}"
            elif model.scheme == "decision-tree":
                detail = f" nodes={model.root.node_count()} depth={model.root.depth()}"
            elif model.scheme == "majority":
                top = sorted(model.counts.items(), key=lambda kv: (-kv[1], kv[0]))[:3]
                detail = " top=" + ",".join(
                    f"{planner.catalog.name_of(c)}:{n}" for c, n in top
                )
            print(f"  stage {stage}: {model.scheme}{detail}")
        return EXIT_OK
    dataset = _load_corpus(args)
    print(
        f"dataset: {len(dataset.instances)} instances, n={dataset.sequence_length}, "
        f"types={dataset.catalog.size}"
    )
    violations = validate_dataset(dataset)
    if violations:
        for violation in violations:
            print(f"  violation [{violation.index}] {violation.kind}: {violation.message}")
    else:
        print("  no violations")
    if args.stage is not None:
        examples = training_examples_for_stage(dataset, args.stage)
        example = examples[args.instance]
        print(f"  stage {args.stage} instance {args.instance} label="
              f"{dataset.catalog.name_of(example.label)}")
        print("  " + example.vector.to_debug_json())
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="factorder", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", parents=[], help="train a planner and persist it")
    p.add_argument("--data", required=True, help="dataset file (JSON lines)")
    p.add_argument("--schema", required=True, help="domain schema file (JSON)")
    p.add_argument("--scheme", required=True, choices=SCHEMES)
    p.add_argument("--out", required=True, help="planner output path")
    p.add_argument("--seed", type=int, default=0)
    _add_scheme_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("order", help="order fact sets with a trained planner")
    p.add_argument("--model", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--facts", help="comma-separated fact-type names")
    group.add_argument("--stdin", action="store_true", help="read JSON lines of fact-name arrays")
    p.set_defaults(func=cmd_order)

    p = sub.add_parser("evaluate", help="stratified cross-validation of one scheme")
    p.add_argument("--data", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--scheme", required=True, choices=SCHEMES)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", help="JSON report path; CSV and figure are written alongside")
    _add_scheme_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="paired per-position t-tests between two schemes")
    p.add_argument("--data", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--scheme-a", required=True, choices=SCHEMES)
    p.add_argument("--scheme-b", required=True, choices=SCHEMES)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=0.005)
    p.add_argument("--report", help="JSON report path; CSV and figure are written alongside")
    _add_scheme_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("synth", help="generate a synthetic dataset with sidecar spec")
    p.add_argument("--types", type=int, required=True, help="catalog size")
    p.add_argument("--length", type=int, default=6, help="facts per instance")
    p.add_argument("--kind", choices=synthetic.POLICY_KINDS, default="fixed-priority")
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--instances", type=int, required=True)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument(
        "--with-terminal",
        action="store_true",
        help="add a mandatory closing type that is always ordered last",
    )
    p.add_argument("--out", required=True, help="dataset output path (JSON lines)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("inspect", help="summarize a planner or dataset")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--model")
    group.add_argument("--data")
    p.add_argument("--schema", help="required with --data")
    p.add_argument("--stage", type=int, help="dump one training example's feature vector")
    p.add_argument("--instance", type=int, default=0)
    p.set_defaults(func=cmd_inspect)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "inspect" and args.data and not args.schema:
            parser.error("inspect --data requires --schema")
    except SystemExit as exc:  # argparse exits; keep main() callable in-process
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"factorder: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _DATA_ERRORS as exc:
        print(f"factorder: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"factorder: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FactOrderingError as exc:
        print(f"factorder: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001 - last-resort exit code mapping
        print(f"factorder: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
