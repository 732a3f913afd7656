"""Training and applying the chain of per-position classifiers.

Stage s is trained on gold prefixes (teacher forcing); at prediction time
each stage consumes the pipeline's own prefix, so a mistake at one
position propagates into the inputs of the later ones. The final stage is
trained like the others but its answer is forced by the singleton legal
set.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

from .domain import (
    Dataset,
    FactSet,
    FactTypeCatalog,
    OrderedSequence,
    PlannerConfig,
    atomic_write_text,
    validate_dataset,
)
from .encoding import encode_stage, legal_classes, training_examples_for_stage
from .errors import (
    CompatibilityError,
    ConfigurationError,
    DeserializationError,
    InputError,
    TrainingError,
)
from .learners import (
    StageModel,
    TreeParams,
    make_fixed_order,
    train_knn,
    train_majority,
    train_tree,
)

PLANNER_FORMAT_VERSION = 1

_TREE_PARAM_KEYS = {"min_instances_per_leaf", "pruning_enabled", "confidence_factor"}


@dataclass
class TrainedPlanner:
    """A catalog, the configuration, and one trained model per position."""

    catalog: FactTypeCatalog
    config: PlannerConfig
    stage_models: tuple[StageModel, ...]

    def __post_init__(self):
        if len(self.stage_models) != self.config.sequence_length:
            raise ConfigurationError(
                f"planner has {len(self.stage_models)} stage models for "
                f"sequence length {self.config.sequence_length}"
            )


def _resolve_canonical(catalog: FactTypeCatalog, config: PlannerConfig) -> list[int]:
    canonical = config.scheme_params.get("canonical_order")
    if canonical is None:
        raise ConfigurationError("fixed-order scheme needs scheme_params['canonical_order']")
    ids = []
    for entry in canonical:
        if isinstance(entry, str):
            ids.append(catalog.id_of(entry))
        else:
            ids.append(int(entry))
    return ids


def train_planner(dataset: Dataset, config: PlannerConfig) -> TrainedPlanner:
    """Train one stage model per position on gold-prefix examples."""
    if not dataset.instances:
        raise TrainingError("dataset has no instances")
    if dataset.sequence_length != config.sequence_length:
        raise TrainingError(
            f"dataset sequence length {dataset.sequence_length} does not match "
            f"planner sequence length {config.sequence_length}"
        )
    violations = validate_dataset(dataset)
    if violations:
        head = "; ".join(f"[{v.index}] {v.kind}: {v.message}" for v in violations[:3])
        raise TrainingError(f"dataset is invalid ({len(violations)} violations): {head}")

    models = []
    for stage in range(1, config.sequence_length + 1):
        examples = training_examples_for_stage(dataset, stage)
        if config.scheme == "majority":
            model: StageModel = train_majority(examples)
        elif config.scheme == "fixed-order":
            model = make_fixed_order(_resolve_canonical(dataset.catalog, config), dataset.catalog.size)
        elif config.scheme == "knn":
            model = train_knn(examples, k=int(config.scheme_params.get("k", 1)))
        elif config.scheme == "decision-tree":
            unknown = set(config.scheme_params) - _TREE_PARAM_KEYS
            if unknown:
                raise ConfigurationError(f"unknown decision-tree parameters: {sorted(unknown)}")
            model = train_tree(examples, TreeParams(**config.scheme_params))
        else:  # guarded by PlannerConfig, kept for payload tampering
            raise ConfigurationError(f"unknown scheme {config.scheme!r}")
        models.append(model)
    return TrainedPlanner(dataset.catalog, config, tuple(models))


def order_facts(planner: TrainedPlanner, facts: FactSet) -> OrderedSequence:
    """Run the chain: place one fact per stage until the set is exhausted.

    The output is always a permutation of the input facts; the last stage
    has a single legal class and is forced regardless of its model.
    """
    n = planner.config.sequence_length
    if facts.catalog is not None and facts.catalog != planner.catalog:
        raise CompatibilityError("fact set was built against a different catalog")
    if facts.cardinality != n:
        raise InputError(f"planner orders exactly {n} facts, got {facts.cardinality}")
    size = planner.catalog.size
    invalid = [t for t in facts.members if not 0 <= t < size]
    if invalid:
        raise InputError(f"type ids {sorted(invalid)} not in the planner's catalog")

    remaining = set(facts.members)
    prefix: list[int] = []
    for stage in range(1, n + 1):
        remaining_set = FactSet(frozenset(remaining), planner.catalog)
        vector = encode_stage(planner.catalog, remaining_set, prefix, stage)
        legal = legal_classes(remaining_set)
        ranked = planner.stage_models[stage - 1].predict_ranked(vector, legal)
        choice = ranked[0]
        prefix.append(choice)
        remaining.remove(choice)
    return OrderedSequence(tuple(prefix))


# ---------------------------------------------------------------------------
# Persistence: a single JSON document with a format version.
# ---------------------------------------------------------------------------


def planner_to_dict(planner: TrainedPlanner) -> dict:
    return {
        "format_version": PLANNER_FORMAT_VERSION,
        "catalog": list(planner.catalog.types),
        "config": planner.config.to_dict(),
        "stages": [model.to_payload() for model in planner.stage_models],
    }


def planner_from_dict(data: dict) -> TrainedPlanner:
    if not isinstance(data, dict):
        raise DeserializationError("planner document must be a JSON object")
    version = data.get("format_version")
    if version != PLANNER_FORMAT_VERSION:
        raise DeserializationError(f"unsupported planner format version: {version!r}")
    for key in ("catalog", "config", "stages"):
        if key not in data:
            raise DeserializationError(f"planner document is missing {key!r}")
    try:
        catalog = FactTypeCatalog(tuple(data["catalog"]))
        config = PlannerConfig.from_dict(data["config"])
    except (KeyError, TypeError) as exc:
        raise DeserializationError(f"malformed planner document: {exc}") from exc
    stages = tuple(StageModel.from_payload(p) for p in data["stages"])
    if len(stages) != config.sequence_length:
        raise DeserializationError(
            f"planner document has {len(stages)} stages for sequence length {config.sequence_length}"
        )
    for stage_number, model in enumerate(stages, start=1):
        num_types = getattr(model, "num_types", catalog.size)
        if num_types != catalog.size:
            raise DeserializationError(
                f"stage {stage_number} was trained on {num_types} types but the catalog has {catalog.size}"
            )
    return TrainedPlanner(catalog, config, stages)


def save_planner(planner: TrainedPlanner, path: str) -> None:
    atomic_write_text(path, json.dumps(planner_to_dict(planner)) + "\n")


def load_planner(path: str) -> TrainedPlanner:
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except json.JSONDecodeError as exc:
        raise DeserializationError(
            f"{path}: not valid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return planner_from_dict(data)
