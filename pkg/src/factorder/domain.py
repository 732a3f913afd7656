"""Fact types, fact sets, orderings, datasets and their file formats.

A fact is identified solely by its type id (dense 0..T-1 within a
catalog); at most one fact of a given type can occur in an input set.
Everything downstream (encoding, learners, planners, evaluation) builds
on the immutable value types defined here.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import (
    CatalogError,
    ConfigurationError,
    DataFormatError,
    DuplicateFactError,
    UnknownTypeError,
)

#: Valid planner scheme names.
SCHEMES = ("majority", "fixed-order", "knn", "decision-tree")


@dataclass(frozen=True)
class FactTypeCatalog:
    """Closed, ordered set of fact-type names; ids are dense 0..T-1.

    Iteration order is declaration order and is stable across runs, so a
    name's id never changes for a given schema file.
    """

    types: tuple[str, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.types:
            raise CatalogError("catalog needs at least one fact type")
        index = {}
        for type_id, name in enumerate(self.types):
            if not name:
                raise CatalogError(f"empty fact-type name at position {type_id}")
            if name in index:
                raise CatalogError(f"duplicate fact-type name: {name!r}")
            index[name] = type_id
        object.__setattr__(self, "_index", index)

    @property
    def size(self) -> int:
        return len(self.types)

    def id_of(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownTypeError(f"unknown fact type: {name!r}") from None

    def name_of(self, type_id: int) -> str:
        if not 0 <= type_id < len(self.types):
            raise UnknownTypeError(f"type id {type_id} out of range 0..{len(self.types) - 1}")
        return self.types[type_id]

    def __contains__(self, name: str) -> bool:
        return name in self._index


@dataclass(frozen=True)
class FactSet:
    """Unordered set of distinct fact-type ids.

    ``catalog`` records the governing catalog when known; planners use it
    to reject fact sets built against a different domain.
    """

    members: frozenset[int]
    catalog: FactTypeCatalog | None = None

    @property
    def cardinality(self) -> int:
        return len(self.members)

    def names(self) -> set[str]:
        if self.catalog is None:
            raise UnknownTypeError("fact set carries no catalog to resolve names")
        return {self.catalog.name_of(t) for t in self.members}


@dataclass(frozen=True)
class OrderedSequence:
    """Total order over a fact set; index 0 holds the first fact.

    Construction is permissive so that invalid corpora can be loaded and
    then reported by validate_dataset; use it to check permutation and id
    validity.
    """

    positions: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.positions)

    def to_fact_set(self, catalog: FactTypeCatalog | None = None) -> FactSet:
        return FactSet(frozenset(self.positions), catalog)


@dataclass(frozen=True)
class Dataset:
    """A corpus of gold orderings, all of one fixed length."""

    catalog: FactTypeCatalog
    instances: tuple[OrderedSequence, ...]
    sequence_length: int


@dataclass(frozen=True)
class Violation:
    """One invariant breach found by validate_dataset."""

    index: int
    kind: str  # "length" | "permutation" | "id-validity"
    message: str


@dataclass(frozen=True)
class PlannerConfig:
    """Scheme choice plus scheme parameters for one planner.

    ``scheme_params`` keys by scheme: knn takes "k"; fixed-order takes
    "canonical_order" (fact-type names or ids covering the whole catalog);
    decision-tree takes "min_instances_per_leaf", "pruning_enabled" and
    "confidence_factor". ``rng_seed`` is recorded for reproducibility and
    reserved for stochastic schemes; none of the built-in four consume it.

    A single-position planner (sequence_length 1) is accepted as a
    degenerate case; its one stage is always forced by the singleton
    input.
    """

    sequence_length: int
    scheme: str
    scheme_params: dict = field(default_factory=dict)
    rng_seed: int = 0

    def __post_init__(self):
        if self.sequence_length < 1:
            raise ConfigurationError("sequence_length must be at least 1")
        if self.scheme not in SCHEMES:
            raise ConfigurationError(
                f"unknown scheme {self.scheme!r}; valid schemes: {', '.join(SCHEMES)}"
            )

    def to_dict(self) -> dict:
        return {
            "sequence_length": self.sequence_length,
            "scheme": self.scheme,
            "scheme_params": dict(self.scheme_params),
            "rng_seed": self.rng_seed,
        }

    @staticmethod
    def from_dict(data: dict) -> "PlannerConfig":
        return PlannerConfig(
            sequence_length=data["sequence_length"],
            scheme=data["scheme"],
            scheme_params=dict(data.get("scheme_params", {})),
            rng_seed=data.get("rng_seed", 0),
        )


def build_catalog(names: Sequence[str]) -> FactTypeCatalog:
    """Build a catalog assigning dense ids in declaration order."""
    return FactTypeCatalog(tuple(names))


def make_fact_set(catalog: FactTypeCatalog, names: Iterable[str]) -> FactSet:
    """Resolve names against the catalog into a FactSet.

    Raises UnknownTypeError for unresolvable names and DuplicateFactError
    when a name repeats (one fact per type).
    """
    members = set()
    for name in names:
        type_id = catalog.id_of(name)
        if type_id in members:
            raise DuplicateFactError(f"fact type {name!r} appears more than once")
        members.add(type_id)
    return FactSet(frozenset(members), catalog)


def fact_set_from_ids(catalog: FactTypeCatalog, ids: Iterable[int]) -> FactSet:
    """FactSet from raw type ids, with the same duplicate/validity checks."""
    members = set()
    for type_id in ids:
        if not 0 <= type_id < catalog.size:
            raise UnknownTypeError(f"type id {type_id} not in catalog of size {catalog.size}")
        if type_id in members:
            raise DuplicateFactError(f"type id {type_id} appears more than once")
        members.add(type_id)
    return FactSet(frozenset(members), catalog)


def validate_dataset(dataset: Dataset) -> list[Violation]:
    """List every instance-level invariant breach; empty means valid.

    Violations are data, not failures: an invalid corpus loads fine and
    is rejected only when handed to training.
    """
    violations = []
    n = dataset.sequence_length
    size = dataset.catalog.size
    for index, instance in enumerate(dataset.instances):
        positions = instance.positions
        if len(positions) != n:
            violations.append(
                Violation(index, "length", f"instance has {len(positions)} facts, expected {n}")
            )
        if len(set(positions)) != len(positions):
            violations.append(
                Violation(index, "permutation", "instance repeats a fact type")
            )
        bad = [t for t in positions if not 0 <= t < size]
        if bad:
            violations.append(
                Violation(index, "id-validity", f"type ids {bad} not in catalog of size {size}")
            )
    return violations


# ---------------------------------------------------------------------------
# File formats. The domain schema is a JSON object; datasets are JSON Lines.
# Both are case-sensitive text, shared by real corpora and synthetic output.
# ---------------------------------------------------------------------------


def atomic_write_text(path: str, text: str) -> None:
    """Write via temp-file-then-rename so failures leave no partial file."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_domain_schema(path: str) -> tuple[FactTypeCatalog, list[str] | None]:
    """Read a domain schema file: fact types plus optional canonical order."""
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict) or "fact_types" not in data:
        raise DataFormatError(f"{path}: expected an object with a 'fact_types' list")
    try:
        catalog = build_catalog(data["fact_types"])
    except CatalogError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc
    canonical = data.get("canonical_order")
    if canonical is not None:
        unknown = [name for name in canonical if name not in catalog]
        if unknown:
            raise DataFormatError(f"{path}: canonical_order names not in fact_types: {unknown}")
    return catalog, canonical


def save_domain_schema(path: str, catalog: FactTypeCatalog, canonical_order: Sequence[str] | None = None) -> None:
    data: dict = {"fact_types": list(catalog.types)}
    if canonical_order is not None:
        data["canonical_order"] = list(canonical_order)
    atomic_write_text(path, json.dumps(data, indent=2) + "\n")


def load_dataset(path: str, catalog: FactTypeCatalog) -> Dataset:
    """Read a JSON Lines corpus: one {"id": ..., "order": [names]} per line.

    The sequence length is fixed by the first instance; any later line of
    a different length, with an unknown name, or with a repeated name is
    rejected with its line number (mixed-length corpora are invalid).
    """
    instances: list[OrderedSequence] = []
    n: int | None = None
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataFormatError(f"not valid JSON ({exc.msg})", line=lineno) from exc
            if not isinstance(record, dict) or "order" not in record:
                raise DataFormatError("expected an object with an 'order' list", line=lineno)
            order = record["order"]
            if not isinstance(order, list) or not order:
                raise DataFormatError("'order' must be a non-empty list of fact-type names", line=lineno)
            try:
                ids = []
                seen = set()
                for name in order:
                    type_id = catalog.id_of(name)
                    if type_id in seen:
                        raise DuplicateFactError(f"fact type {name!r} repeated in 'order'")
                    seen.add(type_id)
                    ids.append(type_id)
            except (UnknownTypeError, DuplicateFactError) as exc:
                raise DataFormatError(str(exc), line=lineno) from exc
            if n is None:
                n = len(ids)
            elif len(ids) != n:
                raise DataFormatError(
                    f"instance has {len(ids)} facts but this corpus has {n} facts per instance",
                    line=lineno,
                )
            instances.append(OrderedSequence(tuple(ids)))
    if n is None:
        raise DataFormatError(f"{path}: dataset file contains no instances")
    return Dataset(catalog, tuple(instances), n)


def save_dataset(path: str, dataset: Dataset, ids: Sequence[str] | None = None) -> None:
    """Write the JSON Lines corpus format; instance ids default to inst-NNNNNN."""
    lines = []
    for index, instance in enumerate(dataset.instances):
        record = {
            "id": ids[index] if ids is not None else f"inst-{index + 1:06d}",
            "order": [dataset.catalog.name_of(t) for t in instance.positions],
        }
        lines.append(json.dumps(record))
    atomic_write_text(path, "\n".join(lines) + "\n")
