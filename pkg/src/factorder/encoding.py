"""Stage-wise feature vectors for the classifier chain.

At stage s the planner sees two things: one presence bit per catalog type
recording whether that type is still among the REMAINING (not yet placed)
facts, and s-1 nominal attributes recording which type was placed at each
earlier position. Presence reflects the remaining set, not the original
input set; the bits for already-placed types are therefore always 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

from .domain import Dataset, FactSet, FactTypeCatalog
from .errors import ContractError, EncodingError, UnknownTypeError

#: Reserved nominal value for fixed-width serialization padding. Live
#: vectors never contain it; learners never see it at a live stage.
NO_SELECTION = -1


@dataclass(frozen=True)
class StageFeatureVector:
    """Presence bits over remaining facts plus earlier selections in order."""

    presence: tuple[int, ...]
    selected: tuple[int, ...]

    @property
    def stage(self) -> int:
        """1-based stage; stage s carries s-1 selected attributes."""
        return len(self.selected) + 1

    @property
    def num_types(self) -> int:
        return len(self.presence)

    @property
    def width(self) -> int:
        return len(self.presence) + len(self.selected)

    def as_row(self) -> tuple[int, ...]:
        """Flat attribute row: presence bits first, then selections."""
        return self.presence + self.selected

    def to_debug_json(self) -> str:
        """Debug dump format used by inspection tooling."""
        return json.dumps({"presence": list(self.presence), "selected": list(self.selected)})


@dataclass(frozen=True)
class StageExample:
    """A stage vector paired with the gold fact for that position."""

    vector: StageFeatureVector
    label: int


def encode_stage(
    catalog: FactTypeCatalog,
    remaining: FactSet,
    prefix: Sequence[int],
    stage: int,
) -> StageFeatureVector:
    """Encode one classification stage.

    ``prefix`` holds the type ids already placed at positions 1..stage-1,
    in order; ``remaining`` holds everything still to be ordered. The two
    must be disjoint and ``stage`` must equal len(prefix) + 1.
    """
    prefix = tuple(prefix)
    if stage != len(prefix) + 1:
        raise ContractError(f"stage {stage} does not match prefix of length {len(prefix)}")
    if len(set(prefix)) != len(prefix):
        raise EncodingError("prefix repeats a fact type")
    overlap = remaining.members & set(prefix)
    if overlap:
        raise EncodingError(f"remaining facts overlap the prefix: {sorted(overlap)}")
    size = catalog.size
    for type_id in list(remaining.members) + list(prefix):
        if not 0 <= type_id < size:
            raise UnknownTypeError(f"type id {type_id} not in catalog of size {size}")
    presence = tuple(1 if t in remaining.members else 0 for t in range(size))
    return StageFeatureVector(presence, prefix)


def training_examples_for_stage(dataset: Dataset, stage: int) -> list[StageExample]:
    """One example per instance, built from gold prefixes (teacher forcing).

    The prefix is the gold order up to stage-1 even where a trained model
    would have predicted differently; the label is the gold fact at this
    stage's position.
    """
    n = dataset.sequence_length
    if not 1 <= stage <= n:
        raise ContractError(f"stage {stage} out of range 1..{n}")
    examples = []
    for instance in dataset.instances:
        prefix = instance.positions[: stage - 1]
        label = instance.positions[stage - 1]
        remaining = FactSet(frozenset(instance.positions[stage - 1 :]), dataset.catalog)
        vector = encode_stage(dataset.catalog, remaining, prefix, stage)
        examples.append(StageExample(vector, label))
    return examples


def legal_classes(remaining: FactSet) -> frozenset[int]:
    """The classes a stage may emit: exactly the remaining fact types."""
    return frozenset(remaining.members)
