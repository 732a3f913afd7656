"""Stage classifiers: majority, fixed-order, k-NN and a C4.5-style tree.

All four expose the same surface: build a model from stage examples (or
from a canonical order), then ``predict_ranked(vector, legal)`` returns
the legal classes as a ranked permutation. Tie handling is fixed
everywhere so training and prediction are bit-reproducible: descending
score, then ascending type id; neighbour distance ties break by ascending
storage index.

Legality masking is total: the top-ranked class is always a member of the
legal set, so a chained planner can never emit an already-placed fact.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Collection, Mapping, Sequence

import numpy as np

from .encoding import StageExample, StageFeatureVector
from .errors import (
    ConfigurationError,
    ContractError,
    DeserializationError,
    PredictionError,
    TrainingError,
)

#: Information gain at or below this is treated as zero, which makes the
#: attribute unusable for splitting (C4.5's positive-gain rule).
_GAIN_EPS = 1e-12


def _checked_legal(legal: Collection[int]) -> list[int]:
    ordered = sorted(set(legal))
    if not ordered:
        raise PredictionError("legal set is empty; nothing can be predicted")
    return ordered


def _example_shape(examples: Sequence[StageExample]) -> tuple[int, int]:
    """(num_types, stage) shared by all examples; mixed shapes are a bug."""
    if not examples:
        raise TrainingError("no training examples")
    first = examples[0].vector
    for example in examples:
        if example.vector.num_types != first.num_types or example.vector.stage != first.stage:
            raise ContractError("training examples mix stages or catalog sizes")
    return first.num_types, first.stage


def _as_matrix(examples: Sequence[StageExample]) -> tuple[np.ndarray, np.ndarray]:
    matrix = np.array([e.vector.as_row() for e in examples], dtype=np.int16)
    labels = np.array([e.label for e in examples], dtype=np.int16)
    return matrix, labels


class StageModel:
    """Common surface for one position's classifier."""

    scheme = "abstract"

    def predict_ranked(self, vector: StageFeatureVector, legal: Collection[int]) -> list[int]:
        raise NotImplementedError

    def to_payload(self) -> dict:
        raise NotImplementedError

    @staticmethod
    def from_payload(payload: dict) -> "StageModel":
        try:
            scheme = payload["scheme"]
        except (TypeError, KeyError):
            raise DeserializationError("stage payload has no 'scheme' tag") from None
        loader = _PAYLOAD_LOADERS.get(scheme)
        if loader is None:
            raise DeserializationError(f"unknown stage scheme {scheme!r}")
        try:
            return loader(payload)
        except (KeyError, TypeError, ValueError) as exc:
            raise DeserializationError(f"malformed {scheme} payload: {exc}") from exc


# ---------------------------------------------------------------------------
# Majority
# ---------------------------------------------------------------------------


@dataclass
class MajorityModel(StageModel):
    """Ranks classes by training-label frequency."""

    counts: dict[int, int]
    num_types: int
    stage: int

    scheme = "majority"

    def predict_ranked(self, vector: StageFeatureVector, legal: Collection[int]) -> list[int]:
        ordered = _checked_legal(legal)
        return sorted(ordered, key=lambda c: (-self.counts.get(c, 0), c))

    def to_payload(self) -> dict:
        return {
            "scheme": self.scheme,
            "num_types": self.num_types,
            "stage": self.stage,
            "counts": [[c, n] for c, n in sorted(self.counts.items())],
        }


def train_majority(examples: Sequence[StageExample]) -> MajorityModel:
    """Frequency table over labels; no attributes are consulted."""
    num_types, stage = _example_shape(examples)
    counts = Counter(e.label for e in examples)
    return MajorityModel(dict(counts), num_types, stage)


# ---------------------------------------------------------------------------
# Fixed order
# ---------------------------------------------------------------------------


@dataclass
class FixedOrderModel(StageModel):
    """Ranks legal classes by one expert-style canonical total order."""

    canonical: tuple[int, ...]
    _rank: dict = field(init=False, repr=False, compare=False)

    scheme = "fixed-order"

    def __post_init__(self):
        self._rank = {t: r for r, t in enumerate(self.canonical)}

    def predict_ranked(self, vector: StageFeatureVector, legal: Collection[int]) -> list[int]:
        ordered = _checked_legal(legal)
        missing = [c for c in ordered if c not in self._rank]
        if missing:
            raise ContractError(f"legal classes {missing} not covered by the canonical order")
        return sorted(ordered, key=self._rank.__getitem__)

    def to_payload(self) -> dict:
        return {"scheme": self.scheme, "canonical": list(self.canonical)}


def make_fixed_order(canonical: Sequence[int], num_types: int | None = None) -> FixedOrderModel:
    """Build the fixed-order model; canonical must cover the whole catalog."""
    canonical = tuple(canonical)
    size = num_types if num_types is not None else len(canonical)
    if sorted(canonical) != list(range(size)):
        raise ConfigurationError(
            f"canonical order must be a permutation of all {size} type ids"
        )
    return FixedOrderModel(canonical)


# ---------------------------------------------------------------------------
# k-nearest neighbours
# ---------------------------------------------------------------------------


@dataclass
class KnnModel(StageModel):
    """Stores training rows verbatim; all generalization happens at query time."""

    k: int
    num_types: int
    stage: int
    matrix: np.ndarray  # (N, width) int16: presence bits then selections
    labels: np.ndarray  # (N,) int16

    scheme = "knn"

    def predict_ranked(self, vector: StageFeatureVector, legal: Collection[int]) -> list[int]:
        ordered = _checked_legal(legal)
        row = np.asarray(vector.as_row(), dtype=np.int16)
        if row.shape[0] != self.matrix.shape[1]:
            raise ContractError(
                f"query width {row.shape[0]} does not match stored width {self.matrix.shape[1]}"
            )
        distances = np.count_nonzero(self.matrix != row, axis=1)
        # Stable argsort: equal distances resolve by ascending storage index.
        nearest_first = np.argsort(distances, kind="stable")
        legal_set = set(ordered)
        votes: Counter = Counter()
        cast = 0
        # Neighbours whose labels are no longer legal are skipped, so votes
        # always come from the k nearest legally-labelled neighbours; that is
        # what makes the masked fallback follow neighbour order rather than
        # type-id order.
        for index in nearest_first:
            label = int(self.labels[index])
            if label in legal_set:
                votes[label] += 1
                cast += 1
                if cast == self.k:
                    break
        return sorted(ordered, key=lambda c: (-votes.get(c, 0), c))

    def to_payload(self) -> dict:
        return {
            "scheme": self.scheme,
            "k": self.k,
            "num_types": self.num_types,
            "stage": self.stage,
            "rows": self.matrix.tolist(),
            "labels": self.labels.tolist(),
        }


def train_knn(examples: Sequence[StageExample], k: int = 1) -> KnnModel:
    if k < 1:
        raise ConfigurationError(f"k must be at least 1, got {k}")
    num_types, stage = _example_shape(examples)
    matrix, labels = _as_matrix(examples)
    return KnnModel(k, num_types, stage, matrix, labels)


def knn_distance(a: StageFeatureVector, b: StageFeatureVector) -> int:
    """Overlap distance: differing presence bits plus differing selections."""
    if a.num_types != b.num_types or a.stage != b.stage:
        raise ContractError("vectors have different widths")
    diff = sum(x != y for x, y in zip(a.presence, b.presence))
    diff += sum(x != y for x, y in zip(a.selected, b.selected))
    return diff


def predict_knn(model: KnnModel, query: StageFeatureVector, legal: Collection[int]) -> list[int]:
    return model.predict_ranked(query, legal)


# ---------------------------------------------------------------------------
# Decision tree (C4.5-style: gain ratio, multiway nominal splits,
# pessimistic-error subtree replacement)
# ---------------------------------------------------------------------------


@dataclass
class TreeParams:
    min_instances_per_leaf: int = 2
    pruning_enabled: bool = True
    confidence_factor: float = 0.25


@dataclass
class TreeNode:
    """Leaf (no attribute) or an internal multiway split.

    Every node keeps the class counts of the training instances that
    reached it; prediction falls back to them when a query takes an
    attribute value with no child branch.
    """

    counts: dict[int, int]
    attribute: int | None = None
    children: dict[int, "TreeNode"] = field(default_factory=dict)

    @property
    def is_leaf(self) -> bool:
        return self.attribute is None

    def node_count(self) -> int:
        return 1 + sum(child.node_count() for child in self.children.values())

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(child.depth() for child in self.children.values())


@dataclass
class TreeModel(StageModel):
    root: TreeNode
    num_types: int
    stage: int

    scheme = "decision-tree"

    def predict_ranked(self, vector: StageFeatureVector, legal: Collection[int]) -> list[int]:
        ordered = _checked_legal(legal)
        row = vector.as_row()
        if len(row) != self.num_types + self.stage - 1:
            raise ContractError(
                f"query width {len(row)} does not match tree width {self.num_types + self.stage - 1}"
            )
        node = self.root
        while not node.is_leaf:
            child = node.children.get(row[node.attribute])
            if child is None:
                break  # unseen value: answer from the deepest reached node
            node = child
        counts = node.counts
        return sorted(ordered, key=lambda c: (-counts.get(c, 0), c))

    def to_payload(self) -> dict:
        return {
            "scheme": self.scheme,
            "num_types": self.num_types,
            "stage": self.stage,
            "root": _node_to_dict(self.root),
        }


def entropy(class_counts: Mapping[int, int]) -> float:
    """Shannon entropy in bits of a class-count table."""
    total = 0
    for count in class_counts.values():
        if count < 0:
            raise ContractError("class counts must be non-negative")
        total += count
    if total <= 0:
        raise ContractError("class counts sum to zero")
    result = 0.0
    for count in class_counts.values():
        if count > 0:
            p = count / total
            result -= p * math.log2(p)
    return result


def _entropy_from_counts(counts: np.ndarray) -> float:
    total = counts.sum()
    nonzero = counts[counts > 0]
    p = nonzero / total
    return float(-(p * np.log2(p)).sum())


def _gain_ratio_column(column: np.ndarray, labels: np.ndarray, label_space: int) -> float | None:
    """Gain ratio of one attribute column, or None when unusable.

    Unusable means the attribute is constant here (split information 0)
    or its information gain is not positive.
    """
    values, inverse = np.unique(column, return_inverse=True)
    if len(values) < 2:
        return None
    contingency = np.bincount(
        inverse * label_space + labels, minlength=len(values) * label_space
    ).reshape(len(values), label_space)
    subset_sizes = contingency.sum(axis=1)
    total = subset_sizes.sum()
    node_entropy = _entropy_from_counts(contingency.sum(axis=0))
    conditional = sum(
        (size / total) * _entropy_from_counts(row)
        for size, row in zip(subset_sizes, contingency)
        if size > 0
    )
    gain = node_entropy - conditional
    if gain <= _GAIN_EPS:
        return None
    split_info = _entropy_from_counts(subset_sizes)
    if split_info <= 0.0:
        return None
    return gain / split_info


def gain_ratio(examples: Sequence[StageExample], attribute: int) -> float | None:
    """Gain ratio of ``attribute`` over the examples, or None when unusable."""
    num_types, stage = _example_shape(examples)
    width = num_types + stage - 1
    if not 0 <= attribute < width:
        raise ContractError(f"attribute {attribute} out of range 0..{width - 1}")
    matrix, labels = _as_matrix(examples)
    label_space = int(labels.max()) + 1
    return _gain_ratio_column(matrix[:, attribute], labels, label_space)


def train_tree(examples: Sequence[StageExample], params: TreeParams | None = None) -> TreeModel:
    """Top-down induction: max gain ratio, ties by ascending attribute index.

    Growth stops when a node is pure, smaller than min_instances_per_leaf,
    or has no usable attribute left. With pruning enabled, subtrees whose
    pessimistic error estimate does not beat a single leaf are replaced.
    """
    params = params or TreeParams()
    num_types, stage = _example_shape(examples)
    matrix, labels = _as_matrix(examples)
    label_space = int(labels.max()) + 1
    width = matrix.shape[1]

    def build(indices: np.ndarray, used: frozenset[int]) -> TreeNode:
        node_labels = labels[indices]
        counts = {int(c): int(n) for c, n in sorted(Counter(node_labels.tolist()).items())}
        node = TreeNode(counts)
        if len(counts) == 1 or len(indices) < params.min_instances_per_leaf:
            return node
        best_attr = None
        best_ratio = -math.inf
        for attr in range(width):
            if attr in used:
                continue
            ratio = _gain_ratio_column(matrix[indices, attr], node_labels, label_space)
            if ratio is not None and ratio > best_ratio:
                best_ratio = ratio
                best_attr = attr
        if best_attr is None:
            return node
        node.attribute = best_attr
        column = matrix[indices, best_attr]
        for value in np.unique(column):
            subset = indices[column == value]
            node.children[int(value)] = build(subset, used | {best_attr})
        return node

    root = build(np.arange(len(examples)), frozenset())
    if params.pruning_enabled:
        _prune(root, params.confidence_factor)
    return TreeModel(root, num_types, stage)


def predict_tree(model: TreeModel, query: StageFeatureVector, legal: Collection[int]) -> list[int]:
    return model.predict_ranked(query, legal)


def _added_errors(n: float, e: float, cf: float) -> float:
    """Extra errors granted by the upper binomial confidence limit at cf.

    Normal-approximation form used by classic C4.5 implementations; the
    e < 1 branch interpolates between the exact e = 0 solution and the
    approximation at e = 1.
    """
    if e < 1.0:
        base = n * (1.0 - cf ** (1.0 / n))
        if e == 0.0:
            return base
        return base + e * (_added_errors(n, 1.0, cf) - base)
    if e + 0.5 >= n:
        return max(n - e, 0.0)
    z = NormalDist().inv_cdf(1.0 - cf)
    f = (e + 0.5) / n
    r = (f + z * z / (2 * n) + z * math.sqrt(f / n - f * f / n + z * z / (4 * n * n))) / (
        1 + z * z / n
    )
    return r * n - e


def _leaf_errors(counts: Mapping[int, int], cf: float) -> float:
    n = sum(counts.values())
    e = n - max(counts.values())
    return e + _added_errors(float(n), float(e), cf)


def _prune(node: TreeNode, cf: float) -> float:
    """Subtree replacement; returns the pessimistic error of what remains."""
    if node.is_leaf:
        return _leaf_errors(node.counts, cf)
    subtree_errors = sum(_prune(child, cf) for child in node.children.values())
    as_leaf = _leaf_errors(node.counts, cf)
    if as_leaf <= subtree_errors + 1e-9:
        node.attribute = None
        node.children = {}
        return as_leaf
    return subtree_errors


# ---------------------------------------------------------------------------
# Payload (de)serialization
# ---------------------------------------------------------------------------


def _node_to_dict(node: TreeNode) -> dict:
    data: dict = {"counts": [[c, n] for c, n in sorted(node.counts.items())]}
    if not node.is_leaf:
        data["attribute"] = node.attribute
        data["children"] = [[value, _node_to_dict(child)] for value, child in sorted(node.children.items())]
    return data


def _node_from_dict(data: dict) -> TreeNode:
    counts = {int(c): int(n) for c, n in data["counts"]}
    node = TreeNode(counts)
    if "attribute" in data:
        node.attribute = int(data["attribute"])
        node.children = {int(v): _node_from_dict(child) for v, child in data["children"]}
    return node


def _load_majority(payload: dict) -> MajorityModel:
    counts = {int(c): int(n) for c, n in payload["counts"]}
    return MajorityModel(counts, int(payload["num_types"]), int(payload["stage"]))


def _load_fixed_order(payload: dict) -> FixedOrderModel:
    return make_fixed_order([int(t) for t in payload["canonical"]])


def _load_knn(payload: dict) -> KnnModel:
    matrix = np.array(payload["rows"], dtype=np.int16)
    labels = np.array(payload["labels"], dtype=np.int16)
    if matrix.ndim != 2 or matrix.shape[0] != labels.shape[0]:
        raise ValueError("rows and labels do not align")
    return KnnModel(int(payload["k"]), int(payload["num_types"]), int(payload["stage"]), matrix, labels)


def _load_tree(payload: dict) -> TreeModel:
    return TreeModel(_node_from_dict(payload["root"]), int(payload["num_types"]), int(payload["stage"]))


_PAYLOAD_LOADERS = {
    "majority": _load_majority,
    "fixed-order": _load_fixed_order,
    "knn": _load_knn,
    "decision-tree": _load_tree,
}
