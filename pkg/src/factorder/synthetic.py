"""Deterministic synthetic ordering domains with known ground truth.

Stands in for hand-ordered corpora: a policy fixes the natural order of
any admissible fact set, a generator samples fact sets and orders them by
the policy, and an exhaustive oracle certifies the ceiling any fixed-order
planner can reach on small catalogs. One type (the anchor) is mandatory
in every instance and always placed first, so position 1 stays trivially
learnable even under noise.
"""

from __future__ import annotations

import itertools
import json
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .domain import (
    Dataset,
    FactSet,
    FactTypeCatalog,
    OrderedSequence,
    atomic_write_text,
    build_catalog,
)
from .errors import ConfigurationError, ContractError, DataFormatError
from .rng import SplitMix64

POLICY_KINDS = ("fixed-priority", "context-dependent")

SYNTHETIC_SPEC_FORMAT_VERSION = 1


@dataclass(frozen=True)
class OrderingRule:
    """Context rule: when ``condition`` is present, ``first`` precedes
    ``second``; otherwise ``second`` precedes ``first``.

    Realized as a swap of the two types' base-priority ranks, which keeps
    the induced relation a strict total order for every fact set.
    """

    condition: int
    first: int
    second: int


@dataclass(frozen=True)
class OrderingPolicy:
    """Base priority (highest first) plus optional context rules."""

    kind: str
    priority: tuple[int, ...]
    rules: tuple[OrderingRule, ...] = ()

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ConfigurationError(f"unknown policy kind {self.kind!r}")
        if len(set(self.priority)) != len(self.priority):
            raise ConfigurationError("priority repeats a type id")
        base = {t: r for r, t in enumerate(self.priority)}
        paired = set()
        for rule in self.rules:
            ids = {rule.condition, rule.first, rule.second}
            if len(ids) != 3 or not ids <= set(self.priority):
                raise ConfigurationError(f"rule uses invalid or repeated type ids: {rule}")
            if base[rule.second] >= base[rule.first]:
                raise ConfigurationError(
                    "rule direction must flip the base priority: "
                    f"{rule.second} must outrank {rule.first} without the condition"
                )
            pair = frozenset((rule.first, rule.second))
            if pair & paired:
                raise ConfigurationError("rules must touch disjoint type pairs")
            paired |= pair

    def effective_ranks(self, present: frozenset[int]) -> dict[int, int]:
        """Priority ranks after applying every triggered rule's swap."""
        rank = {t: r for r, t in enumerate(self.priority)}
        for rule in self.rules:
            if rule.condition in present:
                rank[rule.first], rank[rule.second] = rank[rule.second], rank[rule.first]
        return rank


@dataclass(frozen=True)
class SyntheticDomainSpec:
    """Everything needed to regenerate a synthetic corpus bit-identically.

    ``terminal``, when set, names a second mandatory type that closes every
    document: always present, always ordered last. A planner can only get
    the last position wrong by placing the terminal fact early, and no
    masked scheme with the ascending-id tie rule ever does when the
    terminal holds the highest type id, so endpoint accuracy becomes a
    structural property of the data rather than a lucky outcome.
    """

    catalog: FactTypeCatalog
    anchor: int
    sequence_length: int
    policy: OrderingPolicy
    noise: float
    seed: int
    terminal: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.noise < 1.0:
            raise ConfigurationError(f"noise must be in [0, 1), got {self.noise}")
        min_for_noise = 3 if self.terminal is None else 4
        if self.noise > 0.0 and self.sequence_length < min_for_noise:
            raise ConfigurationError(
                "noise needs a swappable interior: position 1 (and a terminal last "
                "position, when present) is never displaced"
            )
        if self.sequence_length > self.catalog.size:
            raise ConfigurationError(
                f"sequence length {self.sequence_length} exceeds catalog size {self.catalog.size}"
            )
        if self.sequence_length < 2:
            raise ConfigurationError("sequence length must be at least 2")
        if self.policy.priority[0] != self.anchor:
            raise ConfigurationError("policy must rank the anchor type first")
        if set(self.policy.priority) != set(range(self.catalog.size)):
            raise ConfigurationError("policy priority must cover the whole catalog")
        protected = {self.anchor}
        if self.terminal is not None:
            if self.terminal == self.anchor:
                raise ConfigurationError("terminal type must differ from the anchor")
            if self.policy.priority[-1] != self.terminal:
                raise ConfigurationError("policy must rank the terminal type last")
            protected.add(self.terminal)
        for rule in self.policy.rules:
            if protected & {rule.condition, rule.first, rule.second}:
                raise ConfigurationError("rules must not involve the anchor or terminal type")

    @property
    def num_types(self) -> int:
        return self.catalog.size

    @property
    def kind(self) -> str:
        return self.policy.kind


def _type_names(num_types: int, with_terminal: bool) -> list[str]:
    digits = max(2, len(str(num_types - 1)))
    names = ["anchor"] + [f"fact-{i:0{digits}d}" for i in range(1, num_types)]
    if with_terminal:
        names[-1] = "terminal"
    return names


def generate_domain(
    num_types: int,
    kind: str,
    seed: int,
    sequence_length: int = 6,
    noise: float = 0.0,
    with_terminal: bool = False,
) -> SyntheticDomainSpec:
    """Deterministically derive a domain spec from the seed.

    The anchor is type id 0; with ``with_terminal`` the highest id becomes
    the mandatory closing type. Context-dependent domains get one rule
    over the pair ranked directly after the anchor, with a condition type
    drawn from the rest; flipping an adjacent-rank pair guarantees no
    single fixed order can match the policy on both sides of the
    condition.
    """
    if kind not in POLICY_KINDS:
        raise ConfigurationError(f"unknown domain kind {kind!r}; valid: {', '.join(POLICY_KINDS)}")
    if sequence_length < 2:
        raise ConfigurationError("sequence length must be at least 2")
    mandatory = 2 if with_terminal else 1
    if num_types < max(sequence_length, mandatory + 1):
        raise ConfigurationError(
            f"need at least {max(sequence_length, mandatory + 1)} types for this configuration"
        )
    free_needed = 2 + (1 if kind == "context-dependent" else 0)
    if num_types < mandatory + free_needed:
        raise ConfigurationError(
            f"{kind} domains need at least {mandatory + free_needed} types"
        )
    rng = SplitMix64(seed)
    terminal = num_types - 1 if with_terminal else None
    middle = [t for t in range(1, num_types) if t != terminal]
    priority = [0] + rng.sample_distinct(middle, len(middle))
    if terminal is not None:
        priority.append(terminal)
    rules: tuple[OrderingRule, ...] = ()
    if kind == "context-dependent":
        second, first = priority[1], priority[2]  # base order: second before first
        candidates = [t for t in middle if t not in (first, second)]
        condition = candidates[rng.below(len(candidates))]
        rules = (OrderingRule(condition=condition, first=first, second=second),)
    policy = OrderingPolicy(kind, tuple(priority), rules)
    catalog = build_catalog(_type_names(num_types, with_terminal))
    return SyntheticDomainSpec(catalog, 0, sequence_length, policy, noise, seed, terminal)


def ground_truth_order(spec: SyntheticDomainSpec, facts: FactSet) -> OrderedSequence:
    """The unique policy-consistent order of the set; anchor first."""
    if spec.anchor not in facts.members:
        raise ContractError("fact set is missing the mandatory anchor type")
    if spec.terminal is not None and spec.terminal not in facts.members:
        raise ContractError("fact set is missing the mandatory terminal type")
    if facts.cardinality != spec.sequence_length:
        raise ContractError(
            f"fact set has {facts.cardinality} members, spec orders {spec.sequence_length}"
        )
    rank = spec.policy.effective_ranks(facts.members)
    return OrderedSequence(tuple(sorted(facts.members, key=rank.__getitem__)))


def generate_dataset(spec: SyntheticDomainSpec, count: int) -> Dataset:
    """Sample ``count`` instances, bit-deterministic per (spec, count).

    Per instance, in this draw order: the free (non-mandatory) types via a
    partial Fisher-Yates over ascending ids, then (only when noise > 0)
    one uniform fraction deciding whether to perturb, then the swap index.
    A perturbation applies one adjacent transposition that never touches
    position 1 (nor the last position when a terminal type is present).
    """
    if count < 1:
        raise ConfigurationError("instance count must be at least 1")
    rng = SplitMix64(spec.seed)
    mandatory = [spec.anchor] + ([spec.terminal] if spec.terminal is not None else [])
    free = [t for t in range(spec.num_types) if t not in mandatory]
    picks = spec.sequence_length - len(mandatory)
    swappable = spec.sequence_length - 1 - len(mandatory)
    instances = []
    for _ in range(count):
        members = frozenset(mandatory + rng.sample_distinct(free, picks))
        gold = list(ground_truth_order(spec, FactSet(members, spec.catalog)).positions)
        if spec.noise > 0.0 and rng.fraction() < spec.noise:
            j = 1 + rng.below(swappable)
            gold[j], gold[j + 1] = gold[j + 1], gold[j]
        instances.append(OrderedSequence(tuple(gold)))
    return Dataset(spec.catalog, tuple(instances), spec.sequence_length)


@dataclass(frozen=True)
class FixedOrderBound:
    """Best canonical order over a dataset and the accuracy it achieves."""

    canonical: tuple[int, ...]
    mean_accuracy: float
    per_position: tuple[float, ...]


MAX_ORACLE_TYPES = 8


def best_fixed_order_oracle(dataset: Dataset) -> FixedOrderBound:
    """Exhaustively search all T! canonical orders for the best mean
    per-position accuracy any fixed-order planner can reach.

    Desk-scale only: refuses catalogs above 8 types (8! = 40320 orders).
    Ties go to the lexicographically smallest canonical order.
    """
    size = dataset.catalog.size
    if size > MAX_ORACLE_TYPES:
        raise ConfigurationError(
            f"oracle is exhaustive and limited to {MAX_ORACLE_TYPES} types, got {size}"
        )
    n = dataset.sequence_length
    grouped = Counter(
        (frozenset(inst.positions), inst.positions) for inst in dataset.instances
    )
    groups = [(tuple(sorted(members)), gold, weight) for (members, gold), weight in grouped.items()]
    total = len(dataset.instances) * n

    best_order: tuple[int, ...] | None = None
    best_matches = -1
    for perm in itertools.permutations(range(size)):
        rank = [0] * size
        for position, type_id in enumerate(perm):
            rank[type_id] = position
        matches = 0
        for members, gold, weight in groups:
            predicted = sorted(members, key=rank.__getitem__)
            matches += weight * sum(p == g for p, g in zip(predicted, gold))
        if matches > best_matches:
            best_matches = matches
            best_order = perm

    assert best_order is not None
    rank = [0] * size
    for position, type_id in enumerate(best_order):
        rank[type_id] = position
    position_matches = [0] * n
    for members, gold, weight in groups:
        predicted = sorted(members, key=rank.__getitem__)
        for position, (p, g) in enumerate(zip(predicted, gold)):
            position_matches[position] += weight * (p == g)
    per_position = tuple(m / len(dataset.instances) for m in position_matches)
    return FixedOrderBound(best_order, best_matches / total, per_position)


# ---------------------------------------------------------------------------
# Sidecar spec file: records everything needed to regenerate the corpus.
# ---------------------------------------------------------------------------


def spec_to_dict(spec: SyntheticDomainSpec) -> dict:
    name = spec.catalog.name_of
    return {
        "format_version": SYNTHETIC_SPEC_FORMAT_VERSION,
        "num_types": spec.num_types,
        "sequence_length": spec.sequence_length,
        "kind": spec.kind,
        "noise": spec.noise,
        "seed": spec.seed,
        "anchor": name(spec.anchor),
        "terminal": None if spec.terminal is None else name(spec.terminal),
        "fact_types": list(spec.catalog.types),
        "policy": {
            "priority": [name(t) for t in spec.policy.priority],
            "rules": [
                {"condition": name(r.condition), "first": name(r.first), "second": name(r.second)}
                for r in spec.policy.rules
            ],
        },
    }


def spec_from_dict(data: dict) -> SyntheticDomainSpec:
    if data.get("format_version") != SYNTHETIC_SPEC_FORMAT_VERSION:
        raise DataFormatError(f"unsupported synthetic spec version: {data.get('format_version')!r}")
    catalog = build_catalog(data["fact_types"])
    policy = OrderingPolicy(
        data["kind"],
        tuple(catalog.id_of(t) for t in data["policy"]["priority"]),
        tuple(
            OrderingRule(
                condition=catalog.id_of(r["condition"]),
                first=catalog.id_of(r["first"]),
                second=catalog.id_of(r["second"]),
            )
            for r in data["policy"].get("rules", [])
        ),
    )
    terminal = data.get("terminal")
    return SyntheticDomainSpec(
        catalog=catalog,
        anchor=catalog.id_of(data["anchor"]),
        sequence_length=data["sequence_length"],
        policy=policy,
        noise=data["noise"],
        seed=data["seed"],
        terminal=None if terminal is None else catalog.id_of(terminal),
    )


def save_spec(path: str, spec: SyntheticDomainSpec) -> None:
    atomic_write_text(path, json.dumps(spec_to_dict(spec), indent=2) + "\n")


def load_spec(path: str) -> SyntheticDomainSpec:
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: not valid JSON ({exc})") from exc
    try:
        return spec_from_dict(data)
    except (KeyError, TypeError) as exc:
        raise DataFormatError(f"{path}: malformed synthetic spec: {exc}") from exc
