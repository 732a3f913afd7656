"""Cross-validation, per-position accuracy, sequence metrics, t-tests.

Evaluation always runs the planner end to end: each position is scored
against the gold order while the planner conditions on its OWN earlier
choices, so one misplaced fact is penalized at every position it
disturbs. Accuracy is therefore a strict measure that includes error
propagation.
"""

from __future__ import annotations

import math
from bisect import bisect
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import betainc

from .domain import Dataset, FactSet, OrderedSequence, PlannerConfig
from .errors import ConfigurationError, ContractError
from .pipeline import order_facts, train_planner
from .rng import SplitMix64

#: Stratification uses the gold class at this 0-based position. Position 0
#: is constant in anchor-bearing domains, so the first informative stage
#: is position 1 (the second fact).
_STRATUM_POSITION = 1


@dataclass(frozen=True)
class FoldAssignment:
    """Instance index to fold id, reproducible from the seed."""

    fold_of: tuple[int, ...]
    k: int
    seed: int

    def test_indices(self, fold: int) -> list[int]:
        return [i for i, f in enumerate(self.fold_of) if f == fold]

    def train_indices(self, fold: int) -> list[int]:
        return [i for i, f in enumerate(self.fold_of) if f != fold]


@dataclass(frozen=True)
class SignificanceConfig:
    """Paired two-tailed t-test configuration."""

    alpha: float = 0.005

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ConfigurationError(f"alpha must be in (0, 1), got {self.alpha}")


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: int
    p: float
    significant: bool
    degenerate_variance: bool = False

    def to_dict(self) -> dict:
        # Degenerate-variance t is infinite; JSON has no literal for that.
        return {
            "t": self.t if math.isfinite(self.t) else None,
            "df": self.df,
            "p": self.p,
            "significant": self.significant,
            "degenerate_variance": self.degenerate_variance,
        }


@dataclass
class EvaluationReport:
    """Per-fold, per-position accuracies plus aggregate sequence metrics."""

    scheme: dict
    k: int
    n: int
    seed: int
    instance_count: int
    fold_position_accuracy: list[list[float]]
    mean_per_position: list[float]
    std_per_position: list[float]
    sequence_metrics: dict
    significance: dict[str, list[TTestResult]] = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "format_version": 1,
            "scheme": self.scheme,
            "folds": self.k,
            "sequence_length": self.n,
            "seed": self.seed,
            "instance_count": self.instance_count,
            "fold_position_accuracy": self.fold_position_accuracy,
            "mean_per_position": self.mean_per_position,
            "std_per_position": self.std_per_position,
            "sequence_metrics": self.sequence_metrics,
            "significance": {
                name: [test.to_dict() for test in tests]
                for name, tests in self.significance.items()
            },
        }


def stratified_folds(dataset: Dataset, k: int, seed: int) -> FoldAssignment:
    """Disjoint folds balanced in size and per-stratum composition.

    Strata (by the gold class at position 2) are processed in ascending
    label order; each stratum's indices are shuffled by the seeded
    generator and dealt onto folds by one global cyclic counter. Fold
    sizes then differ by at most 1 overall AND within every stratum.
    """
    size = len(dataset.instances)
    if k < 2:
        raise ConfigurationError(f"need at least 2 folds, got {k}")
    if k > size:
        raise ConfigurationError(f"cannot split {size} instances into {k} folds")
    position = _STRATUM_POSITION if dataset.sequence_length > _STRATUM_POSITION else 0
    strata: dict[int, list[int]] = {}
    for index, instance in enumerate(dataset.instances):
        strata.setdefault(instance.positions[position], []).append(index)
    rng = SplitMix64(seed)
    fold_of = [0] * size
    counter = 0
    for label in sorted(strata):
        for index in rng.sample_distinct(strata[label], len(strata[label])):
            fold_of[index] = counter % k
            counter += 1
    return FoldAssignment(tuple(fold_of), k, seed)


def per_position_accuracy(
    predicted: Sequence[OrderedSequence], gold: Sequence[OrderedSequence]
) -> list[float]:
    """Fraction of instances whose fact at each position matches gold."""
    if len(predicted) != len(gold) or not predicted:
        raise ContractError("predicted and gold lists must align and be non-empty")
    n = len(gold[0].positions)
    for p, g in zip(predicted, gold):
        if len(p.positions) != n or len(g.positions) != n:
            raise ContractError("all sequences must have the same length")
    return [
        sum(p.positions[j] == g.positions[j] for p, g in zip(predicted, gold)) / len(gold)
        for j in range(n)
    ]


def inversion_count(ranks: Sequence[int]) -> int:
    """Number of out-of-order pairs; equals the minimal adjacent swaps."""
    inversions = 0
    seen: list[int] = []
    for i, value in enumerate(ranks):
        j = bisect(seen, value)
        inversions += i - j
        seen.insert(j, value)
    return inversions


def permutation_inversions(predicted: OrderedSequence, gold: OrderedSequence) -> int:
    """Inversions of the permutation mapping gold positions to predicted."""
    if frozenset(predicted.positions) != frozenset(gold.positions) or len(predicted) != len(gold):
        raise ContractError("sequences must be permutations of the same fact set")
    rank_in_gold = {t: r for r, t in enumerate(gold.positions)}
    return inversion_count([rank_in_gold[t] for t in predicted.positions])


def sequence_metrics(
    predicted: Sequence[OrderedSequence], gold: Sequence[OrderedSequence]
) -> dict:
    """Exact-match rate, mean Kendall tau, mean adjacent-swap distance."""
    if len(predicted) != len(gold) or not predicted:
        raise ContractError("predicted and gold lists must align and be non-empty")
    exact = 0
    taus = []
    swaps = []
    for p, g in zip(predicted, gold):
        inversions = permutation_inversions(p, g)
        n = len(g.positions)
        exact += p.positions == g.positions
        swaps.append(inversions)
        taus.append(1.0 if n < 2 else 1.0 - 4.0 * inversions / (n * (n - 1)))
    return {
        "exact_match": exact / len(gold),
        "kendall_tau": sum(taus) / len(taus),
        "swap_edit_distance": sum(swaps) / len(swaps),
    }


def t_two_tailed_p(t: float, df: int) -> float:
    """Two-tailed p via the regularized incomplete beta form of the t CDF."""
    if df < 1:
        raise ContractError(f"degrees of freedom must be positive, got {df}")
    if t == 0.0:
        return 1.0
    return float(betainc(df / 2.0, 0.5, df / (df + t * t)))


def paired_t_test(
    a: Sequence[float], b: Sequence[float], config: SignificanceConfig | None = None
) -> TTestResult:
    """Paired two-tailed t-test over matched fold scores.

    All-zero differences give t = 0, p = 1. Zero variance with a nonzero
    mean difference cannot produce a finite t; it is reported as
    significant with p = 0 and the degenerate_variance flag set.
    """
    config = config or SignificanceConfig()
    if len(a) != len(b):
        raise ContractError("paired score lists must have equal length")
    k = len(a)
    if k < 2:
        raise ContractError(f"need at least 2 paired scores, got {k}")
    diffs = [x - y for x, y in zip(a, b)]
    mean = sum(diffs) / k
    var = sum((d - mean) ** 2 for d in diffs) / (k - 1)
    df = k - 1
    if var == 0.0:
        if mean == 0.0:
            return TTestResult(0.0, df, 1.0, False)
        return TTestResult(math.copysign(math.inf, mean), df, 0.0, True, degenerate_variance=True)
    t = mean / math.sqrt(var / k)
    p = t_two_tailed_p(t, df)
    return TTestResult(t, df, p, p < config.alpha)


def cross_validate(
    dataset: Dataset, config: PlannerConfig, folds: FoldAssignment
) -> EvaluationReport:
    """Train on k-1 folds, order every held-out fact set end to end.

    Sequence metrics are pooled over all held-out predictions (every
    instance is tested exactly once); the accuracy matrix stays per fold
    for the paired significance tests.
    """
    if len(folds.fold_of) != len(dataset.instances):
        raise ContractError("fold assignment was built over a different dataset")
    n = dataset.sequence_length
    matrix: list[list[float]] = []
    pooled_pred: list[OrderedSequence] = []
    pooled_gold: list[OrderedSequence] = []
    for fold in range(folds.k):
        train_idx = folds.train_indices(fold)
        test_idx = folds.test_indices(fold)
        assert not set(train_idx) & set(test_idx)
        assert len(train_idx) + len(test_idx) == len(dataset.instances)
        train_data = Dataset(
            dataset.catalog, tuple(dataset.instances[i] for i in train_idx), n
        )
        planner = train_planner(train_data, config)
        fold_pred = []
        fold_gold = []
        for index in test_idx:
            instance = dataset.instances[index]
            facts = FactSet(frozenset(instance.positions), dataset.catalog)
            fold_pred.append(order_facts(planner, facts))
            fold_gold.append(instance)
        matrix.append(per_position_accuracy(fold_pred, fold_gold))
        pooled_pred.extend(fold_pred)
        pooled_gold.extend(fold_gold)
    columns = np.array(matrix)
    return EvaluationReport(
        scheme={"scheme": config.scheme, "params": dict(config.scheme_params)},
        k=folds.k,
        n=n,
        seed=folds.seed,
        instance_count=len(dataset.instances),
        fold_position_accuracy=matrix,
        mean_per_position=[float(x) for x in columns.mean(axis=0)],
        std_per_position=[float(x) for x in columns.std(axis=0, ddof=1)],
        sequence_metrics=sequence_metrics(pooled_pred, pooled_gold),
    )


@dataclass
class ComparisonReport:
    """Two schemes evaluated on identical folds plus per-position tests."""

    report_a: EvaluationReport
    report_b: EvaluationReport
    alpha: float
    tests: list[TTestResult]

    def to_json_dict(self) -> dict:
        return {
            "format_version": 1,
            "alpha": self.alpha,
            "scheme_a": self.report_a.to_json_dict(),
            "scheme_b": self.report_b.to_json_dict(),
            "per_position_tests": [test.to_dict() for test in self.tests],
        }


def compare_schemes(
    dataset: Dataset,
    config_a: PlannerConfig,
    config_b: PlannerConfig,
    folds: FoldAssignment,
    significance: SignificanceConfig | None = None,
) -> ComparisonReport:
    """Paired design: both schemes see exactly the same folds."""
    significance = significance or SignificanceConfig()
    report_a = cross_validate(dataset, config_a, folds)
    report_b = cross_validate(dataset, config_b, folds)
    tests = []
    for position in range(dataset.sequence_length):
        a = [row[position] for row in report_a.fold_position_accuracy]
        b = [row[position] for row in report_b.fold_position_accuracy]
        tests.append(paired_t_test(a, b, significance))
    label_a = config_a.scheme
    label_b = config_b.scheme
    report_a.significance[label_b] = tests
    report_b.significance[label_a] = [
        TTestResult(-t.t, t.df, t.p, t.significant, t.degenerate_variance) for t in tests
    ]
    return ComparisonReport(report_a, report_b, significance.alpha, tests)
