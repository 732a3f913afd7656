"""Trainable fact-ordering toolkit.

Decomposes the ordering of an n-fact set into a chain of n per-position
classifiers, with four interchangeable stage schemes (majority,
fixed-order, k-NN, decision tree), a stratified cross-validation and
significance-testing harness, and a deterministic synthetic-domain
generator for oracle-checked verification.
"""

from .domain import (
    Dataset,
    FactSet,
    FactTypeCatalog,
    OrderedSequence,
    PlannerConfig,
    SCHEMES,
    Violation,
    build_catalog,
    fact_set_from_ids,
    load_dataset,
    load_domain_schema,
    make_fact_set,
    save_dataset,
    save_domain_schema,
    validate_dataset,
)
from .encoding import (
    StageExample,
    StageFeatureVector,
    encode_stage,
    legal_classes,
    training_examples_for_stage,
)
from .errors import (
    CatalogError,
    CompatibilityError,
    ConfigurationError,
    ContractError,
    DataFormatError,
    DeserializationError,
    DuplicateFactError,
    EncodingError,
    FactOrderingError,
    InputError,
    PredictionError,
    TrainingError,
    UnknownTypeError,
)
from .evaluation import (
    ComparisonReport,
    EvaluationReport,
    FoldAssignment,
    SignificanceConfig,
    TTestResult,
    compare_schemes,
    cross_validate,
    paired_t_test,
    per_position_accuracy,
    sequence_metrics,
    stratified_folds,
    t_two_tailed_p,
)
from .learners import (
    FixedOrderModel,
    KnnModel,
    MajorityModel,
    StageModel,
    TreeModel,
    TreeNode,
    TreeParams,
    entropy,
    gain_ratio,
    knn_distance,
    make_fixed_order,
    predict_knn,
    predict_tree,
    train_knn,
    train_majority,
    train_tree,
)
from .pipeline import (
    TrainedPlanner,
    load_planner,
    order_facts,
    save_planner,
    train_planner,
)
from .synthetic import (
    FixedOrderBound,
    OrderingPolicy,
    OrderingRule,
    SyntheticDomainSpec,
    best_fixed_order_oracle,
    generate_dataset,
    generate_domain,
    ground_truth_order,
)

__version__ = "0.1.0"
