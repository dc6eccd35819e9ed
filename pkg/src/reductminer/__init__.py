"""Rough-set reducts, gain-ratio trees and rule evaluation for tabular data."""

__version__ = "0.1.0"

from .attrset import AttributeSet
from .dataset import (
    BANK_SCHEMA,
    AttributeDescriptor,
    BinningSpec,
    InformationSystem,
    Kind,
    Schema,
    apply_binning,
    describe,
    from_arrays,
    load_binning,
    load_csv,
)
from .dtree import (
    TreeParams,
    best_split,
    build_tree,
    classify,
    classify_table,
    conditional_entropy,
    entropy,
    gain_ratio_table,
    info_gain_table,
    mdl_cut_points,
    split_info,
    tree_to_rules,
)
from .estimators import GainRatioTreeClassifier, IntervalBinner, RoughSetReducer, RuleListClassifier
from .exceptions import DatasetError, ReductMinerError, RuleError, UniverseTooLarge, UnknownAttribute
from .roughset import (
    Partition,
    Verdict,
    approximate,
    brute_force_reducts,
    check_reduct,
    core_by_counting,
    discernibility_scan,
    greedy_reduct,
    is_reduct,
    materialize_matrix,
    partition_by,
    positive_region,
    rules_from_partition,
)
from .rules import (
    Condition,
    Rule,
    RuleMetrics,
    evaluate_rule,
    evaluate_rules,
    filter_rules,
    format_percent,
    load_rules,
    predict_table,
    rank_rules,
)

__all__ = [name for name in dir() if not name.startswith("_")]
