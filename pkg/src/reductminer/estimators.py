"""scikit-learn compatible wrappers.

Every estimator accepts either an :class:`InformationSystem` (``y`` omitted)
or an array-like / DataFrame ``X`` with labels ``y``, so the algorithms can
sit inside a :class:`sklearn.pipeline.Pipeline`.
"""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .dataset import BinningSpec, InformationSystem, apply_binning, from_arrays
from .dtree import TreeParams, build_tree, classify_table, leaves_for, tree_to_rules
from .roughset import discernibility_scan, greedy_reduct
from .rules import Rule, evaluate_rules, majority, predict_table


def check_system(X, y=None, feature_names: Sequence[str] | None = None) -> InformationSystem:
    """Coerce ``X`` (and ``y``) into an InformationSystem.

    When ``y`` is None and ``X`` is not already a system, a constant
    placeholder decision is used; that is only meaningful for
    decision-free operations such as absolute reduction or prediction.
    """
    if isinstance(X, InformationSystem):
        if y is not None:
            raise ValueError("pass either an InformationSystem or (X, y), not both")
        return X
    n = len(X)
    if y is None:
        y = np.zeros(n, dtype=np.int64)
    return from_arrays(X, y, feature_names=feature_names)


def _names(X, fallback: Sequence[str] | None) -> list[str] | None:
    if isinstance(X, InformationSystem):
        return X.attribute_names
    if hasattr(X, "columns"):
        return [str(c) for c in X.columns]
    return list(fallback) if fallback is not None else None


class RoughSetReducer(TransformerMixin, BaseEstimator):
    """Select a rough-set reduct of the conditional attributes.

    ``fit`` scans the discernibility matrix for the core and grows a greedy
    reduct from it; ``transform`` keeps only the reduct columns.

    Parameters
    ----------
    mode : {"absolute", "decision_relative"}
        Preserve the full indiscernibility partition, or only the positive
        region of the decision.
    threads : int or None
        Scan workers; ``None`` reads ``REDUCTMINER_THREADS``.
    """

    def __init__(self, mode: str = "absolute", threads: int | None = None):
        self.mode = mode
        self.threads = threads

    def fit(self, X, y=None):
        system = check_system(X, y)
        self.summary_ = discernibility_scan(system, None, self.mode, threads=self.threads)
        self.reduct_ = greedy_reduct(system, self.mode, summary=self.summary_)
        self.core_ = self.summary_.core
        self.feature_names_in_ = np.array(system.attribute_names, dtype=object)
        self.n_features_in_ = system.n_attributes
        self.support_ = np.zeros(system.n_attributes, dtype=bool)
        self.support_[self.reduct_.indices()] = True
        return self

    def get_support(self, indices: bool = False):
        check_is_fitted(self, "support_")
        return np.flatnonzero(self.support_) if indices else self.support_.copy()

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "support_")
        return self.feature_names_in_[self.support_]

    def transform(self, X):
        check_is_fitted(self, "support_")
        if isinstance(X, InformationSystem):
            return X.select(self.feature_names_in_[self.support_].tolist())
        if hasattr(X, "iloc"):
            return X.loc[:, list(self.feature_names_in_[self.support_])]
        X = np.asarray(X)
        if X.ndim != 2 or X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} columns, got shape {X.shape}")
        return X[:, self.support_]


class IntervalBinner(TransformerMixin, BaseEstimator):
    """Replace numeric attributes by left-open, right-closed bin indices.

    ``bins`` maps attribute names to ascending cut points.
    """

    def __init__(self, bins: Mapping[str, Sequence[float]] | None = None):
        self.bins = bins

    def fit(self, X, y=None):
        self.specs_ = [BinningSpec(name, tuple(cuts)) for name, cuts in (self.bins or {}).items()]
        self.feature_names_in_ = _names(X, None)
        return self

    def transform(self, X):
        check_is_fitted(self, "specs_")
        if isinstance(X, InformationSystem):
            return apply_binning(X, self.specs_)
        if hasattr(X, "iloc"):
            out = X.copy()
            for s in self.specs_:
                out[s.attribute] = s.assign(out[s.attribute].to_numpy())
            return out
        X = np.array(X, copy=True)
        names = self.feature_names_in_
        for s in self.specs_:
            j = names.index(s.attribute) if names else int(s.attribute)
            X[:, j] = s.assign(X[:, j].astype(float))
        return X


class GainRatioTreeClassifier(ClassifierMixin, BaseEstimator):
    """Decision tree grown by gain ratio with C4.5-style numeric thresholds."""

    def __init__(self, min_leaf: int = 2, max_depth: int = 30, min_gain: float = 1e-4):
        self.min_leaf = min_leaf
        self.max_depth = max_depth
        self.min_gain = min_gain

    def fit(self, X, y=None):
        if y is None and not isinstance(X, InformationSystem):
            raise ValueError("GainRatioTreeClassifier.fit needs labels y")
        system = check_system(X, y)
        self.tree_ = build_tree(system, TreeParams(self.min_leaf, self.max_depth, self.min_gain))
        self.classes_ = np.array(system.decision.dictionary, dtype=object)
        self.feature_names_in_ = np.array(system.attribute_names, dtype=object)
        self.n_features_in_ = system.n_attributes
        return self

    def _system(self, X) -> InformationSystem:
        return check_system(X, None, feature_names=list(self.feature_names_in_))

    def predict(self, X):
        check_is_fitted(self, "tree_")
        return classify_table(self.tree_, self._system(X))

    def predict_proba(self, X):
        """Class frequencies of the training rows in the leaf each row reaches."""
        check_is_fitted(self, "tree_")
        leaves = leaves_for(self.tree_, self._system(X))
        counts = np.array([leaf.class_counts for leaf in leaves], dtype=float).reshape(len(leaves), -1)
        return counts / counts.sum(axis=1, keepdims=True)

    def export_rules(self) -> list[Rule]:
        check_is_fitted(self, "tree_")
        return tree_to_rules(self.tree_)


class RuleListClassifier(ClassifierMixin, BaseEstimator):
    """Ordered rule list: the first matching rule decides, else ``default``.

    ``fit`` only records metrics and, when ``default`` is None, takes the
    majority training class as the fallback.
    """

    def __init__(self, rules: Sequence[Rule] | None = None, default: str | None = None):
        self.rules = rules
        self.default = default

    def fit(self, X, y=None):
        system = check_system(X, y)
        self.scored_ = evaluate_rules(self.rules or [], system)
        self.classes_ = np.array(system.decision.dictionary, dtype=object)
        counts = system.class_counts()
        self.default_ = self.default if self.default is not None else str(self.classes_[majority(counts, counts)])
        self.feature_names_in_ = np.array(system.attribute_names, dtype=object)
        return self

    def predict(self, X):
        check_is_fitted(self, "default_")
        system = check_system(X, None, feature_names=list(self.feature_names_in_))
        labels, _ = predict_table(list(self.rules or []), system, self.default_)
        return labels
