"""Gain-ratio decision trees with C4.5-style binary thresholds on numeric attributes.

Categorical and binary attributes split multi-way, one branch per value seen
at the node. Numeric attributes split at the midpoint between adjacent
distinct values; the threshold with the largest information gain is kept.
Among candidates whose gain reaches the mean gain of all positive-gain
candidates, the one with the largest gain ratio wins.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .dataset import InformationSystem
from .rules import Condition, Rule, majority

GAIN_TOL = 1e-12


# ---------------------------------------------------------------------------
# information measures
# ---------------------------------------------------------------------------

def entropy(class_counts: Iterable[float]) -> float:
    """Shannon entropy in bits of a count vector (0 log 0 = 0)."""
    c = np.asarray(list(class_counts) if not isinstance(class_counts, np.ndarray) else class_counts, dtype=float)
    if c.ndim != 1 or c.size == 0:
        raise ValueError("class counts must be a non-empty 1-D vector")
    if np.any(c < 0):
        raise ValueError("class counts must be non-negative")
    n = c.sum()
    if n <= 0:
        raise ValueError("entropy of an all-zero count vector is undefined")
    p = c[c > 0] / n
    return float(-(p * np.log2(p)).sum())


def _row_entropy(table: np.ndarray) -> np.ndarray:
    """Entropy of each row of a (blocks x classes) count table; empty rows give 0."""
    table = np.asarray(table, dtype=float)
    n = table.sum(axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(n > 0, table / np.where(n > 0, n, 1), 0.0)
        terms = np.where(p > 0, p * np.log2(np.where(p > 0, p, 1)), 0.0)
    return -terms.sum(axis=-1)


def conditional_table_entropy(table) -> float:
    """H(D | A) from a (blocks x classes) contingency table."""
    table = np.asarray(table, dtype=float)
    if table.ndim != 2 or table.shape[0] == 0:
        raise ValueError("contingency table must be 2-D with at least one block")
    sizes = table.sum(axis=1)
    total = sizes.sum()
    if total <= 0:
        raise ValueError("contingency table is empty")
    return float((sizes / total * _row_entropy(table)).sum())


def conditional_entropy(blocks: Sequence[Sequence[int]], decision: np.ndarray, n_classes: int | None = None) -> float:
    """Weighted decision entropy over the blocks C_1..C_v of an attribute.

    ``blocks`` are row-index collections (e.g. ``Partition.blocks``) and
    ``decision`` the decision code of every row.
    """
    if len(blocks) == 0:
        raise ValueError("empty partition")
    decision = np.asarray(decision)
    if n_classes is None:
        n_classes = int(decision.max()) + 1
    table = np.stack([np.bincount(decision[np.asarray(b, dtype=np.int64)], minlength=n_classes) for b in blocks])
    return conditional_table_entropy(table)


def split_info(block_sizes: Iterable[int], total: int | None = None) -> float:
    """Entropy of the branch-size distribution, H(A)."""
    sizes = np.asarray(list(block_sizes), dtype=float)
    if total is None:
        total = sizes.sum()
    if total <= 0:
        raise ValueError("split_info needs a positive total")
    if not np.isclose(sizes.sum(), total):
        raise ValueError(f"block sizes sum to {sizes.sum():g}, expected {total}")
    p = sizes[sizes > 0] / total
    return float(-(p * np.log2(p)).sum())


# ---------------------------------------------------------------------------
# split search
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SplitCandidate:
    attribute: int
    name: str
    kind: str  # "threshold" or "categorical"
    gain: float
    split_info: float
    threshold: float | None = None
    values: tuple[int, ...] = ()  # category codes present, for categorical splits

    @property
    def gain_ratio(self) -> float:
        return self.gain / self.split_info if self.split_info > 0 else 0.0


def _categorical_candidate(a, name, col, y, n_classes, min_leaf, parent_h):
    n_vals = int(col.max()) + 1
    table = np.bincount(col * n_classes + y, minlength=n_vals * n_classes).reshape(n_vals, n_classes)
    sizes = table.sum(axis=1)
    present = np.flatnonzero(sizes)
    if present.size < 2 or np.count_nonzero(sizes >= min_leaf) < 2:
        return None
    gain = parent_h - conditional_table_entropy(table[present])
    si = split_info(sizes[present])
    if si <= 0:
        return None
    return SplitCandidate(a, name, "categorical", gain, si,
                          values=tuple(int(v) for v in present))


def _threshold_scan(col: np.ndarray, y: np.ndarray, n_classes: int, min_leaf: int):
    """All admissible midpoint thresholds with their information gains.

    Returns (thresholds, gains, left_sizes) or None when no threshold is admissible.
    """
    order = np.argsort(col, kind="stable")
    v = col[order]
    n = v.size
    onehot = np.zeros((n, n_classes), dtype=np.int64)
    onehot[np.arange(n), y[order]] = 1
    left = np.cumsum(onehot, axis=0)[:-1]  # left counts after position k (k+1 rows)
    change = v[1:] != v[:-1]
    nl = np.arange(1, n)
    ok = change & (nl >= min_leaf) & (n - nl >= min_leaf)
    if not ok.any():
        return None
    left = left[ok]
    nl = nl[ok]
    total = onehot.sum(axis=0)
    right = total - left
    h = entropy(total)
    cond = (nl * _row_entropy(left) + (n - nl) * _row_entropy(right)) / n
    gains = h - cond
    k = np.flatnonzero(ok)
    thresholds = (v[k].astype(float) + v[k + 1].astype(float)) / 2.0
    return thresholds, gains, nl


def _threshold_candidate(a, name, col, y, n_classes, min_leaf):
    scan = _threshold_scan(col, y, n_classes, min_leaf)
    if scan is None:
        return None
    thresholds, gains, nl = scan
    best = int(np.argmax(gains))  # first maximum: lowest threshold among ties
    n = col.size
    si = split_info([nl[best], n - nl[best]], n)
    return SplitCandidate(a, name, "threshold", float(gains[best]), si, threshold=float(thresholds[best]))


def candidate_for(system: InformationSystem, a: int, rows: np.ndarray | None = None, min_leaf: int = 1):
    """Best split of attribute ``a`` on ``rows`` (all rows by default), or None."""
    rows = np.arange(system.row_count) if rows is None else np.asarray(rows, dtype=np.int64)
    y = system.decision_column[rows]
    desc = system.attributes[a]
    col = system.columns[a][rows]
    if desc.kind.is_encoded:
        return _categorical_candidate(a, desc.name, col, y, system.n_classes, min_leaf,
                                      entropy(np.bincount(y, minlength=system.n_classes)))
    return _threshold_candidate(a, desc.name, col, y, system.n_classes, min_leaf)


def best_split(
    system: InformationSystem,
    rows: np.ndarray | None = None,
    attributes: Iterable[int | str] | None = None,
    min_leaf: int = 1,
    allow_zero_gain: bool = False,
) -> SplitCandidate | None:
    """Gain-ratio winner among candidates whose gain is at least the mean positive gain.

    Returns None when no candidate has positive gain, unless
    ``allow_zero_gain`` is set: then any admissible split is returned (best
    gain ratio, then lowest attribute index) so that impure nodes such as
    XOR patterns can still be separated.
    """
    rows = np.arange(system.row_count) if rows is None else np.asarray(rows, dtype=np.int64)
    if rows.size == 0:
        raise ValueError("best_split needs at least one row")
    idx = range(system.n_attributes) if attributes is None else [system.attribute_index(a) for a in attributes]
    admissible = [c for c in (candidate_for(system, a, rows, min_leaf) for a in idx) if c is not None]
    cands = [c for c in admissible if c.gain > GAIN_TOL]
    if not cands:
        if allow_zero_gain and admissible:
            return max(admissible, key=lambda c: (c.gain_ratio, -c.attribute))
        return None
    floor = float(np.mean([c.gain for c in cands])) - GAIN_TOL
    eligible = [c for c in cands if c.gain >= floor]
    return max(eligible, key=lambda c: (c.gain_ratio, -c.attribute))


@dataclass(frozen=True)
class AttributeScore:
    name: str
    gain: float
    split_info: float
    gain_ratio: float
    threshold: float | None = None
    cut_points: tuple[float, ...] | None = None

    def to_dict(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if v is not None}
        if "cut_points" in d:
            d["cut_points"] = list(d["cut_points"])
        return d


def gain_ratio_table(system: InformationSystem) -> list[AttributeScore]:
    """Root-level gain ratio of every attribute, descending.

    Numeric attributes use their best binary threshold, categorical ones
    their multi-way split; attributes that cannot split score 0.
    """
    scores = []
    for a, desc in enumerate(system.attributes):
        c = candidate_for(system, a)
        if c is None:
            scores.append(AttributeScore(desc.name, 0.0, 0.0, 0.0))
        else:
            scores.append(AttributeScore(desc.name, max(c.gain, 0.0), c.split_info, c.gain_ratio, c.threshold))
    return sorted(scores, key=lambda s: -s.gain_ratio)


# ---------------------------------------------------------------------------
# MDL discretisation and information-gain ranking
# ---------------------------------------------------------------------------

def mdl_cut_points(values: np.ndarray, y: np.ndarray, n_classes: int | None = None) -> list[float]:
    """Recursive minimum-entropy cuts accepted by the Fayyad-Irani MDL criterion.

    A cut splitting S (N rows, k classes) into S1, S2 is kept when
    gain > (log2(N - 1) + log2(3^k - 2) - k Ent(S) + k1 Ent(S1) + k2 Ent(S2)) / N.
    Cut points are midpoints between adjacent distinct values, ascending.
    """
    values = np.asarray(values)
    y = np.asarray(y, dtype=np.int64)
    if n_classes is None:
        n_classes = int(y.max()) + 1
    order = np.argsort(values, kind="stable")
    v = values[order].astype(float)
    cls = y[order]
    onehot = np.zeros((v.size, n_classes), dtype=np.int64)
    onehot[np.arange(v.size), cls] = 1
    cum = np.vstack([np.zeros((1, n_classes), dtype=np.int64), np.cumsum(onehot, axis=0)])

    cuts: list[float] = []
    stack = [(0, v.size)]
    while stack:
        lo, hi = stack.pop()
        n = hi - lo
        if n < 2:
            continue
        total = cum[hi] - cum[lo]
        pos = np.flatnonzero(v[lo + 1:hi] != v[lo:hi - 1]) + lo + 1  # split before index pos
        if pos.size == 0:
            continue
        left = cum[pos] - cum[lo]
        right = total - left
        nl = (pos - lo).astype(float)
        ent = (nl * _row_entropy(left) + (n - nl) * _row_entropy(right)) / n
        b = int(np.argmin(ent))
        ent_s = entropy(total)
        gain = ent_s - float(ent[b])
        k = np.count_nonzero(total)
        k1 = np.count_nonzero(left[b])
        k2 = np.count_nonzero(right[b])
        e1 = entropy(left[b])
        e2 = entropy(right[b])
        delta = np.log2(3.0**k - 2) - (k * ent_s - k1 * e1 - k2 * e2)
        if gain > (np.log2(n - 1) + delta) / n:
            p = int(pos[b])
            cuts.append((v[p - 1] + v[p]) / 2.0)
            stack.append((lo, p))
            stack.append((p, hi))
    return sorted(cuts)


def info_gain_table(system: InformationSystem, numeric: str = "mdl") -> list[AttributeScore]:
    """Root-level information gain of every attribute, descending.

    ``numeric="mdl"`` discretises numeric attributes with
    :func:`mdl_cut_points` and scores the resulting multi-way split (an
    attribute with no accepted cut scores 0); ``numeric="threshold"`` uses
    the best binary threshold instead.
    """
    if numeric not in ("mdl", "threshold"):
        raise ValueError("numeric must be 'mdl' or 'threshold'")
    y = system.decision_column
    h = entropy(system.class_counts())
    scores = []
    for a, desc in enumerate(system.attributes):
        col = system.columns[a]
        if desc.kind.is_encoded or numeric == "mdl":
            cuts = None
            if desc.kind.is_encoded:
                codes = col
            else:
                cuts = tuple(mdl_cut_points(col, y, system.n_classes))
                codes = np.searchsorted(np.asarray(cuts), col, side="left") if cuts else np.zeros_like(col)
            codes = np.asarray(codes, dtype=np.int64)
            n_vals = int(codes.max()) + 1
            table = np.bincount(codes * system.n_classes + y,
                                minlength=n_vals * system.n_classes).reshape(n_vals, system.n_classes)
            sizes = table.sum(axis=1)
            gain = max(h - conditional_table_entropy(table), 0.0)
            si = split_info(sizes[sizes > 0])
            scores.append(AttributeScore(desc.name, gain, si, gain / si if si > 0 else 0.0, cut_points=cuts))
        else:
            c = _threshold_candidate(a, desc.name, col, y, system.n_classes, 1)
            if c is None:
                scores.append(AttributeScore(desc.name, 0.0, 0.0, 0.0))
            else:
                scores.append(AttributeScore(desc.name, max(c.gain, 0.0), c.split_info, c.gain_ratio, c.threshold))
    return sorted(scores, key=lambda s: -s.gain)


# ---------------------------------------------------------------------------
# trees
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TreeParams:
    min_leaf: int = 2
    max_depth: int = 30
    min_gain: float = 1e-4

    def __post_init__(self):
        if self.min_leaf < 1:
            raise ValueError("min_leaf must be >= 1")
        if self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        if self.min_gain < 0:
            raise ValueError("min_gain must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class TreeNode:
    """A leaf (``split is None``) or a split with labelled children.

    Threshold splits have two children labelled ``"<="`` and ``">"``;
    categorical splits one child per category label seen in training.
    ``classes`` are the decision labels that ``class_counts`` indexes.
    """

    class_counts: np.ndarray
    classes: tuple[str, ...]
    prediction: int
    split: SplitCandidate | None = None
    children: list[tuple[str, TreeNode]] = field(default_factory=list)
    attribute_kind: str | None = None

    @property
    def is_leaf(self) -> bool:
        return self.split is None

    @property
    def label(self) -> str:
        return self.classes[self.prediction]

    @property
    def n(self) -> int:
        return int(self.class_counts.sum())

    def leaves(self) -> list[TreeNode]:
        if self.is_leaf:
            return [self]
        return [leaf for _, c in self.children for leaf in c.leaves()]

    @property
    def n_leaves(self) -> int:
        return len(self.leaves())

    @property
    def size(self) -> int:
        return 1 + sum(c.size for _, c in self.children)

    @property
    def depth(self) -> int:
        return 0 if self.is_leaf else 1 + max(c.depth for _, c in self.children)

    def child_for(self, value) -> TreeNode:
        """Child reached by a raw attribute value; unseen categories go to the largest child."""
        s = self.split
        if s.kind == "threshold":
            return self.children[0][1] if value <= s.threshold else self.children[1][1]
        for lab, c in self.children:
            if lab == value:
                return c
        return self.largest_child()

    def largest_child(self) -> TreeNode:
        return max((c for _, c in self.children), key=lambda c: c.n)

    def to_dict(self) -> dict:
        d: dict = {"class_counts": {k: int(v) for k, v in zip(self.classes, self.class_counts)}}
        if self.is_leaf:
            d["kind"] = "leaf"
            d["class"] = self.label
            return d
        s = self.split
        d.update(kind="split", attribute=s.name, split=s.kind, gain=s.gain, gain_ratio=s.gain_ratio)
        if s.kind == "threshold":
            d["threshold"] = s.threshold
        d["children"] = [{"branch": lab, "node": c.to_dict()} for lab, c in self.children]
        return d

    def render(self, indent: str = "|   ") -> str:
        """Indented text in the style of a C4.5 printout."""
        lines: list[str] = []

        def walk(node: TreeNode, depth: int):
            s = node.split
            for lab, c in node.children:
                if s.kind == "threshold":
                    test = f"{s.name} {'<=' if lab == '<=' else '>'} {_fmt(s.threshold)}"
                else:
                    test = f"{s.name} = {lab}"
                prefix = indent * depth + test
                if c.is_leaf:
                    lines.append(f"{prefix}: {c.label} ({c.n}/{c.n - int(c.class_counts[c.prediction])})")
                else:
                    lines.append(prefix)
                    walk(c, depth + 1)

        if self.is_leaf:
            return f": {self.label} ({self.n}/{self.n - int(self.class_counts[self.prediction])})"
        walk(self, 0)
        return "\n".join(lines)


def _fmt(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else f"{x:g}"


def build_tree(system: InformationSystem, params: TreeParams | None = None, **kw) -> TreeNode:
    """Grow a tree by recursive gain-ratio splitting.

    A node becomes a leaf when it is pure, holds fewer than ``2 * min_leaf``
    rows, reaches ``max_depth``, or its best split gains less than
    ``min_gain`` bits. With ``min_gain=0`` zero-gain splits are taken too,
    so a consistent table is fitted exactly. No pruning is performed.
    """
    params = params or TreeParams(**kw)
    classes = system.decision.dictionary
    prior = system.class_counts()

    def grow(rows: np.ndarray, depth: int) -> TreeNode:
        counts = system.class_counts(rows)
        node = TreeNode(counts, classes, majority(counts, prior))
        if np.count_nonzero(counts) <= 1 or rows.size < 2 * params.min_leaf or depth >= params.max_depth:
            return node
        cand = best_split(system, rows, min_leaf=params.min_leaf, allow_zero_gain=params.min_gain == 0)
        if cand is None or cand.gain < params.min_gain:
            return node
        col = system.columns[cand.attribute][rows]
        desc = system.attributes[cand.attribute]
        node.split = cand
        node.attribute_kind = desc.kind.value
        if cand.kind == "threshold":
            go_left = col <= cand.threshold
            node.children = [("<=", grow(rows[go_left], depth + 1)), (">", grow(rows[~go_left], depth + 1))]
        else:
            node.children = [(desc.decode(v), grow(rows[col == v], depth + 1)) for v in cand.values]
        return node

    return grow(np.arange(system.row_count), 0)


def classify(tree: TreeNode, record: Mapping[str, object]) -> tuple[str, np.ndarray]:
    """Follow ``record`` (raw values keyed by attribute name) to a leaf; return (label, leaf counts)."""
    lowered = {str(k).lower(): v for k, v in record.items()}
    node = tree
    while not node.is_leaf:
        key = node.split.name.lower()
        if key not in lowered:
            raise KeyError(f"record has no value for {node.split.name!r}")
        node = node.child_for(lowered[key])
    return node.label, node.class_counts


def leaves_for(tree: TreeNode, system: InformationSystem) -> np.ndarray:
    """Leaf node reached by every row of ``system`` (object array)."""
    out = np.empty(system.row_count, dtype=object)

    def route(node: TreeNode, rows: np.ndarray):
        if rows.size == 0:
            return
        if node.is_leaf:
            out[rows] = node
            return
        s = node.split
        desc = system.attribute(s.name)
        col = system.column(s.name)[rows]
        if s.kind == "threshold":
            left = col <= s.threshold
            route(node.children[0][1], rows[left])
            route(node.children[1][1], rows[~left])
            return
        labels = np.asarray(desc.dictionary, dtype=object)[col]
        claimed = np.zeros(rows.size, dtype=bool)
        for lab, c in node.children:
            m = labels == lab
            claimed |= m
            route(c, rows[m])
        route(node.largest_child(), rows[~claimed])

    route(tree, np.arange(system.row_count))
    return out


def classify_table(tree: TreeNode, system: InformationSystem) -> np.ndarray:
    """Predicted label of every row of ``system`` (object array)."""
    return np.array([leaf.label for leaf in leaves_for(tree, system)], dtype=object)


def tree_to_rules(tree: TreeNode) -> list[Rule]:
    """One rule per leaf; same-attribute thresholds on a path merge into one interval."""
    rules: list[Rule] = []

    def walk(node: TreeNode, conds: tuple[Condition, ...]):
        if node.is_leaf:
            rules.append(Rule(conds, node.label, "tree", id=f"leaf-{len(rules)}"))
            return
        s = node.split
        for lab, c in node.children:
            if s.kind == "threshold":
                cond = Condition.le(s.name, s.threshold) if lab == "<=" else Condition.gt(s.name, s.threshold)
            else:
                cond = Condition.eq(s.name, lab)
            walk(c, conds + (cond,))

    walk(tree, ())
    return rules
