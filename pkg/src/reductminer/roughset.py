"""Indiscernibility partitions, approximations, discernibility and reducts.

The discernibility matrix of a table with n rows has n(n-1)/2 entries, so
:func:`discernibility_scan` streams the pairs and keeps only a summary
(core, singleton count, per-attribute histogram). :func:`materialize_matrix`
builds the explicit matrix for small tables, for display and cross-checks.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._kernels import MAX_SCAN_ATTRIBUTES, scan_rows
from .attrset import AttributeSet
from .dataset import InformationSystem, Kind
from .exceptions import DatasetError, ReductMinerError, UniverseTooLarge
from .rules import Condition, Rule, majority

MODES = ("absolute", "decision_relative")
DEFAULT_MATRIX_CAP = 2000


def _check_mode(mode: str) -> bool:
    mode = mode.replace("-", "_")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    return mode == "decision_relative"


def _as_attrset(system: InformationSystem, r) -> AttributeSet:
    if r is None:
        return system.attrset()
    if isinstance(r, AttributeSet):
        if r.size != system.n_attributes:
            raise ValueError(f"attribute set sized for {r.size} attributes, system has {system.n_attributes}")
        return r
    return system.attrset(r)


# ---------------------------------------------------------------------------
# partitions
# ---------------------------------------------------------------------------

def _group_keys(codes: np.ndarray) -> np.ndarray:
    """Dense group id per row such that rows share an id iff their code rows are equal."""
    n = codes.shape[0]
    key = np.zeros(n, dtype=np.int64)
    for j in range(codes.shape[1]):
        col = codes[:, j]
        card = int(col.max()) + 1
        key = np.unique(key * card + col, return_inverse=True)[1].reshape(-1)
    return key


def _canonical(key: np.ndarray) -> np.ndarray:
    """Relabel dense group ids 0..g-1 in order of each group's smallest member."""
    _, first = np.unique(key, return_index=True)
    rank = np.empty(first.size, dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(first.size)
    return rank[key]


def block_labels(system: InformationSystem, r: AttributeSet) -> np.ndarray:
    """Canonical block label of every row under IND(r); ∅ gives a single block."""
    idx = list(r)
    if not idx:
        return np.zeros(system.row_count, dtype=np.int64)
    return _canonical(_group_keys(system.codes[:, idx]))


@dataclass(frozen=True, eq=False)
class Partition:
    """Equivalence classes of IND(R).

    ``labels[i]`` is the block of row ``i``; blocks are numbered by their
    smallest member, so two partitions are equal iff their label arrays are.
    """

    attribute_set: AttributeSet
    labels: np.ndarray

    @property
    def n_blocks(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0

    @property
    def blocks(self) -> list[np.ndarray]:
        order = np.argsort(self.labels, kind="stable")
        bounds = np.cumsum(np.bincount(self.labels, minlength=self.n_blocks))[:-1]
        return np.split(order, bounds)

    def block_of(self, row: int) -> np.ndarray:
        return np.flatnonzero(self.labels == self.labels[row])

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_blocks)

    def same_blocks(self, other: Partition) -> bool:
        return np.array_equal(self.labels, other.labels)

    def refines(self, other: Partition) -> bool:
        """Every block of self lies inside one block of other."""
        first = np.full(self.n_blocks, -1, dtype=np.int64)
        first[self.labels[::-1]] = other.labels[::-1]
        return bool(np.all(first[self.labels] == other.labels))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return self.same_blocks(other)

    __hash__ = None


def partition_by(system: InformationSystem, r, allow_empty: bool = False) -> Partition:
    """Partition the universe under IND(r).

    An empty ``r`` is refused unless ``allow_empty`` is set, in which case
    the single-block partition is returned.
    """
    r = _as_attrset(system, r)
    if not r and not allow_empty:
        raise ValueError("empty attribute set: IND(∅) is the one-block partition; pass allow_empty=True to ask for it")
    return Partition(r, block_labels(system, r))


# ---------------------------------------------------------------------------
# approximations
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Approximation:
    attribute_set: AttributeSet
    target: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    @property
    def boundary(self) -> np.ndarray:
        return np.setdiff1d(self.upper, self.lower)

    @property
    def is_definable(self) -> bool:
        return np.array_equal(self.lower, self.upper)

    @property
    def accuracy(self) -> float:
        return self.lower.size / self.upper.size if self.upper.size else 1.0


def _row_mask(system: InformationSystem, rows) -> np.ndarray:
    rows = np.asarray(rows)
    if rows.dtype == bool:
        if rows.shape != (system.row_count,):
            raise ValueError("boolean target must have one entry per row")
        return rows
    mask = np.zeros(system.row_count, dtype=bool)
    if rows.size:
        rows = rows.astype(np.int64)
        if rows.min() < 0 or rows.max() >= system.row_count:
            raise ValueError("target rows outside the universe")
        mask[rows] = True
    return mask


def approximate(system: InformationSystem, r, target) -> Approximation:
    """Lower and upper approximation of the row set ``target`` under IND(r)."""
    part = partition_by(system, r)
    inside = _row_mask(system, target)
    sizes = part.sizes()
    hits = np.bincount(part.labels, weights=inside, minlength=part.n_blocks)
    lower = np.flatnonzero(hits[part.labels] == sizes[part.labels])
    upper = np.flatnonzero(hits[part.labels] > 0)
    return Approximation(part.attribute_set, np.flatnonzero(inside), lower, upper)


def positive_mask(system: InformationSystem, r, labels: np.ndarray | None = None) -> np.ndarray:
    """Rows whose IND(r) block carries a single decision value."""
    if labels is None:
        labels = block_labels(system, _as_attrset(system, r))
    g = int(labels.max()) + 1
    d = system.decision_column
    lo = np.full(g, np.iinfo(np.int64).max)
    hi = np.full(g, -1)
    np.minimum.at(lo, labels, d)
    np.maximum.at(hi, labels, d)
    return (lo == hi)[labels]


def positive_region(system: InformationSystem, r) -> np.ndarray:
    """Sorted row indices of POS_r(d)."""
    return np.flatnonzero(positive_mask(system, r))


# ---------------------------------------------------------------------------
# discernibility
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiscernibilitySummary:
    """Aggregate of all matrix entries restricted to ``attribute_set``.

    ``entry_histogram[a]`` counts pairs whose entry contains attribute a.
    ``counted_pairs`` is the number of pairs that took part (all pairs in
    absolute mode; in decision-relative mode only pairs with different
    decisions and at least one member in the positive region).
    """

    attribute_set: AttributeSet
    mode: str
    core: AttributeSet
    singleton_pair_count: int
    entry_histogram: tuple[int, ...]
    pair_count: int
    counted_pairs: int

    def merge(self, other: DiscernibilitySummary) -> DiscernibilitySummary:
        if (self.attribute_set, self.mode) != (other.attribute_set, other.mode):
            raise ValueError("cannot merge summaries of different scans")
        return DiscernibilitySummary(
            self.attribute_set,
            self.mode,
            self.core | other.core,
            self.singleton_pair_count + other.singleton_pair_count,
            tuple(a + b for a, b in zip(self.entry_histogram, other.entry_histogram)),
            self.pair_count + other.pair_count,
            self.counted_pairs + other.counted_pairs,
        )

    def to_dict(self, system: InformationSystem) -> dict:
        return {
            "mode": self.mode,
            "attributes": system.names_of(self.attribute_set),
            "core": system.names_of(self.core),
            "singleton_pair_count": self.singleton_pair_count,
            "pair_count": self.pair_count,
            "counted_pairs": self.counted_pairs,
            "entry_histogram": {system.attributes[i].name: self.entry_histogram[i] for i in self.attribute_set},
        }


def worker_count(threads: int | None = None) -> int:
    """Resolve a thread count; ``None`` reads REDUCTMINER_THREADS, 0 means one per CPU."""
    if threads is None:
        env = os.environ.get("REDUCTMINER_THREADS", "0").strip() or "0"
        try:
            threads = int(env)
        except ValueError:
            raise ValueError(f"REDUCTMINER_THREADS must be an integer, got {env!r}") from None
    if threads < 0:
        raise ValueError("thread count must be >= 0")
    return threads or (os.cpu_count() or 1)


def _row_blocks(m: int, n_blocks: int) -> list[tuple[int, int]]:
    """Split rows 0..m-1 into contiguous ranges holding roughly equal pair counts."""
    if m < 2:
        return [(0, m)]
    work = np.cumsum(np.arange(m - 1, -1, -1, dtype=np.int64))
    total = int(work[-1])
    n_blocks = max(1, min(n_blocks, m - 1))
    cuts = [0]
    for b in range(1, n_blocks):
        c = int(np.searchsorted(work, total * b // n_blocks, side="left")) + 1
        if c > cuts[-1]:
            cuts.append(c)
    cuts.append(m)
    return list(zip(cuts[:-1], cuts[1:]))


def _dedupe(system: InformationSystem, idx: list[int], relative: bool):
    """Distinct (codes[, decision]) rows with multiplicities and positive-region flags."""
    codes = system.codes[:, idx]
    d = system.decision_column
    cond_key = _group_keys(codes)
    pos = positive_mask(system, None, labels=cond_key)
    key = cond_key * system.n_classes + d if relative else cond_key
    uniq, first, counts = np.unique(key, return_index=True, return_counts=True)
    return (
        np.ascontiguousarray(codes[first]),
        counts.astype(np.int64),
        np.ascontiguousarray(d[first]),
        np.ascontiguousarray(pos[first]),
    )


def discernibility_scan(
    system: InformationSystem,
    r=None,
    mode: str = "absolute",
    threads: int | None = None,
    blocks: int | None = None,
) -> DiscernibilitySummary:
    """Stream every unordered pair of rows and summarise the discernibility matrix.

    Identical rows are collapsed first (their mutual entries are empty), so
    work scales with distinct tuples. Row ranges are scanned independently
    and merged by union/sum; the result does not depend on ``threads`` or
    ``blocks``.
    """
    relative = _check_mode(mode)
    r = _as_attrset(system, r)
    if not r:
        raise ValueError("discernibility scan needs a non-empty attribute set")
    idx = list(r)
    if len(idx) > MAX_SCAN_ATTRIBUTES:
        raise ReductMinerError(f"scan supports at most {MAX_SCAN_ATTRIBUTES} attributes, got {len(idx)}")
    n = system.row_count
    codes, weights, dec, pos = _dedupe(system, idx, relative)
    m = codes.shape[0]
    nthreads = worker_count(threads)
    ranges = _row_blocks(m, blocks if blocks is not None else max(1, 4 * nthreads))

    def run(bounds):
        return scan_rows(codes, weights, dec, pos, relative, bounds[0], bounds[1])

    if nthreads > 1 and len(ranges) > 1:
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            parts = list(pool.map(run, ranges))
    else:
        parts = [run(b) for b in ranges]

    core_local = 0
    singles = 0
    counted = 0
    hist_local = np.zeros(len(idx), dtype=np.int64)
    for c, s, h, k in parts:
        core_local |= int(c)
        singles += int(s)
        hist_local += h
        counted += int(k)
    if not relative:
        # pairs of identical rows: empty entries
        counted += int((weights * (weights - 1) // 2).sum())

    hist = [0] * system.n_attributes
    core_idx = []
    for local, a in enumerate(idx):
        hist[a] = int(hist_local[local])
        if core_local >> local & 1:
            core_idx.append(a)
    return DiscernibilitySummary(
        r,
        "decision_relative" if relative else "absolute",
        AttributeSet.from_indices(core_idx, system.n_attributes),
        singles,
        tuple(hist),
        n * (n - 1) // 2,
        counted,
    )


def core_by_counting(system: InformationSystem, r=None, mode: str = "absolute") -> AttributeSet:
    """Core from partition sizes alone, without visiting pairs.

    Attribute a is in the core iff dropping it from r merges some pair of
    IND(r)-blocks (absolute) or shrinks the positive region (relative).
    """
    relative = _check_mode(mode)
    r = _as_attrset(system, r)
    full = block_labels(system, r)
    core = []
    for a in r:
        rest = block_labels(system, r.remove(a))
        if relative:
            if positive_mask(system, None, rest).sum() < positive_mask(system, None, full).sum():
                core.append(a)
        elif rest.max() < full.max():
            core.append(a)
    return AttributeSet.from_indices(core, system.n_attributes)


class DiscernibilityMatrix:
    """Explicit strictly-lower-triangular matrix of attribute bitmasks."""

    def __init__(self, system: InformationSystem, r: AttributeSet, mode: str, entries: np.ndarray):
        self.system = system
        self.attribute_set = r
        self.mode = mode
        self.entries = entries

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def entry(self, i: int, j: int) -> AttributeSet:
        if i == j:
            return AttributeSet.empty(self.system.n_attributes)
        if i < j:
            i, j = j, i
        return AttributeSet(int(self.entries[i, j]), self.system.n_attributes)

    def summary(self) -> DiscernibilitySummary:
        n = self.n
        k = self.system.n_attributes
        low = self.entries[np.tril_indices(n, -1)]
        hist = [int(((low >> np.uint64(a)) & np.uint64(1)).sum()) for a in range(k)]
        single = (low != 0) & ((low & (low - np.uint64(1))) == 0)
        core_bits = int(np.bitwise_or.reduce(low[single])) if single.any() else 0
        relative = self.mode == "decision_relative"
        if relative:
            d = self.system.decision_column
            pos = positive_mask(self.system, self.attribute_set)
            ii, jj = np.tril_indices(n, -1)
            counted = int(((d[ii] != d[jj]) & (pos[ii] | pos[jj])).sum())
        else:
            counted = low.size
        return DiscernibilitySummary(
            self.attribute_set,
            self.mode,
            AttributeSet(core_bits, k),
            int(single.sum()),
            tuple(hist),
            n * (n - 1) // 2,
            counted,
        )

    def render(self, max_rows: int = 20, max_cols: int = 6, width: int = 18, sep: str = "-") -> str:
        """Tab-separated text table: cell (i, j) lists differing attribute names, truncated with '…'."""
        names = self.system.attribute_names
        n = self.n
        rows = min(n, max_rows)
        cols = min(n - 1, max_cols) if n > 1 else 0
        lines = ["\t" + "\t".join(f"X{j + 1}" for j in range(cols))]
        for i in range(rows):
            cells = []
            for j in range(min(i, cols)):
                text = sep.join(names[a] for a in self.entry(i, j))
                if len(text) > width:
                    text = text[: width - 1] + "…"
                cells.append(text)
            lines.append("\t".join([f"X{i + 1}", *cells]))
        if n > rows:
            lines.append("...")
        return "\n".join(lines)


def materialize_matrix(
    system: InformationSystem, r=None, max_rows: int = DEFAULT_MATRIX_CAP, mode: str = "absolute"
) -> DiscernibilityMatrix:
    """Build the explicit matrix; refused above ``max_rows`` rows."""
    relative = _check_mode(mode)
    r = _as_attrset(system, r)
    n = system.row_count
    if n > max_rows:
        raise UniverseTooLarge(
            f"{n} rows exceed the explicit-matrix cap of {max_rows}; use discernibility_scan for large tables"
        )
    if system.n_attributes > MAX_SCAN_ATTRIBUTES:
        raise ReductMinerError(f"matrix supports at most {MAX_SCAN_ATTRIBUTES} attributes")
    entries = np.zeros((n, n), dtype=np.uint64)
    codes = system.codes
    for a in r:
        col = codes[:, a]
        entries |= (col[:, None] != col[None, :]).astype(np.uint64) << np.uint64(a)
    if relative:
        d = system.decision_column
        pos = positive_mask(system, r)
        keep = (d[:, None] != d[None, :]) & (pos[:, None] | pos[None, :])
        entries[~keep] = 0
    entries = np.tril(entries, -1)
    return DiscernibilityMatrix(system, r, "decision_relative" if relative else "absolute", entries)


# ---------------------------------------------------------------------------
# reducts
# ---------------------------------------------------------------------------

class Verdict(str, Enum):
    REDUCT = "reduct"
    DEPENDENT = "dependent"
    NOT_EQUIVALENT = "not_equivalent"


@dataclass(frozen=True)
class ReductCheck:
    verdict: Verdict
    equivalent: bool
    removable: tuple[int, ...]

    def to_dict(self, system: InformationSystem) -> dict:
        return {
            "verdict": self.verdict.value,
            "equivalent": self.equivalent,
            "removable": [system.attributes[i].name for i in self.removable],
        }


class _Target:
    """What a candidate attribute set must preserve: IND(baseline) or POS_baseline(d)."""

    def __init__(self, system: InformationSystem, baseline: AttributeSet, relative: bool):
        self.system = system
        self.relative = relative
        labels = block_labels(system, baseline)
        if relative:
            self.pos_count = int(positive_mask(system, None, labels).sum())
        else:
            self.labels = labels

    def met_by(self, r: AttributeSet) -> bool:
        labels = block_labels(self.system, r)
        if self.relative:
            # POS is monotone in r, so equal size means equal sets when r ⊆ baseline
            return int(positive_mask(self.system, None, labels).sum()) == self.pos_count
        return np.array_equal(labels, self.labels)


def check_reduct(system: InformationSystem, r, baseline=None, mode: str = "absolute") -> ReductCheck:
    """Test ``r`` against ``baseline`` (all conditional attributes by default).

    Absolute mode compares IND partitions; decision-relative mode compares
    positive regions of the decision.
    """
    relative = _check_mode(mode)
    r = _as_attrset(system, r)
    baseline = _as_attrset(system, baseline)
    if not r:
        raise ValueError("is_reduct needs a non-empty attribute set")
    if not baseline:
        raise ValueError("baseline attribute set must be non-empty")
    if not r.issubset(baseline):
        raise ValueError("candidate must be a subset of the baseline")
    target = _Target(system, baseline, relative)
    if not target.met_by(r):
        return ReductCheck(Verdict.NOT_EQUIVALENT, False, ())
    removable = tuple(a for a in r if target.met_by(r.remove(a)))
    return ReductCheck(Verdict.DEPENDENT if removable else Verdict.REDUCT, True, removable)


def is_reduct(system: InformationSystem, r, baseline=None, mode: str = "absolute") -> Verdict:
    return check_reduct(system, r, baseline, mode).verdict


def _undiscerned_counts(system: InformationSystem, labels: np.ndarray, candidates: list[int],
                        relative: bool, pos_full: np.ndarray) -> dict[int, int]:
    """For each candidate attribute: pairs in a common block of ``labels`` that it would separate."""
    codes = system.codes
    d = system.decision_column
    n_cls = system.n_classes

    def pairs(group: np.ndarray) -> int:
        sizes = np.bincount(group)
        return int((sizes * (sizes - 1) // 2).sum())

    def relevant(group: np.ndarray) -> int:
        # pairs inside a group with different decisions and >= 1 member in POS_C
        def ddiff(g, mask):
            g = g[mask]
            if g.size == 0:
                return 0
            return pairs(g) - pairs(g * n_cls + d[mask])
        everyone = np.ones(group.size, dtype=bool)
        return ddiff(group, everyone) - ddiff(group, ~pos_full)

    base = relevant(labels) if relative else pairs(labels)
    out = {}
    for a in candidates:
        col = codes[:, a]
        sub = np.unique(labels * (int(col.max()) + 1) + col, return_inverse=True)[1].reshape(-1)
        out[a] = base - (relevant(sub) if relative else pairs(sub))
    return out


def greedy_reduct(system: InformationSystem, mode: str = "absolute", baseline=None,
                  summary: DiscernibilitySummary | None = None) -> AttributeSet:
    """Reduct grown from the core by repeatedly adding the attribute that
    separates the most still-indiscernible pairs, then pruned.

    Ties go to the lower attribute index. The result preserves IND of
    ``baseline`` (absolute) or its positive region (decision-relative) and
    no attribute of it is removable.
    """
    relative = _check_mode(mode)
    baseline = _as_attrset(system, baseline)
    if summary is None:
        summary = discernibility_scan(system, baseline, mode)
    target = _Target(system, baseline, relative)
    pos_full = positive_mask(system, baseline)
    result = summary.core
    added: list[int] = []
    while not target.met_by(result):
        candidates = [a for a in baseline if a not in result]
        counts = _undiscerned_counts(system, block_labels(system, result), candidates, relative, pos_full)
        best = max(candidates, key=lambda a: (counts[a], -a))
        if counts[best] == 0:
            raise ReductMinerError("greedy search stalled: no attribute separates the remaining pairs")
        result = result.add(best)
        added.append(best)
    for a in reversed(added):
        trial = result.remove(a)
        if target.met_by(trial):
            result = trial
    return result


def brute_force_reducts(system: InformationSystem, mode: str = "absolute", baseline=None) -> list[AttributeSet]:
    """Every reduct, by enumerating all subsets of ``baseline`` (exponential; small tables only)."""
    relative = _check_mode(mode)
    baseline = _as_attrset(system, baseline)
    idx = list(baseline)
    if len(idx) > 16:
        raise ValueError("brute-force reduct enumeration limited to 16 attributes")
    target = _Target(system, baseline, relative)
    k = system.n_attributes
    ok: set[int] = set()
    for mask in range(1 << len(idx)):
        bits = 0
        for t, a in enumerate(idx):
            if mask >> t & 1:
                bits |= 1 << a
        if target.met_by(AttributeSet(bits, k)):
            ok.add(bits)
    minimal = [b for b in ok if not any(b & ~(1 << a) in ok for a in range(k) if b >> a & 1)]
    return sorted((AttributeSet(b, k) for b in minimal), key=lambda s: (len(s), s.indices()))


# ---------------------------------------------------------------------------
# rules
# ---------------------------------------------------------------------------

def _condition_for(system: InformationSystem, a: int, value) -> Condition:
    desc = system.attributes[a]
    if desc.kind.is_encoded:
        return Condition.eq(desc.name, desc.decode(value))
    if desc.is_binned:
        lo, hi = desc.bin_bounds(int(value))
        return Condition(desc.name, lo, hi, False, True)
    return Condition.eq(desc.name, value.item() if hasattr(value, "item") else value)


def rules_from_partition(system: InformationSystem, partition: Partition) -> list[Rule]:
    """One rule per block: its shared attribute values imply its majority class.

    Binned attributes become interval conditions; raw continuous attributes
    are refused. Majority ties go to the globally more frequent class, then
    the lower code.
    """
    for a in partition.attribute_set:
        desc = system.attributes[a]
        if desc.kind is Kind.CONTINUOUS:
            raise DatasetError(
                f"attribute {desc.name!r} is continuous; apply_binning before extracting rules"
            )
    prior = system.class_counts()
    labels_of = system.decision.dictionary
    rules = []
    for b, rows in enumerate(partition.blocks):
        head = rows[0]
        conds = tuple(_condition_for(system, a, system.columns[a][head]) for a in partition.attribute_set)
        counts = system.class_counts(rows)
        rules.append(Rule(conds, labels_of[majority(counts, prior)], "roughset", id=f"block-{b}"))
    return rules
