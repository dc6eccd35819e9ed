"""Columnar, integer-encoded information systems loaded from delimited text.

An :class:`InformationSystem` holds one array per conditional attribute plus
the decision column. Categorical and binary values are dictionary-encoded in
first-appearance order; numeric columns are stored as ``int64`` (or
``float64`` for non-integral data).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .attrset import AttributeSet
from .exceptions import DatasetError, UnknownAttribute


class Kind(str, Enum):
    DISCRETE = "discrete"
    CONTINUOUS = "continuous"
    CATEGORICAL = "categorical"
    BINARY = "binary"

    @property
    def is_encoded(self) -> bool:
        return self in (Kind.CATEGORICAL, Kind.BINARY)

    @property
    def is_numeric(self) -> bool:
        return not self.is_encoded


@dataclass(frozen=True)
class AttributeDescriptor:
    """Column metadata.

    ``dictionary`` maps codes to raw text for categorical/binary columns and
    is empty for numeric ones. ``cut_points`` is set on columns produced by
    :func:`apply_binning`; the stored values are then bin indices.
    """

    name: str
    kind: Kind
    dictionary: tuple[str, ...] = ()
    index: int = 0
    cut_points: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "dictionary", tuple(self.dictionary))
        if self.kind.is_encoded != bool(self.dictionary):
            raise DatasetError(
                f"attribute {self.name!r}: dictionary must be non-empty exactly for categorical/binary kinds"
            )
        if self.kind is Kind.BINARY and len(self.dictionary) != 2:
            raise DatasetError(f"binary attribute {self.name!r} needs exactly 2 values, got {len(self.dictionary)}")
        if len(set(self.dictionary)) != len(self.dictionary):
            raise DatasetError(f"attribute {self.name!r}: duplicate dictionary entries")

    @property
    def is_binned(self) -> bool:
        return self.cut_points is not None

    def decode(self, code: int) -> str:
        return self.dictionary[int(code)]

    def encode(self, label: str) -> int:
        try:
            return self.dictionary.index(label)
        except ValueError:
            raise DatasetError(f"value {label!r} not in dictionary of {self.name!r}") from None

    def bin_bounds(self, k: int) -> tuple[float | None, float | None]:
        """(exclusive lower, inclusive upper) bounds of bin ``k``; ``None`` is unbounded."""
        cuts = self.cut_points
        if cuts is None:
            raise DatasetError(f"attribute {self.name!r} is not binned")
        if not 0 <= k <= len(cuts):
            raise DatasetError(f"bin {k} out of range for {self.name!r}")
        lower = cuts[k - 1] if k > 0 else None
        upper = cuts[k] if k < len(cuts) else None
        return lower, upper

    def to_dict(self) -> dict:
        d = {"name": self.name, "kind": self.kind.value, "index": self.index}
        if self.dictionary:
            d["dictionary"] = list(self.dictionary)
        if self.cut_points is not None:
            d["cut_points"] = list(self.cut_points)
        return d


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class InformationSystem:
    """A decision table ``<U, C u {d}>``; immutable after construction."""

    attributes: tuple[AttributeDescriptor, ...]
    decision: AttributeDescriptor
    columns: tuple[np.ndarray, ...]
    decision_column: np.ndarray
    source: str | None = field(default=None, compare=False)

    def __post_init__(self):
        attrs = tuple(self.attributes)
        cols = tuple(_readonly(np.asarray(c)) for c in self.columns)
        dcol = _readonly(np.asarray(self.decision_column, dtype=np.int64))
        object.__setattr__(self, "attributes", attrs)
        object.__setattr__(self, "columns", cols)
        object.__setattr__(self, "decision_column", dcol)

        if not attrs:
            raise DatasetError("an information system needs at least one conditional attribute")
        if len(cols) != len(attrs):
            raise DatasetError(f"{len(attrs)} attributes but {len(cols)} columns")
        names = [a.name.lower() for a in attrs]
        if len(set(names)) != len(names):
            raise DatasetError("attribute names must be unique")
        if self.decision.name.lower() in names:
            raise DatasetError(f"decision attribute {self.decision.name!r} also listed as conditional")
        if not self.decision.kind.is_encoded:
            raise DatasetError("decision attribute must be dictionary-encoded")
        n = dcol.shape[0]
        if n == 0:
            raise DatasetError("empty universe: the table has no rows")
        for a, c in zip(attrs, cols):
            if c.ndim != 1 or c.shape[0] != n:
                raise DatasetError(f"column {a.name!r} has length {c.shape[0]}, expected {n}")
            if a.kind.is_encoded and (c.min() < 0 or c.max() >= len(a.dictionary)):
                raise DatasetError(f"column {a.name!r} holds codes outside its dictionary")
        if dcol.min() < 0 or dcol.max() >= len(self.decision.dictionary):
            raise DatasetError("decision column holds codes outside its dictionary")

    # -- shape ---------------------------------------------------------
    @property
    def row_count(self) -> int:
        return int(self.decision_column.shape[0])

    @property
    def n_attributes(self) -> int:
        return len(self.attributes)

    @property
    def n_classes(self) -> int:
        return len(self.decision.dictionary)

    @property
    def attribute_names(self) -> list[str]:
        return [a.name for a in self.attributes]

    # -- lookup --------------------------------------------------------
    @cached_property
    def _name_index(self) -> dict[str, int]:
        return {a.name.lower(): i for i, a in enumerate(self.attributes)}

    def attribute_index(self, name: str | int) -> int:
        if isinstance(name, (int, np.integer)):
            if not 0 <= name < self.n_attributes:
                raise UnknownAttribute(f"attribute index {name} out of range")
            return int(name)
        try:
            return self._name_index[name.lower()]
        except KeyError:
            if name.lower() == self.decision.name.lower():
                raise UnknownAttribute(f"{name!r} is the decision attribute, not a conditional one") from None
            raise UnknownAttribute(f"unknown attribute {name!r}") from None

    def attribute(self, name: str | int) -> AttributeDescriptor:
        return self.attributes[self.attribute_index(name)]

    def column(self, name: str | int) -> np.ndarray:
        return self.columns[self.attribute_index(name)]

    def attrset(self, names: Iterable[str | int] | None = None) -> AttributeSet:
        """AttributeSet for the given names/indices; all conditional attributes if omitted."""
        if names is None:
            return AttributeSet.full(self.n_attributes)
        return AttributeSet.from_indices((self.attribute_index(n) for n in names), self.n_attributes)

    def names_of(self, aset: AttributeSet) -> list[str]:
        return [self.attributes[i].name for i in aset]

    # -- derived arrays ------------------------------------------------
    @cached_property
    def codes(self) -> np.ndarray:
        """Dense ``(row_count, n_attributes)`` int64 matrix; equal codes iff equal values per column."""
        out = np.empty((self.row_count, self.n_attributes), dtype=np.int64)
        for j, c in enumerate(self.columns):
            if self.attributes[j].kind.is_encoded:
                out[:, j] = c
            else:
                out[:, j] = np.unique(c, return_inverse=True)[1].reshape(-1)
        out.setflags(write=False)
        return out

    def class_counts(self, rows: np.ndarray | None = None) -> np.ndarray:
        d = self.decision_column if rows is None else self.decision_column[rows]
        return np.bincount(d, minlength=self.n_classes).astype(np.int64)

    def decision_code(self, label: str | int) -> int:
        if isinstance(label, (int, np.integer)):
            return int(label)
        return self.decision.encode(label)

    def record(self, i: int) -> dict[str, object]:
        """Row ``i`` decoded to raw values, keyed by attribute name."""
        rec: dict[str, object] = {}
        for a, c in zip(self.attributes, self.columns):
            v = c[i]
            rec[a.name] = a.decode(v) if a.kind.is_encoded else v.item()
        return rec

    # -- derivation ----------------------------------------------------
    def take(self, rows: Sequence[int] | np.ndarray) -> InformationSystem:
        """Sub-table on the given rows (dictionaries are kept as-is)."""
        rows = np.asarray(rows, dtype=np.int64)
        return InformationSystem(
            self.attributes,
            self.decision,
            tuple(c[rows] for c in self.columns),
            self.decision_column[rows],
            source=self.source,
        )

    def select(self, names: Iterable[str | int]) -> InformationSystem:
        """Projection onto a subset of conditional attributes (in the given order)."""
        idx = [self.attribute_index(n) for n in names]
        attrs = tuple(
            AttributeDescriptor(a.name, a.kind, a.dictionary, k, a.cut_points)
            for k, a in enumerate(self.attributes[i] for i in idx)
        )
        return InformationSystem(attrs, self.decision, tuple(self.columns[i] for i in idx),
                                 self.decision_column, source=self.source)

    def replace_column(self, index: int, descriptor: AttributeDescriptor, column: np.ndarray) -> InformationSystem:
        attrs = list(self.attributes)
        cols = list(self.columns)
        attrs[index] = descriptor
        cols[index] = column
        return InformationSystem(tuple(attrs), self.decision, tuple(cols), self.decision_column, source=self.source)

    def same_schema(self, other: InformationSystem) -> bool:
        """True when both systems share attribute names, kinds and decision name."""
        mine = [(a.name.lower(), a.kind) for a in self.attributes]
        theirs = [(a.name.lower(), a.kind) for a in other.attributes]
        return mine == theirs and self.decision.name.lower() == other.decision.name.lower()


# ---------------------------------------------------------------------------
# schemas & loading
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ColumnSpec:
    name: str
    kind: Kind

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))


@dataclass(frozen=True)
class Schema:
    """Explicit column kinds. ``decision`` names the decision column."""

    columns: tuple[ColumnSpec, ...]
    decision: str

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str]], decision: str) -> Schema:
        return cls(tuple(ColumnSpec(n, Kind(k)) for n, k in pairs), decision)

    def kind_of(self, name: str) -> Kind | None:
        for c in self.columns:
            if c.name.lower() == name.lower():
                return c.kind
        return None


#: UCI bank-marketing layout (bank.csv / bank-full.csv). Job, marital,
#: education, contact, month and poutcome hold category labels in the files.
BANK_SCHEMA = Schema.from_pairs(
    [
        ("age", "discrete"),
        ("job", "categorical"),
        ("marital", "categorical"),
        ("education", "categorical"),
        ("default", "binary"),
        ("balance", "discrete"),
        ("housing", "binary"),
        ("loan", "binary"),
        ("contact", "categorical"),
        ("day", "discrete"),
        ("month", "categorical"),
        ("duration", "discrete"),
        ("campaign", "discrete"),
        ("pdays", "discrete"),
        ("previous", "discrete"),
        ("poutcome", "categorical"),
        ("y", "binary"),
    ],
    decision="y",
)


def _parse_int(cell: str) -> int | None:
    try:
        return int(cell)
    except ValueError:
        return None


def _parse_float(cell: str) -> float | None:
    try:
        v = float(cell)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def _infer_kind(values: list[str]) -> Kind:
    if all(_parse_int(v) is not None for v in values):
        return Kind.DISCRETE
    if all(_parse_float(v) is not None for v in values):
        return Kind.CONTINUOUS
    return Kind.BINARY if len(set(values)) == 2 else Kind.CATEGORICAL


def _encode(values: list[str]) -> tuple[tuple[str, ...], np.ndarray]:
    lookup: dict[str, int] = {}
    codes = np.empty(len(values), dtype=np.int64)
    for i, v in enumerate(values):
        code = lookup.get(v)
        if code is None:
            code = lookup[v] = len(lookup)
        codes[i] = code
    return tuple(lookup), codes


def _parse_numeric(values: list[str], kind: Kind, name: str, col: int, first_line: list[int]) -> np.ndarray:
    parse = _parse_int if kind is Kind.DISCRETE else _parse_float
    out = np.empty(len(values), dtype=np.int64 if kind is Kind.DISCRETE else np.float64)
    for i, v in enumerate(values):
        x = parse(v)
        if x is None:
            raise DatasetError(f"line {first_line[i]}, column {col + 1} ({name!r}): cannot parse {v!r} as {kind.value}")
        out[i] = x
    return out


def build_system(
    header: Sequence[str],
    rows: Sequence[Sequence[str]],
    schema: Schema | None = None,
    decision: str | None = None,
    line_numbers: list[int] | None = None,
    source: str | None = None,
) -> InformationSystem:
    """Build an InformationSystem from already-split text rows."""
    header = [h.strip() for h in header]
    if len(set(h.lower() for h in header)) != len(header):
        raise DatasetError("duplicate column names in header")
    if not rows:
        raise DatasetError("empty universe: the table has no rows")
    if line_numbers is None:
        line_numbers = list(range(2, len(rows) + 2))
    if decision is None:
        decision = schema.decision if schema is not None else header[-1]
    lowered = [h.lower() for h in header]
    if decision.lower() not in lowered:
        raise DatasetError(f"decision column {decision!r} not in header")
    d_idx = lowered.index(decision.lower())
    if schema is not None:
        missing = [c.name for c in schema.columns if c.name.lower() not in lowered]
        if missing:
            raise DatasetError(f"header lacks schema columns: {missing}")

    attrs: list[AttributeDescriptor] = []
    cols: list[np.ndarray] = []
    dec_desc = dec_col = None
    for j, name in enumerate(header):
        raw = [r[j] for r in rows]
        kind = schema.kind_of(name) if schema is not None else None
        if kind is None:
            kind = _infer_kind(raw)
        if j == d_idx:
            dictionary, codes = _encode(raw)
            dkind = Kind.BINARY if len(dictionary) == 2 else Kind.CATEGORICAL
            dec_desc = AttributeDescriptor(name, dkind, dictionary, index=-1)
            dec_col = codes
            continue
        if kind.is_encoded:
            dictionary, codes = _encode(raw)
            if kind is Kind.BINARY and len(dictionary) == 1:
                kind = Kind.CATEGORICAL
            elif kind is Kind.BINARY and len(dictionary) != 2:
                raise DatasetError(f"column {name!r} declared binary but has {len(dictionary)} distinct values")
            attrs.append(AttributeDescriptor(name, kind, dictionary, index=len(attrs)))
            cols.append(codes)
        else:
            cols.append(_parse_numeric(raw, kind, name, j, line_numbers))
            attrs.append(AttributeDescriptor(name, kind, (), index=len(attrs)))
    return InformationSystem(tuple(attrs), dec_desc, tuple(cols), dec_col, source=source)


def load_csv(
    path: str | Path,
    schema: Schema | None = None,
    delimiter: str = ";",
    decision: str | None = None,
) -> InformationSystem:
    """Read a delimited file with a header row into an InformationSystem.

    The last column is the decision unless ``decision`` or the schema names
    another. Without a schema, kinds are inferred: all-integer columns are
    discrete, all-numeric ones continuous, two-valued text binary, other
    text categorical. Quotes are stripped; blank lines are skipped.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=delimiter, quotechar='"')
        header = None
        rows: list[list[str]] = []
        lines: list[int] = []
        for rec in reader:
            if not rec or (len(rec) == 1 and not rec[0].strip()):
                continue
            if header is None:
                header = rec
                continue
            if len(rec) != len(header):
                raise DatasetError(
                    f"line {reader.line_num}: expected {len(header)} fields, found {len(rec)}"
                )
            rows.append([c.strip() for c in rec])
            lines.append(reader.line_num)
    if header is None:
        raise DatasetError(f"{path}: empty file (no header row)")
    return build_system(header, rows, schema=schema, decision=decision, line_numbers=lines, source=str(path))


# ---------------------------------------------------------------------------
# binning
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BinningSpec:
    """Cut points for one numeric attribute; value v falls in bin k when cuts[k-1] < v <= cuts[k]."""

    attribute: str
    cut_points: tuple[float, ...]

    def __post_init__(self):
        cuts = tuple(float(c) for c in self.cut_points)
        if not cuts:
            raise DatasetError(f"binning for {self.attribute!r}: cut_points must be non-empty")
        if not all(math.isfinite(c) for c in cuts):
            raise DatasetError(f"binning for {self.attribute!r}: cut points must be finite")
        if any(b <= a for a, b in zip(cuts, cuts[1:])):
            raise DatasetError(f"binning for {self.attribute!r}: cut points must be strictly ascending")
        object.__setattr__(self, "cut_points", cuts)

    @property
    def n_bins(self) -> int:
        return len(self.cut_points) + 1

    def assign(self, values: np.ndarray) -> np.ndarray:
        return np.searchsorted(np.asarray(self.cut_points), values, side="left").astype(np.int64)


def apply_binning(system: InformationSystem, specs: Iterable[BinningSpec]) -> InformationSystem:
    """Return a copy of ``system`` with each named numeric attribute replaced by bin indices."""
    out = system
    for spec in specs:
        if spec.attribute.lower() == system.decision.name.lower():
            raise DatasetError(f"cannot bin the decision attribute {spec.attribute!r}")
        i = system.attribute_index(spec.attribute)
        desc = system.attributes[i]
        if desc.kind.is_encoded:
            raise DatasetError(f"cannot bin {desc.kind.value} attribute {desc.name!r}")
        if desc.is_binned:
            raise DatasetError(f"attribute {desc.name!r} is already binned")
        binned = AttributeDescriptor(desc.name, Kind.DISCRETE, (), desc.index, spec.cut_points)
        out = out.replace_column(i, binned, spec.assign(system.columns[i]))
    return out


def load_binning(path: str | Path) -> list[BinningSpec]:
    """Read ``{"attribute": [cut, ...], ...}`` from a JSON file."""
    with Path(path).open(encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise DatasetError("binning file must hold a JSON object mapping attribute -> cut list")
    return [BinningSpec(name, tuple(cuts)) for name, cuts in doc.items()]


# ---------------------------------------------------------------------------
# summary
# ---------------------------------------------------------------------------

def describe(system: InformationSystem) -> dict:
    """Per-attribute metadata and the decision class distribution, JSON-ready."""
    attrs = []
    for a, c in zip(system.attributes, system.columns):
        entry = a.to_dict()
        entry["distinct"] = int(np.unique(c).size)
        if a.kind.is_encoded:
            counts = np.bincount(c, minlength=len(a.dictionary))
            entry["counts"] = {lab: int(k) for lab, k in zip(a.dictionary, counts)}
        else:
            entry["min"] = c.min().item()
            entry["max"] = c.max().item()
        attrs.append(entry)
    counts = system.class_counts()
    return {
        "source": system.source,
        "rows": system.row_count,
        "conditional_attributes": system.n_attributes,
        "attributes": attrs,
        "decision": {
            "name": system.decision.name,
            "kind": system.decision.kind.value,
            "dictionary": list(system.decision.dictionary),
            "distribution": {lab: int(k) for lab, k in zip(system.decision.dictionary, counts)},
        },
    }


def from_arrays(
    X,
    y,
    feature_names: Sequence[str] | None = None,
    kinds: Sequence[str | Kind] | None = None,
    decision_name: str = "class",
) -> InformationSystem:
    """Build an InformationSystem from an array-like / DataFrame ``X`` and labels ``y``.

    Object/string columns become categorical (binary when two-valued);
    integer columns discrete, float columns continuous, unless ``kinds``
    overrides.
    """
    if hasattr(X, "columns") and feature_names is None:
        feature_names = [str(c) for c in X.columns]
    if hasattr(X, "to_numpy"):
        cols_raw = [np.asarray(X.iloc[:, j].to_numpy()) for j in range(X.shape[1])]
    else:
        arr = np.asarray(X, dtype=object if np.asarray(X).dtype.kind in "OUS" else None)
        if arr.ndim != 2:
            raise DatasetError(f"expected a 2-D feature matrix, got shape {arr.shape}")
        cols_raw = [arr[:, j] for j in range(arr.shape[1])]
    k = len(cols_raw)
    if feature_names is None:
        feature_names = [f"x{j}" for j in range(k)]
    if len(feature_names) != k:
        raise DatasetError(f"{len(feature_names)} feature names for {k} columns")
    y = np.asarray(y)
    if y.ndim != 1 or (k and y.shape[0] != cols_raw[0].shape[0]):
        raise DatasetError("y must be 1-D with one label per row")

    attrs, cols = [], []
    for j, (name, raw) in enumerate(zip(feature_names, cols_raw)):
        kind = Kind(kinds[j]) if kinds is not None else None
        if kind is None:
            if raw.dtype.kind in "iub":
                kind = Kind.DISCRETE
            elif raw.dtype.kind == "f":
                kind = Kind.CONTINUOUS
            else:
                kind = Kind.BINARY if len(set(raw.tolist())) == 2 else Kind.CATEGORICAL
        if kind.is_encoded:
            dictionary, codes = _encode([str(v) for v in raw.tolist()])
            if kind is Kind.BINARY and len(dictionary) != 2:
                kind = Kind.CATEGORICAL
            attrs.append(AttributeDescriptor(str(name), kind, dictionary, j))
            cols.append(codes)
        else:
            dtype = np.int64 if kind is Kind.DISCRETE else np.float64
            try:
                cols.append(np.asarray(raw, dtype=dtype))
            except (TypeError, ValueError) as exc:
                raise DatasetError(f"column {name!r}: {exc}") from None
            attrs.append(AttributeDescriptor(str(name), kind, (), j))
    dictionary, dcodes = _encode([str(v) for v in y.tolist()])
    dkind = Kind.BINARY if len(dictionary) == 2 else Kind.CATEGORICAL
    return InformationSystem(tuple(attrs), AttributeDescriptor(decision_name, dkind, dictionary, -1),
                             tuple(cols), dcodes)
