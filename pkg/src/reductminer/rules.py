"""Decision rules, their evaluation against an information system, and rule files.

Rules refer to attributes by name and to categorical values and decision
classes by their raw labels, so one rule list can be evaluated against any
table with a compatible schema, whatever its dictionary codes are.
Metrics are exact integer ratios; percentages are produced only for display.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .dataset import AttributeDescriptor, InformationSystem
from .exceptions import RuleError, UnknownAttribute

PROVENANCES = ("roughset", "tree", "manual")


def _num(v):
    """Render a bound compactly: 211.0 -> 211, 75.5 -> 75.5."""
    if isinstance(v, float) and v.is_integer():
        return int(v)
    return v


@dataclass(frozen=True)
class Condition:
    """One attribute test.

    Interval form: ``lower`` / ``upper`` bounds, either may be ``None``
    (unbounded); inclusivity is set per side and defaults to the
    left-open, right-closed convention ``lower < v <= upper``.
    Equality form: ``value`` holds a category label or a discrete number.
    """

    attribute: str
    lower: float | None = None
    upper: float | None = None
    lower_inclusive: bool = False
    upper_inclusive: bool = True
    value: str | int | float | None = None

    def __post_init__(self):
        if self.value is not None:
            if self.lower is not None or self.upper is not None:
                raise RuleError(f"condition on {self.attribute!r} mixes equality and interval forms")
            return
        if self.lower is None and self.upper is None:
            raise RuleError(f"interval on {self.attribute!r} needs at least one finite bound")
        for b in (self.lower, self.upper):
            if b is not None and not math.isfinite(b):
                raise RuleError(f"interval on {self.attribute!r}: bounds must be finite")
        if self.lower is not None and self.upper is not None:
            if self.lower > self.upper or (
                self.lower == self.upper and not (self.lower_inclusive and self.upper_inclusive)
            ):
                raise RuleError(f"empty interval on {self.attribute!r}: {self.lower} .. {self.upper}")

    # -- constructors ----------------------------------------------------
    @classmethod
    def le(cls, attribute: str, v: float) -> Condition:
        return cls(attribute, upper=v, upper_inclusive=True)

    @classmethod
    def lt(cls, attribute: str, v: float) -> Condition:
        return cls(attribute, upper=v, upper_inclusive=False)

    @classmethod
    def gt(cls, attribute: str, v: float) -> Condition:
        return cls(attribute, lower=v, lower_inclusive=False)

    @classmethod
    def ge(cls, attribute: str, v: float) -> Condition:
        return cls(attribute, lower=v, lower_inclusive=True)

    @classmethod
    def eq(cls, attribute: str, v) -> Condition:
        return cls(attribute, value=v)

    @classmethod
    def between(cls, attribute: str, lo: float, hi: float, lo_inclusive=False, hi_inclusive=True) -> Condition:
        return cls(attribute, lower=lo, upper=hi, lower_inclusive=lo_inclusive, upper_inclusive=hi_inclusive)

    @property
    def is_equality(self) -> bool:
        return self.value is not None

    def contains(self, v) -> bool:
        """Test a raw value (label or number) against this condition."""
        if self.is_equality:
            return v == self.value
        if self.lower is not None and (v < self.lower or (v == self.lower and not self.lower_inclusive)):
            return False
        if self.upper is not None and (v > self.upper or (v == self.upper and not self.upper_inclusive)):
            return False
        return True

    def intersect(self, other: Condition) -> Condition:
        """Merge two conditions on the same attribute into one."""
        if other.attribute.lower() != self.attribute.lower():
            raise RuleError("can only intersect conditions on the same attribute")
        if self.is_equality or other.is_equality:
            eq, rest = (self, other) if self.is_equality else (other, self)
            if rest.contains(eq.value):
                return eq
            raise RuleError(f"contradictory conditions on {self.attribute!r}")
        lo, lo_inc = self.lower, self.lower_inclusive
        if other.lower is not None and (lo is None or other.lower > lo or (other.lower == lo and not other.lower_inclusive)):
            lo, lo_inc = other.lower, other.lower_inclusive
        hi, hi_inc = self.upper, self.upper_inclusive
        if other.upper is not None and (hi is None or other.upper < hi or (other.upper == hi and not other.upper_inclusive)):
            hi, hi_inc = other.upper, other.upper_inclusive
        return Condition(self.attribute, lo, hi, lo_inc, hi_inc)

    # -- evaluation --------------------------------------------------------
    def mask(self, system: InformationSystem) -> np.ndarray:
        desc = system.attribute(self.attribute)
        col = system.column(self.attribute)
        if desc.kind.is_encoded:
            if not self.is_equality:
                raise RuleError(f"interval condition on categorical attribute {desc.name!r}")
            label = str(self.value)
            if label not in desc.dictionary:
                return np.zeros(system.row_count, dtype=bool)
            return col == desc.dictionary.index(label)
        if desc.is_binned:
            return self._binned_mask(desc, col)
        if self.is_equality:
            return col == self.value
        m = np.ones(system.row_count, dtype=bool)
        if self.lower is not None:
            m &= (col >= self.lower) if self.lower_inclusive else (col > self.lower)
        if self.upper is not None:
            m &= (col <= self.upper) if self.upper_inclusive else (col < self.upper)
        return m

    def _binned_mask(self, desc: AttributeDescriptor, col: np.ndarray) -> np.ndarray:
        n_bins = len(desc.cut_points) + 1
        if self.is_equality:
            raise RuleError(f"equality test on binned attribute {desc.name!r}; use an interval")
        keep = np.zeros(n_bins, dtype=bool)
        for k in range(n_bins):
            blo, bhi = desc.bin_bounds(k)
            inside = _interval_covers(self, blo, bhi)
            if inside is None:
                raise RuleError(
                    f"condition {self.render()} straddles bin {k} of binned attribute {desc.name!r}"
                )
            keep[k] = inside
        return keep[col]

    # -- rendering ---------------------------------------------------------
    def render(self) -> str:
        a = self.attribute
        if self.is_equality:
            v = self.value
            return f'{a} = "{v}"' if isinstance(v, str) else f"{a} = {_num(v)}"
        lo_op = "<=" if self.lower_inclusive else "<"
        hi_op = "<=" if self.upper_inclusive else "<"
        if self.lower is None:
            return f"{a} {hi_op} {_num(self.upper)}"
        if self.upper is None:
            return f"{a} {'>=' if self.lower_inclusive else '>'} {_num(self.lower)}"
        return f"{_num(self.lower)} {lo_op} {a} {hi_op} {_num(self.upper)}"

    def to_dict(self) -> dict:
        if self.is_equality:
            return {"attr": self.attribute, "op": "eq", "value": self.value}
        if self.lower is None:
            return {"attr": self.attribute, "op": "le" if self.upper_inclusive else "lt", "value": _num(self.upper)}
        if self.upper is None:
            return {"attr": self.attribute, "op": "ge" if self.lower_inclusive else "gt", "value": _num(self.lower)}
        bounds = ("[" if self.lower_inclusive else "(") + ("]" if self.upper_inclusive else ")")
        d = {"attr": self.attribute, "op": "in_range", "values": [_num(self.lower), _num(self.upper)]}
        if bounds != "(]":
            d["bounds"] = bounds
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> Condition:
        try:
            attr, op = d["attr"], d["op"]
        except KeyError as exc:
            raise RuleError(f"condition lacks field {exc}") from None
        if op == "in_range":
            vals = d.get("values")
            if not isinstance(vals, (list, tuple)) or len(vals) != 2:
                raise RuleError("in_range needs 'values': [low, high]")
            bounds = d.get("bounds", "(]")
            if len(bounds) != 2 or bounds[0] not in "([" or bounds[1] not in ")]":
                raise RuleError(f"bad bounds {bounds!r}; expected one of (], [], [), ()")
            return cls.between(attr, vals[0], vals[1], bounds[0] == "[", bounds[1] == "]")
        if "value" not in d:
            raise RuleError(f"operator {op!r} needs 'value'")
        v = d["value"]
        builders = {"le": cls.le, "lt": cls.lt, "gt": cls.gt, "ge": cls.ge, "eq": cls.eq}
        if op not in builders:
            raise RuleError(f"unknown operator {op!r}")
        return builders[op](attr, v)


def _interval_covers(cond: Condition, blo, bhi) -> bool | None:
    """Does ``cond`` contain all of bin (blo, bhi]? True/False, or None on partial overlap."""
    lo, hi = cond.lower, cond.upper
    # bin fully above the condition's upper bound, or below its lower bound
    if hi is not None and blo is not None and blo >= hi:
        return False
    if lo is not None and bhi is not None and (bhi < lo or (bhi == lo and not cond.lower_inclusive)):
        return False
    lower_ok = lo is None or (blo is not None and blo >= lo)
    upper_ok = hi is None or (bhi is not None and (bhi < hi or (bhi == hi and cond.upper_inclusive)))
    return True if lower_ok and upper_ok else None


@dataclass(frozen=True)
class Rule:
    """Conjunction of conditions implying a decision label."""

    conditions: tuple[Condition, ...]
    consequent: str
    provenance: str = "manual"
    id: str | None = None
    expected: float | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise RuleError(f"provenance must be one of {PROVENANCES}, got {self.provenance!r}")
        merged: dict[str, Condition] = {}
        for c in self.conditions:
            key = c.attribute.lower()
            merged[key] = merged[key].intersect(c) if key in merged else c
        object.__setattr__(self, "conditions", tuple(merged.values()))
        object.__setattr__(self, "consequent", str(self.consequent))

    def mask(self, system: InformationSystem) -> np.ndarray:
        m = np.ones(system.row_count, dtype=bool)
        for c in self.conditions:
            m &= c.mask(system)
        return m

    def matches(self, record: Mapping[str, object]) -> bool:
        lowered = {str(k).lower(): v for k, v in record.items()}
        for c in self.conditions:
            key = c.attribute.lower()
            if key not in lowered:
                raise UnknownAttribute(f"record has no value for {c.attribute!r}")
            if not c.contains(lowered[key]):
                return False
        return True

    def render(self, decision_name: str = "class") -> str:
        ante = " AND ".join(f"({c.render()})" for c in self.conditions) or "TRUE"
        return f'IF {ante} THEN {decision_name} = "{self.consequent}"'

    def to_dict(self) -> dict:
        d = {
            "conditions": [c.to_dict() for c in self.conditions],
            "consequent": self.consequent,
            "provenance": self.provenance,
        }
        if self.id is not None:
            d["id"] = self.id
        if self.expected is not None:
            d["expected"] = self.expected
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> Rule:
        if "consequent" not in d:
            raise RuleError("rule lacks 'consequent'")
        conds = tuple(Condition.from_dict(c) for c in d.get("conditions", []))
        return cls(conds, str(d["consequent"]), d.get("provenance", "manual"), d.get("id"), d.get("expected"))


@dataclass(frozen=True)
class RuleMetrics:
    """Exact counts for one rule on one table.

    ``confidence`` is also known as rule accuracy: hits / support.
    """

    support: int
    hits: int
    row_count: int
    class_count: int

    def __post_init__(self):
        if not 0 <= self.hits <= self.support <= self.row_count:
            raise RuleError(f"inconsistent counts: hits={self.hits} support={self.support} rows={self.row_count}")

    @property
    def confidence(self) -> Fraction | None:
        return Fraction(self.hits, self.support) if self.support else None

    @property
    def error(self) -> Fraction | None:
        c = self.confidence
        return None if c is None else 1 - c

    @property
    def coverage(self) -> Fraction:
        return Fraction(self.support, self.row_count)

    @property
    def lift(self) -> Fraction | None:
        c = self.confidence
        if c is None or self.class_count == 0:
            return None
        return c / Fraction(self.class_count, self.row_count)

    def percent(self, decimals: int = 2, rounding: str = "truncate") -> str | None:
        c = self.confidence
        return None if c is None else format_percent(c, decimals, rounding)

    def to_dict(self, decimals: int = 2, rounding: str = "truncate") -> dict:
        c = self.confidence
        lift = self.lift
        return {
            "support": self.support,
            "hits": self.hits,
            "confidence": None if c is None else f"{c.numerator}/{c.denominator}",
            "confidence_pct": self.percent(decimals, rounding),
            "coverage_pct": format_percent(self.coverage, decimals, rounding),
            "lift": None if lift is None else round(float(lift), 6),
        }


def format_percent(x: Fraction | float, decimals: int = 2, rounding: str = "truncate") -> str:
    """Render a ratio as a percentage with ``decimals`` places.

    ``truncate`` drops surplus digits (2475/2548 -> 97.13, where
    ``half_up`` gives 97.14);
    ``half_up`` rounds ties away from zero. Arithmetic is exact.
    """
    x = Fraction(x)
    scaled = x * 100 * 10**decimals
    sign = -1 if scaled < 0 else 1
    scaled = abs(scaled)
    if rounding == "truncate":
        q = scaled.numerator // scaled.denominator
    elif rounding == "half_up":
        q = (2 * scaled.numerator + scaled.denominator) // (2 * scaled.denominator)
    else:
        raise ValueError(f"unknown rounding {rounding!r}")
    q *= sign
    if decimals == 0:
        return str(q)
    s = f"{abs(q):0{decimals + 1}d}"
    return ("-" if q < 0 else "") + s[:-decimals] + "." + s[-decimals:]


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def evaluate_rule(rule: Rule, system: InformationSystem) -> RuleMetrics:
    """Full-scan support / hits for ``rule`` on ``system``."""
    code = system.decision.dictionary.index(rule.consequent) if rule.consequent in system.decision.dictionary else None
    if code is None:
        raise RuleError(
            f"consequent {rule.consequent!r} is not a value of {system.decision.name!r} "
            f"{list(system.decision.dictionary)}"
        )
    m = rule.mask(system)
    support = int(m.sum())
    hits = int((system.decision_column[m] == code).sum())
    class_count = int((system.decision_column == code).sum())
    return RuleMetrics(support, hits, system.row_count, class_count)


@dataclass(frozen=True)
class ScoredRule:
    rule: Rule
    metrics: RuleMetrics


def evaluate_rules(rules: Iterable[Rule], system: InformationSystem) -> list[ScoredRule]:
    return [ScoredRule(r, evaluate_rule(r, system)) for r in rules]


def filter_rules(scored: Iterable[ScoredRule], min_confidence: float = 0.75, min_support: int = 0) -> list[ScoredRule]:
    """Keep rules with confidence >= ``min_confidence`` and support >= ``min_support``.

    The 0.75 default caps rule error at 25 %. Comparison is exact.
    """
    thr = Fraction(str(min_confidence)) if isinstance(min_confidence, float) else Fraction(min_confidence)
    out = []
    for s in scored:
        c = s.metrics.confidence
        if c is not None and c >= thr and s.metrics.support >= min_support:
            out.append(s)
    return out


def rank_rules(scored: Iterable[ScoredRule], key: str = "confidence") -> list[ScoredRule]:
    """Stable descending sort by confidence, support or lift."""
    getters = {
        "confidence": lambda s: s.metrics.confidence,
        "support": lambda s: s.metrics.support,
        "lift": lambda s: s.metrics.lift,
    }
    if key not in getters:
        raise ValueError(f"unknown ranking key {key!r}; choose from {sorted(getters)}")
    get = getters[key]
    # undefined metrics (zero support) sort last
    return sorted(scored, key=lambda s: (get(s) is not None, get(s) or 0), reverse=True)


def predict_with_rules(rules: Sequence[Rule], record: Mapping[str, object], default: str) -> str:
    """Consequent of the first rule matching ``record``, else ``default``."""
    for r in rules:
        if r.matches(record):
            return r.consequent
    return default


def predict_table(rules: Sequence[Rule], system: InformationSystem, default: str) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised first-match prediction over every row.

    Returns ``(labels, rule_index)``; ``rule_index`` is -1 where the
    default was used.
    """
    which = np.full(system.row_count, -1, dtype=np.int64)
    open_ = np.ones(system.row_count, dtype=bool)
    for k, r in enumerate(rules):
        hit = open_ & r.mask(system)
        which[hit] = k
        open_ &= ~hit
    labels = np.array([r.consequent for r in rules] + [default], dtype=object)
    return labels[which], which


def majority(counts: Sequence[int], prior: Sequence[int]) -> int:
    """Index of the largest count; ties go to the larger ``prior`` count, then the lower index."""
    best = 0
    for k in range(1, len(counts)):
        if counts[k] > counts[best] or (counts[k] == counts[best] and prior[k] > prior[best]):
            best = k
    return best


# ---------------------------------------------------------------------------
# files & reports
# ---------------------------------------------------------------------------

def load_rules(path: str | Path) -> list[Rule]:
    """Read a JSON rule list (a bare list, or ``{"rules": [...]}``)."""
    with Path(path).open(encoding="utf-8") as fh:
        doc = json.load(fh)
    if isinstance(doc, dict):
        doc = doc.get("rules", [])
    if not isinstance(doc, list):
        raise RuleError("rule file must contain a JSON list of rules")
    return [Rule.from_dict(d) for d in doc]


def dump_rules(rules: Iterable[Rule], path: str | Path) -> None:
    Path(path).write_text(json.dumps([r.to_dict() for r in rules], indent=2) + "\n", encoding="utf-8")


def scored_to_dict(s: ScoredRule, decimals: int = 2, rounding: str = "truncate") -> dict:
    d = s.rule.to_dict()
    d["text"] = s.rule.render()
    d["metrics"] = s.metrics.to_dict(decimals, rounding)
    return d


def render_table(scored: Sequence[ScoredRule], decision_name: str = "class") -> str:
    """Aligned text table: support, hits, confidence, coverage, rule."""
    header = ("#", "support", "hits", "conf%", "cover%", "rule")
    rows = [
        (
            str(i + 1),
            str(s.metrics.support),
            str(s.metrics.hits),
            s.metrics.percent() or "-",
            format_percent(s.metrics.coverage),
            s.rule.render(decision_name),
        )
        for i, s in enumerate(scored)
    ]
    widths = [max(len(r[j]) for r in [header, *rows]) for j in range(5)]
    lines = []
    for r in [header, *rows]:
        lines.append("  ".join(r[j].rjust(widths[j]) for j in range(5)) + "  " + r[5])
    return "\n".join(lines)
