import json
from fractions import Fraction

import numpy as np
import pytest

from reductminer import (
    BANK_SCHEMA,
    BinningSpec,
    Condition,
    Rule,
    RuleError,
    RuleMetrics,
    apply_binning,
    evaluate_rule,
    evaluate_rules,
    filter_rules,
    format_percent,
    from_arrays,
    load_csv,
    load_rules,
    predict_table,
    rank_rules,
)
from reductminer.cli import _fixture
from reductminer.rules import dump_rules, majority, predict_with_rules, render_table


@pytest.fixture
def table():
    X = np.array([[100, "a"], [200, "b"], [211, "a"], [212, "b"], [700, "a"]], dtype=object)
    s = from_arrays(X, ["no", "no", "yes", "no", "yes"], ["duration", "kind"], kinds=["discrete", "categorical"])
    return s


@pytest.mark.parametrize(
    "x, decimals, truncate, half_up",
    [
        (Fraction(2475, 2548), 2, "97.13", "97.14"),
        (Fraction(692, 693), 2, "99.85", "99.86"),
        (Fraction(1, 800), 2, "0.12", "0.13"),
        (Fraction(1, 8), 1, "12.5", "12.5"),
        (Fraction(2, 3), 0, "66", "67"),
        (Fraction(1), 2, "100.00", "100.00"),
        (Fraction(0), 2, "0.00", "0.00"),
    ],
)
def test_format_percent(x, decimals, truncate, half_up):
    assert format_percent(x, decimals) == truncate
    assert format_percent(x, decimals, "half_up") == half_up


def test_format_percent_rejects_unknown_mode():
    with pytest.raises(ValueError):
        format_percent(0.5, rounding="banker")


def test_condition_semantics():
    assert Condition.le("d", 211).contains(211) and not Condition.le("d", 211).contains(212)
    assert not Condition.lt("d", 211).contains(211)
    c = Condition.between("d", 300, 600, False, False)
    assert not c.contains(300) and c.contains(301) and not c.contains(600)
    assert Condition.ge("d", 5).intersect(Condition.lt("d", 9)) == Condition("d", 5, 9, True, False)
    assert Condition.eq("k", "a").intersect(Condition.eq("k", "a")) == Condition.eq("k", "a")
    with pytest.raises(RuleError):
        Condition.eq("k", "a").intersect(Condition.eq("k", "b"))
    with pytest.raises(RuleError):
        Condition("d", 5, 5)


@pytest.mark.parametrize(
    "d",
    [
        {"attr": "d", "op": "le", "value": 211},
        {"attr": "d", "op": "gt", "value": 645},
        {"attr": "d", "op": "in_range", "values": [211, 645]},
        {"attr": "d", "op": "in_range", "values": [18, 25], "bounds": "[)"},
        {"attr": "k", "op": "eq", "value": "success"},
    ],
)
def test_condition_dict_round_trip(d):
    assert Condition.from_dict(d).to_dict() == d


def test_condition_from_dict_errors():
    for bad in ({"attr": "d"}, {"attr": "d", "op": "near", "value": 1}, {"attr": "d", "op": "le"},
                {"attr": "d", "op": "in_range", "values": [1]}, {"attr": "d", "op": "in_range", "values": [1, 2], "bounds": "<>"}):
        with pytest.raises(RuleError):
            Condition.from_dict(bad)


def test_rule_merges_conditions_and_renders():
    r = Rule((Condition.gt("duration", 211), Condition.le("duration", 645), Condition.eq("kind", "a")), "no")
    assert len(r.conditions) == 2
    assert r.render("y") == 'IF (211 < duration <= 645) AND (kind = "a") THEN y = "no"'
    assert r.matches({"Duration": 300, "kind": "a"}) and not r.matches({"duration": 700, "kind": "a"})
    with pytest.raises(RuleError):
        Rule((), "no", provenance="oracle")


def test_evaluate_rule_counts(table):
    m = evaluate_rule(Rule((Condition.le("duration", 211),), "no"), table)
    assert (m.support, m.hits, m.row_count, m.class_count) == (3, 2, 5, 3)
    assert m.confidence == Fraction(2, 3) and m.error == Fraction(1, 3)
    assert m.coverage == Fraction(3, 5) and m.lift == Fraction(10, 9)
    assert m.percent() == "66.66"


def test_zero_support_and_unknown_values(table):
    m = evaluate_rule(Rule((Condition.eq("kind", "zzz"),), "no"), table)
    assert m.support == 0 and m.confidence is None and m.percent() is None
    with pytest.raises(RuleError):
        evaluate_rule(Rule((), "maybe"), table)
    with pytest.raises(RuleError):
        evaluate_rule(Rule((Condition.le("kind", 3),), "no"), table)


def test_metrics_validate_counts():
    with pytest.raises(RuleError):
        RuleMetrics(3, 4, 10, 5)


def test_binned_attribute_conditions(table):
    b = apply_binning(table, [BinningSpec("duration", (211.5, 645.5))])
    ok = Rule((Condition.between("duration", 211.5, 645.5),), "no")
    assert evaluate_rule(ok, b).support == 1
    with pytest.raises(RuleError, match="straddles"):
        evaluate_rule(Rule((Condition.le("duration", 300),), "no"), b)


def test_filter_is_exact_at_threshold(table):
    scored = evaluate_rules([Rule((Condition.eq("kind", "b"),), "no"),
                             Rule((Condition.le("duration", 211),), "no")], table)
    kept = filter_rules(scored, min_confidence=0.75)
    assert [s.metrics.confidence for s in kept] == [Fraction(1)]
    assert len(filter_rules(scored, min_confidence=Fraction(2, 3))) == 2
    assert filter_rules(scored, min_confidence=0, min_support=3)[0].metrics.support == 3


def test_rank_is_stable_and_puts_undefined_last(table):
    rules = [Rule((Condition.eq("kind", "zzz"),), "no", id="empty"),
             Rule((Condition.le("duration", 211),), "no", id="r1"),
             Rule((Condition.eq("kind", "b"),), "no", id="r2"),
             Rule((Condition.eq("kind", "b"),), "no", id="r3")]
    ranked = rank_rules(evaluate_rules(rules, table), "confidence")
    assert [s.rule.id for s in ranked] == ["r2", "r3", "r1", "empty"]
    with pytest.raises(ValueError):
        rank_rules([], "beauty")


def test_first_match_prediction(table):
    rules = [Rule((Condition.gt("duration", 650),), "yes"), Rule((Condition.eq("kind", "a"),), "no")]
    labels, which = predict_table(rules, table, "no")
    assert labels.tolist() == ["no", "no", "no", "no", "yes"]
    assert which.tolist() == [1, -1, 1, -1, 0]
    assert predict_with_rules(rules, table.record(4), "no") == "yes"


def test_majority_tie_breaks():
    assert majority(np.array([3, 5]), np.array([1, 1])) == 1
    assert majority(np.array([4, 4]), np.array([1, 9])) == 1
    assert majority(np.array([4, 4]), np.array([2, 2])) == 0


def test_rule_file_round_trip(tmp_path):
    rules = [Rule((Condition.le("d", 211),), "no", "tree", id="t1", expected=97.13)]
    p = tmp_path / "r.json"
    dump_rules(rules, p)
    back = load_rules(p)
    assert back == rules and back[0].expected == 97.13
    p.write_text(json.dumps([r.to_dict() for r in rules]))
    assert load_rules(p) == rules


def test_render_table(table):
    text = render_table(evaluate_rules([Rule((Condition.le("duration", 211),), "no")], table), "y")
    assert "66.66" in text and 'THEN y = "no"' in text


@pytest.mark.parametrize("name", ["bank_roughset_rules", "bank_tree_rules", "bank_duration_classes",
                                  "bank_poutcome_classes"])
def test_packaged_rule_files_load(name):
    rules = load_rules(_fixture(name + ".json"))
    assert rules and all(r.expected is not None for r in rules)
    assert len({r.id for r in rules}) == len(rules)


def test_exhaustive_bin_rules_account_for_every_row(synthetic_bank):
    s = load_csv(synthetic_bank, schema=BANK_SCHEMA)
    rules = load_rules(_fixture("bank_duration_classes.json"))
    scored = evaluate_rules(rules, s)
    assert sum(x.metrics.support for x in scored) == s.row_count
    no_total = int((s.decision_column == s.decision_code("no")).sum())
    no_rows = sum(x.metrics.hits if x.rule.consequent == "no" else x.metrics.support - x.metrics.hits for x in scored)
    assert no_rows == no_total
    _, which = predict_table(rules, s, "unused")
    assert (which >= 0).all()


def test_opposite_consequents_sum_to_one(table):
    cond = (Condition.le("duration", 211),)
    a, b = evaluate_rules([Rule(cond, "no"), Rule(cond, "yes")], table)
    assert a.metrics.confidence + b.metrics.confidence == 1
