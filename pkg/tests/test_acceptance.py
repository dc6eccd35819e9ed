"""Acceptance criteria, one marked test (or group) per criterion.

Criteria 1-6, 10 and 11 need the UCI bank-marketing files; without them the
tests fail with a "dataset missing" message rather than being skipped.
"""

from __future__ import annotations

import json
import time
from functools import reduce

import mpmath
import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from conftest import bank_path
from reductminer import (
    BANK_SCHEMA,
    apply_binning,
    approximate,
    best_split,
    brute_force_reducts,
    build_tree,
    conditional_entropy,
    discernibility_scan,
    entropy,
    evaluate_rules,
    format_percent,
    from_arrays,
    gain_ratio_table,
    greedy_reduct,
    info_gain_table,
    load_binning,
    load_csv,
    load_rules,
    partition_by,
    split_info,
    Kind,
)
from reductminer.cli import _fixture, main
from reductminer.dtree import candidate_for

REPRODUCED_PP = 0.5


def bank(name="bank.csv"):
    return load_csv(bank_path(name), schema=BANK_SCHEMA)


def fixture_rules(name):
    return load_rules(_fixture(name + ".json"))


def tables(max_attrs=8, max_rows=40):
    """Hypothesis strategy: small discrete information systems."""

    @st.composite
    def build(draw):
        k = draw(st.integers(1, max_attrs))
        n = draw(st.integers(2, max_rows))
        v = draw(st.integers(2, 3))
        cells = draw(st.lists(st.integers(0, v - 1), min_size=n * k, max_size=n * k))
        y = draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
        X = np.array(cells, dtype=np.int64).reshape(n, k)
        return from_arrays(X, np.array(y), [f"a{i}" for i in range(k)], kinds=[Kind.DISCRETE] * k)

    return build()


# ---------------------------------------------------------------------------
# 1-3: exact class breakdowns
# ---------------------------------------------------------------------------

@pytest.mark.acceptance(1, "duration four-class breakdown on bank.csv is exact")
def test_duration_breakdown(notes):
    system = bank()
    t0 = time.perf_counter()
    binned = apply_binning(system, load_binning(_fixture("bank_bins.json")))
    bins = binned.column("duration")
    yes = binned.decision_column == binned.decision_code("yes")
    pops = np.bincount(bins, minlength=4).tolist()
    yes_counts = np.bincount(bins[yes], minlength=4).tolist()
    scored = evaluate_rules(fixture_rules("bank_duration_classes"), system)
    pcts = [s.metrics.percent() for s in scored]
    elapsed = time.perf_counter() - t0
    notes.append(f"populations {pops}, yes {yes_counts}, confidences {pcts}, {elapsed:.3f}s")
    notes.append("half-up rendering: " + str([s.metrics.percent(rounding="half_up") for s in scored]))
    assert pops == [693, 1855, 1614, 359]
    assert yes_counts == [1, 72, 268, 180]
    assert pcts == ["99.85", "96.11", "83.39", "50.14"]
    assert elapsed < 1.0


@pytest.mark.acceptance(2, "poutcome four-class breakdown on bank.csv is exact")
def test_poutcome_breakdown(notes):
    system = bank()
    t0 = time.perf_counter()
    col = system.column("poutcome")
    labels = ["unknown", "failure", "other", "success"]
    codes = [system.attribute("poutcome").encode(l) for l in labels]
    yes = system.decision_column == system.decision_code("yes")
    pops = [int((col == c).sum()) for c in codes]
    yes_counts = [int(((col == c) & yes).sum()) for c in codes]
    scored = evaluate_rules(fixture_rules("bank_poutcome_classes"), system)
    pcts = [s.metrics.percent() for s in scored]
    elapsed = time.perf_counter() - t0
    notes.append(f"populations {pops}, yes {yes_counts}, confidences {pcts}")
    assert pops == [3705, 490, 197, 129]
    assert yes_counts == [337, 63, 38, 83]
    assert pcts == ["90.90", "87.14", "80.71", "64.34"]
    assert elapsed < 1.0


@pytest.mark.acceptance(3, "headline rule duration <= 211 -> no is 2475/2548 = 97.13% on bank.csv")
def test_headline_rule(notes):
    system = bank()
    rule = next(r for r in fixture_rules("bank_tree_rules") if r.id == "dt-1")
    m = evaluate_rules([rule], system)[0].metrics
    notes.append(f"support {m.support}, hits {m.hits}, confidence {m.percent()}")
    assert (m.support, m.hits, m.percent()) == (2548, 2475, "97.13")


# ---------------------------------------------------------------------------
# 4-5: attribute ranking and tree root
# ---------------------------------------------------------------------------

@pytest.mark.acceptance(4, "root ranking: duration first at ~0.108, day ~0")
def test_root_ranking(notes):
    system = bank()
    t0 = time.perf_counter()
    gr = gain_ratio_table(system)
    ig = {s.name: s for s in info_gain_table(system, "mdl")}
    elapsed = time.perf_counter() - t0
    notes.append("gain ratio top 3: " + ", ".join(f"{s.name}={s.gain_ratio:.6f}" for s in gr[:3]))
    notes.append(f"info gain (MDL bins): duration={ig['duration'].gain:.8f}, day={ig['day'].gain:.8f}")
    notes.append(f"gain ratio: duration={next(s for s in gr if s.name == 'duration').gain_ratio:.8f}, "
                 f"day={next(s for s in gr if s.name == 'day').gain_ratio:.8f}")
    assert gr[0].name == "duration"
    assert abs(ig["duration"].gain - 0.10811967) <= 0.02
    assert abs(ig["day"].gain) <= 0.001
    assert elapsed < 30


@pytest.mark.acceptance(5, "default tree splits first on duration with threshold in [210, 213]")
def test_tree_root(notes):
    tree = build_tree(bank())
    notes.append(f"root: {tree.split.name} <= {tree.split.threshold}, {tree.n_leaves} leaves")
    assert tree.split.name == "duration"
    assert 210 <= tree.split.threshold <= 213


# ---------------------------------------------------------------------------
# 6: reduct verdict
# ---------------------------------------------------------------------------

@pytest.mark.acceptance(6, "reduce reports the verdict for {age, balance, duration} on bank.csv")
def test_reduct_verdict(tmp_path, notes):
    path = bank_path("bank.csv")
    t0 = time.perf_counter()
    code = main(["reduce", "--input", str(path), "--candidate", "age,balance,duration", "--out", str(tmp_path)])
    elapsed = time.perf_counter() - t0
    assert code == 0
    report = json.loads((tmp_path / "reduce.json").read_text())
    cand = report["candidate"]
    notes.append(f"verdict: {cand['verdict']} (equivalent={cand['equivalent']}, removable={cand['removable']})")
    notes.append(f"core {report['core']}, greedy reduct {report['reduct']}, {elapsed:.1f}s")
    assert cand["verdict"] in ("reduct", "dependent", "not_equivalent")
    assert elapsed < 300


# ---------------------------------------------------------------------------
# 7-9: properties on synthetic data
# ---------------------------------------------------------------------------

def _oracle_agreement(system, mode):
    reducts = brute_force_reducts(system, mode)
    greedy = greedy_reduct(system, mode)
    core = discernibility_scan(system, None, mode).core
    expected_core = reduce(lambda a, b: a & b, reducts)
    return greedy in reducts, core == expected_core


@pytest.mark.acceptance(7, "greedy reduct and scan core agree with brute force on 50 tables")
@settings(max_examples=50, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(system=tables())
def test_oracle_equivalence(system):
    for mode in ("absolute", "decision_relative"):
        greedy_ok, core_ok = _oracle_agreement(system, mode)
        assert greedy_ok, f"{mode}: greedy output is not a reduct"
        assert core_ok, f"{mode}: scan core differs from the intersection of all reducts"


@pytest.mark.acceptance(8, "approximation sandwich and refinement monotonicity on 200 triples")
@settings(max_examples=200, deadline=None)
@given(system=tables(max_attrs=6), data=st.data())
def test_sandwich_and_refinement(system, data):
    k = system.n_attributes
    r = data.draw(st.lists(st.integers(0, k - 1), min_size=1, max_size=k, unique=True))
    target = np.array(data.draw(st.lists(st.booleans(), min_size=system.row_count, max_size=system.row_count)))
    ap = approximate(system, r, target)
    x = set(np.flatnonzero(target))
    assert set(ap.lower) <= x <= set(ap.upper)
    a = data.draw(st.integers(0, k - 1))
    assert partition_by(system, sorted(set(r) | {a})).refines(partition_by(system, r))


def _mp_entropy(counts):
    n = mpmath.mpf(sum(counts))
    return -mpmath.fsum((mpmath.mpf(c) / n) * mpmath.log(mpmath.mpf(c) / n, 2) for c in counts if c > 0)


@pytest.mark.acceptance(9, "entropy, conditional entropy and split info match 50-digit evaluation")
def test_entropy_numerics():
    mpmath.mp.dps = 50
    rng = np.random.default_rng(9)
    for _ in range(100):
        counts = rng.integers(0, 1000, size=rng.integers(1, 8)).tolist()
        counts[0] += 1
        assert abs(entropy(counts) - float(_mp_entropy(counts))) <= 1e-9
        assert abs(split_info(counts) - float(_mp_entropy(counts))) <= 1e-9
        # conditional entropy over a random partition of rows built from these counts
        n = sum(counts)
        decision = rng.integers(0, 3, size=n)
        labels = rng.integers(0, len(counts), size=n)
        blocks = [np.flatnonzero(labels == b) for b in range(len(counts)) if (labels == b).any()]
        exact = mpmath.fsum(
            mpmath.mpf(len(b)) / n * _mp_entropy(np.bincount(decision[b], minlength=3).tolist()) for b in blocks
        )
        assert abs(conditional_entropy(blocks, decision, 3) - float(exact)) <= 1e-9


@pytest.mark.acceptance(9, "entropy, conditional entropy and split info match 50-digit evaluation")
@settings(max_examples=100, deadline=None)
@given(system=tables(max_attrs=5, max_rows=40), min_leaf=st.integers(1, 3))
def test_split_gains_nonnegative(system, min_leaf):
    rows = np.arange(system.row_count)
    for a in range(system.n_attributes):
        c = candidate_for(system, a, rows, min_leaf)
        if c is not None:
            assert c.gain >= -1e-12
    s = best_split(system, min_leaf=min_leaf, allow_zero_gain=True)
    assert s is None or s.gain >= -1e-12


# ---------------------------------------------------------------------------
# 10: rule fixture on both datasets
# ---------------------------------------------------------------------------

@pytest.mark.acceptance(10, "rule fixtures evaluated on bank.csv and bank-full.csv with deltas")
def test_rule_fixtures(notes):
    small, full = bank("bank.csv"), bank("bank-full.csv")
    t0 = time.perf_counter()
    rules = fixture_rules("bank_roughset_rules") + fixture_rules("bank_tree_rules")
    rows = []
    for r in rules:
        found = []
        for tag, system in (("bank", small), ("full", full)):
            c = evaluate_rules([r], system)[0].metrics.confidence
            pct = None if c is None else float(c) * 100
            ok = pct is not None and abs(pct - r.expected) <= REPRODUCED_PP
            found.append(f"{tag}={format_percent(c) if c is not None else '-'}{'*' if ok else ''}")
        status = "reproduced" if any(s.endswith("*") for s in found) else "unreconciled"
        rows.append(f"{r.id}: printed {r.expected} | {' '.join(found)} | {status}")
        if r.id == "dt-1":
            headline = evaluate_rules([r], small)[0].metrics.percent()
    notes.extend(rows)
    assert headline == "97.13"
    assert time.perf_counter() - t0 < 10


# ---------------------------------------------------------------------------
# 11: scan performance and determinism
# ---------------------------------------------------------------------------

@pytest.mark.acceptance(11, "scan completes on bank-full.csv; parallel equals sequential on bank.csv")
def test_scan_performance(notes):
    small = bank("bank.csv")
    seq = discernibility_scan(small, threads=1, blocks=1)
    par = discernibility_scan(small, threads=4, blocks=16)
    assert seq == par
    full = bank("bank-full.csv")
    t0 = time.perf_counter()
    summary = discernibility_scan(full)
    elapsed = time.perf_counter() - t0
    notes.append(f"bank-full scan: {summary.pair_count} pairs in {elapsed:.1f}s")
    assert summary.pair_count == full.row_count * (full.row_count - 1) // 2
    assert elapsed < 600
