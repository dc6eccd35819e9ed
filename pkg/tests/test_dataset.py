import json

import numpy as np
import pandas as pd
import pytest

from reductminer import (
    BANK_SCHEMA,
    AttributeSet,
    BinningSpec,
    DatasetError,
    Kind,
    Schema,
    UnknownAttribute,
    apply_binning,
    describe,
    from_arrays,
    load_binning,
    load_csv,
)
from synth import write_bank_csv


def write(tmp_path, text, name="t.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_load_infers_kinds_and_encodes_in_first_appearance_order(tmp_path):
    p = write(tmp_path, 'age;job;score;flag;y\n30;"admin.";1.5;yes;no\n41;"tech";2.0;no;yes\n30;"svc";0.5;no;no\n')
    s = load_csv(p)
    assert [a.kind for a in s.attributes] == [Kind.DISCRETE, Kind.CATEGORICAL, Kind.CONTINUOUS, Kind.BINARY]
    assert s.attribute("job").dictionary == ("admin.", "tech", "svc")
    assert s.column("job").tolist() == [0, 1, 2]
    assert s.decision.dictionary == ("no", "yes")
    assert s.row_count == 3 and s.n_attributes == 4 and s.n_classes == 2
    assert s.record(1) == {"age": 41, "job": "tech", "score": 2.0, "flag": "no"}


def test_lookup_is_case_insensitive_and_unknown_names_raise(tmp_path):
    s = load_csv(write(tmp_path, "Age;y\n1;a\n2;b\n"))
    assert s.attribute_index("AGE") == 0
    with pytest.raises(UnknownAttribute):
        s.column("height")


def test_columns_are_read_only(tmp_path):
    s = load_csv(write(tmp_path, "a;y\n1;x\n2;z\n"))
    with pytest.raises(ValueError):
        s.columns[0][0] = 5


def test_wrong_field_count_reports_line(tmp_path):
    with pytest.raises(DatasetError, match="line 3"):
        load_csv(write(tmp_path, "a;b;y\n1;2;x\n1;2\n"))


def test_bad_numeric_reports_line_and_column(tmp_path):
    schema = Schema.from_pairs([("a", "discrete"), ("b", "discrete")], "y")
    with pytest.raises(DatasetError, match=r"line 3, column 2"):
        load_csv(write(tmp_path, "a;b;y\n1;2;x\n1;two;x\n"), schema=schema)


def test_empty_inputs(tmp_path):
    with pytest.raises(DatasetError, match="empty file"):
        load_csv(write(tmp_path, ""))
    with pytest.raises(DatasetError, match="no rows"):
        load_csv(write(tmp_path, "a;y\n"))
    with pytest.raises(FileNotFoundError):
        load_csv(tmp_path / "nope.csv")


def test_blank_lines_and_comma_delimiter(tmp_path):
    s = load_csv(write(tmp_path, "a,y\n\n1,x\n\n2,z\n"), delimiter=",")
    assert s.row_count == 2


def test_explicit_decision_column(tmp_path):
    s = load_csv(write(tmp_path, "y;a;b\nx;1;2\nz;3;4\n"), decision="y")
    assert s.decision.name == "y" and s.attribute_names == ["a", "b"]


def test_bank_schema_kinds(tmp_path):
    s = load_csv(write_bank_csv(tmp_path / "b.csv", 200), schema=BANK_SCHEMA)
    kinds = {a.name: a.kind for a in s.attributes}
    assert kinds["month"] is Kind.CATEGORICAL
    assert kinds["housing"] is Kind.BINARY
    assert kinds["duration"] is Kind.DISCRETE
    assert s.decision.name == "y" and set(s.decision.dictionary) <= {"yes", "no"}


def test_binning_is_left_open_right_closed():
    spec = BinningSpec("age", (25, 30, 60))
    assert spec.assign(np.array([18, 25, 26, 60, 61])).tolist() == [0, 0, 1, 2, 3]


@pytest.mark.parametrize("cuts", [(), (3, 2), (1, 1), (float("nan"),)])
def test_binning_rejects_bad_cut_points(cuts):
    with pytest.raises(DatasetError):
        BinningSpec("a", cuts)


def test_apply_binning_records_bounds(tmp_path):
    s = load_csv(write(tmp_path, "d;c;y\n10;u;a\n100;v;b\n700;u;a\n"))
    b = apply_binning(s, [BinningSpec("d", (75.5, 211.5, 645.5))])
    desc = b.attribute("d")
    assert desc.is_binned and b.column("d").tolist() == [0, 1, 3]
    assert desc.bin_bounds(0) == (None, 75.5)
    assert desc.bin_bounds(3) == (645.5, None)
    with pytest.raises(DatasetError):
        apply_binning(b, [BinningSpec("d", (1,))])
    with pytest.raises(DatasetError):
        apply_binning(s, [BinningSpec("c", (1,))])
    with pytest.raises(DatasetError):
        apply_binning(s, [BinningSpec("y", (1,))])
    assert s.column("d").tolist() == [10, 100, 700]


def test_load_binning(tmp_path):
    p = tmp_path / "bins.json"
    p.write_text(json.dumps({"duration": [75.5, 211.5]}))
    assert load_binning(p) == [BinningSpec("duration", (75.5, 211.5))]
    p.write_text("[1, 2]")
    with pytest.raises(DatasetError):
        load_binning(p)


def test_take_select_and_schema_comparison(tmp_path):
    s = load_csv(write(tmp_path, "a;b;y\n1;u;x\n2;v;z\n3;u;x\n"))
    t = s.take([0, 2])
    assert t.row_count == 2 and t.same_schema(s)
    sel = s.select(["b"])
    assert sel.attribute_names == ["b"] and not sel.same_schema(s)
    assert s.attrset(["b"]) == AttributeSet.from_indices([1], 2)
    assert s.names_of(s.attrset(["a", "b"])) == ["a", "b"]


def test_describe_is_json_ready(tmp_path):
    s = load_csv(write(tmp_path, "a;b;y\n1;u;x\n5;v;z\n3;u;x\n"))
    d = describe(s)
    json.dumps(d)
    assert d["rows"] == 3
    assert d["attributes"][0]["min"] == 1 and d["attributes"][0]["max"] == 5
    assert d["attributes"][1]["counts"] == {"u": 2, "v": 1}
    assert d["decision"]["distribution"] == {"x": 2, "z": 1}


def test_from_arrays_accepts_dataframes():
    df = pd.DataFrame({"n": [1, 2, 3], "f": [0.5, 1.5, 2.5], "c": ["a", "b", "c"]})
    s = from_arrays(df, ["p", "q", "p"])
    assert [a.kind for a in s.attributes] == [Kind.DISCRETE, Kind.CONTINUOUS, Kind.CATEGORICAL]
    assert s.decision.dictionary == ("p", "q")
    with pytest.raises(DatasetError):
        from_arrays(np.zeros((3, 2)), [1, 2])
