import numpy as np
import pytest

from semiresp import (ConfigError, Dataset, Observation, VariableKind, continuous,
                      discrete, from_arrays, load_csv, respondent_split, validate,
                      write_csv)
from semiresp.configio import ColumnMap


def make(x1, x2, y, delta):
    return from_arrays(x1, x2, y, delta, [discrete(0, 1, 2, 3)], [discrete(0, 1)])


def test_variable_kind_invariants():
    with pytest.raises(ValueError):
        VariableKind("discrete", ())
    with pytest.raises(ValueError):
        VariableKind("discrete", (1.0, 1.0))
    with pytest.raises(ValueError):
        VariableKind("nope")
    assert continuous().is_discrete is False
    assert discrete(0, 1).levels == (0.0, 1.0)


def test_validate_flags_y_present_without_response():
    data = Dataset(
        [Observation((0.0,), (0.0,), 1.0, 1),
         Observation((1.0,), (0.0,), 2.0, 1),
         Observation((0.0,), (1.0,), None, 0),
         Observation((1.0,), (1.0,), 3.0, 0)],   # row 3: y present but delta=0
        [discrete(0, 1)], [discrete(0, 1)])
    problems = validate(data)
    assert len(problems) == 1
    assert problems[0].index == 3
    assert "absent" in problems[0].rule


def test_validate_empty_dataset():
    data = Dataset([], [discrete(0, 1)], [discrete(0, 1)])
    problems = validate(data)
    assert len(problems) == 1
    assert "n >= 1" in problems[0].rule


def test_validate_clean_dataset():
    data = make([0, 1, 2, 3], [0, 1, 0, 1], [1.0, 0.0, 1.0, 0.0], [1, 1, 1, 1])
    assert validate(data) == []


def test_validate_catches_level_violation():
    data = from_arrays([0, 5], [0, 0], [1.0, 1.0], [1, 1],
                       [discrete(0, 1)], [discrete(0, 1)])
    problems = validate(data)
    assert any("outside declared levels" in p.rule and p.index == 1 for p in problems)


def test_respondent_split_sizes():
    data = make([0, 1, 2], [0, 1, 0], [1.0, 0.0, 1.0], [1, 0, 1])
    resp, nonresp = respondent_split(data)
    assert (resp.n, nonresp.n) == (2, 1)

    all_resp = make([0, 1], [0, 1], [1.0, 0.0], [1, 1])
    resp, nonresp = respondent_split(all_resp)
    assert (resp.n, nonresp.n) == (2, 0)

    none_resp = make([0, 1], [0, 1], [0.0, 0.0], [0, 0])
    resp, nonresp = respondent_split(none_resp)
    assert (resp.n, nonresp.n) == (0, 2)


def test_respondent_split_recombination_preserves_rows():
    rng = np.random.default_rng(3)
    n = 40
    data = make(rng.integers(0, 4, n), rng.integers(0, 2, n),
                rng.random(n).round(3), rng.integers(0, 2, n))
    resp, nonresp = respondent_split(data)
    combined = sorted(resp.observations + nonresp.observations,
                      key=lambda ob: (ob.delta, ob.x1, ob.x2, ob.y or 0.0))
    original = sorted(data.observations,
                      key=lambda ob: (ob.delta, ob.x1, ob.x2, ob.y or 0.0))
    assert combined == original
    assert resp.n + nonresp.n == data.n


def test_column_accessor_and_names():
    data = from_arrays(np.arange(6).reshape(3, 2), [[9.0], [8.0], [7.0]],
                       [1.0, 2.0, 3.0], [1, 1, 1],
                       [continuous(), continuous()], [continuous()])
    assert np.allclose(data.column("x1"), [0, 2, 4])
    assert np.allclose(data.column("x1_2"), [1, 3, 5])
    assert np.allclose(data.column("x2"), [9, 8, 7])
    with pytest.raises(ConfigError):
        data.column("x3")
    with pytest.raises(ConfigError):
        data.column("x1_5")


def test_csv_round_trip_is_lossless(tmp_path):
    rng = np.random.default_rng(11)
    n = 60
    delta = rng.integers(0, 2, n)
    data = from_arrays(rng.integers(0, 4, n), rng.integers(0, 2, n),
                       rng.standard_normal(n) * np.pi, delta,
                       [discrete(0, 1, 2, 3)], [discrete(0, 1)])
    cm = ColumnMap(x1=["a"], x2=["b"], y="inc", delta="d",
                   x1_kinds=[discrete(0, 1, 2, 3)], x2_kinds=[discrete(0, 1)])
    path = tmp_path / "roundtrip.csv"
    write_csv(path, data, cm)
    back = load_csv(path, cm)
    assert back.n == data.n
    for a, b in zip(data.observations, back.observations):
        assert a.delta == b.delta
        assert a.x1 == b.x1 and a.x2 == b.x2
        if a.delta == 1:
            assert a.y == b.y          # repr round trip is exact
        else:
            assert b.y is None
    assert validate(back) == []


def test_csv_missing_column_is_config_error(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n")
    cm = ColumnMap(x1=["a"], x2=["b"], y="missing_col", delta="",
                   x1_kinds=[continuous()], x2_kinds=[continuous()])
    with pytest.raises(ConfigError):
        load_csv(path, cm)


def test_csv_delta_inferred_from_missing_y(tmp_path):
    path = tmp_path / "infer.csv"
    path.write_text("a,b,yy\n0,0,1.5\n1,1,\n")
    cm = ColumnMap(x1=["a"], x2=["b"], y="yy", delta="",
                   x1_kinds=[discrete(0, 1)], x2_kinds=[discrete(0, 1)])
    data = load_csv(path, cm)
    assert data.delta.tolist() == [1, 0]
    assert data.observations[1].y is None
