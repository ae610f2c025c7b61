import csv
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from intrinsic_chern import ConfigError, chern_model
from intrinsic_chern.config import ExperimentConfig, ModelSpec, load_config
from intrinsic_chern.experiments import SCHEMA_VERSION, ResultRecord, read_results, run_experiment


def strip_times(records):
    out = []
    for r in records:
        d = r.to_dict()
        d.pop("wall_time")
        out.append(d)
    return out


def test_explicit_model_matches_builtin():
    ref = chern_model(0.7)
    hop = [{"q": list(q), "re": a.real.tolist(), "im": a.imag.tolist()} for q, a in ref.hoppings.items()]
    spec = ModelSpec.from_dict({"d": 2, "Q": 2, "hoppings": hop, "disorder": [{"q": [0, 0], "W": 0.5}]})
    m = spec.build()
    assert m.name == "custom"
    assert m.disorder == {(0, 0): 0.5}
    for q, a in ref.hoppings.items():
        assert np.array_equal(m.hoppings[q], a)


@pytest.mark.parametrize(
    "raw",
    [
        {"kind": "chern", "model": {"name": "chern_stack"}},  # odd d for the top cocycle
        {"kind": "index", "model": {"name": "atomic", "params": {"d": 3}}},  # odd d for Clifford
        {"kind": "identity-check", "d": 3},
        {"kind": "chern", "sizes": [2]},  # minimal-image bound
        {"kind": "chern", "model": {"name": "chern", "params": {"W": 1.0}}},  # disorder without seeds
        {"kind": "oracle", "model": {"name": "chern", "params": {"W": 1.0}}, "seeds": [1]},
        {"kind": "bogus"},
        {"kind": "chern", "colour": "red"},
        {"kind": "chern", "model": {"name": "nope"}},
        {"kind": "chern", "model": {"name": "chern", "params": {"q": 1}}},
        {"kind": "chern", "sizes": "12"},
        {"kind": "index", "shifts": [[0.5, 1.5]]},
        {"kind": "chern", "model": {"d": 2, "Q": 2, "hoppings": [{"q": [1, 0], "im": [[0, 1], [1, 0]]}]}},
        {"sizes": [12]},
    ],
)
def test_malformed_configs(raw):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(raw)


def test_load_yaml_and_json(tmp_path):
    y = tmp_path / "c.yaml"
    y.write_text("kind: chern\nmodel: {name: chern, params: {m: 1.0}}\nsizes: [12]\n")
    j = tmp_path / "c.json"
    j.write_text(json.dumps({"kind": "chern", "model": {"name": "chern", "params": {"m": 1.0}}, "sizes": [12]}))
    assert load_config(y).to_dict() == load_config(j).to_dict()
    assert load_config(y, sizes=[16]).sizes == [16]
    with pytest.raises(ConfigError):
        load_config(y, kind="index")
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml")


def test_defaults():
    cfg = ExperimentConfig.from_dict({"kind": "sigma12"})
    assert cfg.model.name == "chern_stack" and cfg.sizes == [10]


def test_chern_sweep_matches_oracle(tmp_path):
    cfg = ExperimentConfig.from_dict({"kind": "chern", "sizes": [12, 16, 24], "tolerance": 0.01})
    recs = run_experiment(cfg, tmp_path)
    assert len(recs) == 3
    for r in recs:
        assert r.ok
        assert r.values["oracle"] == 1
        assert abs(r.values["chern"] - 1) < 0.01
        assert r.values["within_tolerance"] is True
    data = json.loads((tmp_path / "results.json").read_text())
    assert data["schema_version"] == SCHEMA_VERSION
    rows = list(csv.DictReader((tmp_path / "results.csv").open()))
    assert [int(r["param_L"]) for r in rows] == [12, 16, 24]
    assert all(r["schema_version"] == str(SCHEMA_VERSION) for r in rows)
    assert float(rows[0]["value_chern"]) == recs[0].values["chern"]


def test_identity_check_default_points():
    recs = run_experiment(ExperimentConfig.from_dict({"kind": "identity-check", "cutoff": 80.0}))
    assert len(recs) == 3
    for r in recs:
        assert r.residuals["relative_error"] < 0.02


def test_disordered_sweep_deterministic(tmp_path):
    raw = {"kind": "chern", "model": {"name": "chern", "params": {"W": 1.0}}, "sizes": [10], "seeds": [3, 4]}
    a = run_experiment(ExperimentConfig.from_dict(raw), tmp_path / "a")
    b = run_experiment(ExperimentConfig.from_dict({**raw, "threads": 2}), tmp_path / "b")
    assert strip_times(a) == strip_times(b)
    assert a[0].values["chern"] != a[1].values["chern"]
    assert [r.params["seed"] for r in a] == [3, 4]


def test_errors_are_per_record():
    raw = {"kind": "chern", "model": {"name": "chern", "params": {"m": 2.0}}, "sizes": [8, 9]}
    recs = run_experiment(ExperimentConfig.from_dict(raw))
    assert recs[0].status == "error" and recs[0].error["type"] == "GapClosedError"
    assert recs[1].ok  # odd L misses the gap-closing momentum


def test_index_records(tmp_path):
    raw = {"kind": "index", "sizes": [6], "n_shifts": 2, "kernel": True, "interior_radius": 3}
    recs = run_experiment(ExperimentConfig.from_dict(raw), tmp_path)
    assert len(recs) == 2
    for r in recs:
        assert set(r.params) >= {"R", "interior_radius", "x0", "n", "model", "seed"}
        assert abs(r.values["index"] - 1) < 0.1
        assert r.values["kernel_index"] == 1


def test_decay_tables(tmp_path):
    recs = run_experiment(ExperimentConfig.from_dict({"kind": "decay", "sizes": [6]}), tmp_path)
    assert recs[0].values["slope"] < -1.5
    table = tmp_path / "decay_item000_00.csv"
    rows = list(csv.reader(table.open()))
    assert rows[0] == ["schema_version", "distance", "diag_norm"]
    assert len(rows) == 1 + 13 * 13


def test_convergence_and_oracle_kinds():
    recs = run_experiment(ExperimentConfig.from_dict({"kind": "convergence", "sizes": [6]}))
    assert {r.params["interior_radius"] for r in recs} == {2, 3}
    assert all(abs(r.values["local"] - 1) < 0.01 for r in recs)
    recs = run_experiment(ExperimentConfig.from_dict({"kind": "oracle", "sizes": [24, 48]}))
    assert [r.values["chern"] for r in recs] == [1, 1]


def test_read_results_roundtrip(tmp_path):
    recs = run_experiment(ExperimentConfig.from_dict({"kind": "oracle", "sizes": [16]}), tmp_path)
    back = read_results(tmp_path / "results.json")
    assert [r.to_dict() for r in back] == [r.to_dict() for r in recs]


scalars = st.one_of(
    st.none(), st.booleans(), st.integers(-(2**53), 2**53), st.floats(allow_nan=False), st.text(max_size=8)
)
values = st.recursive(scalars, lambda inner: st.lists(inner, max_size=3) | st.dictionaries(st.text(max_size=5), inner, max_size=3), max_leaves=6)


@given(
    st.text(min_size=1, max_size=10),
    st.dictionaries(st.text(max_size=6), values, max_size=4),
    st.dictionaries(st.text(max_size=6), values, max_size=4),
    st.floats(min_value=0, max_value=1e4),
)
def test_record_json_roundtrip_lossless(exp_id, params, vals, wall):
    rec = ResultRecord(exp_id, "chern", 3, params, vals, {"imag": 1e-17}, wall_time=wall)
    back = ResultRecord.from_dict(json.loads(json.dumps(rec.to_dict())))
    assert back == rec
