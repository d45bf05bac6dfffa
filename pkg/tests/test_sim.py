import json
from dataclasses import replace

import pytest

from fdhomog.curves import ModelSpec
from fdhomog.sim import (
    CSV_HEADER,
    ExperimentSpec,
    SpecError,
    TestConfig,
    builtin_model,
    delta_sweep,
    load_experiment_file,
    m_sweep,
    parse_experiment,
    run_experiment,
    standard_tests,
)

FAST = dict(n_per_sample=10, grid_size=8, master_seed=5)
TESTS = tuple(standard_tests(["DD-FM", "DD-FD2", "Flores"], num_boot=50))


def test_builtin_models():
    assert builtin_model(0) == ModelSpec("peak32", 0.0, 0.3, 3.33)
    assert builtin_model(1) == ModelSpec("peak32", 1.0, 0.3, 3.33)
    assert builtin_model(2) == ModelSpec("peak32", 0.5, 0.3, 3.33)
    assert builtin_model(3) == ModelSpec("peak12", 0.0, 0.3, 3.33)
    assert builtin_model(4) == ModelSpec("peak12", 0.0, 0.5, 5.0)
    assert builtin_model(5) == ModelSpec("peak32", 0.0, 0.5, 5.0)
    for bad in (6, -1, "x", None):
        with pytest.raises(ValueError):
            builtin_model(bad)


def test_single_replication():
    spec = ExperimentSpec(builtin_model(0), builtin_model(1), TESTS, replications=1, **FAST)
    table = run_experiment(spec, n_jobs=1)
    assert len(table) == 3
    for row in table:
        assert row.rate in (0.0, 1.0) and row.replications == row.attempted == 1
        assert 0 <= row.rejections <= row.replications
        assert not row.homogeneous


def test_deterministic_and_thread_independent():
    spec = ExperimentSpec(builtin_model(0), builtin_model(2), TESTS, replications=4, **FAST)
    serial = run_experiment(spec, n_jobs=1)
    again = run_experiment(spec, n_jobs=1)
    threaded = run_experiment(spec, n_jobs=3)
    assert serial.to_csv() == again.to_csv() == threaded.to_csv()
    assert serial.to_json() == threaded.to_json()


def test_seed_changes_outcome():
    a = ExperimentSpec(builtin_model(0), builtin_model(0), TESTS[:1], replications=6, **FAST)
    b = replace(a, master_seed=6)
    assert run_experiment(a, 1).rows[0].mean_p_adjusted != run_experiment(b, 1).rows[0].mean_p_adjusted


def test_cache_reuse():
    cache = {}
    spec = ExperimentSpec(builtin_model(0), builtin_model(0), TESTS, replications=2, **FAST)
    first = run_experiment(spec, 1, cache)
    assert len(cache) == 6
    # a spec with the same models under another label hits the cache
    second = run_experiment(replace(spec, pair="again"), 1, cache)
    assert len(cache) == 6
    assert [(r.rejections, r.mean_p_adjusted) for r in first] == [(r.rejections, r.mean_p_adjusted) for r in second]


def test_m_one_reproduces_model_zero():
    spec = ExperimentSpec(builtin_model(0), builtin_model(0), TESTS, replications=3, **FAST)
    direct = run_experiment(spec, 1)
    sweep = m_sweep(0.3, [1.0, 2.0], tests=TESTS, replications=3, n_jobs=1, **FAST)
    m1 = [r for r in sweep if r.pair == "m=1"]
    assert [(r.test, r.rejections, r.mean_p_adjusted) for r in m1] == \
        [(r.test, r.rejections, r.mean_p_adjusted) for r in direct]
    assert all(r.homogeneous for r in m1)
    assert not any(r.homogeneous for r in sweep if r.pair == "m=2")


def test_delta_sweep_labels():
    table = delta_sweep(builtin_model(3), [0, 0.5], tests=TESTS[:1], replications=2, n_jobs=1, **FAST)
    assert [r.pair for r in table] == ["delta=0", "delta=0.5"]
    assert table.row("delta=0", "DD-FM").homogeneous


def test_sweep_validation():
    with pytest.raises(ValueError):
        delta_sweep(builtin_model(0), [])
    with pytest.raises(ValueError):
        m_sweep(0.3, [1.0, 0.0])


def test_failed_replications_are_recorded(monkeypatch):
    import fdhomog.sim as sim

    calls = {"n": 0}
    real = sim.simulate_sample

    def flaky(*args, **kwargs):
        calls["n"] += 1
        if calls["n"] == 1:
            raise RuntimeError("boom")
        return real(*args, **kwargs)

    monkeypatch.setattr(sim, "simulate_sample", flaky)
    spec = ExperimentSpec(builtin_model(0), builtin_model(1), TESTS[:1], replications=3, **FAST)
    row = run_experiment(spec, 1).rows[0]
    assert row.attempted == 3 and row.replications == 2


def test_table_outputs():
    spec = ExperimentSpec(builtin_model(0), builtin_model(0), TESTS, replications=2, pair="0v0", **FAST)
    table = run_experiment(spec, 1)
    lines = table.to_csv().splitlines()
    assert lines[0].split(",") == CSV_HEADER and len(lines) == 4
    rows = json.loads(table.to_json())["rows"]
    assert {r["test"] for r in rows} == {"DD-FM", "DD-FD2", "Flores"}
    summary = table.summary()
    assert set(summary["DD-FM"]) == {"average_size", "maximum_size"}


def test_spec_validation_names_field():
    m = builtin_model(0)
    for kwargs, field in [({"replications": 0}, "replications"), ({"n_per_sample": 1}, "n_per_sample"),
                          ({"grid_size": 1}, "grid_size"), ({"master_seed": -3}, "master_seed"),
                          ({"tests": ()}, "tests")]:
        with pytest.raises(SpecError, match=field):
            ExperimentSpec(m, m, **{"tests": TESTS, **kwargs})
    with pytest.raises(SpecError, match="num_boot"):
        TestConfig("x", num_boot=10)
    with pytest.raises(SpecError, match="kind"):
        TestConfig("x", kind="other")
    with pytest.raises(SpecError, match="method"):
        TestConfig("x", method="tukey")


def test_parse_experiment():
    specs = parse_experiment({"pairs": [[0, 1], [3, {"mean": "peak12", "delta": 0, "amp": 0.5, "rate": 5}]],
                              "tests": ["DD-FM", {"name": "mine", "method": "rp", "num_boot": 60}],
                              "num_boot": 80, "replications": 7})
    assert [s.pair for s in specs] == ["0v1", "3vpeak12/d0/k0.5/c5"]
    assert specs[1].model_b == builtin_model(4)
    assert specs[0].replications == 7
    assert [t.num_boot for t in specs[0].tests] == [80, 60]
    single = parse_experiment({"model_a": 0, "model_b": 0})
    assert len(single) == 1 and len(single[0].tests) == 4


@pytest.mark.parametrize("obj, field", [
    ({"pairs": [[0, 1]], "replications": 0}, "replications"),
    ({"pairs": [[0, 9]]}, r"pairs\[0\]\[1\]"),
    ({"pairs": [[0]]}, r"pairs\[0\]"),
    ({"pairs": []}, "pairs"),
    ({"model_a": 0}, "model_a"),
    ({"pairs": [[0, 1]], "tests": ["DD-XX"]}, r"tests\[0\]"),
    ({"pairs": [[0, 1]], "tests": [{"name": "a", "bogus": 1}]}, r"tests\[0\]"),
    ({"pairs": [[0, 1]], "grid_size": "30"}, "grid_size"),
    ({"pairs": [[0, 1]], "colour": 1}, "colour"),
    ({"pairs": [[0, {"mean": "peak32", "amp": -1}]]}, r"pairs\[0\]\[1\]"),
])
def test_parse_errors(obj, field):
    with pytest.raises(SpecError, match=field):
        parse_experiment(obj)


def test_load_experiment_file(tmp_path):
    p = tmp_path / "spec.json"
    p.write_text('{"pairs": [[0, 0]], "replications": 2}')
    assert load_experiment_file(p)[0].replications == 2
    p.write_text("{not json")
    with pytest.raises(SpecError):
        load_experiment_file(p)
