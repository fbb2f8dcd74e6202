import csv
import json

import numpy as np
import pytest

from simmf.errors import ExperimentError, SchemaError
from simmf.evaluation import EvalReport, TrialResult, split, SplitSpec
from simmf.experiment import (DUAL_VARIANTS, VARIANTS, ExperimentConfig, Runner, SimilarityProvider,
                              load_recipe, recipe_names, report_summary, resolve_weights, run_experiment,
                              with_aggregates)
from simmf.synthetic import movielens_like, with_friends

PATHS = {"user": ["UGU", "UAU", "UOU", "UMU", "UMTMU"], "item": ["MTM", "MUM"]}


@pytest.fixture(scope="module")
def small():
    return movielens_like(60, 40, 700, seed=5)


def config(out, methods, **kw):
    raw = dict(dataset="-", name="t", ratios=[0.8, 0.4], trials=2, out=str(out), paths=PATHS,
               train={"d": 4, "max_iters": 30}, methods=methods)
    raw.update(kw)
    return ExperimentConfig.from_dict(raw)


def read(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# -- config ---------------------------------------------------------------------


def test_bundled_recipes_parse():
    names = recipe_names()
    assert {"movielens-benchmark", "movielens-regularization-grid", "movielens-alpha-beta-sweep",
            "movielens-path-study"} <= set(names)
    bench = load_recipe("movielens-benchmark")
    assert bench.train.d == 10 and bench.train.lambda1 == 0.001 and bench.train.lambda2 == 0.001
    assert bench.paths_user == PATHS["user"] and bench.paths_item == PATHS["item"]
    assert bench.ratios == [0.8, 0.6, 0.4, 0.2] and bench.trials == 10
    assert bench.weights_user == "equal" and bench.weights_item == "equal"
    assert {m.name for m in bench.methods} >= {"UserMean", "ItemMean", "PMF"}


def test_grid_recipe_has_eight_variants():
    grid = load_recipe("movielens-regularization-grid")
    variants = {m.name for m in grid.methods if m.kind == "simmf"}
    assert variants == {f"SimMF-{v}" for v in VARIANTS}
    assert len(variants) == 8
    for m in grid.methods:
        if m.kind == "simmf":
            assert (m.user_mode == "none") == (m.alpha == 0) and (m.item_mode == "none") == (m.beta == 0)


def test_sweep_recipe_grid():
    sweep = load_recipe("movielens-alpha-beta-sweep")
    pts = {(m.alpha, m.beta) for m in sweep.methods if m.kind == "simmf"}
    vals = [0.01, 0.1, 1, 10, 100, 1000]
    assert pts == {(a, b) for a in vals for b in vals}
    assert all(m.user_mode == "average" and m.item_mode == "individual" for m in sweep.methods if m.kind == "simmf")


def test_config_errors(tmp_path):
    with pytest.raises(ValueError, match="non-empty"):
        config(tmp_path, [], sweep={"variant": "U(a)I(i)", "alpha": [], "beta": [1]})
    with pytest.raises(ValueError, match="no methods"):
        config(tmp_path, [])
    with pytest.raises(ValueError, match="duplicate"):
        config(tmp_path, [{"name": "PMF", "kind": "pmf"}, {"name": "PMF", "kind": "pmf"}])
    with pytest.raises(ValueError):
        config(tmp_path, [{"name": "x", "kind": "svd"}])
    with pytest.raises(ValueError):
        config(tmp_path, [{"variant": "U(x)"}])
    with pytest.raises(ValueError):
        config(tmp_path, [{"name": "PMF", "kind": "pmf"}], ratios=[])


def test_paths_validated_before_training(tmp_path, small):
    cfg = config(tmp_path, [{"variant": "U(a)", "alpha": 1}], paths={"user": ["UXU"], "item": []})
    with pytest.raises(SchemaError):
        Runner(cfg, small)
    cfg = config(tmp_path, [{"variant": "U(a)", "alpha": 1}], paths={"user": ["MTM"], "item": []})
    with pytest.raises(SchemaError, match="does not start"):
        Runner(cfg, small)
    cfg = config(tmp_path, [{"variant": "I(a)", "beta": 1}], paths={"user": ["UGU"], "item": []})
    with pytest.raises(SchemaError, match="no item paths"):
        Runner(cfg, small)


def test_method_params_override_train(tmp_path, small):
    cfg = config(tmp_path, [{"name": "PMF", "kind": "pmf", "d": 2, "eta": 0.01}])
    r = Runner(cfg, small)
    tc = r._train_cfg(0, cfg.methods[0])
    assert tc.d == 2 and tc.eta == 0.01 and tc.max_iters == 30


def test_resolve_weights():
    assert resolve_weights("equal", 4) == [0.25] * 4
    w = resolve_weights("random", 3, seed=1)
    assert abs(sum(w) - 1) < 1e-12 and w == resolve_weights("random", 3, seed=1)
    assert resolve_weights([0.3, 0.7], 2) == [0.3, 0.7]
    with pytest.raises(ValueError):
        resolve_weights([0.3, 0.7], 3)
    with pytest.raises(ValueError):
        resolve_weights("heuristic", 2)
    with pytest.raises(ValueError):
        resolve_weights("magic", 2)


# -- running ---------------------------------------------------------------------------


def test_run_outputs_and_row_counts(tmp_path, small):
    methods = [{"name": "UserMean", "kind": "usermean"}, {"name": "PMF", "kind": "pmf"},
               {"variant": "U(a)I(i)", "alpha": 10, "beta": 0.1}, {"variant": "I(a)", "beta": 10}]
    cfg = config(tmp_path / "out", methods)
    report = run_experiment(cfg, small)
    out = tmp_path / "out"
    trials = read(out / "trials.csv")
    assert len(trials) == 4 * 2 * 2
    assert len({(r["method"], r["ratio"], r["trial"]) for r in trials}) == len(trials)
    summary = read(out / "summary.csv")
    assert len(summary) == 4 * 2
    assert all(float(r["mae"]) >= 0 and float(r["rmse"]) >= float(r["mae"]) for r in trials)
    traces = sorted(p.name for p in (out / "traces").iterdir())
    assert len(traces) == 3 * 2 * 2
    assert "trace_PMF_0.8_0.csv" in traces
    assert json.loads((out / "status.json").read_text())["complete"] is True
    assert (out / "long.csv").exists() and (out / "timing.csv").exists()
    assert (out / "config.resolved.yaml").exists()
    assert report.complete


def test_pmf_only_summary_has_one_row_per_ratio(tmp_path, small):
    cfg = config(tmp_path, [{"name": "PMF", "kind": "pmf"}], ratios=[0.8, 0.6, 0.4, 0.2])
    run_experiment(cfg, small)
    assert [r["ratio"] for r in read(tmp_path / "summary.csv")] == ["0.8", "0.6", "0.4", "0.2"]


def test_failure_preserves_partial_results(tmp_path, small):
    cfg = config(tmp_path, [{"name": "PMF", "kind": "pmf"}, {"name": "SoMF", "kind": "somf", "alpha": 1}])
    with pytest.raises(ExperimentError) as info:
        run_experiment(cfg, small)
    assert info.value.method == "SoMF" and info.value.ratio == 0.8 and info.value.trial == 0
    status = json.loads((tmp_path / "status.json").read_text())
    assert status["complete"] is False and "SoMF" in status["error"]
    assert len(read(tmp_path / "trials.csv")) == 1


def test_somf_runs_with_social_relation(tmp_path):
    ds = with_friends(movielens_like(60, 40, 700, seed=5))
    cfg = config(tmp_path, [{"name": "PMF", "kind": "pmf"}, {"name": "SoMF", "kind": "somf", "alpha": 5}],
                 ratios=[0.8], trials=1)
    rep = run_experiment(cfg, ds)
    assert set(rep.methods) == {"PMF", "SoMF"}


def test_deterministic_summary(tmp_path, small):
    methods = [{"name": "PMF", "kind": "pmf"}, {"variant": "U(a)I(a)", "alpha": 10, "beta": 10}]
    run_experiment(config(tmp_path / "a", methods, deterministic=True), small)
    run_experiment(config(tmp_path / "b", methods, deterministic=True), small)
    assert (tmp_path / "a" / "summary.csv").read_bytes() == (tmp_path / "b" / "summary.csv").read_bytes()
    assert (tmp_path / "a" / "trials.csv").read_bytes() == (tmp_path / "b" / "trials.csv").read_bytes()


def test_heuristic_weights_logged(tmp_path, small):
    methods = [{"name": "PMF", "kind": "pmf"},
               {"name": "I(i)-heuristic", "variant": "I(i)", "beta": 0.1, "weights_item": "heuristic"}]
    run_experiment(config(tmp_path, methods, ratios=[0.8], trials=1), small)
    log = json.loads((tmp_path / "heuristic_weights.json").read_text())
    assert log[0]["paths"] == ["MTM", "MUM"] and abs(sum(log[0]["weights"]) - 1) < 1e-12


def test_similarities_use_training_split_only(small):
    cfg = config("unused", [{"name": "PMF", "kind": "pmf"}])
    tr, _ = split(small.ratings, SplitSpec(0.5, 1, 0), 0)
    prov = SimilarityProvider(cfg, small, tr, None)
    np.testing.assert_array_equal(prov.store.get("U", "M").toarray(), tr.binary().toarray())
    full = SimilarityProvider(cfg, small, small.ratings, None)
    assert prov.checksum != full.checksum
    a = prov.similarity("UMU").toarray()
    b = full.similarity("UMU").toarray()
    assert not np.array_equal(a, b)


def test_cache_dir_is_filled(tmp_path, small, monkeypatch):
    monkeypatch.setenv("SIMMF_CACHE_DIR", str(tmp_path / "cache"))
    cfg = config(tmp_path / "o", [{"variant": "U(a)", "alpha": 10}], ratios=[0.8], trials=1)
    run_experiment(cfg, small)
    assert len(list((tmp_path / "cache").glob("*.npz"))) == 5


# -- aggregation and summaries ----------------------------------------------------------


def fake_report():
    rep = EvalReport()
    for t in range(3):
        # trial means: PMF 0.7902, A 0.7289
        rep.add(TrialResult("PMF", 0.8, t, 0.7892 + 0.001 * t, 1.0111))
        rep.add(TrialResult("A", 0.8, t, 0.7279 + 0.001 * t, 0.95))
        rep.add(TrialResult("B", 0.8, t, 0.80 + 0.002 * t, 1.02))
    return rep


def test_report_summary_improvements():
    table = report_summary(fake_report(), "PMF")
    rows = {r.method: r for r in table.rows}
    assert rows["PMF"].mae_improve == 0.0
    assert round(rows["A"].mae_improve, 2) == 7.76
    assert rows["B"].mae_improve < 0
    text = table.to_text()
    assert "+7.76%" in text and "+0.00%" in text
    b_line = [ln for ln in text.splitlines() if " B " in ln][0]
    assert "-1." in b_line
    with pytest.raises(KeyError):
        report_summary(fake_report(), "SVD")


def test_with_aggregates():
    rep = with_aggregates(fake_report(), {"G": ["A", "B"]})
    s = {r.method: r for r in rep.summary("PMF")}
    assert s["G-min"].mae == pytest.approx(s["A"].mae)
    assert s["G-max"].mae == pytest.approx(s["B"].mae)
    assert s["G-mean"].mae == pytest.approx((s["A"].mae + s["B"].mae) / 2)


def test_dual_variants_listed():
    assert set(DUAL_VARIANTS) == {v for v, (u, i) in VARIANTS.items() if u != "none" and i != "none"}
