import json
from fractions import Fraction

import numpy as np
import pytest

from dpselect import exact_analysis as ea
from dpselect import sim_harness as sh


def test_config_validation():
    with pytest.raises(ValueError):
        sh.SimConfig(0, 10)
    with pytest.raises(ValueError):
        sh.SimConfig(5, 0)
    with pytest.raises(ValueError):
        sh.SimConfig(5, 10, rank_mode=6)
    with pytest.raises(ValueError):
        sh.SimConfig(5, 10, algo="triple")
    with pytest.raises(ValueError):
        sh.SimConfig(5, 10, rank_mode="median")


def test_single_element():
    for algo in sh.ALGOS:
        rep = sh.run_trials(sh.SimConfig(1, 50, algo))
        assert rep.comparisons.mean == 0 and rep.comparisons.count == 50


def test_budget():
    with pytest.raises(sh.ResourceError):
        sh.run_trials(sh.SimConfig(1000, 1000), budget=10**5)


@pytest.mark.parametrize("rank_mode", ["uniform", "min", "max", 3])
def test_small_n_means_match_enumeration(rank_mode):
    n = 6
    mode = "grand" if rank_mode == "uniform" else rank_mode
    exact = float(ea.brute_force_average(n, mode))
    rep = sh.run_trials(sh.SimConfig(n, 40_000, "dual", rank_mode, seed=3))
    assert abs(rep.comparisons.mean - exact) < 4 * rep.comparisons.stderr


def test_dual_mean_at_moderate_n_matches_exact():
    n = 300
    rep = sh.run_trials(sh.SimConfig(n, 20_000, "dual", "uniform", seed=4))
    exact = float(sh.exact_mean(n, "uniform"))
    assert abs(rep.comparisons.mean - exact) < 4 * rep.comparisons.stderr
    rep = sh.run_trials(sh.SimConfig(n, 20_000, "dual", "min", seed=5))
    exact = float(sh.exact_mean(n, "min"))
    assert abs(rep.comparisons.mean - exact) < 4 * rep.comparisons.stderr


def test_exact_mean_small_and_bad_mode():
    assert sh.exact_mean(2, "uniform") == 1
    assert sh.exact_mean(3, "min") == Fraction(10, 3)
    assert sh.exact_mean(1, "min") == 0
    with pytest.raises(ValueError):
        sh.exact_mean(10, "max")


def test_trial_independence_from_batching():
    cfg = sh.SimConfig(200, 300, "dual", "uniform", seed=9)
    whole = sh.run_trials(cfg, keep_samples=True)
    a = sh.run_trials(sh.SimConfig(200, 120, "dual", "uniform", seed=9), keep_samples=True)
    b = sh.run_trials(sh.SimConfig(200, 180, "dual", "uniform", seed=9, trial_offset=120),
                      keep_samples=True)
    assert np.array_equal(np.concatenate([a.comparison_samples, b.comparison_samples]),
                          whole.comparison_samples)


def test_workers_do_not_change_results():
    one = sh.run_trials(sh.SimConfig(300, 200, "classic", "uniform", seed=10, workers=1))
    two = sh.run_trials(sh.SimConfig(300, 200, "classic", "uniform", seed=10, workers=2))
    assert one.comparisons == two.comparisons and one.swaps == two.swaps
    assert one.rows() == two.rows()


def test_merge_reports():
    a = sh.run_trials(sh.SimConfig(100, 500, seed=1), keep_samples=True)
    b = sh.run_trials(sh.SimConfig(100, 700, seed=1, trial_offset=500), keep_samples=True)
    whole = sh.run_trials(sh.SimConfig(100, 1200, seed=1))
    ab, ba = sh.merge_reports(a, b), sh.merge_reports(b, a)
    assert ab.comparisons.count == a.comparisons.count + b.comparisons.count == 1200
    for m in (ab, ba):
        assert m.comparisons.mean == pytest.approx(whole.comparisons.mean, rel=1e-9)
        assert m.comparisons.m2 == pytest.approx(whole.comparisons.m2, rel=1e-9)
        assert m.swaps.mean == pytest.approx(whole.swaps.mean, rel=1e-9)
    assert ab.comparisons.mean == pytest.approx(ba.comparisons.mean, rel=1e-9)
    assert np.array_equal(ab.comparison_samples, ba.comparison_samples)
    assert ab.trial_ranges == ((0, 500), (500, 1200))


def test_merge_rejects_mismatch_and_empty():
    a = sh.run_trials(sh.SimConfig(100, 50, seed=1))
    with pytest.raises(sh.ConfigMismatch):
        sh.merge_reports(a, sh.run_trials(sh.SimConfig(100, 50, seed=2, trial_offset=50)))
    with pytest.raises(sh.ConfigMismatch):
        sh.merge_reports(a, sh.run_trials(sh.SimConfig(100, 50, seed=1)))  # overlapping
    with pytest.raises(sh.ConfigMismatch):
        sh.merge_reports(a, None)


def test_report_serialisation():
    rep = sh.run_trials(sh.SimConfig(50, 100, "dual", "max", seed=2))
    doc = json.loads(rep.to_json())
    assert doc["config"]["rank_mode"] == "max"
    fields = {"metric", "n", "trials", "mean", "variance", "stderr", "paper_ref"}
    assert all(fields <= set(r) for r in doc["results"])
    lines = rep.to_csv().splitlines()
    assert lines[0].startswith("metric,algo,rank_mode,n,trials,mean,variance,stderr")
    assert len(lines) == 3
    assert rep.to_json() == sh.run_trials(sh.SimConfig(50, 100, "dual", "max", seed=2)).to_json()


def test_table1_small_scale_structure():
    rep = sh.table1(n_small=200, n_large=2000, trials_small=2000, trials_large=2000, seed=5)
    assert len(rep.rows) == 13
    assert {r.measure for r in rep.rows} == {"comparisons", "swaps"}
    assert all(r.convention_sensitive == (r.measure == "swaps") for r in rep.rows)
    refs = sorted(round(r.reference, 6) for r in rep.rows)
    assert refs == sorted(round(v, 6) for v in
                          (19 / 6, 3, 5 / 6, 1, 2.375, 2, 0.512551, 0.598087, 0.707107,
                           1, 0.5, 0.75, 1 / 3))
    doc = json.loads(rep.to_json())
    assert len(doc["rows"]) == 13 and "passed" in doc
    assert rep.to_csv().splitlines()[0].startswith("measure,statistic,regime,algo,estimate")
    assert "comparisons" in rep.format()
