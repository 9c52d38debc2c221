import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import ks_2samp

from tvlab.errors import DomainError, TvlabError
from tvlab.harness import (
    EnsembleError,
    EnsembleJob,
    MonteCarloReport,
    ks_two_sample,
    run_ensemble,
    summarize,
)
from tvlab.paths import SimConfig, generate_bm, path_rng


def endpoint(cfg):
    return float(generate_bm(cfg).values[-1])


def test_single_path_job():
    job = EnsembleJob("one", SimConfig(1.0, 0.1, seed=2), 1, endpoint)
    out = run_ensemble(job)
    assert len(out) == 1 and job.outputs == out
    with pytest.raises(DomainError):
        run_ensemble(EnsembleJob("none", SimConfig(1.0, 0.1), 0, endpoint))


def test_thread_count_does_not_change_outputs():
    job = EnsembleJob("b1", SimConfig(1.0, 1e-2, seed=5), 300, endpoint)
    serial = run_ensemble(job, threads=1)
    parallel = run_ensemble(job, threads=8)
    assert serial == parallel


def test_b1_oracle():
    m = 10_000
    out = np.array(run_ensemble(EnsembleJob("b1", SimConfig(1.0, 0.05, seed=1), m, endpoint)))
    assert abs(out.mean()) < 3 / math.sqrt(m)
    assert out.var(ddof=1) == pytest.approx(1.0, rel=0.05)


def test_reducer_failure_reports_index():
    def reducer(cfg):
        if cfg.index == 3:
            raise RuntimeError("boom")
        return 0

    with pytest.raises(EnsembleError) as info:
        run_ensemble(EnsembleJob("fail", SimConfig(1.0, 0.5), 5, reducer))
    assert info.value.index == 3
    assert "path 3" in str(info.value)
    assert isinstance(info.value, TvlabError)


def test_summarize_examples():
    s = summarize([1, 1, 1, 1])
    assert (s.n, s.mean, s.se) == (4, 1.0, 0.0)
    s = summarize([0, 2])
    assert (s.mean, s.se) == (1.0, pytest.approx(1.0))
    assert (s.ci_low, s.ci_high) == pytest.approx((1 - 1.96, 1 + 1.96))
    with pytest.raises(DomainError):
        summarize([])
    with pytest.raises(DomainError):
        summarize([1.0])


def test_ks_examples():
    assert ks_two_sample([1, 2, 3], [1, 2, 3]) == (0.0, 1.0)
    assert ks_two_sample([0.1, 0.5], [2.2, 2.9])[0] == 1.0
    assert ks_two_sample([1, 2, 3], [1.5, 2.5])[0] == pytest.approx(1 / 3)
    with pytest.raises(DomainError):
        ks_two_sample([], [1.0])


@pytest.mark.filterwarnings("ignore::RuntimeWarning")  # scipy's p-value at D = 0
@given(
    st.lists(st.integers(-20, 20), min_size=1, max_size=60),
    st.lists(st.integers(-20, 20), min_size=1, max_size=60),
)
@settings(max_examples=300, deadline=None)
def test_ks_statistic_matches_scipy(a, b):
    d, _ = ks_two_sample(a, b)
    assert d == pytest.approx(ks_2samp(a, b, method="asymp").statistic, abs=1e-12)


def test_ks_pvalue_matches_scipy_asymptotic():
    rng = path_rng(3, 0)
    a, b = rng.normal(size=1500), rng.normal(0.05, 1, size=1200)
    d, p = ks_two_sample(a, b)
    ref = ks_2samp(a, b, method="asymp")
    assert d == pytest.approx(ref.statistic)
    assert p == pytest.approx(ref.pvalue, rel=0.05)


def test_ks_self_test_rejection_rate():
    rejections = 0
    for rep in range(200):
        a = path_rng(11, rep, stream=0).standard_normal(2000)
        b = path_rng(11, rep, stream=1).standard_normal(2000)
        rejections += ks_two_sample(a, b)[1] < 0.01
    assert 0 <= rejections / 200 <= 0.04


def test_report_schema_and_json():
    rep = MonteCarloReport("demo", {"seed": 1})
    rep.estimate("phi", np.float64(0.5), 0.01)
    rep.statistic("count", np.int64(3))
    rep.statistic("flag", np.bool_(True))
    rep.passed = True
    rep.thresholds = {"level": 0.01}
    d = json.loads(rep.to_json())
    assert set(d) == {"experiment", "config", "estimates", "statistics", "verdict"}
    assert d["estimates"] == [{"name": "phi", "value": 0.5, "se": 0.01}]
    assert d["statistics"][0] == {"name": "count", "value": 3}
    assert d["verdict"] == {"pass": True, "thresholds": {"level": 0.01}}
    assert rep.get("flag") is True
    with pytest.raises(KeyError):
        rep.get("missing")
