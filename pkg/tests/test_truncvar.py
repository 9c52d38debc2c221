import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tvlab.errors import DomainError, ShapeError, SizeError
from tvlab.paths import SampledPath
from tvlab.skorokhod import solve
from tvlab.truncvar import (
    oracle_suite,
    ttv_oracle,
    ttv_stream,
    variational_residual,
)

EXAMPLE = [0, 1, 0.5, 1.5]

seq_st = st.lists(st.floats(-1, 1, allow_nan=False), min_size=2, max_size=10)
c_st = st.floats(0, 2.5)


def test_stream_examples():
    r = ttv_stream(EXAMPLE, 0.4)
    assert (r.ttv, r.utv, r.dtv) == pytest.approx((1.3, 1.2, 0.1), abs=1e-15)
    assert ttv_stream(EXAMPLE, 0).ttv == 2.5
    assert ttv_stream(EXAMPLE, 2).ttv == 0.0
    assert r.as_dict()["c"] == 0.4
    with pytest.raises(DomainError):
        ttv_stream(EXAMPLE, -0.1)


def test_oracle_examples():
    assert ttv_oracle(EXAMPLE, 0.4) == pytest.approx(1.3)
    assert ttv_oracle(EXAMPLE, 0.4, "utv") == pytest.approx(1.2)
    assert ttv_oracle(EXAMPLE, 0.4, "dtv") == pytest.approx(0.1)
    assert ttv_oracle([0, 0.5, 1.2], 0.3, "utv") == pytest.approx(0.9)
    assert ttv_oracle(EXAMPLE, 1.6) == 0.0
    with pytest.raises(SizeError):
        ttv_oracle(np.zeros(17), 0.1)
    with pytest.raises(DomainError):
        ttv_oracle(EXAMPLE, 0.1, "xtv")


def test_variational_residual_examples():
    path = SampledPath.from_values(EXAMPLE)
    sol = solve(path, 0.4)
    sup_dev, tv = variational_residual(path, sol.g, 0.4)
    assert sup_dev == pytest.approx(0.2) and tv == pytest.approx(1.3)
    assert variational_residual(path, path, 0.4) == (0.0, 2.5)
    assert variational_residual([0, 0.1], [0, 0], 0.4) == (0.1, 0.0)
    with pytest.raises(ShapeError):
        variational_residual(path, [0, 1], 0.4)
    with pytest.raises(ShapeError):
        variational_residual(path, SampledPath([0, 1, 2, 4], EXAMPLE), 0.4)


def test_running_ttv():
    r = ttv_stream(EXAMPLE, 0.4)
    assert r.running_ttv[0] == 0.0
    assert r.running_ttv[-1] == r.ttv
    assert np.all(np.diff(r.running_ttv) >= 0)


@given(seq_st, c_st)
@settings(max_examples=400, deadline=None)
def test_stream_matches_oracle(vals, c):
    r = ttv_stream(vals, c)
    for mode in ("ttv", "utv", "dtv"):
        assert abs(getattr(r, mode) - ttv_oracle(vals, c, mode)) <= 1e-12
    assert abs(r.ttv - (r.utv + r.dtv)) <= 1e-12


@given(seq_st, c_st, c_st)
@settings(max_examples=300, deadline=None)
def test_monotone_in_c_and_tv_bounds(vals, c1, c2):
    lo, hi = sorted((c1, c2))
    assert ttv_stream(vals, lo).ttv >= ttv_stream(vals, hi).ttv - 1e-12
    tv = ttv_stream(vals, 0).ttv
    t = ttv_stream(vals, hi).ttv
    assert t <= tv + 1e-12
    assert t >= tv - (len(vals) - 1) * hi - 1e-12


@given(seq_st, c_st)
@settings(max_examples=300, deadline=None)
def test_mirror_symmetry(vals, c):
    neg = [-v for v in vals]
    assert ttv_stream(vals, c).utv == ttv_stream(neg, c).dtv


@given(seq_st, st.floats(0.01, 2), st.data())
@settings(max_examples=200, deadline=None)
def test_competitors_never_beat_minimiser(vals, c, data):
    ttv = ttv_stream(vals, c).ttv
    shifts = data.draw(st.lists(st.floats(-c / 2, c / 2), min_size=len(vals), max_size=len(vals)))
    g = np.asarray(vals) + np.asarray(shifts)
    assert variational_residual(vals, g, c)[1] >= ttv - 1e-12


@given(seq_st, c_st, st.floats(0.1, 10))
@settings(max_examples=200, deadline=None)
def test_jump_sequence_equals_interpolation(vals, c, step):
    # the sampling times of a sequence do not change its truncated variation
    times = np.arange(len(vals)) * step
    assert ttv_stream(SampledPath(times, vals), c).ttv == ttv_stream(vals, c).ttv


def test_oracle_suite_small():
    t0 = time.perf_counter()
    rep = oracle_suite(paths=100, seed=4)
    assert rep.passed
    assert time.perf_counter() - t0 < 10
    assert rep.get("worst_oracle") <= 1e-12
