import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tvlab.errors import ConfigurationError, DomainError
from tvlab.paths import (
    SampledPath,
    SimConfig,
    first_drawdown_time,
    first_drawup_time,
    first_passage,
    generate_bm,
    read_path_csv,
    running_extrema,
    write_path_csv,
)

EXAMPLE = SampledPath.from_values([0, 1, 0.5, 1.5])

values_st = st.lists(
    st.floats(-10, 10, allow_nan=False, allow_infinity=False), min_size=2, max_size=40
)


def test_sampled_path_validation():
    with pytest.raises(DomainError):
        SampledPath([0, 1, 1], [0, 0, 0])
    with pytest.raises(DomainError):
        SampledPath([0, 1], [0])
    with pytest.raises(DomainError):
        SampledPath([0, 1], [0, np.nan])
    with pytest.raises(DomainError):
        SampledPath([], [])
    p = SampledPath.from_values([3, 4])
    assert p.times.tolist() == [0.0, 1.0]
    with pytest.raises(ValueError):
        p.values[0] = 1.0  # read-only


def test_sim_config_errors():
    with pytest.raises(ConfigurationError):
        SimConfig(0.0, 0.1)
    with pytest.raises(ConfigurationError):
        SimConfig(1.0, -1e-3)
    with pytest.raises(ConfigurationError):
        SimConfig(1.0, 2.0)
    with pytest.raises(ConfigurationError):
        SimConfig(1.0, 0.1, seed=-1)
    assert SimConfig(1.0, 1e-4).n_steps == 10000
    assert SimConfig(0.3, 0.1).n_steps == 3


def test_drawup_examples():
    up = first_drawup_time(EXAMPLE, 0.4)
    assert up.time == pytest.approx(0.4, abs=1e-15)
    assert up.level == pytest.approx(0.4, abs=1e-15)
    assert up.kind == "drawup"
    assert first_drawup_time(SampledPath.from_values([3, 2, 1, 0]), 0.1) is None
    assert first_drawup_time(SampledPath.from_values([0, 0.3]), 0.4) is None
    with pytest.raises(DomainError):
        first_drawup_time(EXAMPLE, 0.0)


def test_drawdown_examples():
    down = first_drawdown_time(EXAMPLE, 0.4)
    assert down.time == pytest.approx(1.8, abs=1e-12)
    assert down.level == pytest.approx(0.6, abs=1e-12)
    d2 = first_drawdown_time(SampledPath.from_values([0, -1]), 0.4)
    assert (d2.time, d2.level) == pytest.approx((0.4, -0.4))
    with pytest.raises(DomainError):
        first_drawdown_time(EXAMPLE, -1.0)


def test_first_passage_examples():
    assert first_passage(SampledPath.from_values([0, 1]), 0.25).time == pytest.approx(0.25)
    assert first_passage(SampledPath([2.0, 3.0], [0.7, 1.0]), 0.7).time == 2.0
    assert first_passage(SampledPath.from_values([0, -1, 2]), 1.5).time == pytest.approx(
        1 + 2.5 / 3
    )
    assert first_passage(SampledPath.from_values([0, 1]), 2.0) is None


@given(values_st, st.floats(0.01, 5))
@settings(max_examples=300, deadline=None)
def test_drawup_hits_exactly_c(vals, c):
    path = SampledPath.from_values(vals)
    up = first_drawup_time(path, c)
    if up is None:
        v = np.asarray(vals)
        assert np.max(v - np.minimum.accumulate(v)) < c
        return
    before = path.prefix(up.time)
    run_min = float(before.values.min())
    assert path.value_at(up.time) - run_min == pytest.approx(c, abs=1e-12 * max(1, abs(run_min)))


@given(values_st, st.floats(0.01, 5))
@settings(max_examples=300, deadline=None)
def test_mirror_and_distinct_triggers(vals, c):
    path = SampledPath.from_values(vals)
    down = first_drawdown_time(path, c)
    mirror = first_drawup_time(-path, c)
    assert (down is None) == (mirror is None)
    if down is not None:
        assert down.time == mirror.time
        assert down.level == -mirror.level
        up = first_drawup_time(path, c)
        if up is not None:
            assert up.time != down.time


def test_running_extrema():
    lo, hi = running_extrema(EXAMPLE)
    assert lo.tolist() == [0, 0, 0, 0]
    assert hi.tolist() == [0, 1, 1, 1.5]


def test_generate_bm_is_keyed_and_prefix_stable():
    a = generate_bm(SimConfig(1.0, 1e-3, seed=3, index=5))
    b = generate_bm(SimConfig(1.0, 1e-3, seed=3, index=5))
    c = generate_bm(SimConfig(1.0, 1e-3, seed=3, index=6))
    longer = generate_bm(SimConfig(2.0, 1e-3, seed=3, index=5))
    assert a.values[0] == 0.0 and a.times[0] == 0.0
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)
    assert np.array_equal(longer.values[: len(a)], a.values)


def test_generate_bm_increment_variance():
    dt = 1e-4
    p = generate_bm(SimConfig(2.0, dt, seed=1))
    ratio = float(np.mean(np.diff(p.values) ** 2) / dt)
    assert len(p) - 1 >= 10_000
    assert abs(ratio - 1) < 0.1


def test_csv_round_trip(tmp_path):
    p = generate_bm(SimConfig(0.05, 1e-3, seed=2))
    target = tmp_path / "p.csv"
    write_path_csv(target, p)
    back = read_path_csv(target)
    assert np.array_equal(back.times, p.times)
    assert np.array_equal(back.values, p.values)
    raw = target.read_bytes()
    assert raw.startswith(b"time,value\n") and b"\r" not in raw


def test_csv_reader_rejects_bad_input(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("time,value\n0,0\n1,1\n0.5,2\n")
    with pytest.raises(DomainError):
        read_path_csv(bad)
    bad.write_text("t,v\n0,0\n")
    with pytest.raises(DomainError):
        read_path_csv(bad)
    bad.write_text("time,value\n0,abc\n")
    with pytest.raises(DomainError):
        read_path_csv(bad)


def test_write_to_stream():
    buf = io.StringIO()
    write_path_csv(buf, EXAMPLE)
    assert buf.getvalue().splitlines()[:2] == ["time,value", "0.0,0.0"]
