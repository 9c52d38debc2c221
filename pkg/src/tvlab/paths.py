"""Sampled paths, Brownian path generation and first-passage times.

A :class:`SampledPath` is the continuous piecewise-linear interpolation of its
samples. Every routine in this module honours that interpolation, so crossing
times are located exactly inside segments rather than snapped to the grid.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from os import PathLike
from typing import Literal

import numpy as np

from ._kernels import first_drawup_index
from .errors import ConfigurationError, DomainError

CrossingKind = Literal["drawup", "drawdown", "level-passage"]


@dataclass(frozen=True)
class SampledPath:
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.array(self.times, dtype=float, copy=True).reshape(-1)
        values = np.array(self.values, dtype=float, copy=True).reshape(-1)
        if times.size < 1:
            raise DomainError("a path needs at least one sample")
        if times.shape != values.shape:
            raise DomainError(
                f"times and values differ in length ({times.size} vs {values.size})"
            )
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values))):
            raise DomainError("path samples must be finite")
        if np.any(np.diff(times) <= 0):
            raise DomainError("sample times must be strictly increasing")
        times.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @classmethod
    def _trusted(cls, times: np.ndarray, values: np.ndarray) -> SampledPath:
        """Skip validation for arrays produced internally."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "times", times)
        object.__setattr__(obj, "values", values)
        return obj

    @classmethod
    def from_values(cls, values, times=None) -> SampledPath:
        """Build a path; ``times`` defaults to 0, 1, 2, ..."""
        values = np.asarray(values, dtype=float)
        if times is None:
            times = np.arange(values.size, dtype=float)
        return cls(times, values)

    def __len__(self) -> int:
        return self.values.size

    def __neg__(self) -> SampledPath:
        return SampledPath._trusted(self.times, -self.values)

    @property
    def start(self) -> float:
        return float(self.times[0])

    @property
    def end(self) -> float:
        return float(self.times[-1])

    def value_at(self, t: float) -> float:
        return float(np.interp(t, self.times, self.values))

    def prefix(self, t: float) -> SampledPath:
        """Samples with time <= t (at least the first one)."""
        n = max(1, int(np.searchsorted(self.times, t, side="right")))
        return SampledPath(self.times[:n], self.values[:n])


@dataclass(frozen=True)
class SimConfig:
    horizon: float
    dt: float
    seed: int = 0
    index: int = 0
    stream: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.horizon) and self.horizon > 0):
            raise ConfigurationError(f"horizon must be positive, got {self.horizon}")
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        if self.dt > self.horizon:
            raise ConfigurationError(f"dt={self.dt} exceeds horizon={self.horizon}")
        if self.seed < 0 or self.index < 0 or self.stream < 0:
            raise ConfigurationError("seed, index and stream must be nonnegative")

    @property
    def n_steps(self) -> int:
        # tolerate T/dt landing a hair below an integer
        return int(math.floor(self.horizon / self.dt + 1e-9))


@dataclass(frozen=True)
class Crossing:
    time: float
    level: float
    kind: CrossingKind


def path_rng(seed: int, index: int, stream: int = 0) -> np.random.Generator:
    """Independent generator for path ``index`` of ensemble ``stream``.

    Keys are mixed through :class:`numpy.random.SeedSequence`, so a path
    depends only on ``(seed, stream, index)`` and never on the order in
    which paths are produced.
    """
    ss = np.random.SeedSequence(seed, spawn_key=(stream, index))
    return np.random.Generator(np.random.PCG64(ss))


def extend_bm(values: np.ndarray, rng: np.random.Generator, steps: int, dt: float) -> np.ndarray:
    """Append ``steps`` Brownian increments drawn from ``rng`` to ``values``.

    Draws are sequential, so growing a path in pieces reproduces the path
    generated in one call.
    """
    out = np.empty(values.size + steps)
    out[: values.size] = values
    incr = rng.standard_normal(steps) * math.sqrt(dt)
    incr[0] += values[-1]
    np.cumsum(incr, out=out[values.size :])
    return out


def generate_bm(config: SimConfig) -> SampledPath:
    rng = path_rng(config.seed, config.index, config.stream)
    values = extend_bm(np.zeros(1), rng, config.n_steps, config.dt)
    return SampledPath._trusted(np.arange(values.size) * config.dt, values)


def running_extrema(path: SampledPath) -> tuple[np.ndarray, np.ndarray]:
    # extrema of a piecewise-linear path are attained at samples
    return np.minimum.accumulate(path.values), np.maximum.accumulate(path.values)


def _first_drawup(path: SampledPath, c: float, sign: float) -> tuple[float, float] | None:
    if not c > 0:
        raise DomainError(f"c must be positive, got {c}")
    i, run_min = first_drawup_index(path.values, float(c), sign)
    if i < 0:
        return None
    # the drawup is 0 at the first sample, so i >= 1 and the segment
    # (i-1, i) is increasing for sign*f with running minimum run_min
    v, t = sign * path.values, path.times
    level = run_min + c
    frac = (level - v[i - 1]) / (v[i] - v[i - 1])
    time = t[i - 1] + frac * (t[i] - t[i - 1])
    return float(min(time, t[i])), float(sign * level)


def first_drawup_time(path: SampledPath, c: float) -> Crossing | None:
    hit = _first_drawup(path, c, 1.0)
    return None if hit is None else Crossing(hit[0], hit[1], "drawup")


def first_drawdown_time(path: SampledPath, c: float) -> Crossing | None:
    hit = _first_drawup(path, c, -1.0)
    return None if hit is None else Crossing(hit[0], hit[1], "drawdown")


def first_passage(path: SampledPath, level: float) -> Crossing | None:
    v, t = path.values, path.times
    side = np.sign(v - level)
    if side[0] == 0:
        return Crossing(float(t[0]), float(level), "level-passage")
    changed = side != side[0]
    if not changed.any():
        return None
    i = int(np.argmax(changed))
    if side[i] == 0:
        time = t[i]
    else:
        frac = (level - v[i - 1]) / (v[i] - v[i - 1])
        time = t[i - 1] + frac * (t[i] - t[i - 1])
    return Crossing(float(time), float(level), "level-passage")


def read_path_csv(source: str | PathLike) -> SampledPath:
    times, values = [], []
    with open(source, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["time", "value"]:
            raise DomainError(f"{source}: expected header 'time,value'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise DomainError(f"{source}:{lineno}: expected two columns")
            try:
                times.append(float(row[0]))
                values.append(float(row[1]))
            except ValueError as exc:
                raise DomainError(f"{source}:{lineno}: {exc}") from None
    if not times:
        raise DomainError(f"{source}: no samples")
    return SampledPath(times, values)


def write_columns_csv(target, columns: dict[str, np.ndarray]) -> None:
    """Write equal-length columns as CSV with round-trip float formatting."""
    names = list(columns)
    cols = [np.asarray(columns[k]) for k in names]
    own = isinstance(target, (str, PathLike))
    fh = open(target, "w", newline="") if own else target
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*cols):
            w.writerow([_fmt(x) for x in row])
    finally:
        if own:
            fh.close()


def write_path_csv(target, path: SampledPath) -> None:
    write_columns_csv(target, {"time": path.times, "value": path.values})


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))
