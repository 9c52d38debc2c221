"""Ensemble orchestration, summary statistics and the two-sample KS test."""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Callable

import numpy as np
from scipy.special import kolmogorov

from .errors import DomainError, TvlabError
from .paths import SimConfig


class EnsembleError(TvlabError):
    def __init__(self, index: int, cause: BaseException):
        super().__init__(f"path {index}: {type(cause).__name__}: {cause}")
        self.index = index
        self.cause = cause


@dataclass
class EnsembleJob:
    """``reducer`` receives the SimConfig of one path (its ``index`` set).

    Reducers generate their own path from the config, which lets them
    extend the horizon deterministically when a target is not reached.
    """

    experiment: str
    template: SimConfig
    paths: int
    reducer: Callable[[SimConfig], Any]
    outputs: list = field(default_factory=list)


def run_ensemble(job: EnsembleJob, threads: int = 1) -> list:
    if job.paths < 1:
        raise DomainError(f"need at least one path, got {job.paths}")
    configs = [replace(job.template, index=i) for i in range(job.paths)]

    def one(cfg: SimConfig):
        try:
            return job.reducer(cfg)
        except Exception as exc:
            raise EnsembleError(cfg.index, exc) from exc

    if threads <= 1:
        outputs = [one(cfg) for cfg in configs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outputs = list(pool.map(one, configs))
    job.outputs = outputs
    return outputs


@dataclass(frozen=True)
class SummaryStats:
    n: int
    mean: float
    se: float
    ci_low: float
    ci_high: float


def summarize(samples) -> SummaryStats:
    x = np.asarray(samples, dtype=float).reshape(-1)
    if x.size < 2:
        raise DomainError(f"need at least two samples, got {x.size}")
    mean = float(x.mean())
    se = float(x.std(ddof=1) / math.sqrt(x.size))
    return SummaryStats(int(x.size), mean, se, mean - 1.96 * se, mean + 1.96 * se)


def ks_two_sample(a, b) -> tuple[float, float]:
    """Two-sample Kolmogorov-Smirnov statistic with asymptotic p-value."""
    a = np.sort(np.asarray(a, dtype=float).reshape(-1))
    b = np.sort(np.asarray(b, dtype=float).reshape(-1))
    if a.size == 0 or b.size == 0:
        raise DomainError("KS test needs two nonempty samples")
    grid = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, grid, side="right") / a.size
    cdf_b = np.searchsorted(b, grid, side="right") / b.size
    d = float(np.max(np.abs(cdf_a - cdf_b)))
    ne = a.size * b.size / (a.size + b.size)
    return d, float(kolmogorov(math.sqrt(ne) * d))


@dataclass
class MonteCarloReport:
    experiment: str
    config: dict
    estimates: list = field(default_factory=list)
    statistics: list = field(default_factory=list)
    passed: bool = False
    thresholds: dict = field(default_factory=dict)

    def estimate(self, name: str, value: float, se: float | None = None) -> None:
        self.estimates.append({"name": name, "value": _num(value), "se": _num(se)})

    def statistic(self, name: str, value) -> None:
        self.statistics.append({"name": name, "value": _num(value)})

    def get(self, name: str):
        for row in self.estimates + self.statistics:
            if row["name"] == name:
                return row["value"]
        raise KeyError(name)

    def as_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "config": self.config,
            "estimates": self.estimates,
            "statistics": self.statistics,
            "verdict": {"pass": bool(self.passed), "thresholds": self.thresholds},
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, allow_nan=True)


def _num(x):
    if x is None:
        return None
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    return float(x)
