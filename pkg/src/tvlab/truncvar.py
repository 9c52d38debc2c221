"""Truncated variation of sampled paths.

``ttv_stream`` reads TTV/UTV/DTV off the Skorokhod tube solution in one
pass. ``ttv_oracle`` recomputes them by brute force over every increasing
subsequence of samples and is meant only as an independent check.

Plain sequences are accepted wherever a path is expected. The truncated
variation samples finitely many points, so a jump sequence and its linear
interpolation have the same TTV; sequences are placed on unit times.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Literal

import numpy as np

from .errors import DomainError, ShapeError, SizeError
from .paths import SampledPath
from .skorokhod import solve

Mode = Literal["ttv", "utv", "dtv"]
ORACLE_MAX_SAMPLES = 16


@dataclass(frozen=True)
class TruncVarResult:
    c: float
    ttv: float
    utv: float
    dtv: float
    times: np.ndarray
    running_ttv: np.ndarray

    def as_dict(self) -> dict:
        return {"c": self.c, "ttv": self.ttv, "utv": self.utv, "dtv": self.dtv}


def as_path(obj) -> SampledPath:
    if isinstance(obj, SampledPath):
        return obj
    return SampledPath.from_values(obj)


def ttv_stream(path, c: float) -> TruncVarResult:
    path = as_path(path)
    if not c >= 0:
        raise DomainError(f"c must be nonnegative, got {c}")
    if c == 0:
        d = np.diff(path.values)
        running = np.concatenate([[0.0], np.cumsum(np.abs(d))])
        utv = float(np.clip(d, 0, None).sum())
        dtv = float(np.clip(-d, 0, None).sum())
        return TruncVarResult(0.0, float(running[-1]), utv, dtv, path.times, running)
    sol = solve(path, c)
    running = sol.U + sol.D
    return TruncVarResult(
        float(c), float(running[-1]), float(sol.U[-1]), float(sol.D[-1]), path.times, running
    )


@lru_cache(maxsize=None)
def _subsets(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Selection mask and previous-selected index for every subset of range(n)."""
    ids = np.arange(1 << n)
    mask = ((ids[:, None] >> np.arange(n)) & 1).astype(bool)
    prev = np.full(mask.shape, -1)
    last = np.full(ids.size, -1)
    for j in range(n):
        prev[:, j] = last
        last = np.where(mask[:, j], j, last)
    return mask, prev


def ttv_oracle(path, c: float, mode: Mode = "ttv") -> float:
    """Exhaustive supremum over all increasing-index subsequences."""
    path = as_path(path)
    if not c >= 0:
        raise DomainError(f"c must be nonnegative, got {c}")
    n = len(path)
    if n > ORACLE_MAX_SAMPLES:
        raise SizeError(f"oracle enumerates 2^n subsets; n={n} > {ORACLE_MAX_SAMPLES}")
    mask, prev = _subsets(n)
    v = path.values
    pair = mask & (prev >= 0)
    jump = v[None, :] - v[np.where(prev >= 0, prev, 0)]
    if mode == "ttv":
        gain = np.abs(jump) - c
    elif mode == "utv":
        gain = jump - c
    elif mode == "dtv":
        gain = -jump - c
    else:
        raise DomainError(f"unknown mode {mode!r}")
    gain = np.where(pair, np.maximum(gain, 0.0), 0.0)
    return float(gain.sum(axis=1).max())


def variational_residual(path, g, c: float) -> tuple[float, float]:
    """Sup-distance from ``path`` to a competitor ``g`` and the total variation of ``g``."""
    path = as_path(path)
    if not c > 0:
        raise DomainError(f"c must be positive, got {c}")
    if isinstance(g, SampledPath):
        if g.times.shape != path.times.shape or not np.array_equal(g.times, path.times):
            raise ShapeError("competitor is sampled on a different grid")
        gv = g.values
    else:
        gv = np.asarray(g, dtype=float)
        if gv.shape != path.values.shape:
            raise ShapeError(f"competitor has {gv.size} samples, path has {len(path)}")
    sup_dev = float(np.max(np.abs(path.values - gv)))
    tv_g = float(np.abs(np.diff(gv)).sum())
    return sup_dev, tv_g


def random_corpus(paths: int, max_len: int, seed: int) -> list[SampledPath]:
    """Paths of 2..max_len samples with values uniform on [-1, 1], keyed by (seed, index)."""
    from .paths import path_rng

    out = []
    for i in range(paths):
        rng = path_rng(seed, i, stream=7)
        n = int(rng.integers(2, max_len + 1))
        out.append(SampledPath.from_values(rng.uniform(-1, 1, n)))
    return out


def oracle_suite(
    paths: int = 1000,
    max_len: int = 12,
    seed: int = 1,
    cs=(0.0, 0.1, 0.3, 0.7, 2.0),
    competitors: int = 5,
    tol: float = 1e-12,
):
    """Streaming solver against the exhaustive oracle, plus tube checks.

    For every path and ``c``: TTV/UTV/DTV agree with the oracle; for ``c > 0``
    the minimiser stays in the tube, its total variation equals TTV, pushes
    happen only on the matching tube edge, and random tube competitors never
    have smaller total variation.
    """
    from .harness import MonteCarloReport
    from .paths import path_rng
    from .skorokhod import solve

    worst = {"oracle": 0.0, "tube_excess": 0.0, "tv_gap": 0.0, "complementarity": 0.0,
             "competitor_deficit": 0.0}
    for i, path in enumerate(random_corpus(paths, max_len, seed)):
        fuzz = path_rng(seed, i, stream=8)
        for c in cs:
            res = ttv_stream(path, c)
            for mode in ("ttv", "utv", "dtv"):
                gap = abs(getattr(res, mode) - ttv_oracle(path, c, mode))
                worst["oracle"] = max(worst["oracle"], gap)
            if c == 0:
                continue
            sol = solve(path, c)
            h = sol.h
            sup_dev, tv_g = variational_residual(path, sol.g, c)
            worst["tube_excess"] = max(worst["tube_excess"], sup_dev - c / 2)
            worst["tv_gap"] = max(worst["tv_gap"], abs(tv_g - res.ttv))
            du, dd = np.diff(sol.U), np.diff(sol.D)
            comp = np.concatenate([
                np.abs(h[1:][du > 0] - c / 2), np.abs(h[1:][dd > 0] + c / 2),
                np.minimum(du, dd)[(du > 0) & (dd > 0)],
            ])
            if comp.size:
                worst["complementarity"] = max(worst["complementarity"], float(comp.max()))
            for _ in range(competitors):
                g = path.values + fuzz.uniform(-c / 2, c / 2, len(path))
                worst["competitor_deficit"] = max(
                    worst["competitor_deficit"], res.ttv - variational_residual(path, g, c)[1]
                )
    rep = MonteCarloReport(
        "oracle",
        {"paths": paths, "max_len": max_len, "seed": seed, "c": list(cs),
         "competitors": competitors},
    )
    for k, v in worst.items():
        rep.statistic(f"worst_{k}", v)
    rep.passed = bool(
        worst["oracle"] <= tol and worst["tube_excess"] <= tol and worst["tv_gap"] <= tol
        and worst["complementarity"] <= 1e-9 and worst["competitor_deficit"] <= tol
    )
    rep.thresholds = {"oracle": tol, "tube": tol, "tv_gap": tol, "complementarity": 1e-9,
                      "competitor": tol}
    return rep
