"""Brownian local times on the lattice {k c} and the sawtooth Tanaka identity.

The sawtooth ``F_c`` is the distance to the nearest even lattice point
``2kc`` shifted down by ``c/2``. Its kinks sit exactly on the lattice, so
the Itô-Tanaka formula writes ``F_c(B)`` as a stochastic integral plus the
signed lattice local-time sum ``X``::

    F_c(B_t) - F_c(B_0) = int_0^t dF_c(B_s) dB_s + X_t

Local times follow the semimartingale convention (occupation density,
``E L^0_1 = E|B_1|``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from ._kernels import band_occupation, upcrossing_counts
from .errors import DomainError, ShapeError
from .paths import SampledPath

Estimator = Literal["crossing", "occupation"]

# Overshoot constant of a Gaussian random walk, zeta(1/2)/sqrt(2 pi).
# A sampled Brownian path misses excursions; each threshold of a crossing
# band is effectively moved outward by this many step standard deviations.
GRID_OVERSHOOT = 0.5825971579390106


def sawtooth(x, c: float):
    if not c > 0:
        raise DomainError(f"c must be positive, got {c}")
    x = np.asarray(x, dtype=float)
    k = np.floor((x + c) / (2 * c))
    out = np.abs(x - 2 * k * c) - 0.5 * c
    return float(out) if out.ndim == 0 else out


def sawtooth_left_derivative(x, c: float):
    """+1 on (2kc, (2k+1)c], -1 on ((2k-1)c, 2kc]."""
    if not c > 0:
        raise DomainError(f"c must be positive, got {c}")
    m = np.ceil(np.asarray(x, dtype=float) / c)
    out = np.where(np.mod(m, 2) == 1, 1.0, -1.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class LatticeLocalTimes:
    c: float
    eps: float
    estimator: Estimator
    times: np.ndarray
    levels: np.ndarray  # integer k, level = k * c
    L: np.ndarray  # shape (len(levels), len(times))

    def level(self, k: int) -> np.ndarray:
        hit = np.flatnonzero(self.levels == k)
        if hit.size == 0:
            return np.zeros_like(self.times)
        return self.L[hit[0]]

    def mirrored(self) -> LatticeLocalTimes:
        """Relabel level k as -k (local times of the negated path)."""
        order = np.argsort(-self.levels)
        return LatticeLocalTimes(
            self.c, self.eps, self.estimator, self.times, -self.levels[order], self.L[order]
        )


@dataclass(frozen=True)
class XYProcesses:
    times: np.ndarray
    X: np.ndarray
    Y: np.ndarray


def _mean_step(path: SampledPath) -> float:
    if len(path) < 2:
        return 0.0
    return (path.end - path.start) / (len(path) - 1)


def level_local_time(
    path: SampledPath,
    a: float,
    eps: float,
    estimator: Estimator = "crossing",
    grid_correction: bool = False,
) -> np.ndarray:
    """Local time at level ``a`` as a process on the sample grid.

    crossing: ``2 w N_t`` with ``N_t`` the completed upcrossings of
    ``[a, a + eps]`` and ``w = eps``; with ``grid_correction`` the width is
    widened by ``2 * GRID_OVERSHOOT * sqrt(dt)`` to undo the excursions a
    sampled Brownian path misses.

    occupation: ``(1 / 2 eps) * Leb{s <= t : |f(s) - a| <= eps}``, exact on
    the interpolation.
    """
    if estimator == "crossing":
        width = eps
        if grid_correction:
            width += 2 * GRID_OVERSHOOT * math.sqrt(_mean_step(path))
        counts = upcrossing_counts(path.values, float(a), float(a + eps))
        return 2.0 * width * counts
    if estimator == "occupation":
        occ = band_occupation(path.times, path.values, float(a - eps), float(a + eps))
        return occ / (2.0 * eps)
    raise DomainError(f"unknown estimator {estimator!r}")


def lattice_local_times(
    path: SampledPath,
    c: float,
    estimator: Estimator = "crossing",
    eps: float | None = None,
    grid_correction: bool = False,
) -> LatticeLocalTimes:
    if not c > 0:
        raise DomainError(f"c must be positive, got {c}")
    if eps is None:
        eps = c / 20
    if not (0 < eps <= c / 4):
        raise DomainError(f"eps must lie in (0, c/4], got {eps} for c={c}")
    lo = float(path.values.min()) - eps
    hi = float(path.values.max()) + eps
    levels = np.arange(math.floor(lo / c), math.ceil(hi / c) + 1)
    L = np.zeros((levels.size, len(path)))
    for row, k in enumerate(levels):
        L[row] = level_local_time(path, k * c, eps, estimator, grid_correction)
    return LatticeLocalTimes(float(c), float(eps), estimator, path.times, levels, L)


def build_xy(lt: LatticeLocalTimes) -> XYProcesses:
    sign = np.where(lt.levels % 2 == 0, 1.0, -1.0)
    X = sign @ lt.L if lt.levels.size else np.zeros_like(lt.times)
    Y = lt.L.sum(axis=0) if lt.levels.size else np.zeros_like(lt.times)
    return XYProcesses(lt.times, X, Y)


def discretized_ito_integral(path: SampledPath, integrand) -> np.ndarray:
    """Cumulative left-point sum of ``integrand(t_i) * (f(t_{i+1}) - f(t_i))``."""
    h = np.broadcast_to(np.asarray(integrand, dtype=float), np.shape(integrand))
    if h.shape != path.values.shape:
        raise ShapeError(f"integrand has {h.size} samples, path has {len(path)}")
    out = np.zeros(len(path))
    np.cumsum(h[:-1] * np.diff(path.values), out=out[1:])
    return out


def tanaka_process(
    path: SampledPath,
    c: float,
    eps: float | None = None,
    estimator: Estimator = "crossing",
    grid_correction: bool = True,
) -> np.ndarray:
    """Residual ``F_c(B_t) - F_c(B_0) - beta_t - X_t`` at every sample."""
    lt = lattice_local_times(path, c, estimator, eps, grid_correction)
    xy = build_xy(lt)
    F = sawtooth(path.values, c)
    beta = discretized_ito_integral(path, sawtooth_left_derivative(path.values, c))
    return F - F[0] - beta - xy.X


def tanaka_residual(
    path: SampledPath,
    c: float,
    eps: float | None = None,
    estimator: Estimator = "crossing",
    grid_correction: bool = True,
) -> float:
    return float(np.max(np.abs(tanaka_process(path, c, eps, estimator, grid_correction))))


def tanaka_experiment(
    c: float = 0.5,
    dt: float = 1e-5,
    seeds: int = 50,
    seed: int = 5,
    horizon: float = 1.0,
    eps: float | None = None,
    estimator: Estimator = "crossing",
    refine_seeds: int = 20,
    threshold: float = 0.05,
    threads: int = 1,
):
    """Median sup-norm Tanaka residual over ``seeds`` Brownian paths.

    Also compares the median residual at ``(4 dt, 2 eps)`` with the one at
    ``(dt, eps)`` over the first ``refine_seeds`` paths; the refined pair
    must be smaller.
    """
    from .harness import EnsembleJob, MonteCarloReport, run_ensemble
    from .paths import SimConfig, generate_bm

    if eps is None:
        eps = c / 20

    def residuals(step, width, n):
        job = EnsembleJob(
            "tanaka", SimConfig(horizon, step, seed), n,
            lambda cfg: tanaka_residual(generate_bm(cfg), c, width, estimator),
        )
        return np.array(run_ensemble(job, threads))

    fine = residuals(dt, eps, seeds)
    coarse = residuals(4 * dt, min(2 * eps, c / 4), refine_seeds)
    med = float(np.median(fine))
    med_fine_sub = float(np.median(fine[:refine_seeds]))
    med_coarse = float(np.median(coarse))
    rep = MonteCarloReport(
        "tanaka",
        {"c": c, "dt": dt, "seeds": seeds, "seed": seed, "horizon": horizon, "eps": eps,
         "estimator": estimator, "grid_correction": True, "refine_seeds": refine_seeds,
         "coarse_dt": 4 * dt, "coarse_eps": min(2 * eps, c / 4)},
    )
    rep.estimate("median_residual", med)
    rep.statistic("max_residual", float(fine.max()))
    rep.statistic("median_residual_refined", med_fine_sub)
    rep.statistic("median_residual_coarse", med_coarse)
    rep.passed = bool(med < threshold and med_fine_sub < med_coarse)
    rep.thresholds = {"median_residual_below": threshold,
                      "refinement": "median(dt, eps) < median(4 dt, 2 eps)"}
    return rep


def localtime_calibration(
    paths: int = 10000,
    dt: float = 1e-4,
    eps: float = 0.05,
    estimator: Estimator = "crossing",
    grid_correction: bool = True,
    seed: int = 19,
    tolerance: float = 0.02,
    threads: int = 1,
):
    """Mean estimated ``L^0_1`` against ``E|B_1| = sqrt(2/pi)``."""
    from .harness import EnsembleJob, MonteCarloReport, run_ensemble, summarize
    from .paths import SimConfig, generate_bm

    def one(cfg):
        return float(level_local_time(generate_bm(cfg), 0.0, eps, estimator, grid_correction)[-1])

    job = EnsembleJob("localtime-calibration", SimConfig(1.0, dt, seed), paths, one)
    st = summarize(run_ensemble(job, threads))
    target = math.sqrt(2 / math.pi)
    rel = abs(st.mean / target - 1)
    rep = MonteCarloReport(
        "localtime-calibration",
        {"paths": paths, "dt": dt, "eps": eps, "estimator": estimator,
         "grid_correction": grid_correction, "seed": seed},
    )
    rep.estimate("mean_L0", st.mean, st.se)
    rep.estimate("target", target)
    rep.statistic("relative_error", rel)
    rep.passed = bool(rel <= tolerance)
    rep.thresholds = {"relative_error": tolerance}
    return rep
