"""Laplace exponent of the inverse truncated variation of Brownian motion.

Closed forms: the exponent ``sqrt(2q) tanh(c sqrt(q/2))``, the Brownian
scale functions ``W``/``Z`` and the two excursion integrals ``I1``/``I2``
whose sum is the exponent.

Monte Carlo: the inverse ``S_t`` of the running truncated variation is read
off the exact streaming solver. The running TTV is flat up to the first
drawup/drawdown time ``tau`` and is a copy of the lattice local-time sum
after it, so ``S_t - tau`` and ``S_t - S_s`` are both free of the shift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ._kernels import push_level_hits
from .errors import CensoringError, DomainError, ShapeError
from .harness import EnsembleJob, MonteCarloReport, ks_two_sample, run_ensemble, summarize
from .localtime import build_xy, lattice_local_times
from .paths import SampledPath, SimConfig, extend_bm, generate_bm, path_rng
from .skorokhod import select_anchor, solve

SERIES_CUTOFF = 0.1


def _check_cq(c, q):
    if not c > 0:
        raise DomainError(f"c must be positive, got {c}")
    if not q >= 0:
        raise DomainError(f"q must be nonnegative, got {q}")


def levy_exponent(c: float, q: float) -> float:
    _check_cq(c, q)
    return math.sqrt(2 * q) * math.tanh(c * math.sqrt(q / 2))


def scale_w(q: float, x: float) -> float:
    if q < 0 or x < 0:
        raise DomainError(f"scale functions need q >= 0 and x >= 0, got q={q}, x={x}")
    if q == 0:
        return 2.0 * x
    return math.sqrt(2 / q) * math.sinh(math.sqrt(2 * q) * x)


def scale_z(q: float, x: float) -> float:
    if q < 0 or x < 0:
        raise DomainError(f"scale functions need q >= 0 and x >= 0, got q={q}, x={x}")
    return math.cosh(math.sqrt(2 * q) * x)


def excursion_terms(c: float, q: float) -> tuple[float, float]:
    """``(1/c - sqrt(2q)/sinh(u), sqrt(2q) coth(u) - 1/c)`` with ``u = c sqrt(2q)``.

    Both are written as ``(1/c) * ratio`` and the ratios are expanded in
    series for small ``u``, where the closed forms cancel catastrophically.
    """
    _check_cq(c, q)
    if q == 0:
        return 0.0, 0.0
    u = c * math.sqrt(2 * q)
    if u < SERIES_CUTOFF:
        u2 = u * u
        sinh_minus = u * u2 / 6 * (1 + u2 / 20 * (1 + u2 / 42 * (1 + u2 / 72)))
        ucosh_minus = u * u2 / 3 * (1 + u2 / 10 * (1 + u2 / 28 * (1 + u2 / 54)))
        sh = math.sinh(u)
        return sinh_minus / sh / c, ucosh_minus / sh / c
    if u > 700:
        # sinh overflows; 1/sinh(u) is 0 and coth(u) is 1 in double precision
        return 1 / c, math.sqrt(2 * q) - 1 / c
    s2q = math.sqrt(2 * q)
    return 1 / c - s2q / math.sinh(u), s2q / math.tanh(u) - 1 / c


def small_c_drift_check(q: float, cs) -> np.ndarray:
    """``Phi^c(q/c)`` for each ``c``; tends to ``q`` as ``c`` decreases."""
    return np.array([levy_exponent(c, q / c) for c in cs])


@dataclass(frozen=True)
class InverseSample:
    t: float
    S: float | None
    censored: bool
    censor_horizon: float


def inverse_times(times, running, levels) -> np.ndarray:
    """First interpolated times a nondecreasing process reaches each level (nan if never)."""
    times = np.asarray(times, dtype=float)
    running = np.asarray(running, dtype=float)
    if running.shape != times.shape:
        raise ShapeError("running process and times differ in length")
    if np.any(np.diff(running) < 0):
        raise DomainError("running process must be nondecreasing")
    levels = np.atleast_1d(np.asarray(levels, dtype=float))
    out = np.full(levels.shape, np.nan)
    idx = np.searchsorted(running, levels, side="left")
    for j, (lev, i) in enumerate(zip(levels, idx)):
        if i >= running.size:
            continue
        if i == 0:
            out[j] = times[0]
            continue
        r0, r1 = running[i - 1], running[i]
        out[j] = times[i - 1] + (lev - r0) / (r1 - r0) * (times[i] - times[i - 1])
    return out


def inverse_process(running, t: float, times=None) -> InverseSample:
    running = np.asarray(running, dtype=float)
    if times is None:
        times = np.arange(running.size, dtype=float)
    if t < 0:
        raise DomainError(f"level must be nonnegative, got {t}")
    S = inverse_times(times, running, [t])[0]
    horizon = float(np.asarray(times)[-1])
    if math.isnan(S):
        return InverseSample(float(t), None, True, horizon)
    return InverseSample(float(t), float(S), False, horizon)


# ---------------------------------------------------------------- Monte Carlo


def _default_horizon(c: float, top: float) -> float:
    # S_top has mean c * top plus the O(c^2) wait for tau; paths that need
    # longer are extended in place
    return c * top + c * c


def _ttv_inverse(cfg: SimConfig, c: float, levels, max_horizon: float, subsample: int = 1):
    """(tau, S at levels) from the running TTV, extending the path as needed.

    With ``subsample > 1`` the same Brownian path is also read on every
    ``subsample``-th sample, and both results are returned.
    """
    levels = np.asarray(levels, dtype=float)
    rng = path_rng(cfg.seed, cfg.index, cfg.stream)
    values = np.zeros(1)
    h = cfg.horizon
    while True:
        steps = int(math.floor(h / cfg.dt + 1e-9))
        values = extend_bm(values, rng, steps - (values.size - 1), cfg.dt)
        views = [(values, cfg.dt)]
        if subsample > 1:
            views.append((values[::subsample], cfg.dt * subsample))
        out = [_view_inverse(v, step, c, levels) for v, step in views]
        if all(o is not None for o in out):
            return out if subsample > 1 else out[0]
        if h >= max_horizon:
            return None
        h = min(2 * h, max_horizon)


def _view_inverse(values: np.ndarray, step: float, c: float, levels: np.ndarray):
    path = SampledPath._trusted(np.arange(values.size) * step, values)
    anchor = select_anchor(path, c)
    if anchor.trigger == "none":
        return None
    hits = push_level_hits(values, float(c), anchor.x, levels)
    if np.any(hits < 0):
        return None
    return anchor.trigger_time, hits * step


def inverse_samples(
    c: float,
    levels,
    dt: float,
    paths: int,
    seed: int,
    stream: int = 0,
    threads: int = 1,
    horizon: float | None = None,
    max_horizon: float | None = None,
    subsample: int = 1,
):
    """``tau`` and ``S`` at ``levels`` for each path; aborts on censoring.

    Returns ``(tau, S)`` arrays, or a list of such pairs (fine first) when
    ``subsample > 1``.
    """
    levels = np.asarray(levels, dtype=float)
    if levels.size == 0 or np.any(np.diff(levels) < 0):
        raise DomainError("levels must be a nonempty nondecreasing sequence")
    if horizon is None:
        horizon = _default_horizon(c, float(levels.max()))
    if max_horizon is None:
        max_horizon = 64 * horizon
    template = SimConfig(horizon, dt, seed, 0, stream)
    job = EnsembleJob(
        "inverse",
        template,
        paths,
        lambda cfg: _ttv_inverse(cfg, c, levels, max_horizon, subsample),
    )
    out = run_ensemble(job, threads)
    missing = [i for i, o in enumerate(out) if o is None]
    if missing:
        raise CensoringError(
            f"{len(missing)} of {paths} paths did not reach TTV level {levels.max()} "
            f"within horizon {max_horizon} (first indices {missing[:5]})"
        )
    views = 2 if subsample > 1 else 1
    result = []
    for v in range(views):
        rows = [o[v] if subsample > 1 else o for o in out]
        tau = np.array([r[0] for r in rows])
        S = np.vstack([r[1] for r in rows])
        result.append((tau, S))
    return result if subsample > 1 else result[0]


def _laplace_estimate(x: np.ndarray, q: float, length: float) -> tuple[float, float]:
    """``-log mean exp(-q x) / length`` with its delta-method standard error."""
    w = np.exp(-q * x)
    st = summarize(w)
    phi = -math.log(st.mean) / length + 0.0
    return phi, st.se / (st.mean * length)


def empirical_exponent(
    c: float = 1.0,
    q_grid=(0.5, 1.0, 2.0),
    t: float = 1.0,
    dt: float = 1e-4,
    paths: int = 4000,
    seed: int = 7,
    threads: int = 1,
    se_multiplier: float = 3.0,
    allowance: float = 0.02,
) -> MonteCarloReport:
    q_grid = [float(q) for q in q_grid]
    for q in q_grid:
        _check_cq(c, q)
    half = t / 2
    horizon = _default_horizon(c, t)
    tau, S = inverse_samples(c, [half, t], dt, paths, seed, threads=threads, horizon=horizon)
    rep = MonteCarloReport(
        "exponent",
        {
            "c": c, "q": q_grid, "t": t, "dt": dt, "paths": paths, "seed": seed,
            "initial_horizon": horizon, "max_horizon": 64 * horizon,
            "increment_window": [half, t],
        },
    )
    increments = S[:, 1] - S[:, 0]
    direct = S[:, 1] - tau
    direct_half = S[:, 0] - tau
    ok = True
    for q in q_grid:
        exact = levy_exponent(c, q)
        inc, inc_se = _laplace_estimate(increments, q, t - half)
        dir_, dir_se = _laplace_estimate(direct, q, t)
        dh, dh_se = _laplace_estimate(direct_half, q, half)
        rep.estimate(f"phi_exact(q={q:g})", exact)
        rep.estimate(f"phi_increment(q={q:g})", inc, inc_se)
        rep.estimate(f"phi_direct(q={q:g})", dir_, dir_se)
        rep.estimate(f"phi_direct_half(q={q:g})", dh, dh_se)
        err = abs(inc - exact)
        rep.statistic(f"abs_error_increment(q={q:g})", err)
        ok &= err <= se_multiplier * inc_se + allowance
    rep.statistic("mean_tau", float(tau.mean()))
    rep.passed = bool(ok)
    rep.thresholds = {"se_multiplier": se_multiplier, "allowance": allowance}
    return rep


def exponent_refinement(
    c: float = 1.0,
    q_grid=(0.5, 1.0, 2.0),
    t: float = 1.0,
    dt: float = 1e-4,
    factor: int = 2,
    paths: int = 2000,
    seeds=(101, 102, 103, 104, 105),
    threads: int = 1,
) -> MonteCarloReport:
    """Compare increment estimates on step ``dt`` against step ``dt / factor``.

    Coarse paths are the fine paths read on every ``factor``-th sample, so
    the comparison isolates discretisation error from sampling noise. The
    per-seed error is the mean over ``q`` of ``|phi_hat - phi|``.
    """
    half = t / 2
    exact = np.array([levy_exponent(c, q) for q in q_grid])
    coarse_err, fine_err = [], []
    for s in seeds:
        (tf, Sf), (tc, Sc) = inverse_samples(
            c, [half, t], dt / factor, paths, s, threads=threads, subsample=factor
        )
        for S, errs in ((Sf, fine_err), (Sc, coarse_err)):
            est = np.array([_laplace_estimate(S[:, 1] - S[:, 0], q, t - half)[0] for q in q_grid])
            errs.append(float(np.mean(np.abs(est - exact))))
    rep = MonteCarloReport(
        "exponent-refinement",
        {"c": c, "q": list(q_grid), "t": t, "dt_coarse": dt, "dt_fine": dt / factor,
         "paths": paths, "seeds": list(seeds)},
    )
    for s, ec, ef in zip(seeds, coarse_err, fine_err):
        rep.statistic(f"error_coarse(seed={s})", ec)
        rep.statistic(f"error_fine(seed={s})", ef)
    mc, mf = float(np.median(coarse_err)), float(np.median(fine_err))
    rep.statistic("median_error_coarse", mc)
    rep.statistic("median_error_fine", mf)
    rep.passed = mf < mc
    rep.thresholds = {"rule": "median_error_fine < median_error_coarse"}
    return rep


def _side_a(cfg: SimConfig, c: float, target: str) -> float:
    path = generate_bm(cfg)
    sol = solve(path, c)
    if target == "ttv":
        return float(sol.U[-1] + sol.D[-1])
    return float(sol.g[-1])


def _side_b(cfg: SimConfig, c: float, target: str, estimator, eps, grid_correction) -> float:
    t = cfg.horizon
    anchor = select_anchor(generate_bm(cfg), c)
    if anchor.trigger == "none":
        return 0.0 if target == "ttv" else anchor.x
    local = generate_bm(replace(cfg, stream=cfg.stream + 1))
    xy = build_xy(lattice_local_times(local, c, estimator, eps, grid_correction))
    s = t - anchor.trigger_time
    if target == "ttv":
        return float(np.interp(s, xy.times, xy.Y))
    x_val = float(np.interp(s, xy.times, xy.X))
    return anchor.x + x_val if anchor.trigger == "up" else anchor.x - x_val


def representation_samples(
    c: float = 1.0,
    t: float = 1.0,
    dt: float = 1e-4,
    paths: int = 2000,
    seed: int = 11,
    target: str = "ttv",
    estimator: str = "crossing",
    eps: float | None = None,
    grid_correction: bool = True,
    threads: int = 1,
    dt_b: float | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Direct sample (stream 0) and the independently assembled one (streams 1, 2).

    ``ttv``: TTV on [0, t] against ``Y_{t - tau}``. ``path``: the minimiser
    at ``t`` against ``x + X_{t - tau}`` (up trigger) or ``x - X_{t - tau}``
    (down trigger), ``x`` being the anchor. ``tau`` comes from stream 1 and
    the lattice local times from an independent path on stream 2.
    """
    if target not in ("ttv", "path"):
        raise DomainError(f"target must be 'ttv' or 'path', got {target!r}")
    if dt_b is not None and dt_b != dt:
        raise ShapeError(f"both sides need the same step, got {dt} and {dt_b}")
    if eps is None:
        eps = c / 20
    eps = min(eps, c / 4)
    job_a = EnsembleJob("representation-a", SimConfig(t, dt, seed, 0, 0), paths,
                        lambda cfg: _side_a(cfg, c, target))
    job_b = EnsembleJob("representation-b", SimConfig(t, dt, seed, 0, 1), paths,
                        lambda cfg: _side_b(cfg, c, target, estimator, eps, grid_correction))
    return np.array(run_ensemble(job_a, threads)), np.array(run_ensemble(job_b, threads))


def representation_test(
    c: float = 1.0,
    t: float = 1.0,
    dt: float = 1e-4,
    paths: int = 2000,
    seed: int = 11,
    target: str = "ttv",
    estimator: str = "crossing",
    eps: float | None = None,
    grid_correction: bool = True,
    threads: int = 1,
    level: float = 0.01,
) -> MonteCarloReport:
    if eps is None:
        eps = c / 20
    a, b = representation_samples(c, t, dt, paths, seed, target, estimator, eps,
                                  grid_correction, threads)
    d, p = ks_two_sample(a, b)
    rep = MonteCarloReport(
        "representation",
        {"c": c, "t": t, "dt": dt, "paths": paths, "seed": seed, "target": target,
         "estimator": estimator, "eps": eps, "grid_correction": grid_correction},
    )
    sa, sb = summarize(a), summarize(b)
    rep.estimate("mean_direct", sa.mean, sa.se)
    rep.estimate("mean_representation", sb.mean, sb.se)
    rep.statistic("ks_statistic", d)
    rep.statistic("ks_pvalue", p)
    rep.passed = p > level
    rep.thresholds = {"ks_level": level}
    return rep


def _tau(cfg: SimConfig, c: float, max_horizon: float) -> float:
    h = cfg.horizon
    while True:
        anchor = select_anchor(generate_bm(replace(cfg, horizon=h)), c)
        if anchor.trigger != "none":
            return float(anchor.trigger_time)
        if h >= max_horizon:
            return math.nan
        h = min(2 * h, max_horizon)


def tau_samples(
    c: float,
    dt: float,
    paths: int,
    seed: int,
    stream: int = 0,
    threads: int = 1,
    horizon: float | None = None,
    max_horizon: float | None = None,
) -> np.ndarray:
    """First time drawup or drawdown reaches ``c`` (nan when never within the cap)."""
    if horizon is None:
        horizon = c * c
    horizon = max(horizon, dt)
    if max_horizon is None:
        max_horizon = 64 * horizon
    job = EnsembleJob("tau", SimConfig(horizon, dt, seed, 0, stream), paths,
                      lambda cfg: _tau(cfg, c, max_horizon))
    return np.array(run_ensemble(job, threads))


def survival_curve(samples, grid) -> np.ndarray:
    x = np.sort(np.asarray(samples, dtype=float))
    return 1.0 - np.searchsorted(x, np.asarray(grid, dtype=float), side="right") / x.size


def tail_check_tau(
    c: float = 1.0,
    dt: float = 1e-4,
    paths: int = 10000,
    seed: int = 13,
    threads: int = 1,
    min_tail_count: int = 200,
    grid_points: int = 40,
    max_residual: float = 0.15,
) -> MonteCarloReport:
    """Fit ``log S(t) = a - lambda t`` to the survival of ``tau`` beyond its median.

    The window runs from the median to the last time at which at least
    ``min_tail_count`` samples survive.
    """
    tau = tau_samples(c, dt, paths, seed, threads=threads)
    realized = np.isfinite(tau)
    if realized.mean() < 0.99:
        raise CensoringError(f"only {realized.mean():.3%} of paths realised tau; extend the horizon")
    tau = np.where(realized, tau, np.inf)
    srt = np.sort(tau)
    t_lo = float(np.median(tau))
    if paths <= min_tail_count * 2:
        raise DomainError(f"{paths} paths leave no tail beyond {min_tail_count} survivors")
    t_hi = float(srt[paths - min_tail_count - 1])
    if not t_hi > t_lo:
        raise DomainError("tail window is empty")
    grid = np.linspace(t_lo, t_hi, grid_points)
    surv = survival_curve(tau, grid)
    slope, intercept = np.polyfit(grid, np.log(surv), 1)
    fitted = np.exp(intercept + slope * grid)
    rel = float(np.max(np.abs(surv / fitted - 1)))
    log_dev = float(np.max(np.abs(np.log(surv) - (intercept + slope * grid))))
    rep = MonteCarloReport(
        "tails",
        {"c": c, "dt": dt, "paths": paths, "seed": seed, "min_tail_count": min_tail_count,
         "grid_points": grid_points, "window": [t_lo, t_hi]},
    )
    st = summarize(tau[realized])
    rep.estimate("mean_tau", st.mean, st.se)
    rep.estimate("rate", -slope)
    rep.statistic("intercept", intercept)
    rep.statistic("max_relative_residual", rel)
    rep.statistic("max_log_deviation", log_dev)
    rep.statistic("survival_nonincreasing", bool(np.all(np.diff(surv) <= 0)))
    rep.passed = bool(-slope > 0 and rel < max_residual)
    rep.thresholds = {"rate_positive": True, "max_relative_residual": max_residual}
    return rep


def tau_scaling_test(
    c: float = 1.0,
    factor: float = 2.0,
    dt: float = 1e-4,
    paths: int = 10000,
    seed: int = 17,
    threads: int = 1,
    level: float = 0.01,
) -> MonteCarloReport:
    """KS between tau for band ``factor * c`` and ``factor**2`` times tau for band ``c``."""
    big = tau_samples(factor * c, dt, paths, seed, stream=0, threads=threads)
    small = tau_samples(c, dt, paths, seed, stream=1, threads=threads)
    if not (np.all(np.isfinite(big)) and np.all(np.isfinite(small))):
        raise CensoringError("some paths never realised tau within the horizon cap")
    d, p = ks_two_sample(big, factor**2 * small)
    rep = MonteCarloReport(
        "tau-scaling",
        {"c": c, "factor": factor, "dt": dt, "paths": paths, "seed": seed},
    )
    rep.estimate("mean_tau_big", float(big.mean()))
    rep.estimate("mean_tau_small_scaled", float(factor**2 * small.mean()))
    rep.statistic("ks_statistic", d)
    rep.statistic("ks_pvalue", p)
    rep.passed = p > level
    rep.thresholds = {"ks_level": level}
    return rep
