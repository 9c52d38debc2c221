"""Compiled inner loops. Callers validate arguments; these do not."""

import numpy as np
from numba import njit


@njit(cache=True)
def tube_clamp(values, c, x):
    n = values.size
    half = 0.5 * c
    g = np.empty(n)
    up = np.zeros(n)
    down = np.zeros(n)
    cur = x
    u = 0.0
    d = 0.0
    g[0] = cur
    for i in range(1, n):
        lo = values[i] - half
        hi = values[i] + half
        if cur < lo:
            u += lo - cur
            cur = lo
        elif cur > hi:
            d += cur - hi
            cur = hi
        g[i] = cur
        up[i] = u
        down[i] = d
    return g, up, down


@njit(cache=True)
def upcrossing_counts(values, lower, upper):
    """Running count of completed upcrossings of [lower, upper].

    An upcrossing starts once the interpolated path is at or below ``lower``
    and completes when it next reaches ``upper``. Both events can only
    complete at a sample, so counting on samples is exact for the
    interpolation.
    """
    n = values.size
    out = np.zeros(n, dtype=np.int64)
    armed = values[0] <= lower
    k = 0
    for i in range(1, n):
        v = values[i]
        if armed:
            if v >= upper:
                k += 1
                armed = False
        elif v <= lower:
            armed = True
        out[i] = k
    return out


@njit(cache=True)
def band_occupation(times, values, lower, upper):
    """Running Lebesgue time the interpolated path spends in [lower, upper]."""
    n = values.size
    out = np.zeros(n)
    acc = 0.0
    for i in range(1, n):
        a = values[i - 1]
        b = values[i]
        dt = times[i] - times[i - 1]
        if a == b:
            if lower <= a <= upper:
                acc += dt
        else:
            lo = min(a, b)
            hi = max(a, b)
            overlap = min(hi, upper) - max(lo, lower)
            if overlap > 0.0:
                acc += dt * overlap / (hi - lo)
        out[i] = acc
    return out


@njit(cache=True)
def first_drawup_index(values, c, sign):
    """First sample index where sign*(f - running min of sign*f) >= c, or -1.

    Returns the index and the running minimum of ``sign * f`` there.
    """
    run_min = sign * values[0]
    for i in range(1, values.size):
        v = sign * values[i]
        if v - run_min >= c:
            return i, run_min
        if v < run_min:
            run_min = v
    return -1, run_min


@njit(cache=True)
def push_level_hits(values, c, x, levels):
    """Fractional sample index at which U + D of the tube clamp first reaches each level.

    ``levels`` must be sorted; -1 marks levels not reached. Stops after the
    last level, so only the needed prefix of the path is scanned.
    """
    out = np.full(levels.size, -1.0)
    j = 0
    while j < levels.size and levels[j] <= 0.0:
        out[j] = 0.0
        j += 1
    half = 0.5 * c
    cur = x
    total = 0.0
    for i in range(1, values.size):
        if j == levels.size:
            break
        prev = total
        lo = values[i] - half
        hi = values[i] + half
        if cur < lo:
            total += lo - cur
            cur = lo
        elif cur > hi:
            total += cur - hi
            cur = hi
        while j < levels.size and total >= levels[j]:
            out[j] = i - 1 + (levels[j] - prev) / (total - prev)
            j += 1
    return out
