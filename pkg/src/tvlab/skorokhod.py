"""Two-sided Skorokhod reflection of a sampled path inside a band of width c.

The regulated output ``g`` starts at an anchor ``x`` and moves only when the
path would otherwise leave the tube ``|f - g| <= c/2``. Upward pushes are
accumulated in ``U`` and happen while ``h = f - g`` sits at ``+c/2``; downward
pushes in ``D`` while ``h`` sits at ``-c/2``.

With the anchor chosen from the first drawup/drawdown time, ``g`` is the
minimal-total-variation function in the tube and ``U + D`` is the truncated
variation of the path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from ._kernels import tube_clamp
from .errors import DomainError
from .paths import SampledPath, first_drawdown_time, first_drawup_time


@dataclass(frozen=True)
class Anchor:
    x: float
    trigger: Literal["up", "down", "none"]
    trigger_time: float | None = None


@dataclass(frozen=True)
class TubeSolution:
    path: SampledPath
    c: float
    x: float
    g: np.ndarray
    U: np.ndarray
    D: np.ndarray
    anchor: Anchor | None = None

    @property
    def times(self) -> np.ndarray:
        return self.path.times

    @property
    def h(self) -> np.ndarray:
        return self.path.values - self.g

    @property
    def regulated(self) -> SampledPath:
        return SampledPath(self.path.times, self.g)


def _check_c(c: float) -> None:
    if not c > 0:
        raise DomainError(f"band width c must be positive, got {c}")


def select_anchor(path: SampledPath, c: float) -> Anchor:
    """Starting level of the lazy minimiser.

    Whichever of the first drawup and first drawdown of size ``c`` happens
    first decides the anchor: after an up-trigger the path sits on the top
    edge of the tube, after a down-trigger on the bottom edge. Without a
    trigger the whole path fits in one tube and ``g`` never moves.
    """
    _check_c(c)
    up = first_drawup_time(path, c)
    down = first_drawdown_time(path, c)
    if up is None and down is None:
        # range < c: stay at f(a) unless that would let the path leave the tube
        lo = float(path.values.max()) - 0.5 * c
        hi = float(path.values.min()) + 0.5 * c
        return Anchor(float(np.clip(path.values[0], lo, hi)), "none")
    # a linear segment is monotone, so both triggers never share a time
    assert up is None or down is None or up.time != down.time
    if down is None or (up is not None and up.time < down.time):
        return Anchor(up.level - 0.5 * c, "up", up.time)
    return Anchor(down.level + 0.5 * c, "down", down.time)


def reflect(path: SampledPath, c: float, x: float) -> TubeSolution:
    _check_c(c)
    f0 = float(path.values[0])
    tol = 1e-12 * max(1.0, abs(f0), c)
    if abs(x - f0) > 0.5 * c + tol:
        raise DomainError(f"anchor x={x} lies outside the initial tube around f(a)={f0}")
    g, up, down = tube_clamp(path.values, float(c), float(x))
    return TubeSolution(path, float(c), float(x), g, up, down)


def solve(path: SampledPath, c: float) -> TubeSolution:
    anchor = select_anchor(path, c)
    sol = reflect(path, c, anchor.x)
    return TubeSolution(sol.path, sol.c, sol.x, sol.g, sol.U, sol.D, anchor)
