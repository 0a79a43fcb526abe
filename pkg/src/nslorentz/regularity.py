"""Empirical continuity-in-time and Hoelder-in-space diagnostics for trajectories."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .duhamel import Trajectory
from .errors import DomainError, InsufficientDataError
from .fields import Field
from .lorentz import LorentzIndex, lorentz_value


def _offsets(grid, radius: float) -> list[tuple[int, ...]]:
    """Integer displacements d with 0 < |d| h <= radius, one of each +-d pair."""
    m = int(math.floor(radius / grid.h + 1e-12))
    rng = range(-m, m + 1)
    out = []
    for d in np.array(np.meshgrid(*([list(rng)] * grid.n), indexing="ij")).reshape(grid.n, -1).T:
        d = tuple(int(x) for x in d)
        if d <= tuple([0] * grid.n):
            continue  # keep the lexicographically positive half
        if 0 < math.sqrt(sum(x * x for x in d)) * grid.h <= radius * (1 + 1e-12):
            out.append(d)
    return out


def holder_quotient(field: Field, alpha: float, radius_cap: float | None = None) -> float:
    """max over node pairs with 0 < |x - y| <= radius_cap of |u(x) - u(y)| / |x - y|^alpha."""
    if not 0 < alpha < 1:
        raise DomainError("alpha must lie in (0, 1)")
    g = field.grid
    cap = g.L / 8 if radius_cap is None else float(radius_cap)
    if cap < g.h:
        raise DomainError("radius_cap must be at least one grid spacing")
    lead = field.rank
    axes = tuple(range(lead, lead + g.n))
    best = 0.0
    for d in _offsets(g, cap):
        diff = np.roll(field.values, shift=d, axis=axes) - field.values
        mag = np.sqrt(np.sum(diff**2, axis=tuple(range(lead)))) if lead else np.abs(diff)
        dist = math.sqrt(sum(x * x for x in d)) * g.h
        best = max(best, float(mag.max()) / dist**alpha)
    return best


def holder_bound_bracket(traj: Trajectory, t0_node: int, t_node: int, alpha: float) -> float:
    """||u(t0)||_inf / (t-t0)^(alpha/2) + int_{t0}^{t} ||u(s)||_inf^2 / (t-s)^((1+alpha)/2) ds.

    On each sub-interval the squared sup norm takes its midpoint value (the
    mean of the endpoint values) and the singular factor is integrated exactly.
    """
    if not 0 < alpha < 1:
        raise DomainError("alpha must lie in (0, 1)")
    if not t0_node < t_node:
        raise DomainError("need t0 < t")
    times = traj.times
    t, t0 = times[t_node], times[t0_node]
    sup = traj.sup_norms()
    first = sup[t0_node] / (t - t0) ** (alpha / 2)
    e = (1 - alpha) / 2
    s = times[t0_node : t_node + 1]
    sq = sup[t0_node : t_node + 1] ** 2
    mid = 0.5 * (sq[:-1] + sq[1:])
    weights = ((t - s[:-1]) ** e - (t - s[1:]) ** e) / e
    return float(first + np.sum(mid * weights))


def continuity_modulus(traj: Trajectory, idx: LorentzIndex) -> np.ndarray:
    """||u(t_{j+1}) - u(t_j)|| for consecutive nodes with t_j > 0.

    The gap out of t = 0 is left to ``initial_distance``.
    """
    pos = np.nonzero(traj.times > 0)[0]
    if pos.size < 3:
        raise InsufficientDataError("need at least three nodes with t > 0")
    v = traj.values
    return np.array([lorentz_value(Field(traj.grid, traj.rank, v[b] - v[a]), idx) for a, b in zip(pos[:-1], pos[1:])])


def initial_distance(traj: Trajectory, idx: LorentzIndex) -> float:
    """||u(t_1) - u(0)|| for the first positive node."""
    if traj.times[0] != 0 or len(traj) < 2:
        raise InsufficientDataError("need a t = 0 node and one more")
    return lorentz_value(Field(traj.grid, traj.rank, traj.values[1] - traj.values[0]), idx)


@dataclass
class RegularityRow:
    t: float
    alpha: float
    quotient: float
    bracket: float

    @property
    def ratio(self) -> float:
        return self.quotient / self.bracket if self.bracket > 0 else math.inf


@dataclass
class RegularityReport:
    rows: list[RegularityRow]
    gaps: dict  # index label -> array of per-gap moduli
    gap_times: np.ndarray
    t0: float

    def ratio_spread(self, alpha: float, t_min: float = 0.0) -> float:
        r = [row.ratio for row in self.rows if row.alpha == alpha and row.t >= t_min]
        return max(r) / min(r)


def regularity_report(
    traj: Trajectory,
    alphas=(0.5,),
    indices: list[LorentzIndex] | None = None,
    radius_cap: float | None = None,
    t0_fraction: float = 0.125,
) -> RegularityReport:
    """Hoelder quotients and brackets at every node after t0, plus continuity gaps.

    ``t0`` is the node nearest ``t0_fraction * T``; keeping it at a fixed
    fraction of the horizon makes brackets comparable under time refinement.
    """
    T = traj.times[-1]
    j0 = int(np.argmin(np.abs(traj.times - t0_fraction * T)))
    if j0 == 0 and traj.times[0] == 0 and len(traj) > 1:
        j0 = 1
    rows = []
    for a in alphas:
        for j in range(j0 + 1, len(traj)):
            rows.append(
                RegularityRow(
                    float(traj.times[j]), float(a),
                    holder_quotient(traj.field(j), a, radius_cap),
                    holder_bound_bracket(traj, j0, j, a),
                )
            )
    indices = indices or [LorentzIndex.make(2, 2)]
    gaps = {idx.label: continuity_modulus(traj, idx) for idx in indices}
    return RegularityReport(rows, gaps, traj.times[traj.times > 0][1:], float(traj.times[j0]))
