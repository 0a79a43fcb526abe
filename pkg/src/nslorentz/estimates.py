"""Randomized audit of the a priori estimates with the computed constants.

Each check returns one ``EstimateRecord`` per sample; an estimate is violated
when ``lhs > rhs + slack``.  Random trajectories are heat flows of random
solenoidal data multiplied by a smooth random amplitude in time, so they stay
divergence-free at every node.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import ConstantsTable, eta_table
from .duhamel import (
    PathSpec,
    Trajectory,
    bilinear_B_trajectory,
    heat_trajectory,
    node_norms,
    path_norm,
    time_lattice,
    weighted_sup,
)
from .fields import Grid, RandomSolenoidal, generate_initial_data
from .lorentz import LorentzIndex, Rearrangement, conjugate_exponent, lorentz_quasinorm

SLACK = 1e-10


@dataclass(frozen=True)
class EstimateRecord:
    estimate: str
    sample: int
    lhs: float
    rhs: float

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs if self.rhs > 0 else (0.0 if self.lhs == 0 else math.inf)

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + SLACK * max(1.0, abs(self.rhs))


def random_trajectory(grid: Grid, times: np.ndarray, rng: np.random.Generator) -> Trajectory:
    """a(t) S[f](t) with f random solenoidal and a(t) = 1 + c sin(w t + phi)."""
    seed = int(rng.integers(0, 2**31 - 1))
    f = generate_initial_data(
        RandomSolenoidal(seed=seed, amplitude=float(rng.uniform(0.5, 2.0)), spectral_slope=float(rng.uniform(-3, -1))),
        grid,
    )
    heat = heat_trajectory(f, times)
    c, w, phi = rng.uniform(0, 0.5), rng.uniform(0, 20), rng.uniform(0, 2 * math.pi)
    amp = 1.0 + c * np.sin(w * times + phi)
    return Trajectory(grid, 1, heat.times, heat.values * amp.reshape((-1,) + (1,) * (heat.values.ndim - 1)))


def _sup_weighted(traj: Trajectory, weight_power: float) -> float:
    """sup over t > 0 of t^weight_power ||u(t)||_inf."""
    return weighted_sup(traj.times, traj.sup_norms(), -2.0 * weight_power)


def bilinear_check(u: Trajectory, v: Trajectory, r: float, table: ConstantsTable, T: float, sample: int) -> EstimateRecord:
    """sup t^(n/2r)||B[u,v]||_inf <= delta T^((1-n/r)/2) * prod of sup t^(n/2r)||.||_inf."""
    n = u.grid.n
    x = 0.0 if math.isinf(r) else n / r
    b = bilinear_B_trajectory(u, v)
    lhs = _sup_weighted(b, x / 2)
    rhs = table.delta(r) * T ** ((1 - x) / 2) * _sup_weighted(u, x / 2) * _sup_weighted(v, x / 2)
    return EstimateRecord(f"bilinear_r{_tok(r)}", sample, lhs, rhs)


def heat_contraction_check(f_traj: Trajectory, p: float, q: float, sample: int) -> EstimateRecord:
    """sup over t > 0 of ||S[f](t)||_{p,q} <= ||f||_{p,q} (norms, not quasinorms)."""
    idx = LorentzIndex.make(p, q, norm=True)
    norms = node_norms(f_traj, idx)
    pos = f_traj.times > 0
    return EstimateRecord(f"heat_L{_tok(p)}_{_tok(q)}", sample, float(norms[pos].max()), float(norms[~pos][0]))


def heat_smoothing_check(f_traj: Trajectory, p: float, alpha: float, sample: int) -> EstimateRecord:
    """sup t^(n/2p) ||S[f](t)||_inf <= p' alpha ||f||*_{p,inf}."""
    n = f_traj.grid.n
    lhs = _sup_weighted(f_traj, n / (2 * p))
    rhs = conjugate_exponent(p) * alpha * lorentz_quasinorm(f_traj.field(0), LorentzIndex.make(p, math.inf))
    return EstimateRecord(f"heat_smoothing_p{_tok(p)}", sample, lhs, rhs)


def product_check(u: Trajectory, v: Trajectory, r: float, sample: int) -> EstimateRecord:
    """sup t^(n/r) ||u (x) v||*_{r/2,inf} <= sup t^(n/2r)||u||_{r,inf} * sup t^(n/2r)||v||_{r,inf}."""
    n = u.grid.n
    sigma = -n / r
    # |u (x) v| = |u| |v| pointwise; no dealiasing, this is the exact product
    prod = np.sqrt(np.einsum("mi...,mi...->m...", u.values, u.values) * np.einsum("mi...,mi...->m...", v.values, v.values))
    half = LorentzIndex.make(r / 2, math.inf)
    full = LorentzIndex.make(r, math.inf, norm=True)
    pn = np.array([lorentz_quasinorm(Rearrangement.from_samples(prod[j], u.grid.cell_measure), half) for j in range(len(u))])
    lhs = weighted_sup(u.times, pn, 2 * sigma)
    rhs = path_norm(u, PathSpec(family="K", index=full, sigma=sigma)) * path_norm(v, PathSpec(family="K", index=full, sigma=sigma))
    return EstimateRecord(f"product_r{_tok(r)}", sample, lhs, rhs)


def inclusion_check(u: Trajectory, a1: float, a2: float, idx: LorentzIndex, sample: int) -> EstimateRecord:
    """||u||*_{L^{a1,1}} <= C T^(1/a1 - 1/a2) ||u||*_{J^{-2/a2}} with C = (1/a1) / (1/a1 - 1/a2)."""
    T = float(u.times[-1])
    norms = node_norms(u, idx)
    lhs = path_norm(u, PathSpec(family="L", index=idx, alpha=a1, beta=1.0), norms)
    c = inclusion_constant(a1, a2)
    rhs = c * T ** (1 / a1 - 1 / a2) * path_norm(u, PathSpec(family="J", index=idx, sigma=-2.0 / a2), norms)
    return EstimateRecord(f"inclusion_{_tok(a1)}_{_tok(a2)}", sample, lhs, rhs)


def inclusion_constant(a1: float, a2: float) -> float:
    if not 1 < a1 < a2:
        raise ValueError("need 1 < a1 < a2")
    return (1 / a1) / (1 / a1 - 1 / a2)


def _tok(x: float) -> str:
    return "inf" if math.isinf(x) else f"{x:g}"


def run_harness(
    samples: int = 20,
    n: int = 2,
    N: int = 32,
    J: int = 16,
    T: float = 0.5,
    L: float = 2 * math.pi,
    seed: int = 0,
    table: ConstantsTable | None = None,
) -> list[EstimateRecord]:
    """All four estimate families on ``samples`` random trajectories each."""
    grid = Grid(n=n, N=N, L=L)
    times = time_lattice(T, J)
    rng = np.random.default_rng(seed)
    rs = [math.inf, 2.0 * n]
    table = table or eta_table(n, rs)
    out: list[EstimateRecord] = []
    for k in range(samples):
        u = random_trajectory(grid, times, rng)
        v = random_trajectory(grid, times, rng)
        for r in rs:
            out.append(bilinear_check(u, v, r, table, T, k))
        heat = heat_trajectory(u.field(0), times)
        for p, q in ((2.0, 2.0), (2.0, 1.0), (3.0, 1.5), (4.0, math.inf)):
            out.append(heat_contraction_check(heat, p, q, k))
        for p in (3.0, 4.0, 8.0):
            out.append(heat_smoothing_check(heat, p, table.alpha, k))
        for r in (4.0, 6.0):
            out.append(product_check(u, v, r, k))
        out.append(inclusion_check(u, 3.0, 6.0, LorentzIndex.make(2, 2), k))
    return out


def violations(records: list[EstimateRecord]) -> list[EstimateRecord]:
    return [r for r in records if not r.holds]
