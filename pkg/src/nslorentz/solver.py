"""Picard construction of mild solutions, restarts and the blowup monitor."""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field as PField, field_validator

from .constants import ConstantsTable, eta_table, parse_r
from .duhamel import (
    Trajectory,
    bilinear_B_trajectory,
    heat_trajectory,
    node_norms,
    time_lattice,
    weighted_sup,
)
from .errors import (
    CannotExtendError,
    DomainError,
    NoContractionError,
    SubcriticalityError,
    ValidationError,
)
from .fields import Field, Grid, max_divergence
from .lorentz import LorentzIndex, lorentz_quasinorm

DIVERGENCE_TOLERANCE = 1e-8


class SolveConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    n: int = PField(ge=2, le=3)
    N: int
    L: float = PField(gt=0)
    T: float = PField(gt=0)
    J: int = PField(ge=4)
    picard_tol: float = PField(default=1e-10, gt=0)
    max_iterations: int = PField(default=64, ge=1)
    indices: list[str] = PField(default_factory=lambda: ["2,2", "infbar,inf"])
    r: float = math.inf
    r_list: list[float] = PField(default_factory=lambda: [math.inf])

    @field_validator("indices")
    @classmethod
    def _indices(cls, v):
        for tok in v:
            LorentzIndex.parse(tok)
        return v

    @field_validator("r", mode="before")
    @classmethod
    def _r(cls, v):
        return parse_r(v)

    @field_validator("r_list", mode="before")
    @classmethod
    def _rl(cls, v):
        return [parse_r(x) for x in v]

    @property
    def grid(self) -> Grid:
        return Grid(n=self.n, N=self.N, L=self.L)

    @property
    def lorentz_indices(self) -> list[LorentzIndex]:
        return [LorentzIndex.parse(t) for t in self.indices]


def time_exponent(n: int, r: float) -> float:
    """(1 - n/r) / 2."""
    return 0.5 * (1.0 - (0.0 if math.isinf(r) else n / r))


def weak_norm(f: Field, r: float) -> float:
    """||f||*_{r,inf}; the sup norm for r = inf."""
    if math.isinf(r):
        return f.sup_norm()
    return lorentz_quasinorm(f, LorentzIndex.make(r, math.inf))


def weighted_norm(traj: Trajectory, n: int, r: float) -> float:
    """sup over t > 0 of t^(n/2r) ||u(t)||_inf (the J^{-n/r} sup-variant norm)."""
    sigma = 0.0 if math.isinf(r) else -n / r
    return weighted_sup(traj.times, traj.sup_norms(), sigma)


def existence_horizon(f_weak_norm: float, n: int, r: float, table: ConstantsTable) -> float:
    """Largest T with 4 eta T^((1-n/r)/2) ||f||*_{r,inf} < 1 (as a supremum)."""
    r = parse_r(r)
    if not r > n:
        raise SubcriticalityError(f"need r > n, got r={r}, n={n}")
    if f_weak_norm < 0:
        raise DomainError("norm must be non-negative")
    if f_weak_norm == 0:
        return math.inf
    e = time_exponent(n, r)
    return (4.0 * table.eta(r) * f_weak_norm) ** (-1.0 / e)


def contraction_lambda(g0: float) -> float:
    """Smaller root of Lambda = g0 + Lambda^2."""
    if g0 < 0:
        raise DomainError("g0 must be non-negative")
    if g0 >= 0.25:
        raise NoContractionError(f"g0 = {g0} >= 1/4: the smallness condition fails")
    return 2.0 * g0 / (1.0 + math.sqrt(1.0 - 4.0 * g0))


def _threshold(eta: float, n: int, r: float, remaining: float) -> float:
    if remaining <= 0:
        return math.inf
    return 1.0 / (4.0 * eta * remaining ** time_exponent(n, r))


def blowup_threshold(n: int, r: float, T: float, t0: float, table: ConstantsTable) -> float:
    """1 / (4 eta (T - t0)^((1-n/r)/2))."""
    r = parse_r(r)
    if not r > n:
        raise SubcriticalityError(f"need r > n, got r={r}, n={n}")
    if not (0 < t0 < T < math.inf):
        raise DomainError("need 0 < t0 < T < inf")
    return _threshold(table.eta(r), n, r, T - t0)


@dataclass
class SolveReport:
    trajectory: Trajectory
    heat: Trajectory
    differences: list[float]
    weighted_differences: list[float]
    g0: float
    lam: float | None
    converged: bool
    residual: float
    config: SolveConfig
    table: ConstantsTable
    node_norms: dict = dc_field(default_factory=dict)
    thresholds: dict = dc_field(default_factory=dict)
    overlap_difference: float | None = None

    @property
    def iterations(self) -> int:
        return len(self.differences)

    @property
    def ratios(self) -> list[float]:
        d = self.differences
        return [d[i] / d[i - 1] for i in range(1, len(d)) if d[i - 1] > 0]

    @property
    def weighted_ratios(self) -> list[float]:
        d = self.weighted_differences
        return [d[i] / d[i - 1] for i in range(1, len(d)) if d[i - 1] > 0]

    @property
    def existence_horizon(self) -> float:
        cfg = self.config
        return existence_horizon(weak_norm(self.trajectory.field(0), cfg.r), cfg.n, cfg.r, self.table)

    def summary(self) -> dict:
        return {
            "g0": self.g0,
            "lambda": self.lam,
            "iterations": self.iterations,
            "converged": self.converged,
            "existence_horizon": self.existence_horizon,
            "residual": self.residual,
        }


def _threshold_series(times: np.ndarray, n: int, r_list, table: ConstantsTable, T: float) -> dict:
    return {r: np.array([_threshold(table.eta(r), n, r, T - t) for t in times]) for r in r_list}


def picard_solve(
    f: Field,
    cfg: SolveConfig,
    table: ConstantsTable | None = None,
    initial_guess: Literal["heat", "zero"] = "heat",
) -> SolveReport:
    """Iterate u^{m+1} = S[f] - B[u^m, u^m] on the whole time lattice."""
    grid = cfg.grid
    if f.grid != grid or f.rank != 1:
        raise ValidationError("initial datum must be a vector field on the configured grid")
    if max_divergence(f) > DIVERGENCE_TOLERANCE * (1 + f.sup_norm()):
        raise ValidationError("initial datum is not divergence-free")
    if table is None:
        table = eta_table(cfg.n, sorted(set([cfg.r, *cfg.r_list])))
    times = time_lattice(cfg.T, cfg.J)
    u0 = heat_trajectory(f, times)
    r, n = cfg.r, cfg.n
    g0 = table.delta(r) * cfg.T ** time_exponent(n, r) * weighted_norm(u0, n, r)
    lam = contraction_lambda(g0) if g0 < 0.25 else None

    u = u0 if initial_guess == "heat" else u0 * 0.0
    diffs, wdiffs = [], []
    converged = False
    for _ in range(cfg.max_iterations):
        nxt = u0 - bilinear_B_trajectory(u, u)
        delta = nxt - u
        diffs.append(float(delta.sup_norms().max()))
        wdiffs.append(weighted_norm(delta, n, r))
        u = nxt
        if diffs[-1] <= cfg.picard_tol:
            converged = True
            break
    residual = float((u - u0 + bilinear_B_trajectory(u, u)).sup_norms().max())
    norms = {idx.label: node_norms(u, idx) for idx in cfg.lorentz_indices}
    norms["sup_norm"] = u.sup_norms()
    thresholds = _threshold_series(times, n, cfg.r_list, table, cfg.T)
    return SolveReport(u, u0, diffs, wdiffs, g0, lam, converged, residual, cfg, table, norms, thresholds)


def extend(
    report: SolveReport,
    t0: float,
    extra_T: float,
    cfg: SolveConfig | None = None,
    table: ConstantsTable | None = None,
) -> SolveReport:
    """Restart from u(t0), solve on (0, extra_T) and splice onto the existing run."""
    cfg = cfg or report.config
    table = table or report.table
    traj = report.trajectory
    j0 = traj.node_index(t0)
    if extra_T < 0:
        raise DomainError("extra_T must be non-negative")
    if extra_T == 0:
        return report
    n, r = cfg.n, cfg.r
    start = traj.field(j0)
    w = weak_norm(start, r)
    if 4.0 * table.eta(r) * extra_T ** time_exponent(n, r) * w >= 1.0:
        thr = _threshold(table.eta(r), n, r, extra_T)
        raise CannotExtendError(
            f"restart criterion fails: ||u(t0)||*_(r,inf) = {w:.6g} >= threshold {thr:.6g}", thr
        )
    dt = float(traj.times[1] - traj.times[0])
    steps = max(1, int(round(extra_T / dt)))
    sub_cfg = cfg.model_copy(update={"T": steps * dt, "J": steps})
    new = picard_solve(start, sub_cfg, table)

    new_times = traj.times[j0] + new.trajectory.times
    overlap = None
    diffs = []
    for k, t in enumerate(new_times):
        j = np.nonzero(np.isclose(traj.times, t, rtol=1e-12, atol=1e-14))[0]
        if j.size:
            diffs.append(float(np.sqrt(np.sum((traj.values[j[0]] - new.trajectory.values[k]) ** 2, axis=0)).max()))
    if diffs:
        overlap = max(diffs)

    times = np.concatenate([traj.times[: j0 + 1], new_times[1:]])
    vals = np.concatenate([traj.values[: j0 + 1], new.trajectory.values[1:]])
    joined = Trajectory(traj.grid, 1, times, vals)
    heat_joined = heat_trajectory(traj.field(0), times)
    full_T = float(times[-1])
    norms = {idx.label: node_norms(joined, idx) for idx in cfg.lorentz_indices}
    norms["sup_norm"] = joined.sup_norms()
    return SolveReport(
        trajectory=joined,
        heat=heat_joined,
        differences=new.differences,
        weighted_differences=new.weighted_differences,
        g0=new.g0,
        lam=new.lam,
        converged=report.converged and new.converged,
        residual=new.residual,
        config=cfg.model_copy(update={"T": full_T, "J": len(times) - 1}),
        table=table,
        node_norms=norms,
        thresholds=_threshold_series(times, n, cfg.r_list, table, full_T),
        overlap_difference=overlap,
    )


@dataclass(frozen=True)
class MonitorRow:
    t: float
    r: float
    norm: float
    threshold: float
    margin: float
    lifespan_bound: float


def blowup_monitor(traj: Trajectory, r_list, table: ConstantsTable, T: float | None = None) -> list[MonitorRow]:
    """Per node and r: ||u(t0)||*_{r,inf}, the threshold for blowup at T, and the criterion lifespan bound.

    ``margin = threshold - norm``; a positive margin rules out blowup at T.
    ``lifespan_bound`` is the remaining time during which no blowup can occur.
    """
    n = traj.grid.n
    T = float(traj.times[-1]) if T is None else float(T)
    rows = []
    for r in (parse_r(x) for x in r_list):
        if not r > n:
            raise SubcriticalityError(f"need r > n, got r={r}, n={n}")
        eta = table.eta(r)
        for j, t in enumerate(traj.times):
            w = weak_norm(traj.field(j), r)
            thr = _threshold(eta, n, r, T - t)
            rows.append(MonitorRow(float(t), r, w, thr, thr - w, existence_horizon(w, n, r, table)))
    return rows
