"""Heat semigroup, Duhamel operator, bilinear operator and path-space norms.

Trajectories are sampled on time lattices that start at ``t = 0``.  The
Duhamel integral of a tensor trajectory is evaluated mode by mode with the
exact exponential integrator for piecewise-linear data:

    I(t_{m+1}) = e^{-z} I(t_m) + h [w_{m+1} (g1(z) - g2(z)) + w_m g2(z)],
    z = h |xi|^2,  g1(z) = int_0^1 e^{-z s} ds,  g2(z) = int_0^1 s e^{-z s} ds,

followed by contraction with ``i xi_k P_ij(xi)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from .errors import DomainError, RankError, ValidationError
from .fields import Field, Grid, irfft, leray_multiplier_apply, rfft
from .lorentz import LorentzIndex, Rearrangement, lorentz_value

SERIES_CUTOFF = 0.5


@dataclass(frozen=True)
class Trajectory:
    """Time-indexed fields of one rank on one grid.

    ``values`` has shape ``(len(times),) + (n,) * rank + grid.shape``.
    """

    grid: Grid
    rank: int
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or t.size == 0:
            raise ValidationError("a trajectory needs at least one time node")
        if t[0] < 0 or np.any(np.diff(t) <= 0):
            raise ValidationError("times must be non-negative and strictly increasing")
        v = np.asarray(self.values, dtype=float)
        expected = (t.size,) + (self.grid.n,) * self.rank + self.grid.shape
        if v.shape != expected:
            raise ValidationError(f"values have shape {v.shape}, expected {expected}")
        if not np.all(np.isfinite(v)):
            raise ValidationError("trajectory samples must be finite")
        if v is self.values and v.flags.writeable:
            v = v.copy()
        v.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_fields(cls, times: Sequence[float], fields: Sequence[Field]) -> "Trajectory":
        if not fields:
            raise ValidationError("empty trajectory")
        g, rank = fields[0].grid, fields[0].rank
        if any(f.grid != g or f.rank != rank for f in fields):
            raise ValidationError("all nodes must share grid and rank")
        return cls(g, rank, np.asarray(times, dtype=float), np.stack([f.values for f in fields]))

    def __len__(self) -> int:
        return self.times.size

    def field(self, j: int) -> Field:
        return Field(self.grid, self.rank, self.values[j])

    def node_index(self, t: float, rtol: float = 1e-12) -> int:
        j = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[j] - t) > rtol * max(1.0, abs(t)):
            raise DomainError(f"t = {t} is not a node of the trajectory")
        return j

    def positive_nodes(self) -> np.ndarray:
        return np.nonzero(self.times > 0)[0]

    def magnitudes(self) -> np.ndarray:
        axes = tuple(range(1, 1 + self.rank))
        return np.sqrt(np.sum(self.values**2, axis=axes)) if self.rank else np.abs(self.values)

    def sup_norms(self) -> np.ndarray:
        """Pointwise-magnitude sup norm at every node."""
        return self.magnitudes().reshape(len(self), -1).max(axis=1)

    def __add__(self, other: "Trajectory") -> "Trajectory":
        _check_lattice(self, other)
        return Trajectory(self.grid, self.rank, self.times, self.values + other.values)

    def __sub__(self, other: "Trajectory") -> "Trajectory":
        _check_lattice(self, other)
        return Trajectory(self.grid, self.rank, self.times, self.values - other.values)

    def __mul__(self, scalar: float) -> "Trajectory":
        return Trajectory(self.grid, self.rank, self.times, self.values * float(scalar))

    __rmul__ = __mul__

    def shifted(self, j0: int) -> "Trajectory":
        """Time shift: nodes from ``j0`` on, re-based so that node ``j0`` sits at t = 0."""
        return Trajectory(self.grid, self.rank, self.times[j0:] - self.times[j0], self.values[j0:])

    def restricted(self, j_end: int) -> "Trajectory":
        """Nodes 0..j_end inclusive."""
        return Trajectory(self.grid, self.rank, self.times[: j_end + 1], self.values[: j_end + 1])

    def sup_difference(self, other: "Trajectory") -> float:
        return float((self - other).sup_norms().max())


def _check_lattice(a: Trajectory, b: Trajectory) -> None:
    if a.grid != b.grid or a.rank != b.rank or a.times.shape != b.times.shape or not np.array_equal(a.times, b.times):
        raise ValidationError("trajectories do not share grid, rank and time lattice")


# --- heat semigroup -------------------------------------------------------------


def apply_heat(f: Field, t: float) -> Field:
    """S[f](t): multiply each mode by exp(-t |xi|^2)."""
    if t < 0:
        raise DomainError("heat flow needs t >= 0")
    if t == 0:
        return f
    g = f.grid
    return Field(g, f.rank, irfft(rfft(f.values, g) * np.exp(-t * g.xi_squared()), g))


def heat_trajectory(f: Field, times: Sequence[float]) -> Trajectory:
    """S[f] on a time lattice (the t = 0 node holds f itself)."""
    g = f.grid
    fh = rfft(f.values, g)
    lam = g.xi_squared()
    vals = np.stack([f.values if t == 0 else irfft(fh * np.exp(-t * lam), g) for t in times])
    return Trajectory(g, f.rank, np.asarray(times, dtype=float), vals)


def time_lattice(T: float, J: int) -> np.ndarray:
    """Uniform nodes 0, T/J, ..., T."""
    return np.linspace(0.0, T, J + 1)


# --- exponential integrator weights ---------------------------------------------


def phi_weights(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """g1(z) = (1 - e^-z)/z and g2(z) = int_0^1 s e^{-z s} ds, stable near z = 0."""
    z = np.asarray(z, dtype=float)
    small = z < SERIES_CUTOFF
    zs = np.where(small, z, 0.0)
    zl = np.where(small, 1.0, z)
    g1 = -np.expm1(-zl) / zl
    g2 = (1 - (1 + zl) * np.exp(-zl)) / zl**2
    s1 = np.zeros_like(z)
    s2 = np.zeros_like(z)
    term = np.ones_like(z)
    for m in range(20):
        s1 += term / (m + 1)
        s2 += term / (m + 2)
        term = term * (-zs) / (m + 1)
    return np.where(small, s1, g1), np.where(small, s2, g2)


# --- Duhamel operator -------------------------------------------------------------


def _project_divergence(wh: np.ndarray, grid: Grid) -> np.ndarray:
    """sum_jk i xi_k P_ij w_jk for tensor coefficients of shape (n, n, ...)."""
    xi = grid.wavevectors()
    div = np.stack([sum(1j * xi[k] * wh[j, k] for k in range(grid.n)) for j in range(grid.n)])
    return leray_multiplier_apply(div, grid)


def _integrate_modes(gh: np.ndarray, times: np.ndarray, grid: Grid) -> np.ndarray:
    """Exact exponential integration of piecewise-linear mode data, all nodes."""
    lam = grid.xi_squared()
    out = np.zeros_like(gh)
    acc = np.zeros_like(gh[0])
    for m in range(len(times) - 1):
        h = times[m + 1] - times[m]
        z = lam * h
        g1, g2 = phi_weights(z)
        acc = np.exp(-z) * acc + h * (gh[m + 1] * (g1 - g2) + gh[m] * g2)
        out[m + 1] = acc
    return out


def _require_origin(traj: Trajectory) -> None:
    if traj.times[0] != 0:
        raise DomainError("Duhamel integrals need a trajectory starting at t = 0")


def duhamel_A_trajectory(w: Trajectory) -> Trajectory:
    """A[w] at every node of the lattice of a tensor trajectory ``w``."""
    if w.rank != 2:
        raise RankError("the Duhamel operator acts on tensor trajectories")
    _require_origin(w)
    g = w.grid
    gh = np.stack([_project_divergence(rfft(w.values[m], g), g) for m in range(len(w))])
    ih = _integrate_modes(gh, w.times, g)
    return Trajectory(g, 1, w.times, np.stack([irfft(c, g) for c in ih]))


def duhamel_A(w: Trajectory, t: float, interpolate: bool = False) -> Field:
    """A[w](t) at a node, or between nodes with ``interpolate=True``."""
    if len(w) == 0:
        raise ValidationError("empty trajectory")
    if t > w.times[-1] * (1 + 1e-12) or t < 0:
        raise DomainError(f"t = {t} lies outside the trajectory")
    try:
        j = w.node_index(t)
    except DomainError:
        if not interpolate:
            raise
        j = None
    if j is not None:
        return duhamel_A_trajectory(w.restricted(j)).field(-1)
    k = int(np.searchsorted(w.times, t)) - 1
    frac = (t - w.times[k]) / (w.times[k + 1] - w.times[k])
    mid = (1 - frac) * w.values[k] + frac * w.values[k + 1]
    times = np.concatenate([w.times[: k + 1], [t]])
    vals = np.concatenate([w.values[: k + 1], mid[None]])
    return duhamel_A_trajectory(Trajectory(w.grid, 2, times, vals)).field(-1)


def dealias_mask(grid: Grid) -> np.ndarray:
    """True on modes kept by the 2/3 rule (|k_d| < N/3 on every axis)."""
    keep = np.ones(grid.spectral_shape, dtype=bool)
    for k in grid.integer_wavevectors():
        keep &= np.abs(k) < grid.N / 3
    return keep


def tensor_product(u: Trajectory, v: Trajectory) -> Trajectory:
    """Nodewise u (x) v with the 2/3-rule applied to each product."""
    _check_lattice(u, v)
    if u.rank != 1:
        raise RankError("tensor_product expects vector trajectories")
    g = u.grid
    keep = dealias_mask(g)
    prod = np.einsum("mi...,mj...->mij...", u.values, v.values)
    vals = irfft(rfft(prod, g) * keep, g)
    return Trajectory(g, 2, u.times, vals)


def bilinear_B_trajectory(u: Trajectory, v: Trajectory) -> Trajectory:
    """B[u, v] = A[u (x) v] at every node."""
    return duhamel_A_trajectory(tensor_product(u, v))


def bilinear_B(u: Trajectory, v: Trajectory, t: float) -> Field:
    return bilinear_B_trajectory(u, v).field(u.node_index(t))


# --- path norms ---------------------------------------------------------------------


class PathSpec(BaseModel):
    """Path-space family with its time indices and spatial Lorentz index."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    family: Literal["J", "K", "L"]
    index: LorentzIndex
    sigma: float = 0.0
    alpha: float | None = None
    beta: float | None = None

    @model_validator(mode="after")
    def _check(self):
        if self.family == "L":
            if self.alpha is None or self.beta is None:
                raise ValueError("family L needs alpha and beta")
            if not self.alpha > 1 or not self.beta >= 1:
                raise ValueError("family L needs alpha in (1, inf] and beta >= 1")
            if math.isinf(self.alpha) and not math.isinf(self.beta):
                raise ValueError("alpha = inf requires beta = inf")
        return self

    def time_index(self) -> LorentzIndex:
        return LorentzIndex.make(self.alpha, self.beta, norm=self.index.norm)


def node_norms(traj: Trajectory, idx: LorentzIndex) -> np.ndarray:
    """Spatial Lorentz (quasi)norm at each node."""
    return np.array([lorentz_value(traj.field(j), idx) for j in range(len(traj))])


def weighted_sup(times: np.ndarray, norms: np.ndarray, sigma: float) -> float:
    """max over t > 0 nodes of t^(-sigma/2) * norm; +inf if the weight overflows."""
    pos = times > 0
    with np.errstate(over="ignore"):
        w = times[pos] ** (-sigma / 2)
    if not np.all(np.isfinite(w)):
        return math.inf
    vals = w * norms[pos]
    return float(vals.max()) if vals.size else 0.0


def time_series_rearrangement(times: np.ndarray, norms: np.ndarray) -> Rearrangement:
    """Step function in t: the value at node t_j covers (t_{j-1}, t_j]."""
    pos = np.nonzero(times > 0)[0]
    prev = np.where(pos > 0, times[np.maximum(pos - 1, 0)], 0.0)
    return Rearrangement.from_steps(norms[pos], times[pos] - prev)


def path_norm(traj: Trajectory, spec: PathSpec, norms: np.ndarray | None = None) -> float:
    """J/K/L path (quasi)norm of a trajectory, using nodes with t > 0."""
    if norms is None:
        norms = node_norms(traj, spec.index)
    if spec.family in ("J", "K"):
        return weighted_sup(traj.times, norms, spec.sigma)
    return lorentz_value(time_series_rearrangement(traj.times, norms), spec.time_index())
