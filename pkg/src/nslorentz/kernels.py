"""Heat and Oseen kernels on the periodic grid, with certification helpers.

Real-space kernel profiles are inverse transforms of
``(i xi)^alpha exp(-t |xi|^2) h(xi)`` on the frequency lattice of the torus,
scaled by ``1 / cell_measure`` so that grid sums times ``cell_measure``
approximate integrals over R^n.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field as dc_field
from typing import Iterable, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field as PField, model_validator
from scipy import optimize

from .errors import AccuracyError, DomainError, LorentzIndexError, NumericError
from .fields import Grid, irfft
from .lorentz import LorentzIndex, Rearrangement, lorentz_quasinorm

MIN_BOX_RATIO = 10.0


def heat_kernel(t: float, x, n: int):
    """(4 pi t)^(-n/2) exp(-|x|^2 / 4t); ``x`` has trailing axis of length n (or is scalar for n=1)."""
    if not t > 0:
        raise DomainError("heat kernel needs t > 0")
    x = np.asarray(x, dtype=float)
    if n == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        r2 = x * x
    else:
        r2 = np.sum(x * x, axis=-1)
    out = (4 * math.pi * t) ** (-n / 2) * np.exp(-r2 / (4 * t))
    return float(out) if np.ndim(out) == 0 else out


class MultiplierSpec(BaseModel):
    """Kernel family and derivative selection.

    With ``alpha=None`` the profile holds every derivative of total order
    ``order`` (so ``order=1`` on the oseen tag is the full gradient tensor);
    with a multi-index ``alpha`` only that derivative is kept.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    tag: Literal["heat", "oseen"]
    order: int = PField(default=0, ge=0, le=2)
    alpha: tuple[int, ...] | None = None

    @model_validator(mode="after")
    def _check(self):
        if self.alpha is not None:
            if any(a < 0 for a in self.alpha) or sum(self.alpha) > 2:
                raise ValueError("multi-index entries must be >= 0 with |alpha| <= 2")
            if sum(self.alpha) != self.order:
                object.__setattr__(self, "order", sum(self.alpha))
        return self

    @property
    def tensor_rank(self) -> int:
        return 2 if self.tag == "oseen" else 0

    @property
    def derivative_order(self) -> int:
        return self.order

    @property
    def name(self) -> str:
        if self.alpha is not None:
            return f"{self.tag}:" + "".join(map(str, self.alpha))
        return f"{self.tag}:d{self.order}"


def check_box(grid: Grid, t: float, strict: bool = False) -> None:
    """Warn (or raise in strict mode) if L < 10 sqrt(t)."""
    if grid.L < MIN_BOX_RATIO * math.sqrt(t):
        msg = f"box L={grid.L} is smaller than {MIN_BOX_RATIO} sqrt(t) at t={t}"
        if strict:
            raise AccuracyError(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=3)


def _component_indices(spec: MultiplierSpec, n: int) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """List of (tensor index, derivative axes) pairs making up the profile."""
    tens = list(itertools.product(range(n), repeat=spec.tensor_rank))
    if spec.alpha is not None:
        if len(spec.alpha) != n:
            raise DomainError(f"multi-index length {len(spec.alpha)} does not match n={n}")
        derivs = [tuple(d for d, a in enumerate(spec.alpha) for _ in range(a))]
    else:
        derivs = list(itertools.product(range(n), repeat=spec.order))
    return [(ti, di) for ti in tens for di in derivs]


def multiplier(spec: MultiplierSpec, t: float, grid: Grid, tensor_index=(), deriv_axes=()) -> np.ndarray:
    """Fourier multiplier of one profile component on the half-spectrum lattice.

    The oseen multiplier at xi = 0 is (1 - 1/n) delta_ij, the spherical mean
    of the projector, which keeps the trace identity exact on the torus.
    Nyquist modes are cleared.
    """
    if not t > 0:
        raise DomainError("kernels need t > 0")
    xi = grid.wavevectors()
    lam = grid.xi_squared()
    m = np.exp(-t * lam).astype(complex)
    if spec.tag == "oseen":
        i, j = tensor_index
        with np.errstate(divide="ignore", invalid="ignore"):
            proj = (1.0 if i == j else 0.0) - np.where(lam > 0, xi[i] * xi[j] / np.where(lam > 0, lam, 1.0), 0.0)
        zero = (0,) * grid.n
        proj = np.broadcast_to(proj, lam.shape).copy()
        proj[zero] = (1.0 - 1.0 / grid.n) if i == j else 0.0
        m = m * proj
    for d in deriv_axes:
        m = m * (1j * xi[d])
    return np.where(grid.nyquist_mask(), 0.0, m)


@dataclass
class KernelProfile:
    """Sampled kernel components on a grid at one time.

    ``values`` has shape ``(n_components,) + grid.shape``; ``indices`` lists
    the (tensor index, derivative axes) pair of each component.
    """

    spec: MultiplierSpec
    t: float
    grid: Grid
    indices: list
    values: np.ndarray
    _cache: dict = dc_field(default_factory=dict, repr=False)

    def component(self, tensor_index=(), deriv_axes=()) -> np.ndarray:
        return self.values[self.indices.index((tuple(tensor_index), tuple(deriv_axes)))]

    def magnitude(self) -> np.ndarray:
        if "mag" not in self._cache:
            self._cache["mag"] = np.sqrt(np.sum(self.values**2, axis=0))
        return self._cache["mag"]

    @property
    def l1_norm(self) -> float:
        if "l1" not in self._cache:
            self._cache["l1"] = float(self.magnitude().sum() * self.grid.cell_measure)
        return self._cache["l1"]

    def lp1_quasinorm(self, p: float) -> float:
        if math.isinf(p):
            raise LorentzIndexError("L^{p,1} needs p < inf")
        key = ("lp1", float(p))
        if key not in self._cache:
            r = Rearrangement.from_samples(self.magnitude(), self.grid.cell_measure)
            self._cache[key] = lorentz_quasinorm(r, LorentzIndex.make(p, 1.0))
        return self._cache[key]


def kernel_grid(spec: MultiplierSpec, t: float, grid: Grid, strict: bool = False) -> KernelProfile:
    """Evaluate every component of the kernel profile at time ``t``."""
    if not t > 0:
        raise DomainError("kernels need t > 0")
    check_box(grid, t, strict)
    idx = _component_indices(spec, grid.n)
    scale = 1.0 / grid.cell_measure
    vals = np.empty((len(idx),) + grid.shape)
    for c, (ti, di) in enumerate(idx):
        vals[c] = irfft(multiplier(spec, t, grid, ti, di), grid) * scale
    if not np.all(np.isfinite(vals)):
        raise NumericError("non-finite kernel values")
    return KernelProfile(spec, t, grid, idx, vals)


def kernel_magnitude(spec: MultiplierSpec, t: float, grid: Grid) -> np.ndarray:
    """Pointwise Frobenius magnitude without storing the components.

    Uses T_ij = T_ji to evaluate only i <= j for the oseen tag.
    """
    if not t > 0:
        raise DomainError("kernels need t > 0")
    scale = 1.0 / grid.cell_measure
    acc = np.zeros(grid.shape)
    for ti, di in _component_indices(spec, grid.n):
        if spec.tag == "oseen" and ti[0] > ti[1]:
            continue
        weight = 2.0 if spec.tag == "oseen" and ti[0] < ti[1] else 1.0
        comp = irfft(multiplier(spec, t, grid, ti, di), grid) * scale
        acc += weight * comp * comp
    return np.sqrt(acc)


# --- pointwise decay --------------------------------------------------------


class _TrigEvaluator:
    """Exact evaluation of the grid's trigonometric interpolant at arbitrary points."""

    def __init__(self, spec: MultiplierSpec, t: float, grid: Grid):
        self.grid = grid
        comps = [multiplier(spec, t, grid, ti, di) for ti, di in _component_indices(spec, grid.n)]
        weight = np.full(grid.spectral_shape, 2.0)
        weight[..., 0] = 1.0
        weight[..., -1] = 1.0  # Nyquist column (already zero)
        self.coeffs = np.stack(comps) * weight / grid.volume
        self.xi = [np.asarray(k).ravel() for k in grid.wavevectors()]

    def magnitude(self, x) -> float:
        phase = np.ones((1,) * self.grid.n, dtype=complex)
        for d, k in enumerate(self.xi):
            shape = [1] * self.grid.n
            shape[d] = k.size
            phase = phase * np.exp(1j * k * x[d]).reshape(shape)
        vals = np.real(np.sum(self.coeffs * phase, axis=tuple(range(1, self.grid.n + 1))))
        return float(np.sqrt(np.sum(vals * vals)))


@dataclass(frozen=True)
class DecayReport:
    constant: float
    per_t: dict
    variation: float

    @property
    def stable(self) -> bool:
        return self.variation <= 0.05


def _weighted_decay_at(spec: MultiplierSpec, t: float, grid: Grid, window: float, polish: bool) -> float:
    power = grid.n + spec.order
    mag = kernel_magnitude(spec, t, grid)
    disp = grid.centered_mesh()
    r = np.sqrt(sum(d * d for d in disp))
    reach = min(window * math.sqrt(t), 0.5 * grid.L)
    w = np.where(r <= reach, mag * (1 + r / math.sqrt(t)) ** power, -np.inf)
    k = int(np.argmax(w))
    best = float(w.flat[k])
    if not np.isfinite(best):
        raise NumericError("non-finite weighted kernel value")
    if not polish:
        return best
    ev = _TrigEvaluator(spec, t, grid)
    x0 = np.array([d.flat[k] for d in disp])

    def neg(x):
        rr = float(np.linalg.norm(x))
        if rr > reach:
            return 0.0
        return -ev.magnitude(x) * (1 + rr / math.sqrt(t)) ** power

    res = optimize.minimize(
        neg, x0, method="Nelder-Mead",
        options={"xatol": 1e-10 * math.sqrt(t), "fatol": 1e-15 * best, "maxiter": 4000,
                 "initial_simplex": x0 + np.vstack([np.zeros(grid.n), np.eye(grid.n) * grid.h * 0.5])},
    )
    return max(best, float(-res.fun))


def pointwise_decay_constant(
    spec: MultiplierSpec,
    t_samples: Iterable[float],
    grid: Grid,
    window: float = 8.0,
    polish: bool = True,
) -> DecayReport:
    """sup over t and |x| <= window sqrt(t) of |D^a K(t,x)| t^((n+|a|)/2) (1+|x|/sqrt t)^(n+|a|)."""
    ts = [float(t) for t in t_samples]
    if len(ts) < 2:
        raise DomainError("need at least two time samples")
    per_t = {}
    for t in ts:
        if not t > 0:
            raise DomainError("kernels need t > 0")
        per_t[t] = _weighted_decay_at(spec, t, grid, window, polish) * t ** ((grid.n + spec.order) / 2)
    vals = np.array(list(per_t.values()))
    return DecayReport(float(vals.max()), per_t, float((vals.max() - vals.min()) / vals.max()))


# --- Lorentz profile ----------------------------------------------------------


@dataclass(frozen=True)
class LorentzProfileReport:
    t: float
    values: dict
    scaled_values: dict
    measured_exponents: dict
    expected_exponents: dict

    def max_exponent_error(self) -> float:
        return max(abs(self.measured_exponents[p] - self.expected_exponents[p]) for p in self.values)


def expected_lp1_exponent(spec: MultiplierSpec, n: int, p: float) -> float:
    """-(|alpha| + n/p') / 2."""
    return -(spec.order + n * (1 - 1 / p)) / 2


def kernel_lorentz_profile(
    spec: MultiplierSpec,
    t: float,
    p_list: Iterable[float],
    n: int = 2,
    N: int = 256,
    box_scale: float = 40.0,
    scale_factor: float = 4.0,
) -> LorentzProfileReport:
    """L^{p,1} quasinorms of the profile at t and scale_factor * t.

    Each time uses a box of side ``box_scale * sqrt(t)`` with the same N, so
    the discrete profiles are exact rescalings and the measured exponents
    test the scaling law of the implementation itself.
    """
    ps = [float(p) for p in p_list]
    if any(math.isinf(p) for p in ps):
        raise LorentzIndexError("L^{p,1} needs p < inf")
    if any(p < 1 for p in ps):
        raise LorentzIndexError("L^{p,1} needs p >= 1")
    if not t > 0:
        raise DomainError("kernels need t > 0")
    t2 = scale_factor * t
    out, out2 = {}, {}
    for tt, store in ((t, out), (t2, out2)):
        grid = Grid(n=n, N=N, L=box_scale * math.sqrt(tt))
        mag = kernel_magnitude(spec, tt, grid)
        r = Rearrangement.from_samples(mag, grid.cell_measure)
        for p in ps:
            store[p] = lorentz_quasinorm(r, LorentzIndex.make(p, 1.0))
    measured = {p: math.log(out2[p] / out[p]) / math.log(scale_factor) for p in ps}
    expected = {p: expected_lp1_exponent(spec, n, p) for p in ps}
    return LorentzProfileReport(t, out, out2, measured, expected)


# --- semigroup and continuity ---------------------------------------------------


def semigroup_residual(spec: MultiplierSpec, s: float, t: float, grid: Grid) -> float:
    """max |Phi(s) * K(t) - K(s+t)| with the discrete periodic convolution."""
    if not (s > 0 and t > 0):
        raise DomainError("semigroup check needs s, t > 0")
    heat = kernel_grid(MultiplierSpec(tag="heat"), s, grid)
    k_t = kernel_grid(spec, t, grid)
    k_st = kernel_grid(spec, s + t, grid)
    hh = np.fft.rfftn(heat.values[0], axes=grid.axes)
    conv = np.fft.irfftn(hh * np.fft.rfftn(k_t.values, axes=grid.axes), s=grid.shape, axes=grid.axes)
    conv *= grid.cell_measure
    return float(np.max(np.abs(conv - k_st.values)))


def l1_difference(spec: MultiplierSpec, t: float, delta: float, grid: Grid) -> float:
    """||K(t + delta) - K(t)||_{L^1} on the grid (Frobenius magnitude)."""
    a = kernel_grid(spec, t, grid).values
    b = kernel_grid(spec, t + delta, grid).values
    return float(np.sqrt(np.sum((b - a) ** 2, axis=0)).sum() * grid.cell_measure)
