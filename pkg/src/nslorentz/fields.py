"""Periodic grids, sampled fields and spectral operations on them.

The torus of side ``L`` stands in for R^n.  All transforms are real FFTs over
the trailing ``n`` axes of an array whose leading axes index tensor
components, so a vector field on a 2-D grid has shape ``(2, N, N)`` and a
tensor field ``(2, 2, N, N)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field as PField, field_validator

from .errors import RankError, UnsupportedSpecError, ValidationError


class Grid(BaseModel):
    """Uniform periodic grid with ``N`` points per axis on a box of side ``L``."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    n: int = PField(ge=1, le=4)
    N: int
    L: float = PField(gt=0)

    @field_validator("N")
    @classmethod
    def _power_of_two(cls, v: int) -> int:
        if v < 4 or v & (v - 1):
            raise ValueError(f"N must be a power of two >= 4, got {v}")
        return v

    @property
    def h(self) -> float:
        return self.L / self.N

    @property
    def cell_measure(self) -> float:
        return (self.L / self.N) ** self.n

    @property
    def volume(self) -> float:
        return self.L**self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.n

    @property
    def spectral_shape(self) -> tuple[int, ...]:
        return (self.N,) * (self.n - 1) + (self.N // 2 + 1,)

    @property
    def axes(self) -> tuple[int, ...]:
        """Trailing spatial axes for an array with leading component axes."""
        return tuple(range(-self.n, 0))

    def coordinates(self) -> np.ndarray:
        """Node positions along one axis, ``0, h, ..., L - h``."""
        return np.arange(self.N) * self.h

    def mesh(self) -> list[np.ndarray]:
        """Dense coordinate arrays, one per axis (``indexing='ij'``)."""
        x = self.coordinates()
        return np.meshgrid(*([x] * self.n), indexing="ij")

    def centered_mesh(self) -> list[np.ndarray]:
        """Coordinates folded into ``[-L/2, L/2)`` (periodic displacement from 0)."""
        x = self.coordinates()
        x = np.where(x >= self.L / 2, x - self.L, x)
        return np.meshgrid(*([x] * self.n), indexing="ij")

    def wavevectors(self) -> tuple[np.ndarray, ...]:
        """Physical frequencies xi = 2 pi k / L, broadcastable to ``spectral_shape``."""
        return _wavevectors(self.n, self.N, self.L)

    def integer_wavevectors(self) -> tuple[np.ndarray, ...]:
        return _wavevectors(self.n, self.N, 2 * np.pi)

    def xi_squared(self) -> np.ndarray:
        return _xi_squared(self.n, self.N, self.L)

    def nyquist_mask(self) -> np.ndarray:
        """True on every mode that carries a Nyquist index along some axis."""
        return _nyquist_mask(self.n, self.N)


@lru_cache(maxsize=32)
def _wavevectors(n: int, N: int, L: float) -> tuple[np.ndarray, ...]:
    full = np.fft.fftfreq(N, d=L / N) * 2 * np.pi
    half = np.fft.rfftfreq(N, d=L / N) * 2 * np.pi
    out = []
    for d in range(n):
        k = half if d == n - 1 else full
        shape = [1] * n
        shape[d] = k.size
        arr = k.reshape(shape)
        arr.setflags(write=False)
        out.append(arr)
    return tuple(out)


@lru_cache(maxsize=32)
def _xi_squared(n: int, N: int, L: float) -> np.ndarray:
    lam = sum(k**2 for k in _wavevectors(n, N, L))
    lam = np.broadcast_to(lam, (N,) * (n - 1) + (N // 2 + 1,)).copy()
    lam.setflags(write=False)
    return lam


@lru_cache(maxsize=32)
def _nyquist_mask(n: int, N: int) -> np.ndarray:
    mask = np.zeros((N,) * (n - 1) + (N // 2 + 1,), dtype=bool)
    for d in range(n):
        idx = [slice(None)] * n
        idx[d] = N // 2
        mask[tuple(idx)] = True
    mask.setflags(write=False)
    return mask


def rfft(values: np.ndarray, grid: Grid) -> np.ndarray:
    return np.fft.rfftn(values, axes=grid.axes)


def irfft(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    return np.fft.irfftn(coeffs, s=grid.shape, axes=grid.axes)


@dataclass(frozen=True)
class Field:
    """Real samples of a scalar (rank 0), vector (rank 1) or tensor (rank 2) field."""

    grid: Grid
    rank: int
    values: np.ndarray

    def __post_init__(self):
        if self.rank not in (0, 1, 2):
            raise RankError(f"rank must be 0, 1 or 2, got {self.rank}")
        expected = (self.grid.n,) * self.rank + self.grid.shape
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != expected:
            raise ValidationError(f"values have shape {vals.shape}, expected {expected}")
        if not np.all(np.isfinite(vals)):
            raise ValidationError("field samples must be finite")
        if vals is self.values and vals.flags.writeable:
            vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n_components(self) -> int:
        return self.grid.n**self.rank

    def magnitude(self) -> np.ndarray:
        """Pointwise Euclidean (vector) or Frobenius (tensor) magnitude."""
        if self.rank == 0:
            return np.abs(self.values)
        comp_axes = tuple(range(self.rank))
        return np.sqrt(np.sum(self.values**2, axis=comp_axes))

    def sup_norm(self) -> float:
        return float(self.magnitude().max())

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(self.values**2) * self.grid.cell_measure))

    def __add__(self, other: "Field") -> "Field":
        _check_compatible(self, other)
        return Field(self.grid, self.rank, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        _check_compatible(self, other)
        return Field(self.grid, self.rank, self.values - other.values)

    def __mul__(self, scalar: float) -> "Field":
        return Field(self.grid, self.rank, self.values * float(scalar))

    __rmul__ = __mul__

    @classmethod
    def zeros(cls, grid: Grid, rank: int = 1) -> "Field":
        return cls(grid, rank, np.zeros((grid.n,) * rank + grid.shape))


def _check_compatible(a: Field, b: Field) -> None:
    if a.grid != b.grid or a.rank != b.rank:
        raise ValidationError("fields live on different grids or have different ranks")


@dataclass(frozen=True)
class SpectralField:
    """Half-spectrum Fourier coefficients of a real field (``rfftn`` layout)."""

    grid: Grid
    rank: int
    coeffs: np.ndarray

    def hermitian_defect(self) -> float:
        """Largest violation of c(-k) = conj(c(k)) on the self-conjugate planes.

        Only the planes where the last index is 0 or N/2 hold both a mode and
        its conjugate partner in the half-spectrum layout.
        """
        g = self.grid
        lead = self.coeffs.ndim - g.n
        worst = 0.0
        for last in (0, g.N // 2):
            plane = self.coeffs[(Ellipsis, last)]
            flipped = plane
            for ax in range(lead, lead + g.n - 1):
                flipped = np.roll(np.flip(flipped, axis=ax), 1, axis=ax)
            worst = max(worst, float(np.max(np.abs(plane - np.conj(flipped)), initial=0.0)))
        return worst


def forward(field: Field) -> SpectralField:
    return SpectralField(field.grid, field.rank, rfft(field.values, field.grid))


def inverse(spec: SpectralField) -> Field:
    return Field(spec.grid, spec.rank, irfft(spec.coeffs, spec.grid))


def leray_multiplier_apply(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    """Apply P(xi) = I - xi xi^T / |xi|^2 to vector coefficients of shape (n, ...).

    The zero mode passes through unchanged and Nyquist modes are cleared.
    """
    xi = grid.wavevectors()
    lam = grid.xi_squared()
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(lam > 0, 1.0 / np.where(lam > 0, lam, 1.0), 0.0)
    dot = sum(xi[d] * coeffs[d] for d in range(grid.n))
    out = np.stack([coeffs[i] - xi[i] * dot * inv for i in range(grid.n)])
    out[(slice(None),) + np.nonzero(grid.nyquist_mask())] = 0.0
    return out


def leray_project(field: Field) -> Field:
    """Spectral Leray projection onto divergence-free fields."""
    if field.rank != 1:
        raise RankError("leray_project expects a vector field")
    g = field.grid
    return Field(g, 1, irfft(leray_multiplier_apply(rfft(field.values, g), g), g))


def divergence(field: Field) -> Field:
    """Spectral divergence i xi . u_hat, with Nyquist modes dropped."""
    if field.rank != 1:
        raise RankError("divergence expects a vector field")
    g = field.grid
    xi = g.wavevectors()
    uh = rfft(field.values, g)
    dh = sum(1j * xi[d] * uh[d] for d in range(g.n))
    dh = np.where(g.nyquist_mask(), 0.0, dh)
    return Field(g, 0, irfft(dh, g))


def gradient(field: Field) -> Field:
    """Spectral gradient of a scalar field."""
    if field.rank != 0:
        raise RankError("gradient expects a scalar field")
    g = field.grid
    fh = rfft(field.values, g)
    fh = np.where(g.nyquist_mask(), 0.0, fh)
    xi = g.wavevectors()
    return Field(g, 1, irfft(np.stack([1j * xi[d] * fh for d in range(g.n)]), g))


def max_divergence(field: Field) -> float:
    return float(np.max(np.abs(divergence(field).values)))


# --- initial data ---------------------------------------------------------


class TaylorGreen(BaseModel):
    """u = A (-cos(kx) sin(ky), sin(kx) cos(ky)) with k = 2 pi / L."""

    model_config = ConfigDict(frozen=True, extra="forbid")
    kind: Literal["taylor-green"] = "taylor-green"
    amplitude: float = 1.0


class GaussianVortex(BaseModel):
    """Swirl around the box centre, peak speed ``amplitude`` at radius ``width``."""

    model_config = ConfigDict(frozen=True, extra="forbid")
    kind: Literal["gaussian-vortex"] = "gaussian-vortex"
    amplitude: float = 1.0
    width: float = PField(default=1.0, gt=0)


class RandomSolenoidal(BaseModel):
    """Band-limited random divergence-free field with power-law spectrum.

    ``kmax`` bounds the integer wavenumber magnitude; by default ``N // 6`` so
    that quadratic products stay inside the dealiased band.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")
    kind: Literal["random-solenoidal"] = "random-solenoidal"
    seed: int = 0
    spectral_slope: float = -2.0
    amplitude: float = 1.0
    kmax: int | None = PField(default=None, ge=1)


DataSpec = Annotated[
    Union[TaylorGreen, GaussianVortex, RandomSolenoidal], PField(discriminator="kind")
]


def taylor_green_field(grid: Grid, amplitude: float = 1.0, t: float = 0.0) -> Field:
    """Taylor-Green vortex at time ``t`` of the unit-viscosity heat flow."""
    if grid.n != 2:
        raise UnsupportedSpecError("taylor-green data exists only for n = 2")
    k = 2 * np.pi / grid.L
    x, y = grid.mesh()
    decay = amplitude * np.exp(-2 * k * k * t)
    return Field(grid, 1, decay * np.stack([-np.cos(k * x) * np.sin(k * y), np.sin(k * x) * np.cos(k * y)]))


def _gaussian_vortex(grid: Grid, amplitude: float, width: float) -> Field:
    disp = [x - grid.L / 2 for x in grid.mesh()]
    r2 = sum(d * d for d in disp)
    # stream function whose swirl speed peaks at r = width with value amplitude
    psi = Field(grid, 0, -amplitude * width * np.exp(0.5 - r2 / (2 * width**2)))
    grad = gradient(psi).values
    comps = [-grad[1], grad[0]] + [np.zeros(grid.shape)] * (grid.n - 2)
    return Field(grid, 1, np.stack(comps))


def _random_solenoidal(grid: Grid, spec: RandomSolenoidal) -> Field:
    rng = np.random.default_rng(spec.seed)
    noise = rng.standard_normal((grid.n,) + grid.shape)
    kmax = spec.kmax if spec.kmax is not None else max(1, grid.N // 6)
    kint = np.sqrt(sum(k**2 for k in grid.integer_wavevectors()))
    with np.errstate(divide="ignore"):
        weight = np.where((kint > 0) & (kint <= kmax), kint**spec.spectral_slope, 0.0)
    coeffs = leray_multiplier_apply(rfft(noise, grid) * weight, grid)
    vals = irfft(coeffs, grid)
    peak = np.sqrt(np.sum(vals**2, axis=0)).max()
    if peak > 0:
        vals = vals * (spec.amplitude / peak)
    return Field(grid, 1, vals)


def generate_initial_data(spec: DataSpec, grid: Grid) -> Field:
    """Build a divergence-free initial velocity field."""
    if isinstance(spec, TaylorGreen):
        return taylor_green_field(grid, spec.amplitude)
    if isinstance(spec, GaussianVortex):
        if grid.n < 2:
            raise UnsupportedSpecError("gaussian-vortex needs n >= 2")
        return _gaussian_vortex(grid, spec.amplitude, spec.width)
    if isinstance(spec, RandomSolenoidal):
        if grid.n < 2:
            raise UnsupportedSpecError("random-solenoidal needs n >= 2")
        return _random_solenoidal(grid, spec)
    raise UnsupportedSpecError(f"unknown initial-data spec {spec!r}")
