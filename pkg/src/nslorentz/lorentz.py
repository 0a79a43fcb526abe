"""Distribution functions, decreasing rearrangements and Lorentz (quasi)norms.

Everything here acts on step functions.  A sampled field is a step function
with one piece per grid cell, so its rearrangement is the list of sorted
magnitudes with uniform spacing ``cell_measure``.  All Lorentz integrals of a
step function are evaluated piece by piece in closed form, except the
maximal-function norm for ``1 < q < inf`` which uses adaptive quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from scipy import integrate, special

from .errors import DomainError, LorentzIndexError, ValidationError
from .fields import Field

INF = math.inf
QUAD_EPSREL = 1e-10


def unit_ball_volume(n: int) -> float:
    """omega_n = pi^(n/2) / Gamma(n/2 + 1)."""
    return math.pi ** (n / 2) / special.gamma(n / 2 + 1)


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere in R^n, n * omega_n."""
    return n * unit_ball_volume(n)


def conjugate_exponent(p: float) -> float:
    """Hoelder conjugate p' with 1' = inf and inf' = 1."""
    if p == 1:
        return INF
    if math.isinf(p):
        return 1.0
    return p / (p - 1)


def _fmt(x: float) -> str:
    return "inf" if math.isinf(x) else f"{x:g}"


class LorentzIndex(BaseModel):
    """Index pair (p, q), the sup variant flag and the norm/quasinorm flag.

    ``bar=True`` marks the true-supremum exponent written "infbar"; on a grid
    it evaluates exactly like ``p = inf``.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    p: float
    q: float
    bar: bool = False
    norm: bool = False

    @model_validator(mode="after")
    def _check(self):
        if not self.p >= 1 or not self.q >= 1:
            raise ValueError("Lorentz indices need p >= 1 and q >= 1")
        if self.bar and not math.isinf(self.p):
            raise ValueError("the sup variant requires p = inf")
        if math.isinf(self.p) and not math.isinf(self.q):
            raise ValueError("p = inf requires q = inf")
        if self.norm and self.p <= 1:
            raise ValueError("the f** norm needs p > 1")
        return self

    @classmethod
    def make(cls, p, q, *, bar=False, norm=False) -> "LorentzIndex":
        try:
            return cls(p=p, q=q, bar=bar, norm=norm)
        except Exception as exc:  # pydantic wraps the message
            raise LorentzIndexError(str(exc)) from exc

    @classmethod
    def parse(cls, token: str) -> "LorentzIndex":
        """Parse ``"p,q"`` or ``"p,q,norm"``; p may be ``inf`` or ``infbar``."""
        parts = [s.strip().lower() for s in token.split(",")]
        if len(parts) not in (2, 3) or (len(parts) == 3 and parts[2] not in ("norm", "quasi")):
            raise LorentzIndexError(f"cannot parse Lorentz index {token!r}")
        bar = parts[0] == "infbar"
        try:
            p = INF if bar else float(parts[0])
            q = float(parts[1])
        except ValueError as exc:
            raise LorentzIndexError(f"cannot parse Lorentz index {token!r}") from exc
        return cls.make(p, q, bar=bar, norm=len(parts) == 3 and parts[2] == "norm")

    @property
    def token(self) -> str:
        p = "infbar" if self.bar else _fmt(self.p)
        return f"{p},{_fmt(self.q)}" + (",norm" if self.norm else "")

    @property
    def label(self) -> str:
        """Column-safe name such as ``L2_1_star`` or ``Linfbar_inf``."""
        p = "infbar" if self.bar else _fmt(self.p)
        return f"L{p}_{_fmt(self.q)}" + ("" if self.norm else "_star")


@dataclass(frozen=True)
class Rearrangement:
    """Non-increasing step function f* on (0, inf).

    ``breakpoints`` has one more entry than ``values``; piece j covers
    ``[breakpoints[j], breakpoints[j + 1])`` with height ``values[j]``.
    """

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if b.ndim != 1 or v.ndim != 1 or b.size != v.size + 1:
            raise ValidationError("breakpoints must have exactly one more entry than values")
        if b.size and b[0] != 0:
            raise ValidationError("breakpoints must start at 0")
        if np.any(np.diff(b) <= 0):
            raise ValidationError("breakpoints must be strictly increasing")
        if np.any(v < 0) or np.any(np.diff(v) > 0):
            raise ValidationError("values must be non-negative and non-increasing")
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_steps(cls, values, measures) -> "Rearrangement":
        """Rearrange a step function given as (height, measure) pairs."""
        v = np.abs(np.asarray(values, dtype=float)).ravel()
        m = np.asarray(measures, dtype=float).ravel()
        if v.shape != m.shape:
            raise ValidationError("values and measures differ in length")
        keep = (v > 0) & (m > 0)
        v, m = v[keep], m[keep]
        order = np.argsort(-v, kind="stable")
        v, m = v[order], m[order]
        return cls(np.concatenate([[0.0], np.cumsum(m)]), v)

    @classmethod
    def from_samples(cls, samples, cell_measure: float) -> "Rearrangement":
        s = np.abs(np.asarray(samples, dtype=float)).ravel()
        s = s[s > 0]
        v = -np.sort(-s, kind="stable")
        b = np.arange(v.size + 1) * float(cell_measure)
        return cls(b, v)

    @property
    def size(self) -> int:
        return self.values.size

    @property
    def total_measure(self) -> float:
        return float(self.breakpoints[-1]) if self.size else 0.0

    @cached_property
    def cumulative(self) -> np.ndarray:
        """F_j = integral of f* over (0, t_j), with F_0 = 0."""
        return np.concatenate([[0.0], np.cumsum(self.values * np.diff(self.breakpoints))])

    def __call__(self, t) -> np.ndarray:
        """Evaluate f*(t) (right-continuous)."""
        t = np.asarray(t, dtype=float)
        j = np.searchsorted(self.breakpoints, t, side="right")
        padded = np.concatenate([[self.values[0] if self.size else 0.0], self.values, [0.0]])
        return padded[j]

    def maximal(self, t) -> np.ndarray:
        """f**(t) = (1/t) * integral of f* over (0, t), exact for steps."""
        t = np.asarray(t, dtype=float)
        if self.size == 0:
            return np.zeros_like(t)
        j = np.clip(np.searchsorted(self.breakpoints, t, side="right"), 1, self.size + 1)
        F = self.cumulative
        vals = np.concatenate([self.values, [0.0]])
        start = self.breakpoints[np.minimum(j - 1, self.size)]
        inside = F[j - 1] + vals[j - 1] * (t - start)
        return np.where(j > self.size, F[-1], inside) / t


def _as_rearrangement(obj) -> Rearrangement:
    if isinstance(obj, Rearrangement):
        return obj
    if isinstance(obj, Field):
        return decreasing_rearrangement(obj)
    raise ValidationError(f"expected Field or Rearrangement, got {type(obj).__name__}")


def decreasing_rearrangement(field: Field) -> Rearrangement:
    """f* of the pointwise magnitude, one piece of width cell_measure per nonzero node."""
    return Rearrangement.from_samples(field.magnitude(), field.grid.cell_measure)


def distribution_function(obj, y: float) -> float:
    """lambda_f(y): measure of the set where |f| > y."""
    if not y > 0:
        raise DomainError("the distribution function needs y > 0")
    if isinstance(obj, Field):
        return float(np.count_nonzero(obj.magnitude() > y)) * obj.grid.cell_measure
    r = _as_rearrangement(obj)
    k = int(np.searchsorted(-r.values, -y, side="left"))
    return float(r.breakpoints[k])


def maximal_function(obj, t):
    """f**(t); accepts scalar or array ``t``."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(~(t_arr > 0)):
        raise DomainError("the maximal function needs t > 0")
    out = _as_rearrangement(obj).maximal(t_arr)
    return float(out) if out.ndim == 0 else out


def _power_increments(b: np.ndarray, e: float) -> np.ndarray:
    """t_j^e - t_{j-1}^e for every piece, without cancellation."""
    hi = b[1:]
    lo = b[:-1]
    out = np.empty_like(hi)
    out[0] = hi[0] ** e
    out[1:] = hi[1:] ** e * -np.expm1(e * np.log(lo[1:] / hi[1:]))
    return out


def _check_idx(idx: LorentzIndex, norm: bool) -> None:
    if norm and not idx.p > 1:
        raise LorentzIndexError("the f** norm needs p > 1")


def lorentz_quasinorm(obj, idx: LorentzIndex) -> float:
    """||f||*_{p,q} from the rearrangement."""
    _check_idx(idx, False)
    r = _as_rearrangement(obj)
    if r.size == 0:
        return 0.0
    v, b = r.values, r.breakpoints
    if math.isinf(idx.p):
        return float(v[0])
    if math.isinf(idx.q):
        return float(np.max(b[1:] ** (1 / idx.p) * v))
    scale = v[0]
    terms = (v / scale) ** idx.q * _power_increments(b, idx.q / idx.p)
    return float(scale * np.sum(terms) ** (1 / idx.q))


def lorentz_norm(obj, idx: LorentzIndex) -> float:
    """||f||_{p,q} built on f** (requires p > 1)."""
    _check_idx(idx, True)
    r = _as_rearrangement(obj)
    if r.size == 0:
        return 0.0
    p, q = idx.p, idx.q
    v, b, F = r.values, r.breakpoints, r.cumulative
    if math.isinf(p):
        return float(v[0])
    a = 1 / p
    if math.isinf(q):
        # each piece of t^a f**(t) is maximised at an endpoint, and the tail decreases
        return float(np.max(b[1:] ** (a - 1) * F[1:]))
    c = F[:-1] - v * b[:-1]  # f**(t) = v_j + c_j / t on piece j
    tail_mass, t_end = F[-1], b[-1]
    if q == 1:
        main = np.sum(v * _power_increments(b, a))
        lo, hi = b[1:-1], b[2:]
        corr = np.sum(c[1:] * (lo ** (a - 1) - hi ** (a - 1)))
        return float(main + (corr + tail_mass * t_end ** (a - 1)) / (p - 1))

    scale = v[0]
    vs, cs, Fs = v / scale, c / scale, tail_mass / scale
    first = vs[0] ** q * b[1] ** (q * a)
    tail = Fs**q * t_end ** (-q * (1 - a)) / (p - 1)
    rest = 0.0
    if r.size > 1:
        lo, width = b[1:-1], np.diff(b[1:])
        vj, cj = vs[1:], cs[1:]

        def integrand(s):
            t = lo + s * width
            return np.sum(width * t ** (q * a - 1) * (vj + cj / t) ** q)

        rest, _ = integrate.quad(integrand, 0.0, 1.0, epsabs=0.0, epsrel=QUAD_EPSREL, limit=200)
        rest *= q * a
    return float(scale * (first + rest + tail) ** (1 / q))


def lorentz_value(obj, idx: LorentzIndex) -> float:
    """Dispatch on the index's norm flag."""
    return lorentz_norm(obj, idx) if idx.norm else lorentz_quasinorm(obj, idx)


def lp_norm(obj, p: float) -> float:
    """Discrete L^p norm: (sum |f|^p h^n)^(1/p), or the max for p = inf."""
    if isinstance(obj, Field):
        mag = obj.magnitude()
        if math.isinf(p):
            return float(mag.max())
        s = mag.max()
        if s == 0:
            return 0.0
        return float(s * (np.sum((mag / s) ** p) * obj.grid.cell_measure) ** (1 / p))
    r = _as_rearrangement(obj)
    if r.size == 0:
        return 0.0
    if math.isinf(p):
        return float(r.values[0])
    s = r.values[0]
    return float(s * np.sum((r.values / s) ** p * np.diff(r.breakpoints)) ** (1 / p))


@dataclass(frozen=True)
class InterpolationReport:
    p: float
    weak_lhs: float
    weak_rhs: float
    strong_lhs: float
    strong_rhs: float
    uses_norms: bool

    @property
    def margin(self) -> float:
        return min(self.weak_rhs - self.weak_lhs, self.strong_rhs - self.strong_lhs)

    @property
    def lhs(self) -> tuple[float, float]:
        return (self.weak_lhs, self.strong_lhs)

    @property
    def rhs(self) -> tuple[float, float]:
        return (self.weak_rhs, self.strong_rhs)


def interpolation_constant(p: float, p0: float, p1: float, theta: float) -> float:
    """2 / (p (1/p0 - 1/p1) theta^(1-theta) (1-theta)^theta)."""
    return 2.0 / (p * (1 / p0 - 1 / p1) * theta ** (1 - theta) * (1 - theta) ** theta)


def interpolation_check(obj, p0: float, p1: float, theta: float) -> InterpolationReport:
    """Both sides of the weak-type and L^{p,1} interpolation inequalities.

    Norms are used when p0 > 1; for p0 = 1 the f** norm is undefined at p0 and
    the quasinorm version of the same inequalities is evaluated instead.
    """
    if not 0 < theta < 1:
        raise DomainError("theta must lie strictly between 0 and 1")
    if not 1 <= p0 < p1:
        raise DomainError("need 1 <= p0 < p1 <= inf")
    p = 1 / ((1 - theta) / p0 + theta / p1)
    use_norms = p0 > 1
    value = lorentz_norm if use_norms else lorentz_quasinorm
    r = _as_rearrangement(obj)

    def idx(pp, q):
        return LorentzIndex.make(pp, q, norm=use_norms)

    w0 = value(r, idx(p0, INF))
    w1 = value(r, idx(p1, INF))
    weak_rhs = w0 ** (1 - theta) * w1**theta
    return InterpolationReport(
        p=p,
        weak_lhs=value(r, idx(p, INF)),
        weak_rhs=weak_rhs,
        strong_lhs=value(r, idx(p, 1.0)),
        strong_rhs=interpolation_constant(p, p0, p1, theta) * weak_rhs,
        uses_norms=use_norms,
    )
