"""The explicit constants of the existence theory.

* ``alpha_n``: sup over p in [1, n/(n-1)) of ||Phi(1)||*_{p,1}, from the exact
  rearrangement of the Gaussian.
* ``beta_{n/r}``: the Beta integral B(1/2, 1 - n/r).
* ``gamma_n``: ||grad T(1)||_{L^1}, by grid quadrature.
* ``delta = beta * gamma`` and ``eta = r' * alpha * delta``.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Iterable

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy import integrate

from .errors import ConvergenceError, DivergentIntegralError, DomainError, SubcriticalityError
from .fields import Grid
from .kernels import MultiplierSpec, kernel_magnitude
from .lorentz import conjugate_exponent, unit_ball_volume

INF = math.inf
DIVERGENCE_FLAG = 0.999
GAMMA_TOLERANCE = 0.01
GAMMA_RESOLUTIONS = {2: ((40.0, 256), (60.0, 512)), 3: ((40.0, 128), (60.0, 256))}
BALL_FRACTION = 0.5
ALPHA_POINTS = 64


def beta_constant(n_over_r: float) -> float:
    """integral_0^1 (1-s)^(-1/2) s^(-n/r) ds = B(1/2, 1 - n/r), via log-Gamma."""
    x = float(n_over_r)
    if x < 0:
        raise DomainError("n/r must be non-negative")
    if x >= 1:
        raise DivergentIntegralError(f"the integral diverges at s = 0 for n/r = {x}")
    b = 1.0 - x
    return math.sqrt(math.pi) * math.exp(math.lgamma(b) - math.lgamma(b + 0.5))


# --- alpha -------------------------------------------------------------------


def heat_rearrangement(tau, n: int, t: float = 1.0):
    """Phi(t)*(tau) = (4 pi t)^(-n/2) exp(-(tau/omega_n)^(2/n) / 4t)."""
    tau = np.asarray(tau, dtype=float)
    w = unit_ball_volume(n)
    return (4 * math.pi * t) ** (-n / 2) * np.exp(-((tau / w) ** (2 / n)) / (4 * t))


def heat_lp1_quasinorm(n: int, p: float, t: float = 1.0) -> float:
    """||Phi(t)||*_{p,1} by adaptive quadrature of the exact rearrangement.

    With u = tau^(1/p) the weight (1/p) tau^(1/p - 1) d tau becomes du, which
    removes the endpoint singularity.
    """
    if math.isinf(p):
        return float(heat_rearrangement(0.0, n, t))

    def f(u):
        return float(heat_rearrangement(u**p, n, t))

    # the integrand is a stretched Gaussian in u; split at its natural scale
    scale = (unit_ball_volume(n) * (4 * t) ** (n / 2)) ** (1 / p)
    pieces = [(0.0, scale), (scale, 8 * scale), (8 * scale, INF)]
    return float(sum(integrate.quad(f, a, b, epsabs=0.0, epsrel=1e-12, limit=200)[0] for a, b in pieces))


def alpha_p_grid(n: int, points: int = ALPHA_POINTS) -> np.ndarray:
    """p values spanning [1, n/(n-1)): ``points`` uniform in 1/p plus the open endpoint."""
    theta_end = 1.0 - 1.0 / n
    theta = np.linspace(1.0, theta_end, points + 1)  # last entry is the limit endpoint
    with np.errstate(divide="ignore"):
        return np.where(theta > 0, 1.0 / np.where(theta > 0, theta, 1.0), INF)


def alpha_curve(n: int, points: int = ALPHA_POINTS) -> tuple[np.ndarray, np.ndarray]:
    if n < 1:
        raise DomainError("n must be >= 1")
    ps = alpha_p_grid(n, points)
    return ps, np.array([heat_lp1_quasinorm(n, p) for p in ps])


@lru_cache(maxsize=8)
def alpha_constant(n: int) -> float:
    """sup over the p-grid of ||Phi(1)||*_{p,1}."""
    _, vals = alpha_curve(n)
    return float(vals.max())


# --- gamma -------------------------------------------------------------------


def far_field_coefficient(n: int) -> float:
    """|S^(n-1)| times the coefficient c in |grad T(x)| ~ c |x|^-(n+1) for large |x|.

    Outside the Gaussian core, grad T is the gradient of the Leray projector of
    a point mass, whose Frobenius magnitude is n sqrt((n-1)(n+2)) / (|S| |x|^(n+1)).
    """
    return n * math.sqrt((n - 1) * (n + 2))


@lru_cache(maxsize=16)
def oseen_gradient_l1(n: int, L: float, N: int, t: float = 1.0, ball_fraction: float = BALL_FRACTION) -> float:
    """||grad T(t)||_{L^1(R^n)} from one grid.

    The grid sum covers the ball |x| <= R with R = ball_fraction * L / 2, where
    periodic images nearly cancel (grad T is odd).  The exterior uses the
    exact algebraic far field, whose integral is far_field_coefficient / R.
    """
    grid = Grid(n=n, N=N, L=L)
    mag = kernel_magnitude(MultiplierSpec(tag="oseen", order=1), t, grid)
    r = np.sqrt(sum(d * d for d in grid.centered_mesh()))
    R = ball_fraction * L / 2
    inner = float(mag[r <= R].sum() * grid.cell_measure)
    return inner + far_field_coefficient(n) / R


class GammaResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    value: float
    values: list[float]
    resolutions: list[tuple[float, int]]
    relative_difference: float
    ball_fraction: float


@lru_cache(maxsize=8)
def _gamma(n: int, resolutions: tuple, tol: float, ball_fraction: float) -> GammaResult:
    vals = [oseen_gradient_l1(n, float(L), int(N), 1.0, ball_fraction) for L, N in resolutions]
    rel = abs(vals[-1] - vals[0]) / abs(vals[-1])
    if rel > tol:
        raise ConvergenceError(
            f"gamma_{n} grid values disagree by {rel:.3%}: {vals}", values=vals
        )
    return GammaResult(
        n=n, value=vals[-1], values=vals, resolutions=[(float(L), int(N)) for L, N in resolutions],
        relative_difference=rel, ball_fraction=ball_fraction,
    )


def gamma_result(n: int, resolutions=None, tol: float = GAMMA_TOLERANCE, ball_fraction: float = BALL_FRACTION) -> GammaResult:
    if resolutions is None:
        if n not in GAMMA_RESOLUTIONS:
            raise DomainError("gamma_n is tabulated for n in {2, 3}")
        resolutions = GAMMA_RESOLUTIONS[n]
    return _gamma(n, tuple((float(L), int(N)) for L, N in resolutions), tol, ball_fraction)


def gamma_constant(n: int) -> float:
    """||grad T(1)||_{L^1}; the finer of two consistent grid runs."""
    return gamma_result(n).value


# --- table ---------------------------------------------------------------------


def parse_r(token) -> float:
    if isinstance(token, str):
        tok = token.strip().lower()
        if tok in ("inf", "infinity", "infbar"):
            return INF
        return float(tok)
    return float(token)


class ConstantsRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    r: float
    r_prime: float
    n_over_r: float
    beta: float
    delta: float
    eta: float
    divergent: bool


class ConstantsTable(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    alpha: float
    gamma: float
    rows: list[ConstantsRow]
    provenance: dict

    def row(self, r: float) -> ConstantsRow:
        r = parse_r(r)
        for row in self.rows:
            if row.r == r:
                return row
        raise DomainError(f"r = {r} is not in the table")

    def eta(self, r: float) -> float:
        return self.row(r).eta

    def delta(self, r: float) -> float:
        return self.row(r).delta

    def to_dict(self) -> dict:
        def enc(x):
            return "inf" if isinstance(x, float) and math.isinf(x) else x

        return {
            "n": self.n,
            "alpha": self.alpha,
            "gamma": self.gamma,
            "rows": [{k: enc(v) for k, v in row.model_dump().items()} for row in self.rows],
            "provenance": self.provenance,
        }


def make_row(n: int, r: float, alpha: float, gamma: float) -> ConstantsRow:
    if not r > n:
        raise SubcriticalityError(f"need r > n, got r={r}, n={n}")
    x = 0.0 if math.isinf(r) else n / r
    rp = conjugate_exponent(r)
    beta = beta_constant(x)
    delta = beta * gamma
    eta = rp * alpha * delta
    return ConstantsRow(r=r, r_prime=rp, n_over_r=x, beta=beta, delta=delta, eta=eta, divergent=x > DIVERGENCE_FLAG)


def eta_table(n: int, r_list: Iterable, gamma: float | None = None, alpha: float | None = None) -> ConstantsTable:
    """Assemble the constants for each subcritical r."""
    rs = [parse_r(r) for r in r_list]
    for r in rs:
        if not r > n:
            raise SubcriticalityError(f"need r > n, got r={r}, n={n}")
    provenance: dict = {"alpha_p_points": ALPHA_POINTS, "alpha_quad_epsrel": 1e-12, "beta": "log-gamma"}
    if gamma is None:
        res = gamma_result(n)
        gamma = res.value
        provenance.update(
            gamma_resolutions=[[L, N] for L, N in res.resolutions],
            gamma_values=res.values,
            gamma_relative_difference=res.relative_difference,
            gamma_ball_fraction=res.ball_fraction,
        )
    else:
        provenance["gamma"] = "supplied"
    if alpha is None:
        alpha = alpha_constant(n)
    return ConstantsTable(
        n=n, alpha=alpha, gamma=gamma,
        rows=[make_row(n, r, alpha, gamma) for r in rs],
        provenance=provenance,
    )
