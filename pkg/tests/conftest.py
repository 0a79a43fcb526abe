import math

import numpy as np
import pytest

from nslorentz.constants import eta_table
from nslorentz.fields import Field, Grid, RandomSolenoidal, generate_initial_data, taylor_green_field
from nslorentz.solver import SolveConfig, picard_solve


def random_scalar(grid: Grid, rng: np.random.Generator, heavy: bool = False) -> Field:
    """Non-negative random samples; heavy=True mixes in a power-law spike."""
    vals = rng.standard_normal(grid.shape)
    if heavy:
        r = np.sqrt(sum(d * d for d in grid.centered_mesh())) + grid.h
        vals = vals + rng.uniform(0.1, 2.0) * r ** -rng.uniform(0.2, 1.5)
    return Field(grid, 0, vals)


@pytest.fixture(scope="session")
def grid32():
    return Grid(n=2, N=32, L=2 * math.pi)


@pytest.fixture(scope="session")
def table2():
    return eta_table(2, [math.inf, 6, 4])


@pytest.fixture(scope="session")
def tg_runs(table2):
    """Taylor-Green solves at J = 32 and J = 64 on the acceptance grid."""
    out = {}
    for J in (32, 64):
        cfg = SolveConfig(n=2, N=64, L=2 * math.pi, T=0.5, J=J, r_list=[math.inf, 6, 4])
        out[J] = picard_solve(taylor_green_field(cfg.grid), cfg, table2)
    return out


@pytest.fixture(scope="session")
def small_random_run(table2):
    cfg = SolveConfig(n=2, N=32, L=2 * math.pi, T=0.5, J=16, r_list=[math.inf, 4])
    f = generate_initial_data(RandomSolenoidal(seed=3, amplitude=0.04), cfg.grid)
    return picard_solve(f, cfg, table2)
