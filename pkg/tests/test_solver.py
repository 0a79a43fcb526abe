import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from pydantic import ValidationError as PydanticValidationError

from nslorentz.errors import (
    CannotExtendError,
    DomainError,
    NoContractionError,
    SubcriticalityError,
    ValidationError,
)
from nslorentz.fields import Field, Grid, RandomSolenoidal, generate_initial_data, taylor_green_field
from nslorentz.solver import (
    SolveConfig,
    blowup_monitor,
    blowup_threshold,
    contraction_lambda,
    existence_horizon,
    extend,
    picard_solve,
    time_exponent,
    weak_norm,
)


class TestConfig:
    def test_tokens(self):
        cfg = SolveConfig(n=2, N=32, L=1.0, T=1.0, J=8, r="inf", r_list=["inf", "6"])
        assert math.isinf(cfg.r) and cfg.r_list == [math.inf, 6.0]
        assert [i.label for i in cfg.lorentz_indices] == ["L2_2_star", "Linfbar_inf_star"]

    @pytest.mark.parametrize("bad", [{"J": 0}, {"T": -1.0}, {"indices": ["2"]}, {"foo": 1}, {"n": 4}])
    def test_rejects(self, bad):
        kw = dict(n=2, N=32, L=1.0, T=1.0, J=8) | bad
        with pytest.raises(PydanticValidationError):
            SolveConfig(**kw)


class TestContractionAlgebra:
    @given(st.floats(0.0, 0.2499))
    @settings(max_examples=100, deadline=None)
    def test_smaller_root(self, g0):
        lam = contraction_lambda(g0)
        assert lam == pytest.approx(g0 + lam * lam, abs=1e-14)
        assert 0 <= lam <= 0.5

    def test_no_contraction(self):
        with pytest.raises(NoContractionError):
            contraction_lambda(0.25)

    def test_time_exponent(self):
        assert time_exponent(2, math.inf) == 0.5
        assert time_exponent(3, 6.0) == 0.25


class TestThresholds:
    def test_closed_form(self, table2):
        for r in (math.inf, 6.0, 4.0):
            e = 0.5 * (1 - (0 if math.isinf(r) else 2 / r))
            expected = 1 / (4 * table2.eta(r) * (1.3 - 0.4) ** e)
            assert blowup_threshold(2, r, 1.3, 0.4, table2) == pytest.approx(expected, rel=1e-14)

    @given(t0=st.floats(0.01, 0.98))
    @settings(max_examples=30, deadline=None)
    def test_increasing_in_t0(self, table2, t0):
        a = blowup_threshold(2, 6.0, 1.0, t0, table2)
        b = blowup_threshold(2, 6.0, 1.0, t0 + 0.01, table2)
        assert b > a

    def test_domain(self, table2):
        with pytest.raises(DomainError):
            blowup_threshold(2, math.inf, 1.0, 1.0, table2)
        with pytest.raises(SubcriticalityError):
            blowup_threshold(2, 2.0, 1.0, 0.5, table2)

    def test_horizon_inverts_threshold(self, table2):
        for r in (math.inf, 4.0):
            T = existence_horizon(0.7, 2, r, table2)
            assert 4 * table2.eta(r) * T ** time_exponent(2, r) * 0.7 == pytest.approx(1.0)
        assert math.isinf(existence_horizon(0.0, 2, 4.0, table2))


class TestTaylorGreen:
    def test_exact_solution(self, tg_runs):
        rep = tg_runs[32]
        assert rep.converged
        g = rep.config.grid
        err = max(
            (rep.trajectory.field(j) - taylor_green_field(g, t=t)).sup_norm() for j, t in enumerate(rep.trajectory.times)
        )
        assert err <= 1e-6
        assert rep.residual <= 1e-10

    def test_summary_fields(self, tg_runs):
        s = tg_runs[32].summary()
        assert set(s) >= {"g0", "lambda", "iterations", "converged", "existence_horizon", "residual"}
        # amplitude one is far outside the small-data regime; convergence is by structure
        assert s["g0"] > 0.25 and s["lambda"] is None


class TestSmallData:
    def test_contraction(self, small_random_run):
        rep = small_random_run
        assert rep.converged and rep.g0 <= 0.1
        assert max(rep.ratios) <= 2 * rep.lam + 0.1
        assert max(rep.weighted_ratios) <= 2 * rep.lam + 1e-12

    def test_starting_guess_irrelevant(self, small_random_run, table2):
        rep = small_random_run
        other = picard_solve(rep.trajectory.field(0), rep.config, table2, initial_guess="zero")
        assert rep.trajectory.sup_difference(other.trajectory) <= 10 * rep.config.picard_tol

    def test_restart_matches_direct(self, small_random_run, table2):
        rep = small_random_run
        half = picard_solve(rep.trajectory.field(0), rep.config.model_copy(update={"T": 0.25, "J": 8}), table2)
        joined = extend(half, 0.25, 0.25)
        assert np.allclose(joined.trajectory.times, rep.trajectory.times)
        assert joined.trajectory.sup_difference(rep.trajectory) <= 1e-8
        assert joined.overlap_difference <= 1e-8

    def test_extend_by_zero(self, small_random_run):
        assert extend(small_random_run, 0.25, 0.0) is small_random_run

    def test_cannot_extend_large_data(self, tg_runs):
        with pytest.raises(CannotExtendError) as info:
            extend(tg_runs[32], 0.25, 0.25)
        assert info.value.threshold > 0

    def test_monitor_rows(self, small_random_run, table2):
        rows = blowup_monitor(small_random_run.trajectory, [math.inf, 4], table2, T=1.0)
        assert len(rows) == 2 * len(small_random_run.trajectory)
        for row in rows:
            assert row.margin == pytest.approx(row.threshold - row.norm)
            # a positive margin is the same statement as a lifespan beyond the remaining time
            assert (row.margin > 0) == (row.lifespan_bound > 1.0 - row.t)
        inf_rows = [r for r in rows if math.isinf(r.r)]
        assert inf_rows[1].norm == pytest.approx(small_random_run.trajectory.field(1).sup_norm())


class TestValidation:
    def test_rejects_divergent_datum(self, table2):
        cfg = SolveConfig(n=2, N=16, L=2 * math.pi, T=0.1, J=4)
        x, _ = cfg.grid.mesh()
        f = Field(cfg.grid, 1, np.stack([np.sin(x), np.zeros(cfg.grid.shape)]))
        with pytest.raises(ValidationError):
            picard_solve(f, cfg, table2)

    def test_rejects_grid_mismatch(self, table2):
        cfg = SolveConfig(n=2, N=16, L=2 * math.pi, T=0.1, J=4)
        f = taylor_green_field(Grid(n=2, N=32, L=2 * math.pi))
        with pytest.raises(ValidationError):
            picard_solve(f, cfg, table2)

    def test_weak_norm(self):
        f = generate_initial_data(RandomSolenoidal(seed=0), Grid(n=2, N=16, L=1.0))
        assert weak_norm(f, math.inf) == f.sup_norm()
        assert weak_norm(f, 4.0) > 0
