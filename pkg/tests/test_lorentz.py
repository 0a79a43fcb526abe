import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from scipy import integrate

from nslorentz.errors import DomainError, LorentzIndexError, ValidationError
from nslorentz.fields import Field, Grid
from nslorentz.lorentz import (
    LorentzIndex,
    Rearrangement,
    conjugate_exponent,
    decreasing_rearrangement,
    distribution_function,
    interpolation_check,
    lorentz_norm,
    lorentz_quasinorm,
    lp_norm,
    maximal_function,
    unit_ball_volume,
)

INF = math.inf

steps = st.lists(
    st.tuples(st.floats(0.01, 10.0), st.floats(0.01, 5.0)), min_size=1, max_size=8
)
exponents = st.floats(1.05, 8.0)


def brute_force_norm(values, measures, p, q):
    """(q/p) int (t^{1/p} f**(t))^q dt/t by adaptive quadrature of an explicit f**."""
    r = Rearrangement.from_steps(values, measures)
    b, v = r.breakpoints, r.values

    def fss(t):
        covered = np.clip(t - b[:-1], 0.0, np.diff(b))
        return float(np.sum(v * covered)) / t

    def g(t):
        return (t ** (1 / p) * fss(t)) ** q / t

    total = 0.0
    edges = list(b)
    for lo, hi in zip(edges[:-1], edges[1:]):
        total += integrate.quad(g, lo, hi, epsabs=0, epsrel=1e-12, limit=200)[0]
    total += integrate.quad(g, edges[-1], INF, epsabs=0, epsrel=1e-12, limit=200)[0]
    return (q / p * total) ** (1 / q)


class TestIndex:
    def test_parse_tokens(self):
        idx = LorentzIndex.parse("infbar,inf")
        assert idx.bar and math.isinf(idx.p) and idx.label == "Linfbar_inf_star"
        assert LorentzIndex.parse("2,1,norm").label == "L2_1"
        assert LorentzIndex.parse(" 3 , inf ").token == "3,inf"

    @pytest.mark.parametrize("tok", ["2", "0.5,1", "inf,2", "2,0", "1,1,norm", "a,b", "2,2,foo"])
    def test_parse_rejects(self, tok):
        with pytest.raises(LorentzIndexError):
            LorentzIndex.parse(tok)

    def test_conjugate(self):
        assert conjugate_exponent(1) == INF
        assert conjugate_exponent(INF) == 1.0
        assert conjugate_exponent(3) == pytest.approx(1.5)


class TestRearrangement:
    def test_two_step_example(self):
        r = Rearrangement.from_steps([1.0, 3.0], [2.0, 0.5])
        assert np.allclose(r.breakpoints, [0, 0.5, 2.5])
        assert np.allclose(r([0.0, 0.49, 0.5, 2.4, 2.5, 9.0]), [3, 3, 1, 1, 0, 0])
        # f** = 3 on (0, .5], then (1.5 + (t - .5)) / t, then 3.5 / t
        assert maximal_function(r, 0.25) == pytest.approx(3.0)
        assert maximal_function(r, 1.5) == pytest.approx(2.5 / 1.5)
        assert maximal_function(r, 7.0) == pytest.approx(0.5)

    def test_distribution_function(self):
        r = Rearrangement.from_steps([1.0, 3.0], [2.0, 0.5])
        assert distribution_function(r, 0.5) == pytest.approx(2.5)
        assert distribution_function(r, 1.0) == pytest.approx(0.5)
        assert distribution_function(r, 3.0) == 0.0
        with pytest.raises(DomainError):
            distribution_function(r, 0.0)

    def test_field_matches_distribution(self, grid32):
        f = Field(grid32, 0, np.random.default_rng(2).standard_normal(grid32.shape))
        r = decreasing_rearrangement(f)
        for y in (0.1, 0.5, 1.7):
            assert distribution_function(f, y) == pytest.approx(distribution_function(r, y))

    def test_invariants_enforced(self):
        with pytest.raises(ValidationError):
            Rearrangement(np.array([0.0, 1.0]), np.array([1.0, 2.0]))
        with pytest.raises(ValidationError):
            Rearrangement(np.array([0.5, 1.0]), np.array([1.0]))

    @given(steps)
    @settings(max_examples=50, deadline=None)
    def test_maximal_dominates_and_decreases(self, pairs):
        v, m = zip(*pairs)
        r = Rearrangement.from_steps(v, m)
        t = np.geomspace(1e-3, 2 * r.total_measure + 1, 200)
        fss = r.maximal(t)
        assert np.all(fss >= r(t) - 1e-12)
        assert np.all(np.diff(fss) <= 1e-12)


class TestQuasinorm:
    @pytest.mark.parametrize("p,q", [(2, 1), (2, 2), (3, INF), (1, 1), (1.5, 4)])
    def test_indicator(self, p, q):
        for m in (0.3, 1.0, 7.0):
            r = Rearrangement.from_steps([1.0], [m])
            assert lorentz_quasinorm(r, LorentzIndex.make(p, q)) == pytest.approx(m ** (1 / p), rel=1e-13)

    @pytest.mark.parametrize("p,q", [(2, 1), (2, 2), (3, INF), (1.5, 4), (4, 1.5)])
    def test_indicator_norm_closed_form(self, p, q):
        # ||1_E||_{p,q} = p'^{1/q} |E|^{1/p}
        r = Rearrangement.from_steps([1.0], [2.0])
        expected = conjugate_exponent(p) ** (0 if math.isinf(q) else 1 / q) * 2.0 ** (1 / p)
        assert lorentz_norm(r, LorentzIndex.make(p, q, norm=True)) == pytest.approx(expected, rel=1e-10)

    def test_step_example(self):
        # f* = 3 on [0, .5), 1 on [.5, 2.5): ||f||*_{2,1} = 3 sqrt(.5) + (sqrt(2.5) - sqrt(.5))
        r = Rearrangement.from_steps([1.0, 3.0], [2.0, 0.5])
        assert lorentz_quasinorm(r, LorentzIndex.make(2, 1)) == pytest.approx(
            3 * math.sqrt(0.5) + math.sqrt(2.5) - math.sqrt(0.5), rel=1e-14
        )
        assert lorentz_quasinorm(r, LorentzIndex.make(2, INF)) == pytest.approx(max(3 * math.sqrt(0.5), math.sqrt(2.5)))
        assert lorentz_quasinorm(r, LorentzIndex.make(INF, INF)) == 3.0

    @given(st.integers(0, 2**31 - 1), st.sampled_from([1.0, 1.5, 2.0, 3.0, 6.5]))
    @settings(max_examples=30, deadline=None)
    def test_diagonal_is_lp(self, seed, p):
        g = Grid(n=2, N=16, L=1.7)
        f = Field(g, 1, np.random.default_rng(seed).standard_normal((2, 16, 16)))
        assert lorentz_quasinorm(f, LorentzIndex.make(p, p)) == pytest.approx(lp_norm(f, p), rel=1e-11)

    @given(steps, exponents, st.floats(1.0, 6.0), st.floats(1.0, 6.0))
    @settings(max_examples=60, deadline=None)
    def test_q_monotone(self, pairs, p, q1, q2):
        assume(abs(q1 - q2) > 1e-6)
        lo, hi = sorted((q1, q2))
        v, m = zip(*pairs)
        r = Rearrangement.from_steps(v, m)
        a = lorentz_quasinorm(r, LorentzIndex.make(p, lo))
        b = lorentz_quasinorm(r, LorentzIndex.make(p, hi))
        c = lorentz_quasinorm(r, LorentzIndex.make(p, INF))
        assert c <= b * (1 + 1e-10) and b <= a * (1 + 1e-10)

    @given(steps, st.floats(0.1, 10.0))
    @settings(max_examples=30, deadline=None)
    def test_homogeneous(self, pairs, lam):
        v, m = zip(*pairs)
        idx = LorentzIndex.make(2.5, 1.5)
        r1 = Rearrangement.from_steps(v, m)
        r2 = Rearrangement.from_steps(np.array(v) * lam, m)
        assert lorentz_quasinorm(r2, idx) == pytest.approx(lam * lorentz_quasinorm(r1, idx), rel=1e-12)

    def test_zero_function(self):
        r = Rearrangement.from_steps([0.0], [1.0])
        assert lorentz_quasinorm(r, LorentzIndex.make(2, 1)) == 0.0
        assert lorentz_norm(r, LorentzIndex.make(2, 1, norm=True)) == 0.0


class TestNorm:
    @given(steps, exponents, st.sampled_from([1.0, 1.7, 2.0, 3.5, INF]))
    @settings(max_examples=40, deadline=None)
    def test_matches_brute_force(self, pairs, p, q):
        v, m = zip(*pairs)
        r = Rearrangement.from_steps(v, m)
        got = lorentz_norm(r, LorentzIndex.make(p, q, norm=True))
        if math.isinf(q):
            t = np.concatenate([r.breakpoints[1:], np.geomspace(1e-4, 1e4, 2000)])
            oracle = float(np.max(t ** (1 / p) * r.maximal(t)))
            assert got >= oracle * (1 - 1e-12)
            assert got == pytest.approx(oracle, rel=1e-6)
        else:
            assert got == pytest.approx(brute_force_norm(v, m, p, q), rel=1e-8)

    @given(steps, exponents, st.sampled_from([1.0, 2.0, 4.0, INF]))
    @settings(max_examples=60, deadline=None)
    def test_sandwich(self, pairs, p, q):
        v, m = zip(*pairs)
        r = Rearrangement.from_steps(v, m)
        star = lorentz_quasinorm(r, LorentzIndex.make(p, q))
        full = lorentz_norm(r, LorentzIndex.make(p, q, norm=True))
        assert star <= full * (1 + 1e-10)
        assert full <= conjugate_exponent(p) * star * (1 + 1e-10)

    def test_q_one_is_exact_multiple(self):
        r = Rearrangement.from_steps([1.0, 3.0, 0.2], [2.0, 0.5, 4.0])
        for p in (1.5, 2.0, 5.0):
            full = lorentz_norm(r, LorentzIndex.make(p, 1, norm=True))
            star = lorentz_quasinorm(r, LorentzIndex.make(p, 1))
            assert full == pytest.approx(conjugate_exponent(p) * star, rel=1e-13)

    def test_norm_needs_p_above_one(self):
        with pytest.raises(LorentzIndexError):
            LorentzIndex.make(1, 1, norm=True)


class TestInterpolation:
    @given(steps, st.floats(0.05, 0.95))
    @settings(max_examples=40, deadline=None)
    def test_both_inequalities(self, pairs, theta):
        v, m = zip(*pairs)
        r = Rearrangement.from_steps(v, m)
        for p0, p1 in ((1.0, 4.0), (1.5, 3.0), (2.0, INF)):
            rep = interpolation_check(r, p0, p1, theta)
            assert rep.margin >= -1e-10 * max(rep.rhs)

    def test_theta_domain(self):
        r = Rearrangement.from_steps([1.0], [1.0])
        with pytest.raises(DomainError):
            interpolation_check(r, 1.0, 2.0, 1.0)


def test_unit_ball_volumes():
    assert unit_ball_volume(1) == pytest.approx(2.0)
    assert unit_ball_volume(2) == pytest.approx(math.pi)
    assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3)
