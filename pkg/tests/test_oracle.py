import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from sscoupling import (
    CouplingParam,
    DegenerateInput,
    DiscreteMeasure,
    MomentFormulaInput,
    NotNormalized,
    SelfSimilarMeasure,
    coupling_moment,
    discretize_coupling,
    discretize_measure,
    measure_mean,
    monotone_transport,
    phi1,
    phi2,
    random_feasible_coupling_cost,
    signed_moment,
    techlem_residual,
    validate_system,
    w1_exact,
    w2_bounds,
)
from sscoupling.ifs import DiscreteCoupling
from sscoupling.oracle import techlem_rhs

from conftest import systems, weights

FIG1 = validate_system(0.5, 0.0, 0.5)


def lp_cost(a: DiscreteMeasure, b: DiscreteMeasure, rho: int) -> float:
    """Optimal transport cost by solving the transportation LP directly."""
    n, m = len(a), len(b)
    cost = np.abs(a.positions[:, None] - b.positions[None, :]) ** rho
    rows = np.kron(np.eye(n), np.ones(m))
    cols = np.kron(np.ones(n), np.eye(m))
    res = linprog(
        cost.ravel(),
        A_eq=np.vstack([rows, cols]),
        b_eq=np.concatenate([a.weights, b.weights]),
        bounds=(0, None),
        method="highs",
    )
    assert res.success
    return res.fun ** (1 / rho)


@st.composite
def discrete_measures(draw, max_atoms=12):
    n = draw(st.integers(1, max_atoms))
    pos = sorted(draw(st.lists(st.floats(0, 1), min_size=n, max_size=n)))
    w = np.array(draw(st.lists(st.floats(0.01, 1), min_size=n, max_size=n)))
    return DiscreteMeasure(np.array(pos), w / w.sum())


class TestMonotoneTransport:
    def test_identity(self):
        a = DiscreteMeasure(np.array([0.1, 0.4, 0.9]), np.array([0.2, 0.5, 0.3]))
        plan = monotone_transport(a, a)
        assert [(i, j) for i, j, _ in plan.pairs] == [(0, 0), (1, 1), (2, 2)]
        np.testing.assert_allclose(plan.mass, [0.2, 0.5, 0.3], atol=1e-15)
        assert (plan.cost_rho1, plan.cost_rho2) == (0.0, 0.0)

    def test_point_masses(self):
        plan = monotone_transport(DiscreteMeasure.from_atoms([(0, 1)]), DiscreteMeasure.from_atoms([(1, 1)]))
        assert plan.pairs == [(0, 0, 1.0)]
        assert (plan.cost_rho1, plan.cost_rho2) == (1.0, 1.0)

    def test_split(self):
        a = DiscreteMeasure.from_atoms([(0, 0.5), (1, 0.5)])
        b = DiscreteMeasure.from_atoms([(0.5, 1)])
        plan = monotone_transport(a, b)
        assert plan.pairs == [(0, 0, 0.5), (1, 0, 0.5)]
        assert plan.cost_rho1 == 0.5
        assert plan.cost_rho2 == pytest.approx(math.sqrt(0.5 * 0.25 + 0.5 * 0.25))

    def test_not_normalized(self):
        a = DiscreteMeasure.from_atoms([(0, 0.5), (1, 0.4)])
        with pytest.raises(NotNormalized):
            monotone_transport(a, a)

    @settings(max_examples=60, deadline=None)
    @given(discrete_measures(), discrete_measures())
    def test_matches_linear_program(self, a, b):
        plan = monotone_transport(a, b)
        for rho in (1, 2):
            assert plan.cost(rho) == pytest.approx(lp_cost(a, b, rho), abs=1e-7)

    @settings(max_examples=60, deadline=None)
    @given(discrete_measures(40), discrete_measures(40))
    def test_marginals_and_monotone(self, a, b):
        plan = monotone_transport(a, b)
        np.testing.assert_allclose(plan.row_sums(len(a)), a.weights, atol=1e-12)
        np.testing.assert_allclose(plan.col_sums(len(b)), b.weights, atol=1e-12)
        assert np.all(plan.mass >= 0)
        order = np.argsort(a.positions[plan.source], kind="stable")
        assert np.all(np.diff(b.positions[plan.target][order]) >= 0)

    def test_deep_marginals_conserve_mass(self):
        s = validate_system(0.4, 0.05, 0.55)
        a = discretize_measure(SelfSimilarMeasure(s, 0.3), 14)
        b = discretize_measure(SelfSimilarMeasure(s, 0.65), 14)
        plan = monotone_transport(a, b)
        np.testing.assert_allclose(plan.row_sums(len(a)), a.weights, atol=1e-12)
        np.testing.assert_allclose(plan.col_sums(len(b)), b.weights, atol=1e-12)


class TestRandomFeasible:
    def test_sorted_order_reproduces_monotone(self):
        rng = np.random.default_rng(5)
        a = DiscreteMeasure(np.sort(rng.uniform(size=16)), np.full(16, 1 / 16))
        w = rng.uniform(size=16)
        b = DiscreteMeasure(np.sort(rng.uniform(size=16)), w / w.sum())
        plan = monotone_transport(a, b)
        for rho in (1, 2):
            assert random_feasible_coupling_cost(a, b, None, rho) == plan.cost(rho)

    def test_sixteen_atom_pair(self):
        rng = np.random.default_rng(11)
        w = rng.uniform(size=16)
        a = DiscreteMeasure(np.sort(rng.uniform(size=16)), w / w.sum())
        w = rng.uniform(size=16)
        b = DiscreteMeasure(np.sort(rng.uniform(size=16)), w / w.sum())
        plan = monotone_transport(a, b)
        for rho in (1, 2):
            costs = [random_feasible_coupling_cost(a, b, s, rho) for s in range(1000)]
            assert min(costs) >= plan.cost(rho) - 1e-10

    def test_point_masses(self):
        a = DiscreteMeasure.from_atoms([(0.2, 1.0)])
        b = DiscreteMeasure.from_atoms([(0.7, 1.0)])
        costs = {random_feasible_coupling_cost(a, b, s, 1) for s in range(20)}
        assert len(costs) == 1 and costs.pop() == pytest.approx(0.5)

    def test_seeded(self):
        a = discretize_measure(SelfSimilarMeasure(FIG1, 0.3), 4)
        b = discretize_measure(SelfSimilarMeasure(FIG1, 0.6), 4)
        assert random_feasible_coupling_cost(a, b, 3, 2) == random_feasible_coupling_cost(a, b, 3, 2)


class TestCouplingMoments:
    def test_depth_zero(self):
        dc = discretize_coupling(FIG1, CouplingParam(0.2, 0.8, 0.1), 0)
        assert coupling_moment(dc, 1) == 0.0 and coupling_moment(dc, 2) == 0.0

    def test_figure1(self):
        dc = discretize_coupling(FIG1, CouplingParam(0.2, 0.8, 0.1), 10)
        assert abs(coupling_moment(dc, 1) - 0.58 / 0.9) <= 2 * 0.5**10
        dc9 = discretize_coupling(FIG1, CouplingParam(0.2, 0.8, 0.1), 9)
        assert abs(coupling_moment(dc9, 2) - math.sqrt(0.76 / 1.5)) <= 4 * 0.5**9

    def test_not_normalized(self):
        dc = DiscreteCoupling(np.array([0.1]), np.array([0.2]), np.array([0.5]))
        with pytest.raises(NotNormalized):
            coupling_moment(dc, 1)
        with pytest.raises(NotNormalized):
            signed_moment(dc)

    def test_signed_moment_symmetric(self):
        s = validate_system(0.3, 0.1, 0.6)
        dc = discretize_coupling(s, CouplingParam(0.4, 0.4, 0.25), 8)
        assert abs(signed_moment(dc)) <= 1e-15

    def test_signed_moment_is_mean_difference(self):
        dc = discretize_coupling(FIG1, CouplingParam(0.2, 0.8, 0.1), 10)
        diff = measure_mean(SelfSimilarMeasure(FIG1, 0.2)) - measure_mean(SelfSimilarMeasure(FIG1, 0.8))
        assert diff == pytest.approx(0.6)
        assert abs(signed_moment(dc) - diff) <= 2 * 0.5**10
        assert abs(signed_moment(dc)) <= coupling_moment(dc, 1) + 1e-15

    @settings(max_examples=20, deadline=None)
    @given(systems(c_min=0.1), weights, weights, st.floats(0.0, 1.0), st.integers(3, 8))
    def test_convergence_bounds(self, s, p, q, frac, depth):
        lo, hi = CouplingParam(p, q, min(p, q)).region
        r = lo + frac * (hi - lo)
        dc = discretize_coupling(s, CouplingParam(p, q, r), depth)
        m = MomentFormulaInput(s, p, q, r)
        assert abs(coupling_moment(dc, 1) - phi1(m)) <= 2 * s.c**depth
        assert abs(coupling_moment(dc, 2) ** 2 - phi2(m) ** 2) <= 4 * s.c**depth
        assert abs(signed_moment(dc)) <= coupling_moment(dc, 1) + 1e-15


class TestTechlemResidual:
    def test_identity_closed_form(self):
        """Plugging the exact moments in makes the identity hold."""
        p, q, r = 0.2, 0.8, 0.1
        exact_signed = measure_mean(SelfSimilarMeasure(FIG1, p)) - measure_mean(SelfSimilarMeasure(FIG1, q))
        rhs = techlem_rhs(FIG1, p, q, r, phi1(MomentFormulaInput(FIG1, p, q, r)))
        assert rhs == pytest.approx(exact_signed, rel=1e-14)

    def test_figure1(self):
        assert techlem_residual(FIG1, 0.2, 0.8, 0.1, 10) <= 8 * 0.5**10

    def test_decreasing(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            c = rng.uniform(0.2, 0.5)
            t1 = rng.uniform(0, 1 - 2 * c)
            s = validate_system(c, t1, rng.uniform(t1 + c, 1 - c))
            p, q = rng.uniform(0.05, 0.95, 2)
            lo, hi = CouplingParam(p, q, min(p, q)).region
            r = rng.uniform(lo, hi)
            res = [techlem_residual(s, p, q, r, d) for d in (6, 8, 10)]
            for a, b in zip(res, res[1:]):
                # residuals shrink like (c (1 - p - q + 2r))**k and can hit round-off early
                assert b < a or max(a, b) <= 1e-14

    def test_boundary_finite(self):
        assert math.isfinite(techlem_residual(FIG1, 0.2, 0.8, 0.2, 8))
        assert techlem_residual(FIG1, 0.2, 0.8, 0.2, 8) <= 8 * 0.5**8

    def test_equal_weights(self):
        with pytest.raises(DegenerateInput):
            techlem_residual(FIG1, 0.4, 0.4, 0.2, 4)


class TestWassersteinConvergence:
    @pytest.mark.parametrize(
        "sys_args, p, q", [((0.5, 0, 0.5), 0.2, 0.8), ((1 / 3, 0, 2 / 3), 0.3, 0.6), ((0.25, 0.1, 0.6), 0.7, 0.1)]
    )
    def test_w1_and_w2(self, sys_args, p, q):
        s = validate_system(*sys_args)
        k = 12
        a = discretize_measure(SelfSimilarMeasure(s, p), k)
        b = discretize_measure(SelfSimilarMeasure(s, q), k)
        plan = monotone_transport(a, b)
        assert abs(plan.cost_rho1 - w1_exact(s, p, q)) <= 2 * s.c**k
        lower, upper = w2_bounds(s, p, q)
        assert lower - 2 * s.c**k <= plan.cost_rho2 <= upper + 2 * s.c**k
