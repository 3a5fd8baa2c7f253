"""Sampling oracle: inner approximation, determinism, budget monotonicity."""

import numpy as np
import pytest

from longbounds.errors import EmptyOracle, InvalidDimension, ValidationError
from longbounds.lp import cell_mean_bounds, reparameterize
from longbounds.model import (
    Assumption,
    AssumptionForm,
    CellIndex,
    build_system,
    max_violation,
)
from longbounds.oracle import OracleBudget, grid_bounds, sample_feasible

from conftest import consistent_system, consistent_trial

SMALL = OracleBudget(n_samples=131072, refine_steps=40, seed=0)


class TestBudget:
    def test_validation(self):
        with pytest.raises(ValidationError):
            OracleBudget(n_samples=0)
        with pytest.raises(ValidationError):
            OracleBudget(refine_steps=0)

    def test_scope(self):
        system, _, _ = consistent_system(30, K=3)
        with pytest.raises(InvalidDimension):
            sample_feasible(system, SMALL)


class TestSampleFeasible:
    def test_consistent_fixture_nonempty_and_verified(self):
        # [DERIVED] fixture built from a known feasible truth
        system, _, _ = consistent_system(31, K=2)
        points = sample_feasible(system, SMALL)
        assert points
        for point in points[:50]:
            assert max_violation(system, point) == 0.0

    def test_k1_band(self):
        # [TRIVIAL] with K=1 the long means are pinned to the short means up
        # to the slack band scaled by the marginal mass
        trial, probs, truth_means = consistent_trial(32, K=1)
        system = build_system(trial, ["t0"])
        arm = trial.arm("t0")
        p1 = arm.marginal[0]
        eps = system.eps_eq
        for point in sample_feasible(system, SMALL)[:50]:
            m0 = point.means[("t0", CellIndex((0,)))]
            m1 = point.means[("t0", CellIndex((1,)))]
            s0, s1 = arm.short_mean_0[0], arm.short_mean_1[0]
            assert abs(m0 - s0) <= eps * (1 + s0) / (1 - p1 - eps) + 1e-6
            assert abs(m1 - s1) <= eps * (1 + s1) / (p1 - eps) + 1e-6

    def test_contradictory_assumptions_empty(self):
        # [TRIVIAL] constructed infeasibility
        trial, _, _ = consistent_trial(33, K=1)
        cell = CellIndex((0,))
        assumptions = [
            Assumption(AssumptionForm.DIRECT, "t0", cell, 0.9, 1.0),
            Assumption(AssumptionForm.DIRECT, "t0", cell, 0.0, 0.1),
        ]
        system = build_system(trial, ["t0"], assumptions)
        with pytest.raises(EmptyOracle):
            sample_feasible(system, OracleBudget(n_samples=20000,
                                                 refine_steps=5, seed=0))


class TestGridBounds:
    def test_inside_lp_and_contains_truth(self):
        # [DERIVED] LP certification is outer, the oracle is inner, and the
        # generating truth is feasible
        system, _, truth_means = consistent_system(34, K=2)
        reparam = reparameterize(system)
        for cell in system.cells:
            lo, hi = grid_bounds(system, "t0", cell, SMALL)
            cb = cell_mean_bounds(reparam, "t0", cell)
            assert cb.lower - 1e-6 <= lo <= hi <= cb.upper + 1e-6
            v = truth_means["t0"][cell.rank]
            assert lo - 1e-6 <= v <= hi + 1e-6

    def test_k1_width(self):
        # [DERIVED] slack arithmetic: the mean at a cell of mass p and short
        # mean s can move at most eps*(1+s)/(p-eps) from s in each direction
        trial, _, _ = consistent_trial(35, K=1)
        system = build_system(trial, ["t0"])
        arm = trial.arm("t0")
        eps = system.eps_eq
        for cell, mass, s in ((CellIndex((0,)), 1 - arm.marginal[0],
                               arm.short_mean_0[0]),
                              (CellIndex((1,)), arm.marginal[0],
                               arm.short_mean_1[0])):
            lo, hi = grid_bounds(system, "t0", cell, SMALL)
            assert hi - lo <= 2 * eps * (1 + s) / (mass - eps) + 1e-6

    def test_determinism(self):
        system, _, _ = consistent_system(36, K=2)
        a = grid_bounds(system, "t0", CellIndex((1, 1)), SMALL)
        b = grid_bounds(system, "t0", CellIndex((1, 1)), SMALL)
        assert a == b

    def test_budget_monotonicity(self):
        # Doubling the sample budget only appends shards, so the inner
        # interval can only grow.
        system, _, _ = consistent_system(37, K=2)
        small = OracleBudget(n_samples=131072, refine_steps=40, seed=0)
        large = OracleBudget(n_samples=262144, refine_steps=40, seed=0)
        for cell in (CellIndex((0, 0)), CellIndex((1, 0))):
            lo_s, hi_s = grid_bounds(system, "t0", cell, small)
            lo_l, hi_l = grid_bounds(system, "t0", cell, large)
            assert lo_l <= lo_s + 1e-12
            assert hi_l >= hi_s - 1e-12
