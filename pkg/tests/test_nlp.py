"""Heuristic multistart route: starts, local solves, endpoint selection."""

import numpy as np
import pytest

from longbounds.errors import UnknownArm, ValidationError
from longbounds.lp import cell_mean_bounds, reparameterize
from longbounds.model import (
    Assumption,
    AssumptionForm,
    CellIndex,
    LongPoint,
    build_system,
)
from longbounds.nlp import (
    LocalResult,
    SolverConfig,
    Target,
    local_solve,
    multistart_bound,
    sample_starts,
    score,
)
from longbounds.nlp import _objective_fns

from conftest import consistent_system


class TestConfigAndTarget:
    def test_config_validation(self):
        with pytest.raises(ValidationError):
            SolverConfig(n_starts=0)
        with pytest.raises(ValidationError):
            SolverConfig(mu_growth=1.0)

    def test_target_validation(self):
        with pytest.raises(ValidationError):
            Target("median", "t", CellIndex((0,)))
        with pytest.raises(ValidationError):
            Target("difference", "t", CellIndex((0,)))


class TestSampleStarts:
    def test_count_and_determinism(self):
        # [TRIVIAL] n_starts random points plus two deterministic extras
        system, _, _ = consistent_system(20, K=3)
        config = SolverConfig(n_starts=200, seed=7)
        starts = sample_starts(system, config)
        again = sample_starts(system, config)
        assert len(starts) == 202
        for a, b in zip(starts, again):
            assert np.array_equal(system.pack(a), system.pack(b))

    def test_starts_respect_boxes_and_simplex(self):
        # [TRIVIAL] construction
        system, _, _ = consistent_system(21, K=2)
        for point in sample_starts(system, SolverConfig(n_starts=20, seed=1)):
            x = system.pack(point)
            means, probs = system.split(x)
            assert means.min() >= 0.0 and means.max() <= 1.0
            assert probs.min() >= 0.0
            assert probs.sum() == pytest.approx(1.0, abs=1e-12)


class TestScore:
    def _result(self, objective, violation_sum):
        point = LongPoint(means={}, probs={CellIndex((0,)): 1.0})
        return LocalResult(point=point, objective=objective,
                           violation=violation_sum, converged=False,
                           violation_sum=violation_sum)

    def test_feasible_score_is_objective(self):
        # [TRIVIAL] zero violation
        assert score(self._result(0.3, 0.0), 1000.0) == pytest.approx(0.3)

    def test_penalty_arithmetic(self):
        # [TRIVIAL] 0.1 + 1000 * 0.01 = 10.1
        assert score(self._result(0.1, 0.01), 1000.0) == pytest.approx(10.1)

    def test_linear_in_mu(self):
        # [TRIVIAL] doubling mu doubles the violation term only
        base = score(self._result(0.1, 0.01), 1000.0)
        double = score(self._result(0.1, 0.01), 2000.0)
        assert double - base == pytest.approx(1000.0 * 0.01)

    def test_upper_direction_negates(self):
        assert score(self._result(0.3, 0.0), 1000.0, "upper") == pytest.approx(-0.3)


class TestLocalSolve:
    def test_from_feasible_start(self):
        # [DERIVED] starting at the generating truth, minimization can only
        # stay feasible and move the objective down
        system, probs, truth_means = consistent_system(22, K=2)
        cell = CellIndex((1, 0))
        start = LongPoint(
            means={("t0", c): truth_means["t0"][c.rank] for c in system.cells},
            probs={c: probs[c.rank] for c in system.cells},
        )
        config = SolverConfig(n_starts=1, seed=0)
        objective = _objective_fns(system, Target("mean", "t0", cell))
        result = local_solve(system, objective, start, config, sense="min")
        assert result.violation <= config.feas_threshold
        assert result.objective <= truth_means["t0"][cell.rank] + 1e-9


class TestMultistartBound:
    def test_validation(self):
        system, _, _ = consistent_system(23, K=1)
        target = Target("mean", "t0", CellIndex((0,)))
        with pytest.raises(ValidationError):
            multistart_bound(system, target, "sideways")
        with pytest.raises(UnknownArm):
            multistart_bound(system, Target("mean", "zz", CellIndex((0,))),
                             "lower")

    def test_matches_lp_on_eligible_fixture(self):
        # [DERIVED] the certified LP route as the reference
        system, _, _ = consistent_system(24, K=2)
        reparam = reparameterize(system)
        config = SolverConfig(n_starts=30, seed=0)
        cell = CellIndex((0, 1))
        cb = cell_mean_bounds(reparam, "t0", cell)
        target = Target("mean", "t0", cell)
        lo = multistart_bound(system, target, "lower", config)
        hi = multistart_bound(system, target, "upper", config)
        assert lo.status == "Heuristic-NLP" and hi.status == "Heuristic-NLP"
        assert lo.value <= hi.value
        # inner-bound property plus 1e-3 endpoint agreement
        assert cb.lower - 1e-3 <= lo.value <= cb.lower + 1e-3
        assert cb.upper - 1e-3 <= hi.value <= cb.upper + 1e-3

    def test_determinism(self):
        system, _, _ = consistent_system(25, K=2)
        config = SolverConfig(n_starts=10, seed=3)
        target = Target("mean", "t0", CellIndex((0, 0)))
        a = multistart_bound(system, target, "lower", config)
        b = multistart_bound(system, target, "lower", config)
        assert a.value == b.value
        assert a.feasible_count == b.feasible_count

    def test_infeasible_flagged_not_hidden(self):
        # [TRIVIAL] constructed infeasibility: two contradictory direct
        # restrictions on the same cell
        from conftest import consistent_trial
        trial, _, _ = consistent_trial(26, K=1)
        cell = CellIndex((0,))
        assumptions = [
            Assumption(AssumptionForm.DIRECT, "t0", cell, 0.9, 1.0),
            Assumption(AssumptionForm.DIRECT, "t0", cell, 0.0, 0.1,
                       t_prime=None),
        ]
        system = build_system(trial, ["t0"], assumptions)
        report = multistart_bound(system, Target("mean", "t0", cell), "lower",
                                  SolverConfig(n_starts=10, seed=0))
        assert report.status == "Heuristic-Infeasible"
        assert report.feasible_count == 0
        assert report.best_infeasible is not None
        value, violation = report.best_infeasible
        assert violation > 0.3  # the two bands are 0.8 apart
