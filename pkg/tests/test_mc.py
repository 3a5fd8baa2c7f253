"""Monte Carlo imprecision module: truth validation, trial drawing, studies."""

import json

import numpy as np
import pytest

from longbounds.errors import DegenerateSample, StudyFailure, ValidationError
from longbounds.lp import cell_mean_bounds, reparameterize
from longbounds.mc import (
    BoundsConfig,
    GroundTruth,
    _nearest_rank,
    _round_summaries,
    draw_trial,
    exact_trial,
    imprecision_study,
)
from longbounds.model import ArmSummary, CellIndex, TrialSummary, build_system

from conftest import DATA


def uniform_truth(**overrides) -> GroundTruth:
    base = dict(
        K=2,
        covariate_labels=(("a", "A"), ("b", "B")),
        cell_probs=(0.25, 0.25, 0.25, 0.25),
        long_means={"tr": (0.2, 0.4, 0.6, 0.8), "ctl": (0.3, 0.3, 0.5, 0.7)},
        assignment={"tr": 0.5, "ctl": 0.5},
    )
    base.update(overrides)
    return GroundTruth(**base)


class TestGroundTruth:
    def test_valid(self):
        truth = uniform_truth()
        assert truth.treatment_ids == ("tr", "ctl")

    def test_probs_must_sum_to_one(self):
        with pytest.raises(ValidationError):
            uniform_truth(cell_probs=(0.3, 0.3, 0.3, 0.3))

    def test_assignment_must_sum_to_one(self):
        with pytest.raises(ValidationError):
            uniform_truth(assignment={"tr": 0.7, "ctl": 0.7})

    def test_means_in_box(self):
        with pytest.raises(ValidationError):
            uniform_truth(long_means={"tr": (0.2, 0.4, 0.6, 1.8),
                                      "ctl": (0.3, 0.3, 0.5, 0.7)})

    def test_arm_sets_must_match(self):
        with pytest.raises(ValidationError):
            uniform_truth(assignment={"tr": 1.0})

    def test_bundled_fixtures_load(self):
        for name in ("truth_zinman.json", "truth_uniform.json"):
            doc = json.loads((DATA / name).read_text())
            truth = GroundTruth(
                K=doc["K"],
                covariate_labels=tuple((c["label0"], c["label1"])
                                       for c in doc["covariates"]),
                cell_probs=doc["cell_probs"],
                long_means=doc["long_means"],
                assignment=doc["assignment"],
            )
            assert sum(truth.cell_probs) == pytest.approx(1.0, abs=1e-9)


class TestDrawTrial:
    def test_determinism(self):
        # [TRIVIAL] determinism contract
        truth = uniform_truth()
        a = draw_trial(truth, 5000, 42)
        b = draw_trial(truth, 5000, 42)
        assert a == b

    def test_zero_means_give_zero_shorts(self):
        # [TRIVIAL] degenerate Bernoulli
        truth = uniform_truth(long_means={"tr": (0.0,) * 4, "ctl": (0.0,) * 4})
        trial = draw_trial(truth, 2000, 0)
        for arm in trial.arms:
            assert arm.short_mean_0 == (0.0, 0.0)
            assert arm.short_mean_1 == (0.0, 0.0)

    def test_large_sample_close_to_population(self):
        # [DERIVED] binomial concentration at n = 2*10^5
        truth = uniform_truth()
        trial = draw_trial(truth, 200_000, 7)
        exact = exact_trial(truth)
        for drawn, pop in zip(trial.arms, exact.arms):
            assert np.allclose(drawn.marginal, pop.marginal, atol=0.01)
            assert np.allclose(drawn.short_mean_0, pop.short_mean_0, atol=0.01)
            assert np.allclose(drawn.short_mean_1, pop.short_mean_1, atol=0.01)

    def test_internally_consistent_counts(self):
        # Summaries built from raw counts imply a zero overall-mean spread.
        from longbounds.model import implied_overall_means
        trial = draw_trial(uniform_truth(), 5000, 3)
        for arm in trial.arms:
            _, spread = implied_overall_means(arm)
            assert spread < 1e-12

    def test_empty_arm_degenerate(self):
        truth = uniform_truth(assignment={"tr": 1.0, "ctl": 0.0})
        with pytest.raises(DegenerateSample):
            draw_trial(truth, 100, 0)


class TestExactTrial:
    def test_matches_direct_computation(self):
        # [TRIVIAL] no sampling noise: LP endpoints from the exact summaries
        # equal the direct computation on truth-implied summaries
        truth = uniform_truth()
        trial = exact_trial(truth)
        system = build_system(trial, truth.treatment_ids)
        reparam = reparameterize(system)
        report = imprecision_study(truth, 7020, reps=2, exact=True, seed=0)
        for (t, label, side), stats in report.endpoints.items():
            cell = trial.cell_from_label(label)
            cb = cell_mean_bounds(reparam, t, cell)
            want = cb.lower if side == "lower" else cb.upper
            for v in stats.values:
                assert v == pytest.approx(want, abs=1e-9)
            assert stats.sd == pytest.approx(0.0, abs=1e-12)


class TestRounding:
    def test_round_summaries(self):
        arm = ArmSummary("t", 100, (0.45678,), (0.12344,), (0.87655,))
        trial = TrialSummary(K=1, covariate_labels=(("a", "A"),), arms=(arm,))
        rounded = _round_summaries(trial)
        assert rounded.arms[0].marginal == (0.457,)
        assert rounded.arms[0].short_mean_0 == (0.123,)

    def test_marginal_rounding_to_zero_degenerate(self):
        arm = ArmSummary("t", 100, (0.0002,), (0.1,), (0.1,))
        trial = TrialSummary(K=1, covariate_labels=(("a", "A"),), arms=(arm,))
        with pytest.raises(DegenerateSample):
            _round_summaries(trial)


class TestNearestRank:
    def test_rule(self):
        vals = np.arange(1.0, 11.0)  # 1..10
        # ceil(0.05*10)=1st smallest; ceil(0.95*10)=10th smallest
        assert _nearest_rank(vals, 5.0) == 1.0
        assert _nearest_rank(vals, 95.0) == 10.0
        assert _nearest_rank(vals, 50.0) == 5.0

    def test_small_n(self):
        vals = np.array([3.0, 7.0])
        assert _nearest_rank(vals, 5.0) == 3.0
        assert _nearest_rank(vals, 95.0) == 7.0


class TestImprecisionStudy:
    def test_reps_validation(self):
        with pytest.raises(ValidationError):
            imprecision_study(uniform_truth(), 1000, reps=1)

    def test_determinism(self):
        # [TRIVIAL] fixed seed reproduces the report bit-identically
        truth = uniform_truth()
        a = imprecision_study(truth, 2000, reps=3, seed=11)
        b = imprecision_study(truth, 2000, reps=3, seed=11)
        assert a.endpoints == b.endpoints
        assert a.statuses == b.statuses

    def test_status_tally(self):
        truth = uniform_truth()
        report = imprecision_study(truth, 2000, reps=4, seed=5)
        assert len(report.statuses) == 4
        assert sum(report.status_tally.values()) == 4
        assert report.n_used == report.status_tally.get("ok", 0)

    def test_all_failures_raise(self):
        truth = uniform_truth(assignment={"tr": 1.0, "ctl": 0.0})
        with pytest.raises(StudyFailure):
            imprecision_study(truth, 100, reps=2, seed=0)

    def test_sd_decreases_with_n(self):
        # SD of varying endpoints shrinks monotonically over N in
        # {1e3, 1e4, 1e5} on the synthetic uniform truth.
        truth = uniform_truth()
        config = BoundsConfig()
        sds = []
        for n in (1_000, 10_000, 100_000):
            report = imprecision_study(truth, n, reps=30, bounds_config=config,
                                       seed=2)
            vals = [s.sd for s in report.endpoints.values() if s.sd > 1e-6]
            assert vals
            sds.append(np.mean(vals))
        assert sds[0] > sds[1] > sds[2]
