"""Monte Carlo sampling-imprecision studies.

Given a fully specified hypothetical joint distribution (cell
probabilities, per-treatment long means, assignment shares), simulate
finite trials, recompute the published-style summaries from each
pseudo-sample, re-solve the bounds, and summarize how the interval
endpoints disperse across replications.

No coverage guarantee is claimed: the study only exhibits endpoint
dispersion under repeated sampling.  Replications are seeded from a
single spawned seed sequence, so results are deterministic and
order-independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateSample,
    InfeasibleInput,
    SolverFailure,
    StudyFailure,
    ValidationError,
)
from .lp import BoundStatus, cell_mean_bounds, reparameterize
from .model import (
    DEFAULT_EPS_EQ,
    DEFAULT_EPS_MARG,
    ArmSummary,
    Assumption,
    CellIndex,
    ConstraintSystem,
    Route,
    TrialSummary,
    build_system,
    classify_route,
    enumerate_cells,
)
from .nlp import SolverConfig, Target, multistart_bound

_SUM_TOL = 1e-9


@dataclass(frozen=True)
class GroundTruth:
    """A hypothetical joint distribution of (outcome functions, covariates).

    ``long_means[t]`` lists E[y(t)|x = cell] in cell-rank order;
    ``cell_probs`` is P(x = cell); ``assignment`` gives each treatment's
    share of enrolled subjects.
    """

    K: int
    covariate_labels: tuple[tuple[str, str], ...]
    cell_probs: tuple[float, ...]
    long_means: dict[str, tuple[float, ...]]
    assignment: dict[str, float]

    def __post_init__(self):
        C = 1 << self.K
        object.__setattr__(self, "covariate_labels",
                           tuple((str(a), str(b)) for a, b in self.covariate_labels))
        object.__setattr__(self, "cell_probs",
                           tuple(float(v) for v in self.cell_probs))
        object.__setattr__(self, "long_means",
                           {t: tuple(float(v) for v in m)
                            for t, m in self.long_means.items()})
        object.__setattr__(self, "assignment",
                           {t: float(v) for t, v in self.assignment.items()})
        if len(self.covariate_labels) != self.K:
            raise ValidationError("need one label pair per covariate")
        if len(self.cell_probs) != C:
            raise ValidationError(f"cell_probs must have 2^K = {C} entries")
        if any(p < 0.0 for p in self.cell_probs):
            raise ValidationError("cell probabilities must be nonnegative")
        if abs(sum(self.cell_probs) - 1.0) > _SUM_TOL:
            raise ValidationError(
                f"cell probabilities sum to {sum(self.cell_probs)!r}, not 1"
            )
        if not self.long_means or set(self.long_means) != set(self.assignment):
            raise ValidationError("long_means and assignment must list the same arms")
        for t, m in self.long_means.items():
            if len(m) != C:
                raise ValidationError(f"arm {t!r}: need {C} long means")
            if any(not 0.0 <= v <= 1.0 for v in m):
                raise ValidationError(f"arm {t!r}: long means must lie in [0, 1]")
        if any(a < 0.0 for a in self.assignment.values()):
            raise ValidationError("assignment shares must be nonnegative")
        if abs(sum(self.assignment.values()) - 1.0) > _SUM_TOL:
            raise ValidationError(
                f"assignment shares sum to {sum(self.assignment.values())!r}, not 1"
            )

    @property
    def treatment_ids(self) -> tuple[str, ...]:
        return tuple(self.long_means)


def _bit_matrix(K: int) -> np.ndarray:
    return (np.arange(1 << K)[:, None] >> np.arange(K)) & 1


def _arm_summary_from_counts(treatment_id: str, counts: np.ndarray,
                             successes: np.ndarray, K: int) -> ArmSummary:
    """Sample-frequency summaries from per-cell subject and success counts."""
    bits = _bit_matrix(K)
    n_arm = int(counts.sum())
    if n_arm == 0:
        raise DegenerateSample(f"arm {treatment_id!r} drew no subjects")
    n1 = counts @ bits
    n0 = n_arm - n1
    if (n1 == 0).any() or (n0 == 0).any():
        raise DegenerateSample(
            f"arm {treatment_id!r} has an empty covariate stratum"
        )
    y1 = successes @ bits
    y0 = successes.sum() - y1
    return ArmSummary(
        treatment_id=treatment_id,
        n_subjects=n_arm,
        marginal=tuple(n1 / n_arm),
        short_mean_0=tuple(y0 / n0),
        short_mean_1=tuple(y1 / n1),
    )


def draw_trial(truth: GroundTruth, n_total: int, seed) -> TrialSummary:
    """One simulated trial: subjects drawn cell-by-cell, assigned to arms,
    with Bernoulli outcomes; summaries are sample frequencies."""
    if n_total < 1:
        raise ValidationError(f"n_total must be >= 1, got {n_total}")
    rng = np.random.default_rng(seed)
    arms_ids = truth.treatment_ids
    C = 1 << truth.K
    shares = np.array([truth.assignment[t] for t in arms_ids])
    joint = shares[:, None] * np.asarray(truth.cell_probs)[None, :]
    counts = rng.multinomial(n_total, joint.ravel()).reshape(len(arms_ids), C)
    arms = []
    for i, t in enumerate(arms_ids):
        means = np.asarray(truth.long_means[t])
        successes = rng.binomial(counts[i], means)
        arms.append(_arm_summary_from_counts(t, counts[i], successes, truth.K))
    return TrialSummary(K=truth.K, covariate_labels=truth.covariate_labels,
                        arms=tuple(arms))


def exact_trial(truth: GroundTruth, n_total: int = 10**9) -> TrialSummary:
    """Population summaries implied by the truth (the no-sampling-noise mode)."""
    bits = _bit_matrix(truth.K)
    p = np.asarray(truth.cell_probs)
    p1 = p @ bits
    arms = []
    for t in truth.treatment_ids:
        m = np.asarray(truth.long_means[t])
        s1 = (m * p) @ bits / p1
        s0 = (m * p) @ (1 - bits) / (1.0 - p1)
        n_arm = max(1, round(truth.assignment[t] * n_total))
        arms.append(ArmSummary(t, n_arm, tuple(p1), tuple(s0), tuple(s1)))
    return TrialSummary(K=truth.K, covariate_labels=truth.covariate_labels,
                        arms=tuple(arms))


@dataclass(frozen=True)
class BoundsConfig:
    """How each replication's summaries are turned into bounds."""

    eps_eq: float = DEFAULT_EPS_EQ
    eps_marg: float = DEFAULT_EPS_MARG
    assumptions: tuple[Assumption, ...] = ()
    round_summaries: bool = False  # mimic 3-decimal journal reporting
    solver: SolverConfig = field(default_factory=lambda: SolverConfig(n_starts=20))


@dataclass(frozen=True)
class EndpointStats:
    values: tuple[float, ...]
    mean: float
    sd: float
    p05: float
    p95: float


@dataclass(frozen=True)
class SimulationReport:
    n_total: int
    reps: int
    seed: int
    exact: bool
    config: BoundsConfig
    endpoints: dict[tuple[str, str, str], EndpointStats]  # (arm, cell label, side)
    statuses: tuple[str, ...]  # per replication: ok | degenerate-sample | infeasible
    status_tally: dict[str, int]

    @property
    def n_used(self) -> int:
        return self.status_tally.get("ok", 0)


def _nearest_rank(sorted_vals: np.ndarray, pct: float) -> float:
    """Nearest-rank percentile: the ceil(p/100 * n)-th smallest value."""
    rank = max(1, math.ceil(pct / 100.0 * len(sorted_vals)))
    return float(sorted_vals[rank - 1])


def _round_summaries(trial: TrialSummary) -> TrialSummary:
    arms = []
    for arm in trial.arms:
        rounded = [tuple(round(v, 3) for v in seq)
                   for seq in (arm.marginal, arm.short_mean_0, arm.short_mean_1)]
        if any(not 0.0 < v < 1.0 for v in rounded[0]):
            raise DegenerateSample(
                f"arm {arm.treatment_id!r}: marginal rounds to 0 or 1"
            )
        arms.append(ArmSummary(arm.treatment_id, arm.n_subjects,
                               rounded[0], rounded[1], rounded[2]))
    return TrialSummary(K=trial.K, covariate_labels=trial.covariate_labels,
                        arms=tuple(arms))


def _replication_endpoints(trial: TrialSummary, truth: GroundTruth,
                           config: BoundsConfig):
    """(key -> value) for every cell-mean endpoint of one replication."""
    system = build_system(trial, truth.treatment_ids, config.assumptions,
                          eps_eq=config.eps_eq, eps_marg=config.eps_marg)
    out: dict[tuple[str, str, str], float] = {}
    if classify_route(system) is Route.EXACT_LP:
        reparam = reparameterize(system)
        for t in truth.treatment_ids:
            for cell in enumerate_cells(truth.K):
                cb = cell_mean_bounds(reparam, t, cell)
                if cb.status is BoundStatus.INFEASIBLE:
                    raise InfeasibleInput(
                        f"replication infeasible at arm {t!r}, cell {cell.bits}"
                    )
                label = trial.cell_label(cell)
                out[(t, label, "lower")] = cb.lower
                out[(t, label, "upper")] = cb.upper
    else:
        for t in truth.treatment_ids:
            for cell in enumerate_cells(truth.K):
                target = Target("mean", t, cell)
                label = trial.cell_label(cell)
                for side in ("lower", "upper"):
                    rep = multistart_bound(system, target, side, config.solver)
                    out[(t, label, side)] = rep.value
    return out


def imprecision_study(truth: GroundTruth, n_total: int, reps: int,
                      bounds_config: BoundsConfig | None = None, seed: int = 0,
                      exact: bool = False) -> SimulationReport:
    """Replicate trial draws and summarize endpoint sampling variation.

    Replications that raise DegenerateSample or InfeasibleInput are tallied
    and excluded from the endpoint statistics; if every replication fails,
    the whole study fails.
    """
    if reps < 2:
        raise ValidationError(f"reps must be >= 2, got {reps}")
    config = bounds_config if bounds_config is not None else BoundsConfig()
    children = np.random.SeedSequence(seed).spawn(reps)
    per_key: dict[tuple[str, str, str], list[float]] = {}
    statuses: list[str] = []
    for r in range(reps):
        try:
            trial = (exact_trial(truth, n_total) if exact
                     else draw_trial(truth, n_total, children[r]))
            if config.round_summaries:
                trial = _round_summaries(trial)
            endpoints = _replication_endpoints(trial, truth, config)
        except DegenerateSample:
            statuses.append("degenerate-sample")
            continue
        except (InfeasibleInput, SolverFailure):
            statuses.append("infeasible")
            continue
        statuses.append("ok")
        for key, value in endpoints.items():
            per_key.setdefault(key, []).append(value)
    tally: dict[str, int] = {}
    for s in statuses:
        tally[s] = tally.get(s, 0) + 1
    if not per_key:
        raise StudyFailure(
            f"all {reps} replications failed: {tally}"
        )
    stats: dict[tuple[str, str, str], EndpointStats] = {}
    for key, values in per_key.items():
        arr = np.asarray(values)
        srt = np.sort(arr)
        sd = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
        stats[key] = EndpointStats(
            values=tuple(float(v) for v in arr),
            mean=float(arr.mean()),
            sd=sd,
            p05=_nearest_rank(srt, 5.0),
            p95=_nearest_rank(srt, 95.0),
        )
    return SimulationReport(
        n_total=n_total, reps=reps, seed=seed, exact=exact, config=config,
        endpoints=stats, statuses=tuple(statuses), status_tally=tally,
    )
