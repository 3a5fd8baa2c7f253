import json
import pathlib

import numpy as np
import pytest

from longbounds.model import ArmSummary, TrialSummary, build_system

FIXTURES = pathlib.Path(__file__).parent / "fixtures"
DATA = pathlib.Path(__file__).parents[1] / "src" / "longbounds" / "data"


def load_trial(path) -> TrialSummary:
    doc = json.loads(pathlib.Path(path).read_text())
    labels = tuple((c["label0"], c["label1"]) for c in doc["covariates"])
    arms = tuple(
        ArmSummary(a["treatment"], a["n"], tuple(a["marginals_p1"]),
                   tuple(a["short_mean_x0"]), tuple(a["short_mean_x1"]))
        for a in doc["arms"]
    )
    return TrialSummary(K=len(labels), covariate_labels=labels, arms=arms)


def consistent_trial(seed: int, K: int, n_arms: int = 1,
                     n_subjects: int = 1000) -> tuple[TrialSummary, np.ndarray, dict]:
    """A trial whose summaries come from an exactly feasible joint truth.

    Returns (trial, cell probabilities, {arm: long means}).
    """
    rng = np.random.default_rng(seed)
    C = 1 << K
    probs = rng.dirichlet(np.ones(C))
    bits = (np.arange(C)[:, None] >> np.arange(K)) & 1
    p_marg = (bits * probs[:, None]).sum(axis=0)
    arms = []
    truth_means = {}
    for a in range(n_arms):
        means = rng.random(C)
        s1 = ((bits.T * (means * probs)).sum(axis=1)) / p_marg
        s0 = (((1 - bits.T) * (means * probs)).sum(axis=1)) / (1 - p_marg)
        tid = f"t{a}"
        truth_means[tid] = means
        arms.append(ArmSummary(tid, n_subjects, tuple(p_marg), tuple(s0),
                               tuple(s1)))
    labels = tuple((f"L{k}0", f"L{k}1") for k in range(K))
    trial = TrialSummary(K=K, covariate_labels=labels, arms=tuple(arms))
    return trial, probs, truth_means


def consistent_system(seed: int, K: int, n_arms: int = 1, **kwargs):
    trial, probs, truth_means = consistent_trial(seed, K, n_arms)
    arm_ids = [a.treatment_id for a in trial.arms]
    return build_system(trial, arm_ids, **kwargs), probs, truth_means


@pytest.fixture(scope="session")
def zinman_trial() -> TrialSummary:
    return load_trial(DATA / "zinman2015.json")
