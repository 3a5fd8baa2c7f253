"""Dev harness: oracle vs LP on 10 random K<=2 fixtures (acceptance item 5).

Paper context: validates that the sampling oracle's inner intervals track
the LP sharp bounds within 0.02 at the default budget.
"""
import time

import numpy as np

from longbounds import lp as lpmod
from longbounds.model import ArmSummary, TrialSummary, build_system, enumerate_cells
from longbounds.oracle import OracleBudget, grid_bounds


def make_fixture(seed, K):
    rng = np.random.default_rng(seed)
    C = 1 << K
    probs = rng.dirichlet(np.ones(C)); means = rng.random(C)
    bits = (np.arange(C)[:, None] >> np.arange(K)) & 1
    p_marg = (bits * probs[:, None]).sum(axis=0)
    s1 = ((bits.T * (means * probs)).sum(axis=1)) / p_marg
    s0 = (((1 - bits.T) * (means * probs)).sum(axis=1)) / (1 - p_marg)
    labels = tuple((f"L{k}0", f"L{k}1") for k in range(K))
    trial = TrialSummary(K=K, covariate_labels=labels,
        arms=(ArmSummary(treatment_id="tr", n_subjects=1000, marginal=tuple(p_marg),
                         short_mean_0=tuple(s0), short_mean_1=tuple(s1)),))
    return build_system(trial, ["tr"])


if __name__ == "__main__":
    tot0 = time.time()
    overall = 0.0
    for seed in range(10):
        K = 2 if seed % 2 == 0 else 1
        system = make_fixture(seed + 10, K)
        budget = OracleBudget(seed=seed)
        t0 = time.time()
        worst = 0.0
        rp = lpmod.reparameterize(system)
        for cell in enumerate_cells(K):
            cb = lpmod.cell_mean_bounds(rp, "tr", cell)
            lo, hi = grid_bounds(system, "tr", cell, budget)
            assert lo >= cb.lower - 1e-6 and hi <= cb.upper + 1e-6, \
                (lo, cb.lower, hi, cb.upper)
            worst = max(worst, lo - cb.lower, cb.upper - hi)
        overall = max(overall, worst)
        print(f"seed {seed} K={K}: worst gap {worst:.4f}, {time.time()-t0:.1f}s",
              flush=True)
    print(f"total {time.time()-tot0:.1f}s, overall worst gap {overall:.4f}")
