import json
import time

import numpy as np

from longbounds.model import ArmSummary, TrialSummary, build_system, implied_overall_means
from longbounds import lp as lpmod

doc = json.load(open("src/longbounds/data/zinman2015.json"))
arms = tuple(
    ArmSummary(
        treatment_id=a["treatment"],
        n_subjects=a["n"],
        marginal=a["marginals_p1"],
        short_mean_0=a["short_mean_x0"],
        short_mean_1=a["short_mean_x1"],
    )
    for a in doc["arms"]
)
trial = TrialSummary(K=3, covariate_labels=tuple((c["label0"], c["label1"]) for c in doc["covariates"]), arms=arms)

for arm in arms:
    mbar, spread = implied_overall_means(arm)
    print(arm.treatment_id, mbar, spread)

for arm_id in ("empagliflozin", "placebo"):
    sys1 = build_system(trial, [arm_id])
    rp = lpmod.reparameterize(sys1)
    t0 = time.time()
    print(f"== {arm_id}")
    for cell in sys1.cells:
        cb = lpmod.cell_mean_bounds(rp, arm_id, cell)
        print(trial.cell_label(cell), f"{cb.lower:.3f} {cb.upper:.3f}", cb.status.value)
    print("time", time.time() - t0)
