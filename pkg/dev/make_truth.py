"""Dev: generate bundled GroundTruth fixtures.

Paper context: §4 proposes the Monte Carlo study but gives no concrete
hypothetical distribution; we reverse-engineer one consistent with the
§2.3 reported summaries by averaging LP vertex solutions (interior point
of the feasible polytope), plus a synthetic uniform K=2 fixture.
"""
import json

import numpy as np

from longbounds import lp as lpmod
from longbounds.model import ArmSummary, TrialSummary, build_system, enumerate_cells
from longbounds.mc import GroundTruth, exact_trial

d = json.load(open('/root/pkg/src/longbounds/data/zinman2015.json'))
labels = tuple((c['label0'], c['label1']) for c in d['covariates'])
arms = tuple(ArmSummary(a['treatment'], a['n'], tuple(a['marginals_p1']),
                        tuple(a['short_mean_x0']), tuple(a['short_mean_x1']))
             for a in d['arms'])
trial = TrialSummary(K=3, covariate_labels=labels, arms=arms)
ids = [a.treatment_id for a in arms]
system = build_system(trial, ids)
rp = lpmod.reparameterize(system)

zs = []
for t in ids:
    for cell in enumerate_cells(3):
        cb = lpmod.cell_mean_bounds(rp, t, cell)
        for sol in (cb.lower_solution, cb.upper_solution):
            y, tau = sol.x[:-1], sol.x[-1]
            if tau > 1e-9:
                zs.append(y / tau)
z = np.mean(zs, axis=0)
C = 8
P = z[len(ids) * C:]
P = P / P.sum()
long_means = {}
for i, t in enumerate(ids):
    w = z[i * C:(i + 1) * C]
    long_means[t] = np.clip(w / P, 0.0, 1.0)

n_e, n_p = arms[0].n_subjects, arms[1].n_subjects
truth = GroundTruth(
    K=3, covariate_labels=labels, cell_probs=tuple(P),
    long_means={t: tuple(m) for t, m in long_means.items()},
    assignment={ids[0]: n_e / (n_e + n_p), ids[1]: n_p / (n_e + n_p)},
)
# sanity: population summaries should sit close to the reported ones
ex = exact_trial(truth)
for arm, ref in zip(ex.arms, arms):
    for name in ("marginal", "short_mean_0", "short_mean_1"):
        got = np.array(getattr(arm, name)); want = np.array(getattr(ref, name))
        print(arm.treatment_id, name, np.abs(got - want).max())

doc = {
    "K": 3,
    "covariates": [{"label0": a, "label1": b} for a, b in labels],
    "cell_probs": list(P),
    "long_means": {t: list(map(float, m)) for t, m in long_means.items()},
    "assignment": {t: truth.assignment[t] for t in ids},
}
json.dump(doc, open('/root/pkg/src/longbounds/data/truth_zinman.json', 'w'), indent=2)

rng = np.random.default_rng(7)
means = {"tr": [0.2, 0.4, 0.6, 0.8], "ctl": [0.3, 0.3, 0.5, 0.7]}
doc2 = {
    "K": 2,
    "covariates": [{"label0": "A0", "label1": "A1"},
                   {"label0": "B0", "label1": "B1"}],
    "cell_probs": [0.25, 0.25, 0.25, 0.25],
    "long_means": means,
    "assignment": {"tr": 0.5, "ctl": 0.5},
}
json.dump(doc2, open('/root/pkg/src/longbounds/data/truth_uniform.json', 'w'), indent=2)
print("written")
