import time

import numpy as np

from longbounds.model import CellIndex, build_system
from longbounds import lp as lpmod
from longbounds.nlp import SolverConfig, Target, multistart_bound
from dev_common import load_trial

trial = load_trial()
sys1 = build_system(trial, ["empagliflozin"])
rp = lpmod.reparameterize(sys1)
cell = CellIndex((0, 0, 1))  # YMH
cb = lpmod.cell_mean_bounds(rp, "empagliflozin", cell)
print("LP:", cb.lower, cb.upper)

cfg = SolverConfig(n_starts=20, seed=7)
t0 = time.time()
for direction in ("lower", "upper"):
    rep = multistart_bound(sys1, Target("mean", "empagliflozin", cell), direction, cfg)
    print(direction, rep.value, rep.feasible_count, rep.status, f"{rep.wall_time_s:.2f}s")
print("total", time.time() - t0)
