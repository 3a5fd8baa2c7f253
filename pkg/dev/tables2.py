"""Dev experiment: reproduce Tables 2A/2B (b = 0.05) under both readings."""
import sys
import time

import numpy as np

from longbounds.model import build_system, bounded_variation_family, enumerate_cells
from longbounds.nlp import SolverConfig, Target, multistart_bound
from dev_common import load_trial

TABLE_2A = {  # empagliflozin
    "YML": (0.060, 0.133), "OML": (0.063, 0.159), "YFL": (0.033, 0.144),
    "OFL": (0.047, 0.153), "YMH": (0.056, 0.160), "OMH": (0.067, 0.178),
    "YFH": (0.020, 0.155), "OFH": (0.052, 0.191),
}
TABLE_2B = {  # placebo
    "YML": (0.103, 0.136), "OML": (0.152, 0.173), "YFL": (0.056, 0.099),
    "OFL": (0.105, 0.142), "YMH": (0.055, 0.094), "OMH": (0.105, 0.142),
    "YFH": (0.105, 0.142), "OFH": (0.134, 0.192),
}

mode = sys.argv[1] if len(sys.argv) > 1 else "literal"
n_starts = int(sys.argv[2]) if len(sys.argv) > 2 else 40
trial = load_trial()
arms = ["empagliflozin", "placebo"]

if mode in ("literal", "literal-eq"):
    asms = bounded_variation_family(3, arms, 0.05, "literal", include_equal=mode == "literal-eq")
    systems = {t: build_system(trial, arms, asms) for t in arms}
else:
    systems = {
        t: build_system(trial, [t], bounded_variation_family(3, [t], 0.05, "within-arm"))
        for t in arms
    }

cfg = SolverConfig(n_starts=n_starts, seed=12345)
t0 = time.time()
for t, table in (("empagliflozin", TABLE_2A), ("placebo", TABLE_2B)):
    system = systems[t]
    print(f"== {t} (lp_eligible={system.lp_eligible})")
    hits = 0
    for cell in enumerate_cells(3):
        label = trial.cell_label(cell)
        lo = multistart_bound(system, Target("mean", t, cell), "lower", cfg)
        hi = multistart_bound(system, Target("mean", t, cell), "upper", cfg)
        plo, phi = table[label]
        ok_lo = abs(lo.value - plo) <= 0.03
        ok_hi = abs(hi.value - phi) <= 0.03
        hits += ok_lo + ok_hi
        print(f"{label}: [{lo.value:.3f}, {hi.value:.3f}] paper [{plo:.3f}, {phi:.3f}] "
              f"{'ok' if ok_lo else 'MISS'}/{'ok' if ok_hi else 'MISS'} "
              f"feas={lo.feasible_count}/{hi.feasible_count}")
    print(f"hits {hits}/16, elapsed {time.time()-t0:.1f}s")
