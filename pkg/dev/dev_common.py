import json
import pathlib

from longbounds.model import ArmSummary, TrialSummary

DATA = pathlib.Path(__file__).resolve().parent.parent / "src" / "longbounds" / "data"


def load_trial():
    doc = json.load(open(DATA / "zinman2015.json"))
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
    return TrialSummary(
        K=3,
        covariate_labels=tuple((c["label0"], c["label1"]) for c in doc["covariates"]),
        arms=arms,
    )
