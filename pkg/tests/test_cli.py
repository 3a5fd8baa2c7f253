"""Command-line interface: parsing, rendering, exit codes."""

import csv
import json
import re

import pytest

from longbounds.cli import (
    EXIT_INFEASIBLE,
    EXIT_OK,
    EXIT_SOLVER,
    EXIT_VALIDATION,
    main,
    parse_input,
)
from longbounds.errors import ParseError
from longbounds.lp import cell_mean_bounds, reparameterize
from longbounds.model import build_system, enumerate_cells

from conftest import DATA

TRIAL = str(DATA / "zinman2015.json")
TRUTH = str(DATA / "truth_uniform.json")


@pytest.fixture()
def bad_trial(tmp_path):
    def write(mutate):
        doc = json.loads((DATA / "zinman2015.json").read_text())
        mutate(doc)
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        return str(path)
    return write


class TestParseInput:
    def test_bundled_dataset(self):
        # [REPORTED] marginals published with the bundled trial dataset
        trial = parse_input(TRIAL)
        assert trial.K == 3
        assert trial.arm("empagliflozin").marginal == (0.446, 0.288, 0.315)
        assert trial.arm("placebo").marginal == (0.444, 0.280, 0.311)

    def test_missing_field_names_path(self, bad_trial):
        path = bad_trial(lambda d: d["arms"][1].pop("short_mean_x1"))
        with pytest.raises(ParseError, match=r"arms\[1\]\.short_mean_x1"):
            parse_input(path)

    def test_not_json(self, tmp_path):
        p = tmp_path / "x.json"
        p.write_text("{nope")
        with pytest.raises(ParseError):
            parse_input(str(p))

    def test_missing_file(self):
        with pytest.raises(ParseError):
            parse_input("/no/such/file.json")


class TestBounds:
    def test_markdown_table(self, capsys):
        # [TRIVIAL] 8 rows in deterministic cell-label order, every row
        # carrying a certification status; markdown renders 3 decimals
        rc = main(["bounds", "--input", TRIAL, "--arm", "empagliflozin"])
        out = capsys.readouterr().out
        assert rc == EXIT_OK
        rows = [ln for ln in out.splitlines() if ln.startswith("| empagliflozin")]
        assert len(rows) == 8
        labels = [r.split("|")[2].strip() for r in rows]
        assert labels == ["YML", "OML", "YFL", "OFL", "YMH", "OMH", "YFH", "OFH"]
        assert all("Certified-LP" in r for r in rows)
        assert re.search(r"\| \d\.\d{3} \| \d\.\d{3} \|", rows[0])

    def test_csv_round_trips_full_precision(self, tmp_path, capsys):
        out_path = tmp_path / "bounds.csv"
        rc = main(["bounds", "--input", TRIAL, "--arm", "placebo",
                   "--format", "csv", "--output", str(out_path)])
        assert rc == EXIT_OK
        with open(out_path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 8
        trial = parse_input(TRIAL)
        reparam = reparameterize(build_system(trial, ["placebo"]))
        for row, cell in zip(rows, enumerate_cells(3)):
            cb = cell_mean_bounds(reparam, "placebo", cell)
            assert float(row["lower"]) == cb.lower
            assert float(row["upper"]) == cb.upper

    def test_unknown_arm_exit(self, capsys):
        rc = main(["bounds", "--input", TRIAL, "--arm", "nope"])
        assert rc == EXIT_VALIDATION
        assert "error" in capsys.readouterr().err

    def test_parse_error_exit(self, bad_trial, capsys):
        path = bad_trial(lambda d: d["arms"][0].pop("n"))
        rc = main(["bounds", "--input", path])
        assert rc == EXIT_VALIDATION

    def test_range_error_exit(self, bad_trial, capsys):
        path = bad_trial(
            lambda d: d["arms"][0].__setitem__("marginals_p1", [1.2, 0.3, 0.3])
        )
        rc = main(["bounds", "--input", path])
        assert rc == EXIT_VALIDATION
        assert "marginal" in capsys.readouterr().err

    def test_infeasible_exit(self, bad_trial, capsys):
        # Implied overall means 0.2 vs 0.5 vs 0.5: inconsistent reporting.
        def mutate(d):
            d["arms"][0]["marginals_p1"] = [0.5, 0.5, 0.5]
            d["arms"][0]["short_mean_x0"] = [0.2, 0.5, 0.5]
            d["arms"][0]["short_mean_x1"] = [0.2, 0.5, 0.5]
        rc = main(["bounds", "--input", bad_trial(mutate),
                   "--arm", "empagliflozin"])
        assert rc == EXIT_INFEASIBLE
        assert "infeasible" in capsys.readouterr().err

    def test_method_lp_rejected_on_nlp_system(self, capsys):
        rc = main(["bounds", "--input", TRIAL, "--method", "lp",
                   "--bv-adjacent", "0.05"])
        assert rc == EXIT_VALIDATION
        assert "LP-eligible" in capsys.readouterr().err


class TestCheck:
    def test_consistent_report(self, capsys):
        # [DERIVED] hand arithmetic: spread about 2e-4, under the default band
        rc = main(["check", "--input", TRIAL])
        out = capsys.readouterr().out
        assert rc == EXIT_OK
        assert "implied overall means" in out
        assert "cross-arm marginal discrepancies" in out
        assert "route: ExactLP" in out
        assert "overall: consistent" in out

    def test_inconsistent_report(self, bad_trial, capsys):
        def mutate(d):
            d["arms"][0]["short_mean_x0"] = [0.2, 0.5, 0.5]
            d["arms"][0]["short_mean_x1"] = [0.2, 0.5, 0.5]
            d["arms"][0]["marginals_p1"] = [0.5, 0.5, 0.5]
        rc = main(["check", "--input", bad_trial(mutate)])
        out = capsys.readouterr().out
        assert rc == EXIT_OK  # check reports, it does not fail
        assert "inconsistent" in out


class TestContrast:
    def test_needs_two_arms(self, capsys):
        rc = main(["contrast", "--input", TRIAL, "--arm", "placebo"])
        assert rc == EXIT_VALIDATION

    def test_lp_contrast_table(self, capsys):
        rc = main(["contrast", "--input", TRIAL])
        out = capsys.readouterr().out
        assert rc == EXIT_OK
        rows = [ln for ln in out.splitlines()
                if ln.startswith("|") and "---" not in ln]
        assert len(rows) == 9  # header + 8 cells
        assert "diff_lower" in rows[0]


class TestSimulate:
    def test_quick_study(self, capsys):
        rc = main(["simulate", "--truth", TRUTH, "--n-total", "2000",
                   "--reps", "3", "--seed", "1"])
        out = capsys.readouterr().out
        assert rc == EXIT_OK
        assert "endpoint dispersion" in out
        assert "replication statuses" in out

    def test_all_degenerate_is_solver_failure(self, tmp_path, capsys):
        doc = json.loads((DATA / "truth_uniform.json").read_text())
        doc["assignment"] = {"tr": 1.0, "ctl": 0.0}
        path = tmp_path / "truth.json"
        path.write_text(json.dumps(doc))
        rc = main(["simulate", "--truth", str(path), "--n-total", "100",
                   "--reps", "2"])
        assert rc == EXIT_SOLVER
        assert "solver failure" in capsys.readouterr().err
