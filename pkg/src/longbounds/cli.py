"""Command-line interface: parse trial summary files, dispatch to the
certified-LP or heuristic-NLP route, and render bound tables, diagnostics,
and simulation reports as markdown (3 decimals) or CSV (full precision).

Exit codes: 0 success; 2 input validation failure; 3 infeasible input;
4 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from .errors import (
    InfeasibleInput,
    LongBoundsError,
    NumericalFailure,
    ParseError,
    RouteError,
    SolverFailure,
    StudyFailure,
    ValidationError,
)
from .lp import BoundStatus, cell_mean_bounds, contrast_bounds, reparameterize
from .model import (
    ArmSummary,
    Assumption,
    AssumptionForm,
    CellIndex,
    Route,
    TrialSummary,
    bounded_variation_family,
    build_system,
    classify_route,
    enumerate_cells,
    implied_overall_means,
)
from .mc import BoundsConfig, GroundTruth, imprecision_study
from .nlp import SolverConfig, Target, multistart_bound

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3
EXIT_SOLVER = 4


# ---------------------------------------------------------------------------
# Input parsing

def _require(doc, key, path):
    if not isinstance(doc, dict) or key not in doc:
        raise ParseError(f"missing field {path}.{key}" if path else f"missing field {key}")
    return doc[key]


def parse_input(path: str) -> TrialSummary:
    """Load and validate a trial summary document.

    Schema: ``{"covariates": [{"label0", "label1"}...],
    "arms": [{"treatment", "n", "marginals_p1", "short_mean_x0",
    "short_mean_x1"}...]}``.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ParseError(f"{path} is not valid JSON: {e}") from e
    covs = _require(doc, "covariates", "")
    if not isinstance(covs, list) or not covs:
        raise ParseError("covariates must be a nonempty list")
    labels = []
    for i, c in enumerate(covs):
        labels.append((str(_require(c, "label0", f"covariates[{i}]")),
                       str(_require(c, "label1", f"covariates[{i}]"))))
    arms_doc = _require(doc, "arms", "")
    if not isinstance(arms_doc, list) or not arms_doc:
        raise ParseError("arms must be a nonempty list")
    arms = []
    for i, a in enumerate(arms_doc):
        p = f"arms[{i}]"
        fields = {}
        for key in ("marginals_p1", "short_mean_x0", "short_mean_x1"):
            val = _require(a, key, p)
            if not isinstance(val, list) or not all(
                isinstance(v, (int, float)) for v in val
            ):
                raise ParseError(f"{p}.{key} must be a list of numbers")
            fields[key] = tuple(float(v) for v in val)
        arms.append(ArmSummary(
            treatment_id=str(_require(a, "treatment", p)),
            n_subjects=int(_require(a, "n", p)),
            marginal=fields["marginals_p1"],
            short_mean_0=fields["short_mean_x0"],
            short_mean_1=fields["short_mean_x1"],
        ))
    return TrialSummary(K=len(labels), covariate_labels=tuple(labels),
                        arms=tuple(arms))


def _parse_cell(spec: str, trial: TrialSummary) -> CellIndex:
    """A cell given as a label string (e.g. 'YFL') or a bit string ('010')."""
    if set(spec) <= {"0", "1"} and len(spec) == trial.K:
        return CellIndex(tuple(int(ch) for ch in spec))
    return trial.cell_from_label(spec)


def parse_assumptions(path: str, trial: TrialSummary) -> tuple[Assumption, ...]:
    """Load a list of ``{form, t, t_prime?, cell, cell_prime?, lo, hi}``."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ParseError(f"{path} is not valid JSON: {e}") from e
    if not isinstance(doc, list):
        raise ParseError("assumptions file must contain a JSON list")
    out = []
    for i, a in enumerate(doc):
        p = f"assumptions[{i}]"
        out.append(Assumption(
            form=AssumptionForm(_require(a, "form", p)),
            t=str(_require(a, "t", p)),
            cell=_parse_cell(str(_require(a, "cell", p)), trial),
            lo=float(_require(a, "lo", p)),
            hi=float(_require(a, "hi", p)),
            t_prime=str(a["t_prime"]) if a.get("t_prime") is not None else None,
            cell_prime=(_parse_cell(str(a["cell_prime"]), trial)
                        if a.get("cell_prime") is not None else None),
        ))
    return tuple(out)


def parse_truth(path: str) -> GroundTruth:
    """Load a GroundTruth document for the simulate subcommand."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ParseError(f"{path} is not valid JSON: {e}") from e
    covs = _require(doc, "covariates", "")
    return GroundTruth(
        K=int(_require(doc, "K", "")),
        covariate_labels=tuple((str(_require(c, "label0", f"covariates[{i}]")),
                                str(_require(c, "label1", f"covariates[{i}]")))
                               for i, c in enumerate(covs)),
        cell_probs=tuple(float(v) for v in _require(doc, "cell_probs", "")),
        long_means={str(t): tuple(float(v) for v in m)
                    for t, m in _require(doc, "long_means", "").items()},
        assignment={str(t): float(v)
                    for t, v in _require(doc, "assignment", "").items()},
    )


# ---------------------------------------------------------------------------
# Rendering

def _render_markdown(headers, rows) -> str:
    def fmt(v):
        return f"{v:.3f}" if isinstance(v, float) else str(v)
    lines = ["| " + " | ".join(headers) + " |",
             "| " + " | ".join("---" for _ in headers) + " |"]
    for row in rows:
        lines.append("| " + " | ".join(fmt(v) for v in row) + " |")
    return "\n".join(lines) + "\n"


def _render_csv(headers, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(headers)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _render(headers, rows, fmt: str) -> str:
    return (_render_csv if fmt == "csv" else _render_markdown)(headers, rows)


# ---------------------------------------------------------------------------
# Subcommands

def _selected_arms(trial: TrialSummary, args) -> list[str]:
    if args.arm:
        for t in args.arm:
            trial.arm(t)  # raises UnknownArm
        return list(args.arm)
    return [a.treatment_id for a in trial.arms]


def _gather_assumptions(trial, arm_ids, args) -> tuple[Assumption, ...]:
    out: list[Assumption] = []
    if getattr(args, "assumptions", None):
        out.extend(parse_assumptions(args.assumptions, trial))
    if getattr(args, "bv_adjacent", None) is not None:
        out.extend(bounded_variation_family(
            trial.K, arm_ids, args.bv_adjacent,
            interpretation=args.bv_interpretation,
        ))
    return tuple(out)


def _pick_route(system, method: str) -> Route:
    route = classify_route(system)
    if method == "lp":
        if route is not Route.EXACT_LP:
            raise RouteError(
                "method=lp requested but the system is not LP-eligible "
                "(cross-cell or cross-arm assumptions present)"
            )
        return Route.EXACT_LP
    if method == "nlp":
        return Route.HEURISTIC_NLP
    return route


def _solver_config(args) -> SolverConfig:
    return SolverConfig(n_starts=args.n_starts, seed=args.seed)


def cmd_bounds(args) -> str:
    trial = parse_input(args.input)
    arm_ids = _selected_arms(trial, args)
    assumptions = _gather_assumptions(trial, arm_ids, args)
    system = build_system(trial, arm_ids, assumptions,
                          eps_eq=args.eps_eq, eps_marg=args.eps_marg)
    route = _pick_route(system, args.method)
    rows = []
    if route is Route.EXACT_LP:
        reparam = reparameterize(system)
        for t in arm_ids:
            for cell in enumerate_cells(trial.K):
                cb = cell_mean_bounds(reparam, t, cell)
                if cb.status is BoundStatus.INFEASIBLE:
                    raise InfeasibleInput(
                        f"constraints infeasible at arm {t!r}, "
                        f"cell {trial.cell_label(cell)}"
                    )
                rows.append((t, trial.cell_label(cell), cb.lower, cb.upper,
                             cb.status.value))
    else:
        config = _solver_config(args)
        for t in arm_ids:
            for cell in enumerate_cells(trial.K):
                target = Target("mean", t, cell)
                lo = multistart_bound(system, target, "lower", config)
                hi = multistart_bound(system, target, "upper", config)
                status = ("Heuristic-Infeasible"
                          if "Heuristic-Infeasible" in (lo.status, hi.status)
                          else "Heuristic-NLP")
                rows.append((t, trial.cell_label(cell), lo.value, hi.value,
                             status))
    return _render(("arm", "cell", "lower", "upper", "status"), rows,
                   args.format)


def cmd_check(args) -> str:
    trial = parse_input(args.input)
    arm_ids = _selected_arms(trial, args)
    rows = []
    consistent = True
    for t in arm_ids:
        arm = trial.arm(t)
        means, spread = implied_overall_means(arm)
        verdict = "consistent" if spread <= 2 * args.eps_eq else "inconsistent"
        consistent = consistent and verdict == "consistent"
        for k in range(trial.K):
            rows.append((t, f"x{k + 1}", float(means[k]), float(spread), verdict))
    out = ["# implied overall means", "",
           _render(("arm", "covariate", "implied_overall_mean", "spread",
                    "verdict"), rows, args.format)]
    if len(arm_ids) > 1:
        disc_rows = []
        for i, t in enumerate(arm_ids):
            for tp in arm_ids[i + 1:]:
                d = np.abs(np.array(trial.arm(t).marginal)
                           - np.array(trial.arm(tp).marginal))
                for k in range(trial.K):
                    disc_rows.append((t, tp, f"x{k + 1}", float(d[k])))
        out += ["", "# cross-arm marginal discrepancies", "",
                _render(("arm", "arm_prime", "covariate", "abs_difference"),
                        disc_rows, args.format)]
    try:
        system = build_system(trial, arm_ids, eps_eq=args.eps_eq,
                              eps_marg=args.eps_marg)
        route = classify_route(system).value
    except InfeasibleInput:
        route = "none (infeasible input)"
        consistent = False
    out += ["", f"route: {route}",
            f"overall: {'consistent' if consistent else 'inconsistent'}", ""]
    return "\n".join(out)


def cmd_contrast(args) -> str:
    trial = parse_input(args.input)
    arm_ids = _selected_arms(trial, args)
    if len(arm_ids) != 2:
        raise ValidationError(
            f"contrast needs exactly two arms, got {arm_ids}"
        )
    t, tp = arm_ids
    assumptions = _gather_assumptions(trial, arm_ids, args)
    system = build_system(trial, arm_ids, assumptions,
                          eps_eq=args.eps_eq, eps_marg=args.eps_marg)
    route = _pick_route(system, args.method)
    rows = []
    if route is Route.EXACT_LP:
        reparam = reparameterize(system)
        for cell in enumerate_cells(trial.K):
            diff = contrast_bounds(reparam, t, tp, cell, "difference")
            ratio = contrast_bounds(reparam, t, tp, cell, "ratio")
            if BoundStatus.INFEASIBLE in (diff.status, ratio.status):
                raise InfeasibleInput(
                    f"constraints infeasible at cell {trial.cell_label(cell)}"
                )
            rows.append((trial.cell_label(cell), diff.lower, diff.upper,
                         ratio.lower, ratio.upper,
                         diff.status.value + "/" + ratio.status.value))
    else:
        config = _solver_config(args)
        for cell in enumerate_cells(trial.K):
            vals = {}
            statuses = []
            for kind in ("difference", "ratio"):
                target = Target(kind, t, cell, t_prime=tp)
                for side in ("lower", "upper"):
                    rep = multistart_bound(system, target, side, config)
                    vals[(kind, side)] = rep.value
                    statuses.append(rep.status)
            status = ("Heuristic-Infeasible"
                      if "Heuristic-Infeasible" in statuses
                      else "Heuristic-NLP")
            rows.append((trial.cell_label(cell),
                         vals[("difference", "lower")],
                         vals[("difference", "upper")],
                         vals[("ratio", "lower")], vals[("ratio", "upper")],
                         status))
    return _render(("cell", "diff_lower", "diff_upper", "ratio_lower",
                    "ratio_upper", "status"), rows, args.format)


def cmd_simulate(args) -> str:
    truth = parse_truth(args.truth)
    config = BoundsConfig(eps_eq=args.eps_eq, eps_marg=args.eps_marg,
                          round_summaries=args.round_summaries)
    report = imprecision_study(truth, args.n_total, args.reps,
                               bounds_config=config, seed=args.seed,
                               exact=args.exact)
    rows = [(t, label, side, s.mean, s.sd, s.p05, s.p95)
            for (t, label, side), s in sorted(report.endpoints.items())]
    tally_rows = sorted(report.status_tally.items())
    head = (f"simulation: n_total={report.n_total} reps={report.reps} "
            f"seed={report.seed} exact={report.exact}")
    return "\n".join([
        head, "", "# endpoint dispersion", "",
        _render(("arm", "cell", "side", "mean", "sd", "p05", "p95"), rows,
                args.format),
        "", "# replication statuses", "",
        _render(("status", "count"), tally_rows, args.format), "",
    ])


# ---------------------------------------------------------------------------
# Argument parsing and dispatch

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="longbounds",
        description="Sharp bounds on long mean treatment outcomes from "
                    "published binary-subgroup trial summaries.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, needs_input=True):
        if needs_input:
            p.add_argument("--input", required=True, help="trial summary JSON")
            p.add_argument("--arm", action="append", default=None,
                           help="restrict to this arm (repeatable)")
        p.add_argument("--eps-eq", type=float, default=1e-3,
                       help="equality band half-width (default 1e-3)")
        p.add_argument("--eps-marg", type=float, default=1e-2,
                       help="cross-arm marginal band half-width (default 1e-2)")
        p.add_argument("--format", choices=("markdown", "csv"),
                       default="markdown")
        p.add_argument("--output", default=None, help="write here, not stdout")
        p.add_argument("--seed", type=int, default=0)

    def solver_opts(p):
        p.add_argument("--assumptions", default=None,
                       help="JSON list of restrictions on long means")
        p.add_argument("--bv-adjacent", type=float, default=None, metavar="B",
                       help="add symmetric +/-B restrictions over all "
                            "adjacent cell pairs")
        p.add_argument("--bv-interpretation",
                       choices=("literal", "within-arm"), default="literal")
        p.add_argument("--method", choices=("auto", "lp", "nlp"),
                       default="auto")
        p.add_argument("--n-starts", type=int, default=200,
                       help="multistart count on the heuristic route")

    p = sub.add_parser("bounds", help="per-cell long mean bounds")
    common(p)
    solver_opts(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("check", help="input consistency diagnostics")
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("contrast", help="per-cell treatment effect bounds")
    common(p)
    solver_opts(p)
    p.set_defaults(func=cmd_contrast)

    p = sub.add_parser("simulate", help="sampling-imprecision study")
    common(p, needs_input=False)
    p.add_argument("--truth", required=True, help="ground truth JSON")
    p.add_argument("--n-total", type=int, required=True)
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--exact", action="store_true",
                   help="use population summaries (no sampling noise)")
    p.add_argument("--round-summaries", action="store_true",
                   help="round summaries to 3 decimals before solving")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text = args.func(args)
    except InfeasibleInput as e:
        print(f"error: infeasible input: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (SolverFailure, NumericalFailure, StudyFailure) as e:
        print(f"error: solver failure: {e}", file=sys.stderr)
        return EXIT_SOLVER
    except LongBoundsError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
