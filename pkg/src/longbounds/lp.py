"""Certified bounds for binary outcomes via joint-probability reparameterization.

With binary outcomes the unknown cell means can be replaced by the joint
probabilities w[t, cell] = P(outcome = 1 and covariates = cell), which
turns every accounting identity affine.  Cell means become the linear
fraction w / P, so each sharp endpoint is a linear-fractional program that
a Charnes-Cooper scaling converts into an LP solved by the in-repo simplex.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import RouteError, ShapeError, UnknownArm, ValidationError
from .model import Assumption, AssumptionForm, CellIndex, ConstraintSystem, LongPoint
from .simplex import LinearProgram, LpSolution, LpStatus, solve_lp

# Recovered cell mass below this is reported as a vanishing-mass endpoint.
VANISHING_MASS_TOL = 1e-7


class BoundStatus(str, enum.Enum):
    CERTIFIED = "Certified-LP"
    CERTIFIED_VANISHING = "Certified-LP-vanishing-mass"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclass(frozen=True)
class CellBounds:
    lower: float
    upper: float
    status: BoundStatus
    lower_vanishing_mass: bool = False
    upper_vanishing_mass: bool = False
    lower_solution: LpSolution | None = None
    upper_solution: LpSolution | None = None


@dataclass(frozen=True)
class ReparamSystem:
    """All constraints rewritten as affine rows in z = (w, P).

    Variable layout: per arm the 2^K joint probabilities w, then the 2^K
    cell probabilities P.  Rows: relaxed equalities as inequality pairs,
    coupling w <= P, LP-eligible assumption rows (all in A_ub z <= b_ub),
    and the exact sum-to-one equality.
    """

    system: ConstraintSystem
    A_ub: np.ndarray
    b_ub: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray

    @property
    def n_vars(self) -> int:
        return self.A_ub.shape[1]

    def w_index(self, t: str, cell: CellIndex) -> int:
        return self.system.mean_index(t, cell)

    def p_index(self, cell: CellIndex) -> int:
        return self.system.prob_index(cell)

    def map_point(self, point: LongPoint) -> np.ndarray:
        """Map a long point into (w, P) space via w = mean * prob."""
        x = self.system.pack(point)
        means, probs = self.system.split(x)
        return np.concatenate([(means * probs[None, :]).ravel(), probs])

    def residuals(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(ub slack violations as A z - b, eq residuals) at a raw z vector."""
        z = np.asarray(z, dtype=float)
        if z.shape != (self.n_vars,):
            raise ShapeError(f"expected vector of length {self.n_vars}, got {z.shape}")
        return self.A_ub @ z - self.b_ub, self.A_eq @ z - self.b_eq


def reparameterize(system: ConstraintSystem) -> ReparamSystem:
    """Rewrite an LP-eligible system as affine rows over (w, P)."""
    if not system.lp_eligible:
        raise RouteError(
            "system is not LP-eligible (non-binary outcome or cross-cell assumption)"
        )
    A, C, K = system.n_arms, system.n_cells, system.K
    n = (A + 1) * C
    pcol = A * C
    mask1 = system._mask1
    mask0 = system._mask0
    s0, s1, p_arm = system._shorts

    rows: list[np.ndarray] = []
    rhs: list[float] = []

    def add_band(coef: np.ndarray, target: float, slack: float) -> None:
        rows.append(coef)
        rhs.append(target + slack)
        rows.append(-coef)
        rhs.append(-(target - slack))

    for a in range(A):
        for k in range(K):
            coef = np.zeros(n)
            coef[a * C : (a + 1) * C] = mask0[k]
            add_band(coef, s0[a, k] * (1.0 - p_arm[a, k]), system.eps_eq)
        for k in range(K):
            coef = np.zeros(n)
            coef[a * C : (a + 1) * C] = mask1[k]
            add_band(coef, s1[a, k] * p_arm[a, k], system.eps_eq)
    marg_slack = system.eps_eq if A == 1 else system.eps_marg
    for k in range(K):
        coef = np.zeros(n)
        coef[pcol:] = mask1[k]
        add_band(coef, system.marginal_target[k], marg_slack)

    # Coupling 0 <= w <= P (w >= 0 comes from variable nonnegativity).
    for a in range(A):
        for r in range(C):
            coef = np.zeros(n)
            coef[a * C + r] = 1.0
            coef[pcol + r] = -1.0
            rows.append(coef)
            rhs.append(0.0)

    for asm in system.assumptions:
        i = system.mean_index(asm.t, asm.cell)
        pr = pcol + asm.cell.rank
        if asm.form is AssumptionForm.DIRECT:
            hi_row = np.zeros(n)
            hi_row[i] = 1.0
            hi_row[pr] = -asm.hi
            lo_row = np.zeros(n)
            lo_row[i] = -1.0
            lo_row[pr] = asm.lo
        else:
            j = system.mean_index(asm.eff_t_prime, asm.eff_cell_prime)
            if asm.form is AssumptionForm.DIFF:
                hi_row = np.zeros(n)
                hi_row[i], hi_row[j], hi_row[pr] = 1.0, -1.0, -asm.hi
                lo_row = np.zeros(n)
                lo_row[i], lo_row[j], lo_row[pr] = -1.0, 1.0, asm.lo
            else:  # same-cell ratio: lo * w' <= w <= hi * w'
                hi_row = np.zeros(n)
                hi_row[i], hi_row[j] = 1.0, -asm.hi
                lo_row = np.zeros(n)
                lo_row[i], lo_row[j] = -1.0, asm.lo
        rows.append(hi_row)
        rhs.append(0.0)
        rows.append(lo_row)
        rhs.append(0.0)

    sum_row = np.zeros(n)
    sum_row[pcol:] = 1.0
    return ReparamSystem(
        system=system,
        A_ub=np.array(rows),
        b_ub=np.array(rhs),
        A_eq=sum_row[None, :],
        b_eq=np.array([1.0]),
    )


def _charnes_cooper_lp(
    reparam: ReparamSystem, objective_col: np.ndarray, denom_col: np.ndarray, sense: str
) -> LinearProgram:
    """Scale the polytope by tau >= 0 with denominator normalized to one.

    Variables are (y, tau) with y = tau * z; each row a.z <= b becomes
    a.y - b*tau <= 0, each equality likewise, and denom.y = 1.
    """
    n = reparam.n_vars
    A_ub = np.hstack([reparam.A_ub, -reparam.b_ub[:, None]])
    b_ub = np.zeros(A_ub.shape[0])
    A_eq = np.vstack([
        np.hstack([reparam.A_eq, -reparam.b_eq[:, None]]),
        np.concatenate([denom_col, [0.0]])[None, :],
    ])
    b_eq = np.concatenate([np.zeros(reparam.A_eq.shape[0]), [1.0]])
    c = np.concatenate([objective_col, [0.0]])
    return LinearProgram(c=c, sense=sense, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq)


def _fractional_endpoint(
    reparam: ReparamSystem, objective_col: np.ndarray, denom_col: np.ndarray, sense: str
) -> tuple[LpSolution, bool]:
    sol = solve_lp(_charnes_cooper_lp(reparam, objective_col, denom_col, sense))
    vanishing = False
    if sol.status is LpStatus.OPTIMAL:
        tau = sol.x[-1]
        vanishing = tau <= 0 or 1.0 / tau < VANISHING_MASS_TOL
    return sol, vanishing


def cell_mean_bounds(reparam: ReparamSystem, t: str, cell: CellIndex) -> CellBounds:
    """Certified sharp bounds (over the closure) on one long cell mean."""
    if t not in reparam.system.arm_ids:
        raise UnknownArm(f"arm {t!r} not in scope {reparam.system.arm_ids}")
    n = reparam.n_vars
    obj = np.zeros(n)
    obj[reparam.w_index(t, cell)] = 1.0
    denom = np.zeros(n)
    denom[reparam.p_index(cell)] = 1.0
    lo_sol, lo_vanish = _fractional_endpoint(reparam, obj, denom, "min")
    if lo_sol.status is LpStatus.INFEASIBLE:
        return CellBounds(float("nan"), float("nan"), BoundStatus.INFEASIBLE)
    hi_sol, hi_vanish = _fractional_endpoint(reparam, obj, denom, "max")
    lo = min(max(lo_sol.objective, 0.0), 1.0)
    hi = min(max(hi_sol.objective, 0.0), 1.0)
    status = (
        BoundStatus.CERTIFIED_VANISHING
        if (lo_vanish or hi_vanish)
        else BoundStatus.CERTIFIED
    )
    return CellBounds(lo, hi, status, lo_vanish, hi_vanish, lo_sol, hi_sol)


def contrast_bounds(
    reparam: ReparamSystem, t: str, t_prime: str, cell: CellIndex, kind: str = "difference"
) -> CellBounds:
    """Certified bounds on a per-cell treatment difference or ratio."""
    if kind not in ("difference", "ratio"):
        raise ValidationError(f"kind must be 'difference' or 'ratio', got {kind!r}")
    for arm in (t, t_prime):
        if arm not in reparam.system.arm_ids:
            raise UnknownArm(f"arm {arm!r} not in scope {reparam.system.arm_ids}")
    n = reparam.n_vars
    obj = np.zeros(n)
    obj[reparam.w_index(t, cell)] = 1.0
    obj[reparam.w_index(t_prime, cell)] -= 1.0 if kind == "difference" else 0.0
    denom = np.zeros(n)
    if kind == "difference":
        denom[reparam.p_index(cell)] = 1.0
    else:
        denom[reparam.w_index(t_prime, cell)] = 1.0
    lo_sol, lo_vanish = _fractional_endpoint(reparam, obj, denom, "min")
    if lo_sol.status is LpStatus.INFEASIBLE:
        # The ratio normalization is infeasible iff the denominator is
        # forced to zero; the difference normalization iff the system is.
        return CellBounds(float("nan"), float("nan"), BoundStatus.INFEASIBLE)
    hi_sol, hi_vanish = _fractional_endpoint(reparam, obj, denom, "max")
    if hi_sol.status is LpStatus.UNBOUNDED or lo_sol.status is LpStatus.UNBOUNDED:
        lo = lo_sol.objective if lo_sol.status is LpStatus.OPTIMAL else float("-inf")
        hi = hi_sol.objective if hi_sol.status is LpStatus.OPTIMAL else float("inf")
        return CellBounds(lo, hi, BoundStatus.UNBOUNDED, lo_vanish, hi_vanish, lo_sol, hi_sol)
    if kind == "difference":
        lo = min(max(lo_sol.objective, -1.0), 1.0)
        hi = min(max(hi_sol.objective, -1.0), 1.0)
    else:
        lo, hi = max(lo_sol.objective, 0.0), hi_sol.objective
    status = (
        BoundStatus.CERTIFIED_VANISHING
        if (lo_vanish or hi_vanish)
        else BoundStatus.CERTIFIED
    )
    return CellBounds(lo, hi, status, lo_vanish, hi_vanish, lo_sol, hi_sol)


def membership(reparam: ReparamSystem, t: str, cell: CellIndex, v: float) -> bool:
    """Is mean value v attainable at (t, cell)?  Phase-1 feasibility check."""
    if not 0.0 <= v <= 1.0:
        raise ValidationError(f"candidate mean {v} outside [0,1]")
    if t not in reparam.system.arm_ids:
        raise UnknownArm(f"arm {t!r} not in scope {reparam.system.arm_ids}")
    n = reparam.n_vars
    row = np.zeros(n)
    row[reparam.w_index(t, cell)] = 1.0
    row[reparam.p_index(cell)] = -v
    lp = LinearProgram(
        c=np.zeros(n),
        sense="min",
        A_ub=reparam.A_ub,
        b_ub=reparam.b_ub,
        A_eq=np.vstack([reparam.A_eq, row[None, :]]),
        b_eq=np.concatenate([reparam.b_eq, [0.0]]),
    )
    return solve_lp(lp).status is LpStatus.OPTIMAL
