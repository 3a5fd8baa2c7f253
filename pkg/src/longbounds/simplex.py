"""Dense two-phase simplex solver for the small LPs this package generates.

Problems have at most a few thousand nonzeros, so a dense tableau with
Dantzig pricing (falling back to Bland's rule after a stall) is simple,
certifiable, and fast enough.  All variables are nonnegative; general
bounds are encoded as rows by the caller.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalFailure, ValidationError

PIVOT_TOL = 1e-12
# Minimum entering-column magnitude accepted by the ratio test.  Pivoting
# on near-zero elements scales tableau rows by their reciprocal and
# destroys conditioning, so candidates below this are treated as zero.
RATIO_TOL = 1e-9
ZERO_TOL = 1e-9
BLAND_AFTER_STALL = 500
MAX_ITERS = 100_000


class LpStatus(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclass(frozen=True)
class LinearProgram:
    """min/max c.x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0."""

    c: np.ndarray
    sense: str = "min"
    A_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        object.__setattr__(self, "c", c)
        if self.sense not in ("min", "max"):
            raise ValidationError(f"sense must be 'min' or 'max', got {self.sense!r}")
        n = c.size
        for name in ("A_ub", "A_eq"):
            A = getattr(self, name)
            b = getattr(self, "b" + name[1:])
            if A is None:
                if b is not None:
                    raise ValidationError(f"{name} missing but rhs given")
                continue
            A = np.atleast_2d(np.asarray(A, dtype=float))
            b = np.atleast_1d(np.asarray(b, dtype=float))
            if A.shape != (b.size, n):
                raise ValidationError(
                    f"{name} shape {A.shape} inconsistent with c ({n}) and rhs ({b.size})"
                )
            if not (np.isfinite(A).all() and np.isfinite(b).all()):
                raise ValidationError(f"{name}/rhs contain non-finite entries")
            object.__setattr__(self, name, A)
            object.__setattr__(self, "b" + name[1:], b)
        if not np.isfinite(c).all():
            raise ValidationError("objective contains non-finite entries")

    @property
    def n_vars(self) -> int:
        return self.c.size


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    objective: float
    x: np.ndarray
    max_residual: float
    basis: np.ndarray | None = None
    n_iterations: int = 0


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    piv = T[row, col]
    if abs(piv) < PIVOT_TOL:
        raise NumericalFailure(f"pivot {piv:.3e} below tolerance at ({row}, {col})")
    T[row] /= piv
    for r in range(T.shape[0]):
        if r != row and T[r, col] != 0.0:
            T[r] -= T[r, col] * T[row]


def _run_simplex(T: np.ndarray, basis: np.ndarray, n_cols: int) -> str:
    """Iterate to optimality on the tableau (last row = reduced costs, last col = rhs)."""
    stalled = 0
    last_obj = T[-1, -1]
    for _ in range(MAX_ITERS):
        z = T[-1, :n_cols]
        if stalled >= BLAND_AFTER_STALL:
            negs = np.flatnonzero(z < -ZERO_TOL)
            col = int(negs[0]) if negs.size else -1
        else:
            col = int(np.argmin(z))
            if z[col] >= -ZERO_TOL:
                col = -1
        if col < 0:
            return "optimal"
        a = T[:-1, col]
        rhs = T[:-1, -1]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(a > RATIO_TOL, rhs / a, np.inf)
        if not np.isfinite(ratios).any():
            return "unbounded"
        best = ratios.min()
        # ties broken by smallest basis index (lexicographic enough with Bland)
        cand = np.flatnonzero(ratios <= best + 1e-15)
        row = int(cand[np.argmin(basis[cand])])
        _pivot(T, row, col)
        basis[row] = col
        obj = T[-1, -1]
        stalled = stalled + 1 if obj <= last_obj + 1e-13 else 0
        last_obj = obj
    raise NumericalFailure("simplex iteration limit exceeded")


def solve_lp(lp: LinearProgram) -> LpSolution:
    """Two-phase dense simplex.  Optimal solutions carry their final basis
    so optimality certificates can be re-verified from reduced costs."""
    n = lp.n_vars
    A_ub = lp.A_ub if lp.A_ub is not None else np.empty((0, n))
    b_ub = lp.b_ub if lp.b_ub is not None else np.empty(0)
    A_eq = lp.A_eq if lp.A_eq is not None else np.empty((0, n))
    b_eq = lp.b_eq if lp.b_eq is not None else np.empty(0)
    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    m = m_ub + m_eq

    c = lp.c if lp.sense == "min" else -lp.c

    # Columns: structural | slacks (ub rows) | artificials.
    # Rows with negative rhs are negated first so every row gets rhs >= 0;
    # negated ub rows need an artificial (their slack enters with -1).
    n_slack = m_ub
    A = np.zeros((m, n + n_slack))
    b = np.zeros(m)
    A[:m_ub, :n] = A_ub
    b[:m_ub] = b_ub
    A[:m_ub, n : n + n_slack] = np.eye(m_ub)
    A[m_ub:, :n] = A_eq
    b[m_ub:] = b_eq
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    # Slack columns serve as initial basis where their coefficient is +1.
    art_rows = [i for i in range(m) if i >= m_ub or neg[i]]
    n_art = len(art_rows)
    total = n + n_slack + n_art
    T = np.zeros((m + 1, total + 1))
    T[:m, : n + n_slack] = A
    T[:m, -1] = b
    basis = np.empty(m, dtype=int)
    for i in range(m_ub):
        basis[i] = n + i
    for j, i in enumerate(art_rows):
        T[i, n + n_slack + j] = 1.0
        basis[i] = n + n_slack + j

    n_iter = 0
    if n_art:
        # Phase 1: minimize sum of artificials.
        T[-1, n + n_slack : n + n_slack + n_art] = 1.0
        for i in art_rows:
            T[-1] -= T[i]
        status = _run_simplex(T, basis, n + n_slack)  # never pivot artificials back in
        if status == "unbounded":
            # Impossible in exact arithmetic (the objective is a sum of
            # nonnegative artificials); a stray signal with the objective
            # already at zero just means feasibility was reached.
            if abs(T[-1, -1]) > 1e-6 * (1.0 + np.abs(b).max(initial=0.0)):
                raise NumericalFailure("phase-1 unbounded")
        if -T[-1, -1] > 1e-8 * (1.0 + np.abs(b).max(initial=0.0)):
            return LpSolution(LpStatus.INFEASIBLE, float("nan"), np.full(n, np.nan), float("inf"))
        # Drive any leftover artificials out of the basis.
        for i in range(m):
            if basis[i] >= n + n_slack:
                cols = np.flatnonzero(np.abs(T[i, : n + n_slack]) > 1e-9)
                if cols.size:
                    _pivot(T, i, int(cols[0]))
                    basis[i] = int(cols[0])
        keep_rows = [i for i in range(m) if basis[i] < n + n_slack]
        if len(keep_rows) < m:
            sel = keep_rows + [m]
            T = T[sel]
            basis = basis[keep_rows]
            m = len(keep_rows)

    # Phase 2 objective row.
    T[-1, :] = 0.0
    T[-1, :n] = c
    T = T[:, list(range(n + n_slack)) + [T.shape[1] - 1]]  # drop artificial columns
    for i in range(m):
        if T[-1, basis[i]] != 0.0:
            T[-1] -= T[-1, basis[i]] * T[i]
    status = _run_simplex(T, basis, n + n_slack)
    x = np.zeros(n + n_slack)
    x[basis] = T[:m, -1]
    xs = x[:n]
    if status == "unbounded":
        return LpSolution(LpStatus.UNBOUNDED, float("-inf") if lp.sense == "min" else float("inf"),
                          xs, float("inf"))
    obj = float(lp.c @ xs)
    res = _max_residual(lp, xs)
    return LpSolution(LpStatus.OPTIMAL, obj, xs, res, basis=basis.copy())


def _max_residual(lp: LinearProgram, x: np.ndarray) -> float:
    worst = max(0.0, float(-(x.min(initial=0.0))))
    if lp.A_ub is not None:
        worst = max(worst, float((lp.A_ub @ x - lp.b_ub).max(initial=0.0)))
    if lp.A_eq is not None and lp.A_eq.shape[0]:
        worst = max(worst, float(np.abs(lp.A_eq @ x - lp.b_eq).max()))
    return worst


def verify_optimality_certificate(lp: LinearProgram, sol: LpSolution, tol: float = 1e-7) -> bool:
    """Recompute reduced costs from the stored basis and check their signs."""
    if sol.status is not LpStatus.OPTIMAL or sol.basis is None:
        return False
    n = lp.n_vars
    A_ub = lp.A_ub if lp.A_ub is not None else np.empty((0, n))
    A_eq = lp.A_eq if lp.A_eq is not None else np.empty((0, n))
    m_ub = A_ub.shape[0]
    A_full = np.vstack([
        np.hstack([A_ub, np.eye(m_ub)]),
        np.hstack([A_eq, np.zeros((A_eq.shape[0], m_ub))]),
    ])
    c_full = np.concatenate([lp.c if lp.sense == "min" else -lp.c, np.zeros(m_ub)])
    B = A_full[:, sol.basis]
    if B.shape[0] != B.shape[1]:
        return False
    try:
        y = np.linalg.solve(B.T, c_full[sol.basis])
    except np.linalg.LinAlgError:
        return False
    reduced = c_full - A_full.T @ y
    scale = 1.0 + np.abs(c_full).max(initial=0.0)
    return bool((reduced >= -tol * scale).all())
