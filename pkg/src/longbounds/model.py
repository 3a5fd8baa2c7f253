"""Domain types and compilation of the identification constraint system.

The observable data are, per treatment arm, K marginal covariate
probabilities and 2K subgroup ("short") mean outcomes.  The unknowns are
the 2^K cell ("long") mean outcomes per arm plus the joint cell
probabilities.  A compiled :class:`ConstraintSystem` evaluates residuals of
the short-to-long accounting identities and of any bounded-variation
assumptions, and decides which solver route applies.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    InfeasibleInput,
    InvalidAssumption,
    InvalidDimension,
    ShapeError,
    UnknownArm,
    ValidationError,
)

K_MAX = 12
DEFAULT_EPS_EQ = 1e-3
DEFAULT_EPS_MARG = 1e-2
# The sum-to-one row is conceptually exact; this absorbs float dust only.
SUM_TO_ONE_TOL = 1e-9


@dataclass(frozen=True, order=True)
class CellIndex:
    """One covariate profile: an ordered tuple of K binary digits."""

    bits: tuple[int, ...]

    def __post_init__(self):
        if not self.bits:
            raise InvalidDimension("cell must have at least one covariate bit")
        if any(b not in (0, 1) for b in self.bits):
            raise ValidationError(f"cell bits must be 0/1, got {self.bits}")
        object.__setattr__(self, "bits", tuple(int(b) for b in self.bits))

    @property
    def K(self) -> int:
        return len(self.bits)

    @property
    def rank(self) -> int:
        """Integer address: bit k carries weight 2**k."""
        return sum(b << k for k, b in enumerate(self.bits))

    @classmethod
    def from_rank(cls, rank: int, K: int) -> "CellIndex":
        if not 0 <= rank < (1 << K):
            raise ValidationError(f"rank {rank} out of range for K={K}")
        return cls(tuple((rank >> k) & 1 for k in range(K)))


def enumerate_cells(K: int) -> list[CellIndex]:
    """All 2^K cells in ascending rank order."""
    if not isinstance(K, int) or not 1 <= K <= K_MAX:
        raise InvalidDimension(f"K must be an integer in [1, {K_MAX}], got {K}")
    return [CellIndex.from_rank(r, K) for r in range(1 << K)]


@dataclass(frozen=True)
class ArmSummary:
    """Reported short findings for one treatment arm."""

    treatment_id: str
    n_subjects: int
    marginal: tuple[float, ...]
    short_mean_0: tuple[float, ...]
    short_mean_1: tuple[float, ...]
    outcome_kind: str = "binary"

    def __post_init__(self):
        object.__setattr__(self, "marginal", tuple(float(v) for v in self.marginal))
        object.__setattr__(self, "short_mean_0", tuple(float(v) for v in self.short_mean_0))
        object.__setattr__(self, "short_mean_1", tuple(float(v) for v in self.short_mean_1))
        if self.n_subjects <= 0:
            raise ValidationError(f"n_subjects must be positive, got {self.n_subjects}")
        if self.outcome_kind not in ("binary", "bounded-real"):
            raise ValidationError(f"unknown outcome_kind {self.outcome_kind!r}")
        K = len(self.marginal)
        if K == 0:
            raise InvalidDimension("arm must report at least one covariate")
        if len(self.short_mean_0) != K or len(self.short_mean_1) != K:
            raise ShapeError(
                f"arm {self.treatment_id!r}: marginal/short mean lengths differ "
                f"({K}, {len(self.short_mean_0)}, {len(self.short_mean_1)})"
            )
        for k, p in enumerate(self.marginal):
            if not 0.0 < p < 1.0:
                raise ValidationError(
                    f"arm {self.treatment_id!r}: marginal[{k}]={p} not strictly in (0,1)"
                )
        for name, seq in (("short_mean_0", self.short_mean_0), ("short_mean_1", self.short_mean_1)):
            for k, m in enumerate(seq):
                if not 0.0 <= m <= 1.0:
                    raise ValidationError(
                        f"arm {self.treatment_id!r}: {name}[{k}]={m} outside [0,1]"
                    )

    @property
    def K(self) -> int:
        return len(self.marginal)


@dataclass(frozen=True)
class TrialSummary:
    """A full set of reported findings: covariate labels plus one or more arms."""

    K: int
    covariate_labels: tuple[tuple[str, str], ...]
    arms: tuple[ArmSummary, ...]

    def __post_init__(self):
        object.__setattr__(self, "covariate_labels", tuple((str(a), str(b)) for a, b in self.covariate_labels))
        object.__setattr__(self, "arms", tuple(self.arms))
        if not 1 <= self.K <= K_MAX:
            raise InvalidDimension(f"K must be in [1, {K_MAX}], got {self.K}")
        if len(self.covariate_labels) != self.K:
            raise ShapeError("need one (value-0, value-1) label pair per covariate")
        if not self.arms:
            raise ValidationError("trial must have at least one arm")
        ids = [a.treatment_id for a in self.arms]
        if len(set(ids)) != len(ids):
            raise ValidationError(f"duplicate treatment ids: {ids}")
        for arm in self.arms:
            if arm.K != self.K:
                raise ShapeError(
                    f"arm {arm.treatment_id!r} reports K={arm.K}, trial has K={self.K}"
                )

    def arm(self, treatment_id: str) -> ArmSummary:
        for arm in self.arms:
            if arm.treatment_id == treatment_id:
                return arm
        raise UnknownArm(f"no arm {treatment_id!r}; have {[a.treatment_id for a in self.arms]}")

    def cell_label(self, cell: CellIndex) -> str:
        """Concatenated per-covariate value labels, e.g. 'YFL'."""
        if cell.K != self.K:
            raise ShapeError(f"cell has K={cell.K}, trial has K={self.K}")
        return "".join(self.covariate_labels[k][b] for k, b in enumerate(cell.bits))

    def cell_from_label(self, label: str) -> CellIndex:
        for cell in enumerate_cells(self.K):
            if self.cell_label(cell) == label:
                return cell
        raise ValidationError(f"unknown cell label {label!r}")


class AssumptionForm(str, enum.Enum):
    DIRECT = "direct"
    DIFF = "diff"
    RATIO = "ratio"


@dataclass(frozen=True)
class Assumption:
    """One bounded-variation restriction on long means.

    direct: lo <= E[y(t)|xi] <= hi
    diff:   lo <= E[y(t)|xi] - E[y(t')|xi'] <= hi
    ratio:  lo <= E[y(t)|xi] / E[y(t')|xi'] <= hi
    Omitted t'/xi' default to t/xi; diff and ratio require that the two
    (treatment, cell) pairs differ.
    """

    form: AssumptionForm
    t: str
    cell: CellIndex
    lo: float
    hi: float
    t_prime: str | None = None
    cell_prime: CellIndex | None = None

    def __post_init__(self):
        object.__setattr__(self, "form", AssumptionForm(self.form))
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise InvalidAssumption(f"bounds must be finite, got [{self.lo}, {self.hi}]")
        if self.lo > self.hi:
            raise InvalidAssumption(f"lo={self.lo} exceeds hi={self.hi}")
        if self.form is AssumptionForm.RATIO and self.lo < 0:
            raise InvalidAssumption("ratio assumptions need lo >= 0")
        if self.form is AssumptionForm.DIRECT:
            if self.t_prime is not None or self.cell_prime is not None:
                raise InvalidAssumption("direct assumptions take no t_prime/cell_prime")
        else:
            if (self.eff_t_prime, self.eff_cell_prime) == (self.t, self.cell):
                raise InvalidAssumption(
                    f"{self.form.value} assumption must relate two distinct "
                    "(treatment, cell) pairs"
                )
        if self.cell_prime is not None and self.cell_prime.K != self.cell.K:
            raise InvalidAssumption("cell and cell_prime must have the same K")

    @property
    def eff_t_prime(self) -> str:
        return self.t if self.t_prime is None else self.t_prime

    @property
    def eff_cell_prime(self) -> CellIndex:
        return self.cell if self.cell_prime is None else self.cell_prime

    @property
    def same_cell(self) -> bool:
        return self.eff_cell_prime == self.cell

    @property
    def lp_eligible(self) -> bool:
        """Linear in the joint-probability reparameterization."""
        if self.form is AssumptionForm.DIRECT:
            return True
        return self.same_cell


@dataclass(frozen=True)
class LongPoint:
    """A candidate solution: long means per (arm, cell) and joint cell probs."""

    means: Mapping[tuple[str, CellIndex], float]
    probs: Mapping[CellIndex, float]

    def __post_init__(self):
        object.__setattr__(self, "means", dict(self.means))
        object.__setattr__(self, "probs", dict(self.probs))
        for key, v in self.means.items():
            if not -1e-9 <= v <= 1 + 1e-9:
                raise ValidationError(f"mean at {key} = {v} outside [0,1]")
        total = 0.0
        for cell, p in self.probs.items():
            if p < -1e-9:
                raise ValidationError(f"prob at {cell} = {p} negative")
            total += p
        # Loose sanity check only: strict feasibility (sum-to-one within
        # arithmetic precision) is judged by max_violation, and candidate
        # points from non-converged local solves may drift slightly.
        if abs(total - 1.0) > 1e-2:
            raise ValidationError(f"cell probs sum to {total}, expected 1")


class Route(str, enum.Enum):
    EXACT_LP = "ExactLP"
    HEURISTIC_NLP = "HeuristicNLP"


def implied_overall_means(arm: ArmSummary) -> tuple[np.ndarray, float]:
    """Per-covariate implied overall mean and their spread.

    Each covariate's pair of short means aggregates to an estimate of the
    same overall arm mean, so the spread across covariates measures the
    rounding inconsistency of the reported numbers.
    """
    p = np.asarray(arm.marginal)
    m0 = np.asarray(arm.short_mean_0)
    m1 = np.asarray(arm.short_mean_1)
    mbar = m0 * (1.0 - p) + m1 * p
    return mbar, float(mbar.max() - mbar.min())


@dataclass(frozen=True)
class ConstraintSystem:
    """Compiled identification constraints for a set of arms.

    Unknown vector layout: per arm (in ``arm_ids`` order) the 2^K cell
    means, then the 2^K shared cell probabilities.  Equality rows: per arm
    the 2K short-mean accounting identities, then K marginal rows, then the
    sum-to-one row.  Every equality carries a slack half-width; feasibility
    means every |residual| stays within its slack and every inequality
    (boxes plus assumptions) holds.
    """

    trial: TrialSummary
    arm_ids: tuple[str, ...]
    assumptions: tuple[Assumption, ...]
    eps_eq: float
    eps_marg: float
    binary_outcome: bool
    lp_eligible: bool

    # -- layout ---------------------------------------------------------

    @property
    def K(self) -> int:
        return self.trial.K

    @property
    def n_cells(self) -> int:
        return 1 << self.K

    @property
    def n_arms(self) -> int:
        return len(self.arm_ids)

    @property
    def n_unknowns(self) -> int:
        return (self.n_arms + 1) * self.n_cells

    @property
    def n_equalities(self) -> int:
        return self.n_arms * 2 * self.K + self.K + 1

    @cached_property
    def cells(self) -> list[CellIndex]:
        return enumerate_cells(self.K)

    @cached_property
    def arms(self) -> tuple[ArmSummary, ...]:
        return tuple(self.trial.arm(t) for t in self.arm_ids)

    def arm_index(self, treatment_id: str) -> int:
        try:
            return self.arm_ids.index(treatment_id)
        except ValueError:
            raise UnknownArm(f"arm {treatment_id!r} not in scope {self.arm_ids}") from None

    def mean_index(self, treatment_id: str, cell: CellIndex) -> int:
        """Flat index of a mean unknown in the packed vector."""
        return self.arm_index(treatment_id) * self.n_cells + cell.rank

    def prob_index(self, cell: CellIndex) -> int:
        return self.n_arms * self.n_cells + cell.rank

    # -- cached numeric data -------------------------------------------

    @cached_property
    def _bit_matrix(self) -> np.ndarray:
        ranks = np.arange(self.n_cells)
        return (ranks[:, None] >> np.arange(self.K)[None, :]) & 1  # (cells, K)

    @cached_property
    def _mask1(self) -> np.ndarray:
        return self._bit_matrix.T.astype(float)  # (K, cells)

    @cached_property
    def _mask0(self) -> np.ndarray:
        return 1.0 - self._mask1

    @cached_property
    def _shorts(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        s0 = np.array([a.short_mean_0 for a in self.arms])
        s1 = np.array([a.short_mean_1 for a in self.arms])
        p = np.array([a.marginal for a in self.arms])
        return s0, s1, p

    @cached_property
    def marginal_target(self) -> np.ndarray:
        """Shared-P marginal targets: the arm's own values for one arm,
        the across-arm average otherwise."""
        _, _, p = self._shorts
        return p.mean(axis=0)

    @cached_property
    def equality_slacks(self) -> np.ndarray:
        marg_slack = self.eps_eq if self.n_arms == 1 else self.eps_marg
        return np.concatenate([
            np.full(self.n_arms * 2 * self.K, self.eps_eq),
            np.full(self.K, marg_slack),
            [SUM_TO_ONE_TOL],
        ])

    @cached_property
    def equality_labels(self) -> list[tuple[str, str, int]]:
        labels: list[tuple[str, str, int]] = []
        for t in self.arm_ids:
            labels += [("2a", t, k) for k in range(self.K)]
            labels += [("2b", t, k) for k in range(self.K)]
        labels += [("3a", "", k) for k in range(self.K)]
        labels.append(("3b", "", 0))
        return labels

    @cached_property
    def _assumption_arrays(self):
        """Vectorized form: g_hi = x[i] + cj_hi*x[j] + c0_hi, g_lo analogous."""
        n_a = len(self.assumptions)
        i_idx = np.zeros(n_a, dtype=int)
        j_idx = np.zeros(n_a, dtype=int)
        cj_hi = np.zeros(n_a)
        c0_hi = np.zeros(n_a)
        cj_lo = np.zeros(n_a)
        c0_lo = np.zeros(n_a)
        for m, a in enumerate(self.assumptions):
            i_idx[m] = self.mean_index(a.t, a.cell)
            if a.form is AssumptionForm.DIRECT:
                j_idx[m] = i_idx[m]
                c0_hi[m], c0_lo[m] = -a.hi, a.lo
            else:
                j_idx[m] = self.mean_index(a.eff_t_prime, a.eff_cell_prime)
                if a.form is AssumptionForm.DIFF:
                    cj_hi[m], c0_hi[m] = -1.0, -a.hi
                    cj_lo[m], c0_lo[m] = 1.0, a.lo
                else:
                    cj_hi[m] = -a.hi
                    cj_lo[m] = a.lo
        return i_idx, j_idx, cj_hi, c0_hi, cj_lo, c0_lo

    # -- packing --------------------------------------------------------

    def pack(self, point: LongPoint) -> np.ndarray:
        x = np.empty(self.n_unknowns)
        try:
            for a, t in enumerate(self.arm_ids):
                base = a * self.n_cells
                for cell in self.cells:
                    x[base + cell.rank] = point.means[(t, cell)]
            for cell in self.cells:
                x[self.prob_index(cell)] = point.probs[cell]
        except KeyError as exc:
            raise ShapeError(f"point is missing entry {exc.args[0]!r}") from None
        return x

    def unpack(self, x: np.ndarray) -> LongPoint:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n_unknowns,):
            raise ShapeError(f"expected vector of length {self.n_unknowns}, got {x.shape}")
        means = {}
        for a, t in enumerate(self.arm_ids):
            for cell in self.cells:
                means[(t, cell)] = float(x[a * self.n_cells + cell.rank])
        probs = {cell: float(x[self.prob_index(cell)]) for cell in self.cells}
        return LongPoint(means=means, probs=probs)

    def split(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n_unknowns,):
            raise ShapeError(f"expected vector of length {self.n_unknowns}, got {x.shape}")
        A, C = self.n_arms, self.n_cells
        return x[: A * C].reshape(A, C), x[A * C :]

    # -- evaluation -----------------------------------------------------

    def equality_residuals(self, x: np.ndarray) -> np.ndarray:
        means, probs = self.split(x)
        s0, s1, _ = self._shorts
        mp = means * probs[None, :]
        r2a = mp @ self._mask0.T - s0 * (1.0 - self._per_arm_marginals)
        r2b = mp @ self._mask1.T - s1 * self._per_arm_marginals
        r3a = self._mask1 @ probs - self.marginal_target
        r3b = probs.sum() - 1.0
        per_arm = np.concatenate([np.concatenate([r2a[a], r2b[a]]) for a in range(self.n_arms)])
        return np.concatenate([per_arm, r3a, [r3b]])

    @cached_property
    def _per_arm_marginals(self) -> np.ndarray:
        _, _, p = self._shorts
        return p

    def equality_jacobian(self, x: np.ndarray) -> np.ndarray:
        means, probs = self.split(x)
        A, C, K = self.n_arms, self.n_cells, self.K
        J = np.zeros((self.n_equalities, self.n_unknowns))
        pcol = A * C
        row = 0
        for a in range(A):
            for mask in (self._mask0, self._mask1):
                for k in range(K):
                    J[row + k, a * C : (a + 1) * C] = probs * mask[k]
                    J[row + k, pcol:] = means[a] * mask[k]
                row += K
        J[row : row + K, pcol:] = self._mask1
        row += K
        J[row, pcol:] = 1.0
        return J

    def assumption_values(self, x: np.ndarray) -> np.ndarray:
        """Inequality residuals g (two per assumption), satisfied iff g <= 0.

        Ratio restrictions are evaluated with cleared denominators
        (lo * E' <= E <= hi * E'), valid since means are box-bounded at 0.
        """
        if not self.assumptions:
            return np.empty(0)
        i_idx, j_idx, cj_hi, c0_hi, cj_lo, c0_lo = self._assumption_arrays
        xi, xj = x[i_idx], x[j_idx]
        g = np.empty(2 * len(self.assumptions))
        g[0::2] = xi + cj_hi * xj + c0_hi
        g[1::2] = -xi + cj_lo * xj + c0_lo
        return g

    def assumption_jacobian(self, x: np.ndarray) -> np.ndarray:
        J = np.zeros((2 * len(self.assumptions), self.n_unknowns))
        if not self.assumptions:
            return J
        i_idx, j_idx, cj_hi, c0_hi, cj_lo, c0_lo = self._assumption_arrays
        rows = np.arange(len(self.assumptions))
        np.add.at(J, (2 * rows, i_idx), 1.0)
        np.add.at(J, (2 * rows, j_idx), cj_hi)
        np.add.at(J, (2 * rows + 1, i_idx), -1.0)
        np.add.at(J, (2 * rows + 1, j_idx), cj_lo)
        return J

    def assumption_weighted_grad(self, w: np.ndarray) -> np.ndarray:
        """J_assumptions.T @ w without materializing the Jacobian."""
        grad = np.zeros(self.n_unknowns)
        if not self.assumptions:
            return grad
        i_idx, j_idx, cj_hi, c0_hi, cj_lo, c0_lo = self._assumption_arrays
        w_hi, w_lo = w[0::2], w[1::2]
        np.add.at(grad, i_idx, w_hi - w_lo)
        np.add.at(grad, j_idx, cj_hi * w_hi + cj_lo * w_lo)
        return grad

    def equality_weighted_grad(self, x: np.ndarray, w: np.ndarray) -> np.ndarray:
        """J_equalities.T @ w computed from the bilinear structure."""
        means, probs = self.split(x)
        A, C, K = self.n_arms, self.n_cells, self.K
        W = w[: A * 2 * K].reshape(A, 2 * K)
        W2a, W2b = W[:, :K], W[:, K:]
        w3a = w[A * 2 * K : A * 2 * K + K]
        w3b = w[-1]
        U = W2a @ self._mask0 + W2b @ self._mask1  # (A, cells)
        grad = np.empty(self.n_unknowns)
        grad[: A * C] = (U * probs[None, :]).ravel()
        grad[A * C :] = (U * means).sum(axis=0) + self._mask1.T @ w3a + w3b
        return grad

    def inequality_slacks(self, x: np.ndarray) -> np.ndarray:
        """Slack (>= 0 iff satisfied) of boxes then assumption rows."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n_unknowns,):
            raise ShapeError(f"expected vector of length {self.n_unknowns}, got {x.shape}")
        return np.concatenate([x, 1.0 - x, -self.assumption_values(x)])

    def max_violation_x(self, x: np.ndarray) -> float:
        eq = np.abs(self.equality_residuals(x)) - self.equality_slacks
        worst = eq.max()
        slacks = self.inequality_slacks(x)
        if slacks.size:
            worst = max(worst, (-slacks).max())
        return float(max(worst, 0.0))


def build_system(
    trial: TrialSummary,
    arm_ids: Sequence[str],
    assumptions: Sequence[Assumption] = (),
    eps_eq: float = DEFAULT_EPS_EQ,
    eps_marg: float = DEFAULT_EPS_MARG,
) -> ConstraintSystem:
    """Compile the identification constraints for the selected arms."""
    arm_ids = tuple(arm_ids)
    if not arm_ids:
        raise ValidationError("arm_ids must be nonempty")
    if len(set(arm_ids)) != len(arm_ids):
        raise ValidationError(f"duplicate arm ids: {arm_ids}")
    arms = [trial.arm(t) for t in arm_ids]  # raises UnknownArm
    for a in assumptions:
        for t in (a.t, a.eff_t_prime):
            if t not in arm_ids:
                raise InvalidAssumption(
                    f"assumption references arm {t!r} outside scope {arm_ids}"
                )
        if a.cell.K != trial.K:
            raise InvalidAssumption(f"assumption cell has K={a.cell.K}, trial K={trial.K}")
    for arm in arms:
        _, spread = implied_overall_means(arm)
        if spread > 2 * eps_eq:
            raise InfeasibleInput(
                f"arm {arm.treatment_id!r}: implied overall means spread {spread:.4g} "
                f"exceeds 2*eps_eq = {2 * eps_eq:.4g}",
                diagnostics={"arm": arm.treatment_id, "spread": spread, "eps_eq": eps_eq},
            )
    binary = all(arm.outcome_kind == "binary" for arm in arms)
    lp_ok = binary and all(a.lp_eligible for a in assumptions)
    return ConstraintSystem(
        trial=trial,
        arm_ids=arm_ids,
        assumptions=tuple(assumptions),
        eps_eq=float(eps_eq),
        eps_marg=float(eps_marg),
        binary_outcome=binary,
        lp_eligible=lp_ok,
    )


def adjacent_cell_pairs(K: int, include_equal: bool = False) -> list[tuple[CellIndex, CellIndex]]:
    """Ordered cell pairs differing in exactly one covariate (optionally none)."""
    cells = enumerate_cells(K)
    pairs = []
    for c in cells:
        if include_equal:
            pairs.append((c, c))
        for k in range(K):
            flipped = list(c.bits)
            flipped[k] = 1 - flipped[k]
            pairs.append((c, CellIndex(tuple(flipped))))
    return pairs


def bounded_variation_family(
    K: int,
    arm_ids: Sequence[str],
    b: float,
    interpretation: str = "literal",
    include_equal: bool = False,
) -> list[Assumption]:
    """Symmetric +/- b difference restrictions over adjacent cell pairs.

    ``literal``: cross-arm differences between the first two arms, for every
    ordered adjacent pair (the symmetric band makes the reversed arm pairing
    redundant).  ``within-arm``: per-arm differences across adjacent cells.
    """
    if b <= 0:
        raise InvalidAssumption(f"band half-width must be positive, got {b}")
    pairs = adjacent_cell_pairs(K, include_equal=include_equal)
    out: list[Assumption] = []
    if interpretation == "literal":
        if len(arm_ids) < 2:
            raise ValidationError("literal interpretation needs two arms")
        t, tp = arm_ids[0], arm_ids[1]
        for c, cp in pairs:
            out.append(Assumption(AssumptionForm.DIFF, t, c, -b, b, t_prime=tp, cell_prime=cp))
    elif interpretation == "within-arm":
        for t in arm_ids:
            for c, cp in pairs:
                if c.rank < cp.rank:
                    out.append(Assumption(AssumptionForm.DIFF, t, c, -b, b, cell_prime=cp))
    else:
        raise ValidationError(f"unknown interpretation {interpretation!r}")
    return out


def residuals(system: ConstraintSystem, point: LongPoint) -> tuple[np.ndarray, np.ndarray]:
    """Equality residual vector and inequality slack vector at a point."""
    x = system.pack(point)
    return system.equality_residuals(x), system.inequality_slacks(x)


def max_violation(system: ConstraintSystem, point: LongPoint) -> float:
    """Worst slack-adjusted violation; <= 0 means approximately feasible."""
    return system.max_violation_x(system.pack(point))


def classify_route(system: ConstraintSystem) -> Route:
    return Route.EXACT_LP if system.lp_eligible else Route.HEURISTIC_NLP
