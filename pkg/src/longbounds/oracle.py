"""Brute-force sampling oracle for small systems (K <= 2).

Independent of both solver routes: draws candidate long points at random,
repairs them onto the feasible set by cyclic projection (for a fixed
probability vector the mean constraints are convex, and vice versa), keeps
only points that re-evaluate to exactly zero violation, and then pushes
the retained extremes outward with seeded random-walk refinement.  The
resulting interval is a guaranteed inner approximation of the sharp
bounds: every reported endpoint is attained by a verified feasible point.

Sampling is sharded with per-shard seed streams so that a larger sample
budget only appends shards; intervals are therefore monotone in budget.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import EmptyOracle, InvalidDimension, ValidationError
from .model import CellIndex, ConstraintSystem, LongPoint

_SHARD_SIZE = 131072
_REPAIR_CHUNK = 4096
_RETAIN_PER_SHARD = 200
_WALK_SHARDS = 4  # refine extremes from this many leading shards
_PROJ_MARGIN = 1e-9  # project strictly inside slack bands
_REPAIR_SWEEPS = 80


@dataclass(frozen=True)
class OracleBudget:
    n_samples: int = 2_000_000
    refine_steps: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.n_samples <= 0 or self.refine_steps <= 0:
            raise ValidationError("oracle budget values must be positive")


def _check_scope(system: ConstraintSystem) -> None:
    if system.K > 2:
        raise InvalidDimension(f"oracle supports K <= 2, got K={system.K}")
    if system.n_arms > 2:
        raise InvalidDimension(f"oracle supports at most 2 arms, got {system.n_arms}")


def _project_simplex(p: np.ndarray) -> np.ndarray:
    """Euclidean projection of each row onto the probability simplex."""
    n, c = p.shape
    u = np.sort(p, axis=1)[:, ::-1]
    css = np.cumsum(u, axis=1) - 1.0
    idx = np.arange(1, c + 1)
    cond = u - css / idx > 0
    rho = c - 1 - np.argmax(cond[:, ::-1], axis=1)
    theta = css[np.arange(n), rho] / (rho + 1)
    return np.maximum(p - theta[:, None], 0.0)


def _band_project(values, coeff, norm_sq, lo, hi):
    """Shift amount moving each row's linear value into [lo, hi]."""
    shift = np.clip(lo - values, 0.0, None) - np.clip(values - hi, 0.0, None)
    safe = np.where(norm_sq > 1e-14, norm_sq, 1.0)
    shift = np.where(norm_sq > 1e-14, shift / safe, 0.0)
    return shift[:, None] * coeff


def _repair(system: ConstraintSystem, means: np.ndarray, probs: np.ndarray,
            freeze: int | None = None, sweeps: int = _REPAIR_SWEEPS):
    """Cyclic-projection repair of a batch of candidate points (in place).

    ``means`` is (n, A*C), ``probs`` is (n, C).  ``freeze`` optionally pins
    one flat mean coordinate so refinement walks can hold their target.
    Returns the packed (n, n_unknowns) array.
    """
    A, C, K = system.n_arms, system.n_cells, system.K
    mask1 = system._mask1
    mask0 = system._mask0
    s0, s1, p_arm = system._shorts
    slacks = system.equality_slacks
    marg_slack = slacks[A * 2 * K] - _PROJ_MARGIN
    eps = system.eps_eq - _PROJ_MARGIN
    target = system.marginal_target
    n_asm = len(system.assumptions)
    if n_asm:
        i_idx, j_idx, cj_hi, c0_hi, cj_lo, c0_lo = system._assumption_arrays

    # Probability block: simplex alternated with the marginal bands.
    for _ in range(sweeps):
        probs[:] = _project_simplex(probs)
        for k in range(K):
            row = mask1[k]
            v = probs @ row
            nsq = row @ row
            probs += _band_project(v, row, np.full(v.shape, nsq),
                                   target[k] - marg_slack, target[k] + marg_slack)
    probs[:] = _project_simplex(probs)

    # Mean block (probabilities now fixed): short-mean bands, assumption
    # half-spaces, and the unit box.
    if freeze is not None:
        frozen = means[:, freeze].copy()
    for _ in range(sweeps):
        for a in range(A):
            m = means[:, a * C : (a + 1) * C]
            for k in range(K):
                for mask, s, w_p in ((mask0, s0, 1.0 - p_arm), (mask1, s1, p_arm)):
                    coeff = probs * mask[k]
                    v = (m * coeff).sum(axis=1)
                    c = s[a, k] * w_p[a, k]
                    m += _band_project(v, coeff, (coeff**2).sum(axis=1),
                                       c - eps, c + eps)
        if n_asm:
            for idx in range(n_asm):
                i, j = i_idx[idx], j_idx[idx]
                for ci, cj, c0 in ((1.0, cj_hi[idx], c0_hi[idx]),
                                   (-1.0, cj_lo[idx], c0_lo[idx])):
                    if i == j:
                        v = (ci + cj) * means[:, i] + c0
                        nsq = (ci + cj) ** 2
                        if nsq < 1e-14:
                            continue
                        shift = -np.clip(v, 0.0, None) / nsq
                        means[:, i] += shift * (ci + cj)
                    else:
                        v = ci * means[:, i] + cj * means[:, j] + c0
                        nsq = ci**2 + cj**2
                        shift = -np.clip(v, 0.0, None) / nsq
                        means[:, i] += shift * ci
                        means[:, j] += shift * cj
        np.clip(means, 0.0, 1.0, out=means)
        if freeze is not None:
            means[:, freeze] = frozen
    return np.concatenate([means, probs], axis=1)


def _batch_violations(system: ConstraintSystem, x: np.ndarray) -> np.ndarray:
    """Max constraint violation per row of a packed batch."""
    A, C, K = system.n_arms, system.n_cells, system.K
    means = x[:, : A * C]
    probs = x[:, A * C :]
    slacks = system.equality_slacks
    s0, s1, p_arm = system._shorts
    worst = np.zeros(x.shape[0])
    for a in range(A):
        mp = means[:, a * C : (a + 1) * C] * probs
        r2a = mp @ system._mask0.T - s0[a] * (1.0 - p_arm[a])
        r2b = mp @ system._mask1.T - s1[a] * p_arm[a]
        worst = np.maximum(worst, (np.abs(r2a) - slacks[0]).max(axis=1))
        worst = np.maximum(worst, (np.abs(r2b) - slacks[0]).max(axis=1))
    r3 = probs @ system._mask1.T - system.marginal_target
    worst = np.maximum(worst, (np.abs(r3) - slacks[A * 2 * K]).max(axis=1))
    worst = np.maximum(worst, np.abs(probs.sum(axis=1) - 1.0) - slacks[-1])
    worst = np.maximum(worst, (-x).max(axis=1))
    worst = np.maximum(worst, (x - 1.0).max(axis=1))
    if system.assumptions:
        i_idx, j_idx, cj_hi, c0_hi, cj_lo, c0_lo = system._assumption_arrays
        xi, xj = x[:, i_idx], x[:, j_idx]
        worst = np.maximum(worst, (xi + cj_hi * xj + c0_hi).max(axis=1))
        worst = np.maximum(worst, (-xi + cj_lo * xj + c0_lo).max(axis=1))
    return np.maximum(worst, 0.0)


def _sample_shard(system: ConstraintSystem, seed: int, shard: int, n: int) -> np.ndarray:
    """One shard of repair-assisted rejection sampling; returns packed rows."""
    A, C = system.n_arms, system.n_cells
    rng = np.random.default_rng([seed, shard])
    means = rng.random((n, A * C))
    probs = rng.exponential(size=(n, C))
    probs /= probs.sum(axis=1, keepdims=True)
    # Repair chunk by chunk in draw order, stopping once the retention cap
    # is met; the retained set is the same for any budget covering this shard.
    kept: list[np.ndarray] = []
    n_kept = 0
    for lo in range(0, n, _REPAIR_CHUNK):
        hi = min(lo + _REPAIR_CHUNK, n)
        x = _repair(system, means[lo:hi], probs[lo:hi])
        viol = _batch_violations(system, x)
        good = x[viol <= 0.0]
        if good.size:
            kept.append(good[: _RETAIN_PER_SHARD - n_kept])
            n_kept += len(kept[-1])
        if n_kept >= _RETAIN_PER_SHARD:
            break
    if not kept:
        return np.empty((0, system.n_unknowns))
    return np.concatenate(kept)


def _refine_walk(system: ConstraintSystem, x0: np.ndarray, coord: int,
                 direction: float, steps: int, rng) -> np.ndarray:
    """Random-walk push of one feasible point toward an extreme coordinate."""
    A, C = system.n_arms, system.n_cells
    best = x0.copy()
    step = 0.05
    for _ in range(steps):
        means = best[None, : A * C] + 0.25 * step * rng.standard_normal((1, A * C))
        means[0, coord] = best[coord] + direction * step
        np.clip(means, 0.0, 1.0, out=means)
        # Multiplicative jitter explores the corners of the simplex, where
        # cell-mean extremes typically live.
        probs = best[None, A * C :] * np.exp(
            2.0 * step * rng.standard_normal((1, C))
        )
        probs /= probs.sum()
        packed = _repair(system, means, probs, freeze=coord, sweeps=25)
        gain = direction * (packed[0, coord] - best[coord])
        if _batch_violations(system, packed)[0] <= 0.0 and gain >= -1e-12:
            best = packed[0]
            step = min(step * 1.5, 0.2) if gain > 1e-9 else step
        else:
            step = max(step * 0.5, 1e-5)
    return best


@lru_cache(maxsize=16)
def _retained_rows(system: ConstraintSystem, budget: OracleBudget) -> np.ndarray:
    _check_scope(system)
    A, C = system.n_arms, system.n_cells
    n_shards = -(-budget.n_samples // _SHARD_SIZE)
    retained: list[np.ndarray] = []
    per_shard: list[np.ndarray] = []
    for shard in range(n_shards):
        n = min(_SHARD_SIZE, budget.n_samples - shard * _SHARD_SIZE)
        rows = _sample_shard(system, budget.seed, shard, n)
        per_shard.append(rows)
        if rows.size:
            retained.append(rows)
    if not retained:
        raise EmptyOracle(
            f"no feasible point retained from {budget.n_samples} samples"
        )
    # Refinement: per shard, walk that shard's extreme point for every
    # mean coordinate and direction.  Shard-local seeding keeps results
    # stable when the budget (and thus the shard count) grows.
    refined: list[np.ndarray] = []
    n_walked = 0
    for shard, rows in enumerate(per_shard):
        if not rows.size:
            continue
        if n_walked >= _WALK_SHARDS:
            break
        n_walked += 1
        for coord in range(A * C):
            for flag, direction in ((0, -1.0), (1, 1.0)):
                pick = rows[np.argmax(direction * rows[:, coord])]
                rng = np.random.default_rng([budget.seed, shard, coord, flag])
                walked = _refine_walk(system, pick, coord, direction,
                                      budget.refine_steps, rng)
                rng = np.random.default_rng([budget.seed, shard, coord, flag, 1])
                refined.append(
                    _pinned_extend(system, walked, coord, direction, rng)
                )
    all_rows = np.concatenate([np.concatenate(retained)]
                              + ([np.stack(refined)] if refined else []))
    viol = _batch_violations(system, all_rows)
    return all_rows[viol <= 0.0]


def _pinned_extend(system: ConstraintSystem, start: np.ndarray, coord: int,
                   direction: float, rng, rounds: int = 12,
                   batch: int = 128) -> np.ndarray:
    """Bisection push of one extreme coordinate past what walking reached.

    Pins the target mean at a trial value and batch-restarts the repair
    from many random probability draws (sparse Dirichlet, to cover the
    corners of the marginal polytope); feasible restarts advance the
    bisection.  Returns the most extreme verified-feasible point found.
    """
    A, C = system.n_arms, system.n_cells
    best = start.copy()
    attained = best[coord]
    edge = 0.0 if direction < 0 else 1.0
    for _ in range(rounds):
        v = 0.5 * (attained + edge)
        q = batch // 4
        means = rng.random((batch, A * C))
        # half the pool starts at 0/1 mean corners, where sharp extremes live
        means[2 * q :] = (rng.random((batch - 2 * q, A * C)) < 0.5).astype(float)
        probs = rng.gamma(0.5, size=(batch, C)) + 1e-12
        probs /= probs.sum(axis=1, keepdims=True)
        # seed part of the pool from the incumbent (exact and jittered)
        probs[:q] = best[None, A * C :] * np.exp(rng.standard_normal((q, C)))
        probs[:q] /= probs[:q].sum(axis=1, keepdims=True)
        probs[0] = best[A * C :]
        means[:q] = best[None, : A * C] + 0.1 * rng.standard_normal((q, A * C))
        means[0] = best[: A * C]
        np.clip(means, 0.0, 1.0, out=means)
        means[:, coord] = v
        packed = _repair(system, means, probs, freeze=coord)
        viol = _batch_violations(system, packed)
        hits = np.flatnonzero(viol <= 0.0)
        if hits.size:
            best = packed[hits[0]]
            attained = v
        else:
            edge = v
        if abs(edge - attained) < 1e-4:
            break
    return best


def sample_feasible(system: ConstraintSystem, budget: OracleBudget = OracleBudget()):
    """Retained feasible points (verified max_violation == 0), refined
    toward the extremes of every cell mean.  Deterministic given the seed.
    """
    return [system.unpack(row) for row in _retained_rows(system, budget)]


def grid_bounds(system: ConstraintSystem, t: str, cell: CellIndex,
                budget: OracleBudget = OracleBudget()) -> tuple[float, float]:
    """Inner interval [lo+, hi-] for one long mean over the retained set."""
    rows = _retained_rows(system, budget)
    col = rows[:, system.mean_index(t, cell)]
    return float(col.min()), float(col.max())
