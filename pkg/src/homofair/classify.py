"""Post-processing of binary labels under a kernel-smoothed exposure floor.

Find ``y_tilde`` in {0,1}^n flipping as few entries of ``y_hat`` as possible
such that every smoothed exposure ``A(K, y_tilde)_i`` is at least
``theta_min`` and the number of positives does not grow.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .inequality import DEFAULT, EntropyConfig, Kernel, as_kernel, partition_between, smooth

__all__ = [
    "InstanceTooLarge",
    "RelabelInstance",
    "RelabelResult",
    "evaluate_relabel",
    "exposure",
    "is_feasible",
    "solve",
    "solve_exact",
    "solve_heuristic",
    "theta_sweep",
]

FEAS_TOL = 1e-12
EXACT_MAX_N = 24


class InstanceTooLarge(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class RelabelInstance:
    y_hat: np.ndarray
    kernel: Kernel
    theta_min: float

    def __post_init__(self):
        y = np.asarray(self.y_hat)
        if not np.all((y == 0) | (y == 1)):
            raise ValueError("y_hat must be binary")
        object.__setattr__(self, "y_hat", y.astype(np.int8))
        object.__setattr__(self, "kernel", as_kernel(self.kernel))
        if self.kernel.n != len(y):
            raise ValueError("kernel and y_hat sizes differ")
        if not 0 <= self.theta_min <= 1:
            raise ValueError("theta_min must lie in [0, 1]")

    @property
    def n(self) -> int:
        return len(self.y_hat)


@dataclass(frozen=True, eq=False)
class RelabelResult:
    """Outcome of a solver.

    ``feasible`` is False when no labeling was found; ``y_tilde`` then holds
    the best vector reached (heuristic) or ``y_hat`` unchanged (exact).
    """

    y_tilde: np.ndarray
    y_hat: np.ndarray
    flips: int
    min_exposure_achieved: float
    feasible: bool
    optimal: bool

    @property
    def status(self) -> str:
        if not self.feasible:
            return "infeasible" if self.optimal else "failed"
        return "optimal" if self.optimal else "feasible"


def exposure(kernel, y) -> np.ndarray:
    return smooth(kernel, np.asarray(y, dtype=float))


def is_feasible(instance: RelabelInstance, y, tol: float = 1e-9) -> bool:
    y = np.asarray(y)
    return bool(exposure(instance.kernel, y).min() >= instance.theta_min - tol
                and y.sum() <= instance.y_hat.sum())


def _result(instance, y, feasible, optimal):
    y = np.asarray(y, dtype=np.int8)
    return RelabelResult(
        y_tilde=y,
        y_hat=instance.y_hat,
        flips=int(np.sum(y != instance.y_hat)),
        min_exposure_achieved=float(exposure(instance.kernel, y).min()),
        feasible=feasible,
        optimal=optimal,
    )


def _check(instance, res):
    if res.feasible:
        assert is_feasible(instance, res.y_tilde), "solver returned an infeasible labeling"
    return res


def solve_exact(instance: RelabelInstance, max_n: int = EXACT_MAX_N) -> RelabelResult:
    """Depth-first branch and bound over the labels in index order.

    Value 0 is tried before 1, and only strictly better incumbents replace the
    current one, so among optimal labelings the lexicographically smallest is
    returned.
    """
    n = instance.n
    if n > max_n:
        raise InstanceTooLarge(f"n={n} exceeds {max_n}; use solve_heuristic")
    K = instance.kernel.matrix
    y_hat = instance.y_hat.astype(int)
    s = int(y_hat.sum())
    need = instance.theta_min * K.sum(axis=1) - FEAS_TOL

    # topsum[d][:, b]: largest mass any b of the free columns d.. can add to each row
    topsum = []
    for d in range(n + 1):
        tail = -np.sort(-K[:, d:], axis=1)
        topsum.append(np.concatenate([np.zeros((n, 1)), np.cumsum(tail, axis=1)], axis=1))
    # mass added by keeping y_hat on the free columns
    keep_mass = [K[:, d:] @ y_hat[d:] for d in range(n + 1)]
    keep_ones = [int(y_hat[d:].sum()) for d in range(n + 1)]

    best = {"flips": n + 1, "y": None}
    y = np.zeros(n, dtype=int)
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 10 * n + 100))

    def dfs(d, cur, ones, flips):
        free = n - d
        budget = s - ones
        if np.any(cur + topsum[d][:, min(budget, free)] < need):
            return
        done = ones + keep_ones[d] <= s and np.all(cur + keep_mass[d] >= need)
        if flips + (0 if done else 1) >= best["flips"]:
            return
        if d == n:
            best["flips"], best["y"] = flips, y.copy()
            return
        for v in (0, 1):
            if v == 1 and ones >= s:
                continue
            y[d] = v
            dfs(d + 1, cur + K[:, d] * v, ones + v, flips + (v != y_hat[d]))
        y[d] = 0

    dfs(0, np.zeros(n), 0, 0)
    if best["y"] is None:
        return _result(instance, y_hat, feasible=False, optimal=True)
    return _check(instance, _result(instance, best["y"], feasible=True, optimal=True))


def _score(expo, theta):
    # primary: the minimum exposure; secondary: total shortfall below theta
    return expo.min(axis=-1), -np.maximum(theta - expo, 0.0).sum(axis=-1)


def _better(a, b, tol=1e-12):
    """Score ``a`` beats ``b`` by more than rounding noise. Exposures are
    updated incrementally, so a revisited labeling can look marginally
    better than last time; a strict comparison would let tabu cycles pass
    for progress."""
    if a[0] > b[0] + tol:
        return True
    return a[0] >= b[0] - tol and a[1] > b[1] + tol


def _argbest(primary, secondary, prefer, mask):
    """Index maximising (primary, secondary, prefer) lexicographically over
    ``mask``; ties fall to the smallest index."""
    idx = np.flatnonzero(mask)
    if len(idx) == 0:
        return -1
    p, s, f = primary[idx], secondary[idx], prefer[idx]
    tol = 1e-12
    keep = p >= p.max() - tol
    keep &= s >= s[keep].max() - tol
    keep &= f >= f[keep].max()
    return int(idx[np.flatnonzero(keep)[0]])


def _pair_move(expo, contrib, theta, y, y_hat, tabu, width):
    """Best joint (turn on j, turn off l) swap among the ``width`` strongest
    candidates on each side, skipping tabu nodes. Returns (j, l, exposures)."""
    on = np.flatnonzero((y == 0) & ~tabu)
    off = np.flatnonzero((y == 1) & ~tabu)
    if len(on) == 0 or len(off) == 0:
        return -1, -1, None
    if len(on) > width:
        p, s = _score(expo[None, :] + contrib[:, on].T, theta)
        on = on[np.lexsort((s, p))[::-1][:width]]
    if len(off) > width:
        p, s = _score(expo[None, :] - contrib[:, off].T, theta)
        off = off[np.lexsort((s, p))[::-1][:width]]
    cand = expo[None, None, :] + contrib[:, on].T[:, None, :] - contrib[:, off].T[None, :, :]
    p, s = _score(cand, theta)
    restore = (y_hat[on][:, None] == 1).astype(int) + (y_hat[off][None, :] == 0)
    order = np.lexsort((-off[None, :].repeat(len(on), 0).ravel(),
                        -on[:, None].repeat(len(off), 1).ravel(),
                        restore.ravel(), s.ravel(), p.ravel()))
    best = order[-1]
    a, b = divmod(int(best), len(off))
    return int(on[a]), int(off[b]), cand[a, b]


def _construct(contrib, theta, s):
    """Place ``s`` positives one at a time, each maximising the score."""
    n = contrib.shape[0]
    y = np.zeros(n, dtype=int)
    expo = np.zeros(n)
    for _ in range(s):
        cand = expo[None, :] + contrib.T
        p, sh = _score(cand, theta)
        j = _argbest(p, sh, np.zeros(n), y == 0)
        y[j], expo = 1, cand[j]
    return y


def _local_search(y, y_hat, contrib, theta, max_swaps, width, tenure):
    n = len(y)
    expo = contrib @ y
    best_y, best_score = y.copy(), _score(expo, theta)
    frozen = np.zeros(n, dtype=int)     # swap index until which a node is tabu
    swaps = last_gain = 0
    patience = max(50, n)
    while (expo.min() < theta - FEAS_TOL and swaps < max_swaps and 0 < y.sum() < n
           and swaps - last_gain <= patience):
        tabu = frozen > swaps
        cand_on = expo[None, :] + contrib.T                  # row j: exposures after j on
        p_on, s_on = _score(cand_on, theta)
        j = _argbest(p_on, s_on, y_hat == 1, (y == 0) & ~tabu)
        new = None
        if j >= 0:
            cand_off = cand_on[j][None, :] - contrib.T
            p_off, s_off = _score(cand_off, theta)
            l = _argbest(p_off, s_off, y_hat == 0, (y == 1) & ~tabu)
            if l >= 0 and _better(_score(cand_off[l], theta), _score(expo, theta)):
                new = cand_off[l]
        # the joint move can see a pair the one-side-at-a-time choice misses
        pj, pl, pnew = _pair_move(expo, contrib, theta, y, y_hat, tabu, width)
        if pnew is not None and (new is None or _better(_score(pnew, theta), _score(new, theta))):
            j, l, new = pj, pl, pnew
        if new is None:
            break
        y[j], y[l] = 1, 0
        expo = new
        swaps += 1
        frozen[[j, l]] = swaps + tenure
        if _better(_score(expo, theta), best_score):
            best_y, best_score = y.copy(), _score(expo, theta)
            last_gain = swaps
    return best_y


def _undo_flips(y, y_hat, contrib, theta):
    """Swap back a gained and a dropped positive while that stays feasible."""
    expo = contrib @ y
    improved = True
    while improved:
        improved = False
        gained = np.flatnonzero((y == 1) & (y_hat == 0))
        dropped = np.flatnonzero((y == 0) & (y_hat == 1))
        for j in gained:
            for l in dropped:
                e = expo - contrib[:, j] + contrib[:, l]
                if e.min() >= theta - FEAS_TOL:
                    y[j], y[l], expo = 0, 1, e
                    improved = True
                    break
            if improved:
                break
    return y


def _relaxation_max_min(contrib, s):
    """Largest minimum exposure over fractional labelings with ``s`` positives
    (an upper bound for any 0/1 labeling)."""
    n = contrib.shape[0]
    res = linprog(np.r_[np.zeros(n), -1.0],
                  A_ub=np.hstack([-contrib, np.ones((n, 1))]), b_ub=np.zeros(n),
                  A_eq=np.r_[np.ones(n), 0.0][None, :], b_eq=[s],
                  bounds=[(0, 1)] * n + [(None, None)], method="highs")
    return -res.fun if res.status == 0 else np.inf


def solve_heuristic(instance: RelabelInstance, max_swaps: int | None = None,
                    width: int = 64, tenure: int = 2, restarts: int | None = None,
                    seed: int = 0) -> RelabelResult:
    """Greedy paired swaps with a tabu fallback, then a pass undoing
    unnecessary flips.

    Each greedy swap turns on the 0-label that most raises the minimum
    smoothed exposure and turns off the 1-label whose removal lowers it least,
    keeping the number of positives fixed. Ties on the minimum are broken by
    the total shortfall below ``theta_min``, then by preferring to restore
    ``y_hat``. The best joint swap over the ``width`` strongest candidates
    per side is also scored and wins when it is better. When no swap
    improves, that joint swap is taken anyway, with the swapped nodes frozen
    for ``tenure`` swaps.
    A search gives up after ``n**2 / 2`` swaps, or after ``max(50, n)``
    swaps without improving its best score.

    The search runs from ``y_hat`` and, if that fails, again from a labeling
    built by placing the positives greedily from scratch. After that come
    ``restarts`` rounds of iterated local search: the best labeling so far is
    perturbed by one to three random swaps (drawn from ``seed``) and searched
    again. The default number of rounds, ``min(128, max(2, 2048 // n))``,
    spends effort where it is cheap: small instances can have a single
    feasible labeling that the first two searches walk past. The rounds are
    skipped when the linear relaxation already proves the threshold out of
    reach.
    """
    K = instance.kernel.matrix
    n, theta = instance.n, instance.theta_min
    y_hat = instance.y_hat.astype(int)
    contrib = K / K.sum(axis=1)[:, None]     # contrib[:, j]: exposure gain of turning j on
    if max_swaps is None:
        max_swaps = n * n // 2

    if restarts is None:
        restarts = min(128, max(2, 2048 // n))
    rng = np.random.default_rng(seed)
    s = int(y_hat.sum())
    best = None

    def perturbed():
        y = best.copy()
        k = int(rng.integers(1, min(3, s, n - s) + 1)) if 0 < s < n else 0
        on = rng.choice(np.flatnonzero(y == 0), size=k, replace=False)
        off = rng.choice(np.flatnonzero(y == 1), size=k, replace=False)
        y[on], y[off] = 1, 0
        return y

    starts = [lambda: y_hat.copy(), lambda: _construct(contrib, theta, s)]
    starts += [perturbed] * restarts
    for k, start in enumerate(starts):
        if k == 2 and _relaxation_max_min(contrib, s) < theta - FEAS_TOL:
            break       # no fractional labeling reaches theta, so no 0/1 one does
        y = _local_search(start(), y_hat, contrib, theta, max_swaps, width, tenure)
        if (contrib @ y).min() >= theta - FEAS_TOL:
            y = _undo_flips(y, y_hat, contrib, theta)
            return _check(instance, _result(instance, y, feasible=True, optimal=False))
        if best is None or _better(_score(contrib @ y, theta), _score(contrib @ best, theta)):
            best = y
    return _result(instance, best, feasible=False, optimal=False)


def solve(instance: RelabelInstance) -> RelabelResult:
    """Exact solver when the instance is small enough, else the heuristic."""
    if instance.n <= EXACT_MAX_N:
        return solve_exact(instance)
    return solve_heuristic(instance)


def evaluate_relabel(result: RelabelResult, labels, cfg: EntropyConfig = DEFAULT) -> dict:
    """Ground-truth between-group inequality before and after relabeling."""
    before = partition_between(labels, result.y_hat, cfg, allow_zeros=True)
    after = partition_between(labels, result.y_tilde, cfg, allow_zeros=True)
    return {
        "delta0_before": before,
        "delta0_after": after,
        "flip_fraction": result.flips / len(result.y_hat),
    }


def theta_sweep(y_hat, kernel, thetas, labels=None, cfg: EntropyConfig = DEFAULT,
                solver=solve):
    """Solve for each threshold in increasing order, stopping at the first
    infeasible one. Returns ``(rows, results)``."""
    rows, results = [], []
    for theta in thetas:
        inst = RelabelInstance(y_hat, kernel, float(theta))
        res = solver(inst)
        if not res.feasible:
            break
        row = {
            "theta": float(theta),
            "flips": res.flips,
            "flip_fraction": res.flips / inst.n,
            "min_exposure": res.min_exposure_achieved,
        }
        if labels is not None:
            row["delta0"] = partition_between(labels, res.y_tilde, cfg, allow_zeros=True)
        rows.append(row)
        results.append(res)
    return rows, results
