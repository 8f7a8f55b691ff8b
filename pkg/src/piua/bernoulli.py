"""Scaled-Bernoulli classical instances and the worst-case program behind the
``1 / (2 - p_min)`` guarantee.

The program maximizes the prophet's value over ordered instances that
start with a deterministic 1 and on which the online agent is content to
take that 1::

    max   sum_i  p_i lam_i prod_{j>i} (1 - p_j)
    s.t.  p_1 = 1, lam_1 = 1
          p_i in [p_min, 1]          (i >= 2)
          lam_i >= lam_{i-1}         (i >= 2)
          F_i <= 1                   (all i)

where ``F_i`` is the expected first positive value among options i..n.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .engine import classic_opt_value, on_value
from .model import (
    ClassicAtom,
    ClassicInstance,
    ClassicOption,
    Instance,
    ModelError,
    OptionSpec,
    ParamOutOfRange,
    SBInstance,
    SBPair,
    TOL,
)

FEAS_TOL = 1e-6


class NotSorted(ModelError):
    pass


class LengthMismatch(ModelError):
    pass


class DegenerateP(ModelError):
    pass


class InfeasibleStart(RuntimeError):
    pass


def sb_to_classic(sb: SBInstance) -> ClassicInstance:
    return ClassicInstance(
        tuple(ClassicOption((ClassicAtom(lam, p), ClassicAtom(0.0, 1.0 - p))) for lam, p in sb.pairs)
    )


def sb_to_instance(sb: SBInstance) -> Instance:
    """Embed as an uncertain-acceptance instance with acceptance 1."""
    return Instance(tuple(OptionSpec.scaled_bernoulli(lam, p) for lam, p in sb.pairs))


def sb_on(sb: SBInstance) -> float:
    return on_value(sb_to_classic(sb))


def sb_opt(sb: SBInstance) -> float:
    return classic_opt_value(sb_to_classic(sb))


def sort_ascending(sb: SBInstance) -> SBInstance:
    """Reorder so that ``lam`` is nondecreasing (stable)."""
    return SBInstance(tuple(sorted(sb.pairs, key=lambda pr: pr.lam)))


def is_sorted(sb: SBInstance) -> bool:
    return all(a.lam <= b.lam for a, b in zip(sb.pairs, sb.pairs[1:]))


def collapse_prefix(sb: SBInstance) -> SBInstance:
    """Replace the options an optimal online agent always skips by a
    deterministic head worth the online value.

    With ``v = ON(sb)`` and ``i`` the first index with ``lam_i >= v``, the
    result is ``(v w.p. 1, X_i, ..., X_n)``: same online value, prophet value
    no smaller.
    """
    if not is_sorted(sb):
        raise NotSorted("collapse_prefix needs lambda sorted ascending")
    v = sb_on(sb)
    start = next((i for i, pr in enumerate(sb.pairs) if pr.lam >= v - TOL), len(sb.pairs) - 1)
    return SBInstance((SBPair(v, 1.0),) + sb.pairs[start:])


def f_values(sb: SBInstance) -> list[float]:
    """``F_i``: expected first positive value among options i..n (recurrence)."""
    out = [0.0] * len(sb)
    nxt = 0.0
    for i in reversed(range(len(sb))):
        lam, p = sb.pairs[i]
        nxt = p * lam + (1.0 - p) * nxt
        out[i] = nxt
    return out


def f_values_closed(sb: SBInstance) -> list[float]:
    """Same quantity as :func:`f_values` from the explicit sum over first successes."""
    n = len(sb)
    out = []
    for i in range(n):
        total = 0.0
        for j in range(i, n):
            miss = math.prod(1.0 - sb.pairs[k].p for k in range(i, j))
            total += miss * sb.pairs[j].p * sb.pairs[j].lam
        out.append(total)
    return out


def bn_objective(p: Sequence[float], lam: Sequence[float]) -> float:
    """Prophet value of the ordered scaled-Bernoulli instance ``(lam_i, p_i)``."""
    if len(p) != len(lam):
        raise LengthMismatch(f"{len(p)} probabilities but {len(lam)} scales")
    n = len(p)
    return sum(p[i] * lam[i] * math.prod(1.0 - p[j] for j in range(i + 1, n)) for i in range(n))


def cr_lower_bound(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise ParamOutOfRange(f"p {p!r} outside [0, 1]")
    return 1.0 / (2.0 - p)


def tight_sb_instance(p: float) -> SBInstance:
    """Deterministic 1 followed by ``(1/p) Ber(p)``: ratio exactly ``1/(2-p)``."""
    if not 0.0 < p < 1.0:
        raise DegenerateP(f"p {p!r} must lie strictly inside (0, 1)")
    return SBInstance((SBPair(1.0, 1.0), SBPair(1.0 / p, p)))


def tight_beta_instance(p: float) -> Instance:
    """Sure 1, then a deterministic ``1/p`` accepted with probability ``p``."""
    if not 0.0 < p < 1.0:
        raise DegenerateP(f"p {p!r} must lie strictly inside (0, 1)")
    return Instance(
        (OptionSpec.deterministic(1.0), OptionSpec.deterministic(1.0 / p, accept=p)),
        name=f"tight-beta(p={p:g})",
    )


# -- the worst-case program -------------------------------------------------------


@dataclass(frozen=True)
class BnSolution:
    p: tuple[float, ...]
    lam: tuple[float, ...]
    objective: float
    feasible: bool
    f_values: tuple[float, ...]
    p_min: float = field(default=math.nan, compare=False)

    def to_dict(self) -> dict[str, Any]:
        return {
            "p": list(self.p),
            "lambda": list(self.lam),
            "objective": self.objective,
            "f_values": list(self.f_values),
            "feasible": self.feasible,
        }


def bn_feasible(p: Sequence[float], lam: Sequence[float], p_min: float, tol: float = FEAS_TOL) -> bool:
    if len(p) != len(lam):
        raise LengthMismatch(f"{len(p)} probabilities but {len(lam)} scales")
    if abs(p[0] - 1.0) > tol or abs(lam[0] - 1.0) > tol:
        return False
    if any(not (p_min - tol <= pi <= 1.0 + tol) for pi in p[1:]):
        return False
    if any(b < a - tol for a, b in zip(lam, lam[1:])):
        return False
    fs = f_values(SBInstance.from_lists(lam, p))
    return all(f <= 1.0 + tol for f in fs)


def _lam_from_f(p: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Invert the F recurrence: ``lam_i = (F_i - (1 - p_i) F_{i+1}) / p_i``.

    Works on the last axis; ``F_{n+1} = 0``.
    """
    f_next = np.concatenate([f[..., 1:], np.zeros(f.shape[:-1] + (1,))], axis=-1)
    return (f - (1.0 - p) * f_next) / p


def _objective_rows(p: np.ndarray, lam: np.ndarray) -> np.ndarray:
    # suffix products prod_{j>i}(1 - p_j)
    miss = np.cumprod((1.0 - p)[..., ::-1], axis=-1)[..., ::-1]
    after = np.concatenate([miss[..., 1:], np.ones(miss.shape[:-1] + (1,))], axis=-1)
    return np.sum(p * lam * after, axis=-1)


def _feasible_rows(lam: np.ndarray, cap: float) -> np.ndarray:
    mono = np.all(np.diff(lam, axis=-1) >= -1e-12, axis=-1)
    return mono & np.all(lam <= cap, axis=-1) & np.all(lam >= 0, axis=-1)


class _BnProblem:
    """Free coordinates are ``p_2..p_n`` and ``F_2..F_n``; ``lam`` is derived.

    Box constraints ``p in [p_min, 1]`` and ``F in [0, 1]`` are handled by
    projection (clipping); ordering and the ``lam`` cap by rejection.
    """

    def __init__(self, n: int, p_min: float):
        self.n = n
        self.p_min = p_min
        self.lam_cap = 1.0 / p_min + 1.0
        self.lo = np.array([p_min] * (n - 1) + [0.0] * (n - 1))
        self.hi = np.ones(2 * (n - 1))

    def split(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        m = self.n - 1
        rows = np.atleast_2d(z)
        ones = np.ones((len(rows), 1))
        p = np.hstack([ones, rows[:, :m]])
        f = np.hstack([ones, rows[:, m:]])
        if np.ndim(z) == 1:
            return p[0], f[0]
        return p, f

    def lam(self, z: np.ndarray) -> np.ndarray:
        p, f = self.split(z)
        lam = _lam_from_f(p, f)
        # p_1 = 1 makes F_1 = lam_1; pin it exactly
        lam[..., 0] = 1.0
        return lam

    def value(self, z: np.ndarray) -> float:
        """Objective at ``z``, or ``-inf`` when infeasible."""
        p, _ = self.split(z)
        lam = self.lam(z)
        if not _feasible_rows(lam[None, :], self.lam_cap)[0]:
            return -math.inf
        return float(_objective_rows(p[None, :], lam[None, :])[0])

    def values(self, zs: np.ndarray) -> np.ndarray:
        p, _ = self.split(zs)
        lam = self.lam(zs)
        out = _objective_rows(p, lam)
        out[~_feasible_rows(lam, self.lam_cap)] = -np.inf
        return out

    def ascend(self, z: np.ndarray, budget: int, step: float = 0.05, min_step: float = 1e-6):
        z = np.clip(z.astype(float), self.lo, self.hi)
        best = self.value(z)
        sweeps = 0
        while step >= min_step and sweeps < budget:
            sweeps += 1
            improved = False
            for k in range(z.size):
                for direction in (1.0, -1.0):
                    cand = z.copy()
                    cand[k] = min(self.hi[k], max(self.lo[k], cand[k] + direction * step))
                    val = self.value(cand)
                    if val > best + 1e-15:
                        z, best, improved = cand, val, True
                        break
            if not improved:
                step /= 2.0
        return z, best

    def solution(self, z: np.ndarray) -> BnSolution:
        p, _ = self.split(z)
        lam = self.lam(z)
        p_t, lam_t = tuple(float(x) for x in p), tuple(float(x) for x in lam)
        fs = f_values(SBInstance.from_lists(lam_t, p_t))
        return BnSolution(
            p=p_t,
            lam=lam_t,
            objective=bn_objective(p_t, lam_t),
            feasible=bn_feasible(p_t, lam_t, self.p_min),
            f_values=tuple(fs),
            p_min=self.p_min,
        )


def _grid(lo: float, hi: float, res: float) -> np.ndarray:
    k = int(math.floor((hi - lo) / res + 1e-9))
    pts = lo + res * np.arange(k + 1)
    if hi - pts[-1] > 1e-12:
        pts = np.append(pts, hi)
    return pts


def solve_bn(n: int, p_min: float, budget: int = 10_000, starts: int = 8, seed_res: float = 0.05) -> BnSolution:
    """Maximize the worst-case program numerically.

    Seeds are a grid over ``p_2..p_n`` (resolution ``seed_res``) crossed with
    ``F_2..F_n`` in {0.5, 0.75, 1}; coordinate ascent with step halving runs
    from the ``starts`` best seeds plus the all-ones point. Ties between
    starts go to the lexicographically smallest ``(p, lam)``.
    """
    if not (isinstance(n, (int, np.integer)) and n >= 2):
        raise ParamOutOfRange(f"n = {n!r} must be an integer >= 2")
    if not 0.0 < p_min < 1.0:
        raise ParamOutOfRange(f"p_min {p_min!r} must lie in (0, 1)")
    prob = _BnProblem(int(n), float(p_min))
    m = n - 1

    ones = np.ones(2 * m)
    if not math.isfinite(prob.value(ones)):
        raise InfeasibleStart("the all-ones start is infeasible")

    p_axis = _grid(p_min, 1.0, seed_res)
    f_axis = np.array([0.5, 0.75, 1.0])
    seeds = np.array(
        [list(ps) + list(fs) for ps in itertools.product(p_axis, repeat=m) for fs in itertools.product(f_axis, repeat=m)]
    )
    vals = prob.values(seeds)
    order = np.argsort(-vals, kind="stable")
    chosen = [seeds[i] for i in order[:starts] if np.isfinite(vals[i])]
    chosen.append(ones)

    results = []
    for z0 in chosen:
        z, val = prob.ascend(z0, budget)
        results.append((val, prob.solution(z)))
    top = max(v for v, _ in results)
    tied = [s for v, s in results if v >= top - 1e-12]
    return min(tied, key=lambda s: s.p + s.lam)


def bn_grid_oracle_n2(p_min: float, res: float = 1e-3) -> tuple[float, float, float]:
    """Brute-force the two-option program on a grid in ``(p_2, lam_2)``.

    Returns ``(best objective, p_2, lam_2)``. With ``p_1 = lam_1 = 1`` the
    constraints reduce to ``lam_2 >= 1`` and ``p_2 lam_2 <= 1``.
    """
    ps = _grid(p_min, 1.0, res)
    lams = _grid(1.0, 1.0 / p_min + 1.0, res)
    best, arg = -math.inf, (math.nan, math.nan)
    for p2 in ps:
        ok = lams[p2 * lams <= 1.0 + 1e-12]
        if ok.size == 0:
            continue
        lam2 = ok[-1]  # objective increases in lam_2
        val = (1.0 - p2) + p2 * lam2
        if val > best:
            best, arg = val, (float(p2), float(lam2))
    return best, arg[0], arg[1]


def bn_grid_upper_check(n: int, p_min: float, p_res: float = 0.05, lam_res: float = 0.1) -> float:
    """Largest objective over a coarse feasible grid in ``(p, lam)`` space.

    An independent sanity bound: no feasible grid point should beat
    ``2 - p_min``.
    """
    m = n - 1
    ps = _grid(p_min, 1.0, p_res)
    lams = _grid(1.0, 1.0 / p_min + 1.0, lam_res)
    p_rows = np.array(list(itertools.product(ps, repeat=m)))
    best = -math.inf
    for lam_tail in itertools.combinations_with_replacement(lams, m):
        lam = np.concatenate([[1.0], lam_tail])
        lam_mat = np.broadcast_to(lam, (len(p_rows), n))
        p_mat = np.hstack([np.ones((len(p_rows), 1)), p_rows])
        # F recurrence on every row
        f = np.zeros(len(p_rows))
        ok = np.ones(len(p_rows), dtype=bool)
        for i in reversed(range(n)):
            f = p_mat[:, i] * lam_mat[:, i] + (1.0 - p_mat[:, i]) * f
            ok &= f <= 1.0 + 1e-12
        if ok.any():
            vals = _objective_rows(p_mat[ok], lam_mat[ok])
            best = max(best, float(vals.max()))
    return best


def certify_active(sol: BnSolution, p_min: float, tol: float = 1e-3, probe: float = 1e-4) -> dict[str, bool]:
    """Check the structure an optimal point must have.

    * feasible,
    * last F constraint active (``F_n = 1``),
    * last probability at its lower bound,
    * no single-coordinate feasible move of size ``probe`` in ``(p, F)``
      space improves the objective by more than ``1e-9``.
    """
    n = len(sol.p)
    prob = _BnProblem(n, p_min)
    fs = sol.f_values
    z = np.array(list(sol.p[1:]) + list(min(1.0, f) for f in fs[1:]))
    base = prob.value(z)
    local = True
    for k in range(z.size):
        for d in (probe, -probe):
            cand = z.copy()
            cand[k] = min(prob.hi[k], max(prob.lo[k], cand[k] + d))
            if prob.value(cand) > base + 1e-9:
                local = False
    return {
        "feasible": sol.feasible,
        "last_f_active": abs(fs[-1] - 1.0) <= tol,
        "last_p_at_bound": abs(sol.p[-1] - p_min) <= tol,
        "locally_optimal": local,
    }
