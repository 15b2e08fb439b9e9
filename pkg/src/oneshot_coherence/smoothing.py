"""Pure-state smoothed min-entropy of a dephased distribution.

Phase alignment lemma: the best pure state in the fidelity ball around
``psi`` can be taken with the same phases as ``psi``. The overlap modulus
``|<psi|phi>|`` is largest when every term ``conj(psi_i) phi_i`` points the
same way, and the dephased distribution of ``phi`` only sees ``|phi_i|^2``.
So the whole problem lives on probability vectors ``q``:

    maximize -log2 max(q)  subject to  (sum_i sqrt(p_i q_i))^2 >= 1 - eps.

For a fixed cap on ``max(q)`` the inner fidelity maximization is concave and
solved exactly by capped waterfilling ``q_i = min(cap, t p_i)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .entropies import s_min
from .qstate import GroupedDistribution, ValidationError

FEASIBILITY_SLACK = 1e-9
EXACT_TOL = 1e-12
BISECT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class CappedFidelityResult:
    fidelity: float
    q_star: GroupedDistribution
    t: float
    capped_mass: float
    cap: float
    #: q value for each group of the input distribution, same order
    q_aligned: np.ndarray
    #: mass routed to outcomes outside the support of p
    pad_mass: float

    @property
    def fidelity_sq(self) -> float:
        return self.fidelity ** 2


@dataclass(frozen=True, eq=False)
class SmoothedMinEntropyResult:
    epsilon: float
    best_M: int
    continuous_value: float
    witness: CappedFidelityResult

    @property
    def integer_value(self) -> float:
        return math.log2(self.best_M)


def _ambient(p: GroupedDistribution, dim: int | None) -> int:
    n = p.support_size
    if dim is None:
        return n
    if dim < n:
        raise ValidationError(f"ambient dim {dim} below support size {n}", "dim", "dim >= support")
    return int(dim)


def capped_fidelity_value(p: GroupedDistribution, cap: float, dim: int | None = None) -> float:
    """Fidelity only; the hot path used by searches."""
    d = _ambient(p, dim)
    return _backend.capped_fidelity(p.values, p.mults, cap, d - p.support_size)[0]


def max_fidelity_capped(p: GroupedDistribution, cap: float,
                        dim: int | None = None) -> CappedFidelityResult:
    """Closest distribution to ``p`` (in fidelity) whose entries are all ``<= cap``.

    ``dim`` is the number of available outcomes; outcomes beyond the support
    of ``p`` may receive mass when the support alone cannot hold it.
    """
    if not 0 < cap <= 1:
        raise ValueError(f"cap must lie in (0, 1], got {cap}")
    d = _ambient(p, dim)
    n_pad = d - p.support_size
    fid, t, k, pad_mass = _backend.capped_fidelity(p.values, p.mults, cap, n_pad)
    q = np.minimum(cap, t * p.values)
    q[:k] = cap
    capped_mass = cap * float(p.mults[:k].sum())
    vals, mults = list(q), list(p.mults)
    if pad_mass > 0 and n_pad > 0:
        vals.append(pad_mass / n_pad)
        mults.append(float(n_pad))
    q_star = GroupedDistribution.from_groups(np.array(vals), np.array(mults))
    return CappedFidelityResult(
        fidelity=min(1.0, float(fid)), q_star=q_star, t=float(t), capped_mass=capped_mass,
        cap=float(cap), q_aligned=q, pad_mass=float(pad_mass))


def largest_feasible(fid_sq, d: int, threshold: float) -> tuple[int, float]:
    """Search the cap ``1/m`` for the largest ``m`` in ``[1, d]`` meeting ``fid_sq(cap) >= threshold``.

    ``fid_sq`` must be nonincreasing in ``m``. Returns the largest feasible
    integer and the largest feasible real ``m`` (bisection to 1e-10).
    """
    if fid_sq(1.0 / d) >= threshold:
        return d, float(d)
    lo, hi = 1, d  # lo feasible, hi infeasible
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if fid_sq(1.0 / mid) >= threshold:
            lo = mid
        else:
            hi = mid
    a, b = float(lo), float(lo + 1)
    while b - a > BISECT_TOL * max(1.0, a):
        mid = 0.5 * (a + b)
        if fid_sq(1.0 / mid) >= threshold:
            a = mid
        else:
            b = mid
    return lo, a


def smoothed_min_entropy_pure(p: GroupedDistribution, epsilon: float,
                              dim: int | None = None) -> SmoothedMinEntropyResult:
    """Smoothed min-entropy over the pure fidelity ball, integer and continuous.

    ``best_M`` is the largest integer M whose cap ``1/M`` keeps squared
    fidelity at least ``1 - eps`` (1e-9 slack toward feasibility). At
    ``eps == 0`` the criterion is exact: ``max p <= 1/M``.
    """
    if not 0 <= epsilon < 1:
        raise ValueError(f"epsilon must lie in [0, 1), got {epsilon}")
    d = _ambient(p, dim)
    if epsilon == 0:
        best_M = min(d, int(math.floor(1.0 / p.max_value + EXACT_TOL)))
        best_M = max(best_M, 1)
        cont = s_min(p)
    else:
        threshold = 1.0 - epsilon - FEASIBILITY_SLACK
        best_M, m = largest_feasible(
            lambda cap: capped_fidelity_value(p, cap, d) ** 2, d, threshold)
        cont = math.log2(m)
    witness = max_fidelity_capped(p, 1.0 / best_M, d)
    return SmoothedMinEntropyResult(float(epsilon), int(best_M), float(cont), witness)


def oracle_smoothed_min_entropy(p: GroupedDistribution, epsilon: float,
                                grid_step: float = 1e-3, dim: int | None = None,
                                refine: int = 0) -> float:
    """Brute-force smoothed min-entropy over a simplex grid (at most 3 outcomes).

    Enumerates every grid point ``q`` of the probability simplex, keeps those
    with ``(sum sqrt(p q))^2 >= 1 - eps`` and returns the best ``-log2 max q``.
    With ``refine > 0`` the search is repeated that many times on a 10x finer
    grid over the bounding box (padded by 3 old steps) of every feasible point
    whose max lies within one step of the incumbent. Near-ties in ``p`` make
    the near-optimal set a long sliver, so a window around one point is not
    enough. Never uses the waterfilling structure.
    """
    if grid_step > 1e-2:
        raise ValueError("grid_step must be <= 1e-2")
    d = _ambient(p, dim)
    if d > 3:
        raise ValidationError(f"oracle supports at most 3 outcomes, got {d}", "p", "support <= 3")
    probs = np.zeros(d)
    probs[: p.support_size] = p.expand()
    threshold = 1.0 - epsilon - FEASIBILITY_SLACK
    best, q = _backend.grid_search(probs, threshold, grid_step, np.zeros(d), np.ones(d))
    if q is None:
        raise ValueError("no feasible grid point; use a finer grid_step")
    step = grid_step
    lo, hi = np.zeros(d), np.ones(d)
    for _ in range(refine):
        box = _backend.grid_bbox(probs, threshold, step, lo, hi, best + step)
        lo = np.clip(box[0] - 3 * step, 0.0, 1.0)
        hi = np.clip(box[1] + 3 * step, 0.0, 1.0)
        step /= 10.0
        b2, q2 = _backend.grid_search(probs, threshold, step, lo, hi)
        if q2 is not None and b2 < best:
            best, q = b2, q2
    return float(-np.log2(best))
