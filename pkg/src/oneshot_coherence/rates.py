"""Concentration rates for pure states, ensembles, assisted settings and n copies.

Ensemble smoothing separates: with a common cap ``1/M`` on every member's
dephased distribution, each member's best fidelity is an independent capped
waterfilling problem, and the ball constraint is the single weighted average
``sum_i w_i F_i(1/M)^2 >= 1 - eps``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .channels import (
    IncoherentChannel,
    certify_incoherent,
    concentrate,
    concentrate_ensemble,
)
from .entropies import d_a_closed_form, s_min, shannon_entropy
from .qstate import (
    DensityOperator,
    GroupedDistribution,
    PureEnsemble,
    PureState,
    RngLike,
    ValidationError,
    dephase,
    eigh_hermitian,
    ensemble_from_isometry,
    random_isometry,
)
from .smoothing import (
    EXACT_TOL,
    FEASIBILITY_SLACK,
    capped_fidelity_value,
    largest_feasible,
    smoothed_min_entropy_pure,
)

GIVENS_START = 0.3
GIVENS_STOP = 1e-3


@dataclass(eq=False)
class RateReport:
    epsilon: float
    M_achievable: int
    rate_lower_bits: float
    rate_upper_bits: float
    smoothed_value_bits: float
    witness: dict[str, Any] = field(default_factory=dict)
    metadata: dict[str, Any] = field(default_factory=dict)
    #: achieving channels, kept in memory only
    channels: list[IncoherentChannel] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict[str, Any]:
        return {
            "epsilon": self.epsilon,
            "M_achievable": self.M_achievable,
            "rate_lower_bits": self.rate_lower_bits,
            "rate_upper_bits": self.rate_upper_bits,
            "smoothed_value_bits": self.smoothed_value_bits,
            "witness": self.witness,
            "metadata": self.metadata,
        }


def _check_epsilon(epsilon: float) -> None:
    if not 0 <= epsilon < 0.5:
        raise ValidationError(f"epsilon {epsilon!r} outside [0, 0.5)", "epsilon", "0 <= eps < 0.5")


# ---------------------------------------------------------------------------
# Pure states
# ---------------------------------------------------------------------------


def pure_rate(psi: PureState, epsilon: float) -> RateReport:
    """Two-sided one-shot rate: log2 of the achievable M at eps, smoothed value at 2 eps above."""
    _check_epsilon(epsilon)
    p = dephase(psi)
    low = smoothed_min_entropy_pure(p, epsilon, psi.dim)
    high = smoothed_min_entropy_pure(p, 2 * epsilon, psi.dim)
    M, channel, fid_sq = concentrate(psi, epsilon)
    assert M == low.best_M
    witness = {
        "smoothing_target": [float(x) for x in low.witness.q_star.expand()],
        "witness_fidelity_sq": low.witness.fidelity_sq,
        "achieved_fidelity_sq": fid_sq,
        "channel": {"kraus_terms": len(channel.kraus), "certified": certify_incoherent(channel)},
    }
    return RateReport(
        epsilon=float(epsilon), M_achievable=M, rate_lower_bits=math.log2(M),
        rate_upper_bits=high.continuous_value, smoothed_value_bits=low.continuous_value,
        witness=witness, metadata={"dim": psi.dim}, channels=[channel])


# ---------------------------------------------------------------------------
# Ensembles
# ---------------------------------------------------------------------------


def _member_dists(ensemble: PureEnsemble) -> list[GroupedDistribution]:
    return [dephase(s) for s in ensemble.states]


def _ensemble_fid_sq(dists, weights, cap: float, dim) -> float:
    return float(sum(w * capped_fidelity_value(p, cap, dim) ** 2 for p, w in zip(dists, weights)))


def _ensemble_search(dists, weights, epsilon: float, dim: int,
                     continuous: bool = True) -> tuple[int, float]:
    """Largest integer and real ``m`` feasible for the weighted ball constraint."""
    if epsilon == 0:
        top = max(p.max_value for p in dists)
        M = max(1, min(dim, int(math.floor(1.0 / top + EXACT_TOL))))
        return M, 1.0 / top
    threshold = 1.0 - epsilon - FEASIBILITY_SLACK
    if not continuous:
        fid = lambda cap: _ensemble_fid_sq(dists, weights, cap, dim)  # noqa: E731
        if fid(1.0 / dim) >= threshold:
            return dim, float(dim)
        lo, hi = 1, dim
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if fid(1.0 / mid) >= threshold:
                lo = mid
            else:
                hi = mid
        return lo, float(lo)
    return largest_feasible(lambda cap: _ensemble_fid_sq(dists, weights, cap, dim), dim, threshold)


def ensemble_feasible(ensemble: PureEnsemble, M: int, epsilon: float) -> bool:
    """Whether a common target Phi_M is reachable within average squared-fidelity loss eps."""
    if not 1 <= M <= ensemble.dim:
        raise ValidationError(f"M={M} outside [1, {ensemble.dim}]", "M", "M <= dim")
    dists = _member_dists(ensemble)
    if epsilon == 0:
        return all(p.max_value <= 1.0 / M + EXACT_TOL for p in dists)
    val = _ensemble_fid_sq(dists, ensemble.weights, 1.0 / M, ensemble.dim)
    return val >= 1.0 - epsilon - FEASIBILITY_SLACK


def f_min_delta(ensemble: PureEnsemble) -> float:
    """Smallest member min-entropy of the dephased distributions."""
    return min(s_min(p) for p in _member_dists(ensemble))


def ensemble_rate(ensemble: PureEnsemble, epsilon: float, *, build_channels: bool = True) -> RateReport:
    _check_epsilon(epsilon)
    dists = _member_dists(ensemble)
    d = ensemble.dim
    M, m_cont = _ensemble_search(dists, ensemble.weights, epsilon, d)
    _, m_up = _ensemble_search(dists, ensemble.weights, 2 * epsilon, d)
    witness: dict[str, Any] = {
        "member_fidelity_sq": [capped_fidelity_value(p, 1.0 / M, d) ** 2 for p in dists],
    }
    witness["average_fidelity_sq"] = float(np.dot(ensemble.weights, witness["member_fidelity_sq"]))
    channels: list[IncoherentChannel] = []
    if build_channels:
        channels, achieved = concentrate_ensemble(ensemble, M)
        witness["achieved_fidelity_sq"] = achieved
        witness["channels_certified"] = all(certify_incoherent(c) for c in channels)
    return RateReport(
        epsilon=float(epsilon), M_achievable=M, rate_lower_bits=math.log2(M),
        rate_upper_bits=math.log2(m_up), smoothed_value_bits=math.log2(m_cont),
        witness=witness, metadata={"dim": d, "members": len(ensemble)}, channels=channels)


# ---------------------------------------------------------------------------
# Assisted concentration: search over decompositions
# ---------------------------------------------------------------------------


def _ensemble_objective(ensemble: PureEnsemble, epsilon: float) -> tuple[int, float]:
    M, m = _ensemble_search(_member_dists(ensemble), ensemble.weights, epsilon, ensemble.dim)
    return M, math.log2(m)


def _givens(V: np.ndarray, a: int, b: int, theta: float, phase: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    e = complex(math.cos(phase), math.sin(phase))
    out = V.copy()
    ra, rb = V[a], V[b]
    out[a] = c * ra - e * s * rb
    out[b] = e.conjugate() * s * ra + c * rb
    return out


def _hill_climb(V: np.ndarray, lam, vecs, epsilon: float) -> tuple[np.ndarray, float]:
    """Coordinate ascent over Givens rotations of the isometry rows."""
    m = V.shape[0]
    moves = [(a, b, ph) for a in range(m) for b in range(a + 1, m) for ph in (0.0, math.pi / 2)]
    best = _ensemble_objective(ensemble_from_isometry(lam, vecs, V), epsilon)[1]
    step = GIVENS_START
    while step >= GIVENS_STOP:
        improved = False
        for a, b, ph in moves:
            for sgn in (1.0, -1.0):
                W = _givens(V, a, b, sgn * step, ph)
                val = _ensemble_objective(ensemble_from_isometry(lam, vecs, W), epsilon)[1]
                if val > best + 1e-12:
                    V, best, improved = W, val, True
        if not improved:
            step /= 2
    return V, best


def _fourier_isometry(m: int, r: int) -> np.ndarray:
    k = np.arange(m)
    F = np.exp(2j * np.pi * np.outer(k, k) / m) / np.sqrt(m)
    return F[:, :r]


def assisted_rate(rho: DensityOperator, epsilon: float, members: int | None = None,
                  restarts: int = 16, seed: RngLike = 0, threads: int = 1) -> RateReport:
    """Best concentration rate found over pure-state decompositions of ``rho``.

    Candidates are the eigen-ensemble, the Fourier-phase ensemble and
    ``restarts`` Haar-random isometries, each refined by Givens-rotation hill
    climbing. The result is an achievable lower bound, not a certified optimum;
    the upper bound is that of the best-found ensemble only.
    """
    _check_epsilon(epsilon)
    if restarts < 1:
        raise ValidationError("restarts must be >= 1", "restarts", "R >= 1")
    w, U = eigh_hermitian(rho.matrix)
    keep = w > 1e-10
    lam = w[keep] / w[keep].sum()
    vecs = [U[:, i] for i in np.nonzero(keep)[0]]
    r = lam.size
    members = r if members is None else members
    if members < r:
        raise ValidationError(f"members={members} below rank {r}", "members", "m >= rank")

    seed_seq = np.random.SeedSequence(seed if not isinstance(seed, np.random.Generator)
                                      else int(seed.integers(2**63)))
    children = seed_seq.spawn(restarts)
    starts = [("eigen", np.eye(members, r, dtype=np.complex128)),
              ("fourier", _fourier_isometry(members, r))]
    starts += [(f"random[{k}]", random_isometry(members, r, np.random.default_rng(children[k])))
               for k in range(restarts)]

    def run(item):
        label, V0 = item
        V, _ = _hill_climb(V0, lam, vecs, epsilon)
        ens = ensemble_from_isometry(lam, vecs, V)
        return label, ens, _ensemble_objective(ens, epsilon)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, starts))
    else:
        results = [run(s) for s in starts]
    eigen_ens = ensemble_from_isometry(lam, vecs, starts[0][1])
    results.append(("eigen-unrefined", eigen_ens, _ensemble_objective(eigen_ens, epsilon)))

    label, best_ens, _ = max(results, key=lambda t: (t[2][0], t[2][1]))
    report = ensemble_rate(best_ens, epsilon)
    report.witness.update({
        "candidate": label,
        "ensemble": {
            "weights": [float(x) for x in best_ens.weights],
            "amplitudes": [[[float(z.real), float(z.imag)] for z in s.amplitudes]
                           for s in best_ens.states],
        },
        "upper_bound_scope": "ensemble-conditional",
        "label": "achievable",
    })
    report.metadata.update({"seed": seed if isinstance(seed, int) else None,
                            "restarts": restarts, "members": members, "rank": r})
    return report


# ---------------------------------------------------------------------------
# n-copy sweep
# ---------------------------------------------------------------------------


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for k in range(total + 1):
        for rest in _compositions(total - k, parts - 1):
            yield (k,) + rest


def _multinomial(counts) -> int:
    out, n = 1, 0
    for c in counts:
        n += c
        out *= math.comb(n, c)
    return out


def _power_groups(p: GroupedDistribution, c: int) -> tuple[np.ndarray, np.ndarray]:
    """Log-values and multiplicities of the c-fold product of ``p``, unmerged."""
    logv = np.log(p.values)
    mult = p.mults
    lv, mm = [], []
    for ks in _compositions(c, logv.size):
        k = np.array(ks)
        lv.append(float(np.dot(k, logv)))
        mm.append(float(_multinomial(ks)) * float(np.prod(mult ** k)))
    return np.array(lv), np.array(mm)


def _merge_log_groups(lv: np.ndarray, mm: np.ndarray, tol: float = 1e-12):
    order = np.argsort(-lv, kind="stable")
    lv, mm = lv[order], mm[order]
    out_l, out_m = [], []
    start = 0
    for i in range(1, lv.size + 1):
        if i == lv.size or lv[start] - lv[i] > tol:
            out_l.append(lv[start])
            out_m.append(mm[start:i].sum())
            start = i
    return np.array(out_l), np.array(out_m)


def product_distribution(factors: list[tuple[GroupedDistribution, int]]) -> GroupedDistribution:
    """Grouped product of ``p_k`` taken ``c_k`` times each, accumulated in log-space."""
    lv, mm = np.zeros(1), np.ones(1)
    for p, c in factors:
        if c == 0:
            continue
        pl, pm = _power_groups(p, c)
        pl, pm = _merge_log_groups(pl, pm)
        lv = (lv[:, None] + pl[None, :]).ravel()
        mm = (mm[:, None] * pm[None, :]).ravel()
        lv, mm = _merge_log_groups(lv, mm)
    values = np.exp(lv)
    # renormalize the rounding drift of exp/log
    values /= float(np.dot(values, mm))
    return GroupedDistribution(values, mm)


@dataclass(frozen=True)
class SweepRow:
    n: int
    rate_bits: float
    rate_per_copy: float
    target_avg_bits: float
    target_da_bits: float


class BudgetExceeded(RuntimeError):
    pass


def ncopy_types(ensemble: PureEnsemble, n: int, max_groups: int = 10**6):
    """Type classes of the n-fold product ensemble: ``(counts, weight, distribution)``."""
    dists = _member_dists(ensemble)
    L = len(dists)
    out = []
    total_groups = 0
    for counts in _compositions(n, L):
        weight = float(_multinomial(counts)) * float(np.prod(ensemble.weights ** np.array(counts)))
        if weight == 0.0:
            continue
        dist = product_distribution(list(zip(dists, counts)))
        total_groups += dist.values.size
        if total_groups > max_groups:
            raise BudgetExceeded(f"n={n}: more than {max_groups} groups")
        out.append((counts, weight, dist))
    return out


def ncopy_sweep(ensemble: PureEnsemble, epsilon: float, n_max: int,
                max_groups: int = 10**6, threads: int = 1) -> list[SweepRow]:
    """Per-copy achievable rate of the product ensemble for n = 1..n_max."""
    _check_epsilon(epsilon)
    target_avg = float(sum(w * shannon_entropy(dephase(s)) for w, s in ensemble))
    target_da = d_a_closed_form(ensemble.mixture())

    def one(n: int) -> SweepRow:
        types = ncopy_types(ensemble, n, max_groups)
        weights = np.array([t[1] for t in types])
        weights /= weights.sum()
        dists = [t[2] for t in types]
        dim = ensemble.dim ** n
        M, _ = _ensemble_search(dists, weights, epsilon, dim, continuous=False)
        rate = math.log2(M)
        return SweepRow(n, rate, rate / n, target_avg, target_da)

    ns = range(1, n_max + 1)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, ns))
    return [one(n) for n in ns]


__all__ = [
    "RateReport", "SweepRow", "BudgetExceeded", "pure_rate", "ensemble_feasible",
    "ensemble_rate", "f_min_delta", "assisted_rate", "ncopy_sweep", "ncopy_types",
    "product_distribution",
]
