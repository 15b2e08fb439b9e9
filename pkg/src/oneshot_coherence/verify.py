"""Randomized property suites behind ``oneshot-coherence verify``.

Each suite draws ``trials`` instances at dimensions up to ``dim`` from a
seeded generator and counts violations of its inequalities.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import (
    BinAssignment,
    birkhoff_decompose,
    certify_incoherent,
    concentrate,
    ribbon_partition,
)
from .qstate import (
    PureEnsemble,
    dephase,
    gentle_measurement_gap,
    operator_difference_bounds,
    random_density,
    random_effect,
    random_hermitian,
    random_pure_state,
)
from .rates import ensemble_rate, pure_rate
from .smoothing import oracle_smoothed_min_entropy, smoothed_min_entropy_pure

SLACK = 1e-9
ORACLE_TOL = 2e-3
ORACLE_EPSILONS = (0.01, 0.05, 0.1)


@dataclass
class SuiteResult:
    suite: str
    trials: int
    checks: int = 0
    violations: int = 0
    worst: float | None = None
    failures: list = field(default_factory=list)

    def record(self, margin: float, info) -> None:
        """``margin`` is how far the inequality is violated; <= 0 means it holds."""
        self.checks += 1
        self.worst = float(margin) if self.worst is None else max(self.worst, float(margin))
        if margin > 0:
            self.violations += 1
            if len(self.failures) < 10:
                self.failures.append(info)

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        return {"suite": self.suite, "trials": self.trials, "checks": self.checks,
                "violations": self.violations, "worst_margin": self.worst,
                "failures": self.failures, "ok": self.ok}


def _dims(rng, trials: int, lo: int, hi: int) -> np.ndarray:
    return rng.integers(lo, max(lo, hi) + 1, size=trials)


def lemmas(trials: int, dim: int, rng) -> SuiteResult:
    """Trace-norm ordering of the positive part and the gentle measurement bound."""
    res = SuiteResult("lemmas", trials)
    for k, d in enumerate(_dims(rng, trials, 1, dim)):
        d = int(d)
        A, B, P = random_hermitian(d, rng), random_hermitian(d, rng), random_effect(d, rng)
        proj, pos, tn = operator_difference_bounds(A, B, P)
        res.record(proj - pos - SLACK, {"check": "projection", "trial": k, "dim": d})
        res.record(pos - tn - SLACK, {"check": "positive_part", "trial": k, "dim": d})
    for k, d in enumerate(_dims(rng, trials, 1, dim)):
        d = int(d)
        rho = random_density(d, int(rng.integers(1, d + 1)), rng)
        dist, bound = gentle_measurement_gap(rho.matrix, random_effect(d, rng))
        res.record(dist - bound - SLACK, {"check": "gentle", "trial": k, "dim": d})
    return res


def smoothing_oracle(trials: int, dim: int, rng) -> SuiteResult:
    """Waterfilling solver against an exhaustive simplex grid (support <= 3)."""
    res = SuiteResult("smoothing-oracle", trials)
    for k, d in enumerate(_dims(rng, trials, 2, min(dim, 3))):
        p = dephase(random_pure_state(int(d), rng))
        for eps in ORACLE_EPSILONS:
            solver = smoothed_min_entropy_pure(p, eps).continuous_value
            oracle = oracle_smoothed_min_entropy(p, eps, grid_step=1e-3, refine=2)
            res.record(abs(solver - oracle) - ORACLE_TOL,
                       {"trial": k, "epsilon": eps, "solver": solver, "oracle": oracle})
    return res


def channels(trials: int, dim: int, rng) -> SuiteResult:
    """Constructed channels certify, reach their target, and Birkhoff reconstructs."""
    res = SuiteResult("channels", trials)
    for k, d in enumerate(_dims(rng, trials, 2, dim)):
        psi = random_pure_state(int(d), rng)
        eps = float(rng.choice([0.0, 0.01, 0.05, 0.1, 0.2]))
        M, ch, fid_sq = concentrate(psi, eps)
        res.record(0.0 if certify_incoherent(ch) else 1.0, {"check": "certify", "trial": k})
        res.record((1 - eps - SLACK) - fid_sq, {"check": "fidelity", "trial": k, "M": M})
        p = psi.probabilities()
        M2 = int(rng.integers(1, int(np.floor(1.0 / p.max() + 1e-12)) + 1))
        W = ribbon_partition(p, M2).W
        R = np.zeros_like(W)
        for lam, mapping in birkhoff_decompose(BinAssignment(W)):
            R[list(mapping), np.arange(M2)] += lam
        res.record(float(np.max(np.abs(R - W))) - SLACK, {"check": "birkhoff", "trial": k})
    return res


def rates(trials: int, dim: int, rng) -> SuiteResult:
    """Rate ordering, ensemble dominance and monotonicity in epsilon."""
    res = SuiteResult("rates", trials)
    for k, d in enumerate(_dims(rng, trials, 2, dim)):
        d = int(d)
        psi = random_pure_state(d, rng)
        eps = float(rng.uniform(0.0, 0.2))
        rep = pure_rate(psi, eps)
        res.record(rep.rate_lower_bits - rep.rate_upper_bits - SLACK, {"check": "order", "trial": k})
        n_mem = int(rng.integers(1, 4))
        w = rng.dirichlet(np.ones(n_mem))
        ens = PureEnsemble.from_pairs([(float(x), random_pure_state(d, rng)) for x in w])
        er = ensemble_rate(ens, eps, build_channels=False)
        floor = min(pure_rate(s, eps).M_achievable for s in ens.states)
        res.record(float(floor - er.M_achievable), {"check": "dominance", "trial": k})
        er2 = ensemble_rate(ens, min(0.49, eps + 0.05), build_channels=False)
        res.record(float(er.M_achievable - er2.M_achievable), {"check": "monotone", "trial": k})
        res.record(er.rate_lower_bits - er.rate_upper_bits - SLACK, {"check": "ens-order", "trial": k})
    return res


SUITES = {
    "lemmas": lemmas,
    "smoothing-oracle": smoothing_oracle,
    "channels": channels,
    "rates": rates,
}


def run_suite(name: str, trials: int, dim: int, seed: int) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(name)
    return SUITES[name](int(trials), int(dim), np.random.default_rng(seed))
