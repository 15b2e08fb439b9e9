import math

import numpy as np
import pytest
from scipy.optimize import brentq, minimize

from oneshot_coherence.entropies import s_min
from oneshot_coherence.qstate import GroupedDistribution, ValidationError, dephase, random_pure_state
from oneshot_coherence.smoothing import (
    max_fidelity_capped,
    oracle_smoothed_min_entropy,
    smoothed_min_entropy_pure,
)

# 2-outcome boundary 0.1 + 0.8c + 0.6 sqrt(c(1-c)) = 0.95, solved by brentq
CONT_09_005 = 0.45554818


def _dist(*p):
    return GroupedDistribution.from_probabilities(p)


def _slsqp_capped(p, cap):
    """Independent solve of max sum sqrt(p q) s.t. q <= cap, sum q = 1."""
    p = np.asarray(p, dtype=float)
    d = p.size
    x0 = np.full(d, 1.0 / d)
    res = minimize(lambda q: -np.sum(np.sqrt(p * np.clip(q, 0, None))), x0, method="SLSQP",
                   bounds=[(0.0, cap)] * d,
                   constraints=[{"type": "eq", "fun": lambda q: q.sum() - 1.0}],
                   options={"ftol": 1e-14, "maxiter": 500})
    return -res.fun


class TestCappedFidelity:
    def test_uncapped(self):
        r = max_fidelity_capped(_dist(0.6, 0.4), 0.6)
        assert r.fidelity == pytest.approx(1.0, abs=1e-12)
        assert r.q_star.expand() == pytest.approx([0.6, 0.4])

    def test_two_outcome_example(self):
        r = max_fidelity_capped(_dist(0.9, 0.1), 0.5)
        assert r.fidelity_sq == pytest.approx(0.8, abs=1e-12)
        assert r.q_star.expand() == pytest.approx([0.5, 0.5])

    def test_three_outcome_example(self):
        r = max_fidelity_capped(_dist(0.5, 0.3, 0.2), 1 / 3)
        assert r.fidelity_sq == pytest.approx(0.96565005, abs=1e-8)
        assert r.t == pytest.approx(5 / 3)
        assert r.q_star.expand() == pytest.approx([1 / 3] * 3)

    @pytest.mark.filterwarnings("ignore:Values in x were outside bounds")
    def test_matches_slsqp(self, rng):
        for _ in range(40):
            d = int(rng.integers(2, 7))
            p = rng.dirichlet(np.ones(d))
            cap = rng.uniform(1.0 / d, 1.0)
            ours = max_fidelity_capped(_dist(*p), cap).fidelity
            assert ours == pytest.approx(_slsqp_capped(p, cap), abs=1e-6)
            assert ours >= _slsqp_capped(p, cap) - 1e-9

    def test_kkt_structure(self, rng):
        for _ in range(100):
            d = int(rng.integers(2, 8))
            p = _dist(*rng.dirichlet(np.ones(d)))
            cap = rng.uniform(1.0 / d, 1.0)
            r = max_fidelity_capped(p, cap)
            q = r.q_aligned
            assert np.all(q <= cap + 1e-12)
            free = q < cap - 1e-12
            assert np.allclose(q[free], r.t * p.values[free], atol=1e-10)
            direct = float(np.sum(p.mults * np.sqrt(p.values * q)))
            assert r.fidelity == pytest.approx(direct, abs=1e-12)
            assert float(np.dot(r.q_star.values, r.q_star.mults)) == pytest.approx(1.0, abs=1e-12)

    def test_monotone_in_cap(self, rng):
        p = _dist(*rng.dirichlet(np.ones(5)))
        caps = np.linspace(0.2, 1.0, 60)
        f = [max_fidelity_capped(p, c).fidelity for c in caps]
        assert all(a <= b + 1e-12 for a, b in zip(f, f[1:]))
        for c, v in zip(caps, f):
            assert (v >= 1 - 1e-12) == (c >= p.max_value - 1e-12)

    @pytest.mark.filterwarnings("ignore:Values in x were outside bounds")
    def test_padding(self):
        # the support holds only 2/3 under cap 1/3; the third outcome takes the rest
        r = max_fidelity_capped(_dist(0.9, 0.1), 1 / 3, dim=3)
        assert r.pad_mass == pytest.approx(1 / 3)
        assert r.fidelity == pytest.approx(_slsqp_capped([0.9, 0.1, 0.0], 1 / 3), abs=1e-6)
        assert r.fidelity == pytest.approx(math.sqrt(1 / 3) * (math.sqrt(0.9) + math.sqrt(0.1)))

    def test_infeasible_cap(self):
        with pytest.raises(ValueError):
            max_fidelity_capped(_dist(0.5, 0.5), 0.4)


class TestSmoothedMinEntropy:
    def test_uniform(self):
        for eps in (0.0, 0.01, 0.3):
            assert smoothed_min_entropy_pure(_dist(*[0.2] * 5), eps).best_M == 5

    def test_two_outcome_example(self):
        r = smoothed_min_entropy_pure(_dist(0.9, 0.1), 0.05)
        c = brentq(lambda c: 0.1 + 0.8 * c + 0.6 * math.sqrt(c * (1 - c)) - 0.95, 0.5, 0.9)
        assert r.best_M == 1
        assert r.continuous_value == pytest.approx(-math.log2(c), abs=1e-8)
        assert r.continuous_value == pytest.approx(CONT_09_005, abs=1e-8)

    def test_three_outcome_example(self):
        r = smoothed_min_entropy_pure(_dist(0.5, 0.3, 0.2), 0.05)
        assert r.best_M == 3
        assert r.witness.fidelity_sq >= 0.95

    def test_exact_at_zero(self, rng):
        for _ in range(100):
            p = dephase(random_pure_state(int(rng.integers(1, 9)), rng))
            r = smoothed_min_entropy_pure(p, 0.0)
            assert r.best_M == math.floor(1 / p.max_value)
            assert r.continuous_value == s_min(p)

    def test_invariants(self, rng):
        for _ in range(100):
            p = dephase(random_pure_state(int(rng.integers(2, 9)), rng))
            eps = float(rng.uniform(0, 0.5))
            r = smoothed_min_entropy_pure(p, eps)
            assert math.log2(r.best_M) <= r.continuous_value + 1e-9
            assert r.witness.fidelity_sq >= 1 - eps - 1e-9
            assert r.witness.cap == pytest.approx(1 / r.best_M)

    def test_monotone_in_epsilon(self, rng):
        for _ in range(30):
            p = dephase(random_pure_state(int(rng.integers(2, 9)), rng))
            Ms = [smoothed_min_entropy_pure(p, e).best_M for e in np.linspace(0, 0.6, 25)]
            assert all(a <= b for a, b in zip(Ms, Ms[1:]))

    def test_gauge_invariance(self, rng):
        for _ in range(30):
            psi = random_pure_state(6, rng)
            probs = psi.probabilities()
            phases = np.exp(1j * rng.uniform(0, 2 * np.pi, 6))
            perm = rng.permutation(6)
            other = (psi.amplitudes * phases)[perm]
            a = smoothed_min_entropy_pure(dephase(psi), 0.07)
            b = smoothed_min_entropy_pure(_dist(*np.abs(other) ** 2), 0.07)
            assert a.best_M == b.best_M
            assert a.continuous_value == b.continuous_value
            assert np.allclose(np.sort(probs), np.sort(np.abs(other) ** 2))


class TestOracle:
    def test_zero_epsilon(self):
        p = _dist(0.5, 0.3, 0.2)
        assert oracle_smoothed_min_entropy(p, 0.0) == pytest.approx(1.0, abs=3e-3)

    def test_two_outcome_example(self):
        assert oracle_smoothed_min_entropy(_dist(0.9, 0.1), 0.05) == pytest.approx(0.455, abs=3e-3)

    def test_upper_bound(self, rng):
        for _ in range(10):
            d = int(rng.integers(2, 4))
            p = dephase(random_pure_state(d, rng))
            assert oracle_smoothed_min_entropy(p, 0.2) <= math.log2(d) + 1e-12

    def test_plain_grid_within_spec_tolerance(self, rng):
        # the plain grid only guarantees 2 * step * d
        for _ in range(15):
            d = int(rng.integers(2, 4))
            p = dephase(random_pure_state(d, rng))
            for eps in (0.01, 0.05, 0.1):
                solver = smoothed_min_entropy_pure(p, eps).continuous_value
                oracle = oracle_smoothed_min_entropy(p, eps)
                assert oracle <= solver + 1e-9
                assert abs(solver - oracle) <= 2 * 1e-3 * d

    def test_refined_grid_agrees(self, rng):
        for _ in range(15):
            p = dephase(random_pure_state(int(rng.integers(2, 4)), rng))
            for eps in (0.01, 0.05, 0.1):
                solver = smoothed_min_entropy_pure(p, eps).continuous_value
                oracle = oracle_smoothed_min_entropy(p, eps, refine=2)
                assert oracle <= solver + 1e-9
                assert abs(solver - oracle) <= 2e-4

    def test_padding_covered(self):
        # support 2 inside 3 outcomes: padding can only help
        p = _dist(0.6, 0.4)
        for eps in (0.05, 0.2):
            solver = smoothed_min_entropy_pure(p, eps, dim=3).continuous_value
            oracle = oracle_smoothed_min_entropy(p, eps, dim=3, refine=2)
            assert solver == pytest.approx(oracle, abs=2e-4)
            assert solver >= smoothed_min_entropy_pure(p, eps).continuous_value - 1e-12

    def test_rejects_large_support(self):
        with pytest.raises(ValidationError):
            oracle_smoothed_min_entropy(_dist(0.25, 0.25, 0.25, 0.25), 0.1)
        with pytest.raises(ValueError):
            oracle_smoothed_min_entropy(_dist(0.5, 0.5), 0.1, grid_step=0.05)
