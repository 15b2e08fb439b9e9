import itertools
import math
from functools import reduce

import numpy as np
import pytest

from oneshot_coherence.channels import certify_incoherent
from oneshot_coherence.qstate import (
    DensityOperator,
    PureEnsemble,
    PureState,
    ValidationError,
    maximally_coherent,
    random_density,
    random_pure_state,
)
from oneshot_coherence.rates import (
    BudgetExceeded,
    assisted_rate,
    ensemble_feasible,
    ensemble_rate,
    f_min_delta,
    ncopy_sweep,
    ncopy_types,
    pure_rate,
)

S09, S01 = math.sqrt(0.9), math.sqrt(0.1)
MIRROR = PureEnsemble.from_pairs([(0.5, [S09, S01]), (0.5, [S01, S09])])
PSI3 = PureState(np.sqrt([0.5, 0.3, 0.2]))


def _random_ensemble(rng, d, n_members=None):
    n = n_members or int(rng.integers(1, 5))
    w = rng.dirichlet(np.ones(n))
    return PureEnsemble.from_pairs([(float(x), random_pure_state(d, rng)) for x in w])


class TestPureRate:
    def test_maximally_coherent(self):
        for d in (2, 3, 5):
            for eps in (0.0, 0.1):
                r = pure_rate(maximally_coherent(d), eps)
                assert r.rate_lower_bits == pytest.approx(math.log2(d))
                assert r.rate_upper_bits == pytest.approx(math.log2(d))

    def test_exact_case(self):
        r = pure_rate(PSI3, 0.0)
        assert r.M_achievable == 2
        assert r.rate_lower_bits == 1.0

    def test_smoothed_case(self):
        r = pure_rate(PSI3, 0.05)
        assert r.M_achievable == 3
        assert r.rate_lower_bits == pytest.approx(1.5849625007, abs=1e-9)
        assert r.rate_upper_bits >= r.rate_lower_bits - 1e-12
        assert r.witness["achieved_fidelity_sq"] >= 0.95

    def test_ordering_and_achievability(self, rng):
        for _ in range(100):
            psi = random_pure_state(int(rng.integers(2, 9)), rng)
            eps = float(rng.uniform(0, 0.45))
            r = pure_rate(psi, eps)
            assert r.M_achievable >= 1
            assert r.rate_lower_bits <= r.rate_upper_bits + 1e-9
            assert r.witness["achieved_fidelity_sq"] >= 1 - eps - 1e-9
            assert all(certify_incoherent(c) for c in r.channels)

    def test_monotone_in_epsilon(self, rng):
        psi = random_pure_state(6, rng)
        Ms = [pure_rate(psi, e).M_achievable for e in np.linspace(0, 0.45, 20)]
        assert all(a <= b for a, b in zip(Ms, Ms[1:]))

    def test_epsilon_range(self):
        with pytest.raises(ValidationError):
            pure_rate(PSI3, 0.5)
        with pytest.raises(ValidationError):
            pure_rate(PSI3, -0.1)


class TestEnsembleFeasible:
    def test_flat_members(self):
        ens = PureEnsemble.from_pairs([(0.3, maximally_coherent(2, 3)),
                                       (0.7, PureState([0, 1 / math.sqrt(2), 1j / math.sqrt(2)]))])
        assert ensemble_feasible(ens, 2, 0.0)

    def test_boundary(self):
        assert ensemble_feasible(MIRROR, 2, 0.2)
        assert not ensemble_feasible(MIRROR, 2, 0.1)


class TestEnsembleRate:
    def test_examples(self):
        r = ensemble_rate(MIRROR, 0.2)
        assert r.M_achievable == 2 and r.rate_lower_bits == 1.0
        r0 = ensemble_rate(MIRROR, 0.0)
        assert r0.M_achievable == 1 and r0.rate_lower_bits == 0.0

    def test_single_member_matches_pure(self, rng):
        for _ in range(30):
            psi = random_pure_state(int(rng.integers(2, 7)), rng)
            eps = float(rng.uniform(0, 0.4))
            a = ensemble_rate(PureEnsemble.from_pairs([(1.0, psi)]), eps)
            b = pure_rate(psi, eps)
            assert a.M_achievable == b.M_achievable
            assert a.smoothed_value_bits == pytest.approx(b.smoothed_value_bits, abs=1e-9)
            assert a.rate_upper_bits == pytest.approx(b.rate_upper_bits, abs=1e-9)

    def test_dominance_and_monotonicity(self, rng):
        for _ in range(100):
            d = int(rng.integers(2, 6))
            ens = _random_ensemble(rng, d)
            eps = float(rng.uniform(0, 0.4))
            r = ensemble_rate(ens, eps, build_channels=False)
            assert r.M_achievable >= min(pure_rate(s, eps).M_achievable for s in ens.states)
            assert r.rate_lower_bits <= r.rate_upper_bits + 1e-9
            r2 = ensemble_rate(ens, min(0.49, eps + 0.05), build_channels=False)
            assert r2.M_achievable >= r.M_achievable

    def test_constructive(self, rng):
        for _ in range(50):
            ens = _random_ensemble(rng, int(rng.integers(2, 6)))
            eps = float(rng.uniform(0, 0.3))
            r = ensemble_rate(ens, eps)
            assert r.witness["achieved_fidelity_sq"] >= 1 - eps - 1e-9
            assert r.witness["channels_certified"]
            assert len(r.channels) == len(ens)

    def test_gauge_and_permutation(self, rng):
        ens = _random_ensemble(rng, 5, 3)
        perm = rng.permutation(5)
        D = np.exp(1j * rng.uniform(0, 2 * np.pi, 5))
        moved = PureEnsemble(ens.weights, tuple(PureState((s.amplitudes * D)[perm]) for s in ens.states))
        a = ensemble_rate(ens, 0.1, build_channels=False)
        b = ensemble_rate(moved, 0.1, build_channels=False)
        assert a.M_achievable == b.M_achievable
        assert a.smoothed_value_bits == pytest.approx(b.smoothed_value_bits, abs=1e-12)


class TestFMinDelta:
    def test_examples(self):
        phi = maximally_coherent(4)
        assert f_min_delta(PureEnsemble.from_pairs([(0.5, phi), (0.5, phi)])) == pytest.approx(2.0)
        assert f_min_delta(MIRROR) == pytest.approx(0.15200, abs=1e-5)
        ens = PureEnsemble.from_pairs([(0.5, [1, 0]), (0.5, [S09, S01])])
        assert f_min_delta(ens) == 0.0


class TestAssisted:
    def test_pure_rho(self):
        r = assisted_rate(PSI3.density(), 0.05, restarts=2)
        assert r.M_achievable == pure_rate(PSI3, 0.05).M_achievable

    def test_maximally_mixed_qubit(self):
        r = assisted_rate(DensityOperator(np.eye(2) / 2), 0.0, members=2, restarts=16)
        assert r.M_achievable == 2
        assert r.rate_lower_bits == 1.0
        assert r.witness["label"] == "achievable"
        assert r.witness["upper_bound_scope"] == "ensemble-conditional"

    def test_dominates_eigen_ensemble(self, rng):
        for _ in range(5):
            rho = random_density(int(rng.integers(2, 4)), rng=rng)
            w, U = np.linalg.eigh(rho.matrix)
            eigen = PureEnsemble.from_pairs([(float(x), U[:, i]) for i, x in enumerate(w) if x > 1e-10])
            r = assisted_rate(rho, 0.05, restarts=2, seed=int(rng.integers(1000)))
            base = ensemble_rate(eigen, 0.05, build_channels=False)
            assert r.M_achievable >= base.M_achievable
            assert r.smoothed_value_bits >= base.smoothed_value_bits - 1e-9

    def test_deterministic_and_thread_invariant(self):
        rho = random_density(3, rng=21)
        a = assisted_rate(rho, 0.1, restarts=4, seed=5)
        b = assisted_rate(rho, 0.1, restarts=4, seed=5, threads=3)
        assert a.to_dict() == b.to_dict()

    def test_members_below_rank(self):
        with pytest.raises(ValidationError):
            assisted_rate(random_density(3, rng=1), 0.1, members=2)


def _brute_product_M(ens, n, eps):
    """Materialize every n-sequence of members as an explicit product state."""
    pairs = []
    for seq in itertools.product(range(len(ens)), repeat=n):
        w = float(np.prod([ens.weights[i] for i in seq]))
        amps = reduce(np.kron, [ens.states[i].amplitudes for i in seq])
        pairs.append((w, PureState.from_vector(amps)))
    return ensemble_rate(PureEnsemble.from_pairs(pairs), eps, build_channels=False).M_achievable


class TestSweep:
    def test_flat_product(self):
        rows = ncopy_sweep(PureEnsemble.from_pairs([(1.0, maximally_coherent(2))]), 0.1, 6)
        assert [r.rate_per_copy for r in rows] == pytest.approx([1.0] * 6)

    def test_first_row_matches_ensemble_rate(self, rng):
        for ens, eps in ((MIRROR, 0.05), (_random_ensemble(rng, 3), 0.1)):
            row = ncopy_sweep(ens, eps, 1)[0]
            assert row.rate_bits == ensemble_rate(ens, eps, build_channels=False).rate_lower_bits

    def test_matches_explicit_products(self, rng):
        cases = [(MIRROR, 0.05, 4), (_random_ensemble(rng, 2, 2), 0.1, 3),
                 (_random_ensemble(rng, 3, 2), 0.08, 2)]
        for ens, eps, n_max in cases:
            rows = ncopy_sweep(ens, eps, n_max)
            for r in rows:
                assert 2 ** r.rate_bits == pytest.approx(_brute_product_M(ens, r.n, eps))

    def test_mirror_values(self):
        rows = ncopy_sweep(MIRROR, 0.05, 30)
        assert rows[0].rate_per_copy == 0.0
        assert rows[0].target_avg_bits == pytest.approx(0.4689955936, abs=1e-9)
        assert rows[0].target_da_bits == pytest.approx(1.0)
        # M = 539 at n = 30: every type shares the binomial multiset 0.9^a 0.1^(n-a) x C(n,a);
        # an independent bisection on that multiset gives F^2 = 0.950004 at 539, 0.949924 at 540
        assert rows[-1].rate_bits == pytest.approx(math.log2(539), abs=1e-12)

    def test_types_weights_sum_to_one(self, rng):
        ens = _random_ensemble(rng, 3, 3)
        types = ncopy_types(ens, 5)
        assert sum(t[1] for t in types) == pytest.approx(1.0)
        assert all(sum(t[0]) == 5 for t in types)

    def test_threads_do_not_change_results(self):
        assert ncopy_sweep(MIRROR, 0.05, 8) == ncopy_sweep(MIRROR, 0.05, 8, threads=4)

    def test_budget(self, rng):
        with pytest.raises(BudgetExceeded):
            ncopy_sweep(_random_ensemble(rng, 4, 3), 0.05, 12, max_groups=1000)
