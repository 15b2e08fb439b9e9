"""Entropic quantities in bits.

Divergences that can be unbounded return :data:`UNBOUNDED` rather than a
float infinity so reports serialize without special float values.
"""
from __future__ import annotations

import numpy as np

from .qstate import (
    DensityOperator,
    GroupedDistribution,
    PureEnsemble,
    PureState,
    ValidationError,
    _matrix,
    dephase,
    eigh_hermitian,
    psd_power,
    psd_sqrt,
    support_projector,
)

SUPPORT_TOL = 1e-10


class _Unbounded:
    """Sentinel for a divergence that is +infinity."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNBOUNDED"

    def __float__(self):
        return float("inf")

    def to_json(self):
        return "unbounded"


UNBOUNDED = _Unbounded()


def _shannon(p: np.ndarray, mults: np.ndarray | None = None) -> float:
    p = np.asarray(p, dtype=np.float64)
    m = np.ones_like(p) if mults is None else np.asarray(mults, dtype=np.float64)
    keep = p > 0
    return float(-np.sum(m[keep] * p[keep] * np.log2(p[keep])))


def shannon_entropy(p: GroupedDistribution) -> float:
    return max(0.0, _shannon(p.values, p.mults))


def von_neumann(rho) -> float:
    if isinstance(rho, PureState):
        return 0.0
    w = np.clip(eigh_hermitian(_matrix(rho))[0], 0.0, None)
    return max(0.0, _shannon(w[w > 1e-15]))


def s_min(p: GroupedDistribution) -> float:
    """Min-entropy ``-log2(max p)``."""
    return float(-np.log2(p.max_value))


def renyi_relative(alpha: float, rho, sigma, P=None) -> float:
    """``1/(alpha-1) log2 Tr[sqrt(P) rho^alpha sqrt(P) sigma^(1-alpha)]``.

    For ``alpha > 1`` the support of ``rho`` must lie inside the support of
    ``sigma``; negative powers of ``sigma`` act on its support only.
    """
    if alpha <= 0 or alpha == 1:
        raise ValueError(f"alpha must be in (0, inf) minus {{1}}, got {alpha}")
    r, s = _matrix(rho), _matrix(sigma)
    if r.shape != s.shape:
        raise ValidationError("dimension mismatch", "sigma", "equal dims")
    if alpha > 1:
        pi_s = support_projector(s, SUPPORT_TOL)
        pi_r = support_projector(r, SUPPORT_TOL)
        leak = np.linalg.norm(pi_r - pi_s @ pi_r @ pi_s)
        if leak > 1e-8:
            raise ValidationError(
                f"support of rho not contained in support of sigma (leak {leak:.2e}) "
                f"with alpha={alpha} > 1", "sigma", "supp(rho) within supp(sigma)")
    r_a = psd_power(r, alpha, support_tol=SUPPORT_TOL)
    s_b = psd_power(s, 1.0 - alpha, support_tol=SUPPORT_TOL)
    if P is not None:
        sp = psd_sqrt(_matrix(P))
        r_a = sp @ r_a @ sp
    tr = float(np.trace(r_a @ s_b).real)
    if tr <= 0:
        if alpha < 1:
            return UNBOUNDED
        raise ValidationError("trace vanished", "sigma", "overlap")
    return float(np.log2(tr) / (alpha - 1.0))


def s0_relative(rho, sigma):
    """Order-0 relative Renyi entropy ``-log2 Tr(Pi_rho sigma)``."""
    proj = support_projector(_matrix(rho), SUPPORT_TOL)
    tr = float(np.trace(proj @ _matrix(sigma)).real)
    if tr <= 1e-15:
        return UNBOUNDED
    return float(-np.log2(min(tr, 1.0)))


def c_min(rho) -> float:
    """Min-entropy of coherence.

    ``Tr(Pi sigma)`` is linear in the diagonal of an incoherent ``sigma``, so
    its maximum over the simplex of diagonal states sits at a vertex: the
    basis point mass on the largest diagonal entry of the support projector.
    """
    if isinstance(rho, PureState):
        return s_min(dephase(rho))
    proj = support_projector(_matrix(rho), SUPPORT_TOL)
    return float(-np.log2(np.max(np.diagonal(proj).real)))


def c_r(rho) -> float:
    """Relative entropy of coherence ``S(Delta rho) - S(rho)``."""
    return shannon_entropy(dephase(rho)) - von_neumann(rho)


def d_a_closed_form(rho) -> float:
    """Asymptotic coherence of assistance, ``S(Delta rho)``."""
    return shannon_entropy(dephase(rho))


def qc_state(ensemble: PureEnsemble) -> DensityOperator:
    """Quantum-classical state ``sum_i p_i psi_i (x) |i><i|`` on B (x) Z."""
    m = len(ensemble)
    d = ensemble.dim
    out = np.zeros((d * m, d * m), dtype=np.complex128)
    for i, (w, psi) in enumerate(ensemble):
        flag = np.zeros((m, m))
        flag[i, i] = 1.0
        out += w * np.kron(psi.projector(), flag)
    return DensityOperator(0.5 * (out + out.conj().T))
