"""Small dense quantum states in a fixed incoherent basis.

Every matrix function here goes through one Hermitian eigendecomposition
(:func:`eigh_hermitian`), which symmetrizes its input first.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

HERMITIAN_TOL = 1e-9
TRACE_TOL = 1e-9
PSD_TOL = 1e-9
NORM_TOL = 1e-12
GROUP_TOL = 1e-12
ZERO_PROB = 1e-15

RngLike = Union[None, int, np.random.Generator]


class ValidationError(ValueError):
    """An input violates a type invariant.

    ``field`` names the offending value and ``invariant`` the rule it broke;
    the CLI serializes both into its error object.
    """

    def __init__(self, message: str, field: str = "", invariant: str = ""):
        super().__init__(message)
        self.field = field
        self.invariant = invariant


def as_rng(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized amplitude vector in the incoherent basis."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128).ravel()
        if amps.size == 0:
            raise ValidationError("empty state", "amplitudes", "dim >= 1")
        if not np.all(np.isfinite(amps)):
            raise ValidationError("non-finite amplitude", "amplitudes", "finite entries")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise ValidationError(
                f"squared norm {norm2!r} differs from 1", "amplitudes", "normalized")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @classmethod
    def from_vector(cls, vec: Sequence[complex]) -> "PureState":
        """Build a state from an unnormalized vector."""
        v = np.asarray(vec, dtype=np.complex128).ravel()
        n = np.linalg.norm(v)
        if n == 0:
            raise ValidationError("zero vector", "amplitudes", "nonzero")
        return cls(v / n)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def density(self) -> "DensityOperator":
        return DensityOperator(self.projector())


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Hermitian, unit-trace, positive semidefinite matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise ValidationError(f"shape {m.shape} is not square", "matrix", "square")
        if not np.all(np.isfinite(m)):
            raise ValidationError("non-finite entry", "matrix", "finite entries")
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
            raise ValidationError("matrix is not Hermitian", "matrix", "hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValidationError(f"trace {tr!r} differs from 1", "matrix", "unit trace")
        w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
        if w[0] < -PSD_TOL:
            raise ValidationError(
                f"negative eigenvalue {w[0]!r}", "matrix", "positive semidefinite")
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def diagonal(self) -> np.ndarray:
        return np.clip(np.diagonal(self.matrix).real, 0.0, None)

    def spectrum(self) -> np.ndarray:
        return np.clip(eigh_hermitian(self.matrix)[0], 0.0, None)


@dataclass(frozen=True, eq=False)
class GroupedDistribution:
    """Probability distribution stored as (value, multiplicity) groups.

    Values are strictly positive and sorted descending. Multiplicities are
    kept as floats so n-copy product distributions with huge binomial counts
    fit in the same array type; for ordinary states they are exact integers.
    """

    values: np.ndarray
    mults: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64).ravel()
        m = np.asarray(self.mults, dtype=np.float64).ravel()
        if v.size != m.size or v.size == 0:
            raise ValidationError("values/mults length mismatch", "groups", "nonempty")
        if np.any(v <= 0) or np.any(m < 1):
            raise ValidationError(
                "values must be positive, multiplicities >= 1", "groups", "positive")
        if np.any(np.diff(v) > 0):
            raise ValidationError("values not sorted descending", "groups", "sorted")
        total = float(np.dot(v, m))
        if abs(total - 1.0) > TRACE_TOL:
            raise ValidationError(f"total mass {total!r} differs from 1", "groups", "normalized")
        object.__setattr__(self, "values", _frozen(v))
        object.__setattr__(self, "mults", _frozen(m))

    @classmethod
    def from_probabilities(cls, probs: Sequence[float]) -> "GroupedDistribution":
        """Group a probability vector: drop zeros, merge values within 1e-12."""
        p = np.asarray(probs, dtype=np.float64).ravel()
        return cls.from_groups(p, np.ones_like(p))

    @classmethod
    def from_groups(cls, values, mults, tol: float = GROUP_TOL) -> "GroupedDistribution":
        """Canonicalize possibly unsorted, possibly repeated groups."""
        v = np.asarray(values, dtype=np.float64).ravel()
        m = np.asarray(mults, dtype=np.float64).ravel()
        keep = (v >= ZERO_PROB) & (m > 0)
        # rounding can push a point mass a few ulps above 1
        v, m = np.minimum(v[keep], 1.0), m[keep]
        order = np.argsort(-v, kind="stable")
        v, m = v[order], m[order]
        out_v, out_m = [], []
        start = 0
        for i in range(1, v.size + 1):
            if i == v.size or v[start] - v[i] > tol:
                w = m[start:i]
                out_v.append(float(np.dot(v[start:i], w) / w.sum()))
                out_m.append(float(w.sum()))
                start = i
        return cls(np.array(out_v), np.array(out_m))

    @property
    def support_size(self) -> int:
        return int(round(self.mults.sum()))

    @property
    def max_value(self) -> float:
        return float(self.values[0])

    @property
    def groups(self) -> list[tuple[float, int]]:
        return [(float(v), int(m)) for v, m in zip(self.values, self.mults)]

    def expand(self) -> np.ndarray:
        """Per-outcome probabilities, descending (support only)."""
        return np.repeat(self.values, self.mults.astype(np.int64))


@dataclass(frozen=True, eq=False)
class PureEnsemble:
    """Weighted pure states of a common dimension."""

    weights: np.ndarray
    states: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64).ravel()
        states = tuple(self.states)
        if w.size != len(states) or w.size == 0:
            raise ValidationError("weights/states length mismatch", "members", "nonempty")
        if np.any(w <= 0) or np.any(w > 1 + TRACE_TOL):
            raise ValidationError("weights must lie in (0, 1]", "weight", "in (0,1]")
        if abs(w.sum() - 1.0) > TRACE_TOL:
            raise ValidationError(f"weights sum to {w.sum()!r}", "weight", "sum to 1")
        dims = {s.dim for s in states}
        if len(dims) != 1:
            raise ValidationError("members have different dimensions", "amplitudes", "common dim")
        object.__setattr__(self, "weights", _frozen(w))
        object.__setattr__(self, "states", states)

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[float, Sequence[complex]]]) -> "PureEnsemble":
        w = [float(a) for a, _ in pairs]
        s = [x if isinstance(x, PureState) else PureState(x) for _, x in pairs]
        return cls(np.array(w), tuple(s))

    @property
    def dim(self) -> int:
        return self.states[0].dim

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self):
        return iter(zip(self.weights, self.states))

    def mixture(self) -> DensityOperator:
        rho = sum(w * s.projector() for w, s in self)
        return DensityOperator(0.5 * (rho + rho.conj().T))


# ---------------------------------------------------------------------------
# Linear algebra kernel
# ---------------------------------------------------------------------------


def _matrix(a) -> np.ndarray:
    if isinstance(a, DensityOperator):
        return a.matrix
    if isinstance(a, PureState):
        return a.projector()
    return np.asarray(a, dtype=np.complex128)


def _check_hermitian(a: np.ndarray, name: str = "A") -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"{name} is not square", name, "square")
    if np.max(np.abs(a - a.conj().T), initial=0.0) > HERMITIAN_TOL:
        raise ValidationError(f"{name} is not Hermitian", name, "hermitian")


def eigh_hermitian(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of the Hermitian part ``(A + A^dagger)/2``."""
    a = _matrix(a)
    return np.linalg.eigh(0.5 * (a + a.conj().T))


def psd_power(a, power: float, *, support_tol: float = 0.0) -> np.ndarray:
    """``A**power`` for PSD ``A``.

    Eigenvalues in ``[-1e-9, 0)`` are clipped to zero; anything more negative
    raises. Eigenvalues at or below ``support_tol`` are treated as outside the
    support and map to zero, which also defines negative powers as
    pseudo-inverse powers.
    """
    w, u = eigh_hermitian(a)
    if w.size and w[0] < -PSD_TOL:
        raise ValidationError(f"negative eigenvalue {w[0]!r}", "matrix", "positive semidefinite")
    w = np.clip(w, 0.0, None)
    on = w > support_tol
    f = np.zeros_like(w)
    f[on] = w[on] ** power
    return (u * f) @ u.conj().T


def psd_sqrt(a) -> np.ndarray:
    return psd_power(a, 0.5)


def support_projector(a, tol: float = 1e-10) -> np.ndarray:
    w, u = eigh_hermitian(a)
    v = u[:, w > tol]
    return v @ v.conj().T


def trace_norm(a) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    a = _matrix(a)
    _check_hermitian(a)
    return float(np.abs(eigh_hermitian(a)[0]).sum())


def positive_part_trace(a) -> float:
    """``Tr (A)_+``: sum of the positive eigenvalues."""
    a = _matrix(a)
    _check_hermitian(a)
    w = eigh_hermitian(a)[0]
    return float(w[w > 0].sum())


def dephase(state) -> GroupedDistribution:
    """Diagonal of a state in the incoherent basis, grouped."""
    if isinstance(state, PureState):
        return GroupedDistribution.from_probabilities(state.probabilities())
    m = _matrix(state)
    return GroupedDistribution.from_probabilities(np.diagonal(m).real)


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity ``Tr sqrt(sqrt(sigma) rho sqrt(sigma))`` (not squared).

    Accepts :class:`PureState` or :class:`DensityOperator` for either
    argument; pure inputs use overlaps directly.
    """
    if isinstance(rho, PureState) and isinstance(sigma, PureState):
        if rho.dim != sigma.dim:
            raise ValidationError("dimension mismatch", "state", "equal dims")
        return min(1.0, float(abs(np.vdot(rho.amplitudes, sigma.amplitudes))))
    if isinstance(rho, PureState) or isinstance(sigma, PureState):
        psi, other = (rho, sigma) if isinstance(rho, PureState) else (sigma, rho)
        m = _matrix(other)
        if m.shape[0] != psi.dim:
            raise ValidationError("dimension mismatch", "state", "equal dims")
        val = np.vdot(psi.amplitudes, m @ psi.amplitudes).real
        return float(np.sqrt(np.clip(val, 0.0, 1.0)))
    r, s = _matrix(rho), _matrix(sigma)
    if r.shape != s.shape:
        raise ValidationError("dimension mismatch", "state", "equal dims")
    rs = psd_sqrt(s)
    w = eigh_hermitian(rs @ r @ rs)[0]
    return float(min(1.0, np.sqrt(np.clip(w, 0.0, None)).sum()))


def operator_sqrt_sandwich(lam, rho) -> np.ndarray:
    """``sqrt(Lambda) rho sqrt(Lambda)`` for an effect ``0 <= Lambda <= I``."""
    lam = _matrix(lam)
    _check_hermitian(lam, "Lambda")
    w = eigh_hermitian(lam)[0]
    if w[0] < -PSD_TOL or w[-1] > 1.0 + PSD_TOL:
        raise ValidationError(
            f"Lambda spectrum [{w[0]:.3g}, {w[-1]:.3g}] outside [0, 1]", "Lambda", "0 <= Lambda <= I")
    r = _matrix(rho)
    s = psd_sqrt(lam)
    return s @ r @ s


def maximally_coherent(M: int, dim: int | None = None) -> PureState:
    """Uniform superposition of the first ``M`` basis states, padded to ``dim``."""
    dim = M if dim is None else dim
    if M < 1 or M > dim:
        raise ValidationError(f"need 1 <= M <= dim, got M={M}, dim={dim}", "M", "M <= dim")
    a = np.zeros(dim, dtype=np.complex128)
    a[:M] = 1.0 / np.sqrt(M)
    return PureState(a)


def ensemble_from_isometry(eigvals, eigvecs, V) -> PureEnsemble:
    """Pure-state decomposition induced by an isometry acting on the purifying side.

    Member ``i`` is proportional to ``sum_k V[i, k] sqrt(eigvals[k]) eigvecs[k]``
    with weight equal to its squared norm. Members of zero weight are dropped.
    """
    lam = np.asarray(eigvals, dtype=np.float64).ravel()
    V = np.asarray(V, dtype=np.complex128)
    if V.ndim != 2 or V.shape[1] != lam.size:
        raise ValidationError("isometry shape does not match spectrum", "V", "m x r")
    if np.any(lam < -PSD_TOL) or abs(lam.sum() - 1.0) > TRACE_TOL:
        raise ValidationError("eigenvalues are not a probability vector", "eigvals", "simplex")
    if np.max(np.abs(V.conj().T @ V - np.eye(lam.size))) > 1e-9:
        raise ValidationError("V^dagger V != I", "V", "isometry")
    E = np.column_stack([e.amplitudes if isinstance(e, PureState) else np.asarray(e)
                         for e in eigvecs])
    vecs = (E * np.sqrt(np.clip(lam, 0.0, None))) @ V.T
    weights = np.sum(np.abs(vecs) ** 2, axis=0)
    keep = weights > 1e-14
    weights = weights[keep] / weights[keep].sum()
    states = tuple(PureState.from_vector(vecs[:, i]) for i in np.nonzero(keep)[0])
    return PureEnsemble(weights, states)


# ---------------------------------------------------------------------------
# Randomness
# ---------------------------------------------------------------------------


def random_pure_state(dim: int, rng: RngLike = None) -> PureState:
    """Haar-random pure state (normalized complex Gaussian vector)."""
    g = as_rng(rng)
    v = g.standard_normal(dim) + 1j * g.standard_normal(dim)
    return PureState.from_vector(v)


def random_density(dim: int, rank: int | None = None, rng: RngLike = None) -> DensityOperator:
    """Random density operator of rank at most ``rank`` (Ginibre construction)."""
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise ValidationError(f"rank {rank} outside [1, {dim}]", "rank", "rank <= dim")
    g = as_rng(rng)
    G = g.standard_normal((dim, rank)) + 1j * g.standard_normal((dim, rank))
    rho = G @ G.conj().T
    rho /= np.trace(rho).real
    return DensityOperator(0.5 * (rho + rho.conj().T))


def random_isometry(m: int, r: int, rng: RngLike = None) -> np.ndarray:
    """Haar-distributed ``m x r`` isometry via phase-fixed QR."""
    if r > m:
        raise ValidationError(f"cannot embed {r} columns in {m} rows", "V", "r <= m")
    g = as_rng(rng)
    Z = g.standard_normal((m, m)) + 1j * g.standard_normal((m, m))
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R)
    Q = Q * (d / np.abs(d))
    return Q[:, :r]


def random_hermitian(dim: int, rng: RngLike = None) -> np.ndarray:
    g = as_rng(rng)
    X = g.standard_normal((dim, dim)) + 1j * g.standard_normal((dim, dim))
    return 0.5 * (X + X.conj().T)


def random_effect(dim: int, rng: RngLike = None) -> np.ndarray:
    """Random operator with spectrum in [0, 1]."""
    g = as_rng(rng)
    U = random_isometry(dim, dim, g)
    w = g.uniform(0.0, 1.0, dim)
    return (U * w) @ U.conj().T


# ---------------------------------------------------------------------------
# Inequality checks
# ---------------------------------------------------------------------------


def operator_difference_bounds(A, B, P) -> tuple[float, float, float]:
    """Return ``(Tr P(A-B), Tr (A-B)_+, ||A-B||_1)``; these should be nondecreasing."""
    D = _matrix(A) - _matrix(B)
    P = _matrix(P)
    return float(np.trace(P @ D).real), positive_part_trace(D), trace_norm(D)


def gentle_measurement_gap(rho, lam) -> tuple[float, float]:
    """Return ``(||rho - sqrt(L) rho sqrt(L)||_1, 2 sqrt(eps))`` with ``eps = 1 - Tr(L rho)``."""
    r = _matrix(rho)
    post = operator_sqrt_sandwich(lam, r)
    eps = max(0.0, 1.0 - float(np.trace(_matrix(lam) @ r).real))
    return trace_norm(r - post), 2.0 * np.sqrt(eps)
