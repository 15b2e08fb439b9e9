"""Strictly incoherent channels that concentrate a pure state into Phi_M.

Construction for ``psi`` with ``max_i |psi_i|^2 <= 1/M``:

1. :func:`ribbon_partition` lays the probabilities end to end on [0, 1] and
   cuts at multiples of 1/M, giving a nonnegative matrix ``W`` whose columns
   (bins) sum to 1 and whose rows sum to ``M p_i``.
2. :func:`birkhoff_decompose` pads ``W`` to a doubly stochastic square matrix
   and peels off permutation matrices, so ``W = sum_j lambda_j P_j`` with each
   ``P_j`` an injective map bins -> input indices.
3. Each term becomes one Kraus operator sending ``|i_j(m)>`` to ``|m>`` with
   amplitude ``sqrt(lambda_j / (M p_i))`` and the phase of ``psi_i`` undone.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qstate import (
    DensityOperator,
    GroupedDistribution,
    PureState,
    ValidationError,
    _matrix,
    maximally_coherent,
)
from .smoothing import max_fidelity_capped, smoothed_min_entropy_pure

COMPLETENESS_TOL = 1e-9
NONZERO_TOL = 1e-12
ZERO_PROB = 1e-15
RESIDUAL_TOL = 1e-9


class DecompositionError(RuntimeError):
    """Birkhoff reconstruction failed; an upstream invariant was broken."""


@dataclass(frozen=True, eq=False)
class IncoherentChannel:
    kraus: tuple

    def __post_init__(self):
        ks = tuple(np.asarray(k, dtype=np.complex128) for k in self.kraus)
        if not ks:
            raise ValidationError("no Kraus operators", "kraus", "nonempty")
        shapes = {k.shape for k in ks}
        if len(shapes) != 1 or ks[0].ndim != 2:
            raise ValidationError("Kraus operators differ in shape", "kraus", "common shape")
        for k in ks:
            k.setflags(write=False)
        object.__setattr__(self, "kraus", ks)

    @property
    def input_dim(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def output_dim(self) -> int:
        return self.kraus[0].shape[0]

    def completeness_error(self) -> float:
        S = sum(k.conj().T @ k for k in self.kraus)
        return float(np.max(np.abs(S - np.eye(self.input_dim))))

    def outcome_weights(self, rho) -> np.ndarray:
        r = _matrix(rho)
        return np.array([np.trace(k @ r @ k.conj().T).real for k in self.kraus])


@dataclass(frozen=True, eq=False)
class BinAssignment:
    """``W[i, m]``: share of bin ``m`` filled by input index ``i``, scaled by M."""

    W: np.ndarray

    @property
    def n_inputs(self) -> int:
        return self.W.shape[0]

    @property
    def n_bins(self) -> int:
        return self.W.shape[1]


def _as_probs(p) -> np.ndarray:
    if isinstance(p, PureState):
        return p.probabilities()
    if isinstance(p, GroupedDistribution):
        return p.expand()
    return np.asarray(p, dtype=np.float64).ravel()


def check_majorization(q, p, tol: float = 1e-12) -> bool:
    """True iff ``q`` majorizes ``p``: every descending partial sum of q dominates p's."""
    a = np.sort(_as_probs(q))[::-1]
    b = np.sort(_as_probs(p))[::-1]
    n = max(a.size, b.size)
    a = np.pad(a, (0, n - a.size))
    b = np.pad(b, (0, n - b.size))
    return bool(np.all(np.cumsum(a) >= np.cumsum(b) - tol))


def _ribbon(lengths: np.ndarray, n_bins: int, bin_width: float) -> np.ndarray:
    """Overlap of consecutive segments with consecutive equal-width bins."""
    edges = np.concatenate(([0.0], np.cumsum(lengths)))
    out = np.zeros((lengths.size, n_bins))
    for i in range(lengths.size):
        a, b = edges[i], edges[i + 1]
        if b - a <= 0:
            continue
        first = min(int(np.floor(a / bin_width)), n_bins - 1)
        last = min(int(np.ceil(b / bin_width)), n_bins)
        for m in range(first, last):
            ov = min(b, (m + 1) * bin_width) - max(a, m * bin_width)
            if ov > 0:
                out[i, m] = ov
    return out


def ribbon_partition(p, M: int) -> BinAssignment:
    """Cut the probability ribbon (input-index order) into M equal bins."""
    probs = _as_probs(p)
    if M < 1:
        raise ValidationError("M must be positive", "M", "M >= 1")
    if probs.max() > 1.0 / M + 1e-12:
        raise ValidationError(
            f"max probability {probs.max():.6g} exceeds 1/M = {1.0 / M:.6g}", "M", "max p <= 1/M")
    W = M * _ribbon(probs, M, 1.0 / M)
    # the last edge drifts from 1 by rounding; rescale columns back to 1
    W /= W.sum(axis=0, keepdims=True)
    return BinAssignment(W)


def _perfect_matching(D: np.ndarray, tol: float) -> np.ndarray:
    """Column -> row perfect matching on the positive support of square ``D``.

    Columns are processed in order; each tries rows by descending entry, ties
    broken by lowest index, with augmenting paths (Kuhn) when a greedy choice
    is blocked.
    """
    n = D.shape[0]
    prefs = [sorted(np.nonzero(D[:, c] > tol)[0], key=lambda r, c=c: (-D[r, c], r))
             for c in range(n)]
    row_of = -np.ones(n, dtype=np.int64)  # column -> row
    col_of = -np.ones(n, dtype=np.int64)  # row -> column

    def augment(c, seen):
        for r in prefs[c]:
            if not seen[r] and col_of[r] < 0:
                seen[r] = True
                col_of[r] = c
                row_of[c] = r
                return True
        for r in prefs[c]:
            if seen[r]:
                continue
            seen[r] = True
            if col_of[r] < 0 or augment(col_of[r], seen):
                col_of[r] = c
                row_of[c] = r
                return True
        return False

    for c in range(n):
        if not augment(c, np.zeros(n, dtype=bool)):
            raise DecompositionError("no perfect matching on the support; matrix not doubly stochastic")
    return row_of


def birkhoff_decompose(assignment: BinAssignment) -> list[tuple[float, tuple[int, ...]]]:
    """Write ``W`` as a convex combination of injective bin -> index maps.

    ``W`` (d x M) is padded with ``d - M`` slack columns to a doubly
    stochastic matrix, then perfect matchings are extracted greedily with
    weight equal to the smallest matched entry. Returns ``(lambda_j, map_j)``
    with ``map_j[m]`` the input index feeding bin ``m``; equal maps are merged.
    """
    W = np.asarray(assignment.W, dtype=np.float64)
    d, M = W.shape
    if M > d:
        raise ValidationError(f"{M} bins exceed {d} inputs", "W", "M <= d")
    slack = np.clip(1.0 - W.sum(axis=1), 0.0, None)
    D = np.zeros((d, d))
    D[:, :M] = W
    if d > M:
        pad = _ribbon(slack, d - M, 1.0)
        pad /= np.where(pad.sum(axis=0) > 0, pad.sum(axis=0), 1.0)
        D[:, M:] = pad
    R = D.copy()
    terms: dict[tuple[int, ...], float] = {}
    remaining = 1.0
    for _ in range(d * d + 1):
        if remaining <= NONZERO_TOL:
            break
        try:
            rows = _perfect_matching(R, NONZERO_TOL)
        except DecompositionError:
            if remaining < RESIDUAL_TOL:
                break  # rounding dust; the residual check below decides
            raise
        lam = float(R[rows, np.arange(d)].min())
        R[rows, np.arange(d)] -= lam
        R[R < NONZERO_TOL] = 0.0
        remaining -= lam
        key = tuple(int(r) for r in rows[:M])
        terms[key] = terms.get(key, 0.0) + lam
    out = [(lam, key) for key, lam in terms.items()]
    total = sum(lam for lam, _ in out)
    recon = np.zeros_like(W)
    for lam, key in out:
        recon[list(key), np.arange(M)] += lam
    resid = float(np.max(np.abs(recon - W)))
    if abs(total - 1.0) > RESIDUAL_TOL or resid > RESIDUAL_TOL:
        raise DecompositionError(
            f"Birkhoff residual {resid:.3e}, weight total {total:.12f}")
    return out


def build_concentration_channel(psi: PureState, M: int) -> IncoherentChannel:
    """Strictly incoherent channel with ``Lambda(psi) = Phi_M`` exactly."""
    probs = psi.probabilities()
    i_max = int(np.argmax(probs))
    if probs[i_max] > 1.0 / M + 1e-12:
        raise ValidationError(
            f"|psi_{i_max}|^2 = {probs[i_max]:.6g} exceeds 1/M = {1.0 / M:.6g}",
            f"amplitudes[{i_max}]", "max p <= 1/M")
    d = psi.dim
    phases = np.exp(-1j * np.angle(psi.amplitudes))
    terms = birkhoff_decompose(ribbon_partition(probs, M))
    kraus = []
    for lam, key in terms:
        K = np.zeros((M, d), dtype=np.complex128)
        for m, i in enumerate(key):
            K[m, i] = np.sqrt(lam / (M * probs[i])) * phases[i]
        kraus.append(K)
    # Columns matched by the decomposition have norm 1 up to rounding; indices
    # it never reaches (zero or sub-1e-12 weight) go to |0>. One term per index
    # keeps K^dagger K diagonal.
    norms = sum(np.sum(np.abs(K) ** 2, axis=0) for K in kraus) if kraus else np.zeros(d)
    close = np.abs(norms - 1.0) < 1e-6
    for K in kraus:
        K[:, close] /= np.sqrt(norms[close])
    deficit = np.where(close, 0.0, np.clip(1.0 - norms, 0.0, None))
    for i in np.nonzero(deficit > 0)[0]:
        K = np.zeros((M, d), dtype=np.complex128)
        K[0, i] = np.sqrt(deficit[i])
        kraus.append(K)
    return IncoherentChannel(tuple(kraus))


def certify_incoherent(channel: IncoherentChannel) -> bool:
    """Completeness within 1e-9 and at most one nonzero per Kraus column."""
    if channel.completeness_error() > COMPLETENESS_TOL:
        return False
    for K in channel.kraus:
        if np.any(np.sum(np.abs(K) > NONZERO_TOL, axis=0) > 1):
            return False
        # each basis vector must land on a multiple of a basis vector
        for col in K.T:
            big = np.abs(col) > NONZERO_TOL
            if big.sum() > 1:
                return False
    return True


def apply_channel(channel: IncoherentChannel, rho) -> DensityOperator:
    r = _matrix(rho)
    if r.shape[0] != channel.input_dim:
        raise ValidationError(
            f"state dim {r.shape[0]} != channel input dim {channel.input_dim}", "state", "dims match")
    out = sum(K @ r @ K.conj().T for K in channel.kraus)
    return DensityOperator(0.5 * (out + out.conj().T))


def target_fidelity_sq(channel: IncoherentChannel, psi, M: int) -> float:
    """``F^2(Lambda(psi), Phi_M) = <Phi_M|Lambda(psi)|Phi_M>``."""
    out = apply_channel(channel, psi).matrix
    phi = maximally_coherent(M, channel.output_dim).amplitudes
    return float(np.vdot(phi, out @ phi).real)


def capped_witness(psi: PureState, cap: float) -> tuple[PureState, float]:
    """Phase-aligned state closest to ``psi`` with every ``|amplitude|^2 <= cap``.

    Returns the state and its squared fidelity to ``psi``.
    """
    probs = psi.probabilities()
    p = GroupedDistribution.from_probabilities(probs)
    w = max_fidelity_capped(p, cap, psi.dim)
    q = np.minimum(w.cap, w.t * probs)
    q[probs < ZERO_PROB] = 0.0
    outside = np.nonzero(probs < ZERO_PROB)[0]
    if w.pad_mass > 0 and outside.size:
        q[outside] = w.pad_mass / outside.size
    q = q / q.sum()
    amps = np.sqrt(q) * np.exp(1j * np.angle(psi.amplitudes))
    return PureState.from_vector(amps), w.fidelity_sq


def concentrate(psi: PureState, epsilon: float) -> tuple[int, IncoherentChannel, float]:
    """Concentrate ``psi`` into ``Phi_M`` up to squared-fidelity error ``epsilon``.

    Builds the exact channel for the smoothing witness and applies it to
    ``psi`` itself; fidelity monotonicity guarantees the target is met.
    """
    p = GroupedDistribution.from_probabilities(psi.probabilities())
    M = smoothed_min_entropy_pure(p, epsilon, psi.dim).best_M
    psi_bar, _ = capped_witness(psi, 1.0 / M)
    channel = build_concentration_channel(psi_bar, M)
    return M, channel, target_fidelity_sq(channel, psi, M)


def concentrate_ensemble(ensemble, M: int) -> tuple[list[IncoherentChannel], float]:
    """Per-member channels towards ``Phi_M`` and the weighted squared fidelity reached."""
    channels, total = [], 0.0
    for w, psi in ensemble:
        psi_bar, _ = capped_witness(psi, 1.0 / M)
        ch = build_concentration_channel(psi_bar, M)
        channels.append(ch)
        total += w * target_fidelity_sq(ch, psi, M)
    return channels, total
