"""Pure-Python (numpy) implementations of the hot kernels.

Same signatures and results as the compiled ``_kernels`` extension; used when
the extension is not built or when ``ONESHOT_COHERENCE_PURE_PYTHON`` is set.
"""
import numpy as np

FEASIBILITY_TOL = 1e-12


def capped_fidelity(values, mults, cap, n_pad):
    """Maximize sum_i sqrt(p_i q_i) over q with q_i <= cap and sum q = 1.

    ``values`` must be strictly positive and sorted descending, ``mults`` the
    matching multiplicities. ``n_pad`` zero-probability outcomes may absorb
    mass that the support cannot hold under the cap.

    Returns ``(fidelity, t, n_capped_groups, pad_mass)`` where the optimum is
    ``q_i = min(cap, t * p_i)`` on the support.
    """
    values = np.asarray(values, dtype=np.float64)
    mults = np.asarray(mults, dtype=np.float64)
    n_support = mults.sum()
    if cap * (n_support + n_pad) < 1.0 - FEASIBILITY_TOL:
        raise ValueError(
            f"cap {cap!r} infeasible for {n_support + n_pad:g} outcomes")
    mass = mults * values
    # suffix sums avoid the cancellation in 1 - cumsum
    tail = np.cumsum(mass[::-1])[::-1]
    n_capped = np.concatenate(([0.0], np.cumsum(mults)[:-1]))
    t = (1.0 - cap * n_capped) / tail
    ok = np.nonzero(t * values <= cap * (1.0 + 1e-15))[0]
    sqrt_v = np.sqrt(values)
    if ok.size:
        k = int(ok[0])
        tk = float(t[k])
        fid = (np.sqrt(cap) * float(np.dot(mults[:k], sqrt_v[:k]))
               + np.sqrt(tk) * float(tail[k]))
        return fid, tk, k, 0.0
    # every support outcome sits at the cap; the rest goes to padding
    k = values.size
    pad_mass = max(0.0, 1.0 - cap * n_support)
    fid = np.sqrt(cap) * float(np.dot(mults, sqrt_v))
    return fid, cap / float(values[-1]), k, pad_mass


def grid_search(p, threshold, step, lo, hi):
    """Exhaustive simplex grid: minimize max(q) subject to (sum sqrt(p q))^2 >= threshold.

    The first ``d - 1`` coordinates run over ``lo[k] + j * step`` up to
    ``hi[k]``; the last coordinate is fixed by normalization and must land in
    ``[lo[-1], hi[-1]]``. Returns ``(best_max, best_q)``; ``best_q`` is None
    when no grid point is feasible.
    """
    p = np.asarray(p, dtype=np.float64)
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    d = p.size
    sp = np.sqrt(p)
    eps_edge = 1e-12
    if d == 1:
        q = np.ones(1)
        return (1.0, q) if sp[0] ** 2 >= threshold else (np.inf, None)
    axes = [lo[k] + step * np.arange(int(np.floor((hi[k] - lo[k]) / step + 1e-9)) + 1)
            for k in range(d - 1)]
    if d == 2:
        q0 = axes[0]
        pts = np.stack([q0, 1.0 - q0], axis=1)
    else:
        a, b = np.meshgrid(axes[0], axes[1], indexing="ij")
        a = a.ravel()
        b = b.ravel()
        pts = np.stack([a, b, 1.0 - a - b], axis=1)
    last = pts[:, -1]
    keep = (last >= lo[-1] - eps_edge) & (last <= hi[-1] + eps_edge) & (last >= -eps_edge)
    pts = np.clip(pts[keep], 0.0, None)
    if pts.shape[0] == 0:
        return np.inf, None
    fid = np.sqrt(pts) @ sp
    feasible = fid * fid >= threshold
    if not feasible.any():
        return np.inf, None
    pts = pts[feasible]
    mx = pts.max(axis=1)
    j = int(np.argmin(mx))
    return float(mx[j]), pts[j].copy()


def grid_bbox(p, threshold, step, lo, hi, cutoff):
    """Bounding box of feasible grid points with ``max(q) <= cutoff``.

    Same grid as :func:`grid_search`. Returns ``(box_lo, box_hi)`` or None.
    """
    p = np.asarray(p, dtype=np.float64)
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    d = p.size
    if d == 1:
        return (np.ones(1), np.ones(1)) if p[0] >= threshold and cutoff >= 1.0 else None
    axes = [lo[k] + step * np.arange(int(np.floor((hi[k] - lo[k]) / step + 1e-9)) + 1)
            for k in range(d - 1)]
    if d == 2:
        pts = np.stack([axes[0], 1.0 - axes[0]], axis=1)
    else:
        a, b = np.meshgrid(axes[0], axes[1], indexing="ij")
        a = a.ravel()
        b = b.ravel()
        pts = np.stack([a, b, 1.0 - a - b], axis=1)
    last = pts[:, -1]
    keep = (last >= lo[-1] - 1e-12) & (last <= hi[-1] + 1e-12) & (last >= -1e-12)
    pts = np.clip(pts[keep], 0.0, None)
    fid = np.sqrt(pts) @ np.sqrt(p)
    sel = (fid * fid >= threshold) & (pts.max(axis=1) <= cutoff)
    if not sel.any():
        return None
    pts = pts[sel]
    return pts.min(axis=0), pts.max(axis=0)
