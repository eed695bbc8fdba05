"""Batch NJ kernels for the Monte Carlo harness.

``nj_batch`` runs NJ on many dissimilarity maps of the same size and returns,
for each, the slot-pair index of every join plus the slot-pair index of the
other resolution of the final tie. Selection rules are those of
:func:`njcones.nj_core.select_pair`; slot bookkeeping is that of
:func:`njcones.nj_core.reduce`.

Two backends produce the same decisions: a numba ``@njit`` loop and a
vectorised numpy version. Set ``NJCONES_DISABLE_NUMBA=1`` (or pass
``backend="numpy"``) to force the numpy path.
"""
from __future__ import annotations

import os

import numpy as np

from .nj_core import TIE_RTOL, TieBreakPolicy

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

_DISABLED = os.environ.get("NJCONES_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")
HAVE_NUMBA = numba is not None and not _DISABLED


def default_backend() -> str:
    return "numba" if HAVE_NUMBA else "numpy"


def _njit(fn):
    if numba is None:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


@_njit
def _nj_batch_numba(X, U, n, policy, rtol):
    S = X.shape[0]
    steps = n - 3
    choices = np.empty((S, steps), dtype=np.int64)
    partner = np.empty(S, dtype=np.int64)
    ties = np.zeros(S, dtype=np.int64)
    D = np.empty((n, n))
    R = np.empty(n)
    minleaf = np.empty(n, dtype=np.int64)
    size = np.empty(n, dtype=np.int64)
    npairs = n * (n - 1) // 2
    Q = np.empty(npairs)
    pi = np.empty(npairs, dtype=np.int64)
    pj = np.empty(npairs, dtype=np.int64)
    tied = np.empty(npairs, dtype=np.int64)
    keys = np.empty(npairs, dtype=np.int64)
    pool = np.empty(npairs, dtype=np.int64)
    for s in range(S):
        idx = 0
        for a in range(n):
            D[a, a] = 0.0
            minleaf[a] = a
            size[a] = 1
            for b in range(a + 1, n):
                D[a, b] = X[s, idx]
                D[b, a] = X[s, idx]
                idx += 1
        draws = 0
        k = n
        for t in range(steps):
            for a in range(k):
                acc = 0.0
                for c in range(k):
                    acc += D[a, c]
                R[a] = acc
            p = 0
            best = 0
            for a in range(k):
                for b in range(a + 1, k):
                    Q[p] = (k - 2) * D[a, b] - R[a] - R[b]
                    pi[p] = a
                    pj[p] = b
                    if Q[p] < Q[best]:
                        best = p
                    p += 1
            m = 0
            if k == 4:
                tied[0] = best
                tied[1] = 5 - best  # complement pair in the 4-slot layout
                m = 2
            else:
                qmin = Q[best]
                for q in range(p):
                    scale = max(1.0, max(abs(Q[q]), abs(qmin)))
                    if abs(Q[q] - qmin) <= rtol * scale:
                        tied[m] = q
                        m += 1
                if m > 1:
                    ties[s] += 1
            # order tied pairs by (smaller, larger) minimum leaf
            for q in range(m):
                la = minleaf[pi[tied[q]]]
                lb = minleaf[pj[tied[q]]]
                if la < lb:
                    keys[q] = la * n + lb
                else:
                    keys[q] = lb * n + la
            for q in range(1, m):
                kq = keys[q]
                tq = tied[q]
                r = q - 1
                while r >= 0 and keys[r] > kq:
                    keys[r + 1] = keys[r]
                    tied[r + 1] = tied[r]
                    r -= 1
                keys[r + 1] = kq
                tied[r + 1] = tq
            chosen = tied[0]
            if m > 1 and policy != 0:
                u = U[s, draws]
                draws += 1
                if policy == 1:
                    chosen = tied[int(u * m)]
                else:
                    top = 0
                    for q in range(m):
                        carried = size[pi[tied[q]]] + size[pj[tied[q]]]
                        if carried > top:
                            top = carried
                    mm = 0
                    for q in range(m):
                        if size[pi[tied[q]]] + size[pj[tied[q]]] == top:
                            pool[mm] = tied[q]
                            mm += 1
                    chosen = pool[int(u * mm)]
            choices[s, t] = chosen
            if k == 4:
                partner[s] = 5 - chosen
            i = pi[chosen]
            j = pj[chosen]
            dij = D[i, j]
            for c in range(k):
                R[c] = 0.5 * ((D[i, c] + D[j, c]) - dij)
            for c in range(k):
                D[i, c] = R[c]
                D[c, i] = R[c]
            D[i, i] = 0.0
            minleaf[i] = min(minleaf[i], minleaf[j])
            size[i] = size[i] + size[j]
            last = k - 1
            if j != last:
                for c in range(k):
                    D[j, c] = D[last, c]
                    D[c, j] = D[c, last]
                D[j, j] = 0.0
                minleaf[j] = minleaf[last]
                size[j] = size[last]
            k -= 1
    return choices, partner, ties


def _nj_batch_numpy(X, U, n, policy, rtol):
    S = X.shape[0]
    steps = n - 3
    rows = np.arange(S)
    choices = np.empty((S, steps), dtype=np.int64)
    partner = np.empty(S, dtype=np.int64)
    ties = np.zeros(S, dtype=np.int64)
    draws = np.zeros(S, dtype=np.int64)
    iu0, iu1 = np.triu_indices(n, 1)
    D = np.zeros((S, n, n))
    D[:, iu0, iu1] = X
    D[:, iu1, iu0] = X
    minleaf = np.tile(np.arange(n, dtype=np.int64), (S, 1))
    size = np.ones((S, n), dtype=np.int64)
    big = np.iinfo(np.int64).max
    k = n
    for t in range(steps):
        a, b = np.triu_indices(k, 1)
        W = D[:, :k, :k]
        R = np.zeros((S, k))
        for c in range(k):  # sequential sum, same order as the compiled loop
            R += W[:, :, c]
        Q = (k - 2) * W[:, a, b] - R[:, a] - R[:, b]
        best = np.argmin(Q, axis=1)
        if k == 4:
            tied = np.zeros(Q.shape, dtype=bool)
            tied[rows, best] = True
            tied[rows, 5 - best] = True
        else:
            qmin = Q[rows, best][:, None]
            scale = np.maximum(1.0, np.maximum(np.abs(Q), np.abs(qmin)))
            tied = np.abs(Q - qmin) <= rtol * scale
        m = tied.sum(axis=1)
        if k > 4:
            ties += m > 1
        la, lb = minleaf[:, a], minleaf[:, b]
        keys = np.minimum(la, lb) * n + np.maximum(la, lb)
        masked = np.where(tied, keys, big)
        order = np.argsort(masked, axis=1, kind="stable")
        chosen = order[:, 0].copy()
        if policy != 0:
            rnd = m > 1
            u = U[rows, np.minimum(draws, U.shape[1] - 1)]
            if policy == 1:
                pick = (u * m).astype(np.int64)
                cand = order[rows, np.minimum(pick, Q.shape[1] - 1)]
            else:
                carried = size[:, a] + size[:, b]
                top = np.where(tied, carried, -1).max(axis=1)
                keep = tied & (carried == top[:, None])
                mm = keep.sum(axis=1)
                pick = (u * mm).astype(np.int64)
                kept_sorted = np.take_along_axis(keep, order, axis=1)
                # position of the pick-th kept pair in key order
                rank = np.cumsum(kept_sorted, axis=1) - 1
                pos = np.argmax(kept_sorted & (rank == pick[:, None]), axis=1)
                cand = order[rows, pos]
            chosen = np.where(rnd, cand, chosen)
            draws += rnd
        choices[:, t] = chosen
        if k == 4:
            partner[:] = 5 - chosen
        i, j = a[chosen], b[chosen]
        dij = D[rows, i, j][:, None]
        new = 0.5 * ((D[rows, i, :k] + D[rows, j, :k]) - dij)
        D[rows, i, :k] = new
        D[rows, :k, i] = new
        D[rows, i, i] = 0.0
        minleaf[rows, i] = np.minimum(minleaf[rows, i], minleaf[rows, j])
        size[rows, i] = size[rows, i] + size[rows, j]
        last = k - 1
        mv = j != last
        r, jj = rows[mv], j[mv]
        D[r, jj, :k] = D[r, last, :k]
        D[r, :k, jj] = D[r, :k, last]
        D[r, jj, jj] = 0.0
        minleaf[r, jj] = minleaf[r, last]
        size[r, jj] = size[r, last]
        k -= 1
    return choices, partner, ties


def nj_batch(X, U, n: int, policy=TieBreakPolicy.LEXICOGRAPHIC, backend: str | None = None):
    """Run NJ on every row of ``X`` (upper-triangle entries, one map per row).

    ``U`` holds ``n-3`` uniforms per row; the t-th randomized tie break of a
    row consumes ``U[row, t]``. Returns ``(choices, partner, ties)`` where
    ``ties`` counts tolerance ties seen at ``k > 4``.
    """
    policy = TieBreakPolicy.parse(policy)
    X = np.ascontiguousarray(X, dtype=np.float64)
    U = np.ascontiguousarray(U, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != n * (n - 1) // 2:
        raise ValueError("X must have one row of n choose 2 entries per map")
    if n < 4:
        raise ValueError("n must be >= 4")
    if U.shape != (X.shape[0], n - 3):
        raise ValueError("U must have shape (samples, n-3)")
    backend = backend or default_backend()
    if backend == "numba":
        if numba is None:
            raise RuntimeError("numba is not installed")
        return _nj_batch_numba(X, U, n, policy.code, TIE_RTOL)
    if backend == "numpy":
        return _nj_batch_numpy(X, U, n, policy.code, TIE_RTOL)
    raise ValueError(f"unknown backend {backend!r}")
