"""Reduction and triangular similarity transform of the intensity matrix.

Eliminating the state-0 probability (the probabilities sum to one) turns the
transposed intensity matrix A(t) into an S-dimensional matrix B(t) with
entries b_ij = a_ij - a_i0. Conjugating with the upper-triangular all-ones
matrix T (whose action forms tail sums) yields B*(t) = T B(t) T^{-1}, which
is essentially non-negative - all off-diagonal entries >= 0 - whenever the
chain's generator has the regular jump-size structure. A further diagonal
conjugation D B*(t) D^{-1} with positive weights preserves that property and
is the knob the rate bounds are optimized over.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import ChainSpec, eval_transposed


def triangular_pair(S: int):
    """The all-ones upper-triangular matrix and its exact integer inverse.

    Returns (T, Tinv) of dimension S with T @ Tinv == I exactly: Tinv has
    ones on the diagonal and -1 on the first superdiagonal. (T x)_i is the
    tail sum sum_{j>=i} x_j.
    """
    if S < 1:
        raise ValueError(f"dimension must be >= 1, got {S}")
    T = np.triu(np.ones((S, S), dtype=int))
    Tinv = np.eye(S, dtype=int) - np.eye(S, k=1, dtype=int)
    return T, Tinv


def build_reduced(spec: ChainSpec, t):
    """Reduced S x S matrix B(t) with entries a_ij(t) - a_i0(t), i, j = 1..S.

    Equivalently: the lower-right S x S block of A(t) minus the column
    (a_10, ..., a_S0) broadcast across all columns. Accepts scalar or array
    times like :func:`ctmc_bounds.chain.eval_generator`.
    """
    A = eval_transposed(spec, t)
    return A[..., 1:, 1:] - A[..., 1:, :1]


def to_bstar(B):
    """Conjugate by the all-ones triangular matrix: B* = T B T^{-1}.

    Computed structurally rather than by matrix products, preserving the
    exact integer action of T: tail sums down each column followed by
    differences with the previous column,

        B*_ij = sum_{k>=i} (B_kj - B_{k,j-1}),    with B_{k,0} = 0.

    The composition order is pinned by the explicit entry formulas for the
    transformed matrix (see tests); the leading column keeps its plain tail
    sums. Works on a single matrix or a stack of them.
    """
    B = np.asarray(B, dtype=float)
    tail = np.cumsum(B[..., ::-1, :], axis=-2)[..., ::-1, :]
    out = tail.copy()
    out[..., :, 1:] -= tail[..., :, :-1]
    return out


def apply_weights(Bstar, d):
    """Diagonal conjugation D M D^{-1}: entry (i, j) becomes d_i m_ij / d_j.

    Diagonal entries are unchanged; essential non-negativity is preserved
    for any positive weights. Works on a single matrix or a stack.
    """
    d = np.asarray(d, dtype=float)
    if d.ndim != 1:
        raise ValueError("weights must be a 1d vector")
    if not np.all(np.isfinite(d)) or np.any(d <= 0.0):
        raise ValueError("weights must be positive and finite")
    M = np.asarray(Bstar, dtype=float)
    if M.shape[-1] != d.size or M.shape[-2] != d.size:
        raise ValueError(f"weight vector of length {d.size} does not match "
                         f"matrix dimension {M.shape[-1]}")
    return M * (d[:, None] / d[None, :])


def analytic_bstar(spec: ChainSpec, t: float):
    """Closed-form B*(t) for the four structured classes; the general kind is rejected.

    Serves as an independent oracle for :func:`to_bstar` composed with
    :func:`build_reduced`. Entries follow the known class-specific patterns:
    birth-death chains give a tridiagonal matrix; batch births contribute
    telescoped differences of the group rates below the diagonal, batch
    deaths above it.
    """
    S = spec.S
    M = np.zeros((S, S))
    if spec.kind == "birth_death":
        lam = [fn(t) for fn in spec.birth]
        mu = [fn(t) for fn in spec.death]
        for r in range(S):
            M[r, r] = -(lam[r] + mu[r])
            if r + 1 < S:
                M[r, r + 1] = mu[r]
                M[r + 1, r] = lam[r + 1]
    elif spec.kind == "batch_birth":
        a = [fn(t) for fn in spec.batch_birth]
        mu = [fn(t) for fn in spec.death]
        for r in range(S):
            M[r, r] = -(mu[r] + sum(a[:S - r]))
            if r + 1 < S:
                M[r, r + 1] = mu[r]
            for c in range(r):
                M[r, c] = a[r - c - 1] - a[S - c - 1]
    elif spec.kind == "batch_death":
        b = [fn(t) for fn in spec.batch_death]
        lam = [fn(t) for fn in spec.birth]
        for r in range(S):
            M[r, r] = -(lam[r] + sum(b[:r + 1]))
            if r + 1 < S:
                M[r + 1, r] = lam[r + 1]
            for c in range(r + 1, S):
                M[r, c] = b[c - r - 1] - b[c]
    elif spec.kind == "batch_both":
        a = [fn(t) for fn in spec.batch_birth]
        b = [fn(t) for fn in spec.batch_death]
        for r in range(S):
            M[r, r] = -(sum(b[:r + 1]) + sum(a[:S - r]))
            for c in range(r):
                M[r, c] = a[r - c - 1] - a[S - c - 1]
            for c in range(r + 1, S):
                M[r, c] = b[c - r - 1] - b[c]
    else:
        raise ValueError(f"no closed form for chain kind {spec.kind!r}")
    return M


@dataclass(frozen=True)
class NonnegReport:
    """Result of the essential non-negativity check of a square matrix."""

    passed: bool
    min_offdiagonal: float
    tolerance: float
    violations: tuple  # ((i, j, value), ...) sorted by value, worst first


def check_essential_nonnegativity(Bstar, tol=None) -> NonnegReport:
    """Check that all off-diagonal entries are >= -tol.

    The default tolerance is 1e-12 times the largest absolute entry, so
    genuine structure failures are flagged while round-off from rate
    arithmetic is not.
    """
    M = np.asarray(Bstar, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"square matrix expected, got shape {M.shape}")
    S = M.shape[0]
    if tol is None:
        tol = 1e-12 * float(np.max(np.abs(M))) if S else 0.0
    off = ~np.eye(S, dtype=bool)
    off_values = M[off]
    min_off = float(off_values.min()) if off_values.size else 0.0
    bad = np.argwhere(off & (M < -tol))
    violations = sorted(((int(i), int(j), float(M[i, j])) for i, j in bad),
                        key=lambda v: v[2])
    return NonnegReport(passed=not violations, min_offdiagonal=min_off,
                        tolerance=float(tol), violations=tuple(violations))


def min_offdiagonal(stack):
    """Smallest off-diagonal entry over a matrix or stack of matrices.

    Returns (value, index) where index locates the entry as (..., i, j).
    """
    M = np.asarray(stack, dtype=float)
    S = M.shape[-1]
    masked = M + np.where(np.eye(S, dtype=bool), np.inf, 0.0)
    flat = int(np.argmin(masked))
    idx = np.unravel_index(flat, masked.shape)
    return float(masked[idx]), idx
