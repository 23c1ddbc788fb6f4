"""Chain specifications and generator assembly.

A chain lives on the states {0, ..., S}. Its transition-intensity matrix
Q(t) has nonnegative off-diagonal entries q_ij(t) (the rate of jumping from
i to j) and rows that sum to zero. Besides fully general rate tables, four
structured transition classes are supported:

``birth_death``
    single steps, q_{i,i+1} = birth_i(t), q_{i,i-1} = death_i(t)
``batch_birth``
    upward jumps of any size k at a group rate a_k(t) independent of the
    current state, single deaths
``batch_death``
    downward jumps of size k at a group rate b_k(t), single births
``batch_both``
    both batch patterns combined

A generator is *regular* when, for every state and every time, the
intensities of jumps INTO that state are non-increasing in the jump size,
separately for jumps arriving from below (q_{i-k,i}) and from above
(q_{i+k,i}). Walking away from the diagonal in any column of Q, the
entries never increase. All four structured classes are regular by
construction whenever their batch-rate sequences are non-increasing, and
regularity is exactly what makes the upper-triangular similarity transform
of the reduced system essentially non-negative.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .rates import RateEvaluationError, as_rate

KINDS = ("general", "birth_death", "batch_birth", "batch_death", "batch_both")


class InhomogeneousChainError(ValueError):
    """An operation that needs constant rates was given a time-varying chain."""


@dataclass(frozen=True)
class ChainSpec:
    """Immutable description of a finite chain on states {0, ..., S}.

    Use the module-level constructors (:func:`birth_death_chain`,
    :func:`batch_birth_chain`, :func:`batch_death_chain`,
    :func:`batch_both_chain`, :func:`general_chain`) rather than
    instantiating directly; they validate list lengths and coerce plain
    numbers to constant rate functions.
    """

    S: int
    kind: str
    birth: tuple = ()        # birth_i(t), i = 0..S-1   (birth_death, batch_death)
    death: tuple = ()        # death_i(t), i = 1..S     (birth_death, batch_birth)
    batch_birth: tuple = ()  # a_k(t),    k = 1..S      (batch_birth, batch_both)
    batch_death: tuple = ()  # b_k(t),    k = 1..S      (batch_death, batch_both)
    transitions: tuple = ()  # ((i, j, rate), ...)      (general)

    @property
    def is_homogeneous(self) -> bool:
        """True when every rate function is a constant."""
        rate_lists = (self.birth, self.death, self.batch_birth, self.batch_death)
        fns = [fn for lst in rate_lists for fn in lst]
        fns += [fn for _, _, fn in self.transitions]
        return all(fn.is_constant for fn in fns)


def _rate_tuple(values, length, name) -> tuple:
    rates = tuple(as_rate(v) for v in values)
    if len(rates) != length:
        raise ValueError(f"{name} needs {length} rates, got {len(rates)}")
    return rates


def birth_death_chain(S, birth, death) -> ChainSpec:
    """Single-step chain with birth rates birth_0..birth_{S-1} and death rates death_1..death_S."""
    S = _check_states(S)
    return ChainSpec(S, "birth_death",
                     birth=_rate_tuple(birth, S, "birth"),
                     death=_rate_tuple(death, S, "death"))


def batch_birth_chain(S, batch_birth, death) -> ChainSpec:
    """Group births of size k at rate a_k (independent of the state), single deaths."""
    S = _check_states(S)
    return ChainSpec(S, "batch_birth",
                     batch_birth=_rate_tuple(batch_birth, S, "batch_birth"),
                     death=_rate_tuple(death, S, "death"))


def batch_death_chain(S, batch_death, birth) -> ChainSpec:
    """Group deaths of size k at rate b_k (independent of the state), single births."""
    S = _check_states(S)
    return ChainSpec(S, "batch_death",
                     batch_death=_rate_tuple(batch_death, S, "batch_death"),
                     birth=_rate_tuple(birth, S, "birth"))


def batch_both_chain(S, batch_birth, batch_death) -> ChainSpec:
    """Group births at rates a_k and group deaths at rates b_k, all state-independent."""
    S = _check_states(S)
    return ChainSpec(S, "batch_both",
                     batch_birth=_rate_tuple(batch_birth, S, "batch_birth"),
                     batch_death=_rate_tuple(batch_death, S, "batch_death"))


def general_chain(S, transitions) -> ChainSpec:
    """Arbitrary chain from a mapping {(i, j): rate} of off-diagonal intensities."""
    S = _check_states(S)
    table = []
    for (i, j), rate in sorted(transitions.items()):
        i, j = int(i), int(j)
        if not (0 <= i <= S and 0 <= j <= S):
            raise ValueError(f"transition ({i}, {j}) outside states 0..{S}")
        if i == j:
            raise ValueError(f"diagonal transition ({i}, {i}) is not allowed")
        table.append((i, j, as_rate(rate)))
    return ChainSpec(S, "general", transitions=tuple(table))


def _check_states(S) -> int:
    S = int(S)
    if S < 1:
        raise ValueError(f"state bound S must be >= 1, got {S}")
    return S


@lru_cache(maxsize=None)
def _transition_table(spec: ChainSpec) -> tuple:
    """All off-diagonal entries of Q as ((i, j, rate_fn), ...)."""
    S = spec.S
    entries = []
    if spec.kind == "general":
        entries.extend(spec.transitions)
    elif spec.kind == "birth_death":
        for i in range(S):
            entries.append((i, i + 1, spec.birth[i]))
            entries.append((i + 1, i, spec.death[i]))
    elif spec.kind == "batch_birth":
        for i in range(S + 1):
            for k in range(1, S - i + 1):
                entries.append((i, i + k, spec.batch_birth[k - 1]))
        for i in range(1, S + 1):
            entries.append((i, i - 1, spec.death[i - 1]))
    elif spec.kind == "batch_death":
        for i in range(S + 1):
            for k in range(1, i + 1):
                entries.append((i, i - k, spec.batch_death[k - 1]))
        for i in range(S):
            entries.append((i, i + 1, spec.birth[i]))
    elif spec.kind == "batch_both":
        for i in range(S + 1):
            for k in range(1, S - i + 1):
                entries.append((i, i + k, spec.batch_birth[k - 1]))
            for k in range(1, i + 1):
                entries.append((i, i - k, spec.batch_death[k - 1]))
    else:
        raise ValueError(f"unknown chain kind {spec.kind!r}")
    return tuple(entries)


def eval_generator(spec: ChainSpec, t):
    """Transition-intensity matrix Q(t).

    Parameters
    ----------
    spec : ChainSpec
    t : float or 1d array of floats

    Returns
    -------
    ndarray
        Shape (S+1, S+1) for scalar t, (len(t), S+1, S+1) for array t.
        Off-diagonal entries are the transition intensities; each diagonal
        entry is minus the sum of its row, so rows sum to zero up to
        round-off.
    """
    ts = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(ts)):
        raise RateEvaluationError(f"generator requested at non-finite time {t!r}")
    n = spec.S + 1
    Q = np.zeros(ts.shape + (n, n))
    for i, j, fn in _transition_table(spec):
        try:
            Q[..., i, j] = fn(ts)
        except RateEvaluationError as exc:
            raise RateEvaluationError(f"transition {i}->{j}: {exc}") from None
    idx = np.arange(n)
    Q[..., idx, idx] = -Q.sum(axis=-1)
    return Q


def eval_transposed(spec: ChainSpec, t):
    """Transposed intensity matrix A(t) = Q(t)^T; its columns sum to zero."""
    return np.swapaxes(eval_generator(spec, t), -1, -2)


@dataclass(frozen=True)
class RegularityViolation:
    """One break of jump-size monotonicity: the size-(k+1) intensity exceeds the size-k one.

    state is the destination of the jumps; direction 'up' refers to jumps
    arriving from below (q_{state-k,state}), 'down' to jumps arriving from
    above (q_{state+k,state}).
    """

    t: float
    state: int
    k: int
    direction: str
    value: float
    next_value: float


@dataclass(frozen=True)
class RegularityReport:
    """Result of the jump-size monotonicity check over a finite time grid."""

    regular: bool
    violations: tuple
    grid: tuple
    caveat: str = ("regularity certified only at the listed grid times; "
                   "behaviour between grid points is not checked")


def check_regularity(spec: ChainSpec, grid) -> RegularityReport:
    """Check that arrival intensities are non-increasing in the jump size on a time grid.

    For every grid time and every state i, both families of intensities
    into i - q_{i-k,i}(t) from below and q_{i+k,i}(t) from above - must be
    non-increasing in k (non-strictly). Violations are collected and
    reported, never raised.
    """
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    if grid.size == 0:
        raise ValueError("regularity check needs a non-empty time grid")
    Qs = eval_generator(spec, grid)
    violations = []
    S = spec.S
    for i in range(S + 1):
        for direction, rows in (("up", np.arange(i - 1, -1, -1)),
                                ("down", np.arange(i + 1, S + 1))):
            band = Qs[:, rows, i]  # intensities into i at jump sizes 1, 2, ...
            if band.shape[1] < 2:
                continue
            bad_t, bad_k = np.nonzero(band[:, 1:] > band[:, :-1])
            for ti, ki in zip(bad_t, bad_k):
                violations.append(RegularityViolation(
                    t=float(grid[ti]), state=i, k=int(ki) + 1, direction=direction,
                    value=float(band[ti, ki]), next_value=float(band[ti, ki + 1])))
    violations.sort(key=lambda v: (v.t, v.state, v.direction, v.k))
    return RegularityReport(regular=not violations, violations=tuple(violations),
                            grid=tuple(float(t) for t in grid))


def require_homogeneous(spec: ChainSpec, what: str) -> None:
    """Raise :class:`InhomogeneousChainError` unless all rates are constant."""
    if not spec.is_homogeneous:
        raise InhomogeneousChainError(f"{what} requires constant rates, "
                                      f"but the chain is time-varying")
