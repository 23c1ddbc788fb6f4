"""Two-sided convergence envelopes and the sharp-rate report.

The weighted transformed matrix B**(t) drives w' = B**(t) w. Its largest
and smallest column sums h_up(t) and h_lo(t) bound the growth of the l1
norm from above for any initial vector and from below for nonnegative ones:

    ||w(t)|| <= exp(int_0^t h_up) ||w(0)||,
    ||w(t)|| >= exp(int_0^t h_lo) ||w(0)||   (w(0) >= 0).

For a homogeneous chain with the Perron weights both column-sum extremes
collapse to the constant lambda0 and the envelopes coincide: the rate is
sharp.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .chain import ChainSpec, check_regularity, require_homogeneous
from .spectral import SharpnessConditionError, check_sharpness_conditions, perron_weights
from .transform import apply_weights, build_reduced, min_offdiagonal, to_bstar

CSV_COLUMNS = ("t", "h_upper", "h_lower", "I_upper", "I_lower", "env_upper", "env_lower")


@dataclass(frozen=True)
class BoundReport:
    """Envelope bounds on [0, Tmax] for one chain and one weight vector.

    grid holds the report times; h_upper/h_lower the extreme column sums
    at those times; I_upper/I_lower their running integrals (zero at t=0);
    env_upper/env_lower the exponential envelopes exp(I) that multiply the
    initial norm. sharp is set (with lambda0) when the envelopes provably
    coincide. warnings records soft findings such as a failed regularity
    check that was overridden by a verified essentially non-negative
    transform.
    """

    grid: np.ndarray
    h_upper: np.ndarray
    h_lower: np.ndarray
    I_upper: np.ndarray
    I_lower: np.ndarray
    env_upper: np.ndarray
    env_lower: np.ndarray
    weights: np.ndarray
    sharp: bool = False
    lambda0: float | None = None
    warnings: tuple = ()


def cumulative_simpson(values_half, step: float):
    """Cumulative integral of samples on a half-step grid.

    values_half holds 2n+1 samples at spacing step/2 along the leading
    axis (trailing axes integrate componentwise); the return value has n+1
    entries: the running integral at the n+1 full-step points, each
    interval integrated by Simpson's rule through its midpoint sample. All
    quadrature weights are positive, so pointwise-ordered integrands yield
    ordered integrals.
    """
    f = np.asarray(values_half, dtype=float)
    if f.shape[0] % 2 != 1 or f.shape[0] < 3:
        raise ValueError("need an odd number (>= 3) of half-step samples")
    inc = (step / 6.0) * (f[0:-2:2] + 4.0 * f[1::2] + f[2::2])
    out = np.empty((inc.shape[0] + 1,) + inc.shape[1:])
    out[0] = 0.0
    np.cumsum(inc, axis=0, out=out[1:])
    return out


def compute_bounds(spec: ChainSpec, weights, tmax: float, n_grid: int,
                   checks: bool = True) -> BoundReport:
    """Evaluate the two-sided envelopes for a chain on [0, tmax].

    Parameters
    ----------
    spec : ChainSpec
    weights : (S,) array_like
        Positive weights defining the diagonal conjugation.
    tmax : float
        Analysis horizon, > 0.
    n_grid : int
        Number of report times (>= 2); the integrand is sampled twice as
        densely so every reported integral is a Simpson value.
    checks : bool
        When True (default), verify regularity (a failure only adds a
        warning) and essential non-negativity of the transformed matrix
        (a failure raises, since the envelope argument needs it).
    """
    tmax = float(tmax)
    if not tmax > 0.0:
        raise ValueError(f"horizon must be positive, got {tmax}")
    n_grid = int(n_grid)
    if n_grid < 2:
        raise ValueError(f"need at least 2 grid points, got {n_grid}")
    d = np.asarray(weights, dtype=float)

    half = np.linspace(0.0, tmax, 2 * n_grid - 1)
    Bstar = to_bstar(build_reduced(spec, half))

    warnings = []
    if checks:
        scale = float(np.max(np.abs(Bstar)))
        worst, idx = min_offdiagonal(Bstar)
        if worst < -1e-12 * scale:
            ti, i, j = idx
            raise ValueError(
                f"transformed matrix is not essentially non-negative: entry "
                f"({i + 1},{j + 1}) = {worst} at t={half[ti]}; envelope bounds do not apply")
        reg = check_regularity(spec, half[::2])
        if not reg.regular:
            v = reg.violations[0]
            warnings.append(
                f"generator is not regular on the grid (first break: t={v.t}, "
                f"state {v.state}, jump {v.k}->{v.k + 1} {v.direction}); proceeding "
                f"because the transformed matrix is essentially non-negative")

    sums = apply_weights(Bstar, d).sum(axis=-2)
    h_up = sums.max(axis=-1)
    h_lo = sums.min(axis=-1)
    step = tmax / (n_grid - 1)
    I_up = cumulative_simpson(h_up, step)
    I_lo = cumulative_simpson(h_lo, step)

    return BoundReport(grid=half[::2], h_upper=h_up[::2], h_lower=h_lo[::2],
                       I_upper=I_up, I_lower=I_lo,
                       env_upper=np.exp(I_up), env_lower=np.exp(I_lo),
                       weights=d, warnings=tuple(warnings))


def sharp_report(spec: ChainSpec, tmax: float = 1.0, n_grid: int = 201) -> BoundReport:
    """Envelope report with the equalizing Perron weights of a homogeneous chain.

    Requires a homogeneous chain passing the class sharpness conditions and
    an irreducible transformed matrix. Both column-sum extremes are checked
    to agree with lambda0 before the report is marked sharp.
    """
    require_homogeneous(spec, "sharp-rate report")
    cond = check_sharpness_conditions(spec)
    if not cond.passed:
        raise SharpnessConditionError("; ".join(cond.failures))
    rate = perron_weights(to_bstar(build_reduced(spec, 0.0)))
    report = compute_bounds(spec, rate.weights, tmax, n_grid)
    lam0 = rate.lambda0
    tol = 1e-9 * abs(lam0) if abs(lam0) > 1e-12 else 1e-12
    worst = max(float(np.max(np.abs(report.h_upper - lam0))),
                float(np.max(np.abs(report.h_lower - lam0))))
    if worst > tol:
        raise SharpnessConditionError(
            f"column-sum extremes deviate from lambda0 by {worst:.3e} (> {tol:.3e})")
    return dataclasses.replace(report, sharp=True, lambda0=lam0)


def _format(x: float) -> str:
    return format(float(x), ".17g")


def bound_report_to_csv(report: BoundReport, path) -> None:
    """Write a report as CSV: t, h_upper, h_lower, I_upper, I_lower, env_upper, env_lower.

    Comma separator, '.' decimal point, header row, LF line endings, 17
    significant digits (round-trip exact for doubles).
    """
    lines = [",".join(CSV_COLUMNS)]
    for k in range(report.grid.shape[0]):
        lines.append(",".join(_format(v) for v in (
            report.grid[k], report.h_upper[k], report.h_lower[k],
            report.I_upper[k], report.I_lower[k],
            report.env_upper[k], report.env_lower[k])))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
