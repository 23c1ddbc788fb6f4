"""Command-line front end.

Four subcommands, each driven by a JSON model file (schema in
:mod:`ctmc_bounds.modelfile`):

``check``   structural checks: regularity and essential non-negativity
``rate``    sharp rate and equalizing weights of a homogeneous chain
``bounds``  two-sided envelope report, optionally as CSV
``verify``  randomized trajectory verification of the envelopes

Exit codes (a total function of the outcome):

====  =======================================================
0     success; for ``check`` the transform is essentially
      non-negative everywhere (a regularity failure alone only
      warns), for ``verify`` no envelope violations
1     property violation (non-negativity break, envelope break)
2     model file cannot be parsed
3     rate evaluation failed or a trajectory blew up
4     homogeneous-only command applied to a time-varying chain
5     transformed matrix is reducible
6     sharpness conditions not satisfied
====  =======================================================
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

import numpy as np

from .bounds import bound_report_to_csv, compute_bounds, sharp_report
from .chain import InhomogeneousChainError, check_regularity
from .modelfile import AnalysisSettings, ModelFileError, load_model
from .odesolve import (OdeBlowUpError, verify_bounds, verify_convergence_coupling)
from .rates import RateEvaluationError
from .spectral import (ReducibleMatrixError, SharpnessConditionError,
                       check_sharpness_conditions, closed_form_bd, perron_weights)
from .transform import build_reduced, min_offdiagonal, to_bstar

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_PARSE = 2
EXIT_EVAL = 3
EXIT_INHOMOGENEOUS = 4
EXIT_REDUCIBLE = 5
EXIT_CONDITIONS = 6


def _fmt(x) -> str:
    return format(float(x), ".12g")


def _load_weights_file(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ModelFileError(f"cannot read weights file {path}: {exc}") from None
    try:
        values = json.loads(text)
        if not isinstance(values, list):
            raise ValueError("expected a JSON array")
    except (json.JSONDecodeError, ValueError):
        values = text.replace(",", " ").split()
    try:
        return tuple(float(v) for v in values)
    except (TypeError, ValueError):
        raise ModelFileError(f"weights file {path} must contain numbers") from None


def _apply_overrides(settings: AnalysisSettings, args) -> AnalysisSettings:
    updates = {}
    for flag, field in (("horizon", "horizon"), ("grid", "grid"),
                        ("steps", "steps"), ("trials", "trials"),
                        ("pairs", "pairs"), ("seed", "seed"),
                        ("tol", "tolerance")):
        value = getattr(args, flag, None)
        if value is not None:
            updates[field] = value
    if getattr(args, "weights", None) is not None:
        w = args.weights
        if w in ("ones", "perron", "frozen-perron"):
            updates["weights_mode"] = w
            updates["weights"] = None
        else:
            updates["weights_mode"] = "list"
            updates["weights"] = _load_weights_file(w)
    return dataclasses.replace(settings, **updates)


def resolve_weights(spec, settings: AnalysisSettings):
    """Weight vector for the configured mode, plus soft warnings.

    'ones' is the default; 'perron' demands a homogeneous chain and yields
    the sharp equalizing weights; 'frozen-perron' computes them from the
    transform at t=0 of a possibly time-varying chain, flagged as a
    heuristic; 'list' takes the user-provided values.
    """
    mode = settings.weights_mode
    warnings = []
    if mode == "ones":
        return np.ones(spec.S), warnings
    if mode == "list":
        d = np.asarray(settings.weights, dtype=float)
        if d.shape != (spec.S,):
            raise ModelFileError(f"weights list must have length {spec.S}, "
                                 f"got {d.shape[0] if d.ndim else 0}")
        if not np.all(np.isfinite(d)) or np.any(d <= 0.0):
            raise ModelFileError("weights must be positive and finite")
        return d, warnings
    if mode == "perron":
        if not spec.is_homogeneous:
            raise InhomogeneousChainError(
                "weights mode 'perron' requires constant rates; "
                "use 'frozen-perron' for time-varying chains")
        return perron_weights(to_bstar(build_reduced(spec, 0.0))).weights, warnings
    if mode == "frozen-perron":
        rate = perron_weights(to_bstar(build_reduced(spec, 0.0)))
        if not spec.is_homogeneous:
            warnings.append("frozen-perron weights computed at t=0 of a "
                            "time-varying chain: a heuristic, not sharp")
        return rate.weights, warnings
    raise ModelFileError(f"unknown weights mode {mode!r}")


def cmd_check(args) -> int:
    model = load_model(args.model)
    spec, settings = model.chain, _apply_overrides(model.analysis, args)
    grid = np.linspace(0.0, settings.horizon, settings.grid)

    reg = check_regularity(spec, grid)
    if reg.regular:
        print(f"regular: yes ({settings.grid} grid points over "
              f"[0, {_fmt(settings.horizon)}])")
    else:
        v = reg.violations[0]
        print(f"regular: no ({len(reg.violations)} violations; first: t={_fmt(v.t)}, "
              f"state {v.state}, {v.direction} jump {v.k}->{v.k + 1}: "
              f"{_fmt(v.value)} -> {_fmt(v.next_value)})")

    Bstar = to_bstar(build_reduced(spec, grid))
    scale = float(np.max(np.abs(Bstar)))
    worst, idx = min_offdiagonal(Bstar)
    ok = worst >= -1e-12 * scale
    if ok:
        print(f"B* essentially non-negative: yes (off-diagonal minimum {_fmt(worst)})")
    else:
        ti, i, j = idx
        print(f"B* essentially non-negative: no (entry ({i + 1},{j + 1}) = "
              f"{_fmt(worst)} at t={_fmt(grid[ti])})")
    if not reg.regular and ok:
        print("warning: generator is not regular, but the transform is "
              "essentially non-negative; downstream bounds remain valid")
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_rate(args) -> int:
    model = load_model(args.model)
    spec, settings = model.chain, _apply_overrides(model.analysis, args)
    cond = check_sharpness_conditions(spec)
    status = "pass" if cond.passed else "FAIL: " + "; ".join(cond.failures)
    print(f"sharpness conditions ({spec.kind}): {status}")
    report = sharp_report(spec, tmax=settings.horizon, n_grid=settings.grid)
    print(f"lambda0: {format(report.lambda0, '.17g')}")
    print("weights: " + " ".join(format(w, ".17g") for w in report.weights))
    print("sharp: yes (h_max = h_min = lambda0 on the grid)")
    if args.closed_form:
        _print_closed_form(spec, report.lambda0)
    if args.csv:
        bound_report_to_csv(report, args.csv)
        print(f"csv written: {args.csv}")
    return EXIT_OK


def _print_closed_form(spec, lambda0) -> None:
    if spec.kind != "birth_death":
        print("closed form: only available for birth_death chains")
        return
    lam = {fn.constant_value for fn in spec.birth}
    mu = {fn.constant_value for fn in spec.death}
    if len(lam) != 1 or len(mu) != 1:
        print("closed form: needs identical birth rates and identical death rates")
        return
    beta, g = closed_form_bd(lam.pop(), mu.pop(), spec.S)
    print(f"closed form: beta_star={format(beta, '.17g')} "
          f"g_star={format(g, '.17g')} |beta_star + lambda0|="
          f"{format(abs(beta + lambda0), '.3e')}")


def cmd_bounds(args) -> int:
    model = load_model(args.model)
    spec, settings = model.chain, _apply_overrides(model.analysis, args)
    weights, warnings = resolve_weights(spec, settings)
    report = compute_bounds(spec, weights, settings.horizon, settings.grid)
    for note in warnings + list(report.warnings):
        print(f"warning: {note}")
    print(f"horizon: [0, {_fmt(settings.horizon)}], {settings.grid} grid points")
    print(f"I_upper(T) = {_fmt(report.I_upper[-1])}   "
          f"envelope_upper(T) = {_fmt(report.env_upper[-1])}")
    print(f"I_lower(T) = {_fmt(report.I_lower[-1])}   "
          f"envelope_lower(T) = {_fmt(report.env_lower[-1])}")
    if args.csv:
        bound_report_to_csv(report, args.csv)
        print(f"csv written: {args.csv}")
    return EXIT_OK


def cmd_verify(args) -> int:
    model = load_model(args.model)
    spec, settings = model.chain, _apply_overrides(model.analysis, args)
    weights, warnings = resolve_weights(spec, settings)
    for note in warnings:
        print(f"warning: {note}")
    common = dict(tmax=settings.horizon, n_steps=settings.steps,
                  seed=settings.seed, slack=settings.tolerance,
                  n_jobs=args.jobs)
    rep_b = verify_bounds(spec, weights, n_trials=settings.trials, **common)
    rep_c = verify_convergence_coupling(spec, weights, n_pairs=settings.pairs,
                                        **common)
    for rep, label in ((rep_b, "bounds"), (rep_c, "coupling")):
        print(f"{label}: {'pass' if rep.passed else 'FAIL'} "
              f"({rep.n_trials} trials, seed {rep.seed}, "
              f"slack_total {rep.slack_total:.3e})")
        print(f"  worst upper ratio: {format(rep.worst_upper, '.17g')}")
        if rep.worst_lower is not None:
            print(f"  worst lower ratio: {format(rep.worst_lower, '.17g')}")
        if not rep.passed:
            phase, trial, t, ratio = rep.violations[0]
            print(f"  first violation: {phase}, trial {trial}, t={_fmt(t)}, "
                  f"ratio {format(ratio, '.17g')} ({rep.n_violations} total)")
    if args.csv:
        _verify_csv(rep_b, rep_c, args.csv)
        print(f"csv written: {args.csv}")
    return EXIT_OK if rep_b.passed and rep_c.passed else EXIT_VIOLATION


def _verify_csv(rep_b, rep_c, path) -> None:
    def _f(x):
        return format(float(x), ".17g")

    lines = ["t,bounds_ratio_upper_max,bounds_ratio_lower_min,coupling_ratio_max"]
    for k in range(rep_b.grid.shape[0]):
        lines.append(",".join((_f(rep_b.grid[k]), _f(rep_b.ratio_upper_max[k]),
                               _f(rep_b.ratio_lower_min[k]),
                               _f(rep_c.ratio_upper_max[k]))))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctmc-bounds",
        description="Convergence-rate bounds for finite continuous-time "
                    "Markov chains with structured generators.")
    sub = parser.add_subparsers(dest="command", required=True)

    def _common(p, csv=True, verify=False):
        p.add_argument("model", help="path to the JSON model file")
        p.add_argument("--horizon", type=float, help="analysis horizon Tmax")
        p.add_argument("--grid", type=int, help="number of report grid points")
        p.add_argument("--seed", type=int, help="seed for randomized commands")
        p.add_argument("--tol", type=float, help="verification slack")
        p.add_argument("--weights",
                       help="ones | perron | frozen-perron | path to a weights file")
        if csv:
            p.add_argument("--csv", help="write the report to this CSV path")
        if verify:
            p.add_argument("--steps", type=int, help="RK4 steps over the horizon")
            p.add_argument("--trials", type=int, help="random trials for the envelopes")
            p.add_argument("--pairs", type=int, help="random probability pairs")
            p.add_argument("--jobs", type=int, default=1,
                           help="thread chunks for trial batches")

    p = sub.add_parser("check", help="regularity and essential non-negativity")
    _common(p, csv=False)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("rate", help="sharp rate of a homogeneous chain")
    _common(p)
    p.add_argument("--closed-form", action="store_true",
                   help="cross-check against the constant birth-death closed form")
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("bounds", help="two-sided envelope report")
    _common(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("verify", help="randomized trajectory verification")
    _common(p, verify=True)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ModelFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (RateEvaluationError, OdeBlowUpError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EVAL
    except InhomogeneousChainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INHOMOGENEOUS
    except ReducibleMatrixError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REDUCIBLE
    except SharpnessConditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONDITIONS


if __name__ == "__main__":
    sys.exit(main())
