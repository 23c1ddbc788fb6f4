import math

import numpy as np
import pytest

import ctmc_bounds as cb
from conftest import random_sharp_chain


def _halfgrid_samples(fn, tmax, n_grid):
    ts = np.linspace(0.0, tmax, 2 * n_grid - 1)
    return fn(ts), tmax / (n_grid - 1)


def test_cumulative_simpson_starts_at_zero_and_is_exact_for_cubics():
    f = lambda t: 2.0 - 3.0 * t + t ** 2 + 0.5 * t ** 3
    F = lambda t: 2.0 * t - 1.5 * t ** 2 + t ** 3 / 3.0 + 0.125 * t ** 4
    vals, step = _halfgrid_samples(f, 2.0, 11)
    out = cb.cumulative_simpson(vals, step)
    grid = np.linspace(0.0, 2.0, 11)
    assert out[0] == 0.0
    assert np.allclose(out, F(grid), atol=1e-13)


def test_cumulative_simpson_sinusoid_over_period():
    # mean * period survives; the oscillation integrates away
    mean, amp = 1.0, 1.0
    f = lambda t: mean + amp * np.sin(2.0 * np.pi * t)
    vals, step = _halfgrid_samples(f, 1.0, 1001)
    out = cb.cumulative_simpson(vals, step)
    assert abs(out[-1] - mean * 1.0) <= 1e-10


def test_cumulative_simpson_preserves_pointwise_order():
    rng = np.random.default_rng(2)
    g = rng.normal(size=41)
    f = g + rng.uniform(0.0, 1.0, 41)
    If = cb.cumulative_simpson(f, 0.1)
    Ig = cb.cumulative_simpson(g, 0.1)
    assert np.all(If >= Ig)


def test_cumulative_simpson_validation():
    with pytest.raises(ValueError):
        cb.cumulative_simpson(np.ones(4), 0.1)   # even sample count
    with pytest.raises(ValueError):
        cb.cumulative_simpson(np.ones(1), 0.1)


def test_cumulative_simpson_componentwise_on_trailing_axes():
    rng = np.random.default_rng(7)
    f = rng.normal(size=(21, 3))
    out = cb.cumulative_simpson(f, 0.25)
    assert out.shape == (11, 3)
    for j in range(3):
        assert np.array_equal(out[:, j], cb.cumulative_simpson(f[:, j], 0.25))


def test_compute_bounds_constant_chain_integrates_linearly():
    spec = cb.birth_death_chain(3, [1.0] * 3, [1.0] * 3)
    rate = cb.perron_weights(cb.to_bstar(cb.build_reduced(spec, 0.0)))
    rep = cb.compute_bounds(spec, rate.weights, tmax=2.0, n_grid=101)
    lam0 = rate.lambda0
    assert np.allclose(rep.h_upper, lam0, atol=1e-12)
    assert np.allclose(rep.h_lower, lam0, atol=1e-12)
    assert np.allclose(rep.I_upper, lam0 * rep.grid, atol=1e-12)
    assert np.allclose(rep.env_upper, np.exp(lam0 * rep.grid), rtol=1e-12)


def test_compute_bounds_envelope_ordering():
    lam = cb.RateFunction.sinusoid(1.0, 1.0, 1.0)
    spec = cb.birth_death_chain(5, [lam] * 5, [1.0] * 5)
    rep = cb.compute_bounds(spec, np.ones(5), tmax=3.0, n_grid=301)
    assert np.all(rep.I_lower <= rep.I_upper + 1e-15)
    assert np.all(rep.env_lower <= rep.env_upper * (1.0 + 1e-15))
    assert rep.I_upper[0] == rep.I_lower[0] == 0.0
    assert not rep.sharp and rep.lambda0 is None


def test_compute_bounds_grid_refinement_is_fourth_order():
    lam = cb.RateFunction.sinusoid(1.0, 1.0, 1.0)
    spec = cb.birth_death_chain(4, [lam] * 4, [1.0] * 4)
    coarse = cb.compute_bounds(spec, np.ones(4), 3.0, 501, checks=False)
    fine = cb.compute_bounds(spec, np.ones(4), 3.0, 1001, checks=False)
    for attr in ("I_upper", "I_lower"):
        c, f = getattr(coarse, attr)[-1], getattr(fine, attr)[-1]
        assert abs(f - c) <= 1e-8 * max(1.0, abs(f)), attr


def test_compute_bounds_warns_on_override_path(nonregular_override_chain):
    rep = cb.compute_bounds(nonregular_override_chain, np.ones(3), 1.0, 51)
    assert len(rep.warnings) == 1
    assert "not regular" in rep.warnings[0]


def test_compute_bounds_rejects_broken_transform():
    # an increasing batch list sinks an off-diagonal entry of the transform
    spec = cb.batch_birth_chain(2, [1.0, 2.0], [1.0, 1.0])
    with pytest.raises(ValueError, match="not essentially non-negative"):
        cb.compute_bounds(spec, np.ones(2), 1.0, 51)


def test_compute_bounds_validation():
    spec = cb.birth_death_chain(2, [1.0, 1.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        cb.compute_bounds(spec, np.ones(2), 0.0, 51)
    with pytest.raises(ValueError):
        cb.compute_bounds(spec, np.ones(2), 1.0, 1)
    with pytest.raises(ValueError):
        cb.compute_bounds(spec, [1.0, -1.0], 1.0, 51)


def test_sharp_report_symmetric_chain():
    spec = cb.birth_death_chain(3, [1.0] * 3, [1.0] * 3)
    rep = cb.sharp_report(spec, tmax=2.0, n_grid=101)
    assert rep.sharp
    assert rep.lambda0 == pytest.approx(-(2.0 - math.sqrt(2.0)), abs=1e-9)
    assert np.allclose(rep.I_upper, rep.I_lower, atol=1e-12)


def test_sharp_report_batch_death_matches_trajectory_decay():
    spec = cb.batch_death_chain(4, [2.0, 1.0, 0.5, 0.25], [1.0] * 4)
    rep = cb.sharp_report(spec, tmax=2.0, n_grid=101)
    assert rep.sharp
    rng = np.random.default_rng(3)
    w0 = rng.uniform(0.1, 1.0, 4)
    traj = cb.solve("transformed", spec, w0, tmax=2.0, n_steps=4000,
                    weights=rep.weights)
    norms = np.abs(traj.states).sum(axis=1)
    fitted = math.log(norms[-1] / norms[0]) / 2.0
    assert abs(fitted - rep.lambda0) <= 1e-6 * abs(rep.lambda0)


def test_sharp_report_single_state_is_diagonal_entry():
    spec = cb.batch_both_chain(1, [0.7], [1.3])
    rep = cb.sharp_report(spec)
    assert rep.sharp and rep.lambda0 == pytest.approx(-2.0, abs=1e-12)


def test_sharp_report_requires_homogeneous_and_conditions():
    lam = cb.RateFunction.sinusoid(1.0, 0.5, 1.0)
    with pytest.raises(cb.InhomogeneousChainError):
        cb.sharp_report(cb.birth_death_chain(2, [lam, 1.0], [1.0, 1.0]))
    with pytest.raises(cb.SharpnessConditionError):
        cb.sharp_report(cb.batch_birth_chain(3, [1.0, 1.0, 0.5], [1.0] * 3))


def test_sharp_report_equals_compute_bounds_with_perron_weights():
    rng = np.random.default_rng(10)
    spec = random_sharp_chain(rng, "batch_death", 5)
    rep = cb.sharp_report(spec, tmax=1.0, n_grid=51)
    manual = cb.compute_bounds(spec, rep.weights, 1.0, 51)
    assert np.array_equal(rep.I_upper, manual.I_upper)
    assert np.array_equal(rep.h_lower, manual.h_lower)


def test_bound_report_csv_round_trip(tmp_path):
    spec = cb.birth_death_chain(2, [1.0, 2.0], [2.0, 1.0])
    rep = cb.compute_bounds(spec, np.ones(2), 1.0, 21)
    path = tmp_path / "report.csv"
    cb.bound_report_to_csv(rep, path)
    text = path.read_text()
    lines = text.strip().split("\n")
    assert lines[0] == "t,h_upper,h_lower,I_upper,I_lower,env_upper,env_lower"
    assert len(lines) == 22
    assert text.endswith("\n") and "\r" not in text
    row = lines[5].split(",")
    k = 4
    assert float(row[0]) == rep.grid[k]
    assert float(row[1]) == rep.h_upper[k]   # 17 digits round-trip exactly
    assert float(row[5]) == rep.env_upper[k]
