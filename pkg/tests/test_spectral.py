import math

import numpy as np
import pytest

import ctmc_bounds as cb
from conftest import CLASS_KINDS, random_sharp_chain


def _bstar(spec, t=0.0):
    return cb.to_bstar(cb.build_reduced(spec, t))


def test_column_sum_bounds_arithmetic():
    res = cb.column_sum_bounds(np.array([[-1.0, 0.0], [1.0, -3.0]]))
    assert res.sums == (0.0, -3.0)
    assert res.h_max == 0.0 and res.h_min == -3.0


def test_column_sum_bounds_symmetric_chain():
    spec = cb.birth_death_chain(2, [1.0, 1.0], [1.0, 1.0])
    res = cb.column_sum_bounds(_bstar(spec))
    assert res.sums == (-1.0, -1.0)
    assert res.h_max == res.h_min == -1.0


def test_irreducibility():
    assert cb.check_irreducible(np.array([[-1.0, 1.0], [1.0, -1.0]]))
    assert not cb.check_irreducible(np.array([[-1.0, 0.0], [1.0, -1.0]]))
    assert cb.check_irreducible(np.array([[5.0]]))
    spec = cb.birth_death_chain(4, [1.0, 2.0, 0.5, 1.5], [1.0, 1.0, 2.0, 0.3])
    assert cb.check_irreducible(_bstar(spec))


def test_perron_matches_closed_form_birth_death():
    for a in (0.5, 1.0, 2.0):
        for b in (0.5, 1.0, 2.0):
            for S in (1, 2, 4, 6):
                spec = cb.birth_death_chain(S, [a] * S, [b] * S)
                rate = cb.perron_weights(_bstar(spec))
                beta, _ = cb.closed_form_bd(a, b, S)
                assert abs(rate.lambda0 + beta) <= 1e-9, (a, b, S)
                assert rate.lambda0 < 0.0


def test_perron_single_state():
    spec = cb.birth_death_chain(1, [1.5], [2.5])
    rate = cb.perron_weights(_bstar(spec))
    assert rate.lambda0 == pytest.approx(-4.0, abs=1e-12)
    assert np.allclose(rate.weights, [1.0])


def test_perron_equalizes_column_sums():
    rng = np.random.default_rng(17)
    for kind in CLASS_KINDS:
        spec = random_sharp_chain(rng, kind, 6)
        B = _bstar(spec)
        rate = cb.perron_weights(B)
        sums = cb.apply_weights(B, rate.weights).sum(axis=0)
        assert sums.max() - sums.min() <= 1e-9 * abs(rate.lambda0)
        assert np.allclose(sums, rate.lambda0, atol=1e-8 * abs(rate.lambda0))
        assert rate.residual < 1e-10
        assert rate.lambda0 < 0.0


def test_perron_weights_unique_across_starts():
    rng = np.random.default_rng(23)
    spec = random_sharp_chain(rng, "batch_both", 7)
    B = _bstar(spec)
    d1 = cb.perron_weights(B, x0=rng.uniform(0.1, 1.0, 7)).weights
    d2 = cb.perron_weights(B, x0=rng.uniform(0.1, 1.0, 7)).weights
    assert np.abs(d1 / d1[0] - d2 / d2[0]).max() <= 1e-8


def test_perron_rejects_reducible_and_not_nonnegative():
    with pytest.raises(cb.ReducibleMatrixError):
        cb.perron_weights(np.array([[-1.0, 0.0], [1.0, -1.0]]))
    with pytest.raises(ValueError):
        cb.perron_weights(np.array([[-1.0, -0.5], [1.0, -1.0]]))


def test_perron_x0_validation():
    B = _bstar(cb.birth_death_chain(2, [1.0, 1.0], [1.0, 1.0]))
    with pytest.raises(ValueError):
        cb.perron_weights(B, x0=np.zeros(2))
    with pytest.raises(ValueError):
        cb.perron_weights(B, x0=np.ones(3))


def test_perron_decay_matches_trajectory_fit():
    # the sharp rate must equal the observed exponential decay of the norm
    rng = np.random.default_rng(41)
    spec = random_sharp_chain(rng, "batch_birth", 6)
    rate = cb.perron_weights(_bstar(spec))
    w0 = rng.uniform(0.1, 1.0, 6)
    traj = cb.solve("transformed", spec, w0, tmax=2.0, n_steps=4000,
                    weights=rate.weights)
    norms = np.abs(traj.states).sum(axis=1)
    fitted = math.log(norms[-1] / norms[0]) / 2.0
    assert abs(fitted - rate.lambda0) <= 1e-6 * abs(rate.lambda0)


def test_sharpness_conditions_per_class():
    ok4 = cb.batch_both_chain(3, [2.0, 1.0, 0.5], [3.0, 1.0, 0.5])
    assert cb.check_sharpness_conditions(ok4).passed

    tie = cb.batch_birth_chain(3, [1.0, 1.0, 0.5], [1.0, 1.0, 1.0])
    rep = cb.check_sharpness_conditions(tie)
    assert not rep.passed and "a_2 < a_1" in rep.failures[0]

    dead = cb.birth_death_chain(2, [1.0, 1.0], [1.0, 0.0])
    assert not cb.check_sharpness_conditions(dead).passed

    single = cb.batch_both_chain(1, [1.0], [1.0])
    assert cb.check_sharpness_conditions(single).passed

    general = cb.general_chain(1, {(0, 1): 1.0, (1, 0): 1.0})
    assert not cb.check_sharpness_conditions(general).passed


def test_sharpness_conditions_need_homogeneous():
    lam = cb.RateFunction.sinusoid(1.0, 0.5, 1.0)
    spec = cb.birth_death_chain(2, [lam, 1.0], [1.0, 1.0])
    with pytest.raises(cb.InhomogeneousChainError):
        cb.check_sharpness_conditions(spec)


def test_closed_form_values():
    beta, g = cb.closed_form_bd(1.0, 1.0, 3)
    assert beta == pytest.approx(2.0 - math.sqrt(2.0), abs=1e-15)
    assert g == pytest.approx(2.0 + math.sqrt(2.0), abs=1e-15)


def test_closed_form_large_population_limit():
    beta, _ = cb.closed_form_bd(2.0, 0.5, 10_000)
    assert abs(beta - (math.sqrt(2.0) - math.sqrt(0.5)) ** 2) <= 1e-6


def test_closed_form_validation():
    with pytest.raises(ValueError):
        cb.closed_form_bd(0.0, 1.0, 3)
    with pytest.raises(ValueError):
        cb.closed_form_bd(1.0, 1.0, 0)


def test_extreme_eigenvalues_toeplitz():
    # eigenvalues of the negated transform of the constant chain are
    # a + b - 2 sqrt(ab) cos(k pi / (S+1)), k = 1..S
    for a, b, S in ((1.0, 1.0, 3), (2.0, 0.5, 5), (0.5, 2.0, 4)):
        spec = cb.birth_death_chain(S, [a] * S, [b] * S)
        lo, hi = cb.extreme_real_eigenvalues(-_bstar(spec), tol=1e-13)
        beta, g = cb.closed_form_bd(a, b, S)
        assert abs(lo - beta) <= 1e-8
        assert abs(hi - g) <= 1e-8


def test_dominant_eigenvalue_simple():
    M = np.diag([1.0, -3.0, 2.0])
    assert cb.dominant_eigenvalue(M) == pytest.approx(-3.0, abs=1e-10)
