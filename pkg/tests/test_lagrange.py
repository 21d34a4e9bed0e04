import numpy as np
import pytest
from hypothesis import example, given, settings
from hypothesis import strategies as st

import corpus
from hydronozzle.errors import InversionFailure
from hydronozzle.lagrange import (build_lagrange_slice, dPhi_dz1, invert_to_slice, lagrange_tables,
                                  normalization, solve_beta, transformed_residual)
from hydronozzle.slice_solver import shooting_solve


def test_zero_source_beta_is_c_squared():
    for c in (0.5, 1.0, 1.7):
        src = corpus.zero_source(c)
        assert abs(solve_beta(2.3, src) - c * c) < 1e-13 * c * c
        L = build_lagrange_slice(2.3, src)
        assert np.max(np.abs(L.Phi - L.grid / c)) < 1e-14
        assert np.max(np.abs(L.psi - 1 / c)) < 1e-14
        sol = invert_to_slice(L)
        assert np.max(np.abs(sol.phi - c * sol.grid)) < 1e-14
        assert np.all(dPhi_dz1(L, 5.0) == 0.0)


def test_sinh_beta_is_squared_wall_slope(sinh_src):
    # psi(0) = 1/phi'(0) and psi(0)^-2 = beta  ->  beta = phi'(0)^2
    beta = solve_beta(1.0, sinh_src)
    assert abs(beta - corpus.sinh_exact_slope(0.0) ** 2) < 1e-13
    assert abs(beta - 1.1706735942077918) < 1e-13


def test_sinh_slice(sinh_src):
    L = build_lagrange_slice(1.0, sinh_src)
    assert abs(L.Phi_at(np.array(0.5)) - 0.5) < 1e-14
    sol = invert_to_slice(L)
    assert np.max(np.abs(sol.phi - corpus.sinh_exact(sol.grid))) < 1e-8
    assert np.max(np.abs(L.Phi_at(sol.phi) - sol.grid)) < 1e-10
    assert np.max(np.abs(L.psi_at(sol.phi) * sol.dphi - 1.0)) < 1e-10


def test_inversion_failure_on_corrupted_table(sinh_src):
    from dataclasses import replace
    L = build_lagrange_slice(1.0, sinh_src)
    bad = L.Phi.copy()
    bad[10] = bad[12]
    with pytest.raises(InversionFailure):
        replace(L, Phi=bad).phi_at(np.array([0.3]))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_normalization_monotone_in_beta(seed):
    rng = np.random.default_rng(seed)
    alpha1, src = corpus.random_instance(rng)
    tab = lagrange_tables(src, 200)
    beta = solve_beta(alpha1, src, tables=tab)
    for d in (1e-3, 1e-1, 1.0):
        assert normalization(alpha1, beta + d, tab) < normalization(alpha1, beta, tab)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
@example(316)  # steep instance where the differenced residual is largest
def test_slice_invariants(seed):
    alpha1, src = corpus.random_instance(np.random.default_rng(seed))
    L = build_lagrange_slice(alpha1, src)
    assert np.all(2 * alpha1 * L.Fcum + L.beta > 0.0)
    assert L.Phi[0] == 0.0 and abs(L.Phi[-1] - 1.0) < 1e-13
    assert np.all(np.diff(L.Phi) > 0.0)
    # the residual differences Phi on the table, so it is only O(h^4) small
    r400 = np.max(np.abs(transformed_residual(L)))
    r200 = np.max(np.abs(transformed_residual(build_lagrange_slice(alpha1, src, n=200))))
    assert r400 < 1e-5
    assert r400 < 1e-10 or r200 / r400 > 8.0
    sol = invert_to_slice(L)
    assert np.max(np.abs(L.Phi_at(sol.phi) - sol.grid)) < 1e-10


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_dPhi_dz1_matches_alpha_differences(seed):
    alpha1, src = corpus.random_instance(np.random.default_rng(seed))
    tab = lagrange_tables(src, 400)
    h = 1e-4 * alpha1
    L = build_lagrange_slice(alpha1, src, tables=tab)
    Lp = build_lagrange_slice(alpha1 + h, src, tables=tab)
    Lm = build_lagrange_slice(alpha1 - h, src, tables=tab)
    fd = (Lp.Phi - Lm.Phi) / (2 * h)
    assert np.max(np.abs(dPhi_dz1(L, 1.0) - fd)) < 1e-6
    assert abs(L.dbeta_dalpha1 - (Lp.beta - Lm.beta) / (2 * h)) < 1e-6


def test_dPhi_decay_bound(quartic_src):
    # |dPhi/dz1| <= (c/2)(2 c sup|f| + |dbeta/dalpha1|) |(s^2)'| / gamma^3
    c = quartic_src.c
    for alpha1 in (0.5, 1.0, 2.25, 4.0):
        L = build_lagrange_slice(alpha1, quartic_src)
        gamma = float(np.min(1.0 / L.psi))
        bound = 0.5 * c * (2 * c * quartic_src.sup + abs(L.dbeta_dalpha1)) / gamma**3
        assert np.max(np.abs(dPhi_dz1(L, 1.0))) <= bound


def test_matches_shooting(quartic_src):
    sol = invert_to_slice(build_lagrange_slice(2.0, quartic_src))
    ref = shooting_solve(2.0, quartic_src)
    assert np.max(np.abs(sol.phi - ref.phi)) < 1e-6


def test_quartic_upstream_slice_recovers_profile(quartic, quartic_src):
    sol = invert_to_slice(build_lagrange_slice(1.0, quartic_src))
    assert np.max(np.abs(quartic.kappa_array(sol.phi) - sol.grid)) < 1e-12
    assert np.max(np.abs(sol.dphi - quartic.v1m(sol.grid))) < 1e-12
