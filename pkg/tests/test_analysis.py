from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hydronozzle.analysis import (Counterexample, SampledField, convergence_order,
                                  convergence_report, farfield_state, liouville_check, residuals,
                                  residuals_from_samples)
from hydronozzle.field import assemble, reconstruct
from hydronozzle.geometry import make_geometry
from hydronozzle.profiles import build_profile, vorticity_source

import corpus


@pytest.fixture(scope="module")
def strip_quartic(quartic_src):
    g = make_geometry("strip", cutoff=5.0)
    return reconstruct(assemble(g, quartic_src, ny1=100, ny2=200), g, quartic_src)


def test_strip_constant_residuals():
    src = vorticity_source(build_profile("constant"))
    g = make_geometry("strip", cutoff=3.0)
    r = residuals(reconstruct(assemble(g, src, ny1=60, ny2=60), g, src))
    assert all(v["sup"] <= 1e-12 for v in r.values())


def test_counterexample_at_quarter():
    r = Counterexample().analytic_residuals(np.array([0.0]), np.array([0.25]))
    for k in ("momentum", "hydrostatic", "divergence", "vorticity"):
        assert abs(r[k][0]) < 1e-13


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 1), st.floats(0, 1))
def test_counterexample_residuals_vanish(x1, x2):
    r = Counterexample().analytic_residuals(np.array([x1]), np.array([x2]))
    for k in ("momentum", "hydrostatic", "divergence", "vorticity"):
        assert abs(r[k][0]) <= 1e-12


def test_counterexample_vorticity_is_function_of_phi():
    ce = Counterexample()
    x1, x2 = np.meshgrid(np.linspace(-1, 1, 9), np.linspace(0, 1, 9))
    assert np.max(np.abs(ce.omega(x1, x2) + np.pi**2 * ce.phi(x1, x2))) < 1e-12
    v1, v2 = ce.velocity(x1, x2)
    assert np.max(np.abs(v2[0, :])) == 0.0


def test_counterexample_fd_residuals_second_order():
    # the finite-difference checker on the analytic field converges at order 2
    ce = Counterexample()
    out = []
    for n in (40, 80):
        x1 = np.linspace(0, 1, n + 1)
        x2 = np.linspace(0, 1, n + 1)
        X1, X2 = np.meshgrid(x1, x2, indexing="ij")
        v1, v2 = ce.velocity(X1, X2)
        data = {"x1": X1, "x2": X2, "y2": X2, "v1": v1, "v2": v2,
                "p": ce.pressure(X1, X2), "omega": ce.omega(X1, X2)}
        out.append(residuals_from_samples(data))
    order = convergence_order(*out)
    assert order["hydrostatic"] == float("inf")
    for k in ("momentum", "divergence", "vorticity"):
        assert order[k] > 1.8


def test_shear_confirmed_on_strip(strip_quartic):
    rep = liouville_check(strip_quartic)
    assert rep.status == "shear" and rep.confirmed
    assert rep.v2_sup <= 1e-10 and rep.spread <= 1e-10
    assert not rep.theorem_applicable


def test_corrupted_column_localized(strip_quartic):
    v1 = strip_quartic.v1.copy()
    v1[42] *= 1.001
    rep = liouville_check(replace(strip_quartic, v1=v1))
    assert rep.status == "non_shear"
    assert strip_quartic.x1[42, 0] in rep.violating_columns
    assert len(rep.violating_columns) <= 3


def test_counterexample_hypothesis_not_met():
    rep = liouville_check(Counterexample().sample(101, 101, (0.0, 1.0)))
    assert rep.status == "hypothesis_not_met"
    assert rep.min_speed >= 1.0 - 1e-12
    assert rep.v2_sup > 1.0


def test_low_speed_hypothesis_not_met():
    x1, x2 = np.meshgrid(np.linspace(0, 1, 11), np.linspace(0, 1, 11), indexing="ij")
    f = SampledField(x1, x2, np.full_like(x1, 1e-4), np.zeros_like(x1))
    assert liouville_check(f).status == "hypothesis_not_met"


def test_liouville_needs_strip(quartic_src, bump_geometry):
    fl = reconstruct(assemble(bump_geometry, quartic_src, ny1=60, ny2=60), bump_geometry, quartic_src)
    with pytest.raises(ValueError):
        liouville_check(fl)


def test_farfield_zero_vorticity():
    src = corpus.zero_source(1.0)
    g = make_geometry("tanh", sigma=2.0)
    st_ = farfield_state(src, g, "downstream")
    x2 = np.linspace(0, 2, 11)
    assert np.max(np.abs(st_.v1_limit(x2) - 0.5)) < 1e-14
    assert st_.alpha1 == 4.0


def test_farfield_upstream_recovers_profile(quartic, quartic_src, bump_geometry):
    up = farfield_state(quartic_src, bump_geometry, "upstream")
    x2 = np.linspace(0, 1, 101)
    assert np.max(np.abs(up.v1_limit(x2) - quartic.v1m(x2))) <= 1e-8
    assert np.max(np.abs(up.phi_limit(x2) - quartic.cumulative(x2))) <= 1e-8
    assert abs(up.flux - quartic_src.c) < 1e-10


def test_farfield_slanted(quartic_src):
    g = make_geometry("slanted", b0=0.3, b1=1.0)
    dn = farfield_state(quartic_src, g, "downstream")
    assert dn.alpha1 == pytest.approx(2.0, abs=1e-15)
    assert dn.width == pytest.approx(np.sqrt(2.0))
    x2 = np.linspace(*dn.interval, 9)
    assert np.array_equal(dn.v2_limit(x2), dn.v1_limit(x2))
    assert abs(dn.flux - quartic_src.c) <= 1e-8 * quartic_src.c


def test_convergence_report_tanh_zero_vorticity():
    src = vorticity_source(build_profile("constant"))
    g = make_geometry("tanh", sigma=2.0)
    fl = reconstruct(assemble(g, src, ny1=80, ny2=60), g, src)
    tab = convergence_report(fl, farfield_state(src, g, "upstream"), farfield_state(src, g, "downstream"))
    s = g.width(tab.x1)
    assert np.max(np.abs(tab.e_up - np.abs(1 / s - 1))) < 1e-13
    assert np.max(np.abs(tab.e_down - np.abs(1 / s - 0.5))) < 1e-13
    assert tab.decaying()


def test_convergence_report_strip_zero(strip_quartic, quartic_src):
    g = make_geometry("strip", cutoff=5.0)
    up = farfield_state(quartic_src, g, "upstream")
    tab = convergence_report(strip_quartic, up, farfield_state(quartic_src, g, "downstream"))
    assert np.max(tab.e_up) < 1e-13 and np.max(tab.e_down) < 1e-13


def test_convergence_order_floor():
    a = {"x": {"sup": 1e-13}, "y": {"sup": 4e-4}}
    b = {"x": {"sup": 3e-13}, "y": {"sup": 1e-4}}
    o = convergence_order(a, b)
    assert o["x"] == float("inf") and abs(o["y"] - 2.0) < 1e-12
