import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hydronozzle.errors import DegenerateWidth, OutsideNozzle
from hydronozzle.geometry import (Flat, Slanted, bump, bump_deriv, flatten, make_geometry,
                                  smooth_step, smooth_step_deriv, tabulated_geometry,
                                  validate_assumptions)


@pytest.mark.parametrize("kind", ["strip", "tanh", "bump", "slanted"])
def test_families_validate(kind):
    g = make_geometry(kind)
    rep = validate_assumptions(g)
    assert rep.passed, rep.residuals


def test_compact_bump_is_exactly_flat_outside_support():
    g = make_geometry("bump", a=0.2, sigma=1.5, half_width=5.0)
    left = np.linspace(-20, -5, 200)
    right = np.linspace(5, 20, 200)
    assert np.all(g.s0(left) == 0.0) and np.all(g.s1(left) == 1.0)
    assert np.all(g.s0(right) == 0.2) and np.all(g.s1(right) == 1.7)
    assert np.all(g.dalpha(left) == 0.0) and np.all(g.dalpha(right) == 0.0)


def test_smooth_step_derivatives():
    x = np.linspace(-4.9, 4.9, 97)
    h = 1e-6
    fd = (smooth_step(x + h, 5.0) - smooth_step(x - h, 5.0)) / (2 * h)
    assert np.max(np.abs(fd - smooth_step_deriv(x, 5.0))) < 1e-8
    fd = (bump(x + h, 5.0) - bump(x - h, 5.0)) / (2 * h)
    assert np.max(np.abs(fd - bump_deriv(x, 5.0))) < 1e-8


@pytest.mark.parametrize("kind", ["tanh", "bump", "slanted"])
def test_wall_derivatives(kind):
    g = make_geometry(kind)
    x = np.linspace(-7, 7, 141)
    h = 1e-6
    for s, ds in ((g.s0, g.ds0), (g.s1, g.ds1)):
        assert np.max(np.abs((s(x + h) - s(x - h)) / (2 * h) - ds(x))) < 1e-7


@settings(max_examples=50, deadline=None)
@given(st.floats(-20, 20), st.floats(0, 1))
def test_flatten_roundtrip(x1, y2):
    g = make_geometry("bump", a=0.3, sigma=1.2)
    X1, X2 = g.unflatten(x1, y2)
    Y1, Y2 = flatten(g, X1, X2)
    assert Y1 == x1 and abs(Y2 - y2) < 1e-13


def test_flatten_outside():
    g = make_geometry("strip")
    with pytest.raises(OutsideNozzle):
        flatten(g, 0.0, 1.01)


def test_degenerate_width():
    with pytest.raises(DegenerateWidth):
        make_geometry("bump", amp0=0.6, amp1=-0.6)


def test_a3_detects_wrong_downstream():
    g = make_geometry("tanh", a=0.0, sigma=1.5)
    assert validate_assumptions(g).clauses["A3"]
    assert not validate_assumptions(g, downstream=Flat(0.0, 2.0)).clauses["A3"]


def test_slanted_asymptote():
    g = make_geometry("slanted", b0=0.5, b1=1.0)
    assert isinstance(g.downstream, Slanted)
    x = np.array([10.0])
    assert np.allclose(g.width(x), np.sqrt(2.0))
    assert np.allclose(g.s0(x), 10.5)
    assert validate_assumptions(g).passed


def test_tabulated_geometry():
    x = np.linspace(-5, 5, 41)
    g = tabulated_geometry(x, 0.1 * (1 + np.tanh(x)), 1 + 0.3 * (1 + np.tanh(x)))
    assert validate_assumptions(g, tol=1e-3).clauses["A1"]
    assert g.ds0(np.array(10.0)) == 0.0
