"""Nozzle walls, the flattening map and checks of the structural assumptions."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import interpolate

from .errors import DegenerateWidth, OutsideNozzle

DEFAULT_CUTOFF = 20.0
WALL_TOL = 1e-14


@dataclass(frozen=True)
class Flat:
    """Downstream walls tend to (a, a + sigma)."""

    a: float = 0.0
    sigma: float = 1.0


@dataclass(frozen=True)
class Slanted:
    """Downstream walls tend to b0 + b1*x1 and b0 + sqrt(b1^2 + 1) + b1*x1."""

    b0: float = 0.0
    b1: float = 1.0

    @property
    def width(self) -> float:
        return float(np.hypot(self.b1, 1.0))


@dataclass(frozen=True)
class NozzleGeometry:
    s0: Callable
    s1: Callable
    ds0: Callable
    ds1: Callable
    downstream: Flat | Slanted
    x_cutoff: float = DEFAULT_CUTOFF
    family: str = "custom"
    params: tuple = ()

    def width(self, x1):
        return self.s1(x1) - self.s0(x1)

    def dwidth(self, x1):
        return self.ds1(x1) - self.ds0(x1)

    def alpha(self, x1):
        """Squared width s^2, the coefficient of the flattened equation."""
        return self.width(x1) ** 2

    def dalpha(self, x1):
        """(s^2)' = 2 s s'."""
        return 2.0 * self.width(x1) * self.dwidth(x1)

    def unflatten(self, y1, y2):
        y1 = np.asarray(y1, dtype=float)
        y2 = np.asarray(y2, dtype=float)
        return y1, (1.0 - y2) * self.s0(y1) + y2 * self.s1(y1)


def flatten(g: NozzleGeometry, x1, x2):
    """Map nozzle points to the unit strip: y1 = x1, y2 = (x2 - s0)/s."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    lo, hi = g.s0(x1), g.s1(x1)
    slack = WALL_TOL * (1.0 + np.abs(lo) + np.abs(hi))
    if np.any(x2 < lo - slack) or np.any(x2 > hi + slack):
        raise OutsideNozzle("point outside the nozzle walls")
    return x1, np.clip((x2 - lo) / (hi - lo), 0.0, 1.0)


# smooth compact transitions: exactly flat outside [-L, L]

def _psi(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def _dpsi(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos]) / t[pos] ** 2
    return out


def smooth_step(x, half_width):
    """C-infinity step: 0 for x <= -L, 1 for x >= L."""
    t = (np.asarray(x, dtype=float) + half_width) / (2.0 * half_width)
    a, b = _psi(t), _psi(1.0 - t)
    return a / (a + b)


def smooth_step_deriv(x, half_width):
    t = (np.asarray(x, dtype=float) + half_width) / (2.0 * half_width)
    a, b = _psi(t), _psi(1.0 - t)
    da, db = _dpsi(t), -_dpsi(1.0 - t)
    return (da * b - a * db) / (a + b) ** 2 / (2.0 * half_width)


def bump(x, half_width):
    """Compactly supported Gaussian-like bump exp(1 - 1/(1 - (x/L)^2)), peak 1."""
    u = np.asarray(x, dtype=float) / half_width
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
    return out


def bump_deriv(x, half_width):
    u = np.asarray(x, dtype=float) / half_width
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    w = 1.0 - u[inside] ** 2
    out[inside] = np.exp(1.0 - 1.0 / w) * (-2.0 * u[inside] / w**2) / half_width
    return out


def _tanh_step(x, length):
    return 0.5 * (1.0 + np.tanh(np.asarray(x, dtype=float) / length))


def _tanh_step_deriv(x, length):
    return 0.5 / length / np.cosh(np.asarray(x, dtype=float) / length) ** 2


def make_geometry(kind: str, cutoff: float = DEFAULT_CUTOFF, **params) -> NozzleGeometry:
    """Builtin nozzle families.

    * ``strip``: s0 = 0, s1 = 1.
    * ``tanh``: tanh transition of length ``length`` from (0, 1) to (a, a + sigma).
    * ``bump``: compactly flat nozzle; bumps of amplitude ``amp0``/``amp1`` on
      the walls plus a smooth step to (a, a + sigma), all supported in
      [-half_width, half_width].
    * ``slanted``: walls blend into lines of slope ``b1`` and width
      sqrt(b1^2 + 1) beyond ``half_width``.
    """
    if kind == "strip":
        zero = lambda x: np.zeros_like(np.asarray(x, dtype=float))  # noqa: E731
        one = lambda x: np.ones_like(np.asarray(x, dtype=float))  # noqa: E731
        g = NozzleGeometry(zero, one, zero, zero, Flat(0.0, 1.0), cutoff, kind, ())
    elif kind == "tanh":
        a = float(params.get("a", 0.0))
        sigma = float(params.get("sigma", 1.5))
        ell = float(params.get("length", 1.0))
        g = NozzleGeometry(
            lambda x: a * _tanh_step(x, ell),
            lambda x: 1.0 + (a + sigma - 1.0) * _tanh_step(x, ell),
            lambda x: a * _tanh_step_deriv(x, ell),
            lambda x: (a + sigma - 1.0) * _tanh_step_deriv(x, ell),
            Flat(a, sigma),
            cutoff,
            kind,
            (("a", a), ("sigma", sigma), ("length", ell)),
        )
    elif kind == "bump":
        a = float(params.get("a", 0.0))
        sigma = float(params.get("sigma", 1.0))
        amp0 = float(params.get("amp0", 0.15))
        amp1 = float(params.get("amp1", -0.1))
        L = float(params.get("half_width", 5.0))
        g = NozzleGeometry(
            lambda x: a * smooth_step(x, L) + amp0 * bump(x, L),
            lambda x: 1.0 + (a + sigma - 1.0) * smooth_step(x, L) + amp1 * bump(x, L),
            lambda x: a * smooth_step_deriv(x, L) + amp0 * bump_deriv(x, L),
            lambda x: (a + sigma - 1.0) * smooth_step_deriv(x, L) + amp1 * bump_deriv(x, L),
            Flat(a, sigma),
            cutoff,
            kind,
            (("a", a), ("sigma", sigma), ("amp0", amp0), ("amp1", amp1), ("half_width", L)),
        )
    elif kind == "slanted":
        b0 = float(params.get("b0", 0.0))
        b1 = float(params.get("b1", 1.0))
        L = float(params.get("half_width", 5.0))
        w = float(np.hypot(b1, 1.0))

        def s0(x):
            x = np.asarray(x, dtype=float)
            return smooth_step(x, L) * (b0 + b1 * x)

        def s1(x):
            x = np.asarray(x, dtype=float)
            S = smooth_step(x, L)
            return (1.0 - S) + S * (b0 + w + b1 * x)

        def ds0(x):
            x = np.asarray(x, dtype=float)
            return smooth_step_deriv(x, L) * (b0 + b1 * x) + smooth_step(x, L) * b1

        def ds1(x):
            x = np.asarray(x, dtype=float)
            dS = smooth_step_deriv(x, L)
            return dS * (b0 + w + b1 * x - 1.0) + smooth_step(x, L) * b1

        g = NozzleGeometry(
            s0, s1, ds0, ds1, Slanted(b0, b1), cutoff, kind,
            (("b0", b0), ("b1", b1), ("half_width", L)),
        )
    else:
        raise ValueError(f"unknown geometry family {kind!r}")
    _check_width(g)
    return g


def tabulated_geometry(x1, s0, s1, cutoff: float = DEFAULT_CUTOFF) -> NozzleGeometry:
    """Walls from sampled tables (monotone cubic, flat outside the table)."""
    x1 = np.asarray(x1, dtype=float)
    p0 = interpolate.PchipInterpolator(x1, np.asarray(s0, dtype=float), extrapolate=False)
    p1 = interpolate.PchipInterpolator(x1, np.asarray(s1, dtype=float), extrapolate=False)
    d0, d1 = p0.derivative(), p1.derivative()
    lo, hi = x1[0], x1[-1]

    def clamp(p, deriv=False):
        def ev(x):
            x = np.asarray(x, dtype=float)
            out = p(np.clip(x, lo, hi))
            if deriv:
                out = np.where((x < lo) | (x > hi), 0.0, out)
            return out
        return ev

    end0, end1 = float(s0[-1]), float(s1[-1])
    g = NozzleGeometry(
        clamp(p0), clamp(p1), clamp(d0, True), clamp(d1, True),
        Flat(end0, end1 - end0), cutoff, "table", (),
    )
    _check_width(g)
    return g


def _check_width(g: NozzleGeometry, samples: int = 10_001) -> None:
    x = np.linspace(-g.x_cutoff, g.x_cutoff, samples)
    w = g.width(x)
    if not np.all(np.isfinite(w)) or np.min(w) <= 0.0:
        raise DegenerateWidth(f"min width {np.min(w):.6g} <= 0 for {g.family!r}")


@dataclass
class AssumptionReport:
    clauses: dict
    residuals: dict

    @property
    def passed(self) -> bool:
        return all(self.clauses.values())


def validate_assumptions(
    g: NozzleGeometry,
    tol: float = 1e-8,
    downstream: Flat | Slanted | None = None,
    samples: int = 10_001,
) -> AssumptionReport:
    """Numerical check of the wall assumptions on [-X, X].

    A1: positive width everywhere; A2: upstream limits (0, 1); A3: downstream
    limits per ``downstream`` (defaults to the geometry's own descriptor);
    ``upstream_slopes``: s0', s1' vanish at -X.
    """
    X = g.x_cutoff
    kind = downstream if downstream is not None else g.downstream
    x = np.linspace(-X, X, samples)
    w = g.width(x)
    xl, xr = np.array(-X), np.array(X)
    res = {
        "min_width": float(np.min(w)),
        "max_width": float(np.max(w)),
        "upstream": float(max(abs(g.s0(xl)), abs(g.s1(xl) - 1.0))),
        "upstream_slopes": float(max(abs(g.ds0(xl)), abs(g.ds1(xl)))),
    }
    if isinstance(kind, Flat):
        res["downstream"] = float(max(abs(g.s0(xr) - kind.a), abs(g.s1(xr) - kind.a - kind.sigma)))
        res["downstream_slopes"] = float(max(abs(g.ds0(xr)), abs(g.ds1(xr))))
    else:
        res["downstream"] = float(max(
            abs(g.s0(xr) - kind.b0 - kind.b1 * X),
            abs(g.s1(xr) - kind.b0 - kind.width - kind.b1 * X),
        ))
        res["downstream_slopes"] = float(max(abs(g.ds0(xr) - kind.b1), abs(g.ds1(xr) - kind.b1)))
    clauses = {
        "A1": res["min_width"] > 0.0 and np.isfinite(res["max_width"]),
        "A2": res["upstream"] <= tol,
        "A3": res["downstream"] <= tol and res["downstream_slopes"] <= tol,
        "upstream_slopes": res["upstream_slopes"] <= tol,
    }
    return AssumptionReport(clauses={k: bool(v) for k, v in clauses.items()}, residuals=res)
