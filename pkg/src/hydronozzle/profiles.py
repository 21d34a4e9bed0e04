"""Incoming velocity profile, its stream function and the vorticity function.

The upstream profile ``v1m(x2)`` on [0, 1] fixes everything downstream:
the mass flux ``c``, the inverse ``kappa`` of the cumulative stream function
and the vorticity function ``f = v1m' o kappa`` that appears in the
reduced equation ``phi_{y2 y2} = s^2 f(phi)``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy import interpolate, optimize

from .errors import (
    MissingSecondDerivative,
    NonPositiveProfile,
    OutOfRange,
    SignConditionViolated,
)
from .quadrature import cumulative_panels, integral_from_table, simpson

Evaluator = Callable[[np.ndarray], np.ndarray]

BASE_POINTS = 1001
KAPPA_XTOL = 1e-13


@dataclass(frozen=True)
class IncomingProfile:
    v1m: Evaluator
    dv1m: Evaluator
    d2v1m: Evaluator | None
    c: float
    x_grid: np.ndarray
    cum_table: np.ndarray
    name: str = "custom"
    sign_condition_ok: bool = True
    c_simpson: float = float("nan")
    c_richardson_err: float = float("nan")
    polish: bool = True

    def cumulative(self, x):
        """phi^-(x) = int_0^x v1m, accurate to round-off at any x in [0, 1]."""
        return integral_from_table(self.v1m, self.x_grid, self.cum_table, x)

    def kappa_array(self, phi):
        """Vectorized inverse of :meth:`cumulative` (bracketed Newton).

        Each value is bracketed by a binary search on ``cum_table`` and
        seeded with the cubic Hermite interpolant of the inverse (slopes
        1/v1m). When the build-time check found the seed short of 1e-13*c,
        Newton steps clipped to the bracket polish it.
        """
        phi = np.asarray(phi, dtype=float)
        shape = phi.shape
        t = np.minimum(np.maximum(phi.ravel(), 0.0), self.c)
        xg, cg = self.x_grid, self.cum_table
        i = np.minimum(np.searchsorted(cg, t, side="right") - 1, len(cg) - 2)
        lo, hi = xg[i], xg[i + 1]
        dc = cg[i + 1] - cg[i]
        u = (t - cg[i]) / dc
        k0, k1 = dc / self.v1m(lo), dc / self.v1m(hi)
        h00 = (1 + 2 * u) * (1 - u) ** 2
        h10 = u * (1 - u) ** 2
        h01 = u * u * (3 - 2 * u)
        h11 = u * u * (u - 1)
        x = h00 * lo + h10 * k0 + h01 * hi + h11 * k1
        if self.polish:
            for _ in range(2):
                x = np.minimum(np.maximum(x - (self.cumulative(x) - t) / self.v1m(x), lo), hi)
        return x.reshape(shape)


def _finish_profile(v1m, dv1m, d2v1m, x_grid, name) -> IncomingProfile:
    x_grid = np.asarray(x_grid, dtype=float)
    v = v1m(x_grid)
    if not np.all(np.isfinite(v)) or np.min(v) <= 0.0:
        raise NonPositiveProfile(f"min v1m = {np.min(v):.6g} <= 0 for profile {name!r}")
    d0, d1 = float(dv1m(np.array(0.0))), float(dv1m(np.array(1.0)))
    ok = d0 <= 0.0 <= d1
    if not ok:
        warnings.warn(
            f"profile {name!r}: (v1m)'(0) = {d0:.6g}, (v1m)'(1) = {d1:.6g}; "
            "bounds 0 <= phi <= c are not guaranteed",
            SignConditionViolated,
            stacklevel=3,
        )
    cum = cumulative_panels(v1m, x_grid)
    xs = np.linspace(0.0, 1.0, BASE_POINTS)
    xs2 = np.linspace(0.0, 1.0, 2 * BASE_POINTS - 1)
    s1 = simpson(v1m(xs), xs[1] - xs[0])
    s2 = simpson(v1m(xs2), xs2[1] - xs2[0])
    c = float(cum[-1])
    if c <= 0.0:
        raise NonPositiveProfile("mass flux must be positive")
    if not np.all(np.diff(cum) > 0.0):
        raise NonPositiveProfile("cumulative stream function is not strictly increasing")
    prof = IncomingProfile(
        v1m=v1m,
        dv1m=dv1m,
        d2v1m=d2v1m,
        c=c,
        x_grid=x_grid,
        cum_table=cum,
        name=name,
        sign_condition_ok=ok,
        c_simpson=s2,
        c_richardson_err=abs(s2 - s1) / 15.0,
        polish=True,
    )
    # panel midpoints and quarter points are where the Hermite seed is worst
    probe = np.concatenate([cum[:-1] + q * np.diff(cum) for q in (0.25, 0.5, 0.75)])
    seed = replace(prof, polish=False)
    resid = np.max(np.abs(prof.cumulative(seed.kappa_array(probe)) - probe))
    return replace(prof, polish=bool(resid > 1e-13 * c))


def _closure(v1m, dv1m, d2v1m, name) -> IncomingProfile:
    return _finish_profile(v1m, dv1m, d2v1m, np.linspace(0.0, 1.0, BASE_POINTS), name)


def _samples(x, v, name) -> IncomingProfile:
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if x.ndim != 1 or x.shape != v.shape or len(x) < 9:
        raise ValueError("sample table needs at least 9 (x2, v1) rows")
    order = np.argsort(x)
    x, v = x[order], v[order]
    if abs(x[0]) > 1e-12 or abs(x[-1] - 1.0) > 1e-12:
        raise ValueError("sample table must span x2 in [0, 1]")
    if np.min(v) <= 0.0:
        raise NonPositiveProfile(f"min sampled v1m = {np.min(v):.6g} <= 0")
    x[0], x[-1] = 0.0, 1.0
    p = interpolate.PchipInterpolator(x, v, extrapolate=True)
    dp, d2p = p.derivative(1), p.derivative(2)
    # put the interpolant's knots on the quadrature grid so every panel is smooth
    grid = np.union1d(np.linspace(0.0, 1.0, BASE_POINTS), x)
    grid = grid[np.concatenate(([True], np.diff(grid) > 1e-9))]
    grid[-1] = 1.0
    return _finish_profile(p, dp, d2p, grid, name)


def _builtin(name: str, params: dict) -> IncomingProfile:
    if name == "constant":
        level = float(params.get("level", 1.0))
        return _closure(
            lambda x: np.full_like(np.asarray(x, dtype=float), level),
            lambda x: np.zeros_like(np.asarray(x, dtype=float)),
            lambda x: np.zeros_like(np.asarray(x, dtype=float)),
            name,
        )
    if name == "quartic_bump":
        amp = float(params.get("amplitude", 0.2))
        return _closure(
            lambda x: 1.0 + amp * (np.asarray(x, dtype=float) - 0.5) ** 2,
            lambda x: 2.0 * amp * (np.asarray(x, dtype=float) - 0.5),
            lambda x: np.full_like(np.asarray(x, dtype=float), 2.0 * amp),
            name,
        )
    if name == "linear":
        base = float(params.get("base", 1.0))
        slope = float(params.get("slope", -0.1))
        return _closure(
            lambda x: base + slope * np.asarray(x, dtype=float),
            lambda x: np.full_like(np.asarray(x, dtype=float), slope),
            lambda x: np.zeros_like(np.asarray(x, dtype=float)),
            name,
        )
    raise ValueError(f"unknown builtin profile {name!r}")


def build_profile(spec, dv1m=None, d2v1m=None, *, name=None, **params) -> IncomingProfile:
    """Build and validate an :class:`IncomingProfile`.

    ``spec`` may be a builtin name (``"constant"``, ``"quartic_bump"``,
    ``"linear"``) with keyword parameters, a ``(x2, v1)`` sample table
    (monotone cubic interpolation), or a vectorized callable together with
    its derivative ``dv1m`` and optionally ``d2v1m``.
    """
    if isinstance(spec, str):
        return _builtin(spec, params)
    if callable(spec):
        if dv1m is None:
            raise ValueError("an analytic profile needs its derivative dv1m")
        return _closure(spec, dv1m, d2v1m, name or "custom")
    x, v = spec
    return _samples(x, v, name or "table")


def kappa(p: IncomingProfile, phi: float) -> float:
    """Upstream height whose cumulative flux equals ``phi`` (Brent on one panel)."""
    phi = float(phi)
    if not (0.0 <= phi <= p.c):
        raise OutOfRange(f"phi = {phi!r} outside [0, {p.c!r}]")
    if phi == 0.0:
        return 0.0
    if phi == p.c:
        return 1.0
    i = int(np.clip(np.searchsorted(p.cum_table, phi, side="right") - 1, 0, len(p.cum_table) - 2))
    lo, hi = p.x_grid[i], p.x_grid[i + 1]
    g = lambda x: float(p.cumulative(x)) - phi  # noqa: E731
    glo, ghi = g(lo), g(hi)
    if glo >= 0.0:
        return float(lo)
    if ghi <= 0.0:
        return float(hi)
    return optimize.brentq(g, lo, hi, xtol=KAPPA_XTOL, rtol=4 * np.finfo(float).eps)


@dataclass(frozen=True)
class VorticitySource:
    """Vorticity function ``f`` on [0, c], its constant extension and primitive."""

    c: float
    f: Evaluator
    lip: float
    sup: float
    fprime: Evaluator | None = None
    sign_condition_ok: bool = True
    name: str = "custom"
    _F_inner: Evaluator = field(default=None, repr=False)

    def fhat(self, t):
        return self.f(np.minimum(np.maximum(t, 0.0), self.c))

    def F(self, t):
        """Primitive of ``fhat`` with ``F(0) = 0``."""
        t = np.asarray(t, dtype=float)
        inner = self._F_inner(np.clip(t, 0.0, self.c))
        below = np.minimum(t, 0.0) * self.f(np.array(0.0))
        above = np.maximum(t - self.c, 0.0) * self.f(np.array(self.c))
        return inner + below + above

    @property
    def is_zero(self) -> bool:
        return self.sup == 0.0


def vorticity_source(p: IncomingProfile) -> VorticitySource:
    """Vorticity source ``f = v1m' o kappa`` of a validated profile."""
    xg = p.x_grid
    # F(phi) = int_0^phi f = int_0^kappa(phi) v1m' v1m dx  (substitute phi = phi^-(x))
    integrand = lambda x: p.dv1m(x) * p.v1m(x)  # noqa: E731
    F_table = cumulative_panels(integrand, xg)

    def f(phi):
        return p.dv1m(p.kappa_array(phi))

    def F_inner(phi):
        phi = np.asarray(phi, dtype=float)
        x = p.kappa_array(phi)
        return integral_from_table(integrand, xg, F_table, x)

    dv = p.dv1m(xg)
    if p.d2v1m is not None:
        fp = p.d2v1m(xg) / p.v1m(xg)

        def fprime(phi):
            x = p.kappa_array(phi)
            return p.d2v1m(x) / p.v1m(x)
    else:
        fp = np.diff(dv) / np.diff(p.cum_table)
        fprime = None
    return VorticitySource(
        c=p.c,
        f=f,
        lip=float(np.max(np.abs(fp))),
        sup=float(np.max(np.abs(dv))),
        fprime=fprime,
        sign_condition_ok=p.sign_condition_ok,
        name=p.name,
        _F_inner=F_inner,
    )


def source_from_function(
    f: Evaluator,
    c: float,
    *,
    fprime: Evaluator | None = None,
    F: Evaluator | None = None,
    lip: float | None = None,
    panels: int = 1000,
    name: str = "custom",
) -> VorticitySource:
    """Vorticity source from a vorticity function given directly on [0, c].

    Used for closed-form checks and randomized corpora where ``f`` is not
    derived from a profile. ``F`` defaults to Gauss-Legendre quadrature.
    """
    c = float(c)
    if c <= 0.0:
        raise ValueError("mass flux c must be positive")
    grid = np.linspace(0.0, c, panels + 1)
    vals = f(grid)
    if F is None:
        table = cumulative_panels(f, grid)
        F_inner = lambda t: integral_from_table(f, grid, table, t)  # noqa: E731
    else:
        F_inner = F
    if lip is None:
        fine = np.linspace(0.0, c, 20 * panels + 1)
        if fprime is not None:
            lip = float(np.max(np.abs(fprime(fine))))
        else:
            lip = float(np.max(np.abs(np.diff(f(fine)) / np.diff(fine))))
    f0, fc = float(f(np.array(0.0))), float(f(np.array(c)))
    return VorticitySource(
        c=c,
        f=f,
        lip=float(lip),
        sup=float(np.max(np.abs(vals))),
        fprime=fprime,
        sign_condition_ok=f0 <= 0.0 <= fc,
        name=name,
        _F_inner=F_inner,
    )


def f_prime(p: IncomingProfile, phi) -> np.ndarray:
    """``f'(phi) = v1m''(kappa) / v1m(kappa)``; cross-check for differenced ``f``."""
    if p.d2v1m is None:
        raise MissingSecondDerivative(f"profile {p.name!r} has no second derivative")
    phi = np.asarray(phi, dtype=float)
    if np.any(phi < 0.0) or np.any(phi > p.c):
        raise OutOfRange("phi outside [0, c]")
    x = p.kappa_array(phi)
    return p.d2v1m(x) / p.v1m(x)
