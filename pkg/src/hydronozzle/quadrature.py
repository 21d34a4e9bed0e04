"""Quadrature helpers shared by the profile, slice and Lagrange modules.

Two families are used:

* Gauss-Legendre panels (8 nodes) for integrals that must be evaluated at
  arbitrary upper limits, e.g. ``Phi(z)`` between table nodes.
* Fixed-grid formulas on uniform nodes (composite Simpson and a 4th-order
  cumulative rule) for quantities only needed at the nodes.
"""
from __future__ import annotations

import numpy as np
from scipy import integrate

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)
# nodes/weights mapped to [0, 1]
GL_NODES = 0.5 * (_GL_X + 1.0)
GL_WEIGHTS = 0.5 * _GL_W


def gl_points(a, b):
    """Gauss-Legendre abscissae for each interval [a_k, b_k], shape (K, 8)."""
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    return a + (b - a) * GL_NODES


def gl_sum(values, a, b):
    """Combine integrand samples at :func:`gl_points` into interval integrals."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return (b - a) * (values @ GL_WEIGHTS)


def gl_integrate(func, a, b):
    """Integrate a vectorized ``func`` over each interval [a_k, b_k]."""
    pts = gl_points(a, b)
    return gl_sum(func(pts), a, b)


def cumulative_panels(func, edges):
    """Cumulative integral of ``func`` at every entry of ``edges`` (starting at 0)."""
    edges = np.asarray(edges, dtype=float)
    panels = gl_integrate(func, edges[:-1], edges[1:])
    return np.concatenate(([0.0], np.cumsum(panels)))


def integral_from_table(func, edges, table, x):
    """Evaluate ``int_{edges[0]}^x func`` for arbitrary ``x`` using a cumulative table.

    ``x`` is located in its panel and the partial panel is integrated with
    Gauss-Legendre, so the result carries no interpolation error.
    """
    x = np.asarray(x, dtype=float)
    i = np.clip(np.searchsorted(edges, x, side="right") - 1, 0, len(edges) - 2)
    return table[i] + gl_integrate(func, edges[i], x)


def simpson(y, h):
    """Composite Simpson rule on uniformly spaced samples."""
    return float(integrate.simpson(np.asarray(y, dtype=float), dx=h))


def cumulative_uniform(g, h):
    """4th-order cumulative integral of uniformly sampled ``g``.

    Interior panels use the cubic through the four surrounding samples,
    the first and last panels a one-sided cubic. Needs at least 4 samples.
    Returns an array with ``out[0] == 0``.
    """
    g = np.asarray(g, dtype=float)
    n = g.shape[-1] - 1
    if n < 3:
        raise ValueError("cumulative_uniform needs at least 4 samples")
    panels = np.empty(g.shape[:-1] + (n,))
    panels[..., 1:-1] = (-g[..., :-3] + 13.0 * g[..., 1:-2] + 13.0 * g[..., 2:-1] - g[..., 3:]) / 24.0
    panels[..., 0] = (9.0 * g[..., 0] + 19.0 * g[..., 1] - 5.0 * g[..., 2] + g[..., 3]) / 24.0
    panels[..., -1] = (9.0 * g[..., -1] + 19.0 * g[..., -2] - 5.0 * g[..., -3] + g[..., -4]) / 24.0
    out = np.zeros_like(g)
    out[..., 1:] = h * np.cumsum(panels, axis=-1)
    return out


def second_derivative_5pt(y, h):
    """4th-order central second derivative at nodes 2..n-2 (interior only)."""
    y = np.asarray(y, dtype=float)
    return (-y[4:] + 16.0 * y[3:-1] - 30.0 * y[2:-2] + 16.0 * y[1:-3] - y[:-4]) / (12.0 * h * h)
