"""Direct slice solution through the Euler-Lagrange (hodograph-type) transform.

With ``z2 = phi(y1, y2)`` as independent variable the height map
``Phi(z1, z2)`` (inverse of ``y2 -> phi``) has the explicit derivative

    psi = dPhi/dz2 = (2 alpha1 F(z2) + beta)^(-1/2),

where ``F`` is the primitive of ``f`` and ``beta`` is fixed by
``Phi(z1, c) = 1``. Everything per slice is a scalar root-find plus 1-D
quadratures; the alpha1-derivative of ``Phi`` follows from the implicit
function theorem applied to the normalization.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import BracketFailure, InversionFailure
from .profiles import VorticitySource
from .quadrature import GL_WEIGHTS, gl_points, gl_sum, second_derivative_5pt
from .slice_solver import SliceSolution, uniform_grid

BETA_XTOL = 1e-15


@dataclass(frozen=True)
class LagrangeTables:
    """Stream-value grid on [0, c] with ``F`` at its nodes and Gauss points.

    Built once per (source, n) and shared by every slice.
    """

    src: VorticitySource
    grid: np.ndarray
    Fcum: np.ndarray
    gl_pts: np.ndarray
    F_gl: np.ndarray

    @property
    def n(self) -> int:
        return len(self.grid) - 1

    @property
    def c(self) -> float:
        return self.src.c


def lagrange_tables(src: VorticitySource, n: int = 400) -> LagrangeTables:
    grid = np.linspace(0.0, src.c, n + 1)
    pts = gl_points(grid[:-1], grid[1:])
    Fcum = src.F(grid)
    Fcum[0] = 0.0
    return LagrangeTables(src, grid, Fcum, pts, src.F(pts))


def normalization(alpha1: float, beta: float, tab: LagrangeTables) -> float:
    """G(alpha1, beta) = int_0^c (2 alpha1 F + beta)^(-1/2)."""
    R = 2.0 * alpha1 * tab.F_gl + beta
    if np.any(R <= 0.0):
        return np.inf
    return float(np.sum(gl_sum(R**-0.5, tab.grid[:-1], tab.grid[1:])))


def normalization_partials(alpha1: float, beta: float, tab: LagrangeTables):
    """(dG/dalpha1, dG/dbeta) at (alpha1, beta)."""
    R3 = (2.0 * alpha1 * tab.F_gl + beta) ** -1.5
    a, b = tab.grid[:-1], tab.grid[1:]
    dG_da1 = -float(np.sum(gl_sum(tab.F_gl * R3, a, b)))
    dG_db = -0.5 * float(np.sum(gl_sum(R3, a, b)))
    return dG_da1, dG_db


def solve_beta(
    alpha1: float,
    src: VorticitySource,
    c: float | None = None,
    tol: float = BETA_XTOL,
    tables: LagrangeTables | None = None,
) -> float:
    """Unique ``beta`` with ``G(alpha1, beta) = 1``; G is decreasing in beta.

    The lower bracket keeps the radicand positive, the upper one is doubled
    until ``G < 1``.
    """
    if alpha1 <= 0.0:
        raise ValueError("alpha1 must be positive")
    tab = tables if tables is not None else lagrange_tables(src)
    if c is not None and abs(c - tab.c) > 1e-14 * tab.c:
        raise ValueError("c does not match the source's mass flux")
    Fmin = min(float(np.min(tab.F_gl)), float(np.min(tab.Fcum)))
    beta_lo = -2.0 * alpha1 * Fmin
    lo = beta_lo + 1e-12 * (1.0 + abs(beta_lo))
    G = lambda b: normalization(alpha1, b, tab) - 1.0  # noqa: E731
    if not G(lo) > 0.0:
        raise BracketFailure("normalization is below 1 at the radicand limit")
    gap = tab.c**2
    hi = beta_lo + gap
    for _ in range(200):
        if G(hi) <= 0.0:
            break
        gap *= 2.0
        hi = beta_lo + gap
    else:
        raise BracketFailure("could not bracket beta from above")
    return optimize.brentq(G, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=200)


@dataclass(frozen=True)
class LagrangeSlice:
    alpha1: float
    beta: float
    dbeta_dalpha1: float
    tables: LagrangeTables
    Phi: np.ndarray
    psi: np.ndarray
    dPhi_dz1_factor: np.ndarray

    @property
    def grid(self) -> np.ndarray:
        return self.tables.grid

    @property
    def Fcum(self) -> np.ndarray:
        return self.tables.Fcum

    @property
    def c(self) -> float:
        return self.tables.c

    def radicand(self, z):
        return 2.0 * self.alpha1 * self.tables.src.F(z) + self.beta

    def psi_at(self, z):
        return self.radicand(z) ** -0.5

    def _partial(self, z, integrand_on_F):
        """Table value at the panel start plus Gauss-Legendre on the remainder."""
        z = np.asarray(z, dtype=float)
        grid = self.grid
        i = np.clip(np.searchsorted(grid, z, side="right") - 1, 0, len(grid) - 2)
        pts = gl_points(grid[i], z)
        Fp = self.tables.src.F(pts)
        return i, gl_sum(integrand_on_F(Fp), grid[i], z)

    def Phi_at(self, z):
        i, part = self._partial(z, lambda Fp: (2.0 * self.alpha1 * Fp + self.beta) ** -0.5)
        return self.Phi[i] + part

    def dPhi_dalpha_at(self, z):
        """dPhi/dalpha1 at fixed z2; multiply by (s^2)' to get dPhi/dz1."""
        db = self.dbeta_dalpha1
        a, b = self.alpha1, self.beta
        i, part = self._partial(z, lambda Fp: -0.5 * (2.0 * Fp + db) * (2.0 * a * Fp + b) ** -1.5)
        return self.dPhi_dz1_factor[i] + part

    def dpsi_dalpha_at(self, z):
        F = self.tables.src.F(np.asarray(z, dtype=float))
        return -0.5 * (2.0 * F + self.dbeta_dalpha1) * (2.0 * self.alpha1 * F + self.beta) ** -1.5

    def phi_at(self, y2):
        """Invert ``Phi(z) = y2``: Hermite seed on the table, bracketed Newton polish."""
        y2 = np.asarray(y2, dtype=float)
        shape = y2.shape
        t = np.clip(y2.ravel(), 0.0, 1.0)
        P, z, psi = self.Phi, self.grid, self.psi
        if not np.all(np.diff(P) > 0.0):
            raise InversionFailure("Phi is not strictly increasing; beta is corrupted")
        i = np.clip(np.searchsorted(P, t, side="right") - 1, 0, len(P) - 2)
        lo, hi = z[i], z[i + 1]
        dP = P[i + 1] - P[i]
        u = (t - P[i]) / dP
        x = ((1 + 2 * u) * (1 - u) ** 2 * lo + u * (1 - u) ** 2 * dP / psi[i]
             + u * u * (3 - 2 * u) * hi + u * u * (u - 1) * dP / psi[i + 1])
        x = np.clip(x, lo, hi)
        for _ in range(8):
            err = self.Phi_at(x) - t
            step = err / self.psi_at(x)
            x = np.clip(x - step, lo, hi)
            if np.max(np.abs(err), initial=0.0) <= 1e-15:
                break
        x = np.where(t <= 0.0, 0.0, np.where(t >= 1.0, self.c, x))
        return x.reshape(shape)


def build_lagrange_slice(
    alpha1: float,
    src: VorticitySource,
    c: float | None = None,
    n: int = 400,
    tol: float = BETA_XTOL,
    tables: LagrangeTables | None = None,
) -> LagrangeSlice:
    """Tables of Phi, psi and dPhi/dalpha1 on a uniform stream-value grid."""
    tab = tables if tables is not None else lagrange_tables(src, n)
    beta = solve_beta(alpha1, src, c, tol, tab)
    a, b = tab.grid[:-1], tab.grid[1:]
    R_gl = 2.0 * alpha1 * tab.F_gl + beta
    Phi = np.concatenate(([0.0], np.cumsum(gl_sum(R_gl**-0.5, a, b))))
    dG_da1, dG_db = normalization_partials(alpha1, beta, tab)
    dbeta = -dG_da1 / dG_db
    integrand = -0.5 * (2.0 * tab.F_gl + dbeta) * R_gl**-1.5
    factor = np.concatenate(([0.0], np.cumsum(gl_sum(integrand, a, b))))
    psi = (2.0 * alpha1 * tab.Fcum + beta) ** -0.5
    return LagrangeSlice(alpha1, beta, dbeta, tab, Phi, psi, factor)


def dPhi_dz1(L: LagrangeSlice, dalpha1: float) -> np.ndarray:
    """dPhi/dz1 on the stream-value grid for a wall-slope factor (s^2)'."""
    return dalpha1 * L.dPhi_dz1_factor


def invert_to_slice(L: LagrangeSlice, y1: float = float("nan"), n_y: int | None = None) -> SliceSolution:
    """Slice solution on a uniform y2 grid from the inverse height map."""
    n_y = L.tables.n if n_y is None else n_y
    y = uniform_grid(n_y)
    phi = L.phi_at(y)
    phi[0], phi[-1] = 0.0, L.c
    dphi = 1.0 / L.psi_at(phi)
    d2phi = L.alpha1 * L.tables.src.fhat(phi)
    return SliceSolution(
        float(y1), L.alpha1, y, phi, dphi, d2phi, "lagrange", beta=L.beta,
        info={"dbeta_dalpha1": L.dbeta_dalpha1},
    )


def transformed_residual(L: LagrangeSlice) -> np.ndarray:
    """Phi_zz + alpha1 f(z) Phi_z^3 at interior table nodes (Phi_zz differenced)."""
    h = L.grid[1] - L.grid[0]
    Pzz = second_derivative_5pt(L.Phi, h)
    z = L.grid[2:-2]
    return Pzz + L.alpha1 * L.tables.src.f(z) * L.psi[2:-2] ** 3


__all__ = [
    "GL_WEIGHTS",
    "LagrangeSlice",
    "LagrangeTables",
    "build_lagrange_slice",
    "dPhi_dz1",
    "invert_to_slice",
    "lagrange_tables",
    "normalization",
    "normalization_partials",
    "solve_beta",
    "transformed_residual",
]
