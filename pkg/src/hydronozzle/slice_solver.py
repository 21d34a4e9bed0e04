"""Per-slice two-point problem ``rho'' = alpha1 * fhat(rho)``, ``rho(0)=0, rho(1)=c``.

Two independent routes: Picard iteration on the Green's-function integral
equation (the operator ``T``), and a shooting oracle (RK4 + Illinois
regula falsi on the initial slope).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BracketFailure, NoConvergence
from .profiles import VorticitySource
from .quadrature import cumulative_uniform

M_FACTOR = 13.0 / 8.0
MAX_SHOOT_STEP = 1.0 / 2000.0


@dataclass(frozen=True)
class SliceSolution:
    y1: float
    alpha1: float
    grid: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    d2phi: np.ndarray
    method: str
    beta: float | None = None
    iterations: int = 0
    info: dict = field(default_factory=dict, compare=False)

    @property
    def n(self) -> int:
        return len(self.grid) - 1


def uniform_grid(n: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, n + 1)


def green_kernel(xi, y2):
    """Kernel of ``rho'' = g`` with zero boundary values on [0, 1]."""
    xi = np.asarray(xi, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    return np.where(xi <= y2, xi * (y2 - 1.0), y2 * (xi - 1.0))


def c2_norm(rho, drho, d2rho) -> float:
    """sup|rho| + sup|rho'| + sup|rho''| on the grid."""
    return float(np.max(np.abs(rho)) + np.max(np.abs(drho)) + np.max(np.abs(d2rho)))


def m_bound(alpha1: float, src: VorticitySource, c: float) -> float:
    """Radius of the invariant set: (13/8) alpha1 sup|fhat| + 2c."""
    return M_FACTOR * alpha1 * src.sup + 2.0 * c


def apply_T(rho, alpha1: float, src: VorticitySource, c: float | None = None):
    """Apply the integral operator on the uniform grid of ``rho``.

    ``(T rho)(y) = int_0^1 alpha1 G(xi, y) fhat(rho(xi)) dxi + c y``, with the
    integral split at ``xi = y`` where the kernel has its kink. Returns
    ``(T rho, (T rho)', (T rho)'')``.
    """
    c = src.c if c is None else c
    rho = np.asarray(rho, dtype=float)
    n = len(rho) - 1
    y = uniform_grid(n)
    h = 1.0 / n
    g = alpha1 * src.fhat(rho)
    A = cumulative_uniform(y * g, h)              # int_0^y xi g
    C = cumulative_uniform((y - 1.0) * g, h)
    B = C[-1] - C                                 # int_y^1 (xi - 1) g
    T = (y - 1.0) * A + y * B + c * y
    T[0], T[-1] = 0.0, c
    return T, A + B + c, g


def default_relax(alpha1: float, src: VorticitySource) -> float:
    q = M_FACTOR * alpha1 * src.lip
    return 1.0 if q <= 0.0 else min(1.0, 0.9 / q)


def picard_solve(
    alpha1: float,
    src: VorticitySource,
    c: float | None = None,
    n: int = 400,
    relax: float | None = None,
    tol: float = 1e-13,
    max_iter: int = 20_000,
    y1: float = float("nan"),
) -> SliceSolution:
    """Relaxed Picard iteration ``rho <- (1 - r) rho + r T rho`` from ``rho = c y``.

    Stops when the fixed-point residual ``max|T rho - rho|`` is below ``tol``
    (this bounds the step ``max|rho_{k+1} - rho_k|`` as well). Every iterate
    stays in the invariant set; the largest C^2 norm seen is kept in
    ``info["max_c2_norm"]``.
    """
    c = src.c if c is None else c
    if n < 50:
        raise ValueError("picard_solve needs n >= 50")
    r = default_relax(alpha1, src) if relax is None else float(relax)
    if not 0.0 < r <= 1.0:
        raise ValueError("relax must lie in (0, 1]")
    y = uniform_grid(n)
    rho, drho, d2rho = c * y, np.full_like(y, c), np.zeros_like(y)
    max_norm = c2_norm(rho, drho, d2rho)
    for k in range(1, max_iter + 1):
        T, dT, d2T = apply_T(rho, alpha1, src, c)
        resid = float(np.max(np.abs(T - rho)))
        if not math.isfinite(resid):
            break
        if resid <= tol:
            T, dT, d2T = apply_T(T, alpha1, src, c)
            return SliceSolution(
                y1, alpha1, y, T, dT, d2T, "picard", iterations=k,
                info={"relax": r, "residual": resid, "max_c2_norm": max_norm},
            )
        rho = (1.0 - r) * rho + r * T
        drho = (1.0 - r) * drho + r * dT
        d2rho = (1.0 - r) * d2rho + r * d2T
        max_norm = max(max_norm, c2_norm(rho, drho, d2rho))
    raise NoConvergence(f"Picard did not converge in {max_iter} iterations (relax={r:.3g})")


def _rk4(alpha, src, m, nsteps, stride=0):
    """Integrate rho'' = alpha fhat(rho) from (0, m) on [0, 1] for a batch.

    Returns end values ``(rho(1), rho'(1))``; with ``stride > 0`` also the
    trajectory sampled every ``stride`` steps.
    """
    h = 1.0 / nsteps
    y = np.zeros_like(m)
    p = np.array(m, dtype=float)
    keep = [] if stride else None
    if stride:
        keep.append((y.copy(), p.copy()))
    for k in range(nsteps):
        k1y, k1p = p, alpha * src.fhat(y)
        k2y, k2p = p + 0.5 * h * k1p, alpha * src.fhat(y + 0.5 * h * k1y)
        k3y, k3p = p + 0.5 * h * k2p, alpha * src.fhat(y + 0.5 * h * k2y)
        k4y, k4p = p + h * k3p, alpha * src.fhat(y + h * k3y)
        y = y + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        p = p + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        if stride and (k + 1) % stride == 0:
            keep.append((y.copy(), p.copy()))
    return y, p, keep


def shoot_slopes(
    alphas,
    src: VorticitySource,
    c: float | None = None,
    tol: float = 1e-13,
    nsteps: int = 2000,
    brackets=None,
    max_rounds: int = 200,
):
    """Initial slopes ``m`` with ``rho(1; m) = c`` for a batch of problems.

    ``rho(1; m)`` is increasing in ``m``; brackets are widened by doubling
    (up to ``2**20 c``) and then refined with the Illinois variant of regula
    falsi, all problems advancing together.
    """
    c = src.c if c is None else c
    alphas = np.atleast_1d(np.asarray(alphas, dtype=float))
    K = len(alphas)
    if brackets is None:
        half = 0.5 * alphas * src.sup + 0.25 * c
        lo, hi = c - half, c + half
    else:
        lo, hi = (np.broadcast_to(np.asarray(b, dtype=float), (K,)).copy() for b in brackets)
    resid = lambda m: _rk4(alphas, src, m, nsteps)[0] - c  # noqa: E731
    flo, fhi = resid(lo), resid(hi)
    if not (np.all(np.isfinite(flo)) and np.all(np.isfinite(fhi))):
        raise BracketFailure("non-finite shooting residual at the initial bracket")
    limit = 2.0**20 * c
    while np.any(flo > 0.0) or np.any(fhi < 0.0):
        widen_lo, widen_hi = flo > 0.0, fhi < 0.0
        span = hi - lo
        lo = np.where(widen_lo, lo - span, lo)
        hi = np.where(widen_hi, hi + span, hi)
        if np.any(np.abs(lo) > limit) or np.any(np.abs(hi) > limit):
            raise BracketFailure("no initial slope brackets rho(1) = c")
        flo = np.where(widen_lo, resid(lo), flo)
        fhi = np.where(widen_hi, resid(hi), fhi)
    m = np.where(np.abs(flo) <= np.abs(fhi), lo, hi)
    fm = np.where(np.abs(flo) <= np.abs(fhi), flo, fhi)
    side = np.zeros(K, dtype=int)
    for _ in range(max_rounds):
        done = (np.abs(fm) <= tol) | (hi - lo <= 4 * np.finfo(float).eps * np.abs(hi))
        if np.all(done):
            return m
        x = hi - fhi * (hi - lo) / (fhi - flo)
        x = np.where(done, m, np.clip(x, lo, hi))
        fx = resid(x)
        upper = fx > 0.0
        # Illinois: halve the stale endpoint value when the same side moves twice
        flo = np.where(~done & upper & (side == 1), 0.5 * flo, flo)
        fhi = np.where(~done & ~upper & (side == -1), 0.5 * fhi, fhi)
        hi = np.where(~done & upper, x, hi)
        fhi = np.where(~done & upper, fx, fhi)
        lo = np.where(~done & ~upper, x, lo)
        flo = np.where(~done & ~upper, fx, flo)
        side = np.where(done, side, np.where(upper, 1, -1))
        m = np.where(done, m, x)
        fm = np.where(done, fm, fx)
    raise NoConvergence("shooting refinement did not converge")


def shooting_solve(
    alpha1: float,
    src: VorticitySource,
    c: float | None = None,
    tol: float = 1e-13,
    n: int = 400,
    y1: float = float("nan"),
    bracket=None,
) -> SliceSolution:
    """Shooting oracle: RK4 (step <= 1/2000) plus a bracketed slope search."""
    return shooting_solve_batch([alpha1], src, c, tol, n, [y1], bracket)[0]


def shooting_solve_batch(alphas, src, c=None, tol=1e-13, n=400, y1s=None, bracket=None):
    c = src.c if c is None else c
    alphas = np.atleast_1d(np.asarray(alphas, dtype=float))
    stride = max(1, math.ceil(1.0 / (MAX_SHOOT_STEP * n)))
    nsteps = n * stride
    m = shoot_slopes(alphas, src, c, tol, nsteps, bracket)
    _, _, traj = _rk4(alphas, src, m, nsteps, stride)
    phi = np.stack([t[0] for t in traj], axis=1)
    dphi = np.stack([t[1] for t in traj], axis=1)
    y = uniform_grid(n)
    y1s = [float("nan")] * len(alphas) if y1s is None else y1s
    out = []
    for k, a in enumerate(alphas):
        end_miss = float(phi[k, -1] - c)
        ph = phi[k].copy()
        ph[-1] = c  # |end_miss| <= tol; the boundary value is imposed exactly
        out.append(SliceSolution(
            float(y1s[k]), float(a), y, ph, dphi[k], a * src.fhat(ph), "shooting",
            info={"slope": float(m[k]), "end_miss": end_miss, "steps": nsteps},
        ))
    return out


@dataclass
class SliceReport:
    checks: dict
    gamma: float
    residual: float
    min_phi: float
    max_phi: float

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def failures(self) -> list[str]:
        return [k for k, v in self.checks.items() if not v]


def check_slice(sol: SliceSolution, src: VorticitySource, tol: float = 1e-8) -> SliceReport:
    """Verify boundary values, bounds, monotonicity and the ODE residual."""
    c = src.c
    phi, dphi = sol.phi, sol.dphi
    resid = float(np.max(np.abs(sol.d2phi - sol.alpha1 * src.fhat(phi))))
    interior = phi[1:-1]
    checks = {
        "boundary_values": phi[0] == 0.0 and phi[-1] == c,
        "bounds": bool(np.all(phi >= 0.0) and np.all(phi <= c)),
        "strict_interior": bool(np.all(interior > 0.0) and np.all(interior < c)),
        "monotone": bool(np.all(dphi > 0.0)),
        "endpoint_nondegenerate": bool(dphi[0] > 0.0 and dphi[-1] > 0.0),
        "residual": resid <= tol * (1.0 + sol.alpha1 * src.sup),
    }
    return SliceReport(checks, float(np.min(dphi)), resid, float(phi.min()), float(phi.max()))
