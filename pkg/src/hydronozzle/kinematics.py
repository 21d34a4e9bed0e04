"""Streamline tracing, gradient-flow curves and vorticity-transport checks."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import OutsideInterior, Stagnation
from .field import FlowField


def _hermite(t, h):
    """Cubic Hermite basis (value, slope) at both ends and their t-derivatives."""
    t2, t3 = t * t, t * t * t
    H = np.stack([2 * t3 - 3 * t2 + 1, (t3 - 2 * t2 + t) * h, -2 * t3 + 3 * t2, (t3 - t2) * h])
    dH = np.stack([6 * t2 - 6 * t, (3 * t2 - 4 * t + 1) * h, -6 * t2 + 6 * t, (3 * t2 - 2 * t) * h]) / h
    return H, dH


class FlowInterpolant:
    """Continuous view of a solved flow.

    phi is a bicubic Hermite patch on the flattened (y1, y2) grid built from
    phi, phi_y1, phi_y2 and phi_y1y2, so the interpolated velocity
    (phi_y2, -phi_y1)/s in flattened coordinates is exactly tangent to the
    interpolated level sets and to the walls. omega is interpolated bilinearly.
    """

    def __init__(self, flow: FlowField):
        if flow.stream is None or flow.geometry is None:
            raise ValueError("flow carries no stream-function data")
        sf = flow.stream
        self.flow = flow
        self.g = flow.geometry
        self.y1 = sf.y1_grid
        self.y2 = sf.y2_grid
        self.h1 = self.y1[1] - self.y1[0]
        self.h2 = self.y2[1] - self.y2[0]
        self.P = sf.phi
        self.P1 = sf.dphi_dy1
        self.P2 = sf.dphi_dy2
        self.P12 = sf.d2phi_dy1dy2
        self.omega_grid = flow.omega
        self.x_range = (float(self.y1[0]), float(self.y1[-1]))

    def s0(self, x1):
        return self.g.s0(x1)

    def s1(self, x1):
        return self.g.s1(x1)

    def _locate(self, y1, y2):
        i = np.clip(((y1 - self.y1[0]) / self.h1).astype(int), 0, len(self.y1) - 2)
        j = np.clip((y2 / self.h2).astype(int), 0, len(self.y2) - 2)
        t = (y1 - self.y1[i]) / self.h1
        u = (y2 - self.y2[j]) / self.h2
        return i, j, t, u

    def _flat_derivs(self, y1, y2):
        """(phi, phi_y1, phi_y2) of the Hermite patch."""
        i, j, t, u = self._locate(y1, y2)
        A, dA = _hermite(t, self.h1)
        B, dB = _hermite(u, self.h2)
        out = np.zeros((3,) + np.shape(y1))
        for a, ii in ((0, i), (2, i + 1)):
            for b, jj in ((0, j), (2, j + 1)):
                vals = (self.P[ii, jj], self.P1[ii, jj], self.P2[ii, jj], self.P12[ii, jj])
                for (da, db), v in zip(((0, 0), (1, 0), (0, 1), (1, 1)), vals):
                    out[0] += A[a + da] * B[b + db] * v
                    out[1] += dA[a + da] * B[b + db] * v
                    out[2] += A[a + da] * dB[b + db] * v
        return out

    def to_flat(self, x1, x2):
        x1 = np.asarray(x1, dtype=float)
        s0 = self.g.s0(x1)
        return x1, (np.asarray(x2, dtype=float) - s0) / (self.g.s1(x1) - s0)

    def phi(self, x1, x2):
        y1, y2 = self.to_flat(x1, x2)
        return self._flat_derivs(y1, y2)[0]

    def _physical_grad(self, x1, x2):
        y1, y2 = self.to_flat(x1, x2)
        _, p1, p2 = self._flat_derivs(y1, y2)
        s = self.g.width(y1)
        k = (self.g.ds0(y1) + y2 * self.g.dwidth(y1)) / s
        return p1 - k * p2, p2 / s

    def velocity(self, x1, x2):
        px1, px2 = self._physical_grad(x1, x2)
        return px2, -px1

    def grad_phi(self, x1, x2):
        return self._physical_grad(x1, x2)

    def omega(self, x1, x2):
        y1, y2 = self.to_flat(x1, x2)
        i, j, t, u = self._locate(y1, y2)
        W = self.omega_grid
        return ((1 - t) * (1 - u) * W[i, j] + t * (1 - u) * W[i + 1, j]
                + (1 - t) * u * W[i, j + 1] + t * u * W[i + 1, j + 1])

    def min_speed(self) -> float:
        return float(np.min(np.hypot(self.flow.v1, self.flow.v2)))


@dataclass
class PathTrace:
    t: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    phi_along: np.ndarray
    omega_along: np.ndarray
    kind: str
    stop_reason: str
    info: dict = field(default_factory=dict)

    @property
    def points(self):
        return list(zip(self.t.tolist(), self.x1.tolist(), self.x2.tolist()))

    @property
    def phi_drift(self) -> float:
        return float(np.max(np.abs(self.phi_along - self.phi_along[0])))

    @property
    def omega_drift(self) -> float:
        return float(np.max(np.abs(self.omega_along - self.omega_along[0])))


def _inside(fi, x1, x2, margin=0.0):
    lo, hi = fi.x_range
    if not lo <= x1 <= hi:
        return "left_domain"
    s0, s1 = float(fi.s0(np.array(x1))), float(fi.s1(np.array(x1)))
    if not s0 + margin < x2 < s1 - margin:
        return "wall_contact"
    return None


def _check_start(fi, x1, x2):
    why = _inside(fi, x1, x2)
    if why is not None:
        raise OutsideInterior(f"start ({x1:g}, {x2:g}) is not strictly inside ({why})")


def _rk4_path(fi, rhs, start, h, max_steps, stop):
    x = np.array(start, dtype=float)
    ts, pts = [0.0], [x.copy()]
    reason = "step_cap"
    for k in range(max_steps):
        k1 = rhs(x)
        k2 = rhs(x + 0.5 * h * k1)
        k3 = rhs(x + 0.5 * h * k2)
        k4 = rhs(x + h * k3)
        xn = x + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        why = stop(xn)
        if why is not None:
            reason = why
            break
        x = xn
        ts.append((k + 1) * h)
        pts.append(x.copy())
    pts = np.array(pts)
    return np.array(ts), pts[:, 0], pts[:, 1], reason


def trace_streamline(fi, start, t_max: float = 100.0, h: float = 0.02, direction: int = 1) -> PathTrace:
    """RK4 along dX/dt = +-v from ``start`` until the truncation boundary.

    ``stop_reason`` is ``left_domain`` (expected), ``wall_contact`` (an
    invariant violation) or ``step_cap``.
    """
    x1, x2 = map(float, start)
    _check_start(fi, x1, x2)
    sgn = 1.0 if direction >= 0 else -1.0

    def rhs(x):
        v1, v2 = fi.velocity(np.array(x[0]), np.array(x[1]))
        return sgn * np.array([float(v1), float(v2)])

    def stop(x):
        # stage points may step slightly past the cutoff; evaluation clamps there
        return _inside(fi, x[0], x[1])

    t, X1, X2, reason = _rk4_path(fi, rhs, (x1, x2), h, int(np.ceil(t_max / h)), stop)
    return PathTrace(t, X1, X2, fi.phi(X1, X2), fi.omega(X1, X2), "streamline", reason,
                     info={"h": h, "direction": int(sgn)})


def upstream_exit_height(fi, start, h: float = 0.02) -> float:
    """Height at which the backward streamline from ``start`` leaves at x1 = -X."""
    tr = trace_streamline(fi, start, t_max=1e4, h=h, direction=-1)
    if tr.stop_reason != "left_domain":
        raise OutsideInterior(f"backward trace ended with {tr.stop_reason}")
    # last interior point plus a linear step to the cutoff
    lo = fi.x_range[0]
    v1, v2 = fi.velocity(np.array(tr.x1[-1]), np.array(tr.x2[-1]))
    return float(tr.x2[-1] + (lo - tr.x1[-1]) * float(v2) / float(v1))


def gradient_flow_curve(
    fi,
    x1_start: float,
    eps: float = 1e-3,
    eps0: float = 1e-3,
    h: float = 1e-3,
    max_steps: int = 200_000,
) -> PathTrace:
    """Integrate sigma' = grad phi from the bottom wall offset ``eps`` to the top.

    The flow must satisfy ``min |v| >= eps0`` on its domain (checked first);
    ``info["reached_top"]`` tells whether the curve got within ``eps`` of
    the top wall, and ``info["monotone"]`` whether phi increased at every step.
    """
    speed = fi.min_speed()
    if speed < eps0:
        raise Stagnation(f"min |v| = {speed:.3g} < {eps0:g}")
    x1 = float(x1_start)
    x2 = float(fi.s0(np.array(x1))) + eps
    _check_start(fi, x1, x2)

    def rhs(x):
        g1, g2 = fi.grad_phi(np.array(x[0]), np.array(x[1]))
        g1, g2 = float(g1), float(g2)
        if np.hypot(g1, g2) < eps0:
            raise Stagnation(f"|grad phi| < {eps0:g} at ({x[0]:.6g}, {x[1]:.6g})")
        return np.array([g1, g2])

    def stop(x):
        lo, hi = fi.x_range
        if not lo <= x[0] <= hi:
            return "left_domain"
        if x[1] >= float(fi.s1(np.array(x[0]))) - eps:
            return "top_reached"
        return None

    t, X1, X2, reason = _rk4_path(fi, rhs, (x1, x2), h, max_steps, stop)
    phi = fi.phi(X1, X2)
    return PathTrace(t, X1, X2, phi, fi.omega(X1, X2), "gradient_flow", reason, info={
        "reached_top": reason == "top_reached",
        "monotone": bool(np.all(np.diff(phi) > 0.0)),
        "h": h,
    })
