"""Residual verification, shear (Liouville-type) checking, far-field states
and decay reporting."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .field import FlowField
from .geometry import Flat, NozzleGeometry, Slanted
from .lagrange import build_lagrange_slice, invert_to_slice, lagrange_tables
from .profiles import VorticitySource
from .quadrature import simpson
from .slice_solver import SliceSolution

RESIDUAL_NAMES = ("momentum", "hydrostatic", "divergence", "vorticity")
EXACT_FLOOR = 1e-10


# residuals ---------------------------------------------------------------

def _norms(r) -> dict:
    r = np.asarray(r, dtype=float)
    return {"sup": float(np.max(np.abs(r))), "l2": float(np.sqrt(np.mean(r * r)))}


def residual_fields(y1, y2, s0, s, ds0, ds, v1, v2, p, omega) -> dict:
    """Pointwise finite-difference residuals on a flattened tensor grid.

    Physical derivatives use d/dx1 = d/dy1 - ((s0' + y2 s')/s) d/dy2 and
    d/dx2 = (1/s) d/dy2, with second-order differences (one-sided at edges).
    """
    S = np.asarray(s, dtype=float)[:, None]
    K = (np.asarray(ds0, dtype=float)[:, None] + np.asarray(y2)[None, :] * np.asarray(ds)[:, None]) / S

    def d1(a):
        return np.gradient(a, y1, axis=0, edge_order=2) - K * np.gradient(a, y2, axis=1, edge_order=2)

    def d2(a):
        return np.gradient(a, y2, axis=1, edge_order=2) / S

    return {
        "momentum": v1 * d1(v1) + v2 * d2(v1) + d1(p),
        "hydrostatic": d2(p),
        "divergence": d1(v1) + d2(v2),
        "vorticity": v1 * d1(omega) + v2 * d2(omega),
    }


def residuals(flow: FlowField) -> dict:
    """sup and L2 (RMS) norms of the four residuals of the hydrostatic system."""
    r = residual_fields(flow.y1, flow.y2, flow.s0, flow.s, flow.ds0, flow.ds,
                        flow.v1, flow.v2, flow.p, flow.omega)
    return {k: _norms(v) for k, v in r.items()}


def residuals_from_samples(data: dict) -> dict:
    """Residual norms from exported columns (walls recovered from the grid).

    ``data`` holds (ny1+1, ny2+1) arrays ``x1, x2, y2, v1, v2, p, omega``;
    wall slopes are differenced, which keeps the check second order.
    """
    y1 = data["x1"][:, 0]
    y2 = data["y2"][0]
    s0 = data["x2"][:, 0]
    s = data["x2"][:, -1] - s0
    ds0 = np.gradient(s0, y1, edge_order=2)
    ds = np.gradient(s, y1, edge_order=2)
    r = residual_fields(y1, y2, s0, s, ds0, ds, data["v1"], data["v2"], data["p"], data["omega"])
    return {k: _norms(v) for k, v in r.items()}


def convergence_order(coarse: dict, fine: dict, ratio: float = 2.0, floor: float = EXACT_FLOOR) -> dict:
    """Observed order log(r_coarse / r_fine)/log(ratio) per residual (sup norm).

    Residuals below ``floor`` on both grids are exact up to round-off and
    reported with order ``inf``; round-off does not shrink under refinement.
    """
    out = {}
    for k in coarse:
        a, b = coarse[k]["sup"], fine[k]["sup"]
        if a <= floor and b <= floor:
            out[k] = float("inf")
        elif b <= 0.0:
            out[k] = float("inf")
        else:
            out[k] = float(np.log(a / b) / np.log(ratio))
    return out


# analytic non-shear fixture ------------------------------------------------

@dataclass(frozen=True)
class Counterexample:
    """Non-shear solution in the unit strip with vanishing speed as x1 -> -inf.

    v = (-pi e^x1 cos(pi x2), e^x1 sin(pi x2)), p = -(pi^2/2) e^(2 x1),
    stream function -e^x1 sin(pi x2) and vorticity dv1/dx2 = pi^2 e^x1 sin(pi x2).
    ``x_range`` is the truncated window used for sampling and tracing.
    """

    x_range: tuple = (-20.0, 1.0)
    speed_inf: float = 0.0   # inf |v| over the whole strip

    def s0(self, x1):
        return np.zeros_like(np.asarray(x1, dtype=float))

    def s1(self, x1):
        return np.ones_like(np.asarray(x1, dtype=float))

    def phi(self, x1, x2):
        return -np.exp(x1) * np.sin(np.pi * x2)

    def velocity(self, x1, x2):
        e = np.exp(x1)
        return -np.pi * e * np.cos(np.pi * x2), e * np.sin(np.pi * x2)

    def grad_phi(self, x1, x2):
        v1, v2 = self.velocity(x1, x2)
        return -v2, v1

    def pressure(self, x1, x2):
        return -0.5 * np.pi**2 * np.exp(2 * x1) + 0.0 * x2

    def omega(self, x1, x2):
        return np.pi**2 * np.exp(x1) * np.sin(np.pi * x2)

    def min_speed(self) -> float:
        # |v|^2 = e^(2 x1) (pi^2 cos^2 + sin^2) >= e^(2 x1)
        return float(np.exp(self.x_range[0]))

    def analytic_residuals(self, x1, x2) -> dict:
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        e, cs, sn, pi = np.exp(x1), np.cos(np.pi * x2), np.sin(np.pi * x2), np.pi
        v1, v2 = -pi * e * cs, e * sn
        v1_1, v1_2 = -pi * e * cs, pi**2 * e * sn
        v2_1, v2_2 = e * sn, pi * e * cs
        p_1, p_2 = -pi**2 * e * e, np.zeros_like(x2)
        w_1, w_2 = pi**2 * e * sn, pi**3 * e * cs
        return {
            "momentum": v1 * v1_1 + v2 * v1_2 + p_1,
            "hydrostatic": p_2,
            "divergence": v1_1 + v2_2,
            "vorticity": v1 * w_1 + v2 * w_2,
            "wall_normal": np.concatenate([np.ravel(v2[x2 == 0.0]), np.ravel(v2[x2 == 1.0])]),
        }

    def sample(self, n1: int = 101, n2: int = 101, x_range: tuple | None = None) -> "SampledField":
        lo, hi = self.x_range if x_range is None else x_range
        x1 = np.linspace(lo, hi, n1)
        x2 = np.linspace(0.0, 1.0, n2)
        X1, X2 = np.meshgrid(x1, x2, indexing="ij")
        v1, v2 = self.velocity(X1, X2)
        return SampledField(X1, X2, v1, v2, speed_inf=self.speed_inf)


@dataclass(frozen=True)
class SampledField:
    """Velocity samples on a (column, height) grid."""

    x1: np.ndarray
    x2: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    speed_inf: float | None = None


# shear check ----------------------------------------------------------------

@dataclass
class ShearReport:
    status: str                 # "shear", "non_shear" or "hypothesis_not_met"
    min_speed: float
    v2_sup: float
    spread: float
    violating_columns: list
    theorem_applicable: bool = False
    notes: list = field(default_factory=list)

    @property
    def confirmed(self) -> bool:
        return self.status == "shear"

    def as_dict(self) -> dict:
        return {
            "status": self.status,
            "min_speed": self.min_speed,
            "v2_sup": self.v2_sup,
            "spread": self.spread,
            "violating_columns": list(self.violating_columns),
            "theorem_applicable": self.theorem_applicable,
            "notes": list(self.notes),
        }


def liouville_check(flow, eps0: float = 1e-3, tol: float = 1e-10) -> ShearReport:
    """Empirical shear check on a straight strip.

    The speed hypothesis is assessed first: it fails if the sampled minimum
    speed is below ``eps0``, if the field declares ``speed_inf < eps0``, or
    if the column-minimum speed still decreases at a truncation edge (the
    bound cannot be extended to the whole line). Measured shear quantities
    are reported in every case, but only asserted when the hypothesis holds.
    A truncated domain never certifies the theorem itself.
    """
    x1, x2, v1, v2 = (np.asarray(getattr(flow, k), dtype=float) for k in ("x1", "x2", "v1", "v2"))
    if np.max(np.abs(x2 - x2[:1])) > 1e-12:
        raise ValueError("liouville_check needs a straight strip (identical columns)")
    speed = np.hypot(v1, v2)
    col_min = speed.min(axis=1)
    min_speed = float(col_min.min())
    # median profile so a few bad columns do not contaminate the reference
    v1bar = np.median(v1, axis=0)
    col_dev = np.max(np.abs(v1 - v1bar), axis=1)
    col_v2 = np.max(np.abs(v2), axis=1)
    bad = np.nonzero((col_dev > tol) | (col_v2 > tol))[0]
    notes = ["truncated domain: empirical shear check only, not a certificate of the theorem"]

    hyp = True
    declared = getattr(flow, "speed_inf", None)
    if min_speed < eps0:
        hyp = False
        notes.append(f"min |v| = {min_speed:.3g} < eps0 = {eps0:g}")
    if declared is not None and declared < eps0:
        hyp = False
        notes.append(f"inf |v| over the whole strip is {declared:g} < eps0")
    if len(col_min) > 2:
        rel = tol * (1.0 + col_min.max())
        if col_min[0] < col_min[1] - rel or col_min[-1] < col_min[-2] - rel:
            hyp = False
            notes.append("speed decreases toward a truncation edge; the lower bound cannot be extended")

    if not hyp:
        status = "hypothesis_not_met"
    elif bad.size == 0:
        status = "shear"
    else:
        status = "non_shear"
    return ShearReport(
        status=status,
        min_speed=min_speed,
        v2_sup=float(np.max(np.abs(v2))),
        spread=float(col_dev.max()),
        violating_columns=[float(x1[j, 0]) for j in bad],
        theorem_applicable=False,
        notes=notes,
    )


# far field -------------------------------------------------------------------

@dataclass(frozen=True)
class FarFieldState:
    """Limit shear state on one side of the nozzle.

    Profiles are functions of physical height ``x2`` (and ``x1`` for a
    slanted downstream, where the interval moves with x1); ``interval`` is
    the height interval at x1 = 0 for slanted walls.
    """

    side: str
    alpha1: float
    width: float
    slope: float
    offset: float
    slice: SliceSolution
    v1_limit: Callable
    v2_limit: Callable
    phi_limit: Callable
    flux: float

    @property
    def interval(self) -> tuple:
        return (self.offset, self.offset + self.width)

    def lower(self, x1=0.0):
        return self.offset + self.slope * np.asarray(x1, dtype=float)


def farfield_state(src: VorticitySource, g: NozzleGeometry | None, side: str, n: int = 400) -> FarFieldState:
    """Solve the limit ODE phi'' = alpha1 f(phi) for one side.

    Upstream: alpha1 = 1 on (0, 1). Flat downstream: alpha1 = sigma^2 and
    v1 = phi'/sigma on (a, a + sigma). Slanted downstream: alpha1 = b1^2 + 1,
    v1 = phi'/sqrt(b1^2 + 1) and v2 = b1 v1.
    """
    if side not in ("upstream", "downstream"):
        raise ValueError("side must be 'upstream' or 'downstream'")
    slope = 0.0
    if side == "upstream":
        width, offset = 1.0, 0.0
    else:
        down = g.downstream
        if isinstance(down, Flat):
            width, offset = down.sigma, down.a
        elif isinstance(down, Slanted):
            width, offset, slope = down.width, down.b0, down.b1
        else:
            raise TypeError(f"unknown downstream descriptor {down!r}")
    alpha1 = width * width
    L = build_lagrange_slice(alpha1, src, tables=lagrange_tables(src, n))
    sol = invert_to_slice(L, float("nan"), n)

    def eta(x2, x1):
        return (np.asarray(x2, dtype=float) - offset - slope * np.asarray(x1, dtype=float)) / width

    def phi_limit(x2, x1=0.0):
        return L.phi_at(np.clip(eta(x2, x1), 0.0, 1.0))

    def v1_limit(x2, x1=0.0):
        return 1.0 / (L.psi_at(phi_limit(x2, x1)) * width)

    def v2_limit(x2, x1=0.0):
        return slope * v1_limit(x2, x1)

    # flux over the height interval: int v1 dx2 = int phi' dy2
    flux = simpson(sol.dphi, 1.0 / n)
    return FarFieldState(side, alpha1, width, slope, offset, sol, v1_limit, v2_limit, phi_limit, flux)


@dataclass
class DecayTable:
    x1: np.ndarray
    e_up: np.ndarray
    e_down: np.ndarray
    core: tuple

    def edge_errors(self) -> tuple:
        return float(self.e_up[0]), float(self.e_down[-1])

    def decaying(self) -> bool:
        """Edge errors do not exceed the error a quarter of the way in."""
        q = max(1, len(self.x1) // 4)
        return bool(self.e_up[0] <= self.e_up[q] + 1e-14 and self.e_down[-1] <= self.e_down[-1 - q] + 1e-14)

    def as_dict(self) -> dict:
        up, down = self.edge_errors()
        return {"upstream_err": up, "downstream_err": down, "decaying": self.decaying()}


def _column_error(flow: FlowField, j: int, state: FarFieldState, core) -> float:
    x1 = flow.x1[j, 0]
    x2 = flow.x2[j]
    lo = state.lower(x1)
    a, b = lo + core[0] * state.width, lo + core[1] * state.width
    sel = (x2 >= a) & (x2 <= b)
    if not np.any(sel):
        return float("nan")
    return float(np.max(np.abs(flow.v1[j, sel] - state.v1_limit(x2[sel], x1))))


def convergence_report(flow: FlowField, up: FarFieldState, down: FarFieldState, core=(0.1, 0.9)) -> DecayTable:
    """e(x1) = sup |v1(x1, .) - limit| over the 10-90% core of each limit interval."""
    n = flow.shape[0]
    e_up = np.array([_column_error(flow, j, up, core) for j in range(n)])
    e_down = np.array([_column_error(flow, j, down, core) for j in range(n)])
    return DecayTable(flow.x1[:, 0].copy(), e_up, e_down, tuple(core))
