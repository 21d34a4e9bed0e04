"""Assembly of the stream function on the flattened strip and reconstruction
of velocity, pressure and vorticity on the curvilinear nozzle grid."""
from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import NonPositiveV1
from .geometry import NozzleGeometry
from .lagrange import LagrangeSlice, build_lagrange_slice, invert_to_slice, lagrange_tables
from .profiles import VorticitySource
from .quadrature import simpson
from .slice_solver import SliceSolution, picard_solve, shooting_solve_batch, uniform_grid

METHODS = ("lagrange", "picard", "shooting")


def thread_count() -> int:
    """Worker count from HYDRONOZZLE_THREADS (default 1)."""
    raw = os.environ.get("HYDRONOZZLE_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass(frozen=True)
class StreamFunctionField:
    """phi and its derivatives on the tensor grid (y1 index first)."""

    y1_grid: np.ndarray
    y2_grid: np.ndarray
    slices: tuple
    phi: np.ndarray
    dphi_dy2: np.ndarray
    d2phi_dy2: np.ndarray
    dphi_dy1: np.ndarray
    d2phi_dy1dy2: np.ndarray
    alpha: np.ndarray
    dalpha: np.ndarray
    beta: np.ndarray
    gamma_bar: float
    c: float
    method: str

    @property
    def shape(self):
        return self.phi.shape


def _column(L: LagrangeSlice, sol: SliceSolution, dalpha: float):
    """d phi/d y1 and d2 phi/dy1 dy2 on one column via the inverse height map.

    phi(y1, Phi(y1, z)) = z gives phi_y1 = -phi_y2 Phi_z1, and one more y2
    derivative gives phi_y1y2 = -Phi_z1z2 / psi^2 - phi_y2y2 Phi_z1.
    """
    z = sol.phi
    Phi_z1 = dalpha * L.dPhi_dalpha_at(z)
    Phi_z1z2 = dalpha * L.dpsi_dalpha_at(z)
    dy1 = -sol.dphi * Phi_z1
    dy1y2 = -Phi_z1z2 * sol.dphi**2 - sol.d2phi * Phi_z1
    return dy1, dy1y2


def assemble(
    g: NozzleGeometry,
    src: VorticitySource,
    c: float | None = None,
    ny1: int = 200,
    ny2: int = 400,
    method: str = "lagrange",
    n_z: int | None = None,
    workers: int | None = None,
    tol: float = 1e-13,
) -> StreamFunctionField:
    """Solve one slice per y1 node on [-X, X] and fill in d phi/d y1.

    Slices with identical ``alpha1 = s^2`` are solved once. ``method`` picks
    the slice solver for phi itself; the y1-derivative always comes from the
    implicit-function identity of the Lagrange route.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    c = src.c if c is None else c
    X = g.x_cutoff
    y1 = np.linspace(-X, X, ny1 + 1)
    alpha = np.asarray(g.alpha(y1), dtype=float)
    dalpha = np.asarray(g.dalpha(y1), dtype=float)
    tab = lagrange_tables(src, n_z or ny2)
    uniq = sorted(set(alpha.tolist()))

    def lagr(a):
        return build_lagrange_slice(a, src, c, tables=tab)

    nw = workers or thread_count()
    if nw > 1:
        with ThreadPoolExecutor(nw) as ex:
            Ls = dict(zip(uniq, ex.map(lagr, uniq)))
    else:
        Ls = {a: lagr(a) for a in uniq}

    if method == "lagrange":
        base = {a: invert_to_slice(Ls[a], float("nan"), ny2) for a in uniq}
    elif method == "picard":
        base = {a: picard_solve(a, src, c, n=ny2, tol=tol) for a in uniq}
    else:
        base = dict(zip(uniq, shooting_solve_batch(uniq, src, c, tol=tol, n=ny2)))

    slices, d1, d12 = [], [], []
    for j in range(ny1 + 1):
        a = float(alpha[j])
        b = base[a]
        sol = SliceSolution(float(y1[j]), a, b.grid, b.phi, b.dphi, b.d2phi, b.method,
                            beta=Ls[a].beta, iterations=b.iterations, info=b.info)
        slices.append(sol)
        dy1, dy1y2 = _column(Ls[a], sol, float(dalpha[j]))
        d1.append(dy1)
        d12.append(dy1y2)
    phi = np.stack([s.phi for s in slices])
    dphi = np.stack([s.dphi for s in slices])
    return StreamFunctionField(
        y1_grid=y1,
        y2_grid=uniform_grid(ny2),
        slices=tuple(slices),
        phi=phi,
        dphi_dy2=dphi,
        d2phi_dy2=np.stack([s.d2phi for s in slices]),
        dphi_dy1=np.stack(d1),
        d2phi_dy1dy2=np.stack(d12),
        alpha=alpha,
        dalpha=dalpha,
        beta=np.array([s.beta for s in slices]),
        gamma_bar=float(np.min(dphi)),
        c=float(c),
        method=method,
    )


@dataclass(frozen=True)
class FlowField:
    """Physical samples on the curvilinear grid x2 = (1 - y2) s0 + y2 s1."""

    y1: np.ndarray
    y2: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    phi: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    p: np.ndarray
    omega: np.ndarray
    s0: np.ndarray
    s: np.ndarray
    ds0: np.ndarray
    ds: np.ndarray
    mass_flux_per_column: np.ndarray
    gamma_bar: float
    c: float
    stream: StreamFunctionField | None = field(default=None, repr=False, compare=False)
    geometry: NozzleGeometry | None = field(default=None, repr=False, compare=False)
    source: VorticitySource | None = field(default=None, repr=False, compare=False)
    bounds_certified: bool = True

    @property
    def shape(self):
        return self.v1.shape


def column_fluxes(v1, s) -> np.ndarray:
    ny2 = v1.shape[1] - 1
    return np.array([simpson(v1[j], s[j] / ny2) for j in range(v1.shape[0])])


def reconstruct(sf: StreamFunctionField, g: NozzleGeometry, src: VorticitySource) -> FlowField:
    """Velocity, pressure and vorticity from the assembled stream function."""
    y1, y2 = sf.y1_grid, sf.y2_grid
    s0 = np.asarray(g.s0(y1), dtype=float)
    s = np.asarray(g.width(y1), dtype=float)
    ds0 = np.asarray(g.ds0(y1), dtype=float)
    ds = np.asarray(g.dwidth(y1), dtype=float)
    S, S0, DS0, DS = (a[:, None] for a in (s, s0, ds0, ds))
    Y2 = y2[None, :]
    v1 = sf.dphi_dy2 / S
    if np.any(v1 <= 0.0):
        raise NonPositiveV1(f"min v1 = {v1.min():.6g}")
    v2 = -sf.dphi_dy1 + (DS0 + Y2 * DS) / S * sf.dphi_dy2
    p = -0.5 * v1**2 + src.F(sf.phi)
    omega = src.fhat(sf.phi)
    X1 = np.broadcast_to(y1[:, None], sf.shape).copy()
    X2 = S0 + Y2 * S
    return FlowField(
        y1=y1, y2=y2, x1=X1, x2=X2, phi=sf.phi, v1=v1, v2=v2, p=p, omega=omega,
        s0=s0, s=s, ds0=ds0, ds=ds,
        mass_flux_per_column=column_fluxes(v1, s),
        gamma_bar=sf.gamma_bar, c=sf.c, stream=sf, geometry=g, source=src,
        bounds_certified=src.sign_condition_ok,
    )


def mass_flux_at(flow: FlowField, j: int) -> float:
    """Simpson integral of v1 over column ``j``."""
    ny2 = flow.v1.shape[1] - 1
    return simpson(flow.v1[j], flow.s[j] / ny2)


CSV_COLUMNS = ("x1", "x2", "y2", "phi", "v1", "v2", "p", "omega")


def _fmt(x: float) -> str:
    return "%.17g" % x


def write_csv(flow: FlowField, path) -> None:
    """Row-major (x1 column, then height) dump with 17 significant digits."""
    Y2 = np.broadcast_to(flow.y2[None, :], flow.shape)
    cols = [flow.x1, flow.x2, Y2, flow.phi, flow.v1, flow.v2, flow.p, flow.omega]
    flat = np.stack([np.ravel(a) for a in cols], axis=1)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for row in flat:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_csv(path) -> dict:
    """Read a field CSV back into (ny1+1, ny2+1) arrays keyed by column name."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    x1 = data[:, 0]
    ncol = int(np.count_nonzero(x1 == x1[0]))
    out = {name: data[:, k].reshape(-1, ncol) for k, name in enumerate(CSV_COLUMNS)}
    return out


def summary(flow: FlowField) -> dict:
    flux = flow.mass_flux_per_column
    pcol = np.max(flow.p, axis=1) - np.min(flow.p, axis=1)
    return {
        "c": flow.c,
        "gamma_bar": flow.gamma_bar,
        "flux_min": float(flux.min()),
        "flux_max": float(flux.max()),
        "flux_rel_dev": float(np.max(np.abs(flux - flow.c)) / flow.c),
        "min_v1": float(flow.v1.min()),
        "p_column_spread": float(pcol.max()),
        "bounds_certified": bool(flow.bounds_certified),
        "grid": [int(flow.shape[0] - 1), int(flow.shape[1] - 1)],
    }


def _json(o, indent: int) -> str:
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(o, dict):
        if not o:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {_json(o[k], indent + 1)}" for k in sorted(o, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(o, (list, tuple, np.ndarray)):
        if len(o) == 0:
            return "[]"
        items = [inner + _json(v, indent + 1) for v in o]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(o, (bool, np.bool_)):
        return "true" if o else "false"
    if isinstance(o, (int, np.integer)):
        return str(int(o))
    if isinstance(o, (float, np.floating)):
        f = float(o)
        return _fmt(f) if np.isfinite(f) else json.dumps(str(f))
    if o is None:
        return "null"
    return json.dumps(str(o))


def dumps(obj) -> str:
    """Deterministic JSON (sorted keys) with floats printed to 17 digits."""
    return _json(obj, 0) + "\n"
