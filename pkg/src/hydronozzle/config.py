"""Run configuration: a flat INI file read with :mod:`configparser`.

Schema (all sections optional, defaults in brackets)::

    [profile]
    kind = quartic_bump          ; constant | quartic_bump | linear | table
    amplitude = 0.2              ; quartic_bump
    level = 1.0                  ; constant
    base = 1.0, slope = -0.1     ; linear
    file = profile.csv           ; table: two columns x2, v1 (>= 9 rows)

    [geometry]
    kind = bump                  ; strip | tanh | bump | slanted
    cutoff = 20                  ; X, the domain is [-X, X]
    ...                          ; family parameters (a, sigma, amp0, ...)

    [grid]
    ny1 = 200
    ny2 = 400

    [solver]
    method = lagrange            ; lagrange | picard | shooting | all

    [tolerances]
    picard = 1e-13, beta = 1e-15, shooting = 1e-13, farfield = 1e-8,
    residual = 1.0, flux = 1e-8, shear = 1e-10, deviation = 1e-6
    ; residual is the constant C in  sup|residual| <= C (h1^2 + h2^2)

    [trace]
    seeds = -5 0.3; -5 0.7       ; x1 x2 pairs separated by ';'
    step = 0.02

    [output]
    dir = out
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace

from .errors import ConfigError

METHODS = ("lagrange", "picard", "shooting", "all")
MIN_GRID = 50

DEFAULT_TOLERANCES = {
    "picard": 1e-13,
    "beta": 1e-15,
    "shooting": 1e-13,
    "farfield": 1e-8,
    "residual": 1.0,
    "flux": 1e-8,
    "shear": 1e-10,
    "deviation": 1e-6,
}


@dataclass(frozen=True)
class RunConfig:
    profile: dict = field(default_factory=lambda: {"kind": "quartic_bump"})
    geometry: dict = field(default_factory=lambda: {"kind": "bump"})
    ny1: int = 200
    ny2: int = 400
    cutoff: float = 20.0
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    solver: str = "lagrange"
    out_dir: str = "out"
    seeds: tuple = ()
    trace_step: float = 0.02

    def validate(self) -> "RunConfig":
        if self.ny1 < MIN_GRID or self.ny2 < MIN_GRID:
            raise ConfigError(f"grid too coarse: ny1={self.ny1}, ny2={self.ny2} (need >= {MIN_GRID})")
        if not self.cutoff > 0.0:
            raise ConfigError("cutoff X must be positive")
        bad = [k for k, v in self.tolerances.items() if not v > 0.0]
        if bad:
            raise ConfigError(f"tolerances must be positive: {', '.join(sorted(bad))}")
        if self.solver not in METHODS:
            raise ConfigError(f"unknown solver {self.solver!r}")
        if not self.trace_step > 0.0:
            raise ConfigError("trace step must be positive")
        return self

    def as_dict(self) -> dict:
        return {
            "profile": dict(self.profile),
            "geometry": dict(self.geometry),
            "grid": {"ny1": self.ny1, "ny2": self.ny2, "cutoff": self.cutoff},
            "tolerances": dict(self.tolerances),
            "solver": self.solver,
            "seeds": [list(s) for s in self.seeds],
            "trace_step": self.trace_step,
        }


def _number(v: str):
    try:
        return int(v)
    except ValueError:
        pass
    try:
        return float(v)
    except ValueError:
        return v


def parse_grid(text: str) -> tuple[int, int]:
    """'200x400' -> (200, 400)."""
    try:
        a, b = text.lower().split("x")
        return int(a), int(b)
    except ValueError as exc:
        raise ConfigError(f"grid must look like NY1xNY2, got {text!r}") from exc


def parse_seeds(text: str) -> tuple:
    seeds = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        try:
            x1, x2 = (float(t) for t in part.replace(",", " ").split())
        except ValueError as exc:
            raise ConfigError(f"bad seed {part!r}") from exc
        seeds.append((x1, x2))
    return tuple(seeds)


def load_config(path: str | None = None) -> RunConfig:
    """Read an INI file (or return defaults); values are not yet validated."""
    cfg = RunConfig()
    if path is None:
        return cfg
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        profile = {k: _number(v) for k, v in cp["profile"].items()} if cp.has_section("profile") else cfg.profile
        geometry = {k: _number(v) for k, v in cp["geometry"].items()} if cp.has_section("geometry") else cfg.geometry
        cutoff = float(geometry.pop("cutoff", cfg.cutoff)) if "cutoff" in geometry else cfg.cutoff
        ny1 = cp.getint("grid", "ny1", fallback=cfg.ny1)
        ny2 = cp.getint("grid", "ny2", fallback=cfg.ny2)
        tol = dict(DEFAULT_TOLERANCES)
        if cp.has_section("tolerances"):
            for k, v in cp["tolerances"].items():
                tol[k] = float(v)
        solver = cp.get("solver", "method", fallback=cfg.solver).strip()
        out_dir = cp.get("output", "dir", fallback=cfg.out_dir).strip()
        seeds = parse_seeds(cp.get("trace", "seeds", fallback=""))
        step = cp.getfloat("trace", "step", fallback=cfg.trace_step)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return replace(cfg, profile=profile, geometry=geometry, cutoff=cutoff, ny1=ny1, ny2=ny2,
                   tolerances=tol, solver=solver, out_dir=out_dir, seeds=seeds, trace_step=step)
