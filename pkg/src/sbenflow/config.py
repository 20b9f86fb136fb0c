"""Run configuration: a JSON file with one block per subsystem.

Blocks: grid, eos, viscosity, gravitation, time, case, conjugate, minimizer,
plus a top-level seed.  Unknown presets, missing blocks and out-of-range
values raise ConfigError naming the offending field path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping

from .balance import BarotropicPowerEos, Eos, IncompressibleEos
from .dissipation import ConjugateSolve, Viscosity
from .fields import Grid2P
from .gravitation import PRESETS, Gravitation
from .sben import MinimizeConfig


class ConfigError(ValueError):
    """Invalid or incomplete run configuration."""


@dataclass(frozen=True)
class TimeBlock:
    t_final: float
    n_intervals: int
    n_ref: int

    def __post_init__(self):
        if self.t_final <= 0:
            raise ConfigError("time.t_final must be positive")
        if self.n_intervals < 1:
            raise ConfigError("time.n_intervals must be >= 1")
        if self.n_ref % self.n_intervals != 0:
            raise ConfigError("time.n_ref must be a multiple of time.n_intervals")


@dataclass(frozen=True)
class CaseBlock:
    case_id: str
    params: Mapping[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class RunConfig:
    grid: Grid2P
    eos: Eos
    viscosity: Viscosity
    gravitation: Gravitation
    time: TimeBlock
    case: CaseBlock
    conjugate: ConjugateSolve
    minimizer: MinimizeConfig
    seed: int = 42


def _need(raw: dict, key: str) -> dict:
    if key not in raw:
        raise ConfigError(f"missing config block {key!r}")
    block = raw[key]
    if not isinstance(block, dict):
        raise ConfigError(f"config block {key!r} must be an object")
    return block


def _get(block: dict, path: str, key: str, cast, default=None):
    if key not in block:
        if default is None:
            raise ConfigError(f"missing config field {path}.{key}")
        return default
    try:
        return cast(block[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {path}.{key}: {exc}") from exc


def parse_config(raw: dict) -> RunConfig:
    gb = _need(raw, "grid")
    try:
        grid = Grid2P(_get(gb, "grid", "nx", int), _get(gb, "grid", "ny", int),
                      _get(gb, "grid", "lx", float), _get(gb, "grid", "ly", float))
    except ValueError as exc:
        raise ConfigError(f"grid: {exc}") from exc

    eb = _need(raw, "eos")
    kind = _get(eb, "eos", "kind", str)
    try:
        if kind == "incompressible":
            eos: Eos = IncompressibleEos(rho0=_get(eb, "eos", "rho0", float, 1.0))
        elif kind == "barotropic_power":
            eos = BarotropicPowerEos(p0=_get(eb, "eos", "p0", float, 1.0),
                                     rho0=_get(eb, "eos", "rho0", float, 1.0),
                                     gamma=_get(eb, "eos", "gamma", float, 1.4))
        else:
            raise ConfigError(f"eos.kind must be 'incompressible' or 'barotropic_power', got {kind!r}")
    except ValueError as exc:
        raise ConfigError(f"eos: {exc}") from exc

    vb = _need(raw, "viscosity")
    try:
        viscosity = Viscosity(mu=_get(vb, "viscosity", "mu", float))
    except ValueError as exc:
        raise ConfigError(f"viscosity: {exc}") from exc

    grav_b = raw.get("gravitation", {"preset": "zero"})
    preset = grav_b.get("preset", "zero")
    if preset not in PRESETS:
        raise ConfigError(f"gravitation.preset must be one of {PRESETS}, got {preset!r}")
    gravitation = Gravitation(grid, preset, grav_b.get("parameters", {}))

    tb = _need(raw, "time")
    n_intervals = _get(tb, "time", "n_intervals", int)
    time_block = TimeBlock(t_final=_get(tb, "time", "t_final", float),
                           n_intervals=n_intervals,
                           n_ref=_get(tb, "time", "n_ref", int, n_intervals))

    cb = _need(raw, "case")
    case = CaseBlock(case_id=_get(cb, "case", "id", str),
                     params=cb.get("parameters", {}))

    conj_b = raw.get("conjugate", {})
    conjugate = ConjugateSolve(tol=float(conj_b.get("tol", 1e-10)),
                               max_iter=int(conj_b.get("max_iter", 50_000)))
    if conjugate.tol <= 0:
        raise ConfigError("conjugate.tol must be positive")

    min_b = raw.get("minimizer", {})
    minimizer = MinimizeConfig(
        tol_pi_rel=float(min_b.get("tol_pi_rel", 1e-8)),
        tol_grad_rel=float(min_b.get("tol_grad_rel", 1e-6)),
        max_iter=int(min_b.get("max_iter", 500)),
        restart_every=int(min_b.get("restart_every", 20)),
        armijo_c=float(min_b.get("armijo_c", 1e-4)),
        backtrack_factor=float(min_b.get("backtrack_factor", 0.5)),
        max_backtracks=int(min_b.get("max_backtracks", 60)),
    )

    return RunConfig(grid=grid, eos=eos, viscosity=viscosity, gravitation=gravitation,
                     time=time_block, case=case, conjugate=conjugate,
                     minimizer=minimizer, seed=int(raw.get("seed", 42)))


def load_config(path: str) -> RunConfig:
    try:
        with open(path) as f:
            raw = json.load(f)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")
    return parse_config(raw)
