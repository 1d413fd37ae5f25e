"""Run configuration: system parameters, grids, sweeps and JSON loading.

A scenario file is a JSON object with three blocks::

    {
      "system": {"eps": 1.0, "J": 1.0, "alpha": 1.0, "gamma": 0.0, "N": 10},
      "bath":   {"kappa1": 0.05, "kappa2": 0.0, "kappa3": 0.0,
                 "omega_c": 2.0, "beta": 2.0},
      "run":    {"mode": "steady", "t_max": 20.0, "dt": 0.01,
                 "sweep": {"parameter": "gamma", "grid": [0.0, 0.1]}},
      "output": {"directory": "out", "stem": "fig2"}
    }

Key names map one-to-one onto the model parameters: ``eps`` is the two-level
bias, ``J`` the tunneling amplitude, ``alpha`` the spin-ensemble Zeeman
energy, ``gamma`` the system-ensemble Ising coupling, ``N`` the number of
bath spins; ``kappa1/kappa2/kappa3`` are the TT/TS/SS boson couplings,
``omega_c`` the cutoff and ``beta`` the inverse temperature (``omega_ph``
defaults to 1 and is the energy unit throughout).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bath import BathParams

__all__ = ["SystemParams", "RunSettings", "OutputSettings", "Scenario",
           "ScenarioError", "load_scenario", "default_dt"]

MODES = ("dynamics", "steady", "mqs", "oracle", "kernels")

N_MAX = 24  # cost of the ensemble reduced dynamics grows as (N+1)^2 * t^2


class ScenarioError(ValueError):
    """Configuration that fails validation; message names the offending field."""


@dataclass(frozen=True)
class SystemParams:
    """Bare two-level and spin-ensemble parameters."""

    eps: float
    J: float
    alpha: float
    gamma: float
    N: int

    def __post_init__(self):
        for name in ("eps", "J", "alpha", "gamma"):
            if not math.isfinite(getattr(self, name)):
                raise ScenarioError(f"system.{name} must be finite")
        if self.N < 0 or self.N % 2 != 0:
            raise ScenarioError("system.N must be an even nonnegative integer")
        if self.N > N_MAX:
            raise ScenarioError(f"system.N capped at {N_MAX}")


@dataclass(frozen=True)
class RunSettings:
    mode: str
    t_max: float = 20.0
    dt: float | None = None          # None -> default_dt policy
    sweep_parameter: str | None = None
    sweep_grid: tuple = ()
    t_ss: float = 400.0              # horizon for steady-state rate saturation
    threads: int = 1
    n_out: int = 0                   # 0 -> every integrator step
    oracle_modes: int = 2            # boson discretization for mode "oracle"
    oracle_n_max: int = 6
    oracle_spin_init: str = "thermal"
    alpha_detail: bool = False       # also dump per-sector Bloch components
    theta_dump: bool = False         # also dump the full Theta_S matrix series

    def __post_init__(self):
        if self.mode not in MODES:
            raise ScenarioError(f"run.mode must be one of {MODES}")
        if not (math.isfinite(self.t_max) and self.t_max > 0):
            raise ScenarioError("run.t_max must be positive and finite")
        if self.dt is not None and not (math.isfinite(self.dt) and self.dt > 0):
            raise ScenarioError("run.dt must be positive")
        if self.sweep_parameter is not None:
            grid = np.asarray(self.sweep_grid, dtype=float)
            if grid.size < 1 or not np.all(np.isfinite(grid)):
                raise ScenarioError("run.sweep.grid must be finite and nonempty")
            if grid.size > 1 and not (np.all(np.diff(grid) > 0)
                                      or np.all(np.diff(grid) < 0)):
                raise ScenarioError("run.sweep.grid must be strictly monotone")
        if self.threads < 1:
            raise ScenarioError("run.threads must be >= 1")


@dataclass(frozen=True)
class OutputSettings:
    directory: str = "."
    stem: str = "run"


@dataclass(frozen=True)
class Scenario:
    system: SystemParams
    bath: BathParams
    run: RunSettings
    output: OutputSettings = field(default_factory=OutputSettings)

    def resolved_dt(self, eps_max: float | None = None) -> float:
        return self.run.dt if self.run.dt is not None else default_dt(
            self.system, self.bath, eps_max)


def default_dt(system: SystemParams, bath: BathParams,
               eps_max: float | None = None) -> float:
    """Step policy dt = min(0.01, 2 pi / (50 max_m eps_m))."""
    if eps_max is None:
        from .bath import polaron_constants
        consts = polaron_constants(system.J, system.gamma, bath)
        m_edge = system.N / 2.0
        eps_max = max(
            math.hypot(2 * consts.j_tilde, system.eps + 2 * consts.gamma_tilde * mm)
            for mm in (-m_edge, 0.0, m_edge)
        )
    return min(0.01, 2.0 * math.pi / (50.0 * max(eps_max, 1e-12)))


def _require(block: dict, key: str, where: str):
    if key not in block:
        raise ScenarioError(f"missing field {where}.{key}")
    return block[key]


def load_scenario(path) -> Scenario:
    """Parse and validate a scenario JSON file."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"config {path} is not valid JSON: {exc}") from exc
    for block in ("system", "bath", "run"):
        if block not in raw:
            raise ScenarioError(f"missing block '{block}'")

    sysb = raw["system"]
    system = SystemParams(
        eps=float(_require(sysb, "eps", "system")),
        J=float(_require(sysb, "J", "system")),
        alpha=float(_require(sysb, "alpha", "system")),
        gamma=float(_require(sysb, "gamma", "system")),
        N=int(_require(sysb, "N", "system")),
    )

    bathb = raw["bath"]
    try:
        bath = BathParams(
            kappa1=float(_require(bathb, "kappa1", "bath")),
            kappa2=float(_require(bathb, "kappa2", "bath")),
            kappa3=float(_require(bathb, "kappa3", "bath")),
            omega_c=float(_require(bathb, "omega_c", "bath")),
            beta=float(_require(bathb, "beta", "bath")),
            omega_ph=float(bathb.get("omega_ph", 1.0)),
        )
    except ValueError as exc:
        raise ScenarioError(f"bath: {exc}") from exc

    runb = raw["run"]
    sweep = runb.get("sweep")
    run = RunSettings(
        mode=str(_require(runb, "mode", "run")),
        t_max=float(runb.get("t_max", 20.0)),
        dt=float(runb["dt"]) if "dt" in runb and runb["dt"] is not None else None,
        sweep_parameter=None if sweep is None else str(_require(sweep, "parameter", "run.sweep")),
        sweep_grid=() if sweep is None else tuple(float(x) for x in _require(sweep, "grid", "run.sweep")),
        t_ss=float(runb.get("t_ss", 400.0)),
        threads=int(runb.get("threads", 1)),
        n_out=int(runb.get("n_out", 0)),
        oracle_modes=int(runb.get("oracle_modes", 2)),
        oracle_n_max=int(runb.get("oracle_n_max", 6)),
        oracle_spin_init=str(runb.get("oracle_spin_init", "thermal")),
        alpha_detail=bool(runb.get("alpha_detail", False)),
        theta_dump=bool(runb.get("theta_dump", False)),
    )

    outb = raw.get("output", {})
    output = OutputSettings(
        directory=str(outb.get("directory", ".")),
        stem=str(outb.get("stem", path.stem)),
    )
    return Scenario(system=system, bath=bath, run=run, output=output)
