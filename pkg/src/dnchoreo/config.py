"""TOML run configuration: [symmetry], [physics], [solver] and optional [sweep]."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .dynamics import PhysicalParams
from .errors import ConfigError
from .solver import SolverConfig, default_amplitudes
from .symmetry import SymmetrySpec

_SOLVER_KEYS = {
    "K_max", "grid_size", "tol_residual", "max_iterations", "damping",
    "lambda_schedule", "newton_fd_step", "rho_min", "R_cap",
}


@dataclass(frozen=True)
class RunConfig:
    spec: SymmetrySpec
    params: PhysicalParams
    solver: SolverConfig
    strategy: str = "homotopy"
    amplitudes: dict = field(default_factory=dict)
    rescale: bool = True
    perturbation: float = 0.0
    seed: int = 0
    sweep: dict = field(default_factory=dict)


def _need(table, section, key):
    try:
        return table[section][key]
    except KeyError:
        raise ConfigError(f"missing required key '{section}.{key}'") from None


def parse_config(data: dict) -> RunConfig:
    for section in ("symmetry", "physics"):
        if section not in data:
            raise ConfigError(f"missing required section [{section}]")
    n = int(_need(data, "symmetry", "n"))
    W = int(_need(data, "symmetry", "W"))
    T = float(data["symmetry"].get("T", 2 * math.pi))
    alpha = float(_need(data, "physics", "alpha"))
    Omega = float(_need(data, "physics", "Omega"))
    m = float(data["physics"].get("m", 1.0))
    sol = dict(data.get("solver", {}))
    unknown = set(sol) - _SOLVER_KEYS - {"strategy", "amplitudes", "rescale", "perturbation", "seed"}
    if unknown:
        raise ConfigError(f"unknown key(s) in [solver]: {', '.join(sorted(unknown))}")
    strategy = sol.pop("strategy", "homotopy")
    if strategy not in ("homotopy", "newton"):
        raise ConfigError(f"solver.strategy must be 'homotopy' or 'newton', got {strategy!r}")
    raw_amps = sol.pop("amplitudes", None)
    amps = {int(k): float(v) for k, v in raw_amps.items()} if raw_amps else default_amplitudes(n, W)
    rescale = bool(sol.pop("rescale", True))
    perturbation = float(sol.pop("perturbation", 0.0))
    seed = int(sol.pop("seed", 0))
    if "lambda_schedule" in sol:
        sol["lambda_schedule"] = tuple(sol["lambda_schedule"])
    try:
        spec = SymmetrySpec(n, W, T)
        params = PhysicalParams(n, alpha, m, Omega)
        solver = SolverConfig(**sol)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    sweep = dict(data.get("sweep", {}))
    return RunConfig(spec, params, solver, strategy, amps, rescale, perturbation, seed, sweep)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    return parse_config(data)


def with_overrides(run: RunConfig, **changes) -> RunConfig:
    """Copy with symmetry/physics fields replaced (n, W, T, alpha, m, Omega)."""
    sym = {k: changes.pop(k) for k in ("n", "W", "T") if k in changes}
    phys = {k: changes.pop(k) for k in ("alpha", "m", "Omega") if k in changes}
    spec = replace(run.spec, **sym)
    params = replace(run.params, n=spec.n, **phys)
    amps = run.amplitudes if not sym else default_amplitudes(spec.n, spec.W)
    return replace(run, spec=spec, params=params, amplitudes=amps, **changes)
