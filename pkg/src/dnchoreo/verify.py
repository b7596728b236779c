"""Independent oracles: finite-difference L, full n-body integration, choreography check."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy.integrate import solve_ivp

from .dynamics import (
    RHO_MIN,
    Configuration,
    PhysicalParams,
    build_configuration,
    inertial_to_rotating,
    newton_forces,
    physical_residual,
    potential,
)
from .errors import ChoreoError, IntegratorCollision
from .spectral import FourierCurve, apply_L
from .symmetry import SymmetrySpec, rotation, symmetry_defect, winding_number

_D1 = {
    2: {1: 0.5},
    4: {1: 8 / 12, 2: -1 / 12},
    6: {1: 45 / 60, 2: -9 / 60, 3: 1 / 60},
}
_D2 = {
    2: (-2.0, {1: 1.0}),
    4: (-30 / 12, {1: 16 / 12, 2: -1 / 12}),
    6: (-490 / 180, {1: 270 / 180, 2: -27 / 180, 3: 2 / 180}),
}


def _central_diff(f, h, order, deriv):
    if deriv == 1:
        out = np.zeros_like(f)
        for j, w in _D1[order].items():
            out += w * (np.roll(f, -j, axis=0) - np.roll(f, j, axis=0))
        return out / h
    center, side = _D2[order]
    out = center * f
    for j, w in side.items():
        out += w * (np.roll(f, -j, axis=0) + np.roll(f, j, axis=0))
    return out / (h * h)


def fd_operator_oracle(curve: FourierCurve, Omega: float, grid_size: int = 4096, fd_order: int = 4) -> float:
    """Max deviation of -u'' - 2 Omega J u' + Omega^2 u by periodic central differences
    from the spectral L, relative to max |Lu|."""
    if fd_order not in _D1:
        raise ValueError(f"fd_order must be one of {sorted(_D1)}")
    if grid_size < 8 * (2 * curve.K_max + 1):
        raise ValueError(f"grid_size must be >= 8*(2K_max+1) = {8 * (2 * curve.K_max + 1)}")
    h = curve.T / grid_size
    u = curve.sample(grid_size)
    du = _central_diff(u, h, fd_order, 1)
    ddu = _central_diff(u, h, fd_order, 2)
    Ju = np.stack([-du[:, 1], du[:, 0]], axis=1)
    fd = -ddu - 2 * Omega * Ju + Omega**2 * u
    spec = apply_L(curve, Omega).sample(grid_size)
    scale = float(np.max(np.linalg.norm(spec, axis=1)))
    return float(np.max(np.linalg.norm(fd - spec, axis=1))) / scale


def choreography_check(config: Configuration, spec: SymmetrySpec) -> float:
    """max over i, t of |q_i(t) - R_{2 pi i/n} q_0(t + i T/n)| with spectral time shifts.

    Body 0 is interpolated by its trigonometric fit on the (uniform) grid.
    """
    n, M = config.n, config.positions.shape[1]
    q0 = FourierCurve.from_samples(config.positions[0], config.T, (M - 1) // 2)
    worst = 0.0
    for i in range(n):
        ref = q0.shifted(i * config.T / n).rotated(2 * math.pi * i / n).sample(M)
        worst = max(worst, float(np.max(np.linalg.norm(config.positions[i] - ref, axis=1))))
    return worst


def initial_state(curve: FourierCurve, params: PhysicalParams, spec: SymmetrySpec):
    """Inertial positions and velocities at t = 0 from the rotating-frame generator."""
    n, T, Om = spec.n, curve.T, params.Omega
    x = np.empty((n, 2))
    xdot = np.empty((n, 2))
    for i in range(n):
        R = rotation(2 * math.pi * i / n)
        t = i * T / n
        x[i] = R @ curve.evaluate(t)
        xdot[i] = R @ curve.evaluate(t, 1)
    # q = R_{Omega t} x  =>  q' = R_{Omega t}(x' + Omega J x)
    v = xdot + Om * np.stack([-x[:, 1], x[:, 0]], axis=1)
    return x, v


def energy(q, v, m, alpha):
    """(1/2) m sum |v|^2 - (1/alpha) sum_{i<j} m^2 r^-alpha; its gradient is the Newton force."""
    return 0.5 * m * float(np.sum(v * v)) - potential(q, m, alpha) / alpha


def angular_momentum(q, v, m):
    return m * float(np.sum(q[:, 0] * v[:, 1] - q[:, 1] * v[:, 0]))


class OdeOracle(NamedTuple):
    period_return_error: float
    energy_drift: float
    momentum_drift: float
    choreography_deviation: float
    min_separation: float
    inertial: Configuration


def ode_oracle(curve: FourierCurve, params: PhysicalParams, spec: SymmetrySpec,
               integrator_tol: float = 1e-10, samples: int = 256, rho_min: float = RHO_MIN) -> OdeOracle:
    """Integrate the inertial n-body equations over one period with DOP853.

    Reports the distance at t = T to the predicted positions R_{Omega T} q_i(0),
    the relative drift of energy and angular momentum, and the choreography
    defect of the integrated motion seen in the rotating frame.
    """
    n, T, m, alpha, Om = spec.n, curve.T, params.m, params.alpha, params.Omega
    q0, v0 = initial_state(curve, params, spec)
    y0 = np.concatenate([q0.ravel(), v0.ravel()])

    def rhs(t, y):
        q = y[: 2 * n].reshape(n, 2)
        acc = newton_forces(q, m, alpha) / m
        return np.concatenate([y[2 * n :], acc.ravel()])

    def too_close(t, y):
        q = y[: 2 * n].reshape(n, 2)
        d = np.linalg.norm(q[:, None] - q[None], axis=-1)
        return float(np.min(d[np.triu_indices(n, 1)])) - rho_min

    too_close.terminal = True
    t_eval = np.linspace(0.0, T, samples + 1)
    sol = solve_ivp(rhs, (0.0, T), y0, method="DOP853", rtol=integrator_tol,
                    atol=integrator_tol * float(np.max(np.abs(y0))), t_eval=t_eval, events=too_close)
    if sol.status == 1 or sol.t_events[0].size:
        raise IntegratorCollision(sol.t_events[0][0], rho_min)
    if not sol.success:
        raise ChoreoError(f"integration failed: {sol.message}")

    Y = sol.y.T
    qs = Y[:, : 2 * n].reshape(-1, n, 2)
    vs = Y[:, 2 * n :].reshape(-1, n, 2)
    pred = q0 @ rotation(Om * T).T
    ret = float(np.max(np.linalg.norm(qs[-1] - pred, axis=1)))
    E = np.array([energy(q, v, m, alpha) for q, v in zip(qs, vs)])
    Lz = np.array([angular_momentum(q, v, m) for q, v in zip(qs, vs)])
    e_drift = float(np.max(np.abs(E - E[0])) / abs(E[0]))
    l_drift = float(np.max(np.abs(Lz - Lz[0])) / max(abs(Lz[0]), 1e-300))

    inertial = Configuration(n, T, sol.t[:-1], np.transpose(qs[:-1], (1, 0, 2)))
    rot = inertial_to_rotating(inertial, Om)
    dev = choreography_check(rot, spec)
    return OdeOracle(ret, e_drift, l_drift, dev, inertial.min_separation, inertial)


THRESHOLDS = {
    "symmetry_shift": 1e-10,
    "symmetry_reflection": 1e-10,
    "physical_residual_sup": 1e-8,
    "fd_operator_deviation": 1e-6,
    "period_return_error": 1e-5,
    "energy_drift": 1e-8,
    "momentum_drift": 1e-8,
    "choreography_deviation": 1e-5,
}


def verify_solution(curve: FourierCurve, params: PhysicalParams, spec: SymmetrySpec,
                    integrator_tol: float = 1e-10, rho_min: float = RHO_MIN,
                    thresholds: dict | None = None) -> dict:
    """Run every oracle and compare against thresholds; ``report['passed']`` is the verdict."""
    th = dict(THRESHOLDS, **(thresholds or {}))
    checks = {}

    def record(name, value, ok, threshold=None):
        checks[name] = {"value": value, "threshold": threshold, "passed": bool(ok)}

    def upper(name, value):
        record(name, value, value < th[name], th[name])

    rot, refl = symmetry_defect(curve, spec.n)
    upper("symmetry_shift", rot)
    upper("symmetry_reflection", refl)
    try:
        w = winding_number(curve)
    except ChoreoError as exc:
        w = None
        record("winding", str(exc), False, spec.W)
    else:
        record("winding", w, w == spec.W, spec.W)
    sep = build_configuration(curve, spec).min_separation
    record("min_separation", sep, sep > rho_min, rho_min)
    try:
        upper("physical_residual_sup", physical_residual(curve, params, spec, rho_min=rho_min).sup)
    except ChoreoError as exc:
        record("physical_residual_sup", str(exc), False, th["physical_residual_sup"])
    M = 1 << max(12, (8 * (2 * curve.K_max + 1) - 1).bit_length())
    upper("fd_operator_deviation", fd_operator_oracle(curve, params.Omega, M, 4))
    try:
        ode = ode_oracle(curve, params, spec, integrator_tol, rho_min=rho_min)
    except ChoreoError as exc:
        for name in ("period_return_error", "energy_drift", "momentum_drift", "choreography_deviation"):
            record(name, str(exc), False, th[name])
    else:
        upper("period_return_error", ode.period_return_error)
        upper("energy_drift", ode.energy_drift)
        upper("momentum_drift", ode.momentum_drift)
        upper("choreography_deviation", ode.choreography_deviation)
    failed = [k for k, v in checks.items() if not v["passed"]]
    return {"passed": not failed, "failed": failed, "checks": checks}
