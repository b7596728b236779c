"""Choreography solver: reduced Newton on u = K N(u), lambda-continuation, a-priori diagnostics.

Unknowns are the real scalar coefficients c_k of z = x + i y on the admissible
lattice k = 1 (mod n), |k| <= K_max.  Every curve built from them is exactly
symmetric, so the reduced Newton never leaves the symmetric subspace.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq

from .dynamics import (
    RHO_MIN,
    PhysicalParams,
    apply_N,
    build_configuration,
    newton_forces,
    physical_residual,
    potential_bound_CU,
)
from .errors import (
    CollisionProximity,
    HypothesisViolated,
    InadmissibleMode,
    MaxIterations,
    ResonantMode,
    SingularJacobian,
    SolverError,
    StageFailed,
    UnsupportedParity,
)
from .spectral import (
    FourierCurve,
    apply_K,
    check_nonresonance,
    coercivity_constant,
    default_grid_size,
    h1_norm,
    inner_product_L2,
)
from .symmetry import (
    SymmetrySpec,
    band_modes,
    is_admissible,
    project_symmetry,
    winding_number,
)

log = logging.getLogger(__name__)

SINGULAR_COND = 1e13


@dataclass(frozen=True)
class SolverConfig:
    K_max: int = 64
    grid_size: int | None = None
    tol_residual: float = 1e-10
    max_iterations: int = 50
    damping: float = 1.0
    lambda_schedule: tuple = (1.0,)
    newton_fd_step: float = 1e-6
    rho_min: float = RHO_MIN
    R_cap: float = math.inf

    def __post_init__(self):
        if self.K_max < 1:
            raise ValueError("K_max must be >= 1")
        if not self.tol_residual > 0:
            raise ValueError("tol_residual must be positive")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        sched = tuple(float(x) for x in self.lambda_schedule)
        if not sched or any(b <= a for a, b in zip(sched, sched[1:])):
            raise ValueError("lambda_schedule must be strictly ascending")
        if sched[0] < 0 or sched[-1] != 1.0:
            raise ValueError("lambda_schedule must lie in [0, 1] and end at 1")
        object.__setattr__(self, "lambda_schedule", sched)
        if self.grid_size is not None and self.grid_size <= 2 * self.K_max:
            raise ValueError("grid_size must exceed 2*K_max")

    @property
    def grid(self) -> int:
        return self.grid_size or default_grid_size(self.K_max)


@dataclass
class SolveReport:
    converged: bool = False
    iterations: int = 0
    residual_history: list = field(default_factory=list)
    final_residual_L2: float = math.nan
    min_separation: float = math.nan
    winding: int | None = None
    h1_norm: float = math.nan
    apriori_R0: float | None = None
    within_annulus: bool = False
    within_apriori_bound: bool | None = None
    physical_residual_sup: float = math.nan
    stages: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


# -- a-priori quantities --------------------------------------------------------


def apriori_bound_R0(params: PhysicalParams, spec: SymmetrySpec, rho: float, omega: float | None = None) -> float:
    """R0 = sqrt(alpha C_U / c) sqrt(1 + 1/omega^2) with c the coercivity constant."""
    omega = spec.omega if omega is None else omega
    if not rho > 0:
        raise ValueError("rho must be positive")
    c = coercivity_constant(omega, params.Omega)
    C_U = potential_bound_CU(spec.n, params.alpha, rho, params.m)
    return math.sqrt(params.alpha * C_U / c) * math.sqrt(1.0 + omega**-2)


def kinetic_bound(params: PhysicalParams, spec: SymmetrySpec, rho: float) -> float:
    """alpha C_U / (1 - |Omega|/omega)^2, the cap on |u'|_{L2}^2."""
    omega = spec.omega
    if abs(params.Omega) >= omega:
        raise HypothesisViolated("kinetic bound needs |Omega| < omega")
    C_U = potential_bound_CU(spec.n, params.alpha, rho, params.m)
    return params.alpha * C_U / (1.0 - abs(params.Omega) / omega) ** 2


# -- guesses and anchors -----------------------------------------------------


def initial_guess(spec: SymmetrySpec, amplitudes: dict, K_max: int = 64) -> FourierCurve:
    """Symmetric curve with real scalar coefficient ``amplitudes[k]`` on each mode k.

    Real coefficients are the phases compatible with the reflection; the
    curve winds W times when |amplitudes[W]| exceeds the sum of the others.
    """
    spec.require_lattice()
    c = np.zeros(2 * K_max + 1, dtype=complex)
    for k, a in amplitudes.items():
        k = int(k)
        if not is_admissible(k, spec.n):
            raise InadmissibleMode(k, spec.n)
        if abs(k) > K_max:
            raise ValueError(f"mode {k} exceeds K_max={K_max}")
        c[K_max + k] = float(a)
    return FourierCurve.from_complex(spec.T, c)


def default_amplitudes(n: int, W: int) -> dict:
    """Dominant mode W plus the lower positive admissible modes, sharing at most 0.6."""
    lower = [k for k in range(1, W) if (k - 1) % n == 0]
    amps = {W: 1.0}
    if lower:
        a = min(0.3, 0.6 / len(lower))
        amps.update({k: a for k in lower})
    return amps


def polygon_pull(n: int, alpha: float, m: float, r: float) -> float:
    """Inward acceleration of one vertex of a regular n-gon of circumradius r (direct sum)."""
    ang = 2 * math.pi * np.arange(n) / n
    q = r * np.stack([np.cos(ang), np.sin(ang)], axis=1)
    acc = newton_forces(q, m, alpha)[0] / m
    return float(-acc[0])


def relative_equilibrium(n: int, alpha: float, m: float, r: float, omega: float | None = None,
                         K_max: int = 64):
    """Circular generator u = r(cos wt, sin wt) and the frame rate that balances it.

    The inertial angular rate nu solves nu^2 r = pull (root-found).  The body
    circles at Omega + omega, so Omega = nu - omega.  Without ``omega`` the
    curve frequency is taken as 2 nu, giving Omega = -nu: a frame
    counter-rotating at half the curve frequency, as far from resonance as
    possible and with Omega^2 = nu^2.
    """
    if n % 2 == 0:
        raise UnsupportedParity(
            f"n={n} is even: body n/2 coincides with body 0 under the choreography map"
        )
    if not r > 0:
        raise ValueError("radius must be positive")
    pull = polygon_pull(n, alpha, m, r)
    hi = 2.0 * math.sqrt(pull / r) + 1.0
    nu = brentq(lambda x: x * x * r - pull, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps)
    if omega is None:
        omega = 2.0 * nu
    Omega = nu - omega
    spec_T = 2 * math.pi / omega
    c = np.zeros(2 * K_max + 1, dtype=complex)
    c[K_max + 1] = r
    return FourierCurve.from_complex(spec_T, c), Omega


# -- reduced residual map ------------------------------------------------------------


class _Reduced:
    """u <-> x map on the admissible lattice and G(x) = x - Pi K(lam N(u(x)))."""

    def __init__(self, T, params, spec, config, lam):
        self.T = T
        self.params = params
        self.spec = spec
        self.config = config
        self.lam = lam
        K = config.K_max
        self.K = K
        self.idx = band_modes(spec.n, K) + K
        self.M = config.grid

    def curve(self, x):
        c = np.zeros(2 * self.K + 1, dtype=complex)
        c[self.idx] = x
        return FourierCurve.from_complex(self.T, c)

    def coords(self, u):
        return u.complex_coeffs()[self.idx].real.copy()

    def image(self, x):
        """Pi K(lam N(u)) in reduced coordinates."""
        if self.lam == 0.0:
            return np.zeros_like(x)
        u = self.curve(x)
        Nu = apply_N(u, self.params, self.spec, self.M, self.config.rho_min)
        return self.lam * self.coords(apply_K(Nu, self.params.Omega))

    def G(self, x):
        return x - self.image(x)

    def norm(self, g):
        return math.sqrt(self.T) * float(np.linalg.norm(g))


def _guard_nonresonance(T, params, spec, K_max):
    omega = 2 * math.pi / T
    res = check_nonresonance(omega, params.Omega, K_max)
    # k = 0 is removed by the zero-mean constraint
    bad = [k for k in res.offending if k != 0]
    if bad:
        raise ResonantMode(min(bad, key=abs))


def fixed_point_step(u: FourierCurve, params: PhysicalParams, spec: SymmetrySpec, lam: float,
                     damping: float = 1.0, grid_size: int | None = None,
                     rho_min: float = RHO_MIN) -> FourierCurve:
    """(1 - damping) u + damping Pi_sym K(lam N(u))."""
    M = grid_size or default_grid_size(u.K_max)
    if lam == 0.0:
        target = FourierCurve.zeros(u.T, u.K_max)
    else:
        target = project_symmetry(apply_K(lam * apply_N(u, params, spec, M, rho_min), params.Omega), spec)
    return project_symmetry((1.0 - damping) * u + damping * target, spec)


def rescale_to_balance(u: FourierCurve, params: PhysicalParams, spec: SymmetrySpec, lam: float = 1.0,
                       grid_size: int | None = None, rho_min: float = RHO_MIN) -> FourierCurve:
    """Best homothety s u for Lu = lam N(u).

    With g = K N(u), homogeneity gives K N(s u) = s^-(alpha+1) g, so the
    residual of s u is minimised (relative to s) at u = mu g, mu = <u,g>/<g,g>,
    i.e. s = (lam / mu)^(1/(alpha+2)).  Returns u unchanged if mu <= 0.
    """
    if lam <= 0:
        return u
    M = grid_size or default_grid_size(u.K_max)
    g = project_symmetry(apply_K(apply_N(u, params, spec, M, rho_min), params.Omega), spec)
    gg = inner_product_L2(g, g)
    mu = inner_product_L2(u, g) / gg if gg > 0 else 0.0
    if mu <= 0:
        return u
    return (lam / mu) ** (1.0 / (params.alpha + 2.0)) * u


def _finalize(report, u, params, spec, config):
    M = config.grid
    config_samples = build_configuration(u, spec, M)
    report.min_separation = config_samples.min_separation
    report.h1_norm = h1_norm(u)
    try:
        report.winding = winding_number(u, grid_size=M)
    except Exception as exc:  # origin crossing: no winding defined
        log.info("winding undefined: %s", exc)
        report.winding = None
    report.within_annulus = bool(config.rho_min < report.h1_norm < config.R_cap)
    if report.min_separation > 0 and abs(params.Omega) < spec.omega:
        report.apriori_R0 = apriori_bound_R0(params, spec, report.min_separation)
        report.within_apriori_bound = bool(report.h1_norm <= report.apriori_R0)
    else:
        report.apriori_R0 = None
        report.within_apriori_bound = None
    try:
        report.physical_residual_sup = physical_residual(u, params, spec, M, config.rho_min).sup
    except CollisionProximity:
        report.physical_residual_sup = math.inf


def newton_solve(u0: FourierCurve, params: PhysicalParams, spec: SymmetrySpec,
                 config: SolverConfig = SolverConfig(), lam: float = 1.0):
    """Damped Newton for G(u) = u - K(lam N(u)) on the admissible lattice.

    Jacobian by forward differences, dense solve, backtracking on |G|.
    Returns ``(curve, SolveReport)``; raises MaxIterations, SingularJacobian or
    CollisionProximity with the last iterate attached where possible.
    """
    spec.require_lattice()
    if u0.K_max != config.K_max:
        u0 = u0.with_bandwidth(config.K_max)
    _guard_nonresonance(u0.T, params, spec, config.K_max)
    red = _Reduced(u0.T, params, spec, config, lam)
    x = red.coords(project_symmetry(u0, spec))
    g = red.G(x)
    res = red.norm(g)
    report = SolveReport(residual_history=[res])
    it = 0
    while res >= config.tol_residual:
        if it >= config.max_iterations:
            u = red.curve(x)
            report.iterations = it
            report.final_residual_L2 = res
            raise MaxIterations(f"no convergence after {it} iterations (residual {res:.3e})", u, report)
        it += 1
        jac = _fd_jacobian(red, x, g, config.newton_fd_step)
        try:
            cond = np.linalg.cond(jac)
            if not np.isfinite(cond) or cond > SINGULAR_COND:
                raise np.linalg.LinAlgError(f"condition number {cond:.3e}")
            dx = -np.linalg.solve(jac, g)
        except np.linalg.LinAlgError as exc:
            report.iterations = it
            report.final_residual_L2 = res
            raise SingularJacobian(f"singular Jacobian at iteration {it}: {exc}", red.curve(x), report)
        xn, g, res = _line_search(red, x, g, res, dx, config.damping)
        if xn is None:
            report.iterations = it
            report.final_residual_L2 = res
            raise MaxIterations(f"line search stalled at iteration {it} (residual {res:.3e})",
                                red.curve(x), report)
        x = xn
        report.residual_history.append(res)
        log.debug("newton it=%d lam=%g residual=%.3e", it, lam, res)
    u = red.curve(x)
    report.converged = True
    report.iterations = it
    report.final_residual_L2 = res
    _finalize(report, u, params, spec, config)
    return u, report


def _fd_jacobian(red, x, g, step):
    n = x.size
    scale = max(float(np.max(np.abs(x), initial=0.0)), 1e-8)
    h = step * scale
    jac = np.empty((n, n))
    for j in range(n):
        xp = x.copy()
        xp[j] += h
        jac[:, j] = (red.G(xp) - g) / h
    return jac


def _line_search(red, x, g, res, dx, damping, min_step=1.0 / 1024):
    step = damping
    collided = None
    while step >= min_step:
        xt = x + step * dx
        try:
            gt = red.G(xt)
        except CollisionProximity as exc:
            collided = exc
            step *= 0.5
            continue
        rt = red.norm(gt)
        if rt < res:
            return xt, gt, rt
        step *= 0.5
    if collided is not None:
        raise collided
    return None, g, res


def homotopy_continuation(u0: FourierCurve, params: PhysicalParams, spec: SymmetrySpec,
                          config: SolverConfig = SolverConfig()):
    """Solve Lu = lam N(u) along ``config.lambda_schedule`` ending at lam = 1.

    The first stage starts from the best homothety of ``u0``; later stages are
    predicted exactly by homogeneity (u -> (lam'/lam)^(1/(alpha+2)) u) and
    corrected by Newton.  A lam = 0 stage lands on the trivial branch u = 0,
    which the annulus check rejects; the next stage restarts from ``u0``.
    """
    spec.require_lattice()
    if u0.K_max != config.K_max:
        u0 = u0.with_bandwidth(config.K_max)
    u0 = project_symmetry(u0, spec)
    history = []
    stages = []
    total_it = 0
    u = None
    prev_lam = None
    report = None
    for lam in config.lambda_schedule:
        try:
            if lam == 0.0:
                guess = u0
            elif u is None or prev_lam in (None, 0.0):
                guess = rescale_to_balance(u0, params, spec, lam, config.grid, config.rho_min)
            else:
                guess = ((lam / prev_lam) ** (1.0 / (params.alpha + 2.0))) * u
            u, report = newton_solve(guess, params, spec, config, lam=lam)
        except SolverError as exc:
            raise StageFailed(lam, exc, exc.curve, exc.report) from exc
        except (CollisionProximity, ResonantMode) as exc:
            raise StageFailed(lam, exc) from exc
        total_it += report.iterations
        history.extend(report.residual_history)
        record = {
            "lambda": lam,
            "iterations": report.iterations,
            "residual": report.final_residual_L2,
            "h1_norm": report.h1_norm,
            "within_annulus": report.within_annulus,
            "kinetic_energy": None,
            "kinetic_bound": None,
        }
        if report.min_separation > 0 and abs(params.Omega) < spec.omega:
            record["kinetic_energy"] = h1_norm(u) ** 2 - inner_product_L2(u, u)
            record["kinetic_bound"] = kinetic_bound(params, spec, report.min_separation)
        stages.append(record)
        prev_lam = lam
        log.info("stage lam=%g: %d iterations, residual %.3e, |u|_H1=%.4g",
                 lam, report.iterations, report.final_residual_L2, report.h1_norm)
    report.iterations = total_it
    report.residual_history = history
    report.stages = stages
    return u, report
