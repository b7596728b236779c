"""Interaction operator N, n-body forces and potential, configurations and residuals."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import CollisionProximity
from .spectral import FourierCurve, J, default_grid_size, l2_norm
from .symmetry import SymmetrySpec

RHO_MIN = 1e-6


@dataclass(frozen=True)
class PhysicalParams:
    n: int
    alpha: float = 1.0
    m: float = 1.0
    Omega: float = 0.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise ValueError(f"need n >= 3, got {self.n}")
        if not 0 < self.alpha < 2:
            raise ValueError(f"need 0 < alpha < 2, got {self.alpha}")
        if not self.m > 0:
            raise ValueError(f"need m > 0, got {self.m}")
        if not math.isfinite(self.Omega):
            raise ValueError("Omega must be finite")


def _check(params, spec):
    if params.n != spec.n:
        raise ValueError(f"body count mismatch: params.n={params.n}, spec.n={spec.n}")


# -- pointwise n-body quantities -------------------------------------------


def _pair_geometry(q):
    diff = q[None, :, :] - q[:, None, :]  # diff[i, j] = q_j - q_i
    dist = np.linalg.norm(diff, axis=-1)
    return diff, dist


def newton_forces(q, m: float, alpha: float) -> np.ndarray:
    """Right-hand side of m q_i'' = sum_j m^2 (q_j - q_i) / |q_j - q_i|^(alpha+2)."""
    q = np.asarray(q, dtype=float)
    diff, dist = _pair_geometry(q)
    n = len(q)
    off = ~np.eye(n, dtype=bool)
    if np.min(dist[off]) == 0.0:
        raise CollisionProximity(0.0)
    np.fill_diagonal(dist, 1.0)
    w = m * m * dist ** (-(alpha + 2))
    np.fill_diagonal(w, 0.0)
    return np.einsum("ij,ijk->ik", w, diff)


def potential(q, m: float, alpha: float) -> float:
    """U = sum_{i<j} m^2 / |q_i - q_j|^alpha."""
    q = np.asarray(q, dtype=float)
    _, dist = _pair_geometry(q)
    iu = np.triu_indices(len(q), 1)
    r = dist[iu]
    if np.min(r) == 0.0:
        raise CollisionProximity(0.0)
    return float(m * m * np.sum(r ** (-alpha)))


def pairing(q, m: float, alpha: float) -> float:
    """sum_i <F_i, q_i> with F_i the Newton force on body i; equals -U exactly."""
    q = np.asarray(q, dtype=float)
    return float(np.sum(newton_forces(q, m, alpha) * q))


# -- configurations ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Configuration:
    """Sampled bodies: ``positions[i, j]`` is body i at ``times[j]``."""

    n: int
    T: float
    times: np.ndarray
    positions: np.ndarray

    @property
    def min_separation(self) -> float:
        return min_separation(self)


def min_separation(config: Configuration) -> float:
    """Smallest pairwise distance over all pairs and grid times."""
    pos = config.positions
    best = math.inf
    for i in range(config.n - 1):
        d = np.linalg.norm(pos[i + 1 :] - pos[i], axis=-1)
        best = min(best, float(np.min(d)))
    return best


def build_configuration(curve: FourierCurve, spec: SymmetrySpec, grid_size: int | None = None) -> Configuration:
    """q_i(t_j) = R_{2 pi i/n} u(t_j + i T/n) on a uniform grid, in the rotating frame."""
    n = spec.n
    M = grid_size or default_grid_size(curve.K_max)
    pos = np.empty((n, M, 2))
    for i in range(n):
        pos[i] = curve.shifted(i * curve.T / n).rotated(2 * math.pi * i / n).sample(M)
    return Configuration(n, curve.T, curve.grid(M), pos)


def rotating_to_inertial(config: Configuration, Omega: float) -> Configuration:
    """q(t) = R_{Omega t} x(t), sample by sample."""
    c = np.cos(Omega * config.times)
    s = np.sin(Omega * config.times)
    x, y = config.positions[..., 0], config.positions[..., 1]
    pos = np.stack([c * x - s * y, s * x + c * y], axis=-1)
    return Configuration(config.n, config.T, config.times, pos)


def inertial_to_rotating(config: Configuration, Omega: float) -> Configuration:
    return rotating_to_inertial(config, -Omega)


def potential_U(config: Configuration, params: PhysicalParams, t_index: int) -> float:
    return potential(config.positions[:, t_index], params.m, params.alpha)


def force_position_pairing(config: Configuration, params: PhysicalParams, t_index: int) -> float:
    return pairing(config.positions[:, t_index], params.m, params.alpha)


def potential_bound_CU(n: int, alpha: float, rho: float, m: float = 1.0) -> float:
    """Upper bound n(n-1)/(2 rho^alpha) (times m^2) on U when all distances are >= rho."""
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    return m * m * n * (n - 1) / (2.0 * rho**alpha)


# -- the operator N ------------------------------------------------------------


def _copies(curve, n, M):
    """Samples of R_{2 pi k/n} u(t + k T/n) for k = 1..n-1."""
    for k in range(1, n):
        yield curve.shifted(k * curve.T / n).rotated(2 * math.pi * k / n).sample(M)


def interaction_samples(curve: FourierCurve, params: PhysicalParams, grid_size: int,
                        rho_min: float = RHO_MIN) -> np.ndarray:
    """(N u)(t_j) = sum_k m (u - R u_k) / |u - R u_k|^(alpha+2) on the grid."""
    M = grid_size
    u = curve.sample(M)
    total = np.zeros_like(u)
    closest = math.inf
    for v in _copies(curve, params.n, M):
        d = u - v
        r = np.linalg.norm(d, axis=1)
        closest = min(closest, float(np.min(r)))
        if closest <= rho_min:
            raise CollisionProximity(closest, rho_min)
        total += params.m * d * (r ** (-(params.alpha + 2)))[:, None]
    return total


def apply_N(curve: FourierCurve, params: PhysicalParams, spec: SymmetrySpec,
            grid_size: int | None = None, rho_min: float = RHO_MIN) -> FourierCurve:
    """Pseudo-spectral N(u): sample, evaluate the pair forces, transform, truncate."""
    _check(params, spec)
    M = grid_size or default_grid_size(curve.K_max)
    vals = interaction_samples(curve, params, M, rho_min)
    return FourierCurve.from_samples(vals, curve.T, curve.K_max)


def generator_separation(curve: FourierCurve, n: int, grid_size: int | None = None) -> float:
    """min over t and k of |u(t) - R_{2 pi k/n} u(t + kT/n)|."""
    M = grid_size or default_grid_size(curve.K_max)
    u = curve.sample(M)
    return min(float(np.min(np.linalg.norm(u - v, axis=1))) for v in _copies(curve, n, M))


class Residual(NamedTuple):
    curve: FourierCurve
    l2: float
    sup: float


def physical_residual(curve: FourierCurve, params: PhysicalParams, spec: SymmetrySpec,
                      grid_size: int | None = None, rho_min: float = RHO_MIN) -> Residual:
    """r = u'' + 2 Omega J u' - Omega^2 u - sum_k m (R u_k - u)/|R u_k - u|^(alpha+2).

    Evaluated on grid samples with spectral derivatives; r vanishes on a
    choreography generator.
    """
    _check(params, spec)
    M = grid_size or default_grid_size(curve.K_max)
    Om = params.Omega
    u = curve.sample(M)
    du = curve.sample(M, 1)
    ddu = curve.sample(M, 2)
    accel = ddu + 2 * Om * du @ J.T - Om**2 * u
    pull = np.zeros_like(u)
    for v in _copies(curve, params.n, M):
        d = v - u
        r = np.linalg.norm(d, axis=1)
        if np.min(r) <= rho_min:
            raise CollisionProximity(float(np.min(r)), rho_min)
        pull += params.m * d * (r ** (-(params.alpha + 2)))[:, None]
    res = accel - pull
    l2 = math.sqrt(curve.T / M * float(np.sum(res**2)))
    sup = float(np.max(np.linalg.norm(res, axis=1)))
    return Residual(FourierCurve.from_samples(res, curve.T, curve.K_max), l2, sup)


def generator_pairings(curve: FourierCurve, params: PhysicalParams, spec: SymmetrySpec,
                       grid_size: int | None = None) -> dict:
    """Both pairings: <N(u), u>_{L2} on the generator and int sum_i <F_i, q_i> dt.

    They differ by a symmetry multiplicity; no relation between them is assumed.
    """
    M = grid_size or default_grid_size(curve.K_max)
    from .spectral import inner_product_L2

    gen = inner_product_L2(apply_N(curve, params, spec, M), curve)
    config = build_configuration(curve, spec, M)
    per_t = [pairing(config.positions[:, j], params.m, params.alpha) for j in range(M)]
    return {"generator": gen, "configuration": curve.T * float(np.mean(per_t))}


class LipschitzProbe(NamedTuple):
    ratio: float
    bound: float
    rho: float
    within_bound: bool


def lipschitz_constant(params: PhysicalParams, T: float) -> float:
    """C in |N u - N v|_{L2} <= C rho^-(alpha+2) |u - v|_{C0}.

    Each pair term x -> x/|x|^(alpha+2) has derivative norm (alpha+1)|x|^-(alpha+2);
    a difference of two copies moves by at most 2 |u - v|_{C0}.
    """
    return 2.0 * params.m * (params.n - 1) * (params.alpha + 1.0) * math.sqrt(T)


def lipschitz_estimate(u: FourierCurve, v: FourierCurve, params: PhysicalParams,
                       spec: SymmetrySpec, grid_size: int | None = None) -> LipschitzProbe:
    """Empirical |N(u) - N(v)|_{L2} / |u - v|_{C0} against the analytic bound."""
    M = grid_size or default_grid_size(u.K_max)
    diff = (u - v).sample(M)
    sup = float(np.max(np.linalg.norm(diff, axis=1)))
    mid = 0.5 * (u + v)
    rho = min(generator_separation(w, spec.n, M) for w in (u, v, mid))
    bound = lipschitz_constant(params, u.T) * rho ** (-(params.alpha + 2))
    if sup == 0.0:
        return LipschitzProbe(0.0, bound, rho, True)
    dn = l2_norm(apply_N(u, params, spec, M) - apply_N(v, params, spec, M))
    ratio = dn / sup
    return LipschitzProbe(ratio, bound, rho, ratio <= bound)
