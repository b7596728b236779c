import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dnchoreo.dynamics import (
    Configuration,
    PhysicalParams,
    apply_N,
    build_configuration,
    force_position_pairing,
    generator_pairings,
    interaction_samples,
    lipschitz_estimate,
    min_separation,
    newton_forces,
    pairing,
    physical_residual,
    potential,
    potential_bound_CU,
    potential_U,
    rotating_to_inertial,
)
from dnchoreo.errors import CollisionProximity
from dnchoreo.solver import (
    SolverConfig,
    initial_guess,
    newton_solve,
    polygon_pull,
    relative_equilibrium,
)
from dnchoreo.spectral import FourierCurve, apply_K, l2_norm
from dnchoreo.symmetry import SymmetrySpec, project_symmetry

TWO_PI = 2 * math.pi


def double_loop_potential(q, m, alpha):
    total = 0.0
    for i in range(len(q)):
        for j in range(len(q)):
            if i < j:
                total += m * m / math.hypot(*(q[i] - q[j])) ** alpha
    return total


def random_config(rng, n, spread=3.0):
    while True:
        q = rng.uniform(-spread, spread, (n, 2))
        d = np.linalg.norm(q[:, None] - q[None], axis=-1)
        if np.min(d[np.triu_indices(n, 1)]) > 0.05:
            return q


def symmetric_guess(n=3, W=4, K=32):
    amps = {W: 1.0}
    amps.update({k: 0.25 for k in range(1, W) if (k - 1) % n == 0})
    return initial_guess(SymmetrySpec(n, W), amps, K)


# -- parameters ----------------------------------------------------------------


def test_params_validation():
    for bad in (dict(n=2), dict(n=3, alpha=2.0), dict(n=3, alpha=0.0), dict(n=3, m=0.0)):
        with pytest.raises(ValueError):
            PhysicalParams(**bad)


# -- potential and pairing --------------------------------------------------------


def test_potential_examples():
    s = 1.7
    tri = s / math.sqrt(3) * np.array([[math.cos(a), math.sin(a)] for a in (0, TWO_PI / 3, 2 * TWO_PI / 3)])
    assert potential(tri, 1.0, 1.0) == pytest.approx(3 / s, rel=1e-14)
    square = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    assert potential(square, 1.0, 1.0) == pytest.approx(4 + math.sqrt(2), rel=1e-15)
    with pytest.raises(CollisionProximity):
        potential(np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]), 1.0, 1.0)


@given(st.integers(3, 9), st.floats(0.1, 1.9), st.floats(0.2, 3), st.integers(0, 2**32 - 1))
def test_potential_matches_double_loop(n, alpha, m, seed):
    q = random_config(np.random.default_rng(seed), n)
    ref = double_loop_potential(q, m, alpha)
    assert abs(potential(q, m, alpha) - ref) <= 1e-14 * ref * n


def test_potential_bound_examples():
    assert potential_bound_CU(3, 1.0, 1.0) == 3.0
    assert potential_bound_CU(4, 1.0, 2.0) == 3.0
    with pytest.raises(ValueError):
        potential_bound_CU(3, 1.0, 0.0)


@given(st.integers(3, 8), st.floats(0.1, 1.9), st.integers(0, 2**32 - 1))
def test_potential_below_bound(n, alpha, seed):
    q = random_config(np.random.default_rng(seed), n)
    d = np.linalg.norm(q[:, None] - q[None], axis=-1)
    rho = float(np.min(d[np.triu_indices(n, 1)]))
    assert potential(q, 2.0, alpha) <= 4.0 * potential_bound_CU(n, alpha, rho) * (1 + 1e-14)


def test_pairing_triangle():
    tri = np.array([[math.cos(a), math.sin(a)] for a in (0, TWO_PI / 3, 2 * TWO_PI / 3)]) / math.sqrt(3)
    assert pairing(tri, 1.0, 1.0) == pytest.approx(-3.0, rel=1e-14)


@given(st.integers(3, 9), st.floats(0.1, 1.9), st.floats(0.2, 3), st.integers(0, 2**32 - 1))
def test_pairing_identity(n, alpha, m, seed):
    q = random_config(np.random.default_rng(seed), n)
    U = potential(q, m, alpha)
    assert abs(pairing(q, m, alpha) + U) < 1e-12 * U


@given(st.floats(0.2, 5.0), st.floats(0.1, 1.9), st.integers(0, 2**32 - 1))
def test_pairing_homogeneity(sigma, alpha, seed):
    q = random_config(np.random.default_rng(seed), 5)
    assert pairing(sigma * q, 1.0, alpha) == pytest.approx(sigma**-alpha * pairing(q, 1.0, alpha), rel=1e-12)


def test_newton_forces_against_gradient():
    rng = np.random.default_rng(5)
    q = random_config(rng, 4)
    alpha, m, h = 1.3, 1.1, 1e-6
    F = newton_forces(q, m, alpha)
    # force = (1/alpha) grad U
    for i in range(4):
        for a in range(2):
            e = np.zeros_like(q)
            e[i, a] = h
            g = (potential(q + e, m, alpha) - potential(q - e, m, alpha)) / (2 * h)
            assert F[i, a] == pytest.approx(g / alpha, rel=1e-6, abs=1e-9)


# -- configurations --------------------------------------------------------------------


def test_configuration_helpers():
    u = relative_equilibrium(3, 1.0, 1.0, 1.0)[0]
    spec = SymmetrySpec(3, 1, u.T)
    cfg = build_configuration(u, spec, 64)
    np.testing.assert_allclose(cfg.positions[0], u.sample(64), atol=1e-15)
    # rigid equilateral triangle at every sample
    for j in range(64):
        d = np.linalg.norm(cfg.positions[:, j][:, None] - cfg.positions[:, j][None], axis=-1)
        np.testing.assert_allclose(d[np.triu_indices(3, 1)], math.sqrt(3), rtol=1e-14)
    assert min_separation(cfg) == pytest.approx(math.sqrt(3), rel=1e-14)
    params = PhysicalParams(3)
    assert potential_U(cfg, params, 5) == pytest.approx(math.sqrt(3), rel=1e-14)
    assert force_position_pairing(cfg, params, 5) == pytest.approx(-math.sqrt(3), rel=1e-14)


def test_bodies_trace_the_same_point_set():
    u = symmetric_guess(3, 4)
    spec = SymmetrySpec(3, 4)
    M = 3 * 256
    cfg = build_configuration(u, spec, M)
    dense = u.sample(M)
    for i in range(3):
        d = np.linalg.norm(cfg.positions[i][:, None] - dense[None], axis=-1)
        assert np.max(np.min(d, axis=1)) < 1e-12


def test_rotating_to_inertial():
    rng = np.random.default_rng(2)
    times = np.linspace(0, 1, 33)
    cfg = Configuration(3, 1.0, times, rng.standard_normal((3, 33, 2)))
    np.testing.assert_array_equal(rotating_to_inertial(cfg, 0.0).positions, cfg.positions)
    inert = rotating_to_inertial(cfg, 2.3)
    assert abs(min_separation(inert) - min_separation(cfg)) < 1e-14
    fixed = Configuration(1, TWO_PI, times * TWO_PI, np.tile([2.0, 0.0], (1, 33, 1)))
    circ = rotating_to_inertial(fixed, 1.0).positions[0]
    np.testing.assert_allclose(circ, 2.0 * np.stack([np.cos(fixed.times), np.sin(fixed.times)], 1), atol=1e-15)
    for j in (0, 7):
        assert potential(inert.positions[:, j], 1.0, 1.0) == pytest.approx(
            potential(cfg.positions[:, j], 1.0, 1.0), rel=1e-14)


# -- the operator N ---------------------------------------------------------------------


def test_N_on_circle_is_radial_mode_one():
    r = 1.3
    u = FourierCurve.from_modes(TWO_PI, 8, {1: (r / 2, -0.5j * r)})
    spec, params = SymmetrySpec(3, 1), PhysicalParams(3)
    Nu = apply_N(u, params, spec)
    # direct polygon force sum: u - copy points outward, magnitude = inward pull
    expected = polygon_pull(3, 1.0, 1.0, r) / r
    np.testing.assert_allclose(Nu.coeffs, expected * u.coeffs, atol=1e-14)


def test_N_collision_guard():
    u = FourierCurve.from_modes(TWO_PI, 4, {1: (1e-8, -1e-8j)})
    with pytest.raises(CollisionProximity):
        apply_N(u, PhysicalParams(3), SymmetrySpec(3, 1))
    with pytest.raises(ValueError):
        apply_N(u, PhysicalParams(5), SymmetrySpec(3, 1))


@given(st.sampled_from([(3, 4), (3, 7), (5, 6), (7, 8)]), st.floats(0.2, 1.8), st.integers(0, 2**32 - 1))
def test_N_equivariance(nW, alpha, seed):
    n, W = nW
    rng = np.random.default_rng(seed)
    amps = {W: 1.0}
    amps.update({k: float(rng.uniform(-0.3, 0.3)) / W for k in range(1, W) if (k - 1) % n == 0})
    u = initial_guess(SymmetrySpec(n, W), amps, 32)
    Nu = apply_N(u, PhysicalParams(n, alpha), SymmetrySpec(n, W))
    assert l2_norm(project_symmetry(Nu, n) - Nu) < 1e-10 * max(1.0, l2_norm(Nu))


@given(st.floats(0.3, 3.0), st.floats(0.2, 1.8))
def test_N_scaling_law(sigma, alpha):
    u = symmetric_guess()
    params = PhysicalParams(3, alpha)
    a = interaction_samples(sigma * u, params, 512)
    b = sigma ** (-(alpha + 1)) * interaction_samples(u, params, 512)
    assert np.max(np.abs(a - b)) < 1e-12 * np.max(np.abs(b))


def test_N_aliasing_control():
    u = symmetric_guess()
    params, spec = PhysicalParams(3), SymmetrySpec(3, 4)
    a = apply_N(u, params, spec, 1024)
    b = apply_N(u, params, spec, 2048)
    assert np.max(np.abs(a.coeffs - b.coeffs)) < 1e-10 * np.max(np.abs(a.coeffs))


def test_generator_pairings_reports_both():
    u = symmetric_guess()
    p = generator_pairings(u, PhysicalParams(3), SymmetrySpec(3, 4))
    assert set(p) == {"generator", "configuration"}
    assert p["generator"] > 0 and p["configuration"] < 0


# -- residuals ------------------------------------------------------------------------


def test_physical_residual_relative_equilibrium():
    u, Om = relative_equilibrium(3, 1.0, 1.0, 1.0)
    spec = SymmetrySpec(3, 1, u.T)
    assert physical_residual(u, PhysicalParams(3, Omega=Om), spec).sup < 1e-10
    wrong = physical_residual(u, PhysicalParams(3, Omega=2 * Om), spec)
    # omega = 2 nu and Om = -nu, so doubling Om stops the inertial rotation
    # and the whole pull nu^2 r is left unbalanced
    assert wrong.sup == pytest.approx(Om**2, rel=1e-10)


def test_physical_residual_of_fixed_point():
    spec = SymmetrySpec(3, 4)
    params = PhysicalParams(3, Omega=0.5)
    cfg = SolverConfig(K_max=32, lambda_schedule=(1.0,))
    u0 = initial_guess(spec, {1: 0.3, 4: 1.0}, 32)
    from dnchoreo.solver import rescale_to_balance

    u, report = newton_solve(rescale_to_balance(u0, params, spec), params, spec, cfg)
    assert report.converged
    fp = apply_K(apply_N(u, params, spec), params.Omega)
    assert l2_norm(fp - u) < 1e-9
    assert physical_residual(u, params, spec).sup < 1e-8


# -- Lipschitz probe ---------------------------------------------------------------------


def test_lipschitz_probe():
    u = symmetric_guess()
    params, spec = PhysicalParams(3), SymmetrySpec(3, 4)
    same = lipschitz_estimate(u, u, params, spec)
    assert same.ratio == 0.0 and same.within_bound
    rng = np.random.default_rng(11)
    noise = project_symmetry(FourierCurve(u.T, 1e-3 * rng.standard_normal(u.coeffs.shape)), 3)
    p1 = lipschitz_estimate(u, u + noise, params, spec)
    p2 = lipschitz_estimate(u, u + 0.5 * noise, params, spec)
    assert p1.within_bound and p2.within_bound
    assert math.isfinite(p1.ratio) and p1.ratio > 0
    assert p2.ratio == pytest.approx(p1.ratio, rel=0.05)
