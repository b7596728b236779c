"""Dihedral symmetry: group action, orbit arithmetic, mode lattice, winding, separation.

The symmetric subspace is described most simply through the scalar form
z = x + i y = sum_k c_k e^{i omega k t}.  The shift-rotation identity
u(t + T/n) = R_{2 pi/n} u(t) keeps only c_k with k = 1 (mod n), and the
reflection u(-t) = S u(t) is equivalent to every c_k being real.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .errors import OriginTooClose, UnresolvedWinding, UnsupportedWinding
from .spectral import FourierCurve

WINDING_GRID_CAP = 1 << 20


def rotation(angle: float) -> np.ndarray:
    if not math.isfinite(angle):
        raise ValueError(f"angle must be finite, got {angle}")
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class SymmetrySpec:
    n: int
    W: int
    T: float = 2.0 * math.pi

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise ValueError(f"need n >= 3, got {self.n}")
        if int(self.W) != self.W or self.W < 1:
            raise ValueError(f"need W >= 1, got {self.W}")
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ValueError(f"need T > 0, got {self.T}")

    @property
    def is_choreography(self) -> bool:
        return math.gcd(self.W, self.n) == 1

    @property
    def omega(self) -> float:
        return 2.0 * math.pi / self.T

    def require_lattice(self):
        """Reject (n, W) outside W = 1 (mod n), the only lattice the Fourier basis supports."""
        if math.gcd(self.W, self.n) != 1:
            raise UnsupportedWinding(
                f"gcd(W={self.W}, n={self.n}) = {math.gcd(self.W, self.n)}: "
                "bodies split into sub-choreographies"
            )
        if self.W % self.n != 1 % self.n:
            raise UnsupportedWinding(
                f"W={self.W} is coprime to n={self.n} but not 1 mod n; "
                "the symmetric mode lattice k = 1 + l n cannot wind W times"
            )


@dataclass(frozen=True)
class OrbitDecomposition:
    d: int
    orbits: tuple = field(default_factory=tuple)

    @property
    def orbit_count(self) -> int:
        return len(self.orbits)

    @property
    def orbit_size(self) -> int:
        return len(self.orbits[0])


def orbit_decomposition(n: int, W: int) -> OrbitDecomposition:
    """Cycles of j -> j + W (mod n) on body labels; their number is gcd(W, n)."""
    if n < 3:
        raise ValueError(f"need n >= 3, got {n}")
    if W < 1:
        raise ValueError(f"need W >= 1, got {W}")
    seen = [False] * n
    orbits = []
    for start in range(n):
        if seen[start]:
            continue
        cycle = []
        j = start
        while not seen[j]:
            seen[j] = True
            cycle.append(j)
            j = (j + W) % n
        orbits.append(tuple(cycle))
    d = math.gcd(W, n)
    assert len(orbits) == d
    return OrbitDecomposition(d, tuple(orbits))


def admissible_modes(spec_or_n, ell_range) -> list:
    """Modes k = 1 + l n for l in the inclusive range ``(lo, hi)``."""
    n = spec_or_n.n if isinstance(spec_or_n, SymmetrySpec) else int(spec_or_n)
    lo, hi = ell_range
    if hi < lo:
        raise ValueError("empty l range")
    return [1 + ell * n for ell in range(lo, hi + 1)]


def band_modes(n: int, K_max: int) -> np.ndarray:
    """Admissible modes with |k| <= K_max, ascending."""
    k = np.arange(-K_max, K_max + 1)
    return k[(k - 1) % n == 0]


def is_admissible(k: int, n: int) -> bool:
    return (k - 1) % n == 0


def project_symmetry(curve: FourierCurve, spec_or_n) -> FourierCurve:
    """Orthogonal projection onto the D_n-symmetric subspace.

    Drops scalar modes k != 1 (mod n) and averages each coefficient with its
    reflected partner, i.e. replaces c_k by Re c_k.
    """
    n = spec_or_n.n if isinstance(spec_or_n, SymmetrySpec) else int(spec_or_n)
    c = curve.complex_coeffs()
    keep = (curve.modes - 1) % n == 0
    return FourierCurve.from_complex(curve.T, np.where(keep, c.real, 0.0))


def symmetry_defect(curve: FourierCurve, n: int, grid_size: int = 512):
    """Sampled max errors of u(t+T/n) = R u(t) and u(-t) = S u(t)."""
    t = curve.grid(grid_size)
    u = curve.evaluate(t)
    shifted = curve.evaluate(t + curve.T / n)
    R = rotation(2 * math.pi / n)
    rot_err = np.max(np.linalg.norm(shifted - u @ R.T, axis=1))
    refl = curve.evaluate(-t)
    refl_err = np.max(np.linalg.norm(refl - u * np.array([1.0, -1.0]), axis=1))
    return float(rot_err), float(refl_err)


def winding_number_from_samples(points, eps_radius: float = 0.0) -> int:
    """Winding of a closed sampled curve (last point joins the first) about the origin."""
    pts = np.asarray(points, dtype=float)
    r = np.hypot(pts[:, 0], pts[:, 1])
    if np.min(r) <= eps_radius:
        raise OriginTooClose(np.min(r), eps_radius)
    dtheta = _angle_increments(pts)
    big = np.max(np.abs(dtheta))
    if big >= np.pi * (1 - 1e-12):
        raise UnresolvedWinding(big, len(pts))
    total = np.sum(dtheta) / (2 * np.pi)
    return int(round(total))


def _angle_increments(pts):
    theta = np.arctan2(pts[:, 1], pts[:, 0])
    dtheta = np.diff(np.append(theta, theta[0]))
    return (dtheta + np.pi) % (2 * np.pi) - np.pi


def winding_number(curve: FourierCurve, grid_size: int = 1024, eps_radius: float = 1e-12,
                   refine: bool = True) -> int:
    """Turns of u(t) about the origin over one period, by angle unwrapping.

    With ``refine`` the grid doubles (up to 2**20 points) until every wrapped
    increment is below pi/2, a margin that keeps the unwrapping unambiguous.
    Refinement also starts no coarser than 4(2 K_max + 1) samples, since a
    coarser grid can alias a high mode into a small increment.
    """
    M = int(grid_size)
    if refine:
        M = max(M, 4 * (2 * curve.K_max + 1))
    while True:
        pts = curve.sample(M)
        r = np.hypot(pts[:, 0], pts[:, 1])
        if np.min(r) <= eps_radius:
            raise OriginTooClose(np.min(r), eps_radius)
        big = np.max(np.abs(_angle_increments(pts)))
        if refine and big >= np.pi / 2 and M < WINDING_GRID_CAP:
            M *= 2
            continue
        return winding_number_from_samples(pts, eps_radius)


def separation_lower_bound(n: int, r_star: float) -> float:
    if n < 3:
        raise ValueError(f"need n >= 3, got {n}")
    if not r_star > 0:
        raise ValueError(f"r_star must be positive, got {r_star}")
    return 2.0 * r_star * _chord_factor(n)


def _chord_factor(n: int) -> float:
    """sin(pi/n) correctly rounded; math.sin(math.pi/6) is one ulp below 1/2."""
    with mpmath.workdps(40):
        return float(mpmath.sin(mpmath.pi / n))


def pairwise_separation_exact(rho, n: int, W: int, k: int, t: float) -> float:
    """Distance 2 rho(W t) sin(pi k / n) between polygon vertices k steps apart.

    For a radial-profile generator every body sits on a regular n-gon of
    circumradius rho(W t); in ``radial_profile_configuration`` body k is the
    vertex 2k (mod n) steps from body 0, so for odd n the two labelings give
    the same set of distances and the same minimum.
    """
    if not 1 <= k <= n - 1:
        raise ValueError(f"body index must lie in 1..{n - 1}")
    return 2.0 * float(rho(W * t)) * math.sin(math.pi * k / n)


def radial_profile_configuration(rho, n: int, W: int, t) -> np.ndarray:
    """Bodies q_k(t) = R_{2 pi k/n} gamma(W t + 2 pi k/n), gamma(s) = rho(s)(cos s, sin s).

    Since rho is 2 pi/n periodic, q_k(t) = R_{4 pi k/n} gamma(W t); even n
    therefore puts body n/2 on top of body 0.  Returns shape (n, len(t), 2).
    """
    t = np.asarray(t, dtype=float)
    out = np.empty((n, t.size, 2))
    for k in range(n):
        s = W * t + 2 * math.pi * k / n
        g = np.stack([np.cos(s), np.sin(s)], axis=-1) * np.asarray(rho(s))[:, None]
        out[k] = g @ rotation(2 * math.pi * k / n).T
    return out
