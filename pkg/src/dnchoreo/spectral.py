"""Fourier representation of periodic planar curves and the rotating-frame operator L.

A curve is stored by its vector Fourier coefficients ``u_k`` in C^2 for
``-K_max <= k <= K_max`` with ``u(t) = sum_k u_k exp(i omega k t)``.  Reality
means ``u_{-k} = conj(u_k)``.

L acts diagonally: mode k is multiplied by

    A_k = ((omega k)^2 + Omega^2) I - 2 i omega k Omega J

whose eigenvalues are ``(omega k - Omega)^2`` on v+ = (1, i)/sqrt(2) and
``(omega k + Omega)^2`` on v- = (1, -i)/sqrt(2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import HypothesisViolated, ResonantMode

J = np.array([[0.0, -1.0], [1.0, 0.0]])
S = np.array([[1.0, 0.0], [0.0, -1.0]])
I2 = np.eye(2)

V_PLUS = np.array([1.0, 1.0j]) / math.sqrt(2.0)
V_MINUS = np.array([1.0, -1.0j]) / math.sqrt(2.0)

RESONANCE_TOL = 1e-9


def default_grid_size(K_max: int, oversample: int = 4) -> int:
    """Smallest power of two holding ``oversample * (2 K_max + 1)`` points."""
    need = oversample * (2 * K_max + 1)
    return 1 << max(3, (need - 1).bit_length())


def _apply_J(vecs):
    # J (x, y) = (-y, x), vectorised over leading axes
    out = np.empty_like(vecs)
    out[..., 0] = -vecs[..., 1]
    out[..., 1] = vecs[..., 0]
    return out


@dataclass(frozen=True, eq=False)
class FourierCurve:
    """Band-limited T-periodic planar curve.

    ``coeffs[k + K_max]`` holds the complex 2-vector for mode k.
    """

    T: float
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim != 2 or c.shape[1] != 2 or c.shape[0] % 2 != 1:
            raise ValueError(f"coeffs must have shape (2K+1, 2), got {c.shape}")
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ValueError(f"period must be positive and finite, got {self.T}")
        c.setflags(write=False)
        object.__setattr__(self, "T", float(self.T))
        object.__setattr__(self, "coeffs", c)

    # -- construction -------------------------------------------------------

    @classmethod
    def zeros(cls, T, K_max):
        return cls(T, np.zeros((2 * K_max + 1, 2), dtype=complex))

    @classmethod
    def from_modes(cls, T, K_max, modes):
        """Build from ``{k: 2-vector}`` for k >= 1; negative modes follow by reality."""
        c = np.zeros((2 * K_max + 1, 2), dtype=complex)
        for k, vec in modes.items():
            k = int(k)
            if k < 1 or k > K_max:
                raise ValueError(f"mode {k} outside 1..{K_max}")
            vec = np.asarray(vec, dtype=complex)
            c[K_max + k] = vec
            c[K_max - k] = np.conj(vec)
        return cls(T, c)

    @classmethod
    def from_complex(cls, T, c):
        """Build from scalar coefficients of z(t) = x(t) + i y(t) = sum_k c_k e^{i omega k t}."""
        c = np.asarray(c, dtype=complex)
        cr = np.conj(c[::-1])  # conj(c_{-k}) at index k
        out = np.empty((c.size, 2), dtype=complex)
        out[:, 0] = 0.5 * (c + cr)
        out[:, 1] = -0.5j * (c - cr)
        return cls(T, out)

    @classmethod
    def from_samples(cls, samples, T, K_max):
        """Least-squares (DFT) fit of uniform samples on [0, T)."""
        samples = np.asarray(samples, dtype=float)
        M = samples.shape[0]
        if M <= 2 * K_max:
            raise ValueError(f"need more than 2*K_max={2 * K_max} samples, got {M}")
        F = np.fft.fft(samples, axis=0) / M
        k = np.arange(-K_max, K_max + 1)
        return cls(T, F[k % M])

    # -- basic properties ---------------------------------------------------

    @property
    def K_max(self) -> int:
        return (self.coeffs.shape[0] - 1) // 2

    @property
    def omega(self) -> float:
        return 2.0 * math.pi / self.T

    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.K_max, self.K_max + 1)

    def coeff(self, k: int) -> np.ndarray:
        if abs(k) > self.K_max:
            return np.zeros(2, dtype=complex)
        return self.coeffs[self.K_max + k]

    def complex_coeffs(self) -> np.ndarray:
        """Scalar coefficients c_k of z = x + i y, indexed like ``modes``."""
        return self.coeffs[:, 0] + 1j * self.coeffs[:, 1]

    def reality_defect(self) -> float:
        return float(np.max(np.abs(self.coeffs - np.conj(self.coeffs[::-1])), initial=0.0))

    # -- evaluation ---------------------------------------------------------

    def _scaled(self, order):
        if order == 0:
            return self.coeffs
        factor = (1j * self.omega * self.modes) ** order
        return self.coeffs * factor[:, None]

    def sample(self, M: int, order: int = 0) -> np.ndarray:
        """Values (or derivatives) on the grid t_j = j T / M, shape (M, 2).

        Modes beyond the Nyquist range are folded, which is exact on the grid.
        """
        buf = np.zeros((M, 2), dtype=complex)
        np.add.at(buf, self.modes % M, self._scaled(order))
        return (M * np.fft.ifft(buf, axis=0)).real

    def grid(self, M: int) -> np.ndarray:
        return np.arange(M) * (self.T / M)

    def evaluate(self, t, order: int = 0) -> np.ndarray:
        """Point evaluation at arbitrary times; returns shape ``t.shape + (2,)``."""
        t = np.asarray(t, dtype=float)
        phase = np.exp(1j * self.omega * np.multiply.outer(t, self.modes))
        return (phase @ self._scaled(order)).real

    def evaluate_derivative(self, t, order: int = 1) -> np.ndarray:
        return self.evaluate(t, order)

    # -- transforms ---------------------------------------------------------

    def derivative(self, order: int = 1) -> "FourierCurve":
        return FourierCurve(self.T, self._scaled(order))

    def shifted(self, s: float) -> "FourierCurve":
        """The curve t -> u(t + s), exact via phase factors."""
        phase = np.exp(1j * self.omega * self.modes * s)
        return FourierCurve(self.T, self.coeffs * phase[:, None])

    def rotated(self, angle: float) -> "FourierCurve":
        c, s = math.cos(angle), math.sin(angle)
        R = np.array([[c, -s], [s, c]])
        return FourierCurve(self.T, self.coeffs @ R.T)

    def with_bandwidth(self, K_max: int) -> "FourierCurve":
        out = np.zeros((2 * K_max + 1, 2), dtype=complex)
        K = min(K_max, self.K_max)
        out[K_max - K : K_max + K + 1] = self.coeffs[self.K_max - K : self.K_max + K + 1]
        return FourierCurve(self.T, out)

    def _check_compatible(self, other):
        if not isinstance(other, FourierCurve):
            return NotImplemented
        if other.K_max != self.K_max or not math.isclose(other.T, self.T, rel_tol=1e-14):
            raise ValueError("curves differ in period or bandwidth")
        return None

    def __add__(self, other):
        if self._check_compatible(other) is NotImplemented:
            return NotImplemented
        return FourierCurve(self.T, self.coeffs + other.coeffs)

    def __sub__(self, other):
        if self._check_compatible(other) is NotImplemented:
            return NotImplemented
        return FourierCurve(self.T, self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return FourierCurve(self.T, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return FourierCurve(self.T, -self.coeffs)

    def __repr__(self):
        return f"FourierCurve(T={self.T!r}, K_max={self.K_max})"

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        """JSON-ready dict; only k >= 1 is stored, reality restores k < 0."""
        if np.any(self.coeffs[self.K_max] != 0):
            raise ValueError("curve has nonzero mean; the serial format stores k >= 1 only")
        rows = []
        for k in range(1, self.K_max + 1):
            x, y = self.coeffs[self.K_max + k]
            rows.append([k, float(x.real), float(x.imag), float(y.real), float(y.imag)])
        return {"T": self.T, "K_max": self.K_max, "coeffs": rows}

    @classmethod
    def from_dict(cls, data: dict) -> "FourierCurve":
        try:
            T = float(data["T"])
            K_max = int(data["K_max"])
            rows = data["coeffs"]
        except KeyError as exc:
            raise ValueError(f"curve record missing key {exc.args[0]!r}") from None
        modes = {}
        for row in rows:
            k, rx, ix, ry, iy = row
            modes[int(k)] = (complex(rx, ix), complex(ry, iy))
        return cls.from_modes(T, K_max, modes)


# -- mode matrices ------------------------------------------------------------


@dataclass(frozen=True)
class ModeMatrix:
    k: int
    A: np.ndarray
    lambda_plus: float
    lambda_minus: float


def spectral_projectors():
    """Projectors onto v+ = (1, i)/sqrt2 and v- = (1, -i)/sqrt2.

    ``J v+ = -i v+`` and ``J v- = +i v-``, hence P+ = (I + iJ)/2.
    """
    P_plus = 0.5 * (I2 + 1j * J)
    P_minus = 0.5 * (I2 - 1j * J)
    return P_plus, P_minus


def mode_matrix(k: int, omega: float, Omega: float) -> ModeMatrix:
    wk = omega * k
    A = (wk**2 + Omega**2) * I2 - 2j * wk * Omega * J
    return ModeMatrix(int(k), A, (wk - Omega) ** 2, (wk + Omega) ** 2)


def inverse_norm(k: int, omega: float, Omega: float) -> float:
    """Operator 2-norm of A_k^{-1}."""
    wk = omega * k
    return 1.0 / min((wk + Omega) ** 2, (wk - Omega) ** 2)


class Nonresonance(NamedTuple):
    ok: bool
    offending: list

    def __bool__(self):
        return self.ok


def check_nonresonance(omega, Omega, K_max, tol=RESONANCE_TOL) -> Nonresonance:
    """Test ``|omega k -/+ Omega| > tol * omega`` for all ``|k| <= K_max``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    k = np.arange(-K_max, K_max + 1)
    gap = np.minimum(np.abs(omega * k - Omega), np.abs(omega * k + Omega))
    bad = [int(j) for j in k[gap <= tol * omega]]
    return Nonresonance(not bad, bad)


# -- operators ------------------------------------------------------------


def apply_L(curve: FourierCurve, Omega: float) -> FourierCurve:
    """Lu = -u'' - 2 Omega J u' + Omega^2 u, mode by mode."""
    wk = curve.omega * curve.modes
    c = curve.coeffs
    out = ((wk**2 + Omega**2)[:, None]) * c - 2j * (wk * Omega)[:, None] * _apply_J(c)
    return FourierCurve(curve.T, out)


def apply_K(rhs: FourierCurve, Omega: float, tol: float = RESONANCE_TOL) -> FourierCurve:
    """Inverse of L on the band; raises ResonantMode for a singular active mode.

    Under Omega = 0 the k = 0 mode is removed by the zero-mean constraint.
    """
    omega = rhs.omega
    wk = omega * rhs.modes
    lam_p = (wk - Omega) ** 2
    lam_m = (wk + Omega) ** 2
    c = rhs.coeffs
    Jc = _apply_J(c)
    # P+ f = (f + i J f)/2, P- f = (f - i J f)/2
    fp = 0.5 * (c + 1j * Jc)
    fm = 0.5 * (c - 1j * Jc)
    thresh = (tol * omega) ** 2
    active = np.any(c != 0, axis=1)
    zero_mode = rhs.K_max
    bad = active & ((lam_p <= thresh) | (lam_m <= thresh))
    if abs(Omega) <= tol * omega:
        # mean must vanish up to roundoff relative to the rest of the data
        scale = float(np.max(np.abs(c), initial=0.0))
        bad[zero_mode] = bool(np.max(np.abs(c[zero_mode])) > 1e-12 * scale)
    if np.any(bad):
        k = int(rhs.modes[np.argmax(bad)])
        raise ResonantMode(k, float(min(abs(omega * k - Omega), abs(omega * k + Omega))))
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(lam_p[:, None] > thresh, fp / lam_p[:, None], 0.0) + np.where(
            lam_m[:, None] > thresh, fm / lam_m[:, None], 0.0
        )
    return FourierCurve(rhs.T, out)


def covariant_derivative(curve: FourierCurve, Omega: float) -> FourierCurve:
    """D_t u = u' + Omega J u."""
    wk = curve.omega * curve.modes
    c = curve.coeffs
    return FourierCurve(curve.T, 1j * wk[:, None] * c + Omega * _apply_J(c))


# -- norms ----------------------------------------------------------------


def inner_product_L2(a: FourierCurve, b: FourierCurve) -> float:
    """<a, b> = int_0^T a . b dt via Parseval."""
    if a.K_max != b.K_max:
        raise ValueError("bandwidth mismatch")
    return float(a.T * np.sum((np.conj(a.coeffs) * b.coeffs).real))


def _weighted_energy(curve, power):
    w = (curve.omega * curve.modes) ** (2 * power)
    return float(curve.T * np.sum(w * np.sum(np.abs(curve.coeffs) ** 2, axis=1)))


def norms(curve: FourierCurve):
    """(L2, H1, H2) norms with ``|u|_{H^s}^2 = sum_{j<=s} |u^(j)|_{L2}^2``."""
    e0 = _weighted_energy(curve, 0)
    e1 = _weighted_energy(curve, 1)
    e2 = _weighted_energy(curve, 2)
    return math.sqrt(e0), math.sqrt(e0 + e1), math.sqrt(e0 + e1 + e2)


def l2_norm(curve: FourierCurve) -> float:
    return math.sqrt(_weighted_energy(curve, 0))


def h1_norm(curve: FourierCurve) -> float:
    return math.sqrt(_weighted_energy(curve, 0) + _weighted_energy(curve, 1))


def coercivity_constant(omega: float, Omega: float) -> float:
    """c with <Lu, u> >= c |u|_{H1}^2 on zero-mean curves; needs |Omega| < omega."""
    if abs(Omega) >= omega:
        raise HypothesisViolated(f"coercivity needs |Omega| < omega, got Omega={Omega}, omega={omega}")
    return (1.0 - abs(Omega) / omega) ** 2 / (1.0 + omega**-2)
