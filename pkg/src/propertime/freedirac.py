"""Free spin-1/2 particle at fixed momentum and mass: exact 4x4 sector dynamics.

Momentum, mass and ``H = alpha.p + beta m`` commute, so at a fixed pair
``(p', m')`` every Heisenberg-picture statement reduces to a 4x4 matrix
identity. Two independent routes are kept for the evolved operators:
``*_heisenberg`` conjugates by ``exp(+-itH)`` from the eigendecomposition,
``*_closed_form`` uses ``H^2 = E^2`` so that
``exp(-2itH) = cos(2Et) - i sin(2Et) H/E`` and ``H^-1 = H/E^2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .clifford import DiracSet, make_dirac_set
from .numlin import unitary_exp

__all__ = [
    "DIRAC_SEED",
    "NotPositiveEnergyError",
    "Sector",
    "alpha_closed_form",
    "alpha_heisenberg",
    "alpha_square_check",
    "beta_closed_form",
    "beta_dot_heisenberg",
    "beta_heisenberg",
    "positive_basis",
    "positive_projector",
    "random_sectors",
    "taudot_mean_positive",
    "taudot_via_pH_substitution",
    "zitter_suppression",
]

DIRAC_SEED = 0x0D17AC

_DS = make_dirac_set()


class NotPositiveEnergyError(ValueError):
    def __init__(self, residual: float):
        self.residual = residual
        super().__init__(f"spinor is not in the positive-energy subspace: |P+ u - u| = {residual:.3e}")


@dataclass(frozen=True)
class Sector:
    p_prime: tuple[float, float, float]
    m_prime: float

    def __post_init__(self):
        p = tuple(float(x) for x in np.asarray(self.p_prime, dtype=float).reshape(3))
        object.__setattr__(self, "p_prime", p)
        if not self.m_prime > 0:
            raise ValueError(f"m' must be positive, got {self.m_prime}")

    @property
    def p(self) -> np.ndarray:
        return np.array(self.p_prime)

    @property
    def dirac(self) -> DiracSet:
        return _DS

    @cached_property
    def E(self) -> float:
        return float(np.sqrt(self.m_prime**2 + self.p @ self.p))

    @cached_property
    def H(self) -> np.ndarray:
        return np.einsum("j,jab->ab", self.p, _DS.alpha) + self.m_prime * _DS.beta

    @cached_property
    def H_inv(self) -> np.ndarray:
        return self.H / self.E**2

    def exp_2itH(self, t: float) -> np.ndarray:
        """``exp(-2itH)`` from ``H^2 = E^2``."""
        return np.cos(2 * self.E * t) * np.eye(4) - 1j * np.sin(2 * self.E * t) * self.H / self.E


def random_sectors(n: int, seed: int = DIRAC_SEED, m_range=(0.1, 10.0), p_max: float = 10.0) -> list[Sector]:
    """Sectors with m' uniform in ``m_range`` and p' uniform in direction, |p'| uniform in [0, p_max]."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        m = rng.uniform(*m_range)
        d = rng.normal(size=3)
        d /= np.linalg.norm(d)
        out.append(Sector(tuple(rng.uniform(0, p_max) * d), m))
    return out


def _heisenberg(sec: Sector, op: np.ndarray, t: float) -> np.ndarray:
    return unitary_exp(sec.H, -t) @ op @ unitary_exp(sec.H, t)


def beta_heisenberg(sec: Sector, t: float) -> np.ndarray:
    """``exp(itH) beta exp(-itH)``; equal to the proper-time rate operator."""
    return _heisenberg(sec, _DS.beta, t)


def beta_closed_form(sec: Sector, t: float) -> np.ndarray:
    """``(beta - m' H^-1) exp(-2itH) + m' H^-1``."""
    mh = sec.m_prime * sec.H_inv
    return (_DS.beta - mh) @ sec.exp_2itH(t) + mh


def beta_dot_heisenberg(sec: Sector, t: float) -> np.ndarray:
    """``d beta(t)/dt = i [H, beta(t)]``."""
    b = beta_heisenberg(sec, t)
    return 1j * (sec.H @ b - b @ sec.H)


def alpha_heisenberg(sec: Sector, t: float) -> np.ndarray:
    """Velocity operators ``exp(itH) alpha_j exp(-itH)``, shape (3, 4, 4)."""
    return np.stack([_heisenberg(sec, a, t) for a in _DS.alpha])


def alpha_closed_form(sec: Sector, t: float) -> np.ndarray:
    """``(alpha_j - p'_j H^-1) exp(-2itH) + p'_j H^-1``."""
    u = sec.exp_2itH(t)
    return np.stack([(a - pj * sec.H_inv) @ u + pj * sec.H_inv for a, pj in zip(_DS.alpha, sec.p)])


def alpha_square_check(sec: Sector, t: float) -> float:
    """``max|sum_j alpha_j(t)^2 - 3|``; the velocity operator squares to 3, not below 1."""
    a = alpha_heisenberg(sec, t)
    return float(np.max(np.abs(np.einsum("jab,jbc->ac", a, a) - 3 * np.eye(4))))


def positive_projector(sec: Sector) -> np.ndarray:
    """``P+ = (1 + H/E)/2``."""
    return 0.5 * (np.eye(4) + sec.H / sec.E)


def positive_basis(sec: Sector) -> np.ndarray:
    """Orthonormal 4x2 basis of the range of P+, from its two largest columns."""
    P = positive_projector(sec)
    order = np.argsort(-np.linalg.norm(P, axis=0), kind="stable")[:2]
    q, _ = np.linalg.qr(P[:, np.sort(order)])
    return q


def zitter_suppression(sec: Sector) -> float:
    """``max|P+ (beta - m' H^-1) P+|``; zero for every sector."""
    P = positive_projector(sec)
    return float(np.max(np.abs(P @ (_DS.beta - sec.m_prime * sec.H_inv) @ P)))


def taudot_mean_positive(sec: Sector, spinor, t: float, tol: float = 1e-10) -> float:
    u = np.asarray(spinor, dtype=complex)
    u = u / np.linalg.norm(u)
    residual = float(np.linalg.norm(positive_projector(sec) @ u - u))
    if residual > tol:
        raise NotPositiveEnergyError(residual)
    return float(np.vdot(u, beta_heisenberg(sec, t) @ u).real)


def taudot_via_pH_substitution(sec: Sector) -> float:
    """``sqrt(1 - p'^2/E^2)``: the classical rate with the velocity replaced by ``p H^-1``."""
    return float(np.sqrt(1.0 - (sec.p @ sec.p) / sec.E**2))
