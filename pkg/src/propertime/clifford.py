"""Dirac matrices in the block-Pauli representation and weak-field spin connection.

Conventions: ``eta = diag(-1, 1, 1, 1)``, ``gamma^0 = beta``,
``gamma^j = beta alpha_j``, so ``{gamma^a, gamma^b} = -2 eta^{ab}``.
Spacetime points are ``(t, x1, x2, x3)``; a 3-vector is read as the
spatial part at ``t = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from .numlin import dagger

__all__ = [
    "ETA",
    "PAULI",
    "DiracSet",
    "StepTooLargeError",
    "VierbeinField",
    "WeakFieldDomainError",
    "make_dirac_set",
    "sigma_pair",
    "spin_connection",
    "spin_connection_exact",
    "w_term",
]

ETA = np.diag([-1.0, 1.0, 1.0, 1.0])

PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)

WEAK_FIELD_LIMIT = 0.1


class WeakFieldDomainError(ValueError):
    pass


class StepTooLargeError(ValueError):
    pass


@dataclass(frozen=True)
class DiracSet:
    alpha: np.ndarray  # (3, 4, 4)
    beta: np.ndarray  # (4, 4)

    @cached_property
    def gamma(self) -> np.ndarray:
        return np.stack([self.beta] + [self.beta @ a for a in self.alpha])

    @property
    def identity(self) -> np.ndarray:
        return np.eye(4, dtype=complex)


def make_dirac_set() -> DiracSet:
    zero = np.zeros((2, 2), dtype=complex)
    one = np.eye(2, dtype=complex)
    alpha = np.stack([np.block([[zero, s], [s, zero]]) for s in PAULI])
    beta = np.block([[one, zero], [zero, -one]])
    for m in (alpha, beta):
        m.setflags(write=False)
    return DiracSet(alpha=alpha, beta=beta)


def sigma_pair(ds: DiracSet, a: int, b: int) -> np.ndarray:
    """``Sigma^{ab} = [gamma^a, gamma^b] / 4``."""
    for i in (a, b):
        if i not in (0, 1, 2, 3):
            raise IndexError(f"spacetime index {i} not in 0..3")
    ga, gb = ds.gamma[a], ds.gamma[b]
    return 0.25 * (ga @ gb - gb @ ga)


@dataclass(frozen=True)
class VierbeinField:
    """Diagonal vierbein of ``ds^2 = -(1+2phi) dt^2 + (1-2phi) dx^2``.

    ``phi = g x3`` unless ``potential`` (and its ``gradient``, needed only
    by :func:`spin_connection_exact`) are supplied. A potential that is
    linear in x makes the metric linear, so central differences are exact;
    curved potentials exist to exercise the finite-difference error.
    """

    g: float
    potential: Callable[[np.ndarray], float] | None = None
    gradient: Callable[[np.ndarray], np.ndarray] | None = None

    def phi(self, x) -> float:
        xs = _spatial(x)
        if self.potential is not None:
            return float(self.potential(xs))
        return self.g * xs[2]

    def grad_phi(self, x) -> np.ndarray:
        xs = _spatial(x)
        if self.potential is None:
            return np.array([0.0, 0.0, self.g])
        if self.gradient is None:
            raise ValueError("custom potential needs an explicit gradient for the closed form")
        return np.asarray(self.gradient(xs), dtype=float)

    def check_domain(self, x) -> None:
        two_phi = 2.0 * self.phi(x)
        if abs(two_phi) >= WEAK_FIELD_LIMIT:
            raise WeakFieldDomainError(
                f"|2 phi| = {abs(two_phi):.3g} at x = {tuple(_spatial(x))} exceeds the weak-field limit {WEAK_FIELD_LIMIT}"
            )

    def components(self, x) -> np.ndarray:
        """Matrix ``V[a, mu] = V^a_mu`` at ``x``."""
        self.check_domain(x)
        p = self.phi(x)
        return np.diag([np.sqrt(1 + 2 * p), *([np.sqrt(1 - 2 * p)] * 3)])

    def metric(self, x) -> np.ndarray:
        v = self.components(x)
        return v.T @ ETA @ v


def _spatial(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape == (4,):
        return x[1:]
    if x.shape == (3,):
        return x
    raise ValueError(f"point must have 3 or 4 components, got shape {x.shape}")


def _spatial_derivative(fn, x, h: float) -> np.ndarray:
    """Central differences of ``fn`` along t, x1, x2, x3; the t slot is exactly zero (static)."""
    xs = _spatial(x)
    f0 = np.asarray(fn(xs))
    out = np.zeros((4,) + f0.shape)
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        out[j + 1] = (np.asarray(fn(xs + e)) - np.asarray(fn(xs - e))) / (2 * h)
    return out


def _connection(v: VierbeinField, ds: DiracSet, x, h: float) -> np.ndarray:
    xs = _spatial(x)
    V = v.components(xs)
    g = V.T @ ETA @ V
    g_inv = np.linalg.inv(g)
    dg = _spatial_derivative(v.metric, xs, h)  # dg[s, m, n] = d_s g_mn
    # christoffel[l, m, n] = 1/2 g^{ls} (d_m g_sn + d_n g_sm - d_s g_mn)
    christoffel = 0.5 * np.einsum(
        "ls,smn->lmn", g_inv, np.transpose(dg, (1, 0, 2)) + np.transpose(dg, (1, 2, 0)) - dg
    )
    v_low = ETA @ V  # V_{b nu}
    dv_low = _spatial_derivative(lambda y: ETA @ v.components(y), xs, h)  # [mu, b, nu]
    cov = dv_low - np.einsum("lmn,bl->mbn", christoffel, v_low)  # nabla_mu V_{b nu}
    inv = np.linalg.inv(V)  # inv[nu, a] = V_a^nu
    # omega[mu, a, b] = V_a^nu nabla_mu V_{b nu}
    omega = np.einsum("na,mbn->mab", inv, cov)
    sig = np.array([[sigma_pair(ds, a, b) for b in range(4)] for a in range(4)])
    return 0.5 * np.einsum("mab,abij->mij", omega, sig)


def spin_connection(v: VierbeinField, x, h: float, ds: DiracSet | None = None) -> np.ndarray:
    """``Gamma_mu(x)`` for mu = 0..3, shape ``(4, 4, 4)``.

    Christoffel symbols and vierbein gradients come from second-order
    central differences with step ``h``. The result is also evaluated at
    ``h/2``; a relative change above 10% means ``h`` does not resolve the
    field and :class:`StepTooLargeError` is raised.
    """
    ds = ds or make_dirac_set()
    xs = _spatial(x)
    for j in range(3):
        for sgn in (-1.0, 1.0):
            e = np.zeros(3)
            e[j] = sgn * h
            v.check_domain(xs + e)
    coarse = _connection(v, ds, xs, h)
    fine = _connection(v, ds, xs, h / 2)
    scale = np.max(np.abs(fine))
    change = np.max(np.abs(coarse - fine))
    if change > 0.1 * scale and change > 1e-12:
        raise StepTooLargeError(f"halving h={h:g} changes Gamma by {change:.3e} (scale {scale:.3e})")
    return coarse


def spin_connection_exact(v: VierbeinField, x, ds: DiracSet | None = None) -> np.ndarray:
    """Closed-form ``Gamma_mu`` for the diagonal weak-field vierbein.

    With ``A = (1+2phi)^(1/2)``, ``B = (1-2phi)^(1/2)``:
    ``Gamma_0 = -(1/2) alpha_k d_k phi / (A B)`` and
    ``Gamma_j = (1/2) sum_{k != j} alpha_j alpha_k d_k phi / B^2``.
    For ``phi = g x3`` this is ``Gamma_0 = -(g/2) alpha_3/(A B)``,
    ``Gamma_{1,2} = (g/2) alpha_{1,2} alpha_3 / B^2``, ``Gamma_3 = 0``.
    """
    ds = ds or make_dirac_set()
    v.check_domain(x)
    p = v.phi(x)
    grad = v.grad_phi(x)
    a, b = np.sqrt(1 + 2 * p), np.sqrt(1 - 2 * p)
    out = np.zeros((4, 4, 4), dtype=complex)
    out[0] = -0.5 * np.einsum("k,kij->ij", grad, ds.alpha) / (a * b)
    for j in range(3):
        for k in range(3):
            if k != j:
                out[j + 1] += 0.5 * grad[k] * ds.alpha[j] @ ds.alpha[k] / b**2
    return out


def _w_raw(v: VierbeinField, ds: DiracSet, x, h: float) -> np.ndarray:
    gam = spin_connection(v, x, h, ds)
    V = v.components(x)
    inv = np.linalg.inv(V)  # inv[mu, a] = V_a^mu
    s = np.einsum("ma,aij,mjk->ik", inv, ds.gamma, gam)
    return -1j * V[0, 0] * ds.beta @ s


def w_term(v: VierbeinField, ds: DiracSet, x, h: float = 1e-3) -> np.ndarray:
    """Hermitian part ``(W + W^dagger)/2`` of the spin-connection term at ``x``.

    For this diagonal static vierbein W is ``i alpha_3`` times a real
    function of x3, so the Hermitian part vanishes up to finite-difference
    noise; it is still computed rather than assumed.
    """
    w = _w_raw(v, ds, x, h)
    return 0.5 * (w + dagger(w))
