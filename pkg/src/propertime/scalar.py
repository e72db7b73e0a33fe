"""Scalar particle in a static metric with proper time and mass as conjugate operators.

The Hamiltonian ``f(x) sqrt(m^2 + g^{jk}(x) p_j p_k)`` is not Hermitian
for a position-dependent lapse, so it is used in the symmetric ordering
``(f K + K f)/2``. The inverse spatial metric inside ``K`` is frozen at
the packet centroid, which keeps ``K`` diagonal in the (m, p)
representation; :mod:`propertime.oracle` builds the same operator densely.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .phasegrid import GridError, StateGrid, apply_diag_dual, apply_diag_position, expectation, position_moments

__all__ = [
    "MetricDomainError",
    "MetricModel",
    "hamiltonian_operator",
    "kinetic_symbol",
    "rate_operator",
    "scalar_h_apply",
    "taudot_flat_mean",
    "taudot_mean_at_zero",
    "taudot_operator",
    "velocity_to_momentum",
]

SPATIAL = ("x1", "x2", "x3")


class MetricDomainError(GridError):
    pass


@dataclass(frozen=True)
class MetricModel:
    """Static metric with ``g_00 = -f^2`` and ``g_j0 = 0``.

    Use the constructors :meth:`flat`, :meth:`schwarzschild`,
    :meth:`weakfield` or :meth:`custom`. Coordinates are passed as a
    mapping from axis name to broadcastable arrays; missing spatial axes
    are taken as zero.
    """

    kind: str
    a: float = 0.0
    g: float = 0.0
    margin: float = 10.0
    lapse_fn: Callable | None = None
    inverse_fn: Callable | None = None

    @classmethod
    def flat(cls) -> "MetricModel":
        return cls("flat")

    @classmethod
    def schwarzschild(cls, a: float, margin: float = 10.0) -> "MetricModel":
        if not a > 0:
            raise ValueError("Schwarzschild constant a must be positive")
        return cls("schwarzschild", a=a, margin=margin)

    @classmethod
    def weakfield(cls, g: float) -> "MetricModel":
        return cls("weakfield", g=g)

    @classmethod
    def custom(cls, lapse: Callable, inverse_spatial: Callable | None = None) -> "MetricModel":
        """``lapse(coords)`` and optionally ``inverse_spatial(coords, names)``; flat spatial part by default."""
        return cls("custom", lapse_fn=lapse, inverse_fn=inverse_spatial)

    def _xyz(self, coords) -> list:
        return [coords.get(n, 0.0) for n in SPATIAL]

    def radius(self, coords):
        return np.sqrt(sum(np.asarray(c, dtype=float) ** 2 for c in self._xyz(coords)))

    def check_domain(self, coords) -> None:
        if self.kind == "schwarzschild":
            r_min = float(np.min(self.radius(coords)))
            bound = 4 * self.a * (1 + self.margin)
            if r_min <= bound:
                raise MetricDomainError(f"grid reaches r = {r_min:.4g}, inside the allowed domain r > {bound:.4g}")
        elif self.kind == "weakfield":
            x3 = np.asarray(coords.get("x3", 0.0))
            if np.max(np.abs(2 * self.g * x3)) >= 0.1:
                raise MetricDomainError("weak-field guard |2 g x3| < 0.1 violated on the grid")

    def lapse(self, coords):
        if self.kind == "flat":
            return np.ones_like(np.asarray(self.radius(coords)))
        if self.kind == "schwarzschild":
            return np.sqrt(1 - 4 * self.a / self.radius(coords))
        if self.kind == "weakfield":
            return np.sqrt(1 + 2 * self.g * np.asarray(coords.get("x3", 0.0), dtype=float))
        return np.asarray(self.lapse_fn(coords), dtype=float)

    def inverse_spatial(self, coords, names) -> np.ndarray:
        """``g^{jk}`` restricted to the axes in ``names``, trailing shape ``(k, k)``."""
        idx = [SPATIAL.index(n) for n in names]
        if self.kind == "flat":
            return np.eye(len(idx))
        if self.kind == "schwarzschild":
            # spatial part dr^2/f^2 + r^2 dOmega^2: g^{jk} = delta - (1 - f^2) n_j n_k
            xyz = np.array([float(np.asarray(c)) for c in self._xyz(coords)])
            r = np.linalg.norm(xyz)
            n = xyz / r
            f2 = 1 - 4 * self.a / r
            full = np.eye(3) - (1 - f2) * np.outer(n, n)
            return full[np.ix_(idx, idx)]
        if self.kind == "weakfield":
            x3 = float(np.asarray(coords.get("x3", 0.0)))
            return np.eye(len(idx)) / (1 - 2 * self.g * x3)
        if self.inverse_fn is None:
            return np.eye(len(idx))
        return np.asarray(self.inverse_fn(coords, names), dtype=float)


def taudot_flat_mean(m_prime: float, p_prime) -> float:
    """Flat-space mean proper-time rate ``m'/sqrt(m'^2 + |p'|^2)``."""
    if not m_prime > 0:
        raise ValueError(f"m' must be positive, got {m_prime}")
    p = np.asarray(p_prime, dtype=float)
    return float(m_prime / np.sqrt(m_prime**2 + p @ p))


def velocity_to_momentum(v, m_prime: float) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    v2 = float(v @ v)
    if v2 >= 1:
        raise ValueError(f"|v| = {np.sqrt(v2):.6g} must be below 1")
    if not m_prime > 0:
        raise ValueError(f"m' must be positive, got {m_prime}")
    return m_prime * v / np.sqrt(1 - v2)


def _coords(s: StateGrid) -> dict:
    mesh = s.coords()
    return {a.name: c for a, c in zip(s.axes, mesh) if a.name != "tau"}


def _centroid(s: StateGrid) -> dict:
    return {n: position_moments(s, n)[0] for n in s.spatial_names}


def _require_scalar(s: StateGrid, metric: MetricModel) -> None:
    if s.spinor_dim != 1:
        raise GridError("scalar operators need spinor_dim 1")
    if not s.positive_mass:
        raise GridError("scalar operators need a positive-mass state (see project_positive_mass)")
    metric.check_domain(_coords(s))


def _symbol_for(G: np.ndarray) -> Callable[..., np.ndarray]:
    def symbol(m, *p):
        q = m**2
        for j, pj in enumerate(p):
            for k, pk in enumerate(p):
                if G[j, k] != 0:
                    q = q + G[j, k] * pj * pk
        return q

    return symbol


def kinetic_symbol(s: StateGrid, metric: MetricModel) -> Callable[..., np.ndarray]:
    """``(m, p...) -> m^2 + p G p`` with ``G`` the inverse spatial metric at the centroid."""
    return _symbol_for(metric.inverse_spatial(_centroid(s), s.spatial_names))


def _symmetrized(metric: MetricModel, names, centroid, dual_fn):
    """Linear map ``u -> (f D u + D f u)/2`` with ``D`` diagonal in the dual lattice."""
    symbol = _symbol_for(metric.inverse_spatial(centroid, tuple(names)))

    def lapse(tau, *x):
        return metric.lapse(dict(zip(names, x)))

    def dual(*mp):
        return dual_fn(mp[0], symbol(*mp))

    def op(u: StateGrid) -> StateGrid:
        a = apply_diag_position(apply_diag_dual(u, dual), lapse)
        b = apply_diag_dual(apply_diag_position(u, lapse), dual)
        return u.replace(0.5 * (a.amplitudes + b.amplitudes))

    return op


def _sqrt_kin(m, q):
    return np.sqrt(q)


def _rate(m, q):
    # the m = p = 0 mode is removed by positive-mass projection
    return np.divide(m, np.sqrt(q), out=np.zeros(np.broadcast(m, q).shape), where=q > 0)


def hamiltonian_operator(metric: MetricModel, names, centroid: dict):
    """``(f K + K f)/2`` with ``K = sqrt(m^2 + p G p)`` and ``G`` frozen at ``centroid``.

    Linear in its argument; no state checks. :func:`scalar_h_apply` is
    the checked entry point.
    """
    return _symmetrized(metric, names, centroid, _sqrt_kin)


def rate_operator(metric: MetricModel, names, centroid: dict):
    """Symmetrized ``m f (m^2 + p G p)^(-1/2)`` with ``G`` frozen at ``centroid``."""
    return _symmetrized(metric, names, centroid, _rate)


def scalar_h_apply(s: StateGrid, metric: MetricModel) -> StateGrid:
    """``(f K + K f) psi / 2`` with ``K = sqrt(m^2 + p G p)``."""
    _require_scalar(s, metric)
    return hamiltonian_operator(metric, s.spatial_names, _centroid(s))(s)


def taudot_operator(s: StateGrid, metric: MetricModel):
    """Symmetrized ``m f(x) (m^2 + p G p)^(-1/2)``, the t = 0 proper-time rate."""
    _require_scalar(s, metric)
    return rate_operator(metric, s.spatial_names, _centroid(s))


def taudot_mean_at_zero(s: StateGrid, metric: MetricModel) -> float:
    return float(expectation(s, taudot_operator(s, metric)).real)
