"""Dense-matrix reference for the spectral operators on tiny lattices.

Two routes are kept apart on purpose. :func:`densify` applies any
``StateGrid -> StateGrid`` operator to every basis vector and stacks the
columns. The ``dense_*`` builders assemble the same Hamiltonians from
explicit plane-wave matrices ``exp(-i p x)/sqrt(n)``, Kronecker products
and eigendecomposition square roots, without touching an FFT. Agreement
of the two is the spectral-method equivalence check.

Vector layout is the C-order ravel of ``amplitudes`` (grid axes, then
spinor index), identical to the binary snapshot body.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, reduce
from typing import Callable, Sequence

import numpy as np

from .clifford import make_dirac_set
from .numlin import EigenSystem, NotHermitianError, dagger, herm_eig, max_asymmetry
from .phasegrid import AxisGrid, StateGrid, read_snapshot, write_snapshot

__all__ = [
    "MAX_DIM",
    "DenseSystem",
    "DimensionGuardError",
    "dense_dual",
    "dense_free_dirac",
    "dense_htilde",
    "dense_momentum",
    "dense_position",
    "dense_scalar_h",
    "dense_scalar_rate",
    "densify",
    "heisenberg_mean",
    "load_vector",
    "mass_drift",
    "operator_matrix",
    "plane_wave_matrix",
    "save_vector",
]

MAX_DIM = 4096
HERMITIAN_TOL = 1e-10

_DS = make_dirac_set()


class DimensionGuardError(ValueError):
    pass


def _dim(axes: Sequence[AxisGrid], spinor_dim: int) -> int:
    return int(np.prod([a.n for a in axes])) * spinor_dim


def _guard(axes: Sequence[AxisGrid], spinor_dim: int) -> int:
    dim = _dim(axes, spinor_dim)
    if dim > MAX_DIM:
        shape = " x ".join(str(a.n) for a in axes)
        raise DimensionGuardError(f"dense system {shape} x {spinor_dim} has dim {dim} > {MAX_DIM}")
    return dim


@dataclass(frozen=True, eq=False)
class DenseSystem:
    """Hermitian matrix on the flattened lattice x spinor basis."""

    axes: tuple[AxisGrid, ...]
    spinor_dim: int
    h_matrix: np.ndarray

    def __post_init__(self):
        axes = tuple(self.axes)
        object.__setattr__(self, "axes", axes)
        dim = _guard(axes, self.spinor_dim)
        h = np.asarray(self.h_matrix, dtype=complex)
        if h.shape != (dim, dim):
            raise ValueError(f"h_matrix shape {h.shape} does not match dim {dim}")
        scale = max(1.0, float(np.max(np.abs(h))))
        asym = max_asymmetry(h)
        if asym > HERMITIAN_TOL * scale:
            raise NotHermitianError(asym, HERMITIAN_TOL * scale)
        h = 0.5 * (h + dagger(h))
        h.setflags(write=False)
        object.__setattr__(self, "h_matrix", h)

    @property
    def dim(self) -> int:
        return self.h_matrix.shape[0]

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.n for a in self.axes) + (self.spinor_dim,)

    @property
    def cell_volume(self) -> float:
        return float(np.prod([a.spacing for a in self.axes]))

    def index(self, grid_index: Sequence[int], spinor: int = 0) -> int:
        return int(np.ravel_multi_index(tuple(grid_index) + (spinor,), self.shape))

    def unravel(self, k: int) -> tuple[tuple[int, ...], int]:
        idx = np.unravel_index(k, self.shape)
        return tuple(int(i) for i in idx[:-1]), int(idx[-1])

    def vector(self, s: StateGrid) -> np.ndarray:
        if s.axes != self.axes or s.spinor_dim != self.spinor_dim:
            raise ValueError("state lattice does not match the dense system")
        return s.amplitudes.reshape(-1).copy()

    def state(self, v: np.ndarray, positive_mass: bool = False) -> StateGrid:
        return StateGrid(self.axes, np.asarray(v).reshape(self.shape), positive_mass)

    @cached_property
    def eigen(self) -> EigenSystem:
        return herm_eig(self.h_matrix)

    def evolve(self, v: np.ndarray, t: float) -> np.ndarray:
        """``exp(-itH) v`` through the cached eigendecomposition."""
        w, u = self.eigen
        return u @ (np.exp(-1j * w * t) * (dagger(u) @ v))


def _basis_state(axes, spinor_dim, k, positive_mass) -> StateGrid:
    amps = np.zeros(_dim(axes, spinor_dim), dtype=complex)
    amps[k] = 1.0
    return StateGrid(axes, amps.reshape(tuple(a.n for a in axes) + (spinor_dim,)), positive_mass)


def operator_matrix(
    op: Callable[[StateGrid], StateGrid], axes: Sequence[AxisGrid], spinor_dim: int = 1, positive_mass: bool = False
) -> np.ndarray:
    """Dense matrix of a linear operator, one basis column at a time."""
    axes = tuple(axes)
    dim = _guard(axes, spinor_dim)
    out = np.empty((dim, dim), dtype=complex)
    for k in range(dim):
        out[:, k] = op(_basis_state(axes, spinor_dim, k, positive_mass)).amplitudes.reshape(-1)
    return out


def densify(
    op: Callable[[StateGrid], StateGrid], axes: Sequence[AxisGrid], spinor_dim: int = 1, positive_mass: bool = False
) -> DenseSystem:
    """:class:`DenseSystem` whose matrix reproduces ``op`` on every basis vector.

    ``positive_mass`` only sets the tag on the basis states for operators
    that insist on it; the basis itself is not projected.
    """
    return DenseSystem(tuple(axes), spinor_dim, operator_matrix(op, axes, spinor_dim, positive_mass))


def heisenberg_mean(sys: DenseSystem, observable: np.ndarray, state, t: float) -> complex:
    """``<psi| exp(itH) O exp(-itH) |psi>`` using the lattice inner product.

    ``state`` is a :class:`StateGrid` or a flat vector in the same layout;
    the result is divided by ``<psi|psi>``.
    """
    v = sys.vector(state) if isinstance(state, StateGrid) else np.asarray(state, dtype=complex).reshape(-1)
    vt = sys.evolve(v, t)
    return complex(np.vdot(vt, np.asarray(observable) @ vt) / np.vdot(v, v))


def mass_drift(sys: DenseSystem, state, times: Sequence[float]) -> tuple[float, float]:
    """Largest change of ``<m>`` over ``times`` and the largest ``|<i[H, m]>|``.

    Both vanish when H does not depend on tau.
    """
    mass = dense_momentum(sys.axes, sys.spinor_dim, 0)
    v = sys.vector(state) if isinstance(state, StateGrid) else np.asarray(state, dtype=complex).reshape(-1)
    means = np.array([heisenberg_mean(sys, mass, v, t).real for t in times])
    rate = 1j * (sys.h_matrix @ mass - mass @ sys.h_matrix)
    rates = [abs(heisenberg_mean(sys, rate, v, t)) for t in times]
    return float(np.max(np.abs(means - means[0]))), float(max(rates))


# -- independent dense construction ----------------------------------------


def plane_wave_matrix(axis: AxisGrid) -> np.ndarray:
    """Unitary ``U[l, k] = exp(-i p_l x_k)/sqrt(n)`` with ``p_l = 2 pi l/L``, ``l`` signed."""
    n = axis.n
    ell = np.arange(n)
    ell[ell >= n // 2] -= n
    p = 2 * np.pi * ell / axis.extent
    x = axis.origin + (np.arange(n) - n // 2) * axis.extent / n
    return np.exp(-1j * np.outer(p, x)) / np.sqrt(n)


def _signed_momenta(axis: AxisGrid) -> np.ndarray:
    ell = np.arange(axis.n)
    ell[ell >= axis.n // 2] -= axis.n
    return 2 * np.pi * ell / axis.extent


def _full_mesh(vectors) -> list[np.ndarray]:
    return [g.reshape(-1) for g in np.meshgrid(*vectors, indexing="ij")]


def _kron_all(mats) -> np.ndarray:
    return reduce(np.kron, mats)


def _spinor_lift(grid_op: np.ndarray, spinor_dim: int, matrix=None) -> np.ndarray:
    return np.kron(grid_op, np.eye(spinor_dim) if matrix is None else matrix)


def dense_position(axes: Sequence[AxisGrid], spinor_dim: int, f: Callable[..., np.ndarray], matrix=None) -> np.ndarray:
    """Multiplication by ``f(tau, x...)`` (times ``matrix`` on the spinor index)."""
    vals = np.broadcast_to(f(*_full_mesh([a.points for a in axes])), (_dim(axes, 1),))
    return _spinor_lift(np.diag(vals.astype(complex)), spinor_dim, matrix)


def _plane_waves(axes) -> np.ndarray:
    return _kron_all([plane_wave_matrix(a) for a in axes])


def _dual_grid_op(axes, F) -> np.ndarray:
    U = _plane_waves(axes)
    vals = np.broadcast_to(F(*_full_mesh([_signed_momenta(a) for a in axes])), (U.shape[0],))
    return dagger(U) @ (vals[:, None] * U)


def _axis_momentum(axis: AxisGrid, power: int = 1) -> np.ndarray:
    u = plane_wave_matrix(axis)
    return dagger(u) @ (_signed_momenta(axis)[:, None] ** power * u)


def _slots(axes, factors: dict) -> np.ndarray:
    """Kronecker product with ``factors[i]`` on axis ``i`` and identities elsewhere."""
    return _kron_all([factors.get(i, np.eye(a.n)) for i, a in enumerate(axes)])


def dense_momentum(axes: Sequence[AxisGrid], spinor_dim: int, axis: int, matrix=None) -> np.ndarray:
    """Conjugate variable of axis ``axis`` (m for tau, p_j for x_j)."""
    axes = tuple(axes)
    _guard(axes, spinor_dim)
    return _spinor_lift(_slots(axes, {axis: _axis_momentum(axes[axis])}), spinor_dim, matrix)


def dense_dual(axes: Sequence[AxisGrid], spinor_dim: int, F: Callable[..., np.ndarray], matrix=None) -> np.ndarray:
    """``F(m, p...)`` as a plane-wave sum (times ``matrix`` on the spinor index)."""
    _guard(axes, spinor_dim)
    return _spinor_lift(_dual_grid_op(tuple(axes), F), spinor_dim, matrix)


def _eig_power(q: np.ndarray, power: float) -> np.ndarray:
    w, u = herm_eig(0.5 * (q + dagger(q)), tol=1e-9 * max(1.0, float(np.max(np.abs(q)))))
    w = np.clip(w, 0.0, None)
    scale = max(1.0, float(np.max(w)))
    wp = np.zeros_like(w)
    ok = w > 1e-12 * scale
    wp[ok] = w[ok] ** power
    return (u * wp) @ dagger(u)


def _kinetic_square(axes, metric, centroid) -> np.ndarray:
    names = tuple(a.name for a in axes[1:])
    G = metric.inverse_spatial(centroid, names)
    q = _slots(axes, {0: _axis_momentum(axes[0], 2)})
    for j in range(len(names)):
        for k in range(len(names)):
            if G[j, k] == 0:
                continue
            if j == k:
                term = _slots(axes, {j + 1: _axis_momentum(axes[j + 1], 2)})
            else:
                term = _slots(axes, {j + 1: _axis_momentum(axes[j + 1]), k + 1: _axis_momentum(axes[k + 1])})
            q = q + G[j, k] * term
    return q


def _lapse_matrix(axes, metric) -> np.ndarray:
    names = tuple(a.name for a in axes[1:])
    return dense_position(axes, 1, lambda tau, *x: metric.lapse(dict(zip(names, x))))


def dense_scalar_h(axes: Sequence[AxisGrid], metric, centroid: dict) -> np.ndarray:
    """``(f K + K f)/2`` with ``K`` the matrix square root of ``m^2 + p G p``."""
    axes = tuple(axes)
    _guard(axes, 1)
    k = _eig_power(_kinetic_square(axes, metric, centroid), 0.5)
    f = _lapse_matrix(axes, metric)
    return 0.5 * (f @ k + k @ f)


def dense_scalar_rate(axes: Sequence[AxisGrid], metric, centroid: dict) -> np.ndarray:
    """Symmetrized ``m f (m^2 + p G p)^(-1/2)``; the null mode maps to zero."""
    axes = tuple(axes)
    _guard(axes, 1)
    r = dense_momentum(axes, 1, 0) @ _eig_power(_kinetic_square(axes, metric, centroid), -0.5)
    f = _lapse_matrix(axes, metric)
    return 0.5 * (f @ r + r @ f)


def _dirac_pieces(axes) -> tuple[np.ndarray, list[np.ndarray]]:
    from .gravdirac import SPATIAL

    mass = dense_momentum(axes, 4, 0, _DS.beta)
    kin = [dense_momentum(axes, 4, i, _DS.alpha[SPATIAL.index(a.name)]) for i, a in enumerate(axes[1:], start=1)]
    return mass, kin


def dense_free_dirac(axes: Sequence[AxisGrid]) -> np.ndarray:
    """``alpha.p + beta m`` as a dense matrix."""
    axes = tuple(axes)
    _guard(axes, 4)
    mass, kin = _dirac_pieces(axes)
    return mass + sum(kin)


def dense_htilde(cfg, include_w: bool = True) -> np.ndarray:
    """Weak-field Hamiltonian ``H0 + {alpha.p, phi}/... + phi beta m + W`` built densely.

    Written as ``H0 + sum_j (alpha_j p_j phi + phi alpha_j p_j) + phi beta m + W``.
    """
    from .clifford import VierbeinField, w_term

    axes = tuple(cfg.axes)
    _guard(axes, 4)
    names = [a.name for a in axes]
    mass, kin = _dirac_pieces(axes)
    x3_at = names.index("x3") if "x3" in names else None

    def phi_fn(*coords):
        return cfg.g * coords[x3_at] if x3_at is not None else np.zeros_like(coords[0])

    # phi is diagonal: scale rows and columns instead of multiplying matrices
    phi = np.diag(dense_position(axes, 4, phi_fn)).real
    h = mass + sum(kin)
    for k in kin:
        h = h + k * phi[None, :] + phi[:, None] * k
    h = h + phi[:, None] * mass
    if include_w:
        v = VierbeinField(cfg.g)
        mesh = _full_mesh([a.points for a in axes])
        x3 = mesh[x3_at] if x3_at is not None else np.zeros(mesh[0].size)
        blocks = [w_term(v, _DS, (0.0, 0.0, float(z)), cfg.w_step) for z in x3]
        w = np.zeros_like(h)
        for i, b in enumerate(blocks):
            w[4 * i : 4 * i + 4, 4 * i : 4 * i + 4] = b
        h = h + w
    return h


# -- snapshot bridge --------------------------------------------------------


def save_vector(path, sys: DenseSystem, v: np.ndarray, positive_mass: bool = False) -> None:
    """Write a dense-layout vector in the lattice snapshot format."""
    write_snapshot(path, sys.state(v, positive_mass))


def load_vector(path, sys: DenseSystem) -> np.ndarray:
    return sys.vector(read_snapshot(path))
