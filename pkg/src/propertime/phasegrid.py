"""Lattice realization of the extended phase space (tau, m) x (x, p).

A :class:`StateGrid` holds amplitudes over a tau axis, one to three
spatial axes and a spinor index, in that order. Both representations are
periodic; the conjugate variable on each axis is diagonal after an FFT,
so ``m = -i d/dtau`` and ``p_j = -i d/dx_j`` are exact on band-limited
states. Amplitudes are normalized so that ``sum |psi|^2 * dV = 1``.
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, NamedTuple, Sequence

import numpy as np

__all__ = [
    "AxisGrid",
    "GridError",
    "PacketTooNarrowError",
    "ProjectionResult",
    "StateGrid",
    "TailsClippedError",
    "apply_diag_dual",
    "apply_diag_position",
    "apply_spinor",
    "compose",
    "dual_moments",
    "dual_op",
    "expectation",
    "fit_extent",
    "gaussian_packet",
    "inner",
    "position_moments",
    "position_op",
    "project_positive_mass",
    "read_snapshot",
    "spinor_op",
    "write_snapshot",
]

AXIS_NAMES = ("tau", "x1", "x2", "x3")
TAIL_TOL = 1e-8
# -2 ln(TAIL_TOL): a Gaussian density falls below TAIL_TOL of its peak
# this many variances away from the center.
_TAIL_SIGMAS = float(np.sqrt(-2.0 * np.log(TAIL_TOL)))


class GridError(ValueError):
    pass


class PacketTooNarrowError(GridError):
    """The packet's conjugate-space Gaussian is clipped by the dual band."""


class TailsClippedError(GridError):
    """The packet's position-space tails reach the cell boundary."""


@dataclass(frozen=True)
class AxisGrid:
    name: str
    n: int
    extent: float
    origin: float = 0.0

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise GridError(f"axis name must be one of {AXIS_NAMES}, got {self.name!r}")
        if self.n < 2 or self.n & (self.n - 1):
            raise GridError(f"axis {self.name}: n must be a power of two >= 2, got {self.n}")
        if not self.extent > 0:
            raise GridError(f"axis {self.name}: extent must be positive")

    @property
    def spacing(self) -> float:
        return self.extent / self.n

    @property
    def dual_spacing(self) -> float:
        return 2 * np.pi / self.extent

    @property
    def points(self) -> np.ndarray:
        return self.origin + (np.arange(self.n) - self.n // 2) * self.spacing

    @property
    def dual_points(self) -> np.ndarray:
        """Conjugate lattice in FFT order, covering ``[-pi n/L, pi n/L)``."""
        return 2 * np.pi * np.fft.fftfreq(self.n, d=self.spacing)

    @property
    def band_edge(self) -> float:
        return np.pi * self.n / self.extent

    def with_origin(self, origin: float) -> "AxisGrid":
        return AxisGrid(self.name, self.n, self.extent, origin)


def fit_extent(
    n: int, width: float, carrier: float = 0.0, margin: float = 1.0, max_extent: float | None = None
) -> float:
    """Extent that keeps both tails of a Gaussian below ``TAIL_TOL``.

    Position tails need ``L/2 >= k*width`` and dual tails need
    ``pi*n/L >= |carrier| + k/(2*width)`` with ``k = sqrt(-2 ln TAIL_TOL)``.
    Returns the geometric mean of the two bounds (scaled by ``margin``
    on the position side), clipped to ``max_extent``; raises
    :class:`GridError` when no admissible extent exists.
    """
    lo = 2 * _TAIL_SIGMAS * width * margin
    hi = np.pi * n / (abs(carrier) + _TAIL_SIGMAS / (2 * width))
    if max_extent is not None:
        hi = min(hi, max_extent)
    if lo > hi:
        raise GridError(
            f"no extent fits width {width:g} with carrier {carrier:g} on {n} points (need L in [{lo:.4g}, {hi:.4g}])"
        )
    return float(np.sqrt(lo * hi))


@dataclass(frozen=True, eq=False)
class StateGrid:
    axes: tuple[AxisGrid, ...]
    amplitudes: np.ndarray = field(repr=False)
    positive_mass: bool = False

    def __post_init__(self):
        axes = tuple(self.axes)
        object.__setattr__(self, "axes", axes)
        names = [a.name for a in axes]
        if not names or names[0] != "tau":
            raise GridError("first axis must be the tau axis")
        spatial = names[1:]
        if not 1 <= len(spatial) <= 3 or len(set(spatial)) != len(spatial) or "tau" in spatial:
            raise GridError(f"need one to three distinct spatial axes, got {spatial}")
        amps = np.asarray(self.amplitudes, dtype=complex)
        shape = tuple(a.n for a in axes)
        if amps.ndim != len(axes) + 1 or amps.shape[:-1] != shape:
            raise GridError(f"amplitude shape {amps.shape} does not match axes {shape} + (spinor,)")
        if amps.shape[-1] not in (1, 4):
            raise GridError(f"spinor dimension must be 1 or 4, got {amps.shape[-1]}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def spinor_dim(self) -> int:
        return self.amplitudes.shape[-1]

    @property
    def grid_shape(self) -> tuple[int, ...]:
        return self.amplitudes.shape[:-1]

    @property
    def ndim(self) -> int:
        return len(self.axes)

    @property
    def cell_volume(self) -> float:
        return float(np.prod([a.spacing for a in self.axes]))

    def axis(self, name: str) -> AxisGrid:
        for a in self.axes:
            if a.name == name:
                return a
        raise KeyError(name)

    def axis_index(self, name: str) -> int:
        return [a.name for a in self.axes].index(name)

    @property
    def spatial_names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.axes[1:])

    def coords(self) -> list[np.ndarray]:
        """Open-mesh position coordinates, one broadcastable array per axis."""
        return _open_mesh([a.points for a in self.axes])

    def dual_coords(self) -> list[np.ndarray]:
        """Open-mesh conjugate coordinates (m, p...) in FFT order."""
        return _open_mesh([a.dual_points for a in self.axes])

    def norm2(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2) * self.cell_volume)

    def to_dual(self) -> np.ndarray:
        return np.fft.fftn(self.amplitudes, axes=range(self.ndim))

    def replace(self, amplitudes: np.ndarray, positive_mass: bool | None = None) -> "StateGrid":
        pm = self.positive_mass if positive_mass is None else positive_mass
        return StateGrid(self.axes, amplitudes, pm)

    def from_dual(self, dual: np.ndarray, positive_mass: bool | None = None) -> "StateGrid":
        return self.replace(np.fft.ifftn(dual, axes=range(self.ndim)), positive_mass)

    def normalized(self) -> "StateGrid":
        return self.replace(self.amplitudes / np.sqrt(self.norm2()))

    @cached_property
    def dual_weights(self) -> np.ndarray:
        """Probability per conjugate mode (summed over spinor), FFT order, sums to 1."""
        w = np.sum(np.abs(self.to_dual()) ** 2, axis=-1)
        return w / w.sum()


def _open_mesh(vectors: Sequence[np.ndarray]) -> list[np.ndarray]:
    k = len(vectors)
    out = []
    for i, v in enumerate(vectors):
        shape = [1] * k
        shape[i] = len(v)
        out.append(np.reshape(v, shape))
    return out


def _check_tails(axis: AxisGrid, center: float, width: float, carrier: float, tol: float) -> None:
    lo = axis.origin - axis.extent / 2
    d_pos = min(center - lo, lo + axis.extent - center)
    if d_pos <= 0 or np.exp(-(d_pos**2) / (2 * width**2)) > tol:
        raise TailsClippedError(
            f"axis {axis.name}: packet at {center:g} with width {width:g} reaches the cell edge (L={axis.extent:g})"
        )
    sig_dual = 1.0 / (2.0 * width)
    d_dual = axis.band_edge - abs(carrier)
    if d_dual <= 0 or np.exp(-(d_dual**2) / (2 * sig_dual**2)) > tol:
        raise PacketTooNarrowError(
            f"axis {axis.name}: width {width:g} (dual spread {sig_dual:g}) with carrier {carrier:g} "
            f"overflows the dual band +-{axis.band_edge:g}"
        )


def gaussian_packet(
    axes: Sequence[AxisGrid],
    centers: Sequence[float],
    widths: Sequence[float],
    carriers: Sequence[float],
    spinor: Sequence[complex] | None = None,
    tail_tol: float | None = TAIL_TOL,
) -> StateGrid:
    """Normalized separable Gaussian ``prod exp(-(q-c)^2/(4 w^2) + i k q)``.

    ``widths`` are position standard deviations of ``|psi|^2``; the dual
    spread on each axis is ``1/(2 w)``. Both position and dual tails must
    fall below ``tail_tol`` of the peak density unless ``tail_tol`` is None.
    """
    axes = tuple(axes)
    if not (len(centers) == len(widths) == len(carriers) == len(axes)):
        raise GridError("need one center, width and carrier per axis")
    factors = []
    for ax, c, w, k in zip(axes, centers, widths, carriers):
        if not w > 0:
            raise GridError(f"axis {ax.name}: width must be positive")
        if tail_tol is not None:
            _check_tails(ax, c, w, k, tail_tol)
        q = ax.points
        # fold displacements into the periodic cell so the packet is centered on c
        d = (q - c + ax.extent / 2) % ax.extent - ax.extent / 2
        factors.append(np.exp(-(d**2) / (4 * w**2) + 1j * k * (c + d)))
    amps = factors[0]
    for f in factors[1:]:
        amps = np.multiply.outer(amps, f)
    spin = np.array([1.0 + 0j]) if spinor is None else np.asarray(spinor, dtype=complex)
    spin = spin / np.linalg.norm(spin)
    state = StateGrid(axes, np.multiply.outer(amps, spin))
    return state.normalized()


def _field(s: StateGrid, values, label: str) -> tuple[np.ndarray, bool]:
    values = np.asarray(values)
    if not np.all(np.isfinite(values)):
        raise GridError(f"{label} function returned non-finite values")
    is_matrix = values.ndim == s.ndim + 2 and values.shape[-2:] == (s.spinor_dim, s.spinor_dim) and s.spinor_dim > 1
    return values, is_matrix


def _multiply(amps: np.ndarray, values: np.ndarray, is_matrix: bool) -> np.ndarray:
    if is_matrix:
        return np.einsum("...ij,...j->...i", values, amps)
    return amps * values[..., None]


def apply_diag_position(s: StateGrid, f: Callable[..., np.ndarray]) -> StateGrid:
    """Multiply by ``f(tau, x...)``; ``f`` may return a scalar field or a spinor-matrix field."""
    values, is_matrix = _field(s, f(*s.coords()), "position")
    return s.replace(_multiply(s.amplitudes, values, is_matrix))


def apply_diag_dual(s: StateGrid, F: Callable[..., np.ndarray]) -> StateGrid:
    """Apply ``F(m, p...)`` in the conjugate representation."""
    values, is_matrix = _field(s, F(*s.dual_coords()), "dual")
    return s.from_dual(_multiply(s.to_dual(), values, is_matrix))


def apply_spinor(s: StateGrid, matrix) -> StateGrid:
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.shape != (s.spinor_dim, s.spinor_dim):
        raise GridError(f"spinor matrix shape {matrix.shape} does not match spinor_dim {s.spinor_dim}")
    return s.replace(s.amplitudes @ matrix.T)


Operator = Callable[[StateGrid], StateGrid]


def position_op(f) -> Operator:
    return lambda s: apply_diag_position(s, f)


def dual_op(F) -> Operator:
    return lambda s: apply_diag_dual(s, F)


def spinor_op(matrix) -> Operator:
    return lambda s: apply_spinor(s, matrix)


def compose(*ops: Operator) -> Operator:
    """Operator product, applied right to left like the written product ``A B C``."""

    def product(s: StateGrid) -> StateGrid:
        for op in reversed(ops):
            s = op(s)
        return s

    return product


def inner(a: StateGrid, b: StateGrid) -> complex:
    if a.amplitudes.shape != b.amplitudes.shape:
        raise GridError("states live on different grids")
    return complex(np.vdot(a.amplitudes, b.amplitudes) * a.cell_volume)


def expectation(s: StateGrid, observable: Operator | None = None) -> complex:
    """``<s|O|s>`` as a plain lattice Riemann sum."""
    if observable is None:
        return inner(s, s)
    return inner(s, observable(s))


def position_moments(s: StateGrid, name: str) -> tuple[float, float]:
    """Mean and standard deviation of one position coordinate."""
    i = s.axis_index(name)
    prob = np.sum(np.abs(s.amplitudes) ** 2, axis=-1)
    marginal = prob.sum(axis=tuple(j for j in range(s.ndim) if j != i))
    marginal = marginal / marginal.sum()
    q = s.axes[i].points
    mean = float(marginal @ q)
    return mean, float(np.sqrt(max(marginal @ (q - mean) ** 2, 0.0)))


def dual_moments(s: StateGrid, name: str) -> tuple[float, float]:
    """Mean and standard deviation of one conjugate coordinate (m or p_j)."""
    i = s.axis_index(name)
    marginal = s.dual_weights.sum(axis=tuple(j for j in range(s.ndim) if j != i))
    k = s.axes[i].dual_points
    mean = float(marginal @ k)
    return mean, float(np.sqrt(max(marginal @ (k - mean) ** 2, 0.0)))


class ProjectionResult(NamedTuple):
    state: StateGrid
    discarded: float


def project_positive_mass(s: StateGrid, warn_above: float = 1e-6) -> ProjectionResult:
    """Zero every conjugate-tau mode with ``m <= 0`` and renormalize."""
    dual = s.to_dual()
    m = s.axes[0].dual_points
    keep = (m > 0).reshape((-1,) + (1,) * s.ndim)
    total = np.sum(np.abs(dual) ** 2)
    kept = np.where(keep, dual, 0)
    discarded = float(1.0 - np.sum(np.abs(kept) ** 2) / total)
    if discarded > warn_above:
        warnings.warn(
            f"positive-mass projection discarded weight {discarded:.3e}; packet is close to m = 0",
            stacklevel=2,
        )
    out = s.from_dual(kept, positive_mass=True)
    return ProjectionResult(out.normalized(), discarded)


# Binary snapshot: little-endian throughout.
#   8s   magic  b"PTSNAP01"
#   u32  number of axes (tau first)
#   u32  spinor_dim
#   u32  positive-mass flag
#   per axis: 8s name (NUL padded), u32 n, f64 extent, f64 origin
#   complex amplitudes as (f64 real, f64 imag) pairs, C order over (axes..., spinor)
SNAPSHOT_MAGIC = b"PTSNAP01"
_HEADER = struct.Struct("<8sIII")
_AXIS = struct.Struct("<8sIdd")


def write_snapshot(path, s: StateGrid) -> None:
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(SNAPSHOT_MAGIC, s.ndim, s.spinor_dim, int(s.positive_mass)))
        for a in s.axes:
            fh.write(_AXIS.pack(a.name.encode(), a.n, a.extent, a.origin))
        fh.write(np.ascontiguousarray(s.amplitudes, dtype="<c16").tobytes())


def read_snapshot(path) -> StateGrid:
    with open(path, "rb") as fh:
        raw = fh.read()
    magic, naxes, spinor_dim, pm = _HEADER.unpack_from(raw, 0)
    if magic != SNAPSHOT_MAGIC:
        raise GridError(f"not a state snapshot (magic {magic!r})")
    off = _HEADER.size
    axes = []
    for _ in range(naxes):
        name, n, extent, origin = _AXIS.unpack_from(raw, off)
        off += _AXIS.size
        axes.append(AxisGrid(name.rstrip(b"\0").decode(), n, extent, origin))
    shape = tuple(a.n for a in axes) + (spinor_dim,)
    amps = np.frombuffer(raw, dtype="<c16", offset=off)
    if amps.size != int(np.prod(shape)):
        raise GridError("snapshot amplitude count does not match header")
    return StateGrid(tuple(axes), amps.reshape(shape).astype(complex), bool(pm))
