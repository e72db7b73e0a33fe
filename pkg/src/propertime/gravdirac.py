"""Spin-1/2 particle in a weak static field ``phi = g x3``.

The Hamiltonian is ``H + sum_j alpha_j [p_j, phi]_+ + phi beta m + (W + W^dagger)/2``
on a :class:`~propertime.phasegrid.StateGrid` with spinor_dim 4. States
are built mode by mode in the (m, p) representation as
``(Psi, sigma.p/(E+m) Psi)`` with ``E = sqrt(m^2 + p^2)`` per mode, which
puts every mode in the positive-energy subspace of the free Hamiltonian.
A finite packet is therefore a near-eigenstate whose energy spread is
reported as ``sigma_E``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import constants

from .clifford import PAULI, VierbeinField, make_dirac_set, w_term
from .phasegrid import (
    AxisGrid,
    GridError,
    StateGrid,
    fit_extent,
    gaussian_packet,
    inner,
)

__all__ = [
    "NegativeMassWeightError",
    "PositiveSpinorState",
    "SpreadTooLargeError",
    "WeakFieldConfig",
    "build_htilde_apply",
    "build_positive_spinor",
    "discarded_piece",
    "energy_residual",
    "free_h_apply",
    "ratio_estimate",
    "sweep_configs",
    "sharp_spin_term",
    "si_smallness",
    "spin_orbit_term",
    "spin_state",
    "taudot0_direct",
    "taudot0_formula",
    "w_field",
]

DS = make_dirac_set()
SPATIAL = ("x1", "x2", "x3")
WEAK_FIELD_LIMIT = 0.1
SHARP_SPREAD_LIMIT = 0.2
NEGATIVE_MASS_LIMIT = 1e-6


class NegativeMassWeightError(GridError):
    pass


class SpreadTooLargeError(ValueError):
    pass


def spin_state(direction) -> np.ndarray:
    """Two-spinor with ``sigma.n chi = +chi`` for the unit vector along ``direction``."""
    n = np.asarray(direction, dtype=float)
    n = n / np.linalg.norm(n)
    w, v = np.linalg.eigh(np.einsum("j,jab->ab", n, PAULI))
    chi = v[:, np.argmax(w)]
    # fix the global phase: first nonzero component real and positive
    k = int(np.argmax(np.abs(chi) > 1e-12))
    return chi * np.exp(-1j * np.angle(chi[k]))


@dataclass(frozen=True)
class WeakFieldConfig:
    """Field strength, carrier, spreads and lattice for one weak-field run.

    Spreads are given in the conjugate variables (``sigma_m`` for mass,
    ``sigma_p`` per spatial axis); position widths are ``1/(2 sigma)``.
    Extents default to the tail-balanced value from :func:`fit_extent`.
    """

    g: float
    m_prime: float
    p_prime: tuple[float, float, float] = (0.0, 0.0, 0.0)
    spin: tuple[float, float, float] = (0.0, 0.0, 1.0)
    sigma_m: float = 1.0
    sigma_p: tuple[float, ...] = (0.5, 0.5, 0.5)
    centers: tuple[float, ...] = (0.0, 0.0, 0.0)
    n_tau: int = 64
    n_x: tuple[int, ...] = (32, 32, 32)
    spatial: tuple[str, ...] = SPATIAL
    extents: tuple[float, ...] | None = None
    w_step: float = 1e-3

    def __post_init__(self):
        k = len(self.spatial)
        for name in ("sigma_p", "centers", "n_x"):
            if len(getattr(self, name)) != k:
                raise ValueError(f"{name} needs one entry per spatial axis {self.spatial}")
        if not self.m_prime > 0:
            raise ValueError("m' must be positive")
        if not self.m_prime > 6 * self.sigma_m:
            raise ValueError(f"carrier m' = {self.m_prime:g} must exceed 6 sigma_m = {6 * self.sigma_m:g}")
        if np.linalg.norm(self.spin) == 0:
            raise ValueError("spin direction must be nonzero")

    @property
    def carrier(self) -> np.ndarray:
        return np.asarray(self.p_prime, dtype=float)

    @property
    def E(self) -> float:
        return float(np.sqrt(self.m_prime**2 + self.carrier @ self.carrier))

    @cached_property
    def axes(self) -> tuple[AxisGrid, ...]:
        widths = self.widths
        carriers = self.carriers
        ns = (self.n_tau,) + tuple(self.n_x)
        names = ("tau",) + tuple(self.spatial)
        origins = (0.0,) + tuple(self.centers)
        if self.extents is None:
            extents = []
            for nm, n, w, c, o in zip(names, ns, widths, carriers, origins):
                cap = None
                if nm == "x3" and self.g != 0:
                    # largest cell whose |x3| stays inside the weak-field guard
                    cap = 0.999 * 2 * (WEAK_FIELD_LIMIT / (2 * abs(self.g)) - abs(o))
                try:
                    extents.append(fit_extent(n, w, c, max_extent=cap))
                except GridError as exc:
                    if cap is None:
                        raise
                    raise GridError(
                        f"{nm} packet of width {w:g} does not fit inside the weak-field guard "
                        f"|2 g x3| < {WEAK_FIELD_LIMIT} for g = {self.g:g} ({exc})"
                    ) from None
        else:
            extents = list(self.extents)
        axes = tuple(AxisGrid(nm, n, L, o) for nm, n, L, o in zip(names, ns, extents, origins))
        self._check_guard(axes)
        return axes

    @property
    def widths(self) -> tuple[float, ...]:
        return (1 / (2 * self.sigma_m),) + tuple(1 / (2 * s) for s in self.sigma_p)

    @property
    def carriers(self) -> tuple[float, ...]:
        return (self.m_prime,) + tuple(self.p_prime[SPATIAL.index(n)] for n in self.spatial)

    def _check_guard(self, axes) -> None:
        for a in axes:
            if a.name == "x3":
                x3 = np.abs(a.points).max()
                if 2 * abs(self.g) * x3 >= WEAK_FIELD_LIMIT:
                    raise GridError(
                        f"weak-field guard violated: |2 g x3| reaches {2 * abs(self.g) * x3:.3g} >= {WEAK_FIELD_LIMIT}"
                    )

    def scaled(self, factor: float) -> "WeakFieldConfig":
        """Same run with every conjugate spread multiplied by ``factor``."""
        from dataclasses import replace

        return replace(self, sigma_m=self.sigma_m * factor, sigma_p=tuple(s * factor for s in self.sigma_p), extents=None)


def _dual_mesh(s: StateGrid) -> tuple[np.ndarray, list[np.ndarray]]:
    """Mass mesh and a full (x1, x2, x3) list of momentum meshes (zeros for absent axes)."""
    mesh = s.dual_coords()
    m = mesh[0]
    p = [np.zeros(1) for _ in SPATIAL]
    for a, c in zip(s.axes[1:], mesh[1:]):
        p[SPATIAL.index(a.name)] = c
    return m, p


def _position_x3(s: StateGrid):
    mesh = s.coords()
    for a, c in zip(s.axes, mesh):
        if a.name == "x3":
            return c
    return np.zeros(1)


def _spinor_mul(amps: np.ndarray, matrix: np.ndarray) -> np.ndarray:
    return amps @ matrix.T


@dataclass(frozen=True, eq=False)
class PositiveSpinorState:
    state: StateGrid
    chi: np.ndarray
    cfg: WeakFieldConfig
    discarded: float
    energy_mean: float = field(default=0.0)
    sigma_E: float = field(default=0.0)

    @property
    def upper(self) -> np.ndarray:
        """Two-component generator ``Psi`` on the position lattice."""
        return self.state.amplitudes[..., :2]

    def mode_energy(self) -> np.ndarray:
        m, p = _dual_mesh(self.state)
        return np.sqrt(m**2 + p[0] ** 2 + p[1] ** 2 + p[2] ** 2)

    def eq27_norm(self) -> float:
        """``int Psi^dagger 2E/(E+m) Psi`` evaluated with per-mode E."""
        m, _ = _dual_mesh(self.state)
        E = self.mode_energy()
        up = np.fft.fftn(self.upper, axes=range(self.state.ndim))
        dens = np.sum(np.abs(up) ** 2, axis=-1)
        fac = np.divide(2 * E, E + m, out=np.zeros(np.broadcast(E, m).shape), where=(m > 0))
        return float(np.sum(dens * fac) * self.state.cell_volume / dens.size)

    def lower_residual(self) -> float:
        """``max|lower - sigma.p/(E+m) upper|`` over modes, relative to the largest mode amplitude."""
        dual = self.state.to_dual()
        m, p = _dual_mesh(self.state)
        E = self.mode_energy()
        up, lo = dual[..., :2], dual[..., 2:]
        sp = sum(pj[..., None, None] * PAULI[j] for j, pj in enumerate(p))
        den = np.where(m > 0, E + m, 1.0)
        expect = np.einsum("...ij,...j->...i", sp, up) / den[..., None]
        return float(np.max(np.abs(lo - expect)) / np.max(np.abs(dual)))


def build_positive_spinor(cfg: WeakFieldConfig) -> PositiveSpinorState:
    axes = cfg.axes
    widths = cfg.widths
    centers = (0.0,) + tuple(cfg.centers)
    scalar = gaussian_packet(axes, centers, widths, cfg.carriers)
    dual = scalar.to_dual()[..., 0]
    m, p = _dual_mesh(scalar)
    keep = np.broadcast_to(m > 0, dual.shape)
    total = float(np.sum(np.abs(dual) ** 2))
    dual = np.where(keep, dual, 0)
    discarded = 1.0 - float(np.sum(np.abs(dual) ** 2)) / total
    if discarded > NEGATIVE_MASS_LIMIT:
        raise NegativeMassWeightError(f"negative-mass weight {discarded:.3e} exceeds {NEGATIVE_MASS_LIMIT:g}")
    chi = spin_state(cfg.spin)
    E = np.sqrt(m**2 + p[0] ** 2 + p[1] ** 2 + p[2] ** 2)
    den = np.where(m > 0, E + m, 1.0)
    spinor = np.empty(dual.shape + (4,), dtype=complex)
    spinor[..., 0] = dual * chi[0]
    spinor[..., 1] = dual * chi[1]
    # lower = sigma.p/(E+m) chi, written out per component
    sp_chi0 = p[2] * chi[0] + (p[0] - 1j * p[1]) * chi[1]
    sp_chi1 = (p[0] + 1j * p[1]) * chi[0] - p[2] * chi[1]
    spinor[..., 2] = dual * (sp_chi0 / den)
    spinor[..., 3] = dual * (sp_chi1 / den)
    weights = np.sum(np.abs(spinor) ** 2, axis=-1)
    weights /= weights.sum()
    Eb = np.broadcast_to(E, weights.shape)
    e_mean = float(np.sum(weights * Eb))
    sigma_E = float(np.sqrt(max(np.sum(weights * Eb**2) - e_mean**2, 0.0)))
    del weights, Eb
    state = scalar.from_dual(spinor, positive_mass=True).normalized()
    return PositiveSpinorState(state, chi, cfg, discarded, e_mean, sigma_E)


def free_h_apply(s: StateGrid) -> StateGrid:
    """``(alpha.p + beta m) psi`` mode by mode."""
    dual = s.to_dual()
    m, p = _dual_mesh(s)
    out = _spinor_mul(dual, DS.beta) * m[..., None]
    for j in range(3):
        if p[j].size > 1:
            out += _spinor_mul(dual, DS.alpha[j]) * p[j][..., None]
    return s.from_dual(out)


def _alpha_p(s: StateGrid, dual: np.ndarray) -> np.ndarray:
    _, p = _dual_mesh(s)
    out = np.zeros_like(dual)
    for j in range(3):
        if p[j].size > 1:
            out += _spinor_mul(dual, DS.alpha[j]) * p[j][..., None]
    return out


def w_field(cfg: WeakFieldConfig) -> np.ndarray:
    """Hermitized spin-connection term along x3, broadcastable to ``grid + (4, 4)``."""
    v = VierbeinField(cfg.g)
    axes = cfg.axes
    names = [a.name for a in axes]
    x3 = axes[names.index("x3")].points if "x3" in names else np.zeros(1)
    vals = np.array([w_term(v, DS, (0.0, 0.0, float(z)), cfg.w_step) for z in x3])
    shape = [1] * len(axes)
    if "x3" in names:
        shape[names.index("x3")] = x3.size
    return vals.reshape(tuple(shape) + (4, 4))


def build_htilde_apply(cfg: WeakFieldConfig, include_w: bool = True):
    """Return ``psi -> H~ psi`` for states on ``cfg.axes``.

    ``H~ psi = (alpha.p + beta m) psi + alpha.p (phi psi) + phi alpha.p psi
    + phi beta m psi + W_h psi``, which is ``alpha_j [p_j, phi]_+`` summed
    over j because phi commutes with p_1, p_2.
    """
    w = w_field(cfg) if include_w else None

    def apply(s: StateGrid) -> StateGrid:
        if s.spinor_dim != 4:
            raise GridError("H~ acts on 4-spinor states")
        if s.axes != cfg.axes:
            raise GridError("state does not live on the configuration's lattice")
        phi = cfg.g * _position_x3(s)
        phi_b = phi[..., None]
        nd = range(s.ndim)
        dual = s.to_dual()
        m, _ = _dual_mesh(s)
        kin = _alpha_p(s, dual)
        mass = _spinor_mul(dual, DS.beta) * m[..., None]
        kin_x = np.fft.ifftn(kin, axes=nd)
        mass_x = np.fft.ifftn(mass, axes=nd)
        del kin, mass, dual
        phi_dual = np.fft.fftn(s.amplitudes * phi_b, axes=nd)
        out = np.fft.ifftn(_alpha_p(s, phi_dual), axes=nd)
        del phi_dual
        out += kin_x * (1 + phi_b) + mass_x * (1 + phi_b)
        if w is not None:
            out += np.einsum("...ij,...j->...i", w, s.amplitudes)
        return s.replace(out)

    return apply


def taudot0_direct(state: PositiveSpinorState, cfg: WeakFieldConfig | None = None) -> float:
    """``<psi| beta (1 + g x3) |psi>``, the proper-time rate at t = 0."""
    cfg = cfg or state.cfg
    s = state.state
    amps = s.amplitudes
    beta_dens = np.sum(np.abs(amps[..., :2]) ** 2, axis=-1) - np.sum(np.abs(amps[..., 2:]) ** 2, axis=-1)
    return float(np.sum(beta_dens * (1 + cfg.g * _position_x3(s))) * s.cell_volume)


def _cross3(p) -> np.ndarray:
    """``(sigma x p)_3 = sigma_1 p_2 - sigma_2 p_1`` as a 2x2 matrix."""
    return PAULI[0] * p[1] - PAULI[1] * p[0]


def _check_sharp(cfg: WeakFieldConfig) -> None:
    p = cfg.carrier
    pn = np.linalg.norm(p)
    if pn == 0:
        return
    along = p / pn
    idx = {n: i for i, n in enumerate(cfg.spatial)}
    var = sum((along[SPATIAL.index(n)] * cfg.sigma_p[i]) ** 2 for n, i in idx.items())
    ratio = np.sqrt(var) / pn
    if ratio > SHARP_SPREAD_LIMIT:
        raise SpreadTooLargeError(
            f"momentum spread along the carrier is {ratio:.3g} |p'|, above the sharp-value limit {SHARP_SPREAD_LIMIT}"
        )


def sharp_spin_term(state: PositiveSpinorState, cfg: WeakFieldConfig | None = None) -> float:
    """``g/(E(E+m')) int Psi^dagger (sigma x p')_3 Psi`` with sharp carrier values."""
    cfg = cfg or state.cfg
    psi = state.upper
    M = _cross3(cfg.carrier)
    val = np.vdot(psi, psi @ M.T) * state.state.cell_volume
    E = cfg.E
    return float(cfg.g / (E * (E + cfg.m_prime)) * val.real)


def taudot0_formula(state: PositiveSpinorState, cfg: WeakFieldConfig | None = None) -> float:
    """Sharp-carrier prediction: spin term plus ``(m'/E)(1 + g <x3>)``."""
    cfg = cfg or state.cfg
    _check_sharp(cfg)
    s = state.state
    dens = np.sum(np.abs(s.amplitudes) ** 2, axis=-1)
    mean_x3 = float(np.sum(dens * _position_x3(s)) * s.cell_volume)
    return sharp_spin_term(state, cfg) + cfg.m_prime / cfg.E * (1 + cfg.g * mean_x3)


def _mode_quadrature(state: PositiveSpinorState, matrix_field, scalar_field) -> complex:
    """``int Psi^dagger M(p) f(p, m) Psi`` in the conjugate representation."""
    s = state.state
    up = np.fft.fftn(state.upper, axes=range(s.ndim))
    val = np.einsum("...i,...ij,...j->...", up.conj(), matrix_field, up)
    return complex(np.sum(val * scalar_field) * s.cell_volume / val.size)


def spin_orbit_term(state: PositiveSpinorState, cfg: WeakFieldConfig | None = None) -> float:
    """``g int Psi^dagger (sigma x p)_3 / (E(E+m)) Psi`` with p, m, E as per-mode operators."""
    cfg = cfg or state.cfg
    m, p = _dual_mesh(state.state)
    E = state.mode_energy()
    M = PAULI[0] * p[1][..., None, None] - PAULI[1] * p[0][..., None, None]
    denom = E * (E + m)
    f = np.divide(1.0, denom, out=np.zeros(denom.shape), where=(m > 0))
    return float(cfg.g * _mode_quadrature(state, M, f).real)


def discarded_piece(state: PositiveSpinorState, cfg: WeakFieldConfig | None = None) -> complex:
    """``g int Psi^dagger i p_3 / (E(E+m)) Psi``: the part of ``i(sigma.p) sigma_3`` dropped for reality."""
    cfg = cfg or state.cfg
    m, p = _dual_mesh(state.state)
    E = state.mode_energy()
    denom = E * (E + m)
    f = np.divide(1j * p[2], denom, out=np.zeros(np.broadcast(denom, p[2]).shape, dtype=complex), where=(m > 0))
    return cfg.g * _mode_quadrature(state, np.eye(2), f)


def ratio_estimate(state: PositiveSpinorState, cfg: WeakFieldConfig | None = None) -> float:
    """Spin term relative to the classical rate ``m'/E``; bounded by ``g/m'``."""
    cfg = cfg or state.cfg
    return sharp_spin_term(state, cfg) / (cfg.m_prime / cfg.E)


def si_smallness(mass_kg: float, g_si: float = constants.g) -> float:
    """``g hbar / (m c^3)``: the field strength in units of the particle's mass."""
    if not mass_kg > 0:
        raise ValueError(f"mass must be positive, got {mass_kg}")
    return g_si * constants.hbar / (mass_kg * constants.c**3)


def energy_residual(state: PositiveSpinorState, htilde) -> tuple[float, float]:
    """``<H~>`` and ``||(H~ - <H~>) psi|| / <H~>``."""
    s = state.state
    hs = htilde(s)
    mean = inner(s, hs).real
    r = s.replace(hs.amplitudes - mean * s.amplitudes)
    return mean, float(np.sqrt(r.norm2()) / mean)


SWEEP_SEED = 0x5EE9


def sweep_configs(
    n: int = 50,
    seed: int = SWEEP_SEED,
    g_range=(1e-3, 4e-3),
    m_range=(2.0, 10.0),
    p_range=(0.2, 1.0),
    n_tau: int = 64,
    n_x: int = 16,
) -> list[WeakFieldConfig]:
    """Random weak-field runs with random carrier and spin directions.

    Ranges are chosen so every run fits a ``n_tau x n_x^3`` lattice with
    both tails below the packet tolerance and inside the weak-field guard.
    """
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        g = float(rng.uniform(*g_range))
        m = float(rng.uniform(*m_range))
        d = rng.normal(size=3)
        p = d / np.linalg.norm(d) * rng.uniform(*p_range)
        spin = rng.normal(size=3)
        out.append(
            WeakFieldConfig(
                g=g,
                m_prime=m,
                p_prime=tuple(float(x) for x in p),
                spin=tuple(float(x) for x in spin),
                sigma_m=min(0.5, m / 8),
                sigma_p=(0.5, 0.5, 0.5),
                n_tau=n_tau,
                n_x=(n_x,) * 3,
            )
        )
    return out
