"""Invariant suite: every property check with its measured residual.

Each check returns a :class:`CheckResult`; :func:`run_suite` runs them in
order. Checks are deterministic (fixed seeds) and sized so the whole
suite finishes in a few minutes on one core.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from typing import Callable, Iterable

import numpy as np

from . import freedirac as fd
from . import gravdirac as gd
from . import oracle
from . import scalar
from .clifford import ETA, VierbeinField, _w_raw, make_dirac_set, spin_connection, spin_connection_exact
from .numlin import commutator, unitary_exp
from .phasegrid import (
    AxisGrid,
    StateGrid,
    dual_moments,
    dual_op,
    expectation,
    fit_extent,
    gaussian_packet,
    position_moments,
    position_op,
    project_positive_mass,
)

__all__ = [
    "CHECKS",
    "CheckResult",
    "paired_spin_runs",
    "redshift_packet",
    "run_suite",
]

SUITE_SEED = 20240611


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    tolerance: float
    passed: bool
    seconds: float = 0.0
    detail: str = ""

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        extra = f"  {self.detail}" if self.detail else ""
        return f"{mark}  {self.name:<34s} residual={self.residual:.3e}  tol={self.tolerance:.1e}{extra}"


CHECKS: dict[str, Callable[[], CheckResult]] = {}


def _check(name: str):
    def register(fn):
        def run() -> CheckResult:
            t0 = time.perf_counter()
            residual, tol, *rest = fn()
            passed = bool(rest[0]) if rest and isinstance(rest[0], (bool, np.bool_)) else residual < tol
            detail = rest[-1] if rest and isinstance(rest[-1], str) else ""
            return CheckResult(name, float(residual), float(tol), passed, time.perf_counter() - t0, detail)

        CHECKS[name] = run
        return run

    return register


def _rng(offset: int = 0) -> np.random.Generator:
    return np.random.default_rng(SUITE_SEED + offset)


def _random_hermitian(rng, n: int) -> np.ndarray:
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (a + a.conj().T)


# -- numlin -----------------------------------------------------------------


@_check("unitary_exp inverse")
def _exp_inverse():
    rng = _rng(1)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(1, 17))
        h, t = _random_hermitian(rng, n), rng.uniform(-3, 3)
        worst = max(worst, np.max(np.abs(unitary_exp(h, t) @ unitary_exp(h, -t) - np.eye(n))))
    return worst, 1e-12


@_check("unitary_exp group law")
def _exp_group():
    rng = _rng(2)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(1, 17))
        h = _random_hermitian(rng, n)
        t1, t2 = rng.uniform(-2, 2, size=2)
        worst = max(worst, np.max(np.abs(unitary_exp(h, t1 + t2) - unitary_exp(h, t1) @ unitary_exp(h, t2))))
    return worst, 1e-11


@_check("commutator antisymmetry")
def _comm_antisym():
    rng = _rng(3)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(1, 9))
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        b = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        worst = max(worst, np.max(np.abs(commutator(a, b) + commutator(b, a))))
    return worst, 1e-15


# -- clifford ---------------------------------------------------------------


@_check("alpha/beta anticommutation")
def _clifford_ab():
    ds = make_dirac_set()
    mats = list(ds.alpha) + [ds.beta]
    worst = 0.0
    for i, a in enumerate(mats):
        for j, b in enumerate(mats):
            target = 2 * np.eye(4) if i == j else np.zeros((4, 4))
            worst = max(worst, np.max(np.abs(a @ b + b @ a - target)))
    return worst, 1e-14


@_check("gamma anticommutator = -2 eta")
def _clifford_gamma():
    ds = make_dirac_set()
    g = ds.gamma
    worst = max(
        np.max(np.abs(g[a] @ g[b] + g[b] @ g[a] + 2 * ETA[a, b] * np.eye(4))) for a in range(4) for b in range(4)
    )
    return worst, 1e-14


def curved_vierbein(g: float = 1e-2, q: float = 5e-3) -> VierbeinField:
    """``phi = g x3 + q (x1^2 + sin x3)``: curved enough to expose the finite-difference error."""
    return VierbeinField(
        g,
        potential=lambda x: g * x[2] + q * (x[0] ** 2 + np.sin(x[2])),
        gradient=lambda x: np.array([2 * q * x[0], 0.0, g + q * np.cos(x[2])]),
    )


@_check("spin connection order 2")
def _spin_conn_order():
    v = curved_vierbein()
    x = np.array([0.3, -0.2, 0.7])
    exact = spin_connection_exact(v, x)
    errs = [np.max(np.abs(spin_connection(v, x, h) - exact)) for h in (0.04, 0.02)]
    ratio = errs[0] / errs[1]
    return abs(ratio - 4.0), 0.5, f"ratio={ratio:.3f}"


@_check("spin connection closed form")
def _spin_conn_exact():
    v = VierbeinField(1e-2)
    worst = max(np.max(np.abs(spin_connection(v, x, 1e-3) - spin_connection_exact(v, x))) for x in _rng(4).uniform(-2, 2, (5, 3)))
    return worst, 1e-10


@_check("W anti-Hermitian, O(g)")
def _w_scaling():
    ds = make_dirac_set()
    x = np.array([0.0, 0.0, 0.5])
    raws = [_w_raw(VierbeinField(g), ds, x, 1e-3) for g in (1e-3, 2e-3)]
    herm = max(np.max(np.abs(w + w.conj().T)) / 2 for w in raws)
    ratio = np.max(np.abs(raws[1])) / np.max(np.abs(raws[0]))
    return herm, 1e-12, herm < 1e-12 and abs(ratio - 2.0) < 0.05, f"|W(2g)|/|W(g)|={ratio:.4f}"


# -- phasegrid --------------------------------------------------------------


def _line_axes(n_tau: int, extent_tau: float, n_x: int = 16, extent_x: float = 16.0):
    return (AxisGrid("tau", n_tau, extent_tau), AxisGrid("x1", n_x, extent_x))


@_check("Parseval")
def _parseval():
    rng = _rng(5)
    axes = (AxisGrid("tau", 16, 7.0), AxisGrid("x1", 8, 3.0), AxisGrid("x3", 4, 2.0))
    amps = rng.normal(size=(16, 8, 4, 4)) + 1j * rng.normal(size=(16, 8, 4, 4))
    s = StateGrid(axes, amps).normalized()
    dual = s.to_dual()
    back = s.from_dual(dual)
    norm_dual = np.sum(np.abs(dual) ** 2) * s.cell_volume / dual[..., 0].size
    return max(abs(norm_dual - 1.0), abs(back.norm2() - 1.0)), 1e-12


@_check("translation covariance")
def _translation():
    axes = (AxisGrid("tau", 64, 60.0), AxisGrid("x1", 32, 40.0))
    base = gaussian_packet(axes, (0.0, 0.0), (2.0, 1.5), (0.0, 0.0))
    k = (3, -2)
    shifted = gaussian_packet(axes, (k[0] * axes[0].spacing, k[1] * axes[1].spacing), (2.0, 1.5), (0.0, 0.0))
    m, p = base.dual_coords()
    phase = np.exp(-1j * (m * k[0] * axes[0].spacing + p * k[1] * axes[1].spacing))
    return np.max(np.abs(shifted.to_dual()[..., 0] - base.to_dual()[..., 0] * phase)), 1e-12


def commutator_residual(n_tau: int, extent: float = 40.0, width: float = 1.0) -> float:
    """``|<[tau, m]> - i|`` for a centered Gaussian; edges stay 20 widths away."""
    axes = _line_axes(n_tau, extent)
    s = gaussian_packet(axes, (0.0, 0.0), (width, 1.0), (0.0, 0.0), tail_tol=None)
    tau = position_op(lambda t, x: t)
    m = dual_op(lambda mm, p: mm)
    c = expectation(s, lambda u: tau(m(u))) - expectation(s, lambda u: m(tau(u)))
    return abs(c - 1j)


@_check("[tau, m] = i")
def _commutator():
    fine, coarse = commutator_residual(32), commutator_residual(16)
    return fine, 1e-2, fine < 1e-2 and fine < coarse, f"dtau-halving {coarse:.2e} -> {fine:.2e}"


@_check("Robertson product")
def _robertson():
    axes = _line_axes(64, 40.0)
    s = gaussian_packet(axes, (0.0, 0.0), (1.3, 1.0), (2.0, 0.0))
    prod = position_moments(s, "tau")[1] * dual_moments(s, "tau")[1]
    return abs(prod / 0.5 - 1.0), 0.02, prod >= 0.5 * (1 - 1e-12) and abs(prod / 0.5 - 1) < 0.02, f"product={prod:.6f}"


# -- scalar -----------------------------------------------------------------


def redshift_packet(radius: float, a: float = 2.5, m_prime: float = 100.0, sigma_m: float = 10.0, sigma_x: float = 5.0):
    """Packet at rest on a radial line through ``radius``; returns (state, metric)."""
    w_tau = 1 / (2 * sigma_m)
    axes = (
        AxisGrid("tau", 32, fit_extent(32, w_tau, m_prime)),
        AxisGrid("x1", 64, fit_extent(64, sigma_x, 0.0), radius),
    )
    s = gaussian_packet(axes, (0.0, radius), (w_tau, sigma_x), (m_prime, 0.0))
    s = project_positive_mass(s).state
    return s, scalar.MetricModel.schwarzschild(a)


@_check("redshift monotone in r")
def _redshift_monotone():
    radii = (600.0, 1000.0, 1500.0, 2200.0, 3000.0)
    rates = [scalar.taudot_mean_at_zero(*redshift_packet(r)) for r in radii]
    steps = np.diff(rates)
    # residual: how far the smallest step is from being positive
    return max(0.0, -float(np.min(steps))), 0.0, bool(np.all(steps > 0)), "rates=" + ",".join(f"{r:.7f}" for r in rates)


def _oracle_scalar_axes(n_tau=32, n_x=64, origin=600.0):
    return (AxisGrid("tau", n_tau, 4.0), AxisGrid("x1", n_x, 200.0, origin))


@_check("scalar H oracle equivalence")
def _scalar_oracle():
    axes = _oracle_scalar_axes()
    metric = scalar.MetricModel.schwarzschild(2.5)
    centroid = {"x1": 600.0}
    spectral = oracle.operator_matrix(scalar.hamiltonian_operator(metric, ("x1",), centroid), axes)
    dense = oracle.dense_scalar_h(axes, metric, centroid)
    return np.max(np.abs(spectral - dense)), 1e-8


@_check("flat rate conserved in time")
def _flat_rate_time():
    axes = (AxisGrid("tau", 16, 8.0), AxisGrid("x1", 32, 30.0))
    metric = scalar.MetricModel.flat()
    s = gaussian_packet(axes, (0.0, 0.0), (0.6, 2.0), (4.0, 1.0), tail_tol=None)
    s = project_positive_mass(s, warn_above=1.0).state
    centroid = {"x1": 0.0}
    sys = oracle.DenseSystem(axes, 1, oracle.dense_scalar_h(axes, metric, centroid))
    rate = oracle.dense_scalar_rate(axes, metric, centroid)
    vals = [oracle.heisenberg_mean(sys, rate, s, t).real for t in (0.0, 0.01, 0.1, 1.0)]
    return max(abs(v - vals[0]) for v in vals), 1e-8


# -- freedirac --------------------------------------------------------------


def _sector_times(n: int, offset: int):
    rng = _rng(offset)
    return list(zip(fd.random_sectors(n), rng.uniform(-5, 5, size=n)))


@_check("beta closed form vs brute force")
def _beta_closed():
    worst = max(
        np.max(np.abs(fd.beta_closed_form(sec, t) - fd.beta_heisenberg(sec, t))) for sec, t in _sector_times(1000, 6)
    )
    return worst, 1e-11


@_check("beta derivative chain")
def _beta_chain():
    h = 1e-5
    worst_fd = worst_exp = 0.0
    for sec, t in _sector_times(50, 7):
        # central difference of beta(t), scaled to a relative error
        db = (fd.beta_heisenberg(sec, t + h) - fd.beta_heisenberg(sec, t - h)) / (2 * h)
        lhs = 1j * db
        rhs = 2 * fd.beta_heisenberg(sec, t) @ sec.H - 2 * sec.m_prime * np.eye(4)
        worst_fd = max(worst_fd, np.max(np.abs(lhs - rhs)) / max(1.0, sec.E**3))
        direct = fd.beta_dot_heisenberg(sec, t)
        chain = fd.beta_dot_heisenberg(sec, 0.0) @ sec.exp_2itH(t)
        worst_exp = max(worst_exp, np.max(np.abs(direct - chain)))
    return max(worst_fd, worst_exp * 1e-3), 1e-7, f"fd={worst_fd:.2e} exp={worst_exp:.2e}"


@_check("positive-energy means static")
def _positive_static():
    rng = _rng(8)
    worst = 0.0
    for sec in fd.random_sectors(100, seed=fd.DIRAC_SEED + 1):
        u = fd.positive_basis(sec) @ (rng.normal(size=2) + 1j * rng.normal(size=2))
        u /= np.linalg.norm(u)
        b0 = np.vdot(u, fd.beta_heisenberg(sec, 0.0) @ u)
        a0 = [np.vdot(u, a @ u) for a in fd.alpha_heisenberg(sec, 0.0)]
        for t in rng.uniform(-5, 5, size=5):
            worst = max(worst, abs(np.vdot(u, fd.beta_heisenberg(sec, t) @ u) - b0))
            worst = max(worst, max(abs(np.vdot(u, a @ u) - m0) for a, m0 in zip(fd.alpha_heisenberg(sec, t), a0)))
    return worst, 1e-10


@_check("beta(t) spectrum {-1,-1,1,1}")
def _beta_spectrum():
    worst = max(
        np.max(np.abs(np.linalg.eigvalsh(fd.beta_heisenberg(sec, t)) - [-1, -1, 1, 1])) for sec, t in _sector_times(200, 9)
    )
    return worst, 1e-12


@_check("projector identity")
def _projector():
    return max(fd.zitter_suppression(sec) for sec in fd.random_sectors(1000)), 1e-12


@_check("positive <beta(t)> = m'/E")
def _mean_rate():
    rng = _rng(10)
    worst = 0.0
    for sec in fd.random_sectors(100):
        u = fd.positive_basis(sec) @ (rng.normal(size=2) + 1j * rng.normal(size=2))
        for t in rng.uniform(-5, 5, size=10):
            worst = max(worst, abs(fd.taudot_mean_positive(sec, u, t) - sec.m_prime / sec.E))
    return worst, 1e-10


@_check("sum alpha(t)^2 = 3")
def _alpha_square():
    return max(fd.alpha_square_check(sec, t) for sec, t in _sector_times(200, 11)), 1e-12


# -- gravdirac --------------------------------------------------------------


PAIRED_BASE = gd.WeakFieldConfig(
    g=5e-3, m_prime=10.0, p_prime=(1.0, 0.0, 0.0), sigma_m=0.8, sigma_p=(0.2, 0.8, 0.8), n_tau=64, n_x=(32, 32, 32)
)


def paired_spin_runs(cfg: gd.WeakFieldConfig = PAIRED_BASE, axis=(0.0, 1.0, 0.0)) -> dict:
    """Spin +axis and -axis runs; spin-antisymmetric residual and spin term."""
    out = {}
    for sign in (1, -1):
        st = gd.build_positive_spinor(replace(cfg, spin=tuple(sign * a for a in axis)))
        out[sign] = (gd.taudot0_direct(st), gd.taudot0_formula(st), gd.sharp_spin_term(st), st)
    (d1, f1, s1, _), (d2, f2, s2, _) = out[1], out[-1]
    return {
        "residual": abs((d1 - d2) - (f1 - f2)) / 2,
        "spin_term": abs(s1 - s2) / 2,
        "unpaired": max(abs(d1 - f1), abs(d2 - f2)),
        "runs": out,
    }


@_check("paired spin reconciliation")
def _paired():
    base = paired_spin_runs()
    half = paired_spin_runs(PAIRED_BASE.scaled(0.5))
    rel = base["residual"] / base["spin_term"]
    gain = base["residual"] / half["residual"]
    return rel, 0.05, rel < 0.05 and gain >= 2, f"halving gain={gain:.2f}"


CONVERGENCE_BASE = gd.WeakFieldConfig(
    g=1e-3,
    m_prime=10.0,
    p_prime=(1.0, 0.0, 0.0),
    spin=(0.0, 1.0, 0.0),
    sigma_m=0.8,
    sigma_p=(0.2, 0.8),
    centers=(0.0, 0.0),
    n_tau=128,
    n_x=(64, 16),
    spatial=("x1", "x3"),
)


def convergence_series(cfg: gd.WeakFieldConfig = CONVERGENCE_BASE, factors=(1.0, 0.5, 0.25)) -> np.ndarray:
    """``|direct - formula| / (m'/E)`` for each spread factor."""
    out = []
    for f in factors:
        c = cfg.scaled(f)
        st = gd.build_positive_spinor(c)
        out.append(abs(gd.taudot0_direct(st) - gd.taudot0_formula(st)) / (c.m_prime / c.E))
    return np.array(out)


@_check("rate formula converges O(sigma^2)")
def _convergence():
    factors = (1.0, 0.5, 0.25)
    res = convergence_series(factors=factors)
    slope = np.polyfit(np.log(factors), np.log(res), 1)[0]
    return abs(slope - 2.0), 0.3, f"slope={slope:.3f} residuals=" + ",".join(f"{r:.2e}" for r in res)


def spread_budget(state: gd.PositiveSpinorState) -> float:
    """``sigma_p^2/m'^2 + sigma_E/E + g sigma_x`` with the largest spreads of the run."""
    cfg = state.cfg
    sig_p = max(cfg.sigma_p)
    sig_x = max(cfg.widths[1:])
    return sig_p**2 / cfg.m_prime**2 + state.sigma_E / state.energy_mean + abs(cfg.g) * sig_x


@_check("spin reversal cancels")
def _spin_reversal():
    cfg = CONVERGENCE_BASE
    vals = []
    for sign in (1, -1):
        st = gd.build_positive_spinor(replace(cfg, spin=(0.0, float(sign), 0.0)))
        s = st.state
        dens = np.sum(np.abs(s.amplitudes) ** 2, axis=-1)
        x3 = s.coords()[s.axis_index("x3")]
        vals.append((gd.taudot0_direct(st), float(np.sum(dens * x3) * s.cell_volume), st))
    (d1, x1, st), (d2, x2, _) = vals
    classical = cfg.m_prime / cfg.E * (2 + cfg.g * (x1 + x2))
    return abs(d1 + d2 - classical) / (cfg.m_prime / cfg.E), 2 * spread_budget(st)


@_check("spin bound |ratio| <= g/m'")
def _ratio_bound():
    worst = 0.0
    for c in gd.sweep_configs():
        worst = max(worst, abs(gd.ratio_estimate(gd.build_positive_spinor(c))) / (c.g / c.m_prime))
    return worst, 1.0, worst <= 1.0


@_check("spin parallel to p' gives zero")
def _parallel():
    worst = 0.0
    for c in gd.sweep_configs(5):
        st = gd.build_positive_spinor(replace(c, spin=c.p_prime))
        worst = max(worst, abs(gd.ratio_estimate(st)) / (c.g / c.m_prime))
    return worst, 1e-6


@_check("normalization consistency")
def _norm27():
    st = gd.build_positive_spinor(CONVERGENCE_BASE)
    return max(abs(st.eq27_norm() - 1.0), abs(st.state.norm2() - 1.0)), 1e-12


@_check("W does not enter t=0 rate")
def _w_independent():
    cfg = CONVERGENCE_BASE
    st = gd.build_positive_spinor(cfg)
    with_w = gd.taudot0_direct(st, cfg)
    without = gd.taudot0_direct(st, replace(cfg, w_step=2e-3))
    # the rate never touches W; compare the H~ application too
    h_on = gd.build_htilde_apply(cfg, include_w=True)(st.state).amplitudes
    h_off = gd.build_htilde_apply(cfg, include_w=False)(st.state).amplitudes
    residual = max(abs(with_w - without), float(np.max(np.abs(h_on - h_off))))
    return residual, 1e-15, residual < 1e-15 and with_w == without


@_check("discarded piece is imaginary")
def _discarded():
    st = gd.build_positive_spinor(CONVERGENCE_BASE)
    return abs(gd.discarded_piece(st).real), 1e-10


# -- oracle -----------------------------------------------------------------


def _oracle_dirac_cfg(spatial=("x3",), n_tau=16, n_x=(16,)) -> gd.WeakFieldConfig:
    k = len(spatial)
    return gd.WeakFieldConfig(
        g=1e-2,
        m_prime=3.0,
        p_prime=(0.0, 0.0, 1.0),
        sigma_m=0.4,
        sigma_p=(0.8,) * k,
        centers=(0.0,) * k,
        n_tau=n_tau,
        n_x=n_x,
        spatial=spatial,
        extents=(20.0,) + (8.0,) * k,
    )


def suite_hamiltonians() -> dict[str, oracle.DenseSystem]:
    """Every Hamiltonian of the suite on a dense-evolvable lattice (dim <= 1024)."""
    flat_axes = (AxisGrid("tau", 16, 8.0), AxisGrid("x1", 32, 30.0))
    sch_axes = _oracle_scalar_axes(n_tau=16)
    cfg = _oracle_dirac_cfg()
    return {
        "scalar flat": oracle.DenseSystem(flat_axes, 1, oracle.dense_scalar_h(flat_axes, scalar.MetricModel.flat(), {"x1": 0.0})),
        "scalar Schwarzschild": oracle.DenseSystem(
            sch_axes, 1, oracle.dense_scalar_h(sch_axes, scalar.MetricModel.schwarzschild(2.5), {"x1": 600.0})
        ),
        "free Dirac": oracle.DenseSystem(cfg.axes, 4, oracle.dense_free_dirac(cfg.axes)),
        "weak-field Dirac": oracle.DenseSystem(cfg.axes, 4, oracle.dense_htilde(cfg)),
    }


@_check("mass conservation")
def _mass_conservation():
    rng = _rng(12)
    worst, names = 0.0, []
    for name, sys in suite_hamiltonians().items():
        v = rng.normal(size=sys.dim) + 1j * rng.normal(size=sys.dim)
        v /= np.sqrt(np.vdot(v, v).real * sys.cell_volume)
        drift, rate = oracle.mass_drift(sys, v, np.linspace(0.0, 5.0, 6))
        worst = max(worst, drift, rate)
        names.append(f"{name}={max(drift, rate):.1e}")
    return worst, 1e-9, "; ".join(names)


@_check("dense oracle equivalence")
def _oracle_equivalence():
    results = {}
    line = (AxisGrid("tau", 16, 8.0), AxisGrid("x1", 8, 6.0, 1.0))
    results["position x dual"] = np.max(
        np.abs(
            oracle.operator_matrix(lambda s: position_op(lambda t, x: x * t)(dual_op(lambda m, p: m * p + p**2)(s)), line)
            - oracle.dense_position(line, 1, lambda t, x: x * t) @ oracle.dense_dual(line, 1, lambda m, p: m * p + p**2)
        )
    )
    cfg1 = _oracle_dirac_cfg()
    results["free Dirac"] = np.max(
        np.abs(oracle.operator_matrix(gd.free_h_apply, cfg1.axes, 4) - oracle.dense_free_dirac(cfg1.axes))
    )
    results["weak-field Dirac 1D"] = np.max(
        np.abs(oracle.densify(gd.build_htilde_apply(cfg1), cfg1.axes, 4).h_matrix - oracle.dense_htilde(cfg1))
    )
    cfg3 = _oracle_dirac_cfg(("x1", "x2", "x3"), n_tau=8, n_x=(8, 4, 4))
    results["weak-field Dirac 3D (4096)"] = np.max(
        np.abs(oracle.operator_matrix(gd.build_htilde_apply(cfg3), cfg3.axes, 4) - oracle.dense_htilde(cfg3))
    )
    worst = max(results.values())
    return worst, 1e-8, "; ".join(f"{k}={v:.1e}" for k, v in results.items())


def run_suite(names: Iterable[str] | None = None, report: Callable[[CheckResult], None] | None = None) -> list[CheckResult]:
    """Run the named checks (all by default), calling ``report`` after each."""
    selected = list(CHECKS) if names is None else list(names)
    unknown = [n for n in selected if n not in CHECKS]
    if unknown:
        raise KeyError(f"unknown checks: {unknown}")
    out = []
    for name in selected:
        try:
            res = CHECKS[name]()
        except Exception as exc:  # a crash is a failed property, reported with its cause
            res = CheckResult(name, float("nan"), float("nan"), False, 0.0, f"{type(exc).__name__}: {exc}")
        out.append(res)
        if report is not None:
            report(res)
    return out
