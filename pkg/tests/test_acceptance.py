"""Acceptance criteria 1 to 10, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py`` (lines appear in the terminal
output) or ``python tests/test_acceptance.py``.
"""

import sys
import time
from dataclasses import replace

import numpy as np
import pytest
from scipy import constants

from propertime import freedirac as fd
from propertime import gravdirac as gd
from propertime import scalar
from propertime import verify as vf
from propertime.cli import flat_packet_rate

SEED = 20261016


def _sectors_and_times(n, offset=0):
    rng = np.random.default_rng(SEED + offset)
    secs = fd.random_sectors(n, seed=SEED + offset)
    return secs, rng.uniform(-10, 10, size=n)


def criterion_1():
    secs, ts = _sectors_and_times(1000)
    worst = max(np.max(np.abs(fd.beta_closed_form(s, t) - fd.beta_heisenberg(s, t))) for s, t in zip(secs, ts))
    return worst < 1e-11, 5.0, f"max |closed - brute| = {worst:.2e} < 1e-11"


def criterion_2():
    secs, _ = _sectors_and_times(1000, 1)
    worst = max(fd.zitter_suppression(s) for s in secs)
    return worst < 1e-12, 2.0, f"max ||P+(beta - m'/H)P+|| = {worst:.2e} < 1e-12"


def criterion_3():
    secs, _ = _sectors_and_times(200, 2)
    rng = np.random.default_rng(SEED + 3)
    worst = 0.0
    for s in secs:
        c = rng.normal(size=2) + 1j * rng.normal(size=2)
        u = fd.positive_basis(s) @ (c / np.linalg.norm(c))
        for t in rng.uniform(-10, 10, size=10):
            worst = max(worst, abs(fd.taudot_mean_positive(s, u, t) - s.m_prime / s.E))
    ref = fd.Sector((3.0, 0.0, 0.0), 4.0)
    u = fd.positive_basis(ref)[:, 0]
    val = fd.taudot_mean_positive(ref, u, 0.37)
    ok = worst < 1e-10 and abs(val - 0.8) < 1e-10
    return ok, None, f"max |<beta(t)> - m'/E| = {worst:.2e} < 1e-10; (3,0,0;4) gives {val:.12f}"


def criterion_4():
    m, v = 1.0, 0.6
    p = float(scalar.velocity_to_momentum([v, 0.0, 0.0], m)[0])
    exact = scalar.taudot_flat_mean(m, [p, 0.0, 0.0])
    sigma_p = 0.05 * p
    grid = flat_packet_rate(m, p, 0.008, sigma_p, 256, 64)
    err = abs(grid - exact)
    ok = err < 1e-4 and exact == pytest.approx(0.8, abs=1e-15)
    return ok, None, f"sigma_p/|p'| = 0.05: |grid - exact| = {err:.2e} < 1e-4; closed form {exact!r}"


def criterion_5():
    a = 2.5
    radii = (600.0, 1000.0, 1500.0, 2200.0, 3000.0)
    rates = []
    for r in radii:
        s, metric = vf.redshift_packet(r, a)
        rates.append(scalar.taudot_mean_at_zero(s, metric))
    at = rates[radii.index(1000.0)]
    err = abs(at - 0.994987)
    mono = bool(np.all(np.diff(rates) > 0))
    return err < 5e-4 and mono, 30.0, f"4a/r = 0.01 gives {at:.7f} (err {err:.1e} < 5e-4); monotone over 5 radii: {mono}"


def criterion_6():
    cfg = vf.PAIRED_BASE
    assert (cfg.n_tau, cfg.n_x, cfg.g) == (64, (32, 32, 32), 5e-3)
    base = vf.paired_spin_runs(cfg)
    half = vf.paired_spin_runs(cfg.scaled(0.5))
    rel = base["residual"] / base["spin_term"]
    gain = base["residual"] / half["residual"]
    return rel < 0.05 and gain >= 2, 600.0, f"paired residual = {rel:.4f} x spin term < 0.05; halving spreads gains {gain:.2f}x >= 2"


def criterion_7():
    configs = gd.sweep_configs(50)
    worst = max(abs(gd.ratio_estimate(gd.build_positive_spinor(c))) / (c.g / c.m_prime) for c in configs)
    par = 0.0
    for c in configs[:10]:
        st = gd.build_positive_spinor(replace(c, spin=c.p_prime))
        par = max(par, abs(gd.ratio_estimate(st)) / (c.g / c.m_prime))
    return worst <= 1 and par < 1e-6, None, f"max |ratio|/(g/m') = {worst:.4f} <= 1 over 50 runs; spin || p' gives {par:.1e}"


def criterion_8():
    e = gd.si_smallness(constants.m_e)
    mu = gd.si_smallness(constants.physical_constants["muon mass"][0])
    ok = abs(e / 4e-29 - 1) < 0.1 and abs(mu / 2e-31 - 1) < 0.1
    return ok, None, f"electron {e:.3e} vs 4e-29, muon {mu:.3e} vs 2e-31 (within 10%)"


def criterion_9():
    secs, ts = _sectors_and_times(200, 4)
    worst = max(fd.alpha_square_check(s, t) for s, t in zip(secs, ts))
    return worst < 1e-12, None, f"max |sum alpha_j(t)^2 - 3I| = {worst:.2e} < 1e-12"


SUITE_PARTS = {
    "[tau, m] = i": "commutator",
    "Robertson product": "Robertson",
    "mass conservation": "mass conservation",
    "dense oracle equivalence": "oracle equivalence",
    "scalar H oracle equivalence": "scalar oracle",
}


def criterion_10():
    results = vf.run_suite()
    failed = [r.name for r in results if not r.passed]
    parts = {r.name: r for r in results}
    detail = "; ".join(f"{label} {parts[k].residual:.1e}" for k, label in SUITE_PARTS.items())
    msg = f"{len(results) - len(failed)}/{len(results)} properties pass ({detail})"
    if failed:
        msg += f"; failing: {', '.join(failed)}"
    return not failed, 900.0, msg


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


def evaluate(fn):
    t0 = time.perf_counter()
    ok, budget, detail = fn()
    dt = time.perf_counter() - t0
    in_time = budget is None or dt < budget
    limit = f" < {budget:g}s" if budget is not None else ""
    n = fn.__name__.split("_")[1]
    line = f"{'PASS' if ok and in_time else 'FAIL'}  criterion {n:>2}: {detail}  [{dt:.1f}s{limit}]"
    return ok and in_time, line


@pytest.mark.parametrize("fn", CRITERIA, ids=lambda f: f.__name__)
def test_criterion(fn, capsys):
    ok, line = evaluate(fn)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [evaluate(fn) for fn in CRITERIA]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
