"""Acceptance criteria, one test each. Every test prints a pass/fail line in the terminal summary."""

import time

import numpy as np
import pytest

from nriguide import dynamics as dyn
from nriguide import green, modes
from nriguide.config import preset, validate_config
from nriguide.materials import LayerStack, MaterialModel
from nriguide.scan import figure_preset, run_scan

from conftest import fixed_slab, low_loss_core, record_acceptance, slab

LN_CONTRAST = np.log(2.99 / 0.99)


def check(number, title, passed, detail):
    record_acceptance(number, title, bool(passed), detail)
    assert passed, detail


def test_01_vacuum_anchor():
    vac = MaterialModel.vacuum()
    t = time.perf_counter()
    b = green.total_breakdown(LayerStack(vac, vac, vac, 1.0, 0.5), 1.0)
    elapsed = time.perf_counter() - t
    ok = abs(b.gamma_n - 1) <= 1e-3 and abs(b.kappa) <= 1e-6 and elapsed < 1.0
    check(1, "vacuum anchor", ok, f"Gtot={b.gamma_n:.9f}, kappa={b.kappa:.2e}, {elapsed:.3f} s")


def test_02_homogeneous_medium():
    worst, parts = 0.0, []
    for n in (1.5, 2.0):
        m = MaterialModel.fixed(n, n)
        b = green.total_breakdown(LayerStack(m, m, m, 1.3, 0.4), 1.0)
        exact = n * np.sqrt(n * n)
        worst = max(worst, abs(b.gamma_n / exact - 1))
        parts.append(f"n={n}: {b.gamma_n:.6f} vs {exact:.6f}")
    check(2, "homogeneous-medium law", worst <= 1e-3, "; ".join(parts) + f"; max rel err {worst:.1e}")


def test_03_quadrature_vs_residue():
    ds = (3.15, 3.25, 3.35, 3.45, 3.55, 3.75, 4.0, 4.3, 4.6, 4.9)
    core = low_loss_core(1e-8)
    t = time.perf_counter()
    worst = 0.0
    for d in ds:
        stack = slab(core, d)
        q = sum(green.integrate_class(stack, 1.09, "guided", method="quadrature").values.values())
        r = sum(green.integrate_class(stack, 1.09, "guided", method="residue").values.values())
        worst = max(worst, abs(q / r - 1))
    elapsed = time.perf_counter() - t
    check(3, "guided quadrature vs residue", worst <= 0.02 and elapsed < 120,
          f"10 points d3'={ds[0]}..{ds[-1]}, max rel diff {worst:.2e}, {elapsed:.1f} s")


def test_04_analytic_guided_formula():
    stack = slab(low_loss_core(0.0), 1.0)
    worst, count = 0.0, 0
    for d in np.arange(0.1, 10.0001, 0.05):
        m = stack.with_geometry(float(d), 0.25 * float(d)).media(1.09)
        for root in modes.find_guided_roots(m, pol="p"):
            formula = modes.guided_rate_pz(m, roots=[root])
            worst = max(worst, abs(formula / root.residue_z - 1))
            count += 1
    check(4, "analytic guided formula", count > 0 and worst <= 1e-6,
          f"{count} roots, max rel diff {worst:.2e}")


def test_05_node_selection():
    stack = slab(low_loss_core(0.0), 1.0)
    odd, largest = 0, 0.0
    for d in np.arange(0.1, 10.0001, 0.05):
        m = stack.with_geometry(float(d), float(d) / 2).media(1.09)
        for root in modes.find_guided_roots(m, pol="p"):
            if modes.node_parity(m, root) % 2:
                odd += 1
                largest = max(largest, root.residue_z)
    check(5, "node-selection rule", odd > 0 and largest < 1e-8,
          f"{odd} odd roots, largest p/z contribution {largest:.2e}")


@pytest.mark.slow
def test_06_absorption_scaling(tmp_path):
    results = figure_preset("fig4", tmp_path, jobs=1)
    peaks = [max(p["Gg"] for p in r.peaks) for r in results]
    low, high = peaks
    ratio = low / high
    ok_abs = abs(low / 7100 - 1) <= 0.15 and abs(high / 710 - 1) <= 0.15
    ok_ratio = abs(ratio / 10 - 1) <= 0.05
    check(6, "absorption scaling", ok_abs and ok_ratio,
          f"peak Gg {low:.1f} (gamma=1e-10), {high:.2f} (gamma=1e-8), ratio {ratio:.3f}; "
          f"targets 7100/710; in units of twice the vacuum rate {low / 2:.0f}/{high / 2:.1f}")


@pytest.mark.slow
def test_07_guided_enhancement():
    cfg = validate_config({**preset("fig2").raw, "refine_folds": True})
    res = run_scan(cfg)
    peak = float(np.nanmax(res.column("Gg")))
    check(7, "guided enhancement", peak > 1e3, f"max Gg over d3' in [0.1, 10] = {peak:.1f}")


def test_08_surface_cutoff():
    base = fixed_slab(-1.99, -1.99, 1.0, 0.25)
    d_max = modes.surface_cutoff_thickness(base.media(1.0))
    largest = 0.0
    for d in np.linspace(d_max + 1e-3, 3.0, 200):
        m = base.with_geometry(float(d), 0.25 * float(d)).media(1.0)
        near = [r for r in modes.find_surface_roots(m, pol="p") if r.cls == "surface_near"]
        largest = max([largest, modes.surface_rate_pz_near(m)] + [r.residue_x + r.residue_z for r in near])
    below = modes.find_surface_roots(base.with_geometry(0.5, 0.125).media(1.0), pol="p")
    has_below = any(r.cls == "surface_near" for r in below)
    check(8, "surface cutoff", abs(d_max - 0.584) < 1e-3 and largest < 1e-6 and has_below,
          f"d3max={d_max:.5f}, largest surface_near rate above it {largest:.1e}")


def test_09_thin_film_surface_modes():
    parts, ok = [], True
    for d in (0.05, 0.1):
        m = slab(low_loss_core(0.0), d).media(1.09)
        far = [r for r in modes.find_surface_roots(m, pol="p") if r.cls == "surface_far"]
        kd = far[0].k * d if far else np.nan
        rate = sum(r.residue_x + r.residue_z for r in far)
        ok &= bool(far) and abs(kd / LN_CONTRAST - 1) <= 0.1 and rate > 100
        parts.append(f"d3'={d}: k d3'={kd:.4f}, Gs_p={rate:.1f}")
    check(9, "thin-film surface modes", ok, "; ".join(parts) + f"; ln(2.99/0.99)={LN_CONTRAST:.4f}")


@pytest.mark.slow
def test_10_interference_extrema():
    a = run_scan(preset("fig7a"))
    b = run_scan(preset("fig7b"))
    ka, kb = a.column("kappa"), b.column("kappa")
    small = b.column("d3_prime") <= 1.0
    kmax, kmin, kb_min = np.nanmax(ka), np.nanmin(ka), np.nanmin(kb[small])
    check(10, "interference extrema", kmax >= 0.95 and kmin <= -0.95 and kb_min <= -0.9,
          f"7a kappa in [{kmin:.5f}, {kmax:.5f}]; 7b min kappa at d3'<=1 {kb_min:.4f}")


@pytest.mark.slow
def test_11_high_absorption_contrast():
    r5 = run_scan(preset("fig5"))
    gg = float(np.nanmax(r5.column("Gg")))
    r6 = run_scan(preset("fig6"))
    small = r6.column("d3_prime") <= 0.1
    spx = float(np.nanmax(r6.column("surface_px")[small]))
    check(11, "high-absorption contrast", gg < 10 and spx > 100,
          f"max Gg {gg:.3f}; max surface p/x at d3'<=0.1 {spx:.1f}")


def test_12_dynamics():
    p = dyn.SGCParams.degenerate(1.0, 0.6)
    long_run = dyn.evolve(dyn.pure_state(1, 0.5j), p, 100.0, 0.001, samples=1000, check_halving=False)
    drift = float(np.max(np.abs(np.einsum("tii->t", long_run.rho) - 1)))
    trap = 0.0
    for kappa, state in ((1.0, (1, 1)), (-1.0, (1, -1))):
        tr = dyn.evolve(dyn.pure_state(*state), dyn.SGCParams.degenerate(1.0, kappa), 10.0, 0.01)
        trap = max(trap, float(np.max(np.abs(tr.excited - tr.excited[0]))))
    tr = dyn.evolve(dyn.basis_state(1), dyn.SGCParams.degenerate(1.0, -1.0), 20.0, 0.01)
    rho11 = float(tr.populations[-1, 0])
    ok = drift <= 1e-9 and trap <= 1e-6 and abs(rho11 - 0.25) <= 1e-3
    check(12, "dynamics suite", ok,
          f"trace drift {drift:.1e} over 1e5 steps; dark-state change {trap:.1e}; rho11(inf)={rho11:.6f}")


@pytest.mark.slow
def test_13_determinism(tmp_path):
    a = run_scan(preset("fig2"), tmp_path / "a.csv", jobs=1)
    b = run_scan(preset("fig2"), tmp_path / "b.csv", jobs=1)
    same = a.csv_path.read_bytes() == b.csv_path.read_bytes()
    check(13, "determinism", same, f"{len(a.rows)} rows, byte-identical={same}")
