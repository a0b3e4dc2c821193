import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as si

from nriguide import green
from nriguide.materials import LayerStack, MaterialModel, StackOrderError

from conftest import fixed_slab, low_loss_core, slab, strong_loss_core


def homogeneous(eps, mu, d=1.3, z0=0.4):
    m = MaterialModel.fixed(eps, mu)
    return LayerStack(m, m, m, d, z0)


def test_vacuum_im_g_closed_form():
    assert green.vacuum_im_g() == pytest.approx(1 / (6 * np.pi), rel=1e-12)


def test_vacuum_density_integrates_to_one(vacuum):
    stack = LayerStack(vacuum, vacuum, vacuum, 1.0, 0.5)
    total = si.quad(lambda k: float(np.sum(green.rate_density(stack, 1.0, k).__dict__["dGamma_x_p"]
                                           + green.rate_density(stack, 1.0, k).dGamma_x_s
                                           + green.rate_density(stack, 1.0, k).dGamma_z_p)),
                    0, 1, epsabs=1e-12, epsrel=1e-10, limit=200)[0]
    assert total == pytest.approx(1.0, rel=1e-8)


def test_vacuum_breakdown(vacuum):
    t = time.perf_counter()
    b = green.total_breakdown(LayerStack(vacuum, vacuum, vacuum, 1.0, 0.5), 1.0)
    assert time.perf_counter() - t < 1.0
    assert b.gamma_n == pytest.approx(1.0, abs=1e-3)
    assert b.gamma_x == pytest.approx(0.5, abs=1e-6) and b.gamma_z == pytest.approx(0.5, abs=1e-6)
    assert abs(b.kappa) < 1e-6
    assert b.by_class("radiation") == pytest.approx(1.0, abs=1e-9)
    for cls in ("substrate", "guided", "surface"):
        assert b.by_class(cls) == 0


@pytest.mark.parametrize("eps,mu", [(1.5, 1.5), (2.0, 2.0), (4.0, 1.0), (1.0, 2.25), (2.25, 1.0)])
def test_homogeneous_medium_law(eps, mu):
    b = green.total_breakdown(homogeneous(eps, mu), 1.0)
    assert b.gamma_n == pytest.approx(mu * np.sqrt(eps * mu), rel=1e-6)
    assert abs(b.kappa) < 1e-6


def test_density_components():
    stack = fixed_slab(-1.99 + 1e-3j, -1.99 + 1e-3j, 3.0, 0.25)
    k = np.linspace(0.05, 5, 400)
    d = green.rate_density(stack, 1.0, k)
    assert d.k.shape == d.dGamma_z_p.shape == d.dGamma_x_s.shape


@given(k=st.floats(0.001, 1.98), frac=st.floats(0.05, 0.95), d=st.floats(0.05, 8.0),
       gamma=st.sampled_from([0.0, 1e-8, 1e-3]))
@settings(max_examples=200, deadline=None)
def test_density_nonnegative_below_core_light_line(k, frac, d, gamma):
    if gamma == 0:
        stack = fixed_slab(-1.99, -1.99, d, frac)
    else:
        stack = slab(strong_loss_core(gamma), d, frac)
    omega = 1.0 if gamma == 0 else 1.08
    m = stack.media(omega)
    if k * k >= m.eta[2].real or abs(k - 1) < 1e-9:
        return
    dens = green.rate_density(stack, omega, k)
    for col in (dens.dGamma_x_p, dens.dGamma_x_s, dens.dGamma_z_p):
        assert col[0] >= -1e-12


@given(k=st.floats(0.01, 12.0), frac=st.floats(0.05, 0.45))
@settings(max_examples=100, deadline=None)
def test_density_mirror_symmetry(k, frac):
    core = strong_loss_core()
    a = green.rate_density(slab(core, 1.7, frac), 1.08, k)
    b = green.rate_density(slab(core, 1.7, 1 - frac), 1.08, k)
    for x, y in ((a.dGamma_x_p, b.dGamma_x_p), (a.dGamma_x_s, b.dGamma_x_s), (a.dGamma_z_p, b.dGamma_z_p)):
        assert x[0] == pytest.approx(y[0], rel=1e-9, abs=1e-15)


@pytest.mark.parametrize("core,omega,d", [(strong_loss_core(), 1.08, 0.3), (strong_loss_core(), 1.08, 4.0),
                                          (low_loss_core(0.0), 1.09, 6.0)])
def test_breakdown_mirror_symmetry(core, omega, d):
    a = green.total_breakdown(slab(core, d, 0.2), omega)
    b = green.total_breakdown(slab(core, d, 0.8), omega)
    for key, v in a.entries.items():
        assert v == pytest.approx(b.entries[key], rel=1e-10, abs=1e-14)


@pytest.mark.parametrize("d", [3.3, 4.2, 6.0])
def test_guided_quadrature_matches_residue(d):
    b = green.total_breakdown(slab(low_loss_core(1e-8), d), 1.09, threshold=0)
    assert b.methods["guided"] == "quadrature"
    q, r = b.comparison["guided_quadrature"], b.comparison["guided_residue"]
    assert q == pytest.approx(r, rel=0.02)


@pytest.mark.parametrize("d", [0.05, 0.3])
def test_surface_quadrature_matches_residue(d):
    b = green.total_breakdown(slab(low_loss_core(1e-8), d), 1.09, threshold=0)
    q, r = b.comparison["surface_quadrature"], b.comparison["surface_residue"]
    assert q == pytest.approx(r, rel=0.02)


def test_routing_by_absorption():
    low = green.total_breakdown(slab(low_loss_core(1e-10), 3.3), 1.09)
    assert low.methods["guided"] == "residue" and low.methods["surface"] == "residue"
    high = green.total_breakdown(slab(strong_loss_core(), 3.3), 1.08)
    assert high.methods["guided"] == "quadrature"
    assert green.integrate_class(slab(low_loss_core(1e-10), 3.3), 1.09, "guided", threshold=1e-12).method == "quadrature"


def test_lorentzian_width_scales_with_absorption():
    widths = []
    for gamma in (1e-7, 1e-6):
        m = slab(low_loss_core(gamma), 4.2).media(1.09)
        a, b = 1.0, np.sqrt(m.eta[2].real)
        poles = green.lossy_poles(m, a, b, "guided")
        assert poles
        widths.append(max(abs(p.imag) for p in poles))
    assert widths[1] / widths[0] == pytest.approx(10, rel=0.01)


def test_poles_follow_lossless_roots():
    from nriguide.modes import find_guided_roots
    m = slab(low_loss_core(1e-8), 4.2).media(1.09)
    poles = green.lossy_poles(m, 1.0, np.sqrt(m.eta[2].real), "guided")
    roots = find_guided_roots(m.real_part(), pol="p") + find_guided_roots(m.real_part(), pol="s")
    for r in roots:
        assert min(abs(p.real - r.k) for p in poles) < 1e-5


def test_radiation_class_of_order_one():
    for d in (0.5, 2.0, 3.3, 6.0, 9.0):
        r = green.integrate_class(slab(low_loss_core(1e-10), d), 1.09, "radiation")
        assert 0.1 < sum(r.values.values()) < 10


def test_guided_peak_dominates_other_classes():
    from nriguide.config import preset
    from nriguide.scan import guided_peak
    cfg = preset("fig2").with_gamma(1e-8)
    x, _ = guided_peak(cfg, 3.0637154936322823, 0.01)
    b = green.total_breakdown(cfg.stack(d3_prime=x), 1.09, threshold=0)
    pz = b.component("guided", "p", "z")
    others = [v for (c, _, _), v in b.entries.items() if c != "guided"]
    assert pz > 1e2 * max(others)


def test_class_errors():
    stack = slab(low_loss_core(1e-10), 3.3)
    with pytest.raises(ValueError):
        green.integrate_class(stack, 1.09, "radiation", method="residue")
    with pytest.raises(ValueError):
        green.integrate_class(stack, 1.09, "leaky")


def test_inverted_stack_rejected():
    inverted = LayerStack(MaterialModel.fixed(4, 1), MaterialModel.vacuum(), MaterialModel.fixed(2, 1), 1, 0.5)
    with pytest.raises(StackOrderError):
        green.total_breakdown(inverted, 1.0)


def test_unconverged_result_keeps_error_estimate():
    res = green.integrate_class(slab(strong_loss_core(), 3.0), 1.08, "radiation", rtol=1e-15)
    assert res.error >= 0
    assert isinstance(res.converged, bool)
