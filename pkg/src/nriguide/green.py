"""Imaginary part of the layered-media Green tensor at the atom, integrated over k.

The in-plane wavenumber axis splits into radiation, substrate, guided and
evanescent intervals. Continuum intervals are integrated with adaptive
Gauss-Kronrod quadrature; the guided and evanescent intervals either by
quadrature (lossy core, pole positions used as mandatory breakpoints) or by
residue sums over the real roots of the lossless kernel.

All rates are normalised by the same quadrature performed for an all-vacuum
stack, so an atom in vacuum has Gamma_x = Gamma_z = 1/2.
"""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass, field

import numpy as np

from . import modes, quadrature
from .em_core import POLARIZATIONS, TransverseContext, d_factor, d_factor_dk
from .materials import LayerStack, Media, MaterialModel, StackOrderError, validate_stack
from .rates import RateBreakdown, assemble

log = logging.getLogger(__name__)

RTOL = 1e-6
RESIDUE_THRESHOLD = 1e-8
LADDER_BASE = 4.0
NEWTON_MAXITER = 60


@dataclass
class RateDensity:
    k: np.ndarray
    dGamma_x_p: np.ndarray
    dGamma_x_s: np.ndarray
    dGamma_z_p: np.ndarray


@dataclass
class ClassResult:
    values: dict[tuple[str, str], float]
    error: float
    method: str
    converged: bool = True
    extras: dict = field(default_factory=dict)


def _bulk_asymptote(media: Media, k):
    """Large-k expansion of the homogeneous-core integrand, up to the terms whose k-integral diverges.

    The coefficients are real for a lossless core, so removing them changes
    nothing there; for an absorbing core they carry the divergent near-field
    absorption of the host medium.
    """
    c = media.mu[2] / (8 * np.pi * media.eta[2])
    eta3 = media.eta[2]
    k2 = k * k
    return c * (eta3 / 2 - k2), c * eta3 * np.ones_like(k2), c * (2 * k2 + eta3)


def raw_integrand(media: Media, k, subtract_bulk: bool = False) -> np.ndarray:
    """Im of the Green-tensor integrand, columns (xx from p, xx from s, zz from p).

    Units are those of Im G (omega/c = 1); the vacuum value integrates to 1/(6 pi)
    per component.
    """
    k = np.atleast_1d(np.asarray(k, dtype=float))
    ctx = TransverseContext.at(media, k)
    cols = []
    for pol, comp in (("p", "x"), ("s", "x"), ("p", "z")):
        num = modes.integrand_numerator(media, pol, comp, ctx)
        cols.append(num / d_factor(pol, ctx))
    out = np.stack(cols, axis=-1)
    if subtract_bulk:
        out = out - np.stack(_bulk_asymptote(media, k.astype(complex)), axis=-1)
    return out.imag


@functools.lru_cache(maxsize=None)
def vacuum_im_g() -> float:
    """Im G_zz of vacuum at coincident points, from the same quadrature as every other rate."""
    vac = MaterialModel.vacuum()
    media = LayerStack(vac, vac, vac, 1.0, 0.5).media(1.0)
    res = _integrate_interval(media, 0.0, 1.0, (), False, RTOL * 1e-3)
    return float(res.value[2])


def rate_scale() -> float:
    return 1.0 / (2.0 * vacuum_im_g())


def rate_density(stack: LayerStack, omega: float, k) -> RateDensity:
    """Differential rates dGamma/dk, normalised like the integrated rates.

    In the evanescent interval the divergent bulk term of an absorbing core is
    removed, exactly as in the surface-class integral, so the density always
    integrates to the reported rates.
    """
    media = stack.media(omega)
    k = np.atleast_1d(np.asarray(k, dtype=float))
    evanescent = k * k > media.eta[2].real
    raw = np.where(evanescent[:, None], raw_integrand(media, k, True), raw_integrand(media, k)) * rate_scale()
    return RateDensity(k=k, dGamma_x_p=raw[:, 0], dGamma_x_s=raw[:, 1], dGamma_z_p=raw[:, 2])


def _smoothstep_inverse(t):
    t = np.clip(t, 0.0, 1.0)
    return 0.5 - np.sin(np.arcsin(1.0 - 2.0 * t) / 3.0)


def _integrate_interval(media, a, b, breakpoints, subtract_bulk, rtol, atol=0.0):
    """Quadrature over [a, b] in u with k = a + (b - a)(3u^2 - 2u^3).

    The map removes the inverse-square-root behaviour at the interval ends
    (beta_j -> 0 at a class boundary).
    """
    width = b - a

    def f(u):
        kk = a + width * u * u * (3 - 2 * u)
        jac = width * 6 * u * (1 - u)
        return raw_integrand(media, kk, subtract_bulk) * jac[:, None]

    pts = _smoothstep_inverse((np.asarray(breakpoints, dtype=float) - a) / width) if len(breakpoints) else ()
    return quadrature.integrate(f, 0.0, 1.0, points=tuple(pts), rtol=rtol, atol=atol)


def _newton_complex(media, pol, k0):
    with np.errstate(over="ignore", invalid="ignore"):
        return _newton_iterate(media, pol, complex(k0))


def _newton_iterate(media, pol, k):
    for _ in range(NEWTON_MAXITER):
        ctx = TransverseContext.at(media, k)
        d = complex(d_factor(pol, ctx))
        dd = complex(d_factor_dk(pol, ctx))
        if dd == 0:
            return None
        step = d / dd
        k -= step
        if not np.isfinite(k):
            return None
        if abs(step) < 1e-14 * abs(k):
            return k
    return k if abs(d) < 1e-8 else None


def lossy_poles(media: Media, a: float, b: float, kind: str) -> list[complex]:
    """Complex roots of D_p3 and D_s3 of the lossy kernel lying close to the real interval."""
    seeds = []
    lossless = media.real_part()
    for pol in POLARIZATIONS:
        if kind == "guided":
            grid = modes._cubic_grid(a, b, modes.GRID_POINTS)
            real_roots = modes.find_guided_roots(lossless, pol=pol)
        else:
            grid = modes._square_grid(a, b, modes.GRID_POINTS)
            real_roots = modes.find_surface_roots(lossless, pol=pol)
        seeds += [(pol, r.k) for r in real_roots]
        absd = np.abs(d_factor(pol, TransverseContext.at(media, grid)))
        idx = np.nonzero((absd[1:-1] < absd[:-2]) & (absd[1:-1] <= absd[2:]))[0] + 1
        seeds += [(pol, grid[i]) for i in idx]
    poles = []
    for pol, k0 in seeds:
        kc = _newton_complex(media, pol, k0)
        if kc is None or not a < kc.real < b or abs(kc.imag) > 0.25 * (b - a):
            continue
        if all(abs(kc - q) > 1e-10 * abs(kc) for q in poles):
            poles.append(kc)
    return sorted(poles, key=lambda z: (z.real, z.imag))


def pole_breakpoints(poles, a, b) -> list[float]:
    pts = []
    for kc in poles:
        w = max(abs(kc.imag), 1e-15 * abs(kc.real))
        pts.append(kc.real)
        for s in (-1, 1):
            pts.append(kc.real + s * 5 * w)
            step = w
            while step < (b - a):
                pts.append(kc.real + s * step)
                step *= LADDER_BASE
    return sorted(p for p in set(pts) if a < p < b)


def evanescent_kmax(media: Media) -> float:
    dist = min(media.z0, media.d - media.z0)
    return max(10 * np.sqrt(media.eta[2].real), 40 / media.d, 40 / dist)


def _values_from(vec) -> dict[tuple[str, str], float]:
    scale = rate_scale()
    return {("p", "x"): float(vec[0]) * scale, ("s", "x"): float(vec[1]) * scale,
            ("p", "z"): float(vec[2]) * scale, ("s", "z"): 0.0}


def _quad_class(media, cls, rtol):
    bounds = modes.region_bounds(media)
    if cls == "surface":
        a = bounds["evanescent"][0]
        b = evanescent_kmax(media)
    else:
        a, b = bounds[cls]
    if not b > a:
        return ClassResult(values=_values_from(np.zeros(3)), error=0.0, method="empty")
    poles = []
    if cls in ("guided", "surface"):
        poles = lossy_poles(media, a, b, "guided" if cls == "guided" else "surface")
    pts = pole_breakpoints(poles, a, b)
    subtract = cls == "surface"
    # absolute floor so classes that are numerically zero terminate
    res = _integrate_interval(media, a, b, pts, subtract, rtol, atol=1e-12 * vacuum_im_g())
    error = res.error
    extras = {"poles": poles, "panels": res.panels}
    if cls == "surface":
        # remainder decays like exp(-2 k dist) (interfaces) or 1/k^2 (absorbing core)
        dist = min(media.z0, media.d - media.z0)
        tail = np.max(np.abs(raw_integrand(media, [b], True))) * max(b, 1 / (2 * dist))
        error += float(tail)
        extras["kmax"] = b
    if not res.converged:
        log.warning("%s-class quadrature did not reach rtol=%g (error %.3g)", cls, rtol, error)
    return ClassResult(values=_values_from(res.value), error=error * rate_scale(),
                       method="quadrature", converged=res.converged, extras=extras)


def _residue_class(media, cls):
    lossless = media.real_part()
    values = {("p", "x"): 0.0, ("s", "x"): 0.0, ("p", "z"): 0.0, ("s", "z"): 0.0}
    roots = []
    for pol in POLARIZATIONS:
        found = (modes.find_guided_roots(lossless, pol=pol) if cls == "guided"
                 else modes.find_surface_roots(lossless, pol=pol))
        for r in found:
            values[(pol, "x")] += r.residue_x
            values[(pol, "z")] += r.residue_z
        roots += found
    return ClassResult(values=values, error=0.0, method="residue", extras={"roots": roots})


def integrate_class(stack_or_media, omega=None, cls: str = "radiation", rtol: float = RTOL,
                    method: str = "auto", threshold: float = RESIDUE_THRESHOLD) -> ClassResult:
    """Rate carried by one mode class, per (polarization, component), in gamma0 units.

    ``method`` is ``"quadrature"``, ``"residue"`` (guided/surface only) or
    ``"auto"``, which uses residues when the core absorption is below
    ``threshold``.
    """
    if isinstance(stack_or_media, Media):
        media, absorption = stack_or_media, float(np.max(np.abs(
            np.concatenate([stack_or_media.eps.imag, stack_or_media.mu.imag]))))
    else:
        media, absorption = stack_or_media.media(omega), stack_or_media.absorption
    if cls not in ("radiation", "substrate", "guided", "surface"):
        raise ValueError(f"unknown class {cls!r}")
    if method == "auto":
        method = "residue" if cls in ("guided", "surface") and absorption < threshold else "quadrature"
    if method == "residue":
        if cls not in ("guided", "surface"):
            raise ValueError("residue sums only apply to guided and surface classes")
        return _residue_class(media, cls)
    return _quad_class(media, cls, rtol)


def total_breakdown(stack: LayerStack, omega: float, rtol: float = RTOL,
                    threshold: float = RESIDUE_THRESHOLD, compare: bool = True) -> RateBreakdown:
    """All classes, polarizations and dipole components for one configuration."""
    report = validate_stack(stack, omega)
    if report.eta3.real < report.eta1.real or report.eta1.real < report.eta2.real:
        # equal indices only empty a class interval; an inverted order breaks the classification
        raise StackOrderError("; ".join(report.violations))
    media = stack.media(omega)
    absorption = stack.absorption
    entries, methods, comparison = {}, {}, {}
    error = 0.0
    converged = True
    for cls in ("radiation", "substrate", "guided", "surface"):
        res = integrate_class(stack, omega, cls, rtol=rtol, threshold=threshold)
        methods[cls] = res.method
        error += res.error
        converged = converged and res.converged
        for (pol, comp), v in res.values.items():
            entries[(cls, pol, comp)] = v
        if (compare and cls in ("guided", "surface") and res.method == "quadrature"
                and absorption <= modes.MAX_ROOT_ABSORPTION):
            other = _residue_class(media, cls)
            comparison[f"{cls}_quadrature"] = sum(res.values.values())
            comparison[f"{cls}_residue"] = sum(other.values.values())
    return assemble(entries, error_estimate=error, methods=methods, comparison=comparison,
                    converged=converged)
