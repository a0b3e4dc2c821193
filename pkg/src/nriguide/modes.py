"""Guided and surface-guided roots of D_q3 = 0 and their decay rates.

Roots are searched on the real k axis of the real-part (lossless) kernel.
Rates are in units of the free-space rate gamma0 and follow the
vacuum-normalised convention of :mod:`nriguide.green`: an atom in vacuum
has Gamma_x = Gamma_z = 1/2.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import em_core
from .em_core import TransverseContext, d_factor, d_factor_dk, fresnel, i_factors
from .materials import LayerStack, Media

log = logging.getLogger(__name__)

GRID_POINTS = 2000
BISECT_RTOL = 1e-12
REFINE_FACTOR = 10
REFINE_LEVELS = 2
BOUNDARY_OFFSET = 1e-9
MIN_DERIVATIVE = 1e-12
# Roots of the lossy kernel may keep at most this much of the real-part kernel's absorption.
MAX_ROOT_ABSORPTION = 1e-8

# Im G at coincident points in vacuum, per Cartesian component, in units of omega/c.
VACUUM_IM_G = 1.0 / (6.0 * np.pi)
# Converts Im G (per component) into Gamma_n components in units of gamma0.
RATE_SCALE = 1.0 / (2.0 * VACUUM_IM_G)


class TangencyError(ArithmeticError):
    """dD/dk vanishes at a root; the root needs refinement before a residue makes sense."""


class ModeBirthError(ArithmeticError):
    """A cladding decay constant vanishes at a root (mode at the cladding light line)."""


@dataclass
class ModeRoot:
    pol: str
    cls: str
    m: int
    k: float
    dD_dk: complex
    residue_x: float = 0.0
    residue_z: float = 0.0
    extras: dict = field(default_factory=dict)

    @property
    def residue_total(self) -> float:
        return self.residue_x + self.residue_z


def _media(stack_or_media, omega=None) -> Media:
    if isinstance(stack_or_media, Media):
        return stack_or_media
    if stack_or_media.absorption > MAX_ROOT_ABSORPTION:
        raise ValueError(
            f"root search needs a (nearly) lossless middle layer; absorption={stack_or_media.absorption:g}"
        )
    return stack_or_media.media(omega)


def region_bounds(media: Media) -> dict[str, tuple[float, float]]:
    """k intervals (in omega/c) of the four mode classes, from the real parts of eta."""
    e1, e2, e3 = (float(np.sqrt(max(e.real, 0.0))) for e in media.eta)
    return {
        "radiation": (0.0, e2),
        "substrate": (e2, e1),
        "guided": (e1, e3),
        "evanescent": (e3, np.inf),
    }


def surface_kmax(media: Media) -> float:
    return max(10 * np.sqrt(media.eta[2].real), 40 / media.d)


def _cubic_grid(a: float, b: float, n: int) -> np.ndarray:
    u = np.linspace(0.0, 1.0, n)
    return a + (b - a) * u * u * (3 - 2 * u)


def _square_grid(a: float, b: float, n: int) -> np.ndarray:
    u = np.linspace(0.0, 1.0, n)
    return a + (b - a) * u * u


def _guided_phase_fn(media, pol):
    def f(k):
        ctx = TransverseContext.at(media, k)
        return np.angle(1 - d_factor(pol, ctx))
    return f


def _surface_fn(media, pol):
    def f(k):
        return d_factor(pol, TransverseContext.at(media, k)).real
    return f


def _bisect(f, a, b, fa):
    for _ in range(200):
        c = 0.5 * (a + b)
        fc = f(c)
        if fc == 0:
            return c
        if np.sign(fc) == np.sign(fa):
            a, fa = c, fc
        else:
            b = c
        if b - a <= BISECT_RTOL * abs(c):
            break
    return 0.5 * (a + b)


def _brackets(k, v, wrapped):
    s = np.sign(v)
    change = s[:-1] * s[1:] < 0
    if wrapped:
        # a jump of the wrapped phase across +-pi is not a root
        change &= (np.abs(v[:-1]) < np.pi / 2) & (np.abs(v[1:]) < np.pi / 2)
    return [(k[i], k[i + 1]) for i in np.nonzero(change)[0]]


def _near_tangent(k, v):
    """Cells around interior local minima of |v| that show no sign change."""
    a = np.abs(v)
    idx = np.nonzero((a[1:-1] < a[:-2]) & (a[1:-1] <= a[2:]))[0] + 1
    out = []
    for i in idx:
        if np.sign(v[i - 1]) == np.sign(v[i]) == np.sign(v[i + 1]):
            out.append((k[i - 1], k[i + 1]))
    return out


def _scan(f, k, wrapped, level=0):
    v = f(k)
    brackets = _brackets(k, v, wrapped)
    if level < REFINE_LEVELS:
        for a, b in _near_tangent(k, v):
            fine = np.linspace(a, b, 2 * REFINE_FACTOR + 1)
            brackets.extend(_scan(f, fine, wrapped, level + 1))
    return brackets


def _polish(media, pol, k):
    ctx = TransverseContext.at(media, k)
    dk = -complex(d_factor(pol, ctx) / d_factor_dk(pol, ctx)).real
    if abs(dk) < 1e-9 * abs(k):
        trial = k + dk
        if abs(d_factor(pol, TransverseContext.at(media, trial))) <= abs(d_factor(pol, ctx)):
            return trial
    return k


def _roots_in(media, pol, a, b, region):
    if region == "guided":
        f, grid, wrapped = _guided_phase_fn(media, pol), _cubic_grid(a, b, GRID_POINTS), True
    else:
        f, grid, wrapped = _surface_fn(media, pol), _square_grid(a, b, GRID_POINTS), False
    found = []
    for lo, hi in _scan(f, grid, wrapped):
        k = _bisect(f, lo, hi, f(lo))
        found.append(_polish(media, pol, k))
    found = sorted(set(found))
    # drop duplicates produced by overlapping refinement windows
    out = []
    for k in found:
        if not out or k - out[-1] > 1e-10 * k:
            out.append(k)
    return out


def _make_roots(media, pol, ks, classify):
    roots = []
    for i, k in enumerate(ks, start=1):
        ctx = TransverseContext.at(media, k)
        root = ModeRoot(pol=pol, cls=classify(k), m=i, k=float(k),
                        dD_dk=complex(d_factor_dk(pol, ctx)))
        root.extras["D"] = complex(d_factor(pol, ctx))
        try:
            root.residue_x = residue_rate(media, root, pol, "x")
            root.residue_z = residue_rate(media, root, pol, "z")
        except TangencyError:
            root.extras["tangent"] = True
            log.warning("tangent root at k=%.12g (%s); residue skipped", k, pol)
        roots.append(root)
    return roots


def find_guided_roots(stack_or_media, omega=None, pol: str = "p") -> list[ModeRoot]:
    """Real roots of D_q3 in the open interval sqrt(eta1) < k < sqrt(eta3), ascending."""
    media = _media(stack_or_media, omega).real_part()
    a, b = region_bounds(media)["guided"]
    if not b > a:
        return []
    lo = np.sqrt(a * a + BOUNDARY_OFFSET)
    hi = np.sqrt(b * b - BOUNDARY_OFFSET)
    ks = _roots_in(media, pol, lo, hi, "guided")
    return _make_roots(media, pol, ks, lambda k: "guided")


def find_surface_roots(stack_or_media, omega=None, pol: str = "p") -> list[ModeRoot]:
    """Real roots of D_q3 with k^2 > eta3, tagged surface_near or surface_far."""
    media = _media(stack_or_media, omega).real_part()
    e3 = media.eta[2].real
    if e3 <= 0:
        return []
    lo = np.sqrt(e3 + BOUNDARY_OFFSET)
    ks = _roots_in(media, pol, lo, surface_kmax(media), "surface")

    def classify(k):
        return "surface_near" if k * k < 4 * e3 else "surface_far"

    return _make_roots(media, pol, ks, classify)


def find_all_roots(stack_or_media, omega=None) -> list[ModeRoot]:
    media = _media(stack_or_media, omega)
    roots = []
    for pol in em_core.POLARIZATIONS:
        roots += find_guided_roots(media, pol=pol)
        roots += find_surface_roots(media, pol=pol)
    return roots


def integrand_numerator(media: Media, pol: str, component: str, ctx: TransverseContext):
    """Numerator N of one Green-tensor integrand term, written as N / D_q3.

    ``component`` is ``"z"`` (e_z e_z, p only) or ``"x"`` (e_x e_x). The
    common prefactor i mu3 / (8 pi eta3) * k / beta3 is included.
    """
    pref = 1j * media.mu[2] / (8 * np.pi * media.eta[2]) * ctx.k / ctx.beta3
    i_plus, i_minus = i_factors(pol, ctx)
    if component == "z":
        if pol != "p":
            return np.zeros_like(ctx.k)
        return pref * 2 * ctx.k**2 * i_plus
    if component in ("x", "y"):
        if pol == "p":
            return pref * ctx.beta3**2 * i_minus
        return pref * media.eta[2] * i_plus
    raise ValueError(f"component must be 'x', 'y' or 'z', got {component!r}")


def residue_rate(stack_or_media, root, pol: str | None = None, component: str = "z",
                 omega=None) -> float:
    """Rate carried by one real pole: pi |N / D'| at the root, in gamma0 units."""
    media = stack_or_media if isinstance(stack_or_media, Media) else _media(stack_or_media, omega)
    media = media.real_part()
    k = root.k if isinstance(root, ModeRoot) else float(root)
    pol = pol or root.pol
    ctx = TransverseContext.at(media, k)
    dd = complex(d_factor_dk(pol, ctx))
    if abs(dd) < MIN_DERIVATIVE:
        raise TangencyError(f"|dD/dk| = {abs(dd):.3g} at k = {k:.12g}; refine the root")
    value = complex(integrand_numerator(media, pol, component, ctx)) / dd
    return float(RATE_SCALE * np.pi * abs(value))


def _kappa(ctx, i):
    return np.abs(ctx.beta_of(i))


def chi_magnitude(i: int, ctx: TransverseContext):
    """Goos-Haenchen weight with the cladding decay constant |beta_i|.

    (eta3 - eta_i) / (eps_i^2 beta3^2 + eps3^2 |beta_i|^2), with beta3^2 = eta3 - k^2
    taken as is, so the same expression serves guided and surface roots.
    """
    m = ctx.media
    k2 = (ctx.k**2).real
    den = m.eps[i - 1].real ** 2 * (m.eta[2].real - k2) + m.eps[2].real ** 2 * (k2 - m.eta[i - 1].real)
    return (m.eta[2].real - m.eta[i - 1].real) / den


def goos_haenchen_terms(media: Media, k: float) -> tuple[float, float]:
    """The two cladding terms eps_i eps3 chi_i / |beta_i| of the mode-density denominator."""
    ctx = TransverseContext.at(media, k)
    out = []
    for i in (1, 2):
        kap = float(_kappa(ctx, i))
        if kap == 0:
            raise ModeBirthError(f"beta_{i} = 0 at k = {k:.12g} (mode birth at the cladding light line)")
        out.append(float(media.eps[i - 1].real * media.eps[2].real * chi_magnitude(i, ctx) / kap))
    return out[0], out[1]


def _symmetric_or_warn(media, what):
    if not media.symmetric:
        log.warning("%s assumes eps1=eps2, mu1=mu2; use residue_rate for asymmetric stacks", what)


def guided_rate_pz(stack_or_media, omega=None, roots=None, fold: str = "pi") -> float:
    """Closed-form Gamma^p_gz summed over p-polarized guided roots.

    Each root contributes
        3 pi / (4 |eps3|) * k^2 (1 + cos 2(beta3 z0' - phi32)) / |d3' + GH1 + GH2|
    where r^p_32 = exp(-2 i phi32). For a left-handed core (beta3 < 0) the
    cosine argument equals 2(|beta3| z0' + phi32).
    """
    media = _media(stack_or_media, omega).real_part()
    _symmetric_or_warn(media, "guided_rate_pz")
    if roots is None:
        roots = find_guided_roots(media, pol="p")
    total = 0.0
    for root in roots:
        if root.pol != "p" or root.cls != "guided":
            continue
        total += _guided_term(media, root.k, fold)
    return total


def _guided_term(media, k, fold="pi"):
    ctx = TransverseContext.at(media, k)
    phi = em_core.guided_phase(ctx, fold=fold)
    b3 = float(np.real(ctx.beta3))
    gh1, gh2 = goos_haenchen_terms(media, k)
    if media.left_handed(3) and (gh1 > 0 or gh2 > 0):
        log.info("Goos-Haenchen term positive in a left-handed core at k=%.8g: %g, %g", k, gh1, gh2)
    den = media.d + gh1 + gh2
    eps3 = abs(media.eps[2].real)
    return 3 * np.pi / (4 * eps3) * k**2 * (1 + np.cos(2 * (b3 * media.z0 - phi))) / abs(den)


def surface_rate_pz(stack_or_media, omega=None, roots=None) -> float:
    """Closed-form Gamma^p_sz over p-polarized surface roots (hyperbolic mode profile).

    Each root contributes
        3 pi / (4 |eps3|) * k^2 (cosh 2(|beta3| z0' - phi_sp) - 1) / |d3' + GH1 + GH2|
    with r^p_32 = -exp(2 phi_sp).
    """
    media = _media(stack_or_media, omega).real_part()
    _symmetric_or_warn(media, "surface_rate_pz")
    if roots is None:
        roots = find_surface_roots(media, pol="p")
    total = 0.0
    for root in roots:
        if root.pol != "p" or not root.cls.startswith("surface"):
            continue
        ctx = TransverseContext.at(media, root.k)
        phi = em_core.surface_phase(ctx)
        kap3 = float(np.abs(ctx.beta3))
        gh1, gh2 = goos_haenchen_terms(media, root.k)
        den = media.d + gh1 + gh2
        total += (3 * np.pi / (4 * abs(media.eps[2].real)) * root.k**2
                  * (np.cosh(2 * (kap3 * media.z0 - phi)) - 1) / abs(den))
    return total


def thin_film_rate_pz(stack_or_media, omega=None, roots=None) -> float:
    """Large-k approximation of Gamma^p_sz for very thin symmetric films."""
    media = _media(stack_or_media, omega).real_part()
    if roots is None:
        roots = find_surface_roots(media, pol="p")
    e1, e3 = media.eps[0].real, media.eps[2].real
    contrast = media.eta[2].real - media.eta[0].real
    total = 0.0
    for root in roots:
        if root.pol != "p" or not root.cls.startswith("surface"):
            continue
        k = root.k
        kap3 = np.sqrt(k * k - media.eta[2].real)
        den = media.d - 2 * e1 * e3 * contrast / (k**3 * (e1**2 - e3**2))
        total += (3 * np.pi / (4 * abs(e3)) * k**2
                  * (np.cosh(kap3 * (media.d - 2 * media.z0)) - 1) / abs(den))
    return total


def thin_film_wavenumber(stack_or_media, omega=None) -> float:
    """Estimate k d3' = ln|(eps1 - eps3)/(eps1 + eps3)| of the large-k p surface mode."""
    media = stack_or_media if isinstance(stack_or_media, Media) else stack_or_media.media(omega)
    e1, e3 = media.eps[0].real, media.eps[2].real
    return float(np.log(abs((e1 - e3) / (e1 + e3))) / media.d)


def surface_cutoff_thickness(stack_or_media, omega=None) -> float:
    """Largest d3' supporting the near-light-line p surface mode."""
    media = stack_or_media if isinstance(stack_or_media, Media) else stack_or_media.media(omega)
    e1, m1 = media.eps[0].real, media.mu[0].real
    e3, m3 = media.eps[2].real, media.mu[2].real
    if e3 >= 0:
        raise ValueError(f"cutoff needs a negative core permittivity, eps3={e3}")
    contrast = e3 * m3 - e1 * m1
    if contrast <= 0:
        raise ValueError("cutoff needs eps3 mu3 > eps1 mu1")
    return float(-2 * e1 / (e3 * np.sqrt(contrast)))


def surface_rate_pz_near(stack_or_media, omega=None, roots=None) -> float:
    """Near-light-line approximation of Gamma^p_sz; diverges as d3' approaches the cutoff."""
    media = _media(stack_or_media, omega).real_part()
    d_max = surface_cutoff_thickness(media)
    if roots is None:
        roots = find_surface_roots(media, pol="p")
    near = [r for r in roots if r.pol == "p" and r.cls == "surface_near"]
    if not near:
        return 0.0
    if media.d >= d_max:
        raise ValueError(f"d3'={media.d} is not below the cutoff {d_max}")
    gap = d_max - media.d
    if gap < 1e-12:
        raise ZeroDivisionError("d3' at the surface cutoff")
    eta3 = media.eta[2].real
    pref = 3 * np.pi * abs(media.mu[2].real) / 8
    return float(sum(pref * (r.k**2 - eta3) * (media.d - 2 * media.z0) ** 2 / gap for r in near))


def node_parity(media: Media, root: ModeRoot) -> int:
    """n in beta3 d3' - 2 phi32 = n pi at a symmetric guided p root (odd n: node at the centre)."""
    ctx = TransverseContext.at(media.real_part(), root.k)
    phi = em_core.guided_phase(ctx)
    theta = float(np.real(ctx.beta3)) * media.d - 2 * phi
    return int(round(theta / np.pi))


def root_census(stack: LayerStack, omega: float, d_values, pol: str = "p") -> list[int]:
    """Number of guided roots at each thickness."""
    return [len(find_guided_roots(stack.with_geometry(d, d / 2), omega, pol)) for d in d_values]


def fresnel_modulus_exceeds_one(media: Media, k_grid, tol: float = 1e-12) -> bool:
    """True if |r_32| > 1 anywhere on the grid (the precondition for surface guided modes)."""
    ctx = TransverseContext.at(media.real_part(), np.asarray(k_grid))
    return any(bool(np.any(np.abs(fresnel(pol, 3, 2, ctx)) > 1 + tol)) for pol in ("p", "s"))
