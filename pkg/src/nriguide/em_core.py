"""Transverse wavenumbers, Fresnel coefficients and waveguide denominators.

Everything here is a pure function of the layer constants (:class:`Media`)
and the in-plane wavenumber ``k``; ``k`` may be a scalar or a numpy array and
every function broadcasts over it. ``k`` and the returned transverse
wavenumbers are in units of ``omega / c``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .materials import Media

POLARIZATIONS = ("p", "s")

# Unimodularity tolerance of r32 inside the lossless guided interval.
UNIMODULAR_TOL = 1e-6


class KernelError(ArithmeticError):
    pass


def beta(j: int, k, media: Media):
    """z-component of the wavevector in layer ``j`` (1, 2 or 3).

    Propagating waves take the principal root, negated for left-handed layers;
    evanescent waves take ``i*sqrt(k^2 - eta)``. Claddings are forced onto
    ``Im(beta) >= 0`` so fields stay bounded away from the core.
    """
    k = np.asarray(k, dtype=complex)
    eta = media.eta[j - 1]
    k2 = k * k
    propagating = k2.real < eta.real
    sign = -1.0 if media.left_handed(j) else 1.0
    out = np.where(propagating, sign * np.sqrt(eta - k2), 1j * np.sqrt(k2 - eta))
    if j in (1, 2):
        out = np.where(out.imag < 0, -out, out)
    return out if out.ndim else out[()]


@dataclass
class TransverseContext:
    k: np.ndarray
    beta1: np.ndarray
    beta2: np.ndarray
    beta3: np.ndarray
    media: Media

    @classmethod
    def at(cls, media: Media, k) -> "TransverseContext":
        k = np.asarray(k, dtype=complex)
        return cls(k=k, beta1=beta(1, k, media), beta2=beta(2, k, media),
                   beta3=beta(3, k, media), media=media)

    def beta_of(self, j: int):
        return (self.beta1, self.beta2, self.beta3)[j - 1]

    def weights(self, pol: str):
        if pol == "p":
            return self.media.eps
        if pol == "s":
            return self.media.mu
        raise ValueError(f"polarization must be 'p' or 's', got {pol!r}")


def fresnel(pol: str, i: int, j: int, ctx: TransverseContext):
    """Reflection coefficient r^q_ij for a wave in layer ``i`` hitting layer ``j``."""
    w = ctx.weights(pol)
    bi, bj = ctx.beta_of(i), ctx.beta_of(j)
    num = w[j - 1] * bi - w[i - 1] * bj
    den = w[j - 1] * bi + w[i - 1] * bj
    if np.any(den == 0):
        raise KernelError(f"Fresnel pole r^{pol}_{i}{j}: denominator vanishes")
    return num / den


def _fresnel_dk(pol: str, i: int, j: int, ctx: TransverseContext):
    w = ctx.weights(pol)
    m = ctx.media
    bi, bj = ctx.beta_of(i), ctx.beta_of(j)
    den = w[j - 1] * bi + w[i - 1] * bj
    return 2 * w[i - 1] * w[j - 1] * ctx.k * (m.eta[i - 1] - m.eta[j - 1]) / (bi * bj * den**2)


def d_factor(pol: str, ctx: TransverseContext, d3_prime: float | None = None):
    """Waveguide denominator D_q3 = 1 - r31 r32 exp(2 i beta3 d3')."""
    d = ctx.media.d if d3_prime is None else d3_prime
    return 1 - fresnel(pol, 3, 1, ctx) * fresnel(pol, 3, 2, ctx) * np.exp(2j * ctx.beta3 * d)


def d_factor_dk(pol: str, ctx: TransverseContext, d3_prime: float | None = None):
    """Analytic derivative of D_q3 with respect to k."""
    d = ctx.media.d if d3_prime is None else d3_prime
    r31, r32 = fresnel(pol, 3, 1, ctx), fresnel(pol, 3, 2, ctx)
    dr31, dr32 = _fresnel_dk(pol, 3, 1, ctx), _fresnel_dk(pol, 3, 2, ctx)
    e = np.exp(2j * ctx.beta3 * d)
    de = -2j * d * ctx.k / ctx.beta3 * e
    return -(dr31 * r32 * e + r31 * dr32 * e + r31 * r32 * de)


def i_factors(pol: str, ctx: TransverseContext, z0_prime: float | None = None,
              d3_prime: float | None = None):
    """Standing-wave factors (I_plus, I_minus) at the atom position."""
    d = ctx.media.d if d3_prime is None else d3_prime
    z0 = ctx.media.z0 if z0_prime is None else z0_prime
    a = fresnel(pol, 3, 1, ctx) * np.exp(2j * ctx.beta3 * z0)
    b = fresnel(pol, 3, 2, ctx) * np.exp(2j * ctx.beta3 * (d - z0))
    return (1 + a) * (1 + b), (1 - a) * (1 - b)


def guided_phase(ctx: TransverseContext, fold: str = "pi", tol: float = UNIMODULAR_TOL):
    """Phase phi with r^p_32 = exp(-2 i phi).

    ``fold="pi"`` reduces phi modulo pi into [0, pi), which keeps r32 intact;
    ``fold="half_pi"`` reduces modulo pi/2 into [0, pi/2].
    """
    r = np.asarray(fresnel("p", 3, 2, ctx))
    if np.any(np.abs(np.abs(r) - 1) > tol):
        raise KernelError(f"|r^p_32| = {np.abs(r)} is not unimodular; k outside the guided region?")
    phi = -np.angle(r) / 2
    period = np.pi if fold == "pi" else np.pi / 2
    phi = np.mod(phi, period)
    return phi if phi.ndim else float(phi)


def surface_phase(ctx: TransverseContext, tol: float = 1e-9):
    """Phase phi_sp >= 0 with r^p_32 = -exp(2 phi_sp)."""
    r = np.asarray(fresnel("p", 3, 2, ctx))
    if np.any(np.abs(r.imag) > tol * np.maximum(1, np.abs(r))) or np.any(r.real > -1 + tol):
        raise KernelError(f"r^p_32 = {r} is not real and <= -1")
    phi = np.log(np.maximum(-r.real, 1.0)) / 2
    return phi if phi.ndim else float(phi)


def chi(i: int, ctx: TransverseContext):
    """Goos-Haenchen weight (eta3 - eta_i) / (eps_i^2 beta3^2 + eps3^2 beta_i^2)."""
    m = ctx.media
    den = m.eps[i - 1] ** 2 * ctx.beta3**2 + m.eps[2] ** 2 * ctx.beta_of(i) ** 2
    if np.any(den == 0):
        raise KernelError(f"chi_{i} diverges: mode-birth point beta_{i} -> 0")
    return (m.eta[2] - m.eta[i - 1]) / den


def evaluate(media: Media, k: float, pol: str) -> dict:
    """All kernel quantities at a single k, as plain JSON-friendly values."""
    ctx = TransverseContext.at(media, k)
    ip, im = i_factors(pol, ctx)

    def c(z):
        z = complex(z)
        return [z.real, z.imag]

    return {
        "k": float(np.real(k)),
        "pol": pol,
        "eta": [c(e) for e in media.eta],
        "beta": [c(ctx.beta1), c(ctx.beta2), c(ctx.beta3)],
        "r31": c(fresnel(pol, 3, 1, ctx)),
        "r32": c(fresnel(pol, 3, 2, ctx)),
        "D": c(d_factor(pol, ctx)),
        "dD_dk": c(d_factor_dk(pol, ctx)),
        "I_plus": c(ip),
        "I_minus": c(im),
    }
