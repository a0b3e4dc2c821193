"""Layer materials and the three-layer stack.

Frequencies are dimensionless multiples of a scaling frequency ``omega0``;
lengths are dimensionless multiples of ``c / omega`` at the evaluated
frequency.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np


class MaterialError(ValueError):
    pass


class StackOrderError(ValueError):
    """Raised when the layer indices violate Re(eta3) > Re(eta1) >= Re(eta2)."""


def _lorentz(omega_p: float, omega_t: float, gamma: float, omega: float) -> complex:
    if omega <= 0:
        raise MaterialError(f"frequency must be positive, got {omega}")
    if omega_p == omega_t:
        return 1.0 + 0j
    denom = omega_t**2 - omega**2 - 1j * omega * gamma
    if denom == 0:
        raise MaterialError(
            f"pole at resonance: omega={omega} equals omega_T={omega_t} with zero linewidth"
        )
    return 1.0 + (omega_p**2 - omega_t**2) / denom


@dataclass(frozen=True)
class MaterialModel:
    """Either a fixed (eps, mu) pair or a Drude-Lorentz electric/magnetic response."""

    kind: str = "fixed"
    eps: complex = 1.0 + 0j
    mu: complex = 1.0 + 0j
    omega_pe: float = 1.0
    omega_Te: float = 1.0
    gamma_e: float = 0.0
    omega_pm: float = 1.0
    omega_Tm: float = 1.0
    gamma_m: float = 0.0

    def __post_init__(self):
        if self.kind not in ("fixed", "drude_lorentz"):
            raise MaterialError(f"unknown material kind {self.kind!r}")
        if self.kind == "drude_lorentz":
            if self.gamma_e < 0 or self.gamma_m < 0:
                raise MaterialError("linewidths must be non-negative")
            if self.omega_Te <= 0 or self.omega_Tm <= 0:
                raise MaterialError("oscillator frequencies must be positive")
        else:
            object.__setattr__(self, "eps", complex(self.eps))
            object.__setattr__(self, "mu", complex(self.mu))

    @classmethod
    def fixed(cls, eps: complex, mu: complex = 1.0) -> "MaterialModel":
        return cls(kind="fixed", eps=complex(eps), mu=complex(mu))

    @classmethod
    def vacuum(cls) -> "MaterialModel":
        return cls.fixed(1.0, 1.0)

    @classmethod
    def drude_lorentz(cls, omega_pe, omega_Te, gamma_e, omega_pm, omega_Tm, gamma_m):
        return cls(
            kind="drude_lorentz",
            omega_pe=float(omega_pe), omega_Te=float(omega_Te), gamma_e=float(gamma_e),
            omega_pm=float(omega_pm), omega_Tm=float(omega_Tm), gamma_m=float(gamma_m),
        )

    @property
    def absorption(self) -> float:
        """Largest linewidth; for fixed media the largest imaginary part of eps or mu."""
        if self.kind == "drude_lorentz":
            return max(self.gamma_e, self.gamma_m)
        return max(abs(self.eps.imag), abs(self.mu.imag))

    def with_absorption(self, gamma: float) -> "MaterialModel":
        if self.kind != "drude_lorentz":
            raise MaterialError("absorption can only be swept on Drude-Lorentz media")
        return _replace(self, gamma_e=float(gamma), gamma_m=float(gamma))

    def lossless(self) -> "MaterialModel":
        """Same model with the linewidths set to zero (real-part kernel)."""
        if self.kind == "drude_lorentz":
            return _replace(self, gamma_e=0.0, gamma_m=0.0)
        return MaterialModel.fixed(self.eps.real, self.mu.real)

    def to_dict(self) -> dict[str, Any]:
        if self.kind == "fixed":
            return {
                "kind": "fixed",
                "eps": [self.eps.real, self.eps.imag],
                "mu": [self.mu.real, self.mu.imag],
            }
        return {
            "kind": "drude_lorentz",
            "omega_pe": self.omega_pe, "omega_Te": self.omega_Te, "gamma_e": self.gamma_e,
            "omega_pm": self.omega_pm, "omega_Tm": self.omega_Tm, "gamma_m": self.gamma_m,
        }


def _replace(model: MaterialModel, **changes) -> MaterialModel:
    from dataclasses import replace
    return replace(model, **changes)


def permittivity(model: MaterialModel, omega: float) -> complex:
    if model.kind == "fixed":
        return model.eps
    return _lorentz(model.omega_pe, model.omega_Te, model.gamma_e, omega)


def permeability(model: MaterialModel, omega: float) -> complex:
    if model.kind == "fixed":
        return model.mu
    return _lorentz(model.omega_pm, model.omega_Tm, model.gamma_m, omega)


def eta(model: MaterialModel, omega: float) -> complex:
    return permittivity(model, omega) * permeability(model, omega)


def is_left_handed(eps: complex, mu: complex) -> bool:
    return eps.real < 0 and mu.real < 0


@dataclass(frozen=True)
class LayerStack:
    """Lower cladding (1), upper cladding (2) and middle layer (3) holding the atom."""

    layer1: MaterialModel
    layer2: MaterialModel
    layer3: MaterialModel
    d3_prime: float
    z0_prime: float

    def __post_init__(self):
        if not self.d3_prime > 0:
            raise MaterialError(f"d3_prime must be positive, got {self.d3_prime}")
        if not 0 < self.z0_prime < self.d3_prime:
            raise MaterialError(
                f"atom must sit inside the middle layer: 0 < z0'={self.z0_prime} < d3'={self.d3_prime}"
            )

    @property
    def layers(self) -> tuple[MaterialModel, MaterialModel, MaterialModel]:
        return (self.layer1, self.layer2, self.layer3)

    @property
    def absorption(self) -> float:
        return self.layer3.absorption

    def media(self, omega: float) -> "Media":
        eps = np.array([permittivity(m, omega) for m in self.layers], dtype=complex)
        mu = np.array([permeability(m, omega) for m in self.layers], dtype=complex)
        return Media(eps=eps, mu=mu, d=float(self.d3_prime), z0=float(self.z0_prime))

    def with_geometry(self, d3_prime: float | None = None, z0_prime: float | None = None):
        from dataclasses import replace
        changes = {}
        if d3_prime is not None:
            changes["d3_prime"] = float(d3_prime)
        if z0_prime is not None:
            changes["z0_prime"] = float(z0_prime)
        return replace(self, **changes)

    def with_middle(self, layer3: MaterialModel) -> "LayerStack":
        from dataclasses import replace
        return replace(self, layer3=layer3)

    def lossless(self) -> "LayerStack":
        return self.with_middle(self.layer3.lossless())

    def is_symmetric(self, omega: float, tol: float = 1e-12) -> bool:
        m = self.media(omega)
        return abs(m.eps[0] - m.eps[1]) <= tol and abs(m.mu[0] - m.mu[1]) <= tol


@dataclass(frozen=True)
class Media:
    """Material constants of the three layers at one frequency.

    Index 0 is the lower cladding, 1 the upper cladding and 2 the middle layer,
    so ``eps[j - 1]`` is the permittivity of layer ``j``.
    """

    eps: np.ndarray
    mu: np.ndarray
    d: float
    z0: float
    eta: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "eta", self.eps * self.mu)

    @property
    def symmetric(self) -> bool:
        return self.eps[0] == self.eps[1] and self.mu[0] == self.mu[1]

    def left_handed(self, j: int) -> bool:
        return is_left_handed(self.eps[j - 1], self.mu[j - 1])

    def real_part(self) -> "Media":
        return Media(eps=self.eps.real + 0j, mu=self.mu.real + 0j, d=self.d, z0=self.z0)


@dataclass
class StackReport:
    eta1: complex
    eta2: complex
    eta3: complex
    core_above_lower: bool
    lower_above_upper: bool

    @property
    def ok(self) -> bool:
        return self.core_above_lower and self.lower_above_upper

    @property
    def violations(self) -> list[str]:
        out = []
        if not self.core_above_lower:
            out.append(f"Re(eta3)={self.eta3.real:.6g} > Re(eta1)={self.eta1.real:.6g} fails")
        if not self.lower_above_upper:
            out.append(f"Re(eta1)={self.eta1.real:.6g} >= Re(eta2)={self.eta2.real:.6g} fails")
        return out


def validate_stack(stack: LayerStack, omega: float, strict: bool = False) -> StackReport:
    """Check the index ordering the mode classification relies on.

    With ``strict`` a violation raises :class:`StackOrderError`.
    """
    e1, e2, e3 = (eta(m, omega) for m in stack.layers)
    report = StackReport(
        eta1=e1, eta2=e2, eta3=e3,
        core_above_lower=e3.real > e1.real,
        lower_above_upper=e1.real >= e2.real,
    )
    if strict and not report.ok:
        raise StackOrderError("; ".join(report.violations))
    return report


def material_from_dict(raw: dict[str, Any]) -> MaterialModel:
    kind = raw.get("kind")
    if kind == "fixed":
        return MaterialModel.fixed(_as_complex(raw.get("eps", 1.0)), _as_complex(raw.get("mu", 1.0)))
    if kind == "drude_lorentz":
        keys = ("omega_pe", "omega_Te", "gamma_e", "omega_pm", "omega_Tm", "gamma_m")
        missing = [k for k in keys if k not in raw]
        if missing:
            raise MaterialError(f"drude_lorentz material missing {', '.join(missing)}")
        return MaterialModel.drude_lorentz(*(float(raw[k]) for k in keys))
    raise MaterialError(f"unknown material kind {kind!r}")


def _as_complex(value) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise MaterialError(f"complex values are [re, im] pairs, got {value!r}")
        return complex(float(value[0]), float(value[1]))
    return complex(value)
