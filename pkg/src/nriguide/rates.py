"""Decay rates and the interference parameter of the V-type atom.

The two transition dipoles are e_{1,2} = (e_z +- i e_x)/sqrt(2), so each
transition sees half of Im G_zz and half of Im G_xx. With the vacuum
normalisation used throughout, Gamma_n = Gamma_x + Gamma_z = 1 in vacuum.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

CLASSES = ("radiation", "substrate", "guided", "surface")
POLS = ("p", "s")
COMPONENTS = ("x", "z")

NEGATIVE_TOL = 1e-9
KAPPA_OVERSHOOT = 1e-9


class RateError(ArithmeticError):
    pass


def dipole_projection_weights() -> dict[str, dict[str, float]]:
    """|e_n . e_c|^2 for both transitions and Cartesian components c."""
    e = {1: np.array([1j, 0, 1]) / np.sqrt(2), 2: np.array([-1j, 0, 1]) / np.sqrt(2)}
    axes = {"x": 0, "y": 1, "z": 2}
    return {f"e{n}": {c: float(abs(v[i]) ** 2) for c, i in axes.items()} for n, v in e.items()}


def empty_entries() -> dict[tuple[str, str, str], float]:
    return {(c, p, q): 0.0 for c in CLASSES for p in POLS for q in COMPONENTS}


@dataclass
class RateBreakdown:
    entries: dict[tuple[str, str, str], float]
    gamma_x: float
    gamma_z: float
    gamma_n: float
    kappa: float
    error_estimate: float = 0.0
    methods: dict[str, str] = field(default_factory=dict)
    comparison: dict[str, float] = field(default_factory=dict)
    converged: bool = True

    def by_class(self, cls: str) -> float:
        return sum(v for (c, _, _), v in self.entries.items() if c == cls)

    def component(self, cls: str, pol: str, comp: str) -> float:
        return self.entries[(cls, pol, comp)]

    def flat(self) -> dict[str, float]:
        """Column name -> value for CSV output."""
        row = {
            "Gr": self.by_class("radiation"),
            "Gsub": self.by_class("substrate"),
            "Gg": self.by_class("guided"),
            "Gs": self.by_class("surface"),
            "Gx": self.gamma_x,
            "Gz": self.gamma_z,
            "Gtot": self.gamma_n,
            "kappa": self.kappa,
        }
        for (c, p, q), v in self.entries.items():
            if p == "s" and q == "z":
                continue
            row[f"{c}_{p}{q}"] = v
        return row


def kappa_from(gamma_x: float, gamma_z: float) -> float:
    total = gamma_x + gamma_z
    if total == 0:
        raise RateError("total rate is zero; kappa undefined")
    kappa = (gamma_z - gamma_x) / total
    if abs(kappa) > 1:
        if abs(kappa) - 1 > KAPPA_OVERSHOOT:
            raise RateError(f"|kappa| = {abs(kappa)} exceeds 1; negative rate entries?")
        kappa = float(np.sign(kappa))
    return kappa


def assemble(entries: dict[tuple[str, str, str], float], error_estimate: float = 0.0,
             methods=None, comparison=None, converged: bool = True) -> RateBreakdown:
    """Sum raw class/polarization/component entries into Gamma_n and kappa."""
    full = empty_entries()
    for key, value in entries.items():
        if key not in full:
            raise KeyError(f"unknown breakdown entry {key}")
        value = float(value)
        if not np.isfinite(value):
            raise RateError(f"entry {key} is not finite")
        if value < -NEGATIVE_TOL:
            raise RateError(f"entry {key} = {value} is negative")
        full[key] = value
    gx = sum(v for (_, _, q), v in full.items() if q == "x")
    gz = sum(v for (_, _, q), v in full.items() if q == "z")
    return RateBreakdown(
        entries=full, gamma_x=gx, gamma_z=gz, gamma_n=gx + gz, kappa=kappa_from(gx, gz),
        error_estimate=error_estimate, methods=dict(methods or {}), comparison=dict(comparison or {}),
        converged=converged,
    )


def kappa_two_frequency(b1: RateBreakdown, b2: RateBreakdown) -> tuple[float, float]:
    """kappa_1, kappa_2 for non-degenerate transitions evaluated at their own frequencies.

    Experimental: the degenerate limit is the supported mode.
    """
    norm = np.sqrt(b1.gamma_n * b2.gamma_n)
    if norm == 0:
        raise RateError("zero rate; kappa undefined")
    return (b1.gamma_z - b1.gamma_x) / norm, (b2.gamma_z - b2.gamma_x) / norm
