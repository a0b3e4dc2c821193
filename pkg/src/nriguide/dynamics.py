"""Master equation of the V-type atom with cross-channel (SGC) terms.

Basis ordering is |1>, |2> (excited) and |3> (ground). The generator is

    d rho/dt = X + X^dagger,
    X = sum_n G_n (rho_nn A_33 - A_nn rho)
        + sqrt(G_1 G_2) sum_{n != m} k_n (A_mn rho - rho_nm A_33),

with A_ij = |i><j|. Under this form a lone excited population decays at
2 G_n, so a rate G_n taken from :mod:`nriguide.rates` (vacuum value 1)
gives a free-space population lifetime of 1/2.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12
TRACE_ABORT = 1e-6
POSITIVITY_TOL = 1e-8
HALVING_TOL = 1e-8
MAX_HALVINGS = 6


class TraceDriftError(ArithmeticError):
    pass


class StepSizeError(ValueError):
    pass


@dataclass(frozen=True)
class SGCParams:
    gamma1: float
    gamma2: float
    kappa1: float
    kappa2: float

    def __post_init__(self):
        if self.gamma1 < 0 or self.gamma2 < 0:
            raise ValueError("decay rates must be non-negative")
        if abs(self.kappa1) > 1 or abs(self.kappa2) > 1:
            raise ValueError("|kappa| must not exceed 1")

    @classmethod
    def degenerate(cls, gamma: float, kappa: float) -> "SGCParams":
        return cls(gamma, gamma, kappa, kappa)


@dataclass
class Trajectory:
    t: np.ndarray
    rho: np.ndarray
    dt: float
    min_eigenvalue: float

    @property
    def populations(self) -> np.ndarray:
        return np.real(np.einsum("tii->ti", self.rho))

    @property
    def coherence(self) -> np.ndarray:
        return self.rho[:, 0, 1]

    @property
    def excited(self) -> np.ndarray:
        p = self.populations
        return p[:, 0] + p[:, 1]


def basis_state(i: int) -> np.ndarray:
    """Density matrix |i><i| for i in {1, 2, 3}."""
    rho = np.zeros((3, 3), dtype=complex)
    rho[i - 1, i - 1] = 1.0
    return rho


def pure_state(amp1: complex, amp2: complex, amp3: complex = 0.0) -> np.ndarray:
    v = np.array([amp1, amp2, amp3], dtype=complex)
    v /= np.linalg.norm(v)
    return np.outer(v, v.conj())


def check_state(rho, tol: float = HERMITIAN_TOL) -> None:
    rho = np.asarray(rho)
    if rho.shape != (3, 3):
        raise ValueError(f"density matrix must be 3x3, got {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > 1e-9:
        raise ValueError(f"trace is {np.trace(rho)}, expected 1")
    if np.min(np.linalg.eigvalsh(rho)) < -POSITIVITY_TOL:
        raise ValueError("density matrix has a negative eigenvalue")


def rhs(rho: np.ndarray, params: SGCParams) -> np.ndarray:
    g = (params.gamma1, params.gamma2)
    kap = (params.kappa1, params.kappa2)
    s = np.sqrt(params.gamma1 * params.gamma2)
    x = np.zeros((3, 3), dtype=complex)
    for n in (0, 1):
        x[2, 2] += g[n] * rho[n, n]
        x[n, :] -= g[n] * rho[n, :]
    for n, m in ((0, 1), (1, 0)):
        x[m, :] += s * kap[n] * rho[n, :]
        x[2, 2] -= s * kap[n] * rho[n, m]
    return x + x.conj().T


def decay_matrix(params: SGCParams) -> np.ndarray:
    """Population decay matrix of the excited amplitudes, 2K with d c/dt = -K c.

    For kappa1 = kappa2 = kappa this is [[2G1, -2 s kappa], [-2 s kappa, 2G2]],
    s = sqrt(G1 G2).
    """
    s = np.sqrt(params.gamma1 * params.gamma2)
    k = np.array([[params.gamma1, -s * params.kappa2],
                  [-s * params.kappa1, params.gamma2]])
    return 2 * k


def dark_state(params: SGCParams) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvectors (columns) and eigenvalues of the excited-manifold decay matrix.

    The first column belongs to the slowest-decaying superposition; for
    |kappa| = 1 and G1 = G2 its eigenvalue is zero (trapping).
    """
    if params.gamma1 <= 0 or params.gamma2 <= 0:
        raise ValueError("dark-state analysis needs positive decay rates")
    m = decay_matrix(params)
    if params.kappa1 != params.kappa2:
        vals, vecs = np.linalg.eig(m)
        order = np.argsort(vals.real)
        return vecs[:, order], vals[order]
    vals, vecs = np.linalg.eigh(m)
    return vecs, vals


def _rk4_step(rho, params, dt):
    k1 = rhs(rho, params)
    k2 = rhs(rho + 0.5 * dt * k1, params)
    k3 = rhs(rho + 0.5 * dt * k2, params)
    k4 = rhs(rho + dt * k3, params)
    out = rho + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return 0.5 * (out + out.conj().T)


def max_step(params: SGCParams) -> float:
    scale = max(params.gamma1, params.gamma2)
    return np.inf if scale == 0 else 0.01 / scale


def _integrate(rho0, params, t_end, dt, samples):
    steps = int(round(t_end / dt))
    if steps < 1 or abs(steps * dt - t_end) > 1e-9 * max(t_end, 1.0):
        raise StepSizeError(f"t_end={t_end} is not a whole number of steps of dt={dt}")
    stride = max(1, steps // samples) if samples else 1
    rho = np.array(rho0, dtype=complex)
    ts, out = [0.0], [rho.copy()]
    min_eig = float(np.min(np.linalg.eigvalsh(rho)))
    for i in range(1, steps + 1):
        rho = _rk4_step(rho, params, dt)
        drift = abs(np.trace(rho).real - 1)
        if drift > TRACE_ABORT:
            raise TraceDriftError(f"trace drift {drift:.3g} after {i} steps (t={i * dt:g}, dt={dt:g})")
        if i % stride == 0 or i == steps:
            ts.append(i * dt)
            out.append(rho.copy())
            min_eig = min(min_eig, float(np.min(np.linalg.eigvalsh(rho))))
    if min_eig < -POSITIVITY_TOL:
        log.warning("density matrix lost positivity: min eigenvalue %.3g", min_eig)
    return Trajectory(t=np.array(ts), rho=np.array(out), dt=dt, min_eigenvalue=min_eig)


def evolve(rho0, params: SGCParams, t_end: float, dt: float, samples: int | None = 1000,
           check_halving: bool = True) -> Trajectory:
    """Fixed-step RK4 integration from ``rho0`` to ``t_end``.

    With ``check_halving`` the step is halved until the final populations
    change by less than 1e-8; the finer trajectory is returned.
    """
    check_state(rho0)
    if dt > max_step(params) * (1 + 1e-12):
        raise StepSizeError(f"dt={dt} exceeds 0.01/max(Gamma)={max_step(params):g}")
    traj = _integrate(rho0, params, t_end, dt, samples)
    if not check_halving:
        return traj
    for _ in range(MAX_HALVINGS):
        dt /= 2
        finer = _integrate(rho0, params, t_end, dt, samples)
        change = np.max(np.abs(finer.populations[-1] - traj.populations[-1]))
        traj = finer
        if change < HALVING_TOL:
            return traj
    raise StepSizeError(f"populations still change by {change:.3g} after {MAX_HALVINGS} halvings")


def trapped_populations(rho0, params: SGCParams) -> np.ndarray:
    """Long-time excited-state block reached from ``rho0`` (closed form).

    The excited amplitudes evolve with exp(-K t); only the null space of K
    survives.
    """
    m = decay_matrix(params) / 2
    vals, vecs = np.linalg.eig(m)
    inv = np.linalg.inv(vecs)
    keep = np.abs(vals) < 1e-12
    proj = vecs[:, keep] @ inv[keep, :]
    block = np.asarray(rho0, dtype=complex)[:2, :2]
    return proj @ block @ proj.conj().T


def initial_state(name: str, params: SGCParams | None = None) -> np.ndarray:
    """Named initial states: '1', '2', 'sym', 'antisym' (excited superpositions)."""
    if name in ("1", "2"):
        return basis_state(int(name))
    if name == "sym":
        return pure_state(1, 1)
    if name == "antisym":
        return pure_state(1, -1)
    if name == "dark" and params is not None:
        vecs, _ = dark_state(params)
        return pure_state(*vecs[:, 0])
    raise ValueError(f"unknown initial state {name!r}")
