"""Linear propagators, stochastic flows, gauge transforms, and the
remainder integral equation.

Conventions.  The linear semigroup acts mode-wise as
exp(-(gamma*t + i*t') <n>^2) for t >= 0; with t' = t this is the
dissipative-dispersive propagator exp((gamma+i) t (Lap - 1)).  The
stochastic convolution solves the linear equation driven by
sqrt(2*gamma) times white noise truncated to the lattice, with the
exact mode-wise Ornstein-Uhlenbeck recursion

    Psi(t_{k+1}) = exp(-(gamma+i) h <n>^2) Psi(t_k) + eta_k,
    E|eta_k|^2 = (1 - exp(-2 gamma h <n>^2)) / <n>^2,

where eta_k is a deterministic per-mode rescaling of the driving-path
increment, so flows at different gamma driven by the same path are
coupled realization by realization.

The time integrator is Strang splitting with the exact linear/noise
step; the nonlinear substep is an exact pointwise phase rotation when
gamma = 0 (modulus preserving, hence mass conserving before projection)
and an explicit Euler update otherwise.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .gibbs import mode_variance_sum
from .noise import NoisePath
from .nonlinearity import mass, nonpairing_batch, renormalized_cubic, wick_cubic
from .spectral import FourierField, ModeLattice

__all__ = [
    "propagator",
    "stochastic_convolution",
    "linear_evolution",
    "DynamicsConfig",
    "Trajectory",
    "evolve",
    "extract_remainder",
    "gauge_phase",
    "apply_gauge",
    "duhamel",
    "PicardResult",
    "picard_remainder",
]

MASS_BLOWUP_LIMIT = 1e8


def propagator(u: FourierField, gamma: float, t: float, t_prime: float | None = None) -> FourierField:
    """Apply the mode multiplier exp(-(gamma*|t| + i*t') <n>^2)."""
    if t_prime is None:
        t_prime = t
    q = u.lattice.brackets**2
    mult = np.exp(-(gamma * abs(t) + 1j * t_prime) * q)
    return FourierField(u.lattice, u.coeffs * mult)


def _ou_factors(lattice: ModeLattice, gamma: float, h: float, n_trunc: float | None):
    """Per-mode decay factor and increment rescaling for one step of size h."""
    q = lattice.brackets**2
    decay = np.exp(-(gamma + 1j) * h * q)
    if gamma > 0.0:
        var = -np.expm1(-2.0 * gamma * h * q) / q  # (1 - e^{-2 gamma h q})/q
    else:
        var = np.zeros_like(q)
    scale = np.sqrt(var / h)  # driving increments have E|DB|^2 = h
    if n_trunc is not None:
        scale = np.where(lattice.brackets <= n_trunc + 1e-12, scale, 0.0)
    return decay, scale


def stochastic_convolution(
    path: NoisePath, gamma: float, n_trunc: float | None = None
) -> "Trajectory":
    """Exact sampling of the stochastic convolution along the path grid."""
    lat = path.lattice
    decay, scale = _ou_factors(lat, gamma, path.h, n_trunc)
    out = np.zeros((path.n_steps + 1, lat.n_modes), dtype=np.complex128)
    for k in range(path.n_steps):
        out[k + 1] = decay * out[k] + scale * path.increments[k]
    return Trajectory(lat, path.times, out, gamma, {"kind": "stochastic_convolution"})


def linear_evolution(
    phi: FourierField, path: NoisePath, gamma: float, n_trunc: float | None = None
) -> "Trajectory":
    """Propagated data plus stochastic convolution (the linear ansatz)."""
    lat = path.lattice
    decay, scale = _ou_factors(lat, gamma, path.h, n_trunc)
    out = np.empty((path.n_steps + 1, lat.n_modes), dtype=np.complex128)
    out[0] = phi.coeffs
    if n_trunc is not None:
        out[0] = np.where(lat.brackets <= n_trunc + 1e-12, out[0], 0.0)
    for k in range(path.n_steps):
        out[k + 1] = decay * out[k] + scale * path.increments[k]
    return Trajectory(lat, path.times, out, gamma, {"kind": "linear_evolution"})


@dataclass
class DynamicsConfig:
    gamma: float
    n_trunc: float
    renormalization: str = "dynamic"  # 'dynamic': subtract 2*mass(u); 'wick': 2*sigma
    sigma: float | None = None
    nonlinearity_on: bool = True
    noise_on: bool = True

    def resolved_sigma(self) -> float:
        if self.sigma is not None:
            return self.sigma
        return mode_variance_sum(self.n_trunc)


@dataclass
class Trajectory:
    lattice: ModeLattice
    times: np.ndarray
    coeffs: np.ndarray  # shape (n_snapshots, n_modes)
    gamma: float
    meta: dict = field(default_factory=dict)

    @property
    def n_snapshots(self) -> int:
        return self.coeffs.shape[0]

    @property
    def h(self) -> float:
        return float(self.times[1] - self.times[0])

    def snapshot(self, k: int) -> FourierField:
        return FourierField(self.lattice, self.coeffs[k].copy())

    def save(self, directory: str) -> None:
        os.makedirs(directory, exist_ok=True)
        np.save(os.path.join(directory, "coeffs.npy"), self.coeffs)
        manifest = {
            "n_cut": self.lattice.n_cut,
            "times": self.times.tolist(),
            "gamma": self.gamma,
            "meta": self.meta,
        }
        with open(os.path.join(directory, "manifest.json"), "w") as fh:
            json.dump(manifest, fh)

    @classmethod
    def load(cls, directory: str) -> "Trajectory":
        with open(os.path.join(directory, "manifest.json")) as fh:
            manifest = json.load(fh)
        coeffs = np.load(os.path.join(directory, "coeffs.npy"))
        return cls(
            ModeLattice(manifest["n_cut"]),
            np.asarray(manifest["times"]),
            coeffs,
            manifest["gamma"],
            manifest.get("meta", {}),
        )


def _nonlinear_substep(
    u: FourierField, cfg: DynamicsConfig, h: float, trunc_mask: np.ndarray
) -> FourierField:
    lat = u.lattice
    if cfg.gamma == 0.0:
        # exact flow of du/dt = -i (|u|^2 - 2m) u: pointwise phase rotation
        # (m is constant along the substep because |u(x)| is preserved)
        if cfg.renormalization == "wick":
            m = cfg.resolved_sigma()
        else:
            m = mass(u)
        w = u.to_physical()
        w = w * np.exp(-1j * h * (np.abs(w) ** 2 - 2.0 * m))
        out = FourierField.from_physical(lat, w)
    else:
        if cfg.renormalization == "wick":
            drift = wick_cubic(u, cfg.resolved_sigma())
        else:
            drift = renormalized_cubic(u)
        out = FourierField(lat, u.coeffs - h * (cfg.gamma + 1j) * drift.coeffs)
    out.coeffs *= trunc_mask
    return out


def evolve(phi: FourierField, path: NoisePath, cfg: DynamicsConfig) -> Trajectory:
    """Integrate the truncated renormalized flow along the driving path.

    One step of size h: exact linear half step, nonlinear substep of
    size h (then sharp truncation), exact linear half step, then the
    Ornstein-Uhlenbeck noise increment.  With the nonlinearity switched
    off this reproduces propagator + stochastic_convolution exactly.
    """
    lat = path.lattice
    h = path.h
    decay_half = np.exp(-(cfg.gamma + 1j) * (h / 2.0) * lat.brackets**2)
    _, scale = _ou_factors(lat, cfg.gamma, h, cfg.n_trunc)
    if not cfg.noise_on:
        scale = np.zeros_like(scale)
    trunc_mask = (lat.brackets <= cfg.n_trunc + 1e-12).astype(np.float64)

    out = np.empty((path.n_steps + 1, lat.n_modes), dtype=np.complex128)
    u = FourierField(lat, phi.coeffs * trunc_mask)
    out[0] = u.coeffs
    for k in range(path.n_steps):
        c = u.coeffs * decay_half
        if cfg.nonlinearity_on:
            u = _nonlinear_substep(FourierField(lat, c), cfg, h, trunc_mask)
            c = u.coeffs
        c = c * decay_half + scale * path.increments[k]
        if np.sum(np.abs(c) ** 2) > MASS_BLOWUP_LIMIT:
            raise RuntimeError(
                f"mass blow-up at step {k}: reduce the step size or the data"
            )
        u = FourierField(lat, c)
        out[k + 1] = c
    return Trajectory(
        lat,
        path.times,
        out,
        cfg.gamma,
        {"kind": "evolve", "renormalization": cfg.renormalization, "n_trunc": cfg.n_trunc},
    )


def extract_remainder(
    traj: Trajectory, phi: FourierField, path: NoisePath, n_trunc: float | None = None
) -> Trajectory:
    """Subtract the linear ansatz (propagated data + convolution) from a run."""
    lin = linear_evolution(phi, path, traj.gamma, n_trunc)
    return Trajectory(
        traj.lattice,
        traj.times,
        traj.coeffs - lin.coeffs,
        traj.gamma,
        {"kind": "remainder"},
    )


def gauge_phase(traj: Trajectory, n_trunc: float, sigma: float | None = None) -> np.ndarray:
    """Accumulated phase V(t) = integral of (mass(u(t')) - sigma) dt'.

    Trapezoid quadrature on the trajectory grid.  Along the Wick flow at
    gamma = 0 the mass is conserved, so V is exactly linear in t.
    """
    if sigma is None:
        sigma = mode_variance_sum(n_trunc)
    m = np.sum(np.abs(traj.coeffs) ** 2, axis=1) - sigma
    h = traj.h
    v = np.zeros(traj.n_snapshots)
    v[1:] = np.cumsum(0.5 * h * (m[1:] + m[:-1]))
    return v


def apply_gauge(
    traj: Trajectory, n_trunc: float, sigma: float | None = None, weight: float = 2.0
) -> Trajectory:
    """Multiply each snapshot by exp(i * weight * V(t)).

    With weight 2 this intertwines the gamma = 0 Wick flow with the
    dynamically renormalized flow: the Wick drift subtracts 2*sigma
    where the dynamic one subtracts 2*mass, and the mismatch
    2*(mass - sigma) is exactly the phase rate removed here.
    """
    v = gauge_phase(traj, n_trunc, sigma)
    factor = np.exp(1j * weight * v)[:, None]
    return Trajectory(
        traj.lattice,
        traj.times,
        traj.coeffs * factor,
        traj.gamma,
        {"kind": "gauged", "weight": weight},
    )


def _phi_weights(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """phi1(a) = (1-e^{-a})/a and phi2(a) = (a-1+e^{-a})/a^2, stable near 0."""
    a = np.asarray(a, dtype=np.complex128)
    small = np.abs(a) < 1e-2
    safe = np.where(small, 1.0, a)
    phi1 = (1.0 - np.exp(-safe)) / safe
    phi2 = (safe - 1.0 + np.exp(-safe)) / safe**2
    # series sum_k (-a)^k/(k+1)! and sum_k (-a)^k (k+1)/(k+2)!
    s1 = np.zeros_like(a)
    s2 = np.zeros_like(a)
    for k in range(7, -1, -1):
        s1 = s1 * (-a) + 1.0 / math.factorial(k + 1)
        s2 = s2 * (-a) + (k + 1.0) / math.factorial(k + 2)
    return np.where(small, s1, phi1), np.where(small, s2, phi2)


def duhamel(forcing: Trajectory, gamma: float | None = None) -> Trajectory:
    """Retarded integral I(t) = int_0^t exp(-(gamma+i)(t-s)<n>^2) F(s) ds.

    Mode-wise recursion with exponential-trapezoid weights (the forcing
    is interpolated linearly on each step, the kernel integrated
    exactly); second-order accurate and exact for constant forcing.
    """
    if gamma is None:
        gamma = forcing.gamma
    lat = forcing.lattice
    h = forcing.h
    a = (gamma + 1j) * h * lat.brackets**2
    decay = np.exp(-a)
    phi1, phi2 = _phi_weights(a)
    w_left = h * (phi1 - phi2)
    w_right = h * phi2
    out = np.zeros_like(forcing.coeffs)
    for k in range(forcing.n_snapshots - 1):
        out[k + 1] = decay * out[k] + w_left * forcing.coeffs[k] + w_right * forcing.coeffs[k + 1]
    return Trajectory(lat, forcing.times, out, gamma, {"kind": "duhamel"})


def _traj_field(lat: ModeLattice, c: np.ndarray) -> FourierField:
    return FourierField(lat, c)


@dataclass
class PicardResult:
    trajectory: Trajectory
    residuals: list
    contraction_ratios: list
    converged: bool


def picard_remainder(
    ansatz: Trajectory,
    n_trunc: float,
    gamma: float | None = None,
    max_iter: int = 12,
    tol: float = 1e-10,
) -> PicardResult:
    """Solve the remainder integral equation by Picard iteration.

    With b the linear ansatz and T/R the pairing-free and resonant
    trilinear forms, the fixed-point map is

      v -> -(gamma+i) P_trunc I[ T(v,v,v) + T(b,b,b) + 2 T(b,v,v)
             + T(v,b,v) + 2 T(v,b,b) + T(b,v,b) - R(b+v, b+v, b+v) ],

    where I is the retarded linear integral.  Iteration starts at v = 0;
    successive ell^2-in-time differences report the contraction factor.
    """
    if gamma is None:
        gamma = ansatz.gamma
    lat = ansatz.lattice
    K = ansatz.n_snapshots
    mask = (lat.brackets <= n_trunc + 1e-12).astype(np.float64)

    b = ansatz.coeffs * mask
    f_bbb = nonpairing_batch(lat, b, b, b)

    v = np.zeros_like(ansatz.coeffs)
    residuals: list = []
    ratios: list = []
    prev_diff = None
    converged = False
    for _ in range(max_iter):
        forcing = f_bbb.copy()
        forcing += nonpairing_batch(lat, v, v, v)
        forcing += 2.0 * nonpairing_batch(lat, b, v, v)
        forcing += nonpairing_batch(lat, v, b, v)
        forcing += 2.0 * nonpairing_batch(lat, v, b, b)
        forcing += nonpairing_batch(lat, b, v, b)
        s = b + v
        forcing -= s * np.conj(s) * s
        integrated = duhamel(
            Trajectory(lat, ansatz.times, forcing, gamma), gamma
        ).coeffs
        v_new = -(gamma + 1j) * integrated * mask
        diff = float(np.sqrt(np.mean(np.abs(v_new - v) ** 2)))
        residuals.append(diff)
        if prev_diff is not None and prev_diff > 0:
            ratios.append(diff / prev_diff)
        prev_diff = diff
        v = v_new
        if diff < tol:
            converged = True
            break
    traj = Trajectory(lat, ansatz.times, v, gamma, {"kind": "picard_remainder"})
    return PicardResult(traj, residuals, ratios, converged)
