"""Mode-wise complex Brownian driving paths on a uniform time grid.

A NoisePath stores, for every retained mode n and time step k, the
increment DB_n(k) of an independent standard complex Brownian motion
(E|DB|^2 = h, E[DB^2] = 0).  Paths are reproducible from a seed and can
be refined: halving the step draws the missing midpoints by a Brownian
bridge from a deterministic child stream, so the summed fine increments
reproduce the coarse ones exactly and coarse/fine runs stay coupled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import ModeLattice

__all__ = ["NoisePath"]


@dataclass
class NoisePath:
    lattice: ModeLattice
    horizon: float
    increments: np.ndarray  # shape (n_steps, n_modes), complex
    seed: int
    level: int = 0

    @property
    def n_steps(self) -> int:
        return self.increments.shape[0]

    @property
    def h(self) -> float:
        return self.horizon / self.n_steps

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.n_steps + 1)

    @classmethod
    def generate(
        cls, lattice: ModeLattice, horizon: float, n_steps: int, seed: int
    ) -> "NoisePath":
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0]))
        h = horizon / n_steps
        z = rng.standard_normal((n_steps, lattice.n_modes, 2))
        inc = np.sqrt(h / 2.0) * (z[..., 0] + 1j * z[..., 1])
        return cls(lattice, horizon, inc, int(seed), 0)

    def refine(self) -> "NoisePath":
        """Halve the step; pairwise sums of the result equal this path."""
        rng = np.random.default_rng(
            np.random.SeedSequence([self.seed, self.level + 1])
        )
        K, nm = self.increments.shape
        h = self.h
        z = rng.standard_normal((K, nm, 2))
        # first half of each coarse increment, conditioned on the total:
        # mean c/2, complex variance h/4
        bump = np.sqrt(h / 8.0) * (z[..., 0] + 1j * z[..., 1])
        first = 0.5 * self.increments + bump
        second = self.increments - first
        fine = np.empty((2 * K, nm), dtype=np.complex128)
        fine[0::2] = first
        fine[1::2] = second
        return NoisePath(self.lattice, self.horizon, fine, self.seed, self.level + 1)

    def refined_to(self, n_steps: int) -> "NoisePath":
        """Refine repeatedly until the path has n_steps steps."""
        path = self
        while path.n_steps < n_steps:
            path = path.refine()
        if path.n_steps != n_steps:
            raise ValueError("n_steps must be base steps times a power of two")
        return path

    def totals(self) -> np.ndarray:
        """B_n(horizon): the summed increments per mode."""
        return self.increments.sum(axis=0)
