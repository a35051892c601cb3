"""Fourier-side representation of complex fields on the 2-torus.

Fields live on the square torus of side 2*pi and are stored by their
Fourier coefficients on the finite mode set { n in Z^2 : <n> <= n_cut },
where <n> = sqrt(1 + |n|^2) is the Japanese bracket.  Spatial averages
are normalized so that the mean of |u|^2 over the torus equals the sum
of |u_hat(n)|^2 (Plancherel with the normalized measure).

The attached physical grid has M >= 4*n_max + 1 points per direction, so
grid products of up to four lattice fields are alias-free on the retained
modes.  All transforms are exact up to floating point roundoff.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.fft import fft2, ifft2, next_fast_len

__all__ = [
    "bracket",
    "ModeLattice",
    "FourierField",
    "project_leq",
    "project_shell",
    "sobolev_norm",
    "sup_mode_norm",
    "save_snapshot",
    "load_snapshot",
]

FORMAT_VERSION = "torus-phi4/field-v1"


def bracket(n) -> np.ndarray:
    """Japanese bracket <n> = sqrt(1 + |n|^2) for points of Z^2.

    `n` is an integer array whose last axis has length 2; a scalar array
    (or float) is returned with that axis contracted.
    """
    n = np.asarray(n, dtype=np.float64)
    return np.sqrt(1.0 + np.sum(n * n, axis=-1))


class ModeLattice:
    """The retained mode set { n in Z^2 : <n> <= n_cut } with its FFT grid.

    Modes are stored in lexicographic order of (n_x, n_y), which fixes a
    deterministic coefficient layout used by every consumer (samplers,
    integrators, serialization).
    """

    def __init__(self, n_cut: float):
        if n_cut < 1.0:
            raise ValueError("n_cut must be >= 1 (the origin has <0> = 1)")
        self.n_cut = float(n_cut)
        r2 = self.n_cut**2 - 1.0  # |n|^2 <= n_cut^2 - 1
        n_max = int(np.floor(np.sqrt(max(r2, 0.0))))
        coords = np.arange(-n_max, n_max + 1)
        gx, gy = np.meshgrid(coords, coords, indexing="ij")
        pts = np.stack([gx.ravel(), gy.ravel()], axis=-1)
        keep = np.sum(pts * pts, axis=-1) <= r2 + 1e-9
        pts = pts[keep]
        order = np.lexsort((pts[:, 1], pts[:, 0]))
        self.modes = np.ascontiguousarray(pts[order])
        self.n_modes = self.modes.shape[0]
        self.n_max = n_max
        self.brackets = bracket(self.modes)
        self.M = next_fast_len(4 * n_max + 1, real=False)
        # lookup table: coordinates -> index into self.modes, -1 if absent
        side = 2 * n_max + 1
        tbl = np.full((side, side), -1, dtype=np.int64)
        tbl[self.modes[:, 0] + n_max, self.modes[:, 1] + n_max] = np.arange(
            self.n_modes
        )
        self._lookup = tbl

    def index_of(self, n) -> np.ndarray:
        """Indices of modes `n` (shape (...,2)); -1 where not retained."""
        n = np.asarray(n, dtype=np.int64)
        ix = n[..., 0] + self.n_max
        iy = n[..., 1] + self.n_max
        side = 2 * self.n_max + 1
        inside = (ix >= 0) & (ix < side) & (iy >= 0) & (iy < side)
        out = np.full(n.shape[:-1], -1, dtype=np.int64)
        out[inside] = self._lookup[ix[inside], iy[inside]]
        return out

    def contains(self, n) -> np.ndarray:
        return self.index_of(n) >= 0

    def grid_points(self) -> tuple[np.ndarray, np.ndarray]:
        """Physical grid coordinates x_j = 2*pi*j/M, as a meshgrid pair."""
        x = 2.0 * np.pi * np.arange(self.M) / self.M
        return np.meshgrid(x, x, indexing="ij")

    def embed(self, coeffs: np.ndarray) -> np.ndarray:
        """Scatter lattice coefficients into an M x M spectral array."""
        spec = np.zeros((self.M, self.M), dtype=np.complex128)
        spec[self.modes[:, 0] % self.M, self.modes[:, 1] % self.M] = coeffs
        return spec

    def extract(self, spec: np.ndarray) -> np.ndarray:
        """Gather retained-mode coefficients from an M x M spectral array."""
        return np.ascontiguousarray(
            spec[self.modes[:, 0] % self.M, self.modes[:, 1] % self.M]
        )

    def __eq__(self, other) -> bool:
        return isinstance(other, ModeLattice) and other.n_cut == self.n_cut

    def __repr__(self) -> str:
        return f"ModeLattice(n_cut={self.n_cut}, n_modes={self.n_modes}, M={self.M})"


@dataclass
class FourierField:
    """A complex field given by its coefficients on a ModeLattice."""

    lattice: ModeLattice
    coeffs: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.coeffs is None:
            self.coeffs = np.zeros(self.lattice.n_modes, dtype=np.complex128)
        else:
            self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
            if self.coeffs.shape != (self.lattice.n_modes,):
                raise ValueError("coefficient array does not match lattice")

    def copy(self) -> "FourierField":
        return FourierField(self.lattice, self.coeffs.copy())

    def to_physical(self) -> np.ndarray:
        """Evaluate u(x_j) = sum_n u_hat(n) e^{i n.x_j} on the M x M grid."""
        lat = self.lattice
        return ifft2(lat.embed(self.coeffs)) * lat.M**2

    @classmethod
    def from_physical(cls, lattice: ModeLattice, values: np.ndarray) -> "FourierField":
        """Project grid values onto the retained modes (exact for band-limited data)."""
        spec = fft2(values) / lattice.M**2
        return cls(lattice, lattice.extract(spec))

    def __add__(self, other: "FourierField") -> "FourierField":
        return FourierField(self.lattice, self.coeffs + other.coeffs)

    def __sub__(self, other: "FourierField") -> "FourierField":
        return FourierField(self.lattice, self.coeffs - other.coeffs)

    def __mul__(self, scalar) -> "FourierField":
        return FourierField(self.lattice, self.coeffs * scalar)

    __rmul__ = __mul__


def project_leq(u: FourierField, n_cut: float) -> FourierField:
    """Sharp projection onto modes with <n> <= n_cut (same lattice layout)."""
    mask = u.lattice.brackets <= n_cut + 1e-12
    return FourierField(u.lattice, np.where(mask, u.coeffs, 0.0))


def project_shell(u: FourierField, n_lo: float) -> FourierField:
    """Sharp projection onto the dyadic shell n_lo <= <n> < 2*n_lo."""
    b = u.lattice.brackets
    mask = (b >= n_lo - 1e-12) & (b < 2.0 * n_lo - 1e-12)
    return FourierField(u.lattice, np.where(mask, u.coeffs, 0.0))


def sobolev_norm(u: FourierField, s: float) -> float:
    """H^s norm: sqrt(sum <n>^{2s} |u_hat(n)|^2)."""
    w = u.lattice.brackets ** (2.0 * s)
    return float(np.sqrt(np.sum(w * np.abs(u.coeffs) ** 2)))


def sup_mode_norm(u: FourierField, s: float) -> float:
    """Weighted sup norm: max_n <n>^s |u_hat(n)|."""
    return float(np.max(u.lattice.brackets**s * np.abs(u.coeffs)))


def save_snapshot(u: FourierField, path: str, metadata: dict | None = None) -> None:
    """Write a field to JSON: lattice cutoff, mode list, re/im coefficient arrays."""
    payload = {
        "format": FORMAT_VERSION,
        "n_cut": u.lattice.n_cut,
        "modes": u.lattice.modes.tolist(),
        "re": u.coeffs.real.tolist(),
        "im": u.coeffs.imag.tolist(),
    }
    if metadata:
        payload["metadata"] = metadata
    with open(path, "w") as fh:
        json.dump(payload, fh)


def load_snapshot(path: str) -> tuple[FourierField, dict]:
    """Read a field snapshot written by save_snapshot; round-trips exactly."""
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("format") != FORMAT_VERSION:
        raise ValueError(f"unrecognized snapshot format in {path}")
    lat = ModeLattice(payload["n_cut"])
    modes = np.asarray(payload["modes"], dtype=np.int64)
    if modes.shape != lat.modes.shape or not np.array_equal(modes, lat.modes):
        raise ValueError("snapshot mode list does not match its stated cutoff")
    coeffs = np.asarray(payload["re"]) + 1j * np.asarray(payload["im"])
    return FourierField(lat, coeffs), payload.get("metadata", {})
