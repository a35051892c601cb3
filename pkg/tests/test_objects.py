"""Stochastic object bundles and regularity scans."""

import csv

import numpy as np
import pytest

from torus_phi4 import (
    ModeLattice,
    NoisePath,
    build_bundle,
    gamma_continuity,
    mode_variance_sum,
    nonpairing,
    regularity_scan,
    sample_gff,
    write_scan_csv,
)
from torus_phi4.spectral import FourierField


def test_build_bundle_consistency():
    lat = ModeLattice(2)
    rng = np.random.default_rng(0)
    phi = sample_gff(lat, rng)
    path = NoisePath.generate(lat, 0.5, 32, seed=1)
    bundle = build_bundle(phi, path, gamma=0.5)
    assert bundle.linear.coeffs.shape == (33, lat.n_modes)
    # cubic snapshots are the pairing-free trilinear of the linear ones
    k = 16
    u = FourierField(lat, bundle.linear.coeffs[k].copy())
    np.testing.assert_allclose(
        bundle.cubic.coeffs[k], nonpairing(u, u, u).coeffs, atol=1e-12
    )
    # the integrated cubic starts at zero and stays finite
    np.testing.assert_allclose(bundle.integrated_cubic.coeffs[0], 0.0, atol=1e-14)
    assert np.all(np.isfinite(bundle.integrated_cubic.coeffs))


def test_regularity_scan_linear_object_oracle():
    # the linear ansatz is stationary: E||.||_{H^s}^2 = sum <n>^{2s-2}
    scan = regularity_scan(
        n_cuts=(2, 4), s=0.0, gamma=0.5, horizon=0.5, ensemble=48, seed=3
    )
    for i, N in enumerate((2, 4)):
        target = mode_variance_sum(N)
        got = scan["linear"]["mean_sq"][i]
        se = scan["linear"]["se"][i]
        assert abs(got - target) < 4.5 * se


def test_regularity_scan_structure_and_csv(tmp_path):
    scan = regularity_scan(
        n_cuts=(2, 4), s=0.4, gamma=0.0, horizon=0.25, ensemble=4, seed=0
    )
    for name in ("linear", "cubic", "integrated_cubic"):
        block = scan[name]
        assert block["mean_sq"].shape == (2,)
        assert np.all(block["mean_sq"] > 0)
        assert np.isfinite(block["slope"])
    out = tmp_path / "scan.csv"
    write_scan_csv(scan, str(out))
    rows = list(csv.DictReader(open(out)))
    assert len(rows) == 6
    assert {r["object"] for r in rows} == {"linear", "cubic", "integrated_cubic"}


def test_gamma_continuity_monotone_gaps():
    rep = gamma_continuity(
        gammas=(0.05, 0.1, 0.2, 0.4),
        n_cut=4,
        horizon=0.25,
        n_steps=128,
        ensemble=8,
        seed=1,
    )
    d = rep["mean_dist"]
    assert np.all(d > 0)
    # distance from the smallest gamma grows with the gap
    assert d[0] < d[-1]
    assert np.isfinite(rep["holder_exponent"])
    assert rep["holder_exponent"] > 0
