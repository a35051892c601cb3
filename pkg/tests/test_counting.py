"""Counting queries, sparse convolution tensors, matricization norms."""

import numpy as np
import pytest

from torus_phi4 import (
    CountQuery,
    SparseTensor,
    build_tensor,
    count_set,
    fiber,
    matricization_norm,
    resonance_phase,
    tensor_norms,
    verify_tensor_bounds,
)
from torus_phi4.spectral import bracket


def _brute_count(q: CountQuery) -> int:
    i1, i2, i3 = q.signs

    def box(center, r):
        cx, cy = center
        return [
            (x, y)
            for x in range(cx - r, cx + r + 1)
            for y in range(cy - r, cy + r + 1)
        ]

    def br2(p):
        return 1 + p[0] ** 2 + p[1] ** 2

    total = 0
    for x in box(q.centers[0], q.radii[0]):
        for y in box(q.centers[1], q.radii[1]):
            for z in box(q.centers[2], q.radii[2]):
                lin = (
                    i1 * x[0] + i2 * y[0] + i3 * z[0],
                    i1 * x[1] + i2 * y[1] + i3 * z[1],
                )
                if lin != tuple(q.d):
                    continue
                if abs(i1 * br2(x) + i2 * br2(y) + i3 * br2(z) - q.alpha) > 1e-9:
                    continue
                if i1 == -i2 and x == y:
                    continue
                if i2 == -i3 and y == z:
                    continue
                if i1 == -i3 and x == z:
                    continue
                total += 1
    return total


def test_count_set_matches_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(12):
        signs = tuple(int(v) for v in rng.choice([-1, 1], 3))
        centers = tuple(tuple(int(v) for v in rng.integers(-3, 4, 2)) for _ in range(3))
        radii = (3, 2, 2)
        # admissible targets: pick a random solution and read off d, alpha
        pts = [
            tuple(int(c[k] + rng.integers(-r, r + 1)) for k in range(2))
            for c, r in zip(centers, radii)
        ]
        i1, i2, i3 = signs
        d = tuple(
            int(i1 * pts[0][k] + i2 * pts[1][k] + i3 * pts[2][k]) for k in range(2)
        )
        br2 = lambda p: 1 + p[0] ** 2 + p[1] ** 2
        alpha = float(i1 * br2(pts[0]) + i2 * br2(pts[1]) + i3 * br2(pts[2]))
        q = CountQuery(signs, d, alpha, centers, radii)
        assert count_set(q) == _brute_count(q)


def test_resonance_phase_definition():
    n, n1, n2, n3 = (1, 0), (2, 1), (1, 2), (0, 1)
    expect = (1) - (4 + 1) + (1 + 4) - (1)
    assert resonance_phase(n, n1, n2, n3) == expect


def test_build_tensor_support():
    t = build_tensor((1, 1, 1))
    assert t.nnz > 0
    # convolution plane and shell membership
    np.testing.assert_array_equal(t.n, t.n1 - t.n2 + t.n3)
    for arr in (t.n1, t.n2, t.n3):
        br = bracket(arr)
        assert np.all((br >= 1.0) & (br < 2.0))
    # pairing exclusions
    assert not np.any(np.all(t.n2 == t.n1, axis=1))
    assert not np.any(np.all(t.n2 == t.n3, axis=1))
    np.testing.assert_array_equal(t.levels, resonance_phase(t.n, t.n1, t.n2, t.n3))


def test_build_tensor_far_centers_empty():
    t = build_tensor((1, 1, 1), centers=((100, 100), (0, 0), (0, 0)), n_cap=2)
    assert t.nnz == 0
    assert tensor_norms(t)["norm1"] == 0.0


def test_fiber_restricts_levels():
    t = build_tensor((2, 2, 2))
    lv = int(t.levels[0])
    f = fiber(t, lv)
    assert f.nnz == int(np.sum(t.levels == lv))
    assert np.all(f.levels == lv)


def test_matricization_rank_one_rows():
    # rows {n}: column sums are 1 (n determined by the triple), so the
    # norm is sqrt(max row count)
    t = build_tensor((2, 2, 2))
    val = matricization_norm(t, ("n",))
    _, counts = np.unique(
        t.n[:, 0] * 1000 + t.n[:, 1], return_counts=True
    )
    assert val == pytest.approx(np.sqrt(counts.max()), rel=1e-6)


def test_matricization_duality():
    t = build_tensor((2, 1, 1))
    a = matricization_norm(t, ("n", "n1"))
    b = matricization_norm(t, ("n2", "n3"))
    assert a == pytest.approx(b, rel=1e-7)


def test_matricization_matches_dense_svd():
    for shells in ((1, 1, 1), (2, 2, 1)):
        t = build_tensor(shells)
        for rows in (("n",), ("n1",), ("n", "n1"), ("n", "n2"), ("n", "n3")):
            # certify=True raises if the iterative value disagrees with a
            # dense SVD beyond 1e-6
            matricization_norm(t, rows, certify=True)


def test_verify_tensor_bounds_smallest_sweep():
    rep = verify_tensor_bounds(shell_sweeps=(((1, 1, 1), (2, 2, 2)),))
    assert set(rep["trend_slopes"]) == {
        "ratio_norm1",
        "ratio_fiber1",
        "ratio_norm2",
        "ratio_fiber2",
    }
    for row in rep["rows"]:
        for key in ("ratio_norm1", "ratio_fiber1", "ratio_norm2", "ratio_fiber2"):
            assert row[key] > 0.0


def test_support_guard():
    with pytest.raises(ValueError):
        build_tensor((16, 16, 16))
