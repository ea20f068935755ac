"""Tests for Pfaffian and quaternion determinant routines."""

import numpy as np
import pytest

from randinv.pfaffian import (
    assemble_blocks,
    pfaffian,
    qdet,
    qdet_cycle_expansion,
    self_dual_from_parts,
    z_inverse,
)


def pfaffian_4x4_oracle(a):
    """Cofactor expansion of a 4x4 Pfaffian."""
    return a[0, 1] * a[2, 3] - a[0, 2] * a[1, 3] + a[0, 3] * a[1, 2]


def random_skew(rng, n):
    m = rng.standard_normal((n, n))
    return m - m.T


def random_self_dual(rng, k):
    return self_dual_from_parts(
        rng.standard_normal((k, k)),
        rng.standard_normal((k, k)),
        rng.standard_normal((k, k)),
    )


def test_pfaffian_2x2():
    for a in (0.5, -3.0, 7.25):
        assert pfaffian(np.array([[0.0, a], [-a, 0.0]])) == a


def test_pfaffian_4x4_matches_cofactor_oracle():
    rng = np.random.default_rng(7)
    for _ in range(20):
        a = random_skew(rng, 4)
        assert np.isclose(pfaffian(a), pfaffian_4x4_oracle(a), rtol=1e-12)


def test_pfaffian_squares_to_determinant():
    rng = np.random.default_rng(11)
    for _ in range(10):
        a = random_skew(rng, 8)
        det = np.linalg.det(a)
        assert np.isclose(pfaffian(a) ** 2, det, rtol=1e-10)


def test_pfaffian_congruence_with_signed_permutation():
    rng = np.random.default_rng(13)
    for _ in range(10):
        a = random_skew(rng, 6)
        perm = rng.permutation(6)
        signs = rng.choice([-1.0, 1.0], size=6)
        p = np.zeros((6, 6))
        p[np.arange(6), perm] = signs
        assert np.isclose(
            pfaffian(p @ a @ p.T), np.linalg.det(p) * pfaffian(a), rtol=1e-9
        )


def test_pfaffian_rejects_bad_input():
    with pytest.raises(ValueError):
        pfaffian(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        pfaffian(np.ones((4, 4)))
    assert pfaffian(np.zeros((0, 0))) == 1.0
    assert pfaffian(np.zeros((4, 4))) == 0.0


def test_assemble_blocks_layout():
    blocks = np.arange(16.0).reshape(2, 2, 2, 2)
    dense = assemble_blocks(blocks)
    assert dense.shape == (4, 4)
    assert np.array_equal(dense[0:2, 0:2], blocks[0, 0])
    assert np.array_equal(dense[0:2, 2:4], blocks[0, 1])
    assert np.array_equal(dense[2:4, 0:2], blocks[1, 0])


def test_qdet_single_point_is_diagonal_entry():
    rng = np.random.default_rng(3)
    for _ in range(5):
        s = rng.standard_normal()
        blocks = np.array([[[[s, 0.0], [0.0, s]]]])
        assert np.isclose(qdet(blocks), s, rtol=1e-14)


def test_qdet_two_points_closed_form():
    rng = np.random.default_rng(5)
    for _ in range(10):
        blocks = random_self_dual(rng, 2)
        s_xx = blocks[0, 0, 0, 0]
        s_yy = blocks[1, 1, 0, 0]
        s_xy = blocks[0, 1, 0, 0]
        s_yx = blocks[1, 0, 0, 0]
        i_xy = blocks[0, 1, 0, 1]
        d_yx = blocks[1, 0, 1, 0]
        expect = s_xx * s_yy - s_xy * s_yx - i_xy * d_yx
        assert np.isclose(qdet(blocks), expect, rtol=1e-10, atol=1e-12)
        assert np.isclose(qdet_cycle_expansion(blocks), expect, rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_qdet_matches_cycle_expansion(k):
    rng = np.random.default_rng(100 + k)
    for _ in range(8):
        blocks = random_self_dual(rng, k)
        a = qdet(blocks)
        b = qdet_cycle_expansion(blocks)
        assert np.isclose(a, b, rtol=1e-10, atol=1e-12)


def test_cycle_expansion_size_guard():
    rng = np.random.default_rng(1)
    with pytest.raises(ValueError):
        qdet_cycle_expansion(random_self_dual(rng, 5))


def test_qdet_scalar_embedding_reduces_to_determinant():
    rng = np.random.default_rng(21)
    for k in (2, 3, 4):
        m = rng.standard_normal((k, k))
        s = 0.5 * (m + m.T)  # duality forces symmetry when I = D = 0
        blocks = self_dual_from_parts(s, np.zeros((k, k)), np.zeros((k, k)))
        assert np.isclose(qdet(blocks), np.linalg.det(s), rtol=1e-10, atol=1e-12)


def test_qdet_invariant_under_diagonal_rescaling():
    rng = np.random.default_rng(31)
    for k in (2, 3, 4):
        blocks = random_self_dual(rng, k)
        base = qdet(blocks)
        a = np.exp(rng.uniform(-1.0, 1.0, size=k))
        scaled = blocks.copy()
        for i in range(k):
            for j in range(k):
                scaled[i, j, 0, 0] *= a[i] / a[j]
                scaled[i, j, 1, 1] *= a[j] / a[i]
                scaled[i, j, 0, 1] *= a[i] * a[j]
                scaled[i, j, 1, 0] /= a[i] * a[j]
        assert np.isclose(qdet(scaled), base, rtol=1e-9)


def test_qdet_duality_enforcement():
    rng = np.random.default_rng(41)
    blocks = random_self_dual(rng, 2)
    clean = qdet(blocks)
    bumped = blocks.copy()
    bumped[0, 1, 0, 1] += 1e-7  # within soft tolerance: symmetrized away
    assert np.isclose(qdet(bumped), clean, rtol=1e-5)
    broken = blocks.copy()
    broken[0, 1, 0, 1] += 1.0
    with pytest.raises(ValueError):
        qdet(broken)


def test_z_inverse_shape():
    zi = z_inverse(3)
    z = -zi
    assert np.array_equal(z @ zi, np.eye(6))
