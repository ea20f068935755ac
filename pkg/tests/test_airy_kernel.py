"""Soft-edge matrix kernel: entries, correlations, interpolating law."""

import math

import numpy as np
import pytest

from randinv.airy_kernel import (
    ScaledWindow,
    SoftEdgeParams,
    d_entry_halfline_form,
    d_entry_regularized_form,
    i_entry_form,
    joint_distribution,
    kernel_block_soft,
    rho_k_soft,
    s_entry_halfline_form,
    s_entry_regularized_form,
    soft_edge_kernel,
    soft_edge_kernel_ratio_form,
    tail_bound_check,
    weighted_airy_integral,
)
from randinv.bessel_kernel import PoissonParams, kernel_block_poisson


def test_soft_edge_kernel_values():
    # high-precision quadrature of the defining integral, 20 digits
    assert abs(soft_edge_kernel(0.0, 0.0) - 0.066987483779663974144) < 1e-11
    assert abs(soft_edge_kernel(1.0, 2.5) - 0.00069920310510536560843) < 1e-11
    assert abs(soft_edge_kernel(-3.0, 0.5) - (-0.0035177932976885964987)) < 1e-11
    assert abs(soft_edge_kernel(-10.0, -10.0) - 1.0087376109101380844) < 1e-10
    assert soft_edge_kernel(8.0, 0.0) < 1e-6


def test_soft_edge_kernel_symmetry_and_forms():
    a = soft_edge_kernel(1.0, 2.5)
    b = soft_edge_kernel(2.5, 1.0)
    assert abs(a - b) < 1e-12
    assert abs(soft_edge_kernel_ratio_form(1.0, 2.5) - a) < 1e-10
    with pytest.raises(ValueError):
        soft_edge_kernel_ratio_form(1.3, 1.3)
    with pytest.raises(ValueError):
        soft_edge_kernel(-10.5, 0.0)


def test_weighted_airy_integral_values():
    assert abs(weighted_airy_integral(0.0, -1.0) - 0.51599888484903524485) < 1e-11
    assert abs(weighted_airy_integral(-2.0, -4.0) - (-0.0199503169042126789)) < 1e-11
    assert abs(weighted_airy_integral(1.0, 2.0) - 1.8894357841694338603) < 1e-11


def test_weighted_airy_integral_branches_agree():
    # both branches are defined on -6 <= u <= 0; they share no quadrature
    for u in (-1.0, -4.0):
        for x in (-1.5, 0.3, 2.0):
            a = weighted_airy_integral(x, u, regularized=True)
            b = weighted_airy_integral(x, u, regularized=False)
            assert abs(a - b) < 1e-9
    # u = 0 reduces to the plain Airy tail complement on either branch
    got = weighted_airy_integral(1.0, 0.0)
    assert abs(got - (1.0 - 0.097015991416223553731)) < 1e-12


def test_weighted_airy_integral_guards():
    with pytest.raises(ValueError):
        weighted_airy_integral(0.0, 1.0, regularized=False)
    with pytest.raises(ValueError):
        weighted_airy_integral(0.0, -7.0, regularized=True)


def test_diagonal_entry_values():
    # wall-free point matches the rank-one corrected Airy kernel
    assert abs(s_entry_regularized_form(0.0, 0.0, 0.0) - 0.18533016840893638723) < 1e-9
    # half-line march branch, u <= -1
    assert abs(s_entry_halfline_form(0.0, 1.0, -2.0) - 0.028734132525928555634) < 1e-9
    assert abs(s_entry_halfline_form(-1.0, 0.5, -1.0) - 0.09645810739764500517) < 1e-9
    assert abs(s_entry_halfline_form(0.3, -0.7, -4.0) - 0.01209511312153887526) < 1e-9
    assert abs(s_entry_halfline_form(1.0, 1.0, -2.0) - 0.01233117428829668537) < 1e-9
    assert abs(s_entry_halfline_form(1.0, 0.0, -2.0) - 0.024493634305908550873) < 1e-9
    # u > 0 exists only through the subtracted form
    assert abs(s_entry_regularized_form(1.0, 0.0, 1.0) - 0.41493050779928717392) < 1e-9
    assert abs(s_entry_regularized_form(0.5, -0.5, 2.0) - 0.60595744301466103281) < 1e-9


def test_diagonal_entry_dual_forms_agree():
    # documented agreement tolerance for the two independent reductions
    for u in (-1.0, -4.0):
        for x in np.linspace(-2.0, 2.0, 5):
            for y in np.linspace(-2.0, 2.0, 5):
                a = s_entry_halfline_form(x, y, u)
                b = s_entry_regularized_form(x, y, u)
                assert abs(a - b) < 1e-7


def test_antisymmetric_corner_values():
    assert abs(d_entry_halfline_form(0.0, 1.0, -1.0) - 0.52518737653976319972) < 1e-9
    assert abs(d_entry_halfline_form(0.0, 1.0, -2.0) - 0.33790886948316253741) < 1e-9
    assert abs(d_entry_halfline_form(1.0, 0.0, -2.0) - (-0.33790886948316253741)) < 1e-9
    assert abs(d_entry_halfline_form(0.0, 1.0, 0.0) - 0.75990783926837703321) < 1e-9
    assert abs(d_entry_regularized_form(0.0, 1.0, -0.5) - 0.63978037528195354544) < 1e-9
    assert abs(d_entry_regularized_form(0.0, 1.0, -0.25) - 0.69989466022322110526) < 1e-9
    assert abs(d_entry_regularized_form(0.0, 1.0, 1.0) - 0.94865424249063168386) < 1e-9

    assert abs(i_entry_form(0.0, 1.0, -2.0) - 0.0057629028726382654244) < 1e-9
    assert abs(i_entry_form(0.0, 1.0, -1.0) - 0.0037233651604426959999) < 1e-9
    assert abs(i_entry_form(1.0, 0.0, -2.0) - (-0.0057629028726382654244)) < 1e-9
    assert abs(i_entry_form(0.0, 1.0, 1.0) - 0.0010598467914940023455) < 1e-9


def test_corner_antisymmetry():
    for x, y, u in [(0.0, 1.0, -2.0), (-1.2, 0.7, -1.0), (0.5, 1.5, -3.0)]:
        assert abs(i_entry_form(x, y, u) + i_entry_form(y, x, u)) < 1e-9
        assert abs(
            d_entry_halfline_form(x, y, u) + d_entry_halfline_form(y, x, u)
        ) < 1e-9
    # the jump term carries sgn(x - y), which vanishes on the diagonal
    assert d_entry_halfline_form(0.4, 0.4, 0.0) == 0.0
    assert abs(d_entry_halfline_form(-0.8, -0.8, -2.0)) < 1e-12


def test_wall_strength_continuity_at_zero():
    # the two stability branches meet continuously at u = 0
    eps = 1e-7
    s0 = s_entry_regularized_form(0.3, -0.2, 0.0)
    assert abs(s_entry_regularized_form(0.3, -0.2, -eps) - s0) < 1e-6
    d0 = d_entry_halfline_form(0.0, 1.0, 0.0)
    assert abs(d_entry_regularized_form(0.0, 1.0, -eps) - d0) < 1e-6
    assert abs(d_entry_regularized_form(0.0, 1.0, 0.0) - d0) < 1e-9


def test_kernel_block_self_duality():
    p = SoftEdgeParams(-2.0)
    for x, y in [(0.0, 1.0), (-1.5, 0.5), (0.7, 2.0)]:
        blk = kernel_block_soft(x, y, p)
        swp = kernel_block_soft(y, x, p)
        assert abs(blk.s_xy - swp.s_yx) < 1e-10
        assert abs(blk.i_xy + swp.i_xy) < 1e-10
        assert abs(blk.d_xy + swp.d_xy) < 1e-10
    # block orientation: the (1,1) entry at (x, y) is the scalar entry at (y, x)
    blk = kernel_block_soft(0.0, 1.0, p)
    assert abs(blk.s_xy - 0.024493634305908550873) < 1e-9
    assert abs(blk.s_yx - 0.028734132525928555634) < 1e-9
    assert abs(blk.i_xy - 0.0057629028726382654244) < 1e-9
    assert abs(blk.d_xy - 0.33790886948316253741) < 1e-9


def test_parameter_guards():
    assert SoftEdgeParams(-2.0).w == 0.5
    with pytest.raises(ValueError):
        SoftEdgeParams(float("nan"))
    with pytest.raises(ValueError):
        kernel_block_soft(0.0, 1.0, SoftEdgeParams(9.5))
    with pytest.raises(ValueError):
        kernel_block_soft(-12.5, 0.0, SoftEdgeParams(-1.0))


def test_scaled_window_validation():
    sw = ScaledWindow(s=(0.0, -1.0))
    assert sw.cutoff == 12.0
    with pytest.raises(ValueError):
        ScaledWindow(s=(-1.0, 0.0))
    with pytest.raises(ValueError):
        ScaledWindow(s=(0.0,), cutoff=4.0)
    with pytest.raises(ValueError):
        ScaledWindow(s=(-13.0,))
    with pytest.raises(ValueError):
        ScaledWindow(s=(0.0,), nodes=3)


def test_rho_k_basics():
    p = SoftEdgeParams(-2.0)
    one = rho_k_soft([0.5], p)
    assert abs(one - kernel_block_soft(0.5, 0.5, p).s_xy) < 1e-12
    # pair correlation, high-precision reference
    assert abs(rho_k_soft([0.0, 1.0], p) - 0.0021202290741979890241) < 1e-9
    # coincident points collapse the antisymmetric corners
    assert rho_k_soft([0.3, 0.3], p) < 1e-10
    with pytest.raises(ValueError):
        rho_k_soft([], p)
    with pytest.raises(ValueError):
        rho_k_soft(np.zeros(7) + np.arange(7), p)


def test_rho_k_nonnegative_on_grid():
    p = SoftEdgeParams(-1.0)
    for x in (-2.0, 0.0, 1.5):
        for y in (-1.0, 0.5, 2.5):
            assert rho_k_soft(sorted({x, y}), p) >= 0.0


def test_discrete_kernel_approaches_soft_edge():
    """Scaled discrete kernel converges to the continuum entry, ~Q^(-1/6)."""
    w = 0.5
    ps = SoftEdgeParams(-4.0 * w)
    errs = []
    for big_q in (1.0e3, 1.0e4):
        p = PoissonParams.soft_edge(big_q, w)
        q16 = big_q ** (1.0 / 6.0)
        edge = 2.0 * math.sqrt(big_q)
        h1 = int(round(edge))
        h2 = int(round(edge + q16))
        x_eff = (h1 - edge) / q16
        y_eff = (h2 - edge) / q16
        discrete = q16 * kernel_block_poisson(h1, h2, p).s_xy
        limit = kernel_block_soft(x_eff, y_eff, ps).s_xy
        errs.append(abs(discrete - limit))
    assert errs[1] < errs[0]
    assert errs[0] < 0.02


def test_joint_distribution_top_threshold_saturates():
    val = joint_distribution(ScaledWindow(s=(8.0,)), SoftEdgeParams(0.0))
    assert abs(val - 1.0) < 1e-5


def test_joint_distribution_wall_free_value():
    # pinned against an independent determinant evaluation at high resolution
    val = joint_distribution(ScaledWindow(s=(-1.0,)), SoftEdgeParams(0.0))
    assert abs(val - 0.5837894) < 2e-5


def test_joint_distribution_monotone_in_threshold():
    p = SoftEdgeParams(0.0)
    vals = [
        joint_distribution(ScaledWindow(s=(s,)), p) for s in (-2.0, -1.0, 0.0, 1.0)
    ]
    for lo, hi in zip(vals, vals[1:]):
        assert lo < hi
    for v in vals:
        assert -1e-6 <= v <= 1.0 + 1e-6


def test_joint_distribution_series_order_stable():
    sw = ScaledWindow(s=(-1.0,))
    p = SoftEdgeParams(-1.0)
    a = joint_distribution(sw, p, p_max=8)
    b = joint_distribution(sw, p, p_max=10)
    assert abs(a - b) < 2e-6


def test_joint_distribution_two_windows_bracketed():
    p = SoftEdgeParams(0.0)
    lo = joint_distribution(ScaledWindow(s=(-1.0,)), p)
    hi = joint_distribution(ScaledWindow(s=(0.0,)), p)
    joint = joint_distribution(ScaledWindow(s=(0.0, -1.0)), p)
    assert lo - 1e-9 <= joint <= hi + 1e-9


def test_joint_distribution_three_windows_smoke():
    p = SoftEdgeParams(-0.5)
    joint = joint_distribution(ScaledWindow(s=(0.0, -1.0, -2.0), nodes=12), p)
    lo = joint_distribution(ScaledWindow(s=(-2.0,), nodes=12), p)
    hi = joint_distribution(ScaledWindow(s=(0.0,), nodes=12), p)
    assert lo - 1e-6 <= joint <= hi + 1e-6


def test_joint_distribution_guards():
    sw = ScaledWindow(s=(-1.0,))
    with pytest.raises(ValueError):
        joint_distribution(sw, SoftEdgeParams(0.0), p_max=13)
    with pytest.raises(ValueError):
        joint_distribution(
            ScaledWindow(s=(0.0, -1.0, -2.0, -3.0)), SoftEdgeParams(0.0)
        )
    # an under-resolved strong wall must refuse, not return garbage
    with pytest.raises(RuntimeError, match="quadrature"):
        joint_distribution(ScaledWindow(s=(-4.0,)), SoftEdgeParams(-32.0), 12)


@pytest.mark.xfail(
    strict=True,
    reason="measured sup difference ~0.03 between wall strengths 4 and 8, about "
    "three times the documented 0.01; successive wall doublings contract the "
    "gap by roughly half, so the strong-wall limit is approached more slowly "
    "than the convergence check assumes",
)
def test_strong_wall_self_convergence():
    diffs = []
    for s in (-4.0, -2.0):
        f4 = joint_distribution(
            ScaledWindow(s=(s,), nodes=320), SoftEdgeParams(-16.0), 12
        )
        f8 = joint_distribution(
            ScaledWindow(s=(s,), nodes=640), SoftEdgeParams(-32.0), 12
        )
        diffs.append(abs(f4 - f8))
    assert max(diffs) < 0.01


def test_tail_bound_check_examples():
    p = SoftEdgeParams(0.0)
    rep = tail_bound_check([5.0], p)
    assert rep.satisfied
    assert rep.value * math.exp(5.0) <= rep.m_fitted
    for pair in [(-1.0, 0.0), (0.0, 1.0), (1.0, 2.0)]:
        rep = tail_bound_check(pair, p)
        assert rep.satisfied
        assert rep.ratio <= 1.0
    vac = tail_bound_check([], p)
    assert vac.satisfied and vac.ratio == 1.0
    with pytest.raises(ValueError):
        tail_bound_check([0.0] * 5, p)
    with pytest.raises(ValueError):
        tail_bound_check([-3.0], p)
