"""Soft-edge scaling limit of the Poissonized correlation kernel.

At the upper spectral edge the Poissonized model, viewed on the scale
2 sqrt(Q) + Q^(1/6) X with sqrt(alpha) = 1 - 2 w / Q^(1/6), converges to a
2 x 2 matrix kernel built from Airy functions.  The scalar Airy kernel

    K(x, y) = (Ai(x) Ai'(y) - Ai(y) Ai'(x)) / (x - y)
            = integral_0^inf Ai(x+t) Ai(y+t) dt

is the seed; the matrix entries add exponential transforms of it with rate
u/2, where u = -4 w ties the kernel parameter to the fixed-point weight.

Two families of integral forms are implemented for the transformed entries.
The half-line forms integrate e^{u(x-t)/2} against the kernel over
t <= x exactly as the entries are defined; they converge only for u <= 0.
The regularized forms trade the left half-line for a right tail through

    integral_{-inf}^{x} e^{-ut/2} Ai(t) dt = e^{-u^3/24} - integral_x^inf,

which converges for every u but subtracts numbers of size e^{|u|^3/24}
when u is very negative.  Entry evaluation therefore branches: half-line
marching for u <= -1 (absolutely convergent, no cancellation, any depth),
regularized subtraction for u > -1 (cancellation factor at most e^{1/24}
on that side, and the only convergent choice once u > 0).  Both families
are exposed separately so they can be played against each other.

The interpolating joint distribution of the top scaled rows is a truncated
Fredholm expansion over quadrature nodes.  Rather than summing quaternion
determinants over node subsets (the count explodes past ~30 nodes), the
generating polynomial is taken from the ordinary characteristic polynomial:
for a self-dual assembly G the determinant det(1 - G D_xi) is the square of
the quaternion-determinant series, so the needed coefficients come from an
eigenvalue expansion (one window) or trigonometric interpolation on a small
complex grid (several windows), followed by a power-series square root with
constant term 1.  The occupation-count bookkeeping on top of those
coefficients is the same as for the finite-model window probability.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._backend import njit
from .finite_kernel import KernelBlock, _admissible_counts, _compositions
from .pfaffian import assemble_blocks, qdet, self_dual_from_parts
from .specfun import _gauss_legendre, airy_ai, airy_ai_array, airy_tail

# arguments below this are outside the validated Airy evaluation range
_ARG_MIN = -12.0

# regularized forms lose ~e^{|u|^3/24} in cancellation; past u = -6 that is
# nine digits and the half-line forms must be used instead
_REG_U_MIN = -6.0

# right-tail integrands e^{ut/2} Ai(t) need the Airy decay to win before
# Ai underflows; past u = 9 the crossover point leaves double range
_U_MAX = 9.0

_GL8 = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True)
class SoftEdgeParams:
    """Kernel parameter u; the matching fixed-point weight is w = -u/4."""

    u: float

    def __post_init__(self):
        if not math.isfinite(self.u):
            raise ValueError("u must be finite")

    @property
    def w(self) -> float:
        return -self.u / 4.0


@dataclass(frozen=True)
class ScaledWindow:
    """Decreasing soft-edge thresholds with their quadrature discretization.

    The r-th window is (s_r, s_{r-1}), the first reaching up to the cutoff;
    the cutoff defaults to s_1 + 12, by which point the kernel entries are
    below 1e-10.
    """

    s: tuple
    cutoff: float = None
    nodes: int = 32

    def __post_init__(self):
        vals = tuple(float(v) for v in np.atleast_1d(np.asarray(self.s, dtype=float)))
        if len(vals) == 0:
            raise ValueError("need at least one threshold")
        if any(not math.isfinite(v) for v in vals):
            raise ValueError("thresholds must be finite")
        if any(b >= a for a, b in zip(vals, vals[1:])):
            raise ValueError("thresholds must strictly decrease")
        if vals[-1] < _ARG_MIN:
            raise ValueError("lowest threshold below the supported range")
        object.__setattr__(self, "s", vals)
        cut = self.cutoff
        if cut is None:
            cut = vals[0] + 12.0
        cut = float(cut)
        if not cut > vals[0] + 5.0:
            raise ValueError("cutoff must exceed the top threshold by > 5")
        object.__setattr__(self, "cutoff", cut)
        n = int(self.nodes)
        if n < 4:
            raise ValueError("need at least 4 nodes per window")
        object.__setattr__(self, "nodes", n)


def _decay_cutoff(u: float, off: float = 0.0) -> float:
    """T beyond which e^{max(u,0)(t+off)/2} Ai(t) is negligible, by doubling."""
    t = max(10.0, u * u / 4.0 + 10.0)
    while (2.0 / 3.0) * t**1.5 - max(u, 0.0) * 0.5 * (t + off) <= 45.0:
        t *= 2.0
    return t


def _composite_gl(a: float, b: float, panel: float, n_per: int):
    n_panels = max(1, int(math.ceil((b - a) / panel)))
    edges = np.linspace(a, b, n_panels + 1)
    nodes = []
    weights = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        t, w = _gauss_legendre(lo, hi, n_per)
        nodes.append(t)
        weights.append(w)
    return np.concatenate(nodes), np.concatenate(weights)


def _with_max_gap(xs: np.ndarray, cap: float) -> np.ndarray:
    """Refine a sorted grid so every gap respects the cap.

    Below x = -9 the cap additionally shrinks like 1.6/sqrt(|x|) so that
    8-point panels keep resolving the Airy oscillation.
    """
    xs = np.asarray(xs, dtype=float)
    while True:
        lo = xs[:-1]
        caps = np.full(lo.shape, cap)
        neg = lo < -9.0
        if np.any(neg):
            caps[neg] = np.minimum(cap, 1.6 / np.sqrt(-lo[neg]))
        gaps = np.diff(xs)
        bad = np.nonzero(gaps > caps * (1.0 + 1e-12))[0]
        if bad.size == 0:
            return xs
        pieces = [xs]
        for i in bad:
            n = int(math.ceil(gaps[i] / caps[i]))
            pieces.append(np.linspace(xs[i], xs[i + 1], n + 1)[1:-1])
        xs = np.unique(np.concatenate(pieces))


def _gap_nodes(xs: np.ndarray):
    """8-point Gauss-Legendre nodes and weights on every gap of a grid."""
    g, gw = _GL8
    lo, hi = xs[:-1], xs[1:]
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    t = mid[:, None] + half[:, None] * g[None, :]
    wt = half[:, None] * gw[None, :]
    return t, wt


@njit(cache=True)
def _linear_scan(r, c):
    # A_{k+1} = r_k A_k + c_k with A_0 = 0
    out = np.empty(r.size + 1)
    out[0] = 0.0
    acc = 0.0
    for k in range(r.size):
        acc = r[k] * acc + c[k]
        out[k + 1] = acc
    return out


def _tail_integral_array(xs: np.ndarray) -> np.ndarray:
    """integral_x^inf Ai on every x of a sorted unique grid."""
    full = _with_max_gap(xs, 0.5)
    t, wt = _gap_nodes(full)
    ai, _ = airy_ai_array(t.ravel())
    c = (wt * ai.reshape(t.shape)).sum(axis=1)
    out = np.empty(full.size)
    out[-1] = airy_tail(full[-1])
    out[:-1] = out[-1] + c[::-1].cumsum()[::-1]
    return out[np.searchsorted(full, xs)]


def _weighted_left_integral_array(xs: np.ndarray, u: float) -> np.ndarray:
    """integral_{-inf}^x e^{u(x-t)/2} Ai(t) dt on a sorted grid, u < 0.

    Marched upward from a seed x_min - 152/|u| where the discarded mass is
    below e^{-76}; the recurrence factors e^{u gap/2} never exceed one, so
    the march is unconditionally stable.  The depth is capped at 6000
    units, which keeps full accuracy down to |u| about 0.005; below that
    the regularized route should be preferred anyway.
    """
    depth = min(152.0 / abs(u), 6000.0) + 4.0
    cap = min(0.5, 4.0 / max(abs(u), 1.0))
    full = _with_max_gap(np.concatenate(([xs[0] - depth], xs)), cap)
    t, wt = _gap_nodes(full)
    ai, _ = airy_ai_array(t.ravel())
    ai = ai.reshape(t.shape)
    expf = np.exp(u * 0.5 * (full[1:][:, None] - t))
    c = (wt * expf * ai).sum(axis=1)
    r = np.exp(u * 0.5 * np.diff(full))
    vals = _linear_scan(r, c)
    return vals[np.searchsorted(full, xs)]


def _exp_weighted_tail_array(xs: np.ndarray, u: float) -> np.ndarray:
    """integral_x^inf e^{-u t/2} Ai(t) dt on a sorted unique grid."""
    top = max(_decay_cutoff(-u), xs[-1] + 5.0)
    full = _with_max_gap(np.concatenate((xs, [top])), 0.5)
    t, wt = _gap_nodes(full)
    ai, _ = airy_ai_array(t.ravel())
    ai = ai.reshape(t.shape)
    c = (wt * np.exp(-u * 0.5 * t) * ai).sum(axis=1)
    out = np.empty(full.size)
    out[-1] = 0.0
    out[:-1] = c[::-1].cumsum()[::-1]
    return out[np.searchsorted(full, xs)]


def _left_integral_auto(xs: np.ndarray, u: float, tails=None) -> np.ndarray:
    """The exponential Airy transform by the branch-stable route."""
    if u == 0.0:
        b = _tail_integral_array(xs) if tails is None else tails
        return 1.0 - b
    if u <= -1.0:
        return _weighted_left_integral_array(xs, u)
    return np.exp(u * 0.5 * xs) * (
        math.exp(-(u**3) / 24.0) - _exp_weighted_tail_array(xs, u)
    )


def weighted_airy_integral(x: float, u: float, regularized=None) -> float:
    """integral_{-inf}^x e^{u(x-t)/2} Ai(t) dt, branch selected by u.

    regularized=True forces the subtracted right-tail identity (the only
    convergent route for u > 0); regularized=False forces the half-line
    march and raises for u > 0 where that integral diverges.
    """
    x = float(x)
    u = float(u)
    if regularized is None:
        out = _left_integral_auto(np.array([x]), u)
        return float(out[0])
    if regularized:
        if u < _REG_U_MIN:
            raise ValueError(
                "regularized transform loses all precision for u < -6; "
                "use the half-line form"
            )
        if u == 0.0:
            return 1.0 - airy_tail(x)
        return float(
            math.exp(u * 0.5 * x)
            * (
                math.exp(-(u**3) / 24.0)
                - _exp_weighted_tail_array(np.array([x]), u)[0]
            )
        )
    if u > 0.0:
        raise ValueError("half-line transform diverges for u > 0")
    if u == 0.0:
        return 1.0 - airy_tail(x)
    return float(_weighted_left_integral_array(np.array([x]), u)[0])


# ---------------------------------------------------------------------------
# scalar Airy kernel


def soft_edge_kernel(x: float, y: float) -> float:
    """Airy kernel by quadrature of integral_0^inf Ai(x+t) Ai(y+t) dt."""
    x, y = float(x), float(y)
    if min(x, y) < -10.0:
        raise ValueError("soft-edge kernel arguments must be >= -10")
    tau_max = _decay_cutoff(0.0) + max(0.0, -min(x, y))
    t, w = _composite_gl(0.0, tau_max, 1.5, 16)
    ax, _ = airy_ai_array(x + t)
    ay, _ = airy_ai_array(y + t)
    return float(np.sum(w * ax * ay))


def soft_edge_kernel_ratio_form(x: float, y: float) -> float:
    """Airy kernel by the divided-difference form; x = y is rejected."""
    x, y = float(x), float(y)
    if x == y:
        raise ValueError("ratio form is 0/0 at coincident arguments")
    ax, apx = airy_ai(x)
    ay, apy = airy_ai(y)
    return (ax * apy - ay * apx) / (x - y)


def _k_closed_vec(x: float, tv: np.ndarray) -> np.ndarray:
    """K(x, t) for a vector of t, stable across the diagonal."""
    ax, apx = airy_ai(x)
    at, apt = airy_ai_array(tv)
    h = tv - x
    near = np.abs(h) <= 1e-3
    denom = np.where(near, 1.0, x - tv)
    out = (ax * apt - at * apx) / denom
    if np.any(near):
        # second-order expansion of K(x, x+h) about the diagonal
        k0 = apx * apx - x * ax * ax
        k1 = -0.5 * ax * ax
        k2 = -(ax * apx + x * x * ax * ax - x * apx * apx) / 6.0
        hh = h[near]
        out[near] = k0 + hh * k1 + hh * hh * k2
    return out


# ---------------------------------------------------------------------------
# matrix-kernel entries, both integral-form families


def _check_entry_args(*vals):
    for v in vals:
        if not math.isfinite(v):
            raise ValueError("kernel arguments must be finite")
        if v < _ARG_MIN:
            raise ValueError("kernel argument below the supported range")


def _check_u(u: float):
    if not math.isfinite(u):
        raise ValueError("u must be finite")
    if u > _U_MAX:
        raise ValueError("u > 9 pushes the regularized quadrature past "
                         "double range")


def _entry_tau_grid(u: float, lo: float, hi: float):
    # for u > 0 the transform factor grows like e^{u(hi+tau)/2}, so the
    # cutoff condition carries the point spread as an exponent offset
    tau_max = _decay_cutoff(max(u, 0.0), hi - lo) + max(0.0, -lo)
    panel = min(1.5, 24.0 / max(abs(u), 1.0))
    return _composite_gl(0.0, tau_max, panel, 16)


def s_entry_regularized_form(x: float, y: float, u: float) -> float:
    """Diagonal-type entry via the subtracted right-tail transform.

    Converges for every u but cancels catastrophically once u < -6.
    """
    x, y, u = float(x), float(y), float(u)
    _check_entry_args(x, y)
    _check_u(u)
    if u < _REG_U_MIN:
        raise ValueError(
            "regularized form loses all precision for u < -6; "
            "use the half-line form"
        )
    k = float(_k_closed_vec(x, np.array([y]))[0])
    b_y = airy_tail(y)
    a_x = weighted_airy_integral(x, u, regularized=True)
    ay, _ = airy_ai(y)
    return k + 0.5 * (ay + 0.5 * u * b_y) * a_x


def s_entry_halfline_form(x: float, y: float, u: float) -> float:
    """Diagonal-type entry via the as-printed left half-line transform.

    Requires u <= 0; the defining integrals diverge otherwise.
    """
    x, y, u = float(x), float(y), float(u)
    _check_entry_args(x, y)
    if u > 0.0:
        raise ValueError("half-line form diverges for u > 0; "
                         "use the regularized form")
    k = float(_k_closed_vec(x, np.array([y]))[0])
    b_y = airy_tail(y)
    if u == 0.0:
        return k + 0.5 * airy_ai(y)[0] * (1.0 - airy_tail(x))
    tau, wt = _entry_tau_grid(u, min(x, y), max(x, y))
    pts = np.unique(np.concatenate(([x], x + tau)))
    a_vals = _weighted_left_integral_array(pts, u)
    a_tau = a_vals[np.searchsorted(pts, x + tau)]
    a_x = a_vals[np.searchsorted(pts, x)]
    ay, apy = airy_ai_array(y + tau)
    integ = float(np.sum(wt * (0.5 * apy + 0.25 * u * ay) * a_tau))
    return 0.5 * k - integ + 0.25 * u * b_y * a_x


def d_entry_halfline_form(x: float, y: float, u: float) -> float:
    """Antisymmetric lower entry via left half-line transforms; u <= 0."""
    x, y, u = float(x), float(y), float(u)
    _check_entry_args(x, y)
    if u > 0.0:
        raise ValueError("half-line form diverges for u > 0; "
                         "use the regularized form")
    sgn_term = -math.exp(u * 0.5 * abs(x - y)) * float(np.sign(x - y))
    tau, wt = _entry_tau_grid(u, min(x, y), max(x, y))
    pts = np.unique(np.concatenate((x + tau, y + tau)))
    if u == 0.0:
        a_vals = 1.0 - _tail_integral_array(pts)
    else:
        a_vals = _weighted_left_integral_array(pts, u)
    a_xt = a_vals[np.searchsorted(pts, x + tau)]
    a_yt = a_vals[np.searchsorted(pts, y + tau)]
    ax, _ = airy_ai_array(x + tau)
    ay, _ = airy_ai_array(y + tau)
    return sgn_term - float(np.sum(wt * (ax * a_yt - ay * a_xt)))


def d_entry_regularized_form(x: float, y: float, u: float) -> float:
    """Antisymmetric lower entry via right-tail transforms; u >= -6."""
    x, y, u = float(x), float(y), float(u)
    _check_entry_args(x, y)
    _check_u(u)
    if u < _REG_U_MIN:
        raise ValueError(
            "regularized form loses all precision for u < -6; "
            "use the half-line form"
        )
    sgn_term = -math.exp(u * 0.5 * abs(x - y)) * float(np.sign(x - y))
    hi = _decay_cutoff(abs(u)) + max(0.0, -min(x, y))
    panel = min(0.75, 6.0 / max(abs(u), 1.0))

    def k_transform(base, other):
        # integral_base^hi of e^{u(base-t)/2} K(other, t)
        t, w = _composite_gl(base, hi, panel, 12)
        kv = _k_closed_vec(other, t)
        return float(np.sum(w * np.exp(u * 0.5 * (base - t)) * kv))

    def ai_transform(base):
        # integral_base^hi of e^{u s/2} Ai(s)
        t, w = _composite_gl(base, hi, panel, 12)
        ai, _ = airy_ai_array(t)
        return float(np.sum(w * np.exp(u * 0.5 * t) * ai))

    reg = math.exp(-(u**3) / 24.0)
    return (
        sgn_term
        + k_transform(y, x)
        - k_transform(x, y)
        - math.exp(u * 0.5 * (y - x)) * reg * ai_transform(x)
        + math.exp(u * 0.5 * (x - y)) * reg * ai_transform(y)
    )


def i_entry_form(x: float, y: float, u: float) -> float:
    """Antisymmetric upper entry; a single manifestly odd reduction.

    Both printed operator forms collapse to
        (u^2/16) W + (u/8)(Ai(x) B(y) - Ai(y) B(x)) - ((x-y)/4) K1
    with W the antisymmetrized Ai-against-tail integral and K1 the
    first-moment Airy kernel; the reduction is exact for every u.
    """
    x, y, u = float(x), float(y), float(u)
    _check_entry_args(x, y)
    tau, wt = _entry_tau_grid(0.0, min(x, y), max(x, y))
    pts = np.unique(np.concatenate((x + tau, y + tau, [x, y])))
    b_vals = _tail_integral_array(pts)
    b_xt = b_vals[np.searchsorted(pts, x + tau)]
    b_yt = b_vals[np.searchsorted(pts, y + tau)]
    b_x = b_vals[np.searchsorted(pts, x)]
    b_y = b_vals[np.searchsorted(pts, y)]
    ax_t, _ = airy_ai_array(x + tau)
    ay_t, _ = airy_ai_array(y + tau)
    ax, _ = airy_ai(x)
    ay, _ = airy_ai(y)
    w_int = float(np.sum(wt * (ay_t * b_xt - ax_t * b_yt)))
    k1 = float(np.sum(wt * tau * ax_t * ay_t))
    return (
        u * u / 16.0 * w_int
        + u / 8.0 * (ax * b_y - ay * b_x)
        - 0.25 * (x - y) * k1
    )


def _s_entry_auto(x: float, y: float, u: float) -> float:
    if u > -1.0:
        return s_entry_regularized_form(x, y, u)
    return s_entry_halfline_form(x, y, u)


def _d_entry_auto(x: float, y: float, u: float) -> float:
    if u <= -1.0 or u == 0.0:
        return d_entry_halfline_form(x, y, u)
    return d_entry_regularized_form(x, y, u)


def kernel_block_soft(x: float, y: float, p: SoftEdgeParams) -> KernelBlock:
    """All four matrix-kernel entries at (x, y), stable forms auto-selected.

    Fields follow the correlation convention: s_xy is the upper-left entry
    S(x, y), equal to the diagonal-type entry evaluated at (y, x); i_xy and
    d_xy are the antisymmetric corners; s_yx closes the self-dual block.
    """
    x, y = float(x), float(y)
    u = float(p.u)
    _check_entry_args(x, y)
    _check_u(u)
    return KernelBlock(
        s_xy=_s_entry_auto(y, x, u),
        i_xy=i_entry_form(x, y, u),
        d_xy=_d_entry_auto(x, y, u),
        s_yx=_s_entry_auto(x, y, u),
    )


# ---------------------------------------------------------------------------
# batched evaluation on a shared point set


def _grid_eval(points: np.ndarray, u: float):
    """f22, f12, f21 matrices on a common point set by shared quadrature.

    Every transform is reduced to integrals over the shifted grid
    {t_i + tau_m}, so the expensive pieces (Airy values and the exponential
    transform march) are computed once and contracted by matrix products.
    Returns (F22, F12, F21) with F22[i, j] the diagonal-type entry at
    (t_i, t_j); F12 and F21 are exactly antisymmetric.
    """
    pts = np.asarray(points, dtype=float)
    n = pts.size
    tau, wt = _entry_tau_grid(u, float(pts.min()), float(pts.max()))
    m = tau.size
    shift = pts[:, None] + tau[None, :]
    grid = np.unique(np.concatenate((pts, shift.ravel())))
    ai_g, _ = airy_ai_array(grid)
    b_g = _tail_integral_array(grid)
    a_g = _left_integral_auto(grid, u, tails=b_g)

    idx_p = np.searchsorted(grid, pts)
    idx_s = np.searchsorted(grid, shift.ravel()).reshape(n, m)
    ai0 = ai_g[idx_p]
    b0 = b_g[idx_p]
    a0 = a_g[idx_p]
    b_tau = b_g[idx_s]
    a_tau = a_g[idx_s]
    phi, phip = airy_ai_array(shift.ravel())
    phi = phi.reshape(n, m)
    phip = phip.reshape(n, m)

    kmat = (phi * wt) @ phi.T
    k1 = (phi * (wt * tau)) @ phi.T
    wm = (b_tau * wt) @ phi.T
    wmat = wm - wm.T

    dx = pts[:, None] - pts[None, :]
    f12 = (
        u * u / 16.0 * wmat
        + u / 8.0 * (np.outer(ai0, b0) - np.outer(b0, ai0))
        - 0.25 * dx * k1
    )

    md = (phi * wt) @ a_tau.T
    f21 = -np.exp(u * 0.5 * np.abs(dx)) * np.sign(dx) - (md - md.T)

    if u <= -1.0:
        t2 = (a_tau * wt) @ (0.5 * phip + 0.25 * u * phi).T
        f22 = 0.5 * kmat - t2 + 0.25 * u * np.outer(a0, b0)
    else:
        f22 = kmat + 0.5 * np.outer(a0, ai0 + 0.5 * u * b0)
    return f22, f12, f21


def _blocks_from_grid(pts: np.ndarray, u: float):
    f22, f12, f21 = _grid_eval(pts, u)
    return self_dual_from_parts(f22.T, np.triu(f12, 1), np.triu(f21, 1))


def rho_k_soft(points, p: SoftEdgeParams) -> float:
    """k-point scaled correlation as a quaternion determinant, k <= 6.

    Coincident points are allowed; the antisymmetric corners vanish there
    and the determinant degenerates to zero as it should.
    """
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    k = pts.size
    if not 1 <= k <= 6:
        raise ValueError("need between 1 and 6 points")
    _check_entry_args(*pts.tolist())
    _check_u(p.u)
    val = qdet(_blocks_from_grid(pts, float(p.u)))
    if val < -1e-8:
        raise RuntimeError("correlation negative beyond noise floor: %g" % val)
    return max(val, 0.0)


# ---------------------------------------------------------------------------
# interpolating joint distribution via the characteristic polynomial


def _window_nodes(sw: ScaledWindow, n: int):
    """Quadrature nodes, weights and window labels, window-major."""
    s = sw.s
    l = len(s)
    pts = []
    wts = []
    labels = []
    for r in range(l):
        hi = sw.cutoff if r == 0 else s[r - 1]
        t, w = _gauss_legendre(s[r], hi, n)
        pts.append(t)
        wts.append(w)
        labels.extend([r] * n)
    return np.concatenate(pts), np.concatenate(wts), np.array(labels)


def _scaled_assembly(pts, wts, u):
    dense = assemble_blocks(_blocks_from_grid(pts, u))
    d2 = np.repeat(np.sqrt(wts), 2)
    return dense * np.outer(d2, d2)


def _series_sqrt_1d(d: np.ndarray) -> np.ndarray:
    out = np.empty_like(d)
    out[0] = 1.0
    for k in range(1, d.size):
        acc = d[k]
        for j in range(1, k):
            acc -= out[j] * out[k - j]
        out[k] = 0.5 * acc
    return out


def _char_coeffs_single(g: np.ndarray, p_max: int) -> dict:
    """Coefficients of the sqrt characteristic series, one window.

    det(1 - xi G) = prod (1 - xi mu_i) over eigenvalues; the truncated
    polynomial product is exact, no interpolation involved.
    """
    mu = np.linalg.eigvals(g)
    c = np.zeros(p_max + 1, dtype=complex)
    c[0] = 1.0
    for m in mu:
        c[1:] = c[1:] - m * c[:-1]
    d = c.real
    delta = _series_sqrt_1d(d)
    return {(k,): float(delta[k]) for k in range(p_max + 1)}


def _graded_multi_indices(l: int, p_max: int):
    for total in range(p_max + 1):
        for m_vec in _compositions(total, [p_max] * l):
            yield m_vec


def _char_coeffs_multi(g, labels, l, p_max: int) -> dict:
    """Sqrt characteristic coefficients by trigonometric interpolation.

    The determinant is sampled on a radius-0.4 circle grid per window
    variable; the radius damps the aliased orders p_max+1 and beyond while
    keeping the read-off amplification of roundoff near 1e-10.
    """
    n_fft = p_max + 1
    radius = 0.4
    two_n = g.shape[0]
    site_label = np.repeat(labels, 2)
    roots = radius * np.exp(2j * math.pi * np.arange(n_fft) / n_fft)
    shape = (n_fft,) * l
    dets = np.empty(shape, dtype=complex)
    eye = np.eye(two_n)
    for idx in np.ndindex(shape):
        xi = np.array([roots[i] for i in idx])
        mat = eye - g * xi[site_label][None, :]
        dets[idx] = np.linalg.det(mat)
    coeff = np.fft.fftn(dets) / n_fft**l
    d = {}
    for m_vec in _graded_multi_indices(l, p_max):
        raw = coeff[m_vec]
        d[m_vec] = raw.real / radius ** sum(m_vec)
    # power-series square root with constant term 1, graded order
    delta = {}
    for m_vec in _graded_multi_indices(l, p_max):
        if sum(m_vec) == 0:
            delta[m_vec] = 1.0
            continue
        acc = d[m_vec]
        for k_vec in np.ndindex(tuple(v + 1 for v in m_vec)):
            if sum(k_vec) == 0 or k_vec == m_vec:
                continue
            acc -= delta[k_vec] * delta[tuple(a - b for a, b in zip(m_vec, k_vec))]
        delta[m_vec] = 0.5 * acc
    return delta


def _joint_single(sw: ScaledWindow, p: SoftEdgeParams, p_max: int, n: int):
    """One quadrature resolution of the joint distribution expansion.

    Returns (probability, last_layer, converged); the occupation-count
    layer on top of the series coefficients mirrors the finite-model
    window probability exactly.
    """
    l = len(sw.s)
    pts, wts, labels = _window_nodes(sw, n)
    g = _scaled_assembly(pts, wts, float(p.u))
    if l == 1:
        delta_coeffs = _char_coeffs_single(g, p_max)
    else:
        delta_coeffs = _char_coeffs_multi(g, labels, l, p_max)
    counts = _admissible_counts(l)
    prob = 1.0
    small_layers = 0
    converged = False
    last_delta = 0.0
    for order in range(1, p_max + 1):
        delta = 0.0
        for m_vec in _compositions(order, [p_max] * l):
            cm = delta_coeffs.get(m_vec, 0.0)
            for n_vec in counts:
                if any(n_vec[r] > m_vec[r] for r in range(l)):
                    continue
                fac = 1.0
                for r in range(l):
                    fac *= (
                        math.factorial(m_vec[r])
                        / math.factorial(m_vec[r] - n_vec[r])
                        / math.factorial(n_vec[r])
                    )
                delta += (-1.0) ** sum(n_vec) * fac * cm
        prob += delta
        last_delta = delta
        if abs(delta) < 1e-10:
            small_layers += 1
            if small_layers == 2:
                converged = True
                break
        else:
            small_layers = 0
    if not converged and abs(last_delta) < 1e-6:
        converged = True
    return prob, last_delta, converged


_QUAD_TOL = 5e-3


def joint_distribution(sw: ScaledWindow, p: SoftEdgeParams, p_max: int = 8) -> float:
    """Interpolating distribution of the top scaled rows, truncated series.

    Runs the expansion at the window's node count and again at double the
    nodes.  The antisymmetric block has a jump across the diagonal, so the
    node values converge at second order rather than spectrally; the
    doubled pair is Richardson-extrapolated (r + (r - r_half)/3), leaving
    a residual around a thirtieth of the observed doubling movement
    (~1e-6 for thresholds above -2 at default resolution).  A doubling
    movement beyond 5e-3 raises instead, as does a series tail that has
    not fallen below 1e-6 by order p_max.  The [0, 1] range is asserted
    (with 1e-6 slack for roundoff), never silently repaired.
    """
    if not 1 <= p_max <= 12:
        raise ValueError("truncation order must be between 1 and 12")
    l = len(sw.s)
    if l > 3:
        raise ValueError("at most 3 windows are supported")
    _check_u(p.u)
    results = []
    for n in (sw.nodes, 2 * sw.nodes):
        prob, last_delta, converged = _joint_single(sw, p, p_max, n)
        if not converged:
            raise RuntimeError(
                f"soft-edge expansion tail not converged at order {p_max} "
                f"(last layer {last_delta:.3e})"
            )
        results.append(prob)
    if abs(results[1] - results[0]) > _QUAD_TOL:
        raise RuntimeError(
            "quadrature not converged: node doubling moved the value by "
            f"{abs(results[1] - results[0]):.3e}"
        )
    prob = results[1] + (results[1] - results[0]) / 3.0
    if prob < -1e-6 or prob > 1.0 + 1e-6:
        raise RuntimeError(f"joint probability out of range: {prob}")
    return min(max(prob, 0.0), 1.0)


# ---------------------------------------------------------------------------
# correlation tail bound


@dataclass(frozen=True)
class TailBoundReport:
    """Outcome of the superexponential correlation bound check."""

    m_fitted: float
    value: float
    bound: float
    ratio: float
    satisfied: bool


def tail_bound_check(points, p: SoftEdgeParams, s0: float = -2.0) -> TailBoundReport:
    """Check rho_k(x) <= e^{-sum x_i} k^{k/2} M^k with an M fitted from rho_1.

    M is the supremum of rho_1(t) e^t over [s0, s0 + 8] plus five percent
    headroom; the report carries the fitted constant so callers can reuse
    it for truncation-error estimates.  k = 0 is vacuous.
    """
    pts = [float(v) for v in np.atleast_1d(np.asarray(points, dtype=float))]
    k = len(pts)
    if k > 4:
        raise ValueError("bound check limited to k <= 4")
    if any(v < s0 for v in pts):
        raise ValueError("all points must be >= s0")
    _check_u(p.u)
    grid = np.linspace(s0, s0 + 8.0, 33)
    f22, _, _ = _grid_eval(grid, float(p.u))
    rho1 = np.maximum(np.diag(f22), 0.0)
    m_fitted = 1.05 * float(np.max(rho1 * np.exp(grid)))
    if k == 0:
        return TailBoundReport(m_fitted, 1.0, 1.0, 1.0, True)
    value = rho_k_soft(pts, p)
    bound = math.exp(-sum(pts)) * k ** (k / 2.0) * m_fitted**k
    ratio = value / bound
    return TailBoundReport(m_fitted, value, bound, ratio, ratio <= 1.0 + 1e-9)
