"""Poissonized limit of the finite correlation kernel.

When the cell weight is tied to the matrix order through q = Q/m^2 and the
arguments ride the shift x + m, every entry of the finite kernel converges
as m grows.  The limit entries are sums of Bessel functions J_n(2 sqrt(Q))
weighted by half-integer powers of alpha, and the k-point correlations keep
their quaternion-determinant form with the limit blocks.

The geometric alpha sums converge term by term for every alpha because the
Bessel orders eventually decay faster than any geometric growth, but for
alpha >= 1 the partial sums pass through astronomically large terms.  The
generating-function resummation

    sum_{j>=0} alpha^{j/2} J_{x-j}(2 sqrt(Q))
        = alpha^{x/2} (e^{-sqrt(Q)(sqrt(alpha) - 1/sqrt(alpha))}
                       - sum_{j>=1} alpha^{-(j+x)/2} J_{j+x}(2 sqrt(Q)))

replaces them with rapidly decaying tails; it is selected automatically
near and beyond alpha = 1.

At alpha = 0 the raw off-diagonal entries degenerate (one block vanishes
like sqrt(alpha), the other grows like 1/sqrt(alpha)); kernel blocks are
then returned in the rescaled gauge (I/sqrt(alpha), sqrt(alpha) D) whose
limits are finite and which leaves every correlation unchanged.
"""

import math
import threading
from dataclasses import dataclass

import numpy as np

from .finite_kernel import FiniteModelParams, KernelBlock, _tables_for, eps_weight
from .pfaffian import qdet, self_dual_from_parts
from .specfun import DEFAULT_TOL, bessel_j_array, bessel_sum_cutoff

# arguments must stay this far inside the tabulated Bessel order range
_RANGE_SLACK = 20


@dataclass(frozen=True)
class PoissonParams:
    """Poissonized model: cell weight intensity and fixed-point weight."""

    big_q: float
    alpha: float

    def __post_init__(self):
        if not (self.big_q > 0.0 and math.isfinite(self.big_q)):
            raise ValueError("big_q must be positive and finite")
        if not (self.alpha >= 0.0 and math.isfinite(self.alpha)):
            raise ValueError("alpha must be nonnegative and finite")

    @classmethod
    def soft_edge(cls, big_q: float, w: float) -> "PoissonParams":
        """Parameters on the scaling ray sqrt(alpha) = 1 - 2 w / big_q^(1/6)."""
        sa = 1.0 - 2.0 * w / big_q ** (1.0 / 6.0)
        if sa < 0.0:
            raise ValueError("w too large: sqrt(alpha) would be negative")
        return cls(big_q=big_q, alpha=sa * sa)


class _JTable:
    """Bessel J values at the fixed argument 2 sqrt(Q), all orders used.

    ext[i] holds J_{i - cut}, with negative orders filled through
    J_{-n} = (-1)^n J_n; orders beyond the cut are treated as zero.
    """

    def __init__(self, z: float, cut: int):
        self.z = z
        self.cut = cut
        vals = bessel_j_array(z, cut)
        orders = np.arange(-cut, cut + 1)
        ext = vals[np.abs(orders)].copy()
        ext[(orders < 0) & (np.abs(orders) % 2 == 1)] *= -1.0
        self.ext = ext

    def j(self, n: int) -> float:
        if abs(n) > self.cut:
            return 0.0
        return float(self.ext[n + self.cut])

    def take(self, orders: np.ndarray) -> np.ndarray:
        clipped = np.clip(orders, -self.cut, self.cut)
        out = self.ext[clipped + self.cut]
        return np.where(np.abs(orders) > self.cut, 0.0, out)


_J_CACHE = {}
_J_LOCK = threading.Lock()


def _jtable(big_q: float, tol=DEFAULT_TOL) -> _JTable:
    z = 2.0 * math.sqrt(big_q)
    cut = bessel_sum_cutoff(z, tol)
    key = (z, cut)
    with _J_LOCK:
        got = _J_CACHE.get(key)
        if got is None:
            got = _JTable(z, cut)
            _J_CACHE[key] = got
        return got


def _check_range(jt: _JTable, *points):
    for x in points:
        if abs(x) > jt.cut - _RANGE_SLACK:
            raise RuntimeError(
                "argument %d outside the resolved Bessel order range" % x)


def _alpha_series(x: int, p: PoissonParams, jt: _JTable, resummed) -> float:
    sa = math.sqrt(p.alpha)
    if p.alpha == 0.0:
        return jt.j(x)
    if resummed is None:
        resummed = sa >= 0.9
    if not resummed and p.alpha >= 1.0:
        raise ValueError("alpha >= 1 requires the resummed path")
    if resummed:
        tail = 0.0
        for j in range(jt.cut - x, 0, -1):
            tail += sa ** (-(j + x)) * jt.j(j + x)
        head = math.exp(-math.sqrt(p.big_q) * (sa - 1.0 / sa))
        return sa ** x * (head - tail)
    tot = 0.0
    for i in range(x + jt.cut, -1, -1):
        tot = tot * sa + jt.j(x - i)
    return tot


def bessel_alpha_series(x: int, p: PoissonParams, tol=DEFAULT_TOL,
                        resummed=None) -> float:
    """sum_{j>=0} alpha^(j/2) J_{x-j}(2 sqrt(Q)).

    resummed=None picks the direct sum below sqrt(alpha) = 0.9 and the
    generating-function form at or above it; the direct path refuses
    alpha >= 1, where its terms grow before the Bessel decay wins.
    """
    jt = _jtable(p.big_q, tol)
    _check_range(jt, x)
    return _alpha_series(x, p, jt, resummed)


def _alpha_series_row(lo: int, hi: int, p: PoissonParams, jt: _JTable) -> np.ndarray:
    # A(s) = J_s + sqrt(alpha) A(s-1) extends one seed value to a whole row
    sa = math.sqrt(p.alpha)
    out = np.empty(hi - lo + 1)
    out[0] = _alpha_series(lo, p, jt, None)
    for s in range(lo + 1, hi + 1):
        out[s - lo] = jt.j(s) + sa * out[s - lo - 1]
    return out


def _s_entry(x: int, y: int, p: PoissonParams, jt: _JTable) -> float:
    n_top = jt.cut - max(x, y)
    t1 = 0.0
    if n_top >= 1:
        a = jt.take(np.arange(1, n_top + 1) + x)
        b = jt.take(np.arange(1, n_top + 1) + y)
        t1 = float(a @ b)
    sa = math.sqrt(p.alpha)
    m_top = jt.cut - y
    t2 = 0.0
    if m_top >= 1:
        s = jt.take(np.arange(1, m_top + 1) + y)
        t2 = float(np.sum(s[1::2]) - sa * np.sum(s[0::2]))
    return t1 - _alpha_series(x, p, jt, None) * t2


def s_entry_ratio_form(x: int, y: int, p: PoissonParams, tol=DEFAULT_TOL) -> float:
    """S entry with the first term in its ratio form; needs x != y."""
    if x == y:
        raise ValueError("ratio form is singular on the diagonal")
    jt = _jtable(p.big_q, tol)
    _check_range(jt, x, y)
    sq = math.sqrt(p.big_q)
    t1 = sq / (x - y) * (jt.j(x) * jt.j(y + 1) - jt.j(y) * jt.j(x + 1))
    sa = math.sqrt(p.alpha)
    s = jt.take(np.arange(1, max(jt.cut - y, 1) + 1) + y)
    t2 = float(np.sum(s[1::2]) - sa * np.sum(s[0::2]))
    return t1 - _alpha_series(x, p, jt, None) * t2


def _i_entry(x: int, y: int, p: PoissonParams, jt: _JTable) -> float:
    if x == y:
        return 0.0
    lo = min(x, y)
    n_top = jt.cut - lo
    ns = np.arange(1, n_top + 1)
    jx = jt.take(ns + x)
    jy = jt.take(ns + y)
    if p.alpha == 0.0:
        # gauged entry: the k=1 layer of the alpha sum divided by sqrt(alpha)
        gy = jt.take(ns + y - 1)
        gx = jt.take(ns + x - 1)
        core = -float(jx @ gy - jy @ gx)
        if abs(x - y) == 1:
            core += 1.0 if y > x else -1.0
        return core
    arow = _alpha_series_row(lo + 1, n_top + max(x, y), p, jt)
    ay = arow[ns + y - (lo + 1)]
    ax = arow[ns + x - (lo + 1)]
    return -float(jx @ ay - jy @ ax) + eps_weight(x, y, p.alpha)


def _d_entry(x: int, y: int, p: PoissonParams, jt: _JTable) -> float:
    if x == y:
        return 0.0
    sa = math.sqrt(p.alpha)
    lo = min(x, y)
    l_top = (jt.cut + 1 - lo) // 2 + 1
    ls = np.arange(1, l_top + 1)
    ux = jt.take(2 * ls + x) - sa * jt.take(2 * ls + x + 1)
    uy = jt.take(2 * ls + y) - sa * jt.take(2 * ls + y + 1)
    vx = np.cumsum(jt.take(2 * ls + x - 1) - sa * jt.take(2 * ls + x))
    vy = np.cumsum(jt.take(2 * ls + y - 1) - sa * jt.take(2 * ls + y))
    core = float(ux @ vy - uy @ vx)
    if p.alpha == 0.0:
        # gauged entry: sqrt(alpha) times the raw block stays finite
        return core
    return core / sa


def kernel_block_poisson(x: int, y: int, p: PoissonParams,
                         tol=DEFAULT_TOL) -> KernelBlock:
    """Limit kernel block at integer arguments (x, y).

    At alpha = 0 the off-diagonal entries come out in the rescaled gauge
    described in the module docstring; correlations are unaffected.
    """
    jt = _jtable(p.big_q, tol)
    _check_range(jt, x, y)
    return KernelBlock(
        s_xy=_s_entry(x, y, p, jt),
        i_xy=_i_entry(x, y, p, jt),
        d_xy=_d_entry(x, y, p, jt),
        s_yx=_s_entry(y, x, p, jt),
    )


def rho_k_poisson(points, p: PoissonParams, tol=DEFAULT_TOL) -> float:
    """k-point correlation of the Poissonized model, k <= 6."""
    pts = [int(x) for x in points]
    k = len(pts)
    if not 1 <= k <= 6:
        raise ValueError("need between 1 and 6 points")
    if len(set(pts)) != k:
        raise ValueError("points must be distinct")
    jt = _jtable(p.big_q, tol)
    _check_range(jt, *pts)
    s = np.empty((k, k))
    i_up = np.zeros((k, k))
    d_up = np.zeros((k, k))
    for a in range(k):
        for b in range(k):
            s[a, b] = _s_entry(pts[a], pts[b], p, jt)
            if a < b:
                i_up[a, b] = _i_entry(pts[a], pts[b], p, jt)
                d_up[a, b] = _d_entry(pts[a], pts[b], p, jt)
    val = qdet(self_dual_from_parts(s, i_up, d_up))
    if val < -1e-8:
        raise RuntimeError("correlation negative beyond noise floor: %g" % val)
    return max(val, 0.0)


def density_alpha0(x: int, big_q: float, tol=DEFAULT_TOL) -> float:
    """One-point density of the alpha = 0 model by its direct series."""
    jt = _jtable(big_q, tol)
    _check_range(jt, x)
    ns = np.arange(1, max(jt.cut - x, 1) + 1)
    t1 = float(np.sum(jt.take(ns + x) ** 2))
    t2 = jt.j(x) * float(np.sum(jt.take(x + 2 * np.arange(1, jt.cut + 1))))
    return t1 - t2


def density_even_rows(x: int, big_q: float, tol=DEFAULT_TOL) -> float:
    """Density for the companion measure supported on even row lengths."""
    jt = _jtable(big_q, tol)
    _check_range(jt, x)
    ns = np.arange(1, max(jt.cut - x, 1) + 1)
    t1 = float(np.sum(jt.take(ns + x) ** 2))
    odd_sum = float(np.sum(jt.take(x + 2 * np.arange(1, jt.cut + 1) - 1)))
    parity = 1.0 if x % 2 else 0.0
    return t1 - jt.j(x + 1) * (odd_sum - parity)


def density_comparison(x: int, big_q: float, tol=DEFAULT_TOL):
    """Both alpha = 0 density formulas and their difference, for reporting.

    The two measures differ (paired columns versus even rows), so no
    agreement is implied; the formulas coincide only at special points.
    """
    ours = density_alpha0(x, big_q, tol)
    theirs = density_even_rows(x, big_q, tol)
    return ours, theirs, ours - theirs


def mean_fixed_points(p: PoissonParams) -> float:
    """Expected alternating row sum sqrt(alpha big_q): the fixed-point count."""
    return math.sqrt(p.alpha * p.big_q)


def _shifted_params(m: int, n: int, big_q: float, alpha: float):
    if m % 2 or m <= 0:
        raise ValueError("m must be positive and even")
    if not 1 <= n <= m // 2 - 1:
        raise ValueError("n out of range")
    return FiniteModelParams(m=m, q=big_q / m ** 2, alpha=alpha)


def shifted_r_even_ratio(m: int, n: int, x: int, big_q: float,
                         alpha: float) -> float:
    """R_{m-2n}(x+m) at q = Q/m^2 over its Bessel-sum limit form."""
    p = _shifted_params(m, n, big_q, alpha)
    tab = _tables_for(p, x + m)
    se, le = tab.r_sl(m - 2 * n, x + m)
    jt = _jtable(big_q)
    sa = math.sqrt(alpha)
    bsum = 0.0
    for l in range(0, m // 2 - n + 1):
        bsum += jt.j(2 * n + 2 * l + x)
    for l in range(1, m // 2 - n + 1):
        bsum -= sa * jt.j(2 * n + 2 * l - 1 + x)
    log_lim = (math.lgamma(m - 2 * n + 1) - 0.5 * (2 * n + x) * math.log(p.q)
               + math.log(abs(bsum)))
    return se * math.copysign(1.0, bsum) * math.exp(le - log_lim)


def shifted_r_odd_ratio(m: int, n: int, x: int, big_q: float,
                        alpha: float) -> float:
    """R_{m-2n+1}(x+m) at q = Q/m^2 over its Bessel limit form."""
    p = _shifted_params(m, n, big_q, alpha)
    tab = _tables_for(p, x + m)
    se, le = tab.r_sl(m - 2 * n + 1, x + m)
    jt = _jtable(big_q)
    sa = math.sqrt(alpha)
    b = jt.j(2 * n - 1 + x) - sa * jt.j(2 * n + x)
    log_lim = (math.lgamma(m - 2 * n + 2)
               - 0.5 * (2 * n + x - 1) * math.log(p.q) + math.log(abs(b)))
    return se * math.copysign(1.0, b) * math.exp(le - log_lim)


def shifted_phi_even_ratio(m: int, n: int, x: int, big_q: float,
                           alpha: float) -> float:
    """Phi_{m-2n}(x+m) at q = Q/m^2 over its Bessel limit form.

    The limit prefactor is alpha^n (m-2n)! q^((m-2n)/2); the remaining
    factor is sum_{nu >= -2n+1} alpha^(nu/2) J_{x-nu}(2 sqrt(Q)).
    """
    if alpha <= 0.0:
        raise ValueError("diagnostic needs alpha > 0")
    p = _shifted_params(m, n, big_q, alpha)
    tab = _tables_for(p, x + m)
    sp, lp = tab.phi_hat(m - 2 * n, x + m)
    lq = math.log(p.q)
    le = lp + 0.5 * (x + m) * lq
    jt = _jtable(big_q)
    sa = math.sqrt(alpha)
    w = 0.0
    for nu in range(-2 * n + 1, x + jt.cut + 1):
        w += sa ** nu * jt.j(x - nu)
    log_lim = (n * math.log(alpha) + math.lgamma(m - 2 * n + 1)
               + 0.5 * (m - 2 * n) * lq + math.log(abs(w)))
    return sp * math.copysign(1.0, w) * math.exp(le - log_lim)


def shifted_phi_odd_ratio(m: int, n: int, x: int, big_q: float,
                          alpha: float) -> float:
    """Phi_{m-2n+1}(x+m) at q = Q/m^2 over its Bessel limit form.

    The limit prefactor is alpha^(n+1/2) (m-2n+1)! q^((m-2n+1)/2) and the
    sum is sum_{nu >= -2n} alpha^(nu/2) (J_{x-nu-2} - J_{x-nu}); both
    Bessel indices descend with nu.
    """
    if alpha <= 0.0:
        raise ValueError("diagnostic needs alpha > 0")
    p = _shifted_params(m, n, big_q, alpha)
    tab = _tables_for(p, x + m)
    sp, lp = tab.phi_hat(m - 2 * n + 1, x + m)
    lq = math.log(p.q)
    le = lp + 0.5 * (x + m) * lq
    jt = _jtable(big_q)
    sa = math.sqrt(alpha)
    w = 0.0
    for nu in range(-2 * n, x + jt.cut + 1):
        w += sa ** nu * (jt.j(x - nu - 2) - jt.j(x - nu))
    log_lim = ((n + 0.5) * math.log(alpha) + math.lgamma(m - 2 * n + 2)
               + 0.5 * (m - 2 * n + 1) * lq + math.log(abs(w)))
    return sp * math.copysign(1.0, w) * math.exp(le - log_lim)
