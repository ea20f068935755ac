"""Point process of the shifted shape coordinates at finite row count.

A shape with at most M rows is encoded by the strictly decreasing
coordinates h_j = lambda_j + M - j.  Their joint law is a Pfaffian point
process on the nonnegative integers: correlations are quaternion
determinants of a 2x2 matrix kernel built from the skew orthogonal
polynomial family, and distribution functions of the ordered coordinates
reduce to window occupation counts.

Kernel entries carry the overall scale q^{(x+y)/2}, which underflows
float range once the arguments reach the hundreds, and the pairing norms
overflow it just as fast.  Every internal factor is therefore held as a
sign and a log magnitude; only the balanced per-term products are
exponentiated.
"""

import math
import threading
from dataclasses import dataclass
from itertools import combinations, product

import numpy as np

from .combinat import alternating_sum, as_partition
from .meixner import monic_c, monic_c_column_log, norm_h
from .pfaffian import qdet, self_dual_from_parts
from .skewpoly import SkewParams, log_skew_norm_r, phi, skew_norm_r, skew_r

_LOG_GRID_TOL = -16.0 * math.log(10.0)
_SUBSET_BUDGET = 1_000_000


@dataclass(frozen=True)
class FiniteModelParams:
    """Row count m (even), weight q in (0,1), fixed-point weight alpha."""

    m: int
    q: float
    alpha: float

    def __post_init__(self):
        if self.m < 2 or self.m % 2 != 0:
            raise ValueError("m must be an even integer >= 2")
        if not 0.0 < self.q < 1.0:
            raise ValueError("q must lie in (0, 1)")
        if self.alpha < 0.0:
            raise ValueError("alpha must be nonnegative")
        if self.alpha * self.q >= 1.0:
            raise ValueError("alpha*q must be < 1")

    @property
    def skew(self) -> SkewParams:
        return SkewParams(q=self.q, alpha=self.alpha)

    @property
    def log_norm_const(self) -> float:
        """log of the constant multiplying the h-coordinate density.

        Fixed by rewriting the shape-coordinate density in terms of h_j;
        the change of variables pins every exponent, so this constant is
        derived rather than quoted.  It diverges at alpha = 0 (the density
        itself stays finite there because the alpha powers recombine).
        """
        if self.alpha == 0.0:
            raise ValueError("constant diverges at alpha = 0")
        m = self.m
        pairs = m * (m - 1) / 2.0
        return (
            m * math.log(1.0 - math.sqrt(self.alpha * self.q))
            + pairs * math.log(1.0 - self.q)
            - 0.5 * pairs * math.log(self.q)
            - 0.25 * m * math.log(self.alpha)
            - sum(math.lgamma(j + 1) for j in range(1, m))
        )


@dataclass(frozen=True)
class WindowSpec:
    """Strictly decreasing integer thresholds a_1 > a_2 > ... > a_l >= 0."""

    thresholds: tuple

    def __post_init__(self):
        a = tuple(int(v) for v in self.thresholds)
        if len(a) < 1:
            raise ValueError("at least one threshold required")
        if any(a[i] <= a[i + 1] for i in range(len(a) - 1)):
            raise ValueError("thresholds must strictly decrease")
        if a[-1] < 0:
            raise ValueError("thresholds must be nonnegative")
        object.__setattr__(self, "thresholds", a)


@dataclass(frozen=True)
class KernelBlock:
    """Entries (S(x,y), I(x,y); D(x,y), S(y,x)) of the matrix kernel."""

    s_xy: float
    i_xy: float
    d_xy: float
    s_yx: float

    def matrix(self) -> np.ndarray:
        return np.array([[self.s_xy, self.i_xy], [self.d_xy, self.s_yx]])


def pdf_pm(lam, p: FiniteModelParams) -> float:
    """Probability of a shape with at most m rows."""
    lam = as_partition(lam)
    m = p.m
    if len(lam) > m:
        raise ValueError("shape has more rows than the model allows")
    full = list(lam) + [0] * (m - len(lam))
    log_p = m * math.log(1.0 - math.sqrt(p.alpha * p.q)) + (
        m * (m - 1) / 2.0
    ) * math.log(1.0 - p.q)
    log_p += 0.5 * sum(full) * math.log(p.q)
    for j in range(m):
        for l in range(j + 1, m):
            log_p += math.log(full[j] - full[l] + l - j) - math.log(l - j)
    alt = alternating_sum(full)
    if p.alpha == 0.0:
        return math.exp(log_p) if alt == 0 else 0.0
    return math.exp(log_p + 0.5 * alt * math.log(p.alpha))


def pdf_h(h, p: FiniteModelParams) -> float:
    """Same probability in the strictly decreasing coordinates h_j."""
    h = tuple(int(v) for v in h)
    m = p.m
    if len(h) != m:
        raise ValueError("expected exactly m coordinates")
    if any(h[i] <= h[i + 1] for i in range(m - 1)) or h[-1] < 0:
        raise ValueError("coordinates must strictly decrease and stay >= 0")
    pairs = m * (m - 1) / 2.0
    log_p = (
        m * math.log(1.0 - math.sqrt(p.alpha * p.q))
        + pairs * math.log(1.0 - p.q)
        - 0.5 * pairs * math.log(p.q)
        - sum(math.lgamma(j + 1) for j in range(1, m))
    )
    log_p += 0.5 * sum(h) * math.log(p.q)
    for j in range(m):
        for l in range(j + 1, m):
            log_p += math.log(h[j] - h[l])
    # net alpha exponent; nonnegative because the gaps h_j - h_{j+1} are >= 1
    net = 0.5 * alternating_sum(h) - 0.25 * m
    if p.alpha == 0.0:
        return math.exp(log_p) if net == 0.0 else 0.0
    return math.exp(log_p + net * math.log(p.alpha))


def eps_weight(x: int, y: int, alpha: float) -> float:
    """Antisymmetric pairing weight alpha^{|y-x|/2} sgn(y-x)."""
    if x == y:
        return 0.0
    w = alpha ** (abs(y - x) / 2.0)
    return w if y > x else -w


# ---------------------------------------------------------------------------
# signed-log arithmetic


class _Acc:
    """Running sum held as mantissa times exp(scale)."""

    __slots__ = ("man", "scale")

    def __init__(self):
        self.man = 0.0
        self.scale = -math.inf

    def add(self, sign: float, log_mag: float) -> None:
        if sign == 0.0 or log_mag == -math.inf:
            return
        if self.man == 0.0:
            self.man = sign
            self.scale = log_mag
            return
        d = log_mag - self.scale
        if d > 0.0:
            self.man = self.man * math.exp(-d) + sign
            self.scale = log_mag
        else:
            self.man += sign * math.exp(d)
        if self.man == 0.0:
            self.scale = -math.inf
            return
        mag = abs(self.man)
        if mag > 1e120 or mag < 1e-120:
            self.scale += math.log(mag)
            self.man = math.copysign(1.0, self.man)

    def signed_log(self) -> tuple:
        if self.man == 0.0:
            return 0.0, -math.inf
        return math.copysign(1.0, self.man), self.scale + math.log(abs(self.man))


def _sl_add2(sa, la, sb, lb):
    if sa == 0.0:
        return sb, lb
    if sb == 0.0:
        return sa, la
    if la >= lb:
        v = sa + sb * math.exp(lb - la)
        base = la
    else:
        v = sb + sa * math.exp(la - lb)
        base = lb
    if v == 0.0:
        return 0.0, -math.inf
    return math.copysign(1.0, v), base + math.log(abs(v))


# ---------------------------------------------------------------------------
# cached kernel tables


def _h_cut(q: float, m: int) -> int:
    h = 2
    while 0.5 * h * math.log(q) + m * math.log(h) >= _LOG_GRID_TOL:
        h += 1
    return h


def _suffix_margin(p: FiniteModelParams) -> int:
    if p.alpha == 0.0:
        return 8
    rate = -0.5 * math.log(p.alpha * p.q)
    return min(5000, max(60, int(math.ceil((170.0 + p.m) / rate))))


class _Tables:
    """Signed-log values of the skew polynomial family on an integer grid.

    Row j of the table holds R_j(y) for y = 0..y_max.  The even-degree
    expansion over the monic basis telescopes into two prefix sums in a
    rescaled variable, so the whole column costs O(m) per grid point.
    """

    def __init__(self, p: FiniteModelParams, y_max: int):
        self.p = p
        self.y_max = y_max
        m, q, alpha = p.m, p.q, p.alpha
        g = p.skew.gamma
        lu = math.log(q) - 2.0 * math.log(1.0 - q)
        sq = math.sqrt(q)
        self.r_sign = np.zeros((m, y_max + 1))
        self.r_log = np.full((m, y_max + 1), -math.inf)
        for y in range(y_max + 1):
            sc, lc = monic_c_column_log(m - 1, y, q)
            sv = _Acc()
            sw = _Acc()
            for n in range(m // 2):
                j = 2 * n
                sv.add(sc[j], lc[j] - math.lgamma(j + 1) - n * lu)
                es, el = sv.signed_log()
                if g != 0.0:
                    ws, wl = sw.signed_log()
                    if ws != 0.0:
                        es, el = _sl_add2(
                            es,
                            el,
                            -math.copysign(1.0, g) * ws,
                            wl + math.log(abs(g) * (1.0 - q) / sq),
                        )
                self.r_sign[j, y] = es
                self.r_log[j, y] = el + math.lgamma(j + 1) + n * lu
                os_, ol = sc[j + 1], lc[j + 1]
                if g != 0.0 and sc[j] != 0.0:
                    os_, ol = _sl_add2(
                        os_,
                        ol,
                        -math.copysign(1.0, g) * sc[j],
                        lc[j] + math.log(abs(g) * sq * (j + 1) / (1.0 - q)),
                    )
                self.r_sign[j + 1, y] = os_
                self.r_log[j + 1, y] = ol
                sw.add(sc[j + 1], lc[j + 1] - math.lgamma(j + 2) - n * lu)
        sp = p.skew
        self.log_rn = [log_skew_norm_r(n, sp) for n in range(m // 2)]
        self._phi = {}
        self._lock = threading.Lock()

    def r_sl(self, j: int, y: int) -> tuple:
        return self.r_sign[j, y], self.r_log[j, y]

    def phi_hat(self, j: int, x: int) -> tuple:
        """Signed log of q^{-x/2} Phi_j(x), the rescaled pairing transform."""
        key = (j, x)
        got = self._phi.get(key)
        if got is not None:
            return got
        p = self.p
        if p.alpha == 0.0:
            return 0.0, -math.inf
        la = math.log(p.alpha)
        lq = math.log(p.q)
        acc = _Acc()
        for d in range(1, x + 1):
            acc.add(self.r_sign[j, x - d], self.r_log[j, x - d] + 0.5 * d * (la - lq))
        peak = -math.inf
        converged = False
        for d in range(1, self.y_max - x + 1):
            lg = self.r_log[j, x + d] + 0.5 * d * (la + lq)
            acc.add(-self.r_sign[j, x + d], lg)
            peak = max(peak, lg)
            if d >= 8 and lg < peak - 150.0:
                converged = True
                break
        if not converged:
            raise RuntimeError("pairing transform tail not resolved on the grid")
        out = acc.signed_log()
        with self._lock:
            self._phi[key] = out
        return out


_TABLES: dict = {}
_TABLES_LOCK = threading.Lock()


def _tables_for(p: FiniteModelParams, x_need: int) -> _Tables:
    key = (p.m, p.q, p.alpha)
    need = max(_h_cut(p.q, p.m), x_need) + _suffix_margin(p)
    with _TABLES_LOCK:
        t = _TABLES.get(key)
    if t is None or t.y_max < need:
        t = _Tables(p, need)
        with _TABLES_LOCK:
            _TABLES[key] = t
    return t


def _check_point(x) -> int:
    xi = int(x)
    if xi != x or xi < 0:
        raise ValueError("kernel arguments must be nonnegative integers")
    return xi


def _pair_term(a, b, log_r: float, pref: float) -> float:
    if a[0] == 0.0 or b[0] == 0.0:
        return 0.0
    e = a[1] + b[1] - log_r + pref
    if e > 700.0:
        raise RuntimeError("kernel term overflow; parameters out of range")
    return a[0] * b[0] * math.exp(e)


def kernel_block(x: int, y: int, p: FiniteModelParams) -> KernelBlock:
    """Matrix kernel block of the point process at a pair of sites."""
    x = _check_point(x)
    y = _check_point(y)
    if p.alpha == 0.0:
        raise ValueError(
            "kernel normalization degenerates at alpha = 0; "
            "the pairing norms all vanish there"
        )
    t = _tables_for(p, max(x, y))
    pref = 0.5 * (x + y) * math.log(p.q)
    s_xy = s_yx = d_xy = i_sum = 0.0
    for n in range(p.m // 2):
        lr = t.log_rn[n]
        p0x = t.phi_hat(2 * n, x)
        p1x = t.phi_hat(2 * n + 1, x)
        p0y = t.phi_hat(2 * n, y)
        p1y = t.phi_hat(2 * n + 1, y)
        r0x = t.r_sl(2 * n, x)
        r1x = t.r_sl(2 * n + 1, x)
        r0y = t.r_sl(2 * n, y)
        r1y = t.r_sl(2 * n + 1, y)
        s_xy += _pair_term(p0x, r1y, lr, pref) - _pair_term(p1x, r0y, lr, pref)
        s_yx += _pair_term(p0y, r1x, lr, pref) - _pair_term(p1y, r0x, lr, pref)
        d_xy += _pair_term(r0x, r1y, lr, pref) - _pair_term(r1x, r0y, lr, pref)
        i_sum += _pair_term(p0x, p1y, lr, pref) - _pair_term(p1x, p0y, lr, pref)
    return KernelBlock(
        s_xy=s_xy,
        i_xy=-i_sum + eps_weight(x, y, p.alpha),
        d_xy=d_xy,
        s_yx=s_yx,
    )


def s_entry_summed(x: int, y: int, p: FiniteModelParams) -> float:
    """S(x,y) through the Christoffel-Darboux style resummed formula.

    Plain-float diagnostic path for desk-scale m; the term-by-term kernel
    sum is the production route.  Needs x != y (the confluent form of the
    leading ratio is not taken) and a nondegenerate gamma.
    """
    x = _check_point(x)
    y = _check_point(y)
    if x == y:
        raise ValueError("resummed form needs distinct arguments")
    if p.m > 40:
        raise ValueError("plain-float path limited to m <= 40")
    sp = p.skew
    g = sp.gamma
    if abs(g) < 1e-12:
        raise ValueError("resummed form degenerates at alpha = q")
    m, q = p.m, p.q
    h_top = norm_h(m - 1, q)
    r_mid = skew_norm_r((m - 2) // 2, sp)
    cm_x = monic_c(m, x, q)
    cm1_x = monic_c(m - 1, x, q)
    cm_y = monic_c(m, y, q)
    cm1_y = monic_c(m - 1, y, q)
    t1 = (
        q ** ((x + y) / 2.0)
        / h_top
        * (cm_x * cm1_y - cm1_x * cm_y)
        / float(x - y)
    )
    t2 = (
        q ** (y / 2.0)
        / r_mid
        * (1.0 - q)
        / (m * g * math.sqrt(q))
        * (phi(m - 2, x, sp) - q ** (x / 2.0) * (r_mid / h_top) * cm1_x)
        * (cm_y - skew_r(m, y, sp))
    )
    return t1 + t2


def _blocks_for_points(pts, p: FiniteModelParams, cache=None):
    k = len(pts)
    s = np.empty((k, k))
    i_u = np.zeros((k, k))
    d_u = np.zeros((k, k))
    for a in range(k):
        for b in range(a, k):
            key = (pts[a], pts[b])
            blk = None if cache is None else cache.get(key)
            if blk is None:
                blk = kernel_block(pts[a], pts[b], p)
                if cache is not None:
                    cache[key] = blk
            s[a, b] = blk.s_xy
            s[b, a] = blk.s_yx
            if b > a:
                i_u[a, b] = blk.i_xy
                d_u[a, b] = blk.d_xy
    return self_dual_from_parts(s, i_u, d_u)


def rho_k(points, p: FiniteModelParams) -> float:
    """k-point correlation as a quaternion determinant of kernel blocks."""
    pts = tuple(_check_point(v) for v in points)
    if not 1 <= len(pts) <= 6:
        raise ValueError("correlation order limited to k <= 6")
    if len(set(pts)) != len(pts):
        raise ValueError("points must be distinct")
    val = qdet(_blocks_for_points(pts, p))
    if val < -1e-8:
        raise RuntimeError(f"correlation negative beyond noise floor: {val:.3e}")
    return max(val, 0.0)


# ---------------------------------------------------------------------------
# windowed distribution functions


def _admissible_counts(l: int) -> list:
    """Occupation count vectors with sum(n_1..n_r) <= r-1 for every r."""
    out = []

    def rec(prefix):
        r = len(prefix)
        if r == l:
            out.append(tuple(prefix))
            return
        s = sum(prefix)
        for nxt in range(0, r - s + 1):
            rec(prefix + [nxt])

    rec([])
    return out


def _compositions(total: int, sizes) -> list:
    out = []
    l = len(sizes)

    def rec(prefix, left):
        r = len(prefix)
        if r == l:
            if left == 0:
                out.append(tuple(prefix))
            return
        for v in range(0, min(left, sizes[r]) + 1):
            rec(prefix + [v], left - v)

    rec([], total)
    return out


def window_probability(w: WindowSpec, p: FiniteModelParams, p_max: int = 8) -> float:
    """Probability that the j-th largest coordinate is <= a_j for each j.

    The event is equivalent to occupation bounds on the window partition
    above the lowest threshold, and the occupation probabilities come from
    the generating function of the correlation sums: each subset of grid
    points contributes one known monomial in the window variables, so the
    polynomial is assembled exactly and derivatives are read off from its
    coefficients.  The expansion is truncated at order p_max; the tail is
    monitored and must have died away by then.
    """
    if not 1 <= p_max <= 10:
        raise ValueError("truncation order must be between 1 and 10")
    if p.alpha == 0.0:
        raise ValueError("window probabilities need alpha > 0")
    a = w.thresholds
    l = len(a)
    h_cut = _h_cut(p.q, p.m)
    # half-open windows tile (a_l, infinity): a point sitting exactly at a
    # threshold belongs to the window below it
    windows = [list(range(a[0] + 1, h_cut + 1))]
    for r in range(1, l):
        windows.append(list(range(a[r] + 1, a[r - 1] + 1)))
    sizes = [len(win) for win in windows]
    total_pts = sum(sizes)
    counts = _admissible_counts(l)
    cache: dict = {}
    prob = 1.0
    small_layers = 0
    converged = total_pts == 0
    last_delta = 0.0
    for order in range(1, p_max + 1):
        if order > p.m or order > total_pts:
            converged = True
            break
        if math.comb(total_pts, order) > _SUBSET_BUDGET:
            raise RuntimeError(
                "window expansion needs too many correlation sums; "
                "narrow the windows or lower the thresholds"
            )
        delta = 0.0
        for m_vec in _compositions(order, sizes):
            tot = 0.0
            pools = [combinations(windows[r], m_vec[r]) for r in range(l)]
            for pick in product(*pools):
                pts = tuple(v for part in pick for v in part)
                tot += qdet(_blocks_for_points(pts, p, cache))
            cm = (-1.0) ** order * tot
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
    if not converged:
        raise RuntimeError(
            f"window expansion tail not converged at order {p_max} "
            f"(last layer {last_delta:.3e})"
        )
    if prob < -1e-8 or prob > 1.0 + 1e-8:
        raise RuntimeError(f"window probability out of range: {prob}")
    return min(max(prob, 0.0), 1.0)
