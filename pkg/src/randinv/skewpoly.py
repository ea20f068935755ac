"""Skew-symmetric lattice pairing and its skew orthogonal polynomials.

The pairing acts on functions of a nonnegative integer variable and weights
the pair (y, x), y < x, by q^{(x+y)/2} alpha^{(x-y)/2}.  Over the monic
Meixner basis its Gram matrix is rank one above the diagonal, J[m, n] =
a_m b_n, which collapses the usual determinant construction of skew
orthogonal polynomials to short explicit combinations of Meixner
polynomials.  This module provides the pairing itself (summed with a
stable suffix recurrence), the rank-one factors, the closed-form
polynomials R_j with their norms, a bordered-determinant evaluator kept as
an independent slow path, and the weighted half-line transform of R_j.

alpha = q is a removable singularity of the factorization: the individual
factors a_n, b_n blow up there while the pairing stays finite, so the
factorized accessors refuse a neighborhood of that line and the summed
pairing is the fallback.  alpha = 0 collapses the whole pairing to zero
(every term carries a positive power of alpha); the closed forms are
continuous in alpha at 0 and are used in that degenerate sense.
"""

import math
from dataclasses import dataclass

import numpy as np

from .meixner import monic_c, monic_c_log
from .specfun import DEFAULT_TOL

_FACTOR_DEGENERATE = 1e-8


@dataclass(frozen=True)
class SkewParams:
    """Pairing weights: q in (0, 1), alpha >= 0, alpha*q < 1."""

    q: float
    alpha: float

    def __post_init__(self):
        if not 0.0 < self.q < 1.0:
            raise ValueError("q must lie strictly inside (0, 1)")
        if self.alpha < 0.0:
            raise ValueError("alpha must be nonnegative")
        if self.alpha * self.q >= 1.0:
            raise ValueError("alpha * q must be below 1")

    @property
    def gamma(self) -> float:
        """(sqrt(alpha) - sqrt(q)) / (1 - sqrt(alpha q))."""
        return (math.sqrt(self.alpha) - math.sqrt(self.q)) / (
            1.0 - math.sqrt(self.alpha * self.q)
        )

    @property
    def factorizable(self) -> bool:
        """Whether the rank-one Gram factors are numerically usable."""
        return abs(math.sqrt(self.alpha) - math.sqrt(self.q)) > _FACTOR_DEGENERATE


def _find_cutoff(f, g, p, tol):
    # The y-sum carries q^{y/2} against at most polynomial growth of f, g.
    # Stop once q^{y/2} (1+|f|) (1+|g|) / (1-sqrt(alpha q)) stays below a
    # tenth of abs_tol for three consecutive y; that product dominates the
    # true summand, which decays like q^y.
    thresh = tol.abs_tol / 10.0
    damp = 1.0 - math.sqrt(p.alpha * p.q)
    sq = math.sqrt(p.q)
    w = 1.0
    run = 0
    y = 0
    while True:
        if w * (1.0 + abs(f(y))) * (1.0 + abs(g(y))) / damp < thresh:
            run += 1
            if run == 3:
                return y
        else:
            run = 0
        y += 1
        w *= sq
        if y > tol.max_terms:
            raise RuntimeError(
                "pairing tail bound not reached within max_terms; "
                "raise max_terms or loosen abs_tol"
            )


def _suffix_weights(g, p, y_top):
    # T(y) = sum_{x>y} q^{x/2} alpha^{(x-y)/2} g(x) by the backward
    # recurrence T(y) = sqrt(alpha) (q^{(y+1)/2} g(y+1) + T(y+1)).  The
    # truncation error at y_top propagates downward damped by a factor
    # sqrt(alpha q) < 1 per step relative to T itself.
    sa = math.sqrt(p.alpha)
    sq = math.sqrt(p.q)
    t = np.zeros(y_top + 1)
    for y in range(y_top - 1, -1, -1):
        t[y] = sa * (sq ** (y + 1) * g(y + 1) + t[y + 1])
    return t


def skew_product(f, g, p: SkewParams, tol=DEFAULT_TOL) -> float:
    """Antisymmetric pairing of two lattice functions.

    Computes sum over y < x of q^{(x+y)/2} alpha^{(x-y)/2}
    (f(y) g(x) - f(x) g(y)).  f and g must grow at most polynomially.
    Raises if the geometric tail bound is not reached within
    tol.max_terms lattice points.
    """
    y_top = _find_cutoff(f, g, p, tol)
    tg = _suffix_weights(g, p, y_top)
    tf = _suffix_weights(f, p, y_top)
    sq = math.sqrt(p.q)
    total = 0.0
    for y in range(y_top, -1, -1):
        total += sq**y * (f(y) * tg[y] - g(y) * tf[y])
    return total


@dataclass(frozen=True)
class GramFactor:
    """Rank-one factors of the pairing over the monic Meixner basis.

    The pairing of the degree-m and degree-n basis polynomials equals
    a[m] * b[n] for m < n, changes sign under swap, and vanishes at m = n.
    """

    a: tuple
    b: tuple

    def pairing(self, m: int, n: int) -> float:
        if m == n:
            return 0.0
        if m < n:
            return self.a[m] * self.b[n]
        return -self.a[n] * self.b[m]


def gram_factor(n_max: int, p: SkewParams) -> GramFactor:
    """Factor sequences a_0..a_n_max and b_0..b_n_max.

    Refuses alpha near q, where the factors individually diverge even
    though the pairing itself stays finite; use skew_product directly in
    that regime.
    """
    if not p.factorizable:
        raise ValueError(
            "alpha too close to q: rank-one Gram factors degenerate there"
        )
    sa, sq = math.sqrt(p.alpha), math.sqrt(p.q)
    saq = math.sqrt(p.alpha * p.q)
    ra = sq * (1.0 - saq) / ((1.0 - p.q) * (sa - sq))
    rb = sq * (sa - sq) / ((1.0 - p.q) * (1.0 - saq))
    a = [sa / (sa - sq)]
    b = [1.0 / (1.0 - saq)]
    for n in range(1, n_max + 1):
        a.append(a[-1] * n * ra)
        b.append(b[-1] * n * rb)
    return GramFactor(a=tuple(a), b=tuple(b))


def skew_r_coeffs(j: int, p: SkewParams) -> np.ndarray:
    """Coefficients c with R_j = sum_k c[k] C_k over the monic basis.

    Odd degree 2n+1 touches only the two top basis elements; even degree
    2n mixes every lower one.  The coefficients are finite products built
    by a ratio walk, so no series truncation is involved.
    """
    if j < 0:
        raise ValueError("degree must be nonnegative")
    q = p.q
    g = p.gamma
    c = np.zeros(j + 1)
    c[j] = 1.0
    if j == 0:
        return c
    if j % 2 == 1:
        n = (j - 1) // 2
        c[j - 1] = -g * math.sqrt(q) / (1.0 - q) * (2 * n + 1)
        return c
    n = j // 2
    run = 1.0
    for k in range(n - 1, -1, -1):
        run *= (2 * k + 2) * (2 * k + 1) * q / (1.0 - q) ** 2
        c[2 * k] = run
        c[2 * k + 1] = -g * run * (1.0 - q) / ((2 * k + 1) * math.sqrt(q))
    return c


def skew_r(j: int, x: float, p: SkewParams) -> float:
    """Monic skew orthogonal polynomial of degree j at x."""
    c = skew_r_coeffs(j, p)
    return float(sum(c[k] * monic_c(k, x, p.q) for k in range(j, -1, -1)))


def log_skew_norm_r(n: int, p: SkewParams) -> float:
    """log of the pairing norm of the couple (R_{2n}, R_{2n+1})."""
    if n < 0:
        raise ValueError("index must be nonnegative")
    if p.alpha == 0.0:
        return -math.inf
    saq = math.sqrt(p.alpha * p.q)
    return (
        math.lgamma(2 * n + 1)
        + math.lgamma(2 * n + 2)
        + 0.5 * math.log(p.alpha)
        + (2 * n + 0.5) * math.log(p.q)
        - (4 * n + 1) * math.log(1.0 - p.q)
        - 2.0 * math.log(1.0 - saq)
    )


def skew_norm_r(n: int, p: SkewParams) -> float:
    """Pairing norm r_n = (2n)! (2n+1)! sqrt(alpha) q^{2n+1/2} /
    ((1-q)^{4n+1} (1 - sqrt(alpha q))^2); zero in the alpha = 0 limit."""
    if p.alpha == 0.0:
        return 0.0
    return math.exp(log_skew_norm_r(n, p))


def skew_r_det_oracle(
    j: int, x: float, p: SkewParams, tol=DEFAULT_TOL, cn=None
) -> float:
    """Bordered-determinant evaluation of R_j; slow reference path.

    Gram entries are summed directly with skew_product, then R_j is read
    off the classical determinant construction.  cn is the free constant
    that adds a multiple of R_{2n} to the odd polynomial R_{2n+1}; None
    selects the value that reduces the odd polynomial to a two-term
    combination, matching skew_r.  Capped at degree 8.
    """
    if j < 0:
        raise ValueError("degree must be nonnegative")
    if j > 8:
        raise ValueError("determinant oracle capped at degree 8")
    if j == 0:
        return 1.0
    cs = [lambda y, k=k: monic_c(k, y, p.q) for k in range(j + 1)]
    jj = np.zeros((j + 1, j + 1))
    for m in range(j + 1):
        for n in range(m + 1, j + 1):
            v = skew_product(cs[m], cs[n], p, tol)
            jj[m, n] = v
            jj[n, m] = -v
    cx = np.array([monic_c(k, x, p.q) for k in range(j + 1)])
    rows = list(range(j, -1, -1))
    if j % 2 == 0:
        cols = list(range(j - 1, -1, -1))
        minor = np.linalg.det(jj[np.ix_(rows[1:], cols)])
        if not np.isfinite(minor) or abs(minor) < 1e-250:
            raise RuntimeError("singular minor in determinant construction")
        full = np.zeros((j + 1, j + 1))
        full[:, 0] = cx[rows]
        full[:, 1:] = jj[np.ix_(rows, cols)]
        return float(np.linalg.det(full) / minor)
    n = (j - 1) // 2
    cols = list(range(j - 2, -1, -1))
    minor = -np.linalg.det(jj[np.ix_(rows[1:], [j] + cols)])
    if not np.isfinite(minor) or abs(minor) < 1e-250:
        raise RuntimeError("singular minor in determinant construction")
    full = np.zeros((j + 1, j + 1))
    full[:, 0] = jj[rows, j]
    full[:, 1] = cx[rows]
    full[:, 2:] = jj[np.ix_(rows, cols)]
    value = float(np.linalg.det(full) / minor)
    if cn is None:
        cn = -p.gamma * math.sqrt(p.q) / (1.0 - p.q) * (2 * n + 1)
    if cn != 0.0:
        value += cn * skew_r_det_oracle(j - 1, x, p, tol)
    return value


def _check_phi_args(j, x):
    if j < 0:
        raise ValueError("index must be nonnegative")
    if x < 0 or x != int(x):
        raise ValueError("argument must be a nonnegative integer")


def phi_direct(j: int, x: int, p: SkewParams, tol=DEFAULT_TOL) -> float:
    """Half-line transform sum_y alpha^{|x-y|/2} sgn(x-y) q^{y/2} R_j(y),
    evaluated from the definition via suffix sums."""
    _check_phi_args(j, x)
    x = int(x)
    c = skew_r_coeffs(j, p)

    def rfun(y):
        return float(sum(c[k] * monic_c(k, y, p.q) for k in range(j, -1, -1)))

    one = lambda y: 1.0
    y_top = max(_find_cutoff(one, rfun, p, tol), x + 4)
    t = _suffix_weights(rfun, p, y_top)
    sa = math.sqrt(p.alpha)
    sq = math.sqrt(p.q)
    acc = 0.0
    for y in range(x):
        acc += sa ** (x - y) * sq**y * rfun(y)
    return acc - t[x]


def phi_series(j: int, x: int, p: SkewParams, tol=DEFAULT_TOL) -> float:
    """Half-line transform of R_j through its expansion over the monic
    basis evaluated at x.

    Terms decay geometrically with ratio about |gamma| sqrt(q); the
    expansion is refused when that ratio is too close to 1.  Each term is
    assembled in log space, so factorially large basis values are never
    materialized on their own.
    """
    _check_phi_args(j, x)
    x = int(x)
    q = p.q
    if p.alpha == 0.0:
        return 0.0
    g = p.gamma
    ag = abs(g)
    if ag * math.sqrt(q) >= 0.95:
        raise RuntimeError("basis expansion of the transform diverges here")
    saq = math.sqrt(p.alpha * q)
    lead = (
        0.5 * math.log(p.alpha)
        - 2.0 * math.log(1.0 - saq)
        + 0.5 * x * math.log(q)
        + math.lgamma(j + 1)
        + 0.5 * j * math.log(q)
        - j * math.log(1.0 - q)
    )
    # the even and odd prefactors share the shape j! q^{j/2} (1-q)^{-j}
    nu0 = j + 1 if j % 2 == 0 else j - 1
    shift = nu0  # gamma power is nu - nu0, zero on the first term
    total = 0.0
    small = 0
    nu = nu0
    while True:
        e = nu - shift
        if ag == 0.0 and e > 0:
            break
        base = (
            lead
            + (nu + 1) * math.log(1.0 - q)
            - math.lgamma(nu + 1)
            - 0.5 * nu * math.log(q)
            + (0.0 if e == 0 else e * math.log(ag))
        )
        sgn = 1.0 if (e % 2 == 0 or g > 0.0) else -1.0
        s1, lc1 = monic_c_log(nu, x, q)
        if j % 2 == 0:
            term = sgn * s1 * math.exp(base + lc1) if s1 != 0.0 else 0.0
        else:
            w = (1.0 - q) ** 2 / ((nu + 2.0) * (nu + 1.0) * q)
            s2, lc2 = monic_c_log(nu + 2, x, q)
            t1 = -s1 * math.exp(base + lc1) if s1 != 0.0 else 0.0
            t2 = s2 * math.exp(base + math.log(w) + lc2) if s2 != 0.0 else 0.0
            term = sgn * (t1 + t2)
        total += term
        if abs(term) < tol.abs_tol / 10.0:
            small += 1
            if small >= 4:
                break
        else:
            small = 0
        nu += 1
        if nu - nu0 > max(tol.max_terms, 200):
            raise RuntimeError("transform expansion did not settle in time")
    return total


def _series_digit_loss(j: int, x: int, p: SkewParams) -> float:
    # The expansion terms behave like (|gamma| sqrt(q))^nu nu^x before the
    # geometric factor wins, so they peak near nu = x/L and the summation
    # cancels roughly exp(x ln(x/L) - x) of headroom.
    ratio = abs(p.gamma) * math.sqrt(p.q)
    if ratio == 0.0 or x == 0:
        return 0.0
    big_l = -math.log(ratio)
    nu_peak = max(1.0, x / big_l)
    return max(0.0, x * math.log(nu_peak) - nu_peak * big_l)


def phi(j: int, x: int, p: SkewParams, tol=DEFAULT_TOL) -> float:
    """Half-line transform of R_j with a built-in dual-path check.

    The definitional sum is the returned value; whenever the basis
    expansion converges without losing float headroom it is evaluated as
    well and disagreement beyond the truncation budget raises.
    """
    direct = phi_direct(j, x, p, tol)
    if (
        p.alpha > 0.0
        and abs(p.gamma) * math.sqrt(p.q) < 0.9
        and _series_digit_loss(j, x, p) < 14.0
    ):
        series = phi_series(j, x, p, tol)
        if abs(direct - series) > 1e-7 * max(1.0, abs(direct)):
            raise RuntimeError(
                "transform paths disagree: direct %.6e vs expansion %.6e"
                % (direct, series)
            )
    return direct
