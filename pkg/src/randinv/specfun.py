"""Bessel and Airy evaluators used by the correlation kernels.

Bessel functions of integer order are produced a whole column at a time by
Miller's backward recurrence with Neumann-series normalization; this is the
natural shape for kernel sums that consume J_n(z) for every n up to a cutoff
at fixed z.  The Airy pair (Ai, Ai') is evaluated by branch:

* Maclaurin series on -5.0 < x < 2.9,
* a fixed anchor table plus local Taylor steps of the ODE y'' = x y on
  2.9 <= x < 7.0 (the Maclaurin partial sums there reach e^{zeta} before
  cancelling down to Ai, so their absolute floor is ~1e-13, far above the
  function; the anchors restore near machine-relative accuracy, which the
  exponentially weighted integrals upstream rely on),
* scaled asymptotic series for x >= 7.0,
* a second anchor table, stepped from a Maclaurin seed, on
  -11.1 <= x <= -5.0 (double precision cannot reach 1e-12 there from the
  Maclaurin side, and the oscillatory asymptotic series is not yet accurate),
* the oscillatory asymptotic expansion for x < -11.1.

Guaranteed absolute accuracy 1e-12 holds on x >= -10; more negative
arguments are best effort (the asymptotic branch is far better than 1e-12
below -11.1, the gap band is covered by anchors).
"""

import math
from dataclasses import dataclass

import numpy as np

from ._backend import njit

SQRT_PI = math.sqrt(math.pi)

# Ai(0) and Ai'(0)
_AI0 = 0.35502805388781723926
_AIP0 = -0.25881940379280679840


@dataclass(frozen=True)
class SeriesTolerance:
    """Truncation control shared by series and sum evaluations."""

    rel_tol: float = 1e-12
    abs_tol: float = 1e-14
    max_terms: int = 300


DEFAULT_TOL = SeriesTolerance()


def bessel_sum_cutoff(arg: float, tol=1e-14) -> int:
    """Order beyond which J_n(arg) is negligible for kernel sums.

    tol may be a SeriesTolerance or a bare absolute tolerance.
    """
    t = float(getattr(tol, "abs_tol", tol))
    if t <= 0.0 or t >= 1.0:
        t = 1e-14
    return int(math.ceil(arg)) + 40 + int(10.0 * math.log10(1.0 / t))


@njit(cache=True)
def _miller_column(z, nmax, nstart):
    # Backward recurrence J_{k-1} = (2k/z) J_k - J_{k+1} from an arbitrary
    # seed; the minimal solution dominates after O(nstart - nmax) steps.
    out = np.zeros(nmax + 1)
    jp = 0.0
    jc = 1e-30
    ssum = 0.0
    for k in range(nstart, 0, -1):
        jm = (2.0 * k / z) * jc - jp
        jp = jc
        jc = jm
        # k-1 is the order just produced
        if k - 1 <= nmax:
            out[k - 1] = jc
        if (k - 1) % 2 == 0 and k - 1 > 0:
            ssum += 2.0 * jc
        if abs(jc) > 1e280:
            jc *= 1e-280
            jp *= 1e-280
            ssum *= 1e-280
            for i in range(max(0, k - 1), nmax + 1):
                out[i] *= 1e-280
    ssum += out[0] if nmax >= 0 else jc
    # ssum now holds J_0 + 2 sum_{k even >= 2} J_k = 1 up to the seed scale
    if ssum == 0.0:
        return out
    for i in range(nmax + 1):
        out[i] /= ssum
    return out


def bessel_j_array(z: float, nmax: int) -> np.ndarray:
    """J_0(z), ..., J_nmax(z) for z >= 0."""
    if z < 0.0:
        raise ValueError("argument must be nonnegative")
    if nmax < 0:
        raise ValueError("nmax must be >= 0")
    if z == 0.0:
        out = np.zeros(nmax + 1)
        out[0] = 1.0
        return out
    # start beyond both the wanted order and the turning point
    nstart = max(nmax, int(z) + 1) + 60 + int(12.0 * (z + 1.0) ** (1.0 / 3.0))
    return _miller_column(z, nmax, nstart)


def bessel_j(order: int, arg: float) -> float:
    """Integer-order J_n; negative order via J_{-n} = (-1)^n J_n."""
    n = int(order)
    sign = 1.0
    if n < 0:
        n = -n
        if n % 2 == 1:
            sign = -1.0
    return sign * float(bessel_j_array(arg, n)[n])


@njit(cache=True)
def _airy_maclaurin(x):
    # two ODE series solutions: y1 = 1 + x^3/6 + ..., y2 = x + x^4/12 + ...
    x3 = x * x * x
    u = 1.0
    y1 = 1.0
    y1p = 0.0
    k = 0
    while k < 80:
        up = u * x3 / ((3.0 * k + 2.0) * (3.0 * k + 3.0))
        y1 += up
        # derivative term: d/dx x^{3k+3} -> (3k+3) x^{3k+2}
        if x != 0.0:
            y1p += up * (3.0 * k + 3.0) / x
        u = up
        k += 1
        if abs(up) < 1e-18 * (1.0 + abs(y1)):
            break
    w = x
    y2 = x
    y2p = 1.0
    k = 0
    while k < 80:
        wp = w * x3 / ((3.0 * k + 3.0) * (3.0 * k + 4.0))
        y2 += wp
        if x != 0.0:
            y2p += wp * (3.0 * k + 4.0) / x
        w = wp
        k += 1
        if abs(wp) < 1e-18 * (1.0 + abs(y2)):
            break
    ai = _AI0 * y1 + _AIP0 * y2
    aip = _AI0 * y1p + _AIP0 * y2p
    return ai, aip


@njit(cache=True)
def _airy_asym_pos(x):
    # DLMF 9.7.5/9.7.6, scaled by exp(-zeta)
    zeta = (2.0 / 3.0) * x * math.sqrt(x)
    su = 1.0
    sv = 1.0
    u = 1.0
    sign = -1.0
    term_prev = 1.0
    for k in range(40):
        u = u * (3.0 * k + 0.5) * (3.0 * k + 1.5) * (3.0 * k + 2.5) / (
            54.0 * (k + 1.0) * (k + 0.5)
        )
        v = u * (6.0 * (k + 1.0) + 1.0) / (1.0 - 6.0 * (k + 1.0))
        term = u / zeta ** (k + 1.0)
        if abs(term) > term_prev:
            break
        su += sign * term
        sv += sign * v / u * term
        term_prev = abs(term)
        sign = -sign
        if abs(term) < 1e-18:
            break
    pref = math.exp(-zeta) / (2.0 * SQRT_PI)
    ai = pref * su / x ** 0.25
    aip = -pref * sv * x ** 0.25
    return ai, aip


@njit(cache=True)
def _airy_asym_neg(x):
    # oscillatory expansion for x <= -7 or so; used below -11.1
    z = -x
    zeta = (2.0 / 3.0) * z * math.sqrt(z)
    c = math.cos(zeta - 0.25 * math.pi)
    s = math.sin(zeta - 0.25 * math.pi)
    su_e = 0.0
    su_o = 0.0
    sv_e = 0.0
    sv_o = 0.0
    u = 1.0
    term_prev = 1e308
    for j in range(44):
        if j == 0:
            uj = 1.0
        else:
            uj = u * (3.0 * (j - 1.0) + 0.5) * (3.0 * (j - 1.0) + 1.5) * (
                3.0 * (j - 1.0) + 2.5
            ) / (54.0 * j * (j - 0.5))
        u = uj
        vj = uj * (6.0 * j + 1.0) / (1.0 - 6.0 * j) if j > 0 else 1.0
        term = uj / zeta ** j
        if abs(term) > term_prev:
            break
        term_prev = abs(term)
        sgn = 1.0 if (j // 2) % 2 == 0 else -1.0
        if j % 2 == 0:
            su_e += sgn * term
            sv_e += sgn * vj / uj * term
        else:
            su_o += sgn * term
            sv_o += sgn * vj / uj * term
        if abs(term) < 1e-18:
            break
    zr = z ** 0.25
    ai = (c * su_e + s * su_o) / (SQRT_PI * zr)
    aip = (s * sv_e - c * sv_o) * zr / SQRT_PI
    return ai, aip


@njit(cache=True)
def _airy_taylor(x0, ai0, aip0, h):
    """Evaluate (y, y') at x0 + h for y'' = x y with y(x0) = ai0, y'(x0) = aip0."""
    coef = np.zeros(30)
    coef[0] = ai0
    coef[1] = aip0
    for k in range(28):
        cm = coef[k - 1] if k >= 1 else 0.0
        coef[k + 2] = (x0 * coef[k] + cm) / ((k + 1.0) * (k + 2.0))
    y = 0.0
    yp = 0.0
    for k in range(29, -1, -1):
        y = y * h + coef[k]
    for k in range(29, 0, -1):
        yp = yp * h + k * coef[k]
    return y, yp


# (Ai, Ai') at 3.00, 3.25, ..., 7.00; values are exact to the digits shown
_POS_ANCHOR_X = np.arange(17) * 0.25 + 3.0
_POS_ANCHOR_AI = np.array([
    0.00659113935746071914426, 0.00416045461811725644971, 0.00258409878698963496328,
    0.00158007171792101325785, 0.000951563851204801873621, 0.000564639835342501337782,
    0.000330250323514308983659, 0.000190461459268160512724, 0.00010834442813607441735,
    0.0000608101145224236528733, 0.0000336853119085998144253, 0.0000184212461977302458206,
    0.00000994769436025288957024, 0.00000530586174875208102632, 0.00000279588234320491358546,
    0.000001455812744578875869, 7.49212886399716708077e-7,
])
_POS_ANCHOR_AIP = np.array([
    -0.0119129767059513184738, -0.00779268792679072111948, -0.00500441396795258283203,
    -0.00315751475323978419203, -0.00195864095020417890014, -0.00119520513454491430441,
    -0.000717866567557508888694, -0.000424592689456562082798, -0.000247413890868462476,
    -0.00014209461719726815761, -0.0000804633913055651433797, -0.0000449406212229834806287,
    -0.0000247652003970349547542, -0.0000134691134514509834391, -0.00000723193146660179255981,
    -0.00000383445574094993423866, -0.00000200815089473879199117,
])


def _build_anchor_table():
    # anchors at -5.0, -5.2, ..., -11.2 stepping the ODE from a Maclaurin seed
    x0 = -4.8
    ai, aip = _airy_maclaurin(x0)
    xs = []
    ais = []
    aips = []
    x = x0
    while x > -11.3:
        ai, aip = _airy_taylor(x, ai, aip, -0.2)
        x = round((x - 0.2) * 10.0) / 10.0
        xs.append(x)
        ais.append(ai)
        aips.append(aip)
    return (
        np.array(xs),
        np.array(ais),
        np.array(aips),
    )


_ANCHOR_X, _ANCHOR_AI, _ANCHOR_AIP = _build_anchor_table()


@njit(cache=True)
def _airy_scalar(x, anchor_x, anchor_ai, anchor_aip, pos_ai, pos_aip):
    if x >= 7.0:
        return _airy_asym_pos(x)
    if x >= 2.9:
        # nearest positive anchor (spacing 0.25 starting at 3.0)
        idx = int(round((x - 3.0) / 0.25))
        if idx < 0:
            idx = 0
        if idx >= pos_ai.shape[0]:
            idx = pos_ai.shape[0] - 1
        x0 = 3.0 + 0.25 * idx
        return _airy_taylor(x0, pos_ai[idx], pos_aip[idx], x - x0)
    if x > -5.0:
        return _airy_maclaurin(x)
    if x >= -11.1:
        # nearest anchor (spacing 0.2 starting at -5.0)
        idx = int(round((-5.0 - x) / 0.2))
        if idx < 0:
            idx = 0
        if idx >= anchor_x.shape[0]:
            idx = anchor_x.shape[0] - 1
        h = x - anchor_x[idx]
        return _airy_taylor(anchor_x[idx], anchor_ai[idx], anchor_aip[idx], h)
    return _airy_asym_neg(x)


def airy_ai(x: float) -> tuple[float, float]:
    """(Ai(x), Ai'(x))."""
    ai, aip = _airy_scalar(
        float(x), _ANCHOR_X, _ANCHOR_AI, _ANCHOR_AIP, _POS_ANCHOR_AI, _POS_ANCHOR_AIP
    )
    return float(ai), float(aip)


@njit(cache=True)
def _airy_array_loop(xs, anchor_x, anchor_ai, anchor_aip, pos_ai, pos_aip):
    n = xs.shape[0]
    ai = np.empty(n)
    aip = np.empty(n)
    for i in range(n):
        a, b = _airy_scalar(xs[i], anchor_x, anchor_ai, anchor_aip, pos_ai, pos_aip)
        ai[i] = a
        aip[i] = b
    return ai, aip


def airy_ai_array(xs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized (Ai, Ai') over a float array."""
    flat = np.ascontiguousarray(np.asarray(xs, dtype=float).ravel())
    ai, aip = _airy_array_loop(
        flat, _ANCHOR_X, _ANCHOR_AI, _ANCHOR_AIP, _POS_ANCHOR_AI, _POS_ANCHOR_AIP
    )
    shape = np.shape(xs)
    return ai.reshape(shape), aip.reshape(shape)


def _gauss_legendre(a: float, b: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    return mid + half * x, half * w


def airy_tail(s: float, tol: SeriesTolerance = DEFAULT_TOL) -> float:
    """Integral of Ai over (s, infinity); accuracy 1e-10 for s >= -10."""
    s = float(s)
    hi = 12.0
    if s >= hi:
        zeta = (2.0 / 3.0) * s * math.sqrt(s)
        return math.exp(-zeta) / (2.0 * SQRT_PI * s**0.75) * (1.0 - 41.0 / (72.0 * zeta))
    if s < -11.0:
        # best effort: 1 - leading oscillatory terms of the lower integral
        z = -s
        zeta = (2.0 / 3.0) * z * math.sqrt(z)
        lower = (z**-0.75 / SQRT_PI) * (
            -math.sin(zeta - 0.25 * math.pi)
            + math.cos(zeta - 0.25 * math.pi) / (2.0 * zeta)
        )
        return 1.0 - lower
    total = 0.0
    npanels = int(math.ceil((hi - s) / 1.5))
    edges = np.linspace(s, hi, npanels + 1)
    for a, b in zip(edges[:-1], edges[1:]):
        xq, wq = _gauss_legendre(a, b, 16)
        ai, _ = airy_ai_array(xq)
        total += float(wq @ ai)
    zeta = (2.0 / 3.0) * hi * math.sqrt(hi)
    total += math.exp(-zeta) / (2.0 * SQRT_PI * hi**0.75) * (1.0 - 41.0 / (72.0 * zeta))
    return total


def bessel_airy_uniform(nu: float, x: float, order_shift: int = 0) -> float:
    """Leading uniform approximation of J_{nu+shift}(nu - x (nu/2)^{1/3}).

    The shift of the order by +-1 contributes the Ai' correction term at
    relative order (2/nu)^{1/3}; shift must be -1, 0, or 1.
    """
    if nu < 50.0:
        raise ValueError("nu must be >= 50; the expansion is a large-order tool")
    if order_shift not in (-1, 0, 1):
        raise ValueError("order_shift must be -1, 0, or 1")
    ai, aip = airy_ai(x)
    lead = (2.0 / nu) ** (1.0 / 3.0) * ai
    if order_shift == 0:
        return lead
    return lead + order_shift * (2.0 / nu) ** (2.0 / 3.0) * aip
