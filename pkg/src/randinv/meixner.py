"""Meixner polynomials at unit offset parameter, norms, and limit forms.

Degrees up to a few hundred appear inside kernel sums, far past where the
closed factorial forms overflow, so signed log-magnitude variants of the
evaluator and the norm are provided alongside the plain ones.
"""

import math
from dataclasses import dataclass

import numpy as np

from .specfun import bessel_j


@dataclass(frozen=True)
class MeixnerParams:
    """Weight parameter; the offset parameter is fixed at 1."""

    q: float

    def __post_init__(self):
        if not 0.0 < self.q < 1.0:
            raise ValueError("q must lie in (0, 1)")


def _q_of(params) -> float:
    q = getattr(params, "q", params)
    q = float(q)
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie in (0, 1)")
    return q


def meixner(n: int, x: float, params) -> float:
    """M_n(x; 1, q) as the terminating hypergeometric sum."""
    q = _q_of(params)
    if n < 0:
        raise ValueError("n must be >= 0")
    z = 1.0 - 1.0 / q
    total = 1.0
    term = 1.0
    for k in range(n):
        term *= (k - n) * (k - x) * z / ((k + 1.0) * (k + 1.0))
        total += term
    return total


def _symmetry_eligible(n: int, x: float, q: float) -> bool:
    # Forward recurrence in the degree is safe while the argument sits at
    # or above the lower edge x = n (1-sqrt q)/(1+sqrt q) of the
    # oscillatory band; below it the polynomial is a minimal solution and
    # contamination grows geometrically.  There the degree-argument
    # symmetry applies instead: the swapped evaluation runs a degree
    # x polynomial at an argument beyond every band it meets.
    xi = round(x)
    if abs(x - xi) >= 1e-9 or xi < 0:
        return False
    sq = math.sqrt(q)
    return n * (1.0 - sq) / (1.0 + sq) > xi


def _monic_by_degree_log(deg: int, z: float, q: float) -> tuple[float, float]:
    # One forward pass in the degree at a fixed real argument, with
    # overflow rescaling; callers guarantee z is outside the band.
    if deg == 0:
        return 1.0, 0.0
    qm = q - 1.0
    prev = 1.0
    cur = z + q / qm
    shift = 0.0
    for m in range(1, deg):
        b = (m * q + m + q) / qm
        c = (m * m * q) / (qm * qm)
        prev, cur = cur, (z + b) * cur - c * prev
        mag = max(abs(prev), abs(cur))
        if mag > 1e200:
            prev /= mag
            cur /= mag
            shift += math.log(mag)
    if cur == 0.0:
        return 0.0, -math.inf
    return math.copysign(1.0, cur), shift + math.log(abs(cur))


def monic_c(n: int, x: float, params) -> float:
    """Monic polynomial C_n(x) by the three-term recurrence.

    Integer arguments far below the degree switch to the degree-argument
    symmetry of the hypergeometric form, where the recurrence loses digits.
    """
    q = _q_of(params)
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return 1.0
    if _symmetry_eligible(n, x, q):
        sign, mag = monic_c_log(n, x, q)
        return sign * math.exp(mag)
    qm = q - 1.0
    prev = 1.0
    cur = x + q / qm
    for m in range(1, n):
        b = (m * q + m + q) / qm
        c = (m * m * q) / (qm * qm)
        prev, cur = cur, (x + b) * cur - c * prev
    return cur


def monic_c_log(n: int, x: float, params) -> tuple[float, float]:
    """(sign, log|C_n(x)|), stable for degrees in the hundreds."""
    q = _q_of(params)
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return 1.0, 0.0
    if _symmetry_eligible(n, x, q):
        # C_n(x) = n! (q/(q-1))^n (q-1)^x / (x! q^x) C_x(n) for integer x
        xi = int(round(x))
        xs, xm = _monic_by_degree_log(xi, float(n), q)
        if xs == 0.0:
            return 0.0, -math.inf
        sign = xs * (-1.0 if (n + xi) % 2 else 1.0)
        mag = (
            math.lgamma(n + 1)
            - math.lgamma(xi + 1)
            + (n - xi) * (math.log(q) - math.log(1.0 - q))
            + xm
        )
        return sign, mag
    qm = q - 1.0
    prev = 1.0
    cur = x + q / qm
    shift = 0.0
    for m in range(1, n):
        b = (m * q + m + q) / qm
        c = (m * m * q) / (qm * qm)
        prev, cur = cur, (x + b) * cur - c * prev
        mag = max(abs(prev), abs(cur))
        if mag > 1e200:
            prev /= mag
            cur /= mag
            shift += math.log(mag)
    if cur == 0.0:
        return 0.0, -math.inf
    sign = 1.0 if cur > 0.0 else -1.0
    return sign, shift + math.log(abs(cur))


def monic_c_column_log(n_max: int, x: float, params):
    """Signs and log magnitudes of C_0(x) .. C_n_max(x) in one pass.

    Kernel sums need every degree at a fixed argument, so the three-term
    recurrence is run once and recorded with overflow rescaling.  Entries
    where the recurrence loses the polynomial (integer x far below the
    degree) are replaced through the degree-argument symmetry.
    """
    q = _q_of(params)
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    signs = np.zeros(n_max + 1)
    logs = np.full(n_max + 1, -math.inf)
    signs[0] = 1.0
    logs[0] = 0.0
    qm = q - 1.0
    prev = 1.0
    cur = x + q / qm
    shift = 0.0
    for n in range(1, n_max + 1):
        if n > 1:
            m = n - 1
            b = (m * q + m + q) / qm
            c = (m * m * q) / (qm * qm)
            prev, cur = cur, (x + b) * cur - c * prev
            mag = max(abs(prev), abs(cur))
            if mag > 1e200:
                prev /= mag
                cur /= mag
                shift += math.log(mag)
        if cur != 0.0:
            signs[n] = 1.0 if cur > 0.0 else -1.0
            logs[n] = shift + math.log(abs(cur))
        if _symmetry_eligible(n, x, q):
            signs[n], logs[n] = monic_c_log(n, x, q)
    return signs, logs


def norm_h(n: int, params) -> float:
    """Orthogonality norm (n!)^2 q^n / (1-q)^(2n+1)."""
    q = _q_of(params)
    if n < 0:
        raise ValueError("n must be >= 0")
    return math.exp(log_norm_h(n, q))


def log_norm_h(n: int, params) -> float:
    q = _q_of(params)
    if n < 0:
        raise ValueError("n must be >= 0")
    return (
        2.0 * math.lgamma(n + 1)
        + n * math.log(q)
        - (2.0 * n + 1.0) * math.log(1.0 - q)
    )


def monic_c_shifted_asymptotic(n: int, x: float, big_m: int, big_q: float) -> float:
    """Large-M limit form of C_n(x + M) at q = Q/M^2.

    Valid where the Bessel order M + x - n stays bounded as M grows; at
    fixed small n the Bessel term is smaller than the dropped error and
    the formula diverges from the polynomial it approximates.
    """
    sign, mag = monic_c_shifted_asymptotic_log(n, x, big_m, big_q)
    return sign * math.exp(mag)


def monic_c_shifted_asymptotic_log(
    n: int, x: float, big_m: int, big_q: float
) -> tuple[float, float]:
    """(sign, log magnitude) of the limit form."""
    if big_m < 100:
        raise ValueError("M must be >= 100; this is a large-M diagnostic")
    if big_q <= 0.0:
        raise ValueError("Q must be positive")
    if n < 0:
        raise ValueError("n must be >= 0")
    q = big_q / float(big_m) ** 2
    order = big_m + int(round(x)) - n
    j = bessel_j(order, 2.0 * math.sqrt(big_q))
    if j == 0.0:
        return 0.0, -math.inf
    sign = 1.0 if j > 0.0 else -1.0
    mag = (
        math.lgamma(n + 1)
        + 0.5 * (n - big_m - x) * math.log(q)
        - n * math.log(1.0 - q)
        + math.log(abs(j))
    )
    return sign, mag
