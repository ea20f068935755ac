"""Combinatorics of involutions, tableau shapes, and increasing subsequences."""

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np


@dataclass(frozen=True)
class Involution:
    """A self-inverse permutation, stored as its 1-based image sequence."""

    mapping: tuple

    def __post_init__(self):
        imgs = tuple(int(v) for v in self.mapping)
        object.__setattr__(self, "mapping", imgs)
        n = len(imgs)
        if sorted(imgs) != list(range(1, n + 1)):
            raise ValueError("mapping must be a permutation of 1..N")
        for i, v in enumerate(imgs, start=1):
            if imgs[v - 1] != i:
                raise ValueError("permutation is not an involution")

    def __len__(self) -> int:
        return len(self.mapping)

    @property
    def n_fixed(self) -> int:
        return sum(1 for i, v in enumerate(self.mapping, start=1) if v == i)

    @property
    def n_two_cycles(self) -> int:
        return (len(self.mapping) - self.n_fixed) // 2

    def word(self) -> tuple:
        """Insertion word pi(1), ..., pi(N)."""
        return self.mapping


@dataclass(frozen=True)
class LambdaProfile:
    """Row increments and their running unions for a tableau shape."""

    lambda_k: tuple
    L: tuple
    k_max: int


def as_partition(seq: Sequence[int]) -> tuple:
    lam = tuple(int(v) for v in seq if int(v) != 0)
    if any(v < 0 for v in lam):
        raise ValueError("parts must be nonnegative")
    if any(lam[i] < lam[i + 1] for i in range(len(lam) - 1)):
        raise ValueError("parts must be weakly decreasing")
    return lam


def rsk_shape(word) -> tuple:
    """Shape of the insertion tableau of a word under row bumping.

    Accepts an Involution or a raw sequence of letters.  Rows stay weakly
    increasing; an inserted value bumps the leftmost entry strictly larger
    than it, so repeated letters are handled too.
    """
    if isinstance(word, Involution):
        word = word.word()
    rows: list[list[int]] = []
    for x in word:
        cur = x
        for row in rows:
            pos = bisect_right(row, cur)
            if pos == len(row):
                row.append(cur)
                cur = None
                break
            cur, row[pos] = row[pos], cur
        if cur is not None:
            rows.append([cur])
    return tuple(len(r) for r in rows)


def greene_lengths(word, k_max: int) -> LambdaProfile:
    """Largest total size of k disjoint increasing subsequences, k <= k_max."""
    if isinstance(word, Involution):
        word = word.word()
    if not 1 <= k_max <= len(word):
        raise ValueError("need 1 <= k_max <= N")
    shape = rsk_shape(word)
    unions = []
    incs = []
    total = 0
    for k in range(1, k_max + 1):
        row = shape[k - 1] if k - 1 < len(shape) else 0
        total += row
        unions.append(total)
        incs.append(row)
    return LambdaProfile(tuple(incs), tuple(unions), k_max)


def _min_increasing_cover(word: Sequence[int]) -> np.ndarray:
    """mu[mask] = fewest increasing subsequences covering the masked positions."""
    n = len(word)
    vals = list(word)
    size = 1 << n
    is_inc = np.zeros(size, dtype=bool)
    hi_val = np.zeros(size, dtype=np.int64)
    is_inc[0] = True
    for mask in range(1, size):
        h = mask.bit_length() - 1
        rest = mask ^ (1 << h)
        if rest == 0:
            is_inc[mask] = True
        else:
            is_inc[mask] = bool(is_inc[rest]) and vals[h] > hi_val[rest]
        hi_val[mask] = vals[h]
    mu = np.full(size, n + 1, dtype=np.int64)
    mu[0] = 0
    for mask in range(1, size):
        # enumerate nonempty submasks
        s = mask
        best = n + 1
        while s:
            if is_inc[s]:
                cand = 1 + mu[mask ^ s]
                if cand < best:
                    best = cand
            s = (s - 1) & mask
        mu[mask] = best
    return mu


def k_increasing_oracle(word: Sequence[int], k: int) -> int:
    """Exhaustive maximum over position subsets coverable by k increasing runs.

    Complete enumeration over all 3^N (subset, cover) pairs; N <= 10.
    """
    n = len(word)
    if n > 10:
        raise ValueError("oracle is exhaustive; N must be <= 10")
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0 or n == 0:
        return 0
    mu = _min_increasing_cover(word)
    best = 0
    for mask in range(1 << n):
        if mu[mask] <= k:
            c = bin(mask).count("1")
            if c > best:
                best = c
    return best


def involutions(n_symbols: int) -> Iterator[Involution]:
    """All involutions of {1..n_symbols}."""

    def build(free: list[int], images: dict) -> Iterator[dict]:
        if not free:
            yield dict(images)
            return
        i = free[0]
        rest = free[1:]
        images[i] = i
        yield from build(rest, images)
        del images[i]
        for jdx, j in enumerate(rest):
            images[i] = j
            images[j] = i
            yield from build(rest[:jdx] + rest[jdx + 1 :], images)
            del images[i]
            del images[j]

    for imgs in build(list(range(1, n_symbols + 1)), {}):
        yield Involution(tuple(imgs[i] for i in range(1, n_symbols + 1)))


def count_involutions(n_two_cycles: int, n_fixed: int) -> int:
    """Number of involutions of 2n+m symbols with n two-cycles, m fixed points."""
    n, m = n_two_cycles, n_fixed
    if n < 0 or m < 0:
        raise ValueError("counts must be nonnegative")
    return math.factorial(2 * n + m) // (2**n * math.factorial(n) * math.factorial(m))


def t_alpha(n_symbols: int, alpha: float) -> float:
    """Fixed-point-weighted involution count sum_{2n+m=N} t_{n,m} alpha^{m/2}."""
    if n_symbols < 0:
        raise ValueError("N must be >= 0")
    total = 0.0
    for m in range(n_symbols % 2, n_symbols + 1, 2):
        n = (n_symbols - m) // 2
        w = 1.0 if m == 0 else alpha ** (m / 2.0)
        total += count_involutions(n, m) * w
    return total


def partitions_of(n: int, max_part: int | None = None) -> Iterator[tuple]:
    """Partitions of n in weakly decreasing order."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        yield ()
        return
    cap = n if max_part is None else min(max_part, n)
    for first in range(cap, 0, -1):
        for rest in partitions_of(n - first, first):
            yield (first,) + rest


def alternating_sum(lam: Sequence[int]) -> int:
    """Number of odd columns: lambda_1 - lambda_2 + lambda_3 - ..."""
    return sum((1 if j % 2 == 0 else -1) * v for j, v in enumerate(lam))


def f_lambda(lam: Sequence[int]) -> int:
    """Number of standard tableaux of the given shape, exactly."""
    lam = as_partition(lam)
    n = sum(lam)
    p = len(lam)
    if p == 0:
        return 1
    num = math.factorial(n)
    for j in range(p):
        for l in range(j + 1, p):
            num *= lam[j] - lam[l] + l - j
    den = 1
    for j in range(p):
        den *= math.factorial(lam[j] + p - 1 - j)
    return num // den


def log_f_lambda(lam: Sequence[int]) -> float:
    lam = as_partition(lam)
    n = sum(lam)
    p = len(lam)
    if p == 0:
        return 0.0
    out = math.lgamma(n + 1)
    for j in range(p):
        for l in range(j + 1, p):
            out += math.log(lam[j] - lam[l] + l - j)
    for j in range(p):
        out -= math.lgamma(lam[j] + p - j)
    return out


def pdf_Q(lam: Sequence[int], big_q: float, alpha: float) -> float:
    """Poissonized probability of a shape for the two-parameter ensemble."""
    lam = as_partition(lam)
    if big_q < 0.0 or alpha < 0.0:
        raise ValueError("parameters must be nonnegative")
    n = sum(lam)
    m = alternating_sum(lam)
    if m < 0:
        return 0.0
    if alpha == 0.0:
        if m != 0:
            return 0.0
        alpha_term = 0.0
    else:
        alpha_term = 0.5 * m * math.log(alpha)
    q_term = 0.5 * n * math.log(big_q) if big_q > 0.0 else (0.0 if n == 0 else -math.inf)
    logp = (
        -math.sqrt(alpha * big_q)
        - 0.5 * big_q
        + alpha_term
        + q_term
        + log_f_lambda(lam)
        - math.lgamma(n + 1)
    )
    return math.exp(logp)
