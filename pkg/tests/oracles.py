"""Independent reference computations used by the tests.

Nothing here imports the package's evaluators: nested sums are brute-force
loops, classical values come from mpmath, and the q-integer is the plain
geometric sum.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import mpmath as mp


def qint_naive(m: int, q: float) -> float:
    return math.fsum(q ** i for i in range(m))


def qmzv_term(ms, ks, q):
    out = 1.0
    for m, k in zip(ms, ks):
        out *= q ** (m * (k - 1)) / qint_naive(m, q) ** k
    return out


def naive_qmzv(ks, q, cutoff, floor=0, r=None):
    """Brute-force nested loops over ``cutoff >= m1 > ... > md > floor``.

    With ``r`` an extra innermost index ``m_{d+1} >= 1`` weighted ``1/m^r``.
    """
    d = len(ks)
    terms = []
    for ms in itertools.combinations(range(cutoff, floor, -1), d):
        t = qmzv_term(ms, ks, q)
        if r is not None:
            t *= math.fsum(1.0 / j ** r for j in range(1, ms[-1]))
        terms.append(t)
    return math.fsum(terms)


def qmzv_reference(ks, q, floor=0, r=None, dps=30):
    """High-precision value for depth <= 2 at moderate q (terms decay geometrically)."""
    with mp.workdps(dps):
        q = mp.mpf(q)
        qi = lambda m: (1 - q ** m) / (1 - q)
        f = lambda m, k: q ** (m * (k - 1)) / qi(m) ** k
        # stop once the outer term is far below double precision
        cut = int(60 / max(float(-mp.log10(q)) * (ks[0] - 1), 1e-3)) + 60
        total = mp.mpf(0)
        if len(ks) == 1 and r is None:
            return float(mp.fsum(f(m, ks[0]) for m in range(floor + 1, cut)))
        inner = mp.mpf(0)
        for m in range(1, cut):
            if len(ks) == 1:
                total += f(m, ks[0]) * inner
                inner += mp.mpf(1) / mp.mpf(m) ** r
            elif r is None:
                total += f(m, ks[0]) * inner
                if m > floor:
                    inner += f(m, ks[1])
            else:
                raise NotImplementedError
        return float(total)


# classical values

def zeta(s: int) -> float:
    return float(mp.zeta(s))


def zeta_depth2(a: int, b: int) -> float:
    """``zeta(a, b) = sum_n n^-b * hurwitz(a, n + 1)``."""
    with mp.workdps(30):
        return float(mp.nsum(lambda n: mp.zeta(a, n + 1) / n ** b, [1, mp.inf]))


def double_tail_depth1(s: int, p: int, n: int) -> float:
    """``sum_{m > n} 1 / (m^s C(m+p, p))``."""
    with mp.workdps(30):
        return float(mp.nsum(lambda m: 1 / (m ** s * mp.binomial(m + p, p)), [n + 1, mp.inf]))


def double_tail_depth2(a: int, b: int, p: int, n: int) -> float:
    """``sum_{m1 > m2 > n} 1 / (m1^a m2^b C(m1+p, p))`` as two nested 1-D sums."""
    with mp.workdps(25):
        outer = lambda m: 1 / (m ** a * mp.binomial(m + p, p))
        inner = lambda m2: mp.nsum(outer, [m2 + 1, mp.inf])
        return float(mp.nsum(lambda m2: inner(m2) / m2 ** b, [n + 1, mp.inf]))


@lru_cache(maxsize=None)
def compositions(weight: int) -> tuple[tuple[int, ...], ...]:
    """All admissible tuples of the given weight, brute force."""
    out = []
    for depth in range(1, weight):
        for cut in itertools.combinations(range(1, weight), depth - 1):
            edges = (0,) + cut + (weight,)
            parts = tuple(edges[i + 1] - edges[i] for i in range(depth))
            if parts[0] >= 2:
                out.append(parts)
    return tuple(sorted(out))


def dual_by_words(ks):
    """Dual through the 0/1 word: reverse and swap letters, then read back."""
    word = []
    for k in ks:
        word += [0] * (k - 1) + [1]
    flipped = [1 - x for x in reversed(word)]
    out, run = [], 0
    for x in flipped:
        run += 1
        if x == 1:
            out.append(run)
            run = 0
    return tuple(out)
