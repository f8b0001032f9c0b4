"""Certified evaluation of q-MZVs, their tails and r-extensions, MZVs and double tails.

Every evaluator returns a :class:`SeriesResult` whose ``value`` is a partial
sum of a series with nonnegative terms, so the true value lies in
``[value, value + remainder_bound]``. Only truncation is bounded; floating
point round-off is not tracked.

q-series are summed with the nested cumulative-sum recursion

    S_d(m) = f_{k_d}(m),   S_i(m) = f_{k_i}(m) * sum_{m' < m} S_{i+1}(m'),

streamed in chunks over the outer index so memory stays O(chunk * depth)
even when the cutoff reaches 10^7 near ``q -> 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaincc

from .errors import DomainError
from .indices import MultiIndex

__all__ = [
    "QParam",
    "EvalConfig",
    "SeriesResult",
    "q_integer",
    "eval_qmzv",
    "eval_qmzv_tail",
    "eval_qmzv_r",
    "eval_mzv",
    "eval_double_tail",
    "eval_mzv_direct",
    "eval_double_tail_direct",
    "index_word",
]

_FIRST_CHUNK = 512
_MAX_CHUNK = 1 << 18


@dataclass(frozen=True)
class QParam:
    q: float

    def __post_init__(self) -> None:
        q = float(self.q)
        if not (0.0 < q < 1.0):
            raise DomainError(f"q must satisfy 0 < q < 1, got {self.q!r}")
        object.__setattr__(self, "q", q)


def _as_q(q: QParam | float) -> float:
    return q.q if isinstance(q, QParam) else QParam(q).q


@dataclass(frozen=True)
class EvalConfig:
    """Truncation policy.

    ``certified`` mode picks the smallest outer cutoff whose tail certificate
    is below ``epsilon`` (capped at ``max_terms``); ``empirical`` mode sums
    exactly ``max_terms`` outer terms and reports the certificate there.
    """

    epsilon: float = 1e-10
    max_terms: int = 50_000_000
    mode: str = "certified"

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            raise DomainError("epsilon must be positive")
        if int(self.max_terms) < 2:
            raise DomainError("max_terms must be >= 2")
        if self.mode not in ("certified", "empirical"):
            raise DomainError(f"unknown mode {self.mode!r}")

    def with_epsilon(self, epsilon: float) -> EvalConfig:
        return EvalConfig(epsilon, self.max_terms, self.mode)


@dataclass(frozen=True)
class SeriesResult:
    value: float
    remainder_bound: float
    terms_used: int
    certified: bool

    @property
    def upper(self) -> float:
        return self.value + self.remainder_bound

    def to_dict(self) -> dict:
        bound = self.remainder_bound if math.isfinite(self.remainder_bound) else None
        return {
            "value": self.value,
            "remainder_bound": bound,
            "terms_used": self.terms_used,
            "certified": self.certified,
        }


def q_integer(m: int, q: QParam | float) -> float:
    """``[m:q] = 1 + q + ... + q^(m-1)``."""
    if m < 1:
        raise DomainError(f"q-integer needs m >= 1, got {m}")
    qv = _as_q(q)
    return math.expm1(m * math.log(qv)) / math.expm1(math.log(qv))


# --------------------------------------------------------------------------
# q-series


def _log_qint(m: np.ndarray, log_q: float) -> np.ndarray:
    return np.log(-np.expm1(m * log_q)) - math.log(-math.expm1(log_q))


class _QLayer:
    """One summation slot: ``q^{m(k-1)}/[m:q]^k`` or the classical ``1/m^r``."""

    def __init__(self, exponent: int, classical: bool = False, floor: int = 0):
        self.exponent = exponent
        self.classical = classical
        self.floor = floor

    def weights(self, m: np.ndarray, log_q: float, log_qint: np.ndarray) -> np.ndarray:
        if self.classical:
            w = m ** (-float(self.exponent))
        else:
            k = self.exponent
            w = np.exp(m * ((k - 1) * log_q) - k * log_qint)
        if self.floor:
            w = np.where(m > self.floor, w, 0.0)
        return w


def _q_nested_sum(layers: Sequence[_QLayer], q: float, cfg: EvalConfig) -> SeriesResult:
    """Sum ``sum_{m1 > ... > mL} prod_i w_i(m_i)`` with layers given innermost first.

    The outermost layer must be a q-layer with exponent >= 2. Tail certificate:
    every inner factor is at most ``1/[m:q]``, so the inner sum at outer index m
    is at most ``P(m-1)^j / j!`` with ``P(m) = sum_{i<=m} 1/[i:q]`` and ``j`` the
    number of inner slots. That majorant has term ratio at most
    ``rho = ((M+1)/M)^j q^(k1-1)`` beyond M, giving a geometric tail bound.
    """
    k1 = layers[-1].exponent
    j = len(layers) - 1
    log_q = math.log(q)
    log_fact_j = math.lgamma(j + 1)
    log_eps = math.log(cfg.epsilon)
    fixed = cfg.mode == "empirical"
    cap = int(cfg.max_terms)
    first_term = layers[0].floor + len(layers)

    carries = [0.0] * len(layers)
    p_carry = 0.0
    start = 1
    chunk = _FIRST_CHUNK
    while True:
        stop = min(start + chunk, cap + 1)
        m_ext = np.arange(start, stop + 1, dtype=np.float64)  # extra point for f(M+1)
        lqi_ext = _log_qint(m_ext, log_q)
        m, lqi = m_ext[:-1], lqi_ext[:-1]

        s = layers[0].weights(m, log_q, lqi)
        for idx in range(1, len(layers)):
            csum = np.cumsum(s)
            excl = carries[idx - 1] + (csum - s)
            carries[idx - 1] += float(csum[-1])
            s = layers[idx].weights(m, log_q, lqi) * excl
        totals = carries[-1] + np.cumsum(s)
        carries[-1] = float(totals[-1])

        p = p_carry + np.cumsum(np.exp(-lqi))
        p_carry = float(p[-1])
        last = stop == cap + 1
        if not fixed or last:
            log_f_next = m_ext[1:] * ((k1 - 1) * log_q) - k1 * lqi_ext[1:]
            log_rho = j * np.log1p(1.0 / m) + (k1 - 1) * log_q
            with np.errstate(divide="ignore", invalid="ignore"):
                log_bound = j * np.log(p) - log_fact_j + log_f_next - np.log(-np.expm1(log_rho))
            log_bound = np.where(log_rho < 0, log_bound, np.inf)
            if not fixed:
                # never stop before the first nonzero term, so values stay positive
                hit = np.nonzero((log_bound <= log_eps) & (m >= first_term))[0]
                if hit.size:
                    i = int(hit[0])
                    return SeriesResult(float(totals[i]), math.exp(log_bound[i]), int(m[i]), True)
        if last:
            bound = math.exp(log_bound[-1]) if math.isfinite(log_bound[-1]) else math.inf
            return SeriesResult(float(totals[-1]), bound, int(m[-1]), bound <= cfg.epsilon)
        start = stop
        chunk = min(chunk * 2, _MAX_CHUNK)


def _q_layers(k: MultiIndex, floor: int = 0) -> list[_QLayer]:
    layers = [_QLayer(p) for p in reversed(k.parts)]
    layers[0].floor = floor
    return layers


def eval_qmzv_tail(k: MultiIndex, n: int, q: QParam | float,
                   cfg: EvalConfig | None = None) -> SeriesResult:
    """Tail ``zeta[k:q]_n``: the q-MZV series restricted to ``m_d > n``."""
    k.require_admissible()
    if n < 0:
        raise DomainError(f"tail parameter must be >= 0, got {n}")
    return _q_nested_sum(_q_layers(k, floor=n), _as_q(q), cfg or EvalConfig())


def eval_qmzv(k: MultiIndex, q: QParam | float, cfg: EvalConfig | None = None) -> SeriesResult:
    """Multiple q-zeta value ``zeta[k:q]``."""
    return eval_qmzv_tail(k, 0, q, cfg)


def eval_qmzv_r(k: MultiIndex, r: int, q: QParam | float,
                cfg: EvalConfig | None = None, *, inner_floor: int = 0) -> SeriesResult:
    """r-extension ``zeta[k;r:q)`` with one extra innermost factor ``1/m^r``.

    ``inner_floor`` restricts that extra slot to ``m > inner_floor``; with
    ``inner_floor=1`` the result is ``zeta[k;r:q) - zeta[k:q]_1``.
    """
    k.require_admissible()
    if r < 1:
        raise DomainError(f"r must be >= 1, got {r}")
    layers = [_QLayer(r, classical=True, floor=inner_floor)] + _q_layers(k)
    return _q_nested_sum(layers, _as_q(q), cfg or EvalConfig())


# --------------------------------------------------------------------------
# classical MZVs and double tails: iterated integrals split at c


def index_word(k: Sequence[int]) -> tuple[int, ...]:
    """Letters (0 for dt/t, 1 for dt/(1-t)), outermost first."""
    word: list[int] = []
    for part in k:
        word.extend([0] * (part - 1))
        word.append(1)
    return tuple(word)


def _outer_weight(m: np.ndarray, x: float, b: int) -> np.ndarray:
    """``int_0^x (1-t)^b t^(m-1) dt`` for integer b >= 0."""
    total = np.zeros_like(m)
    for i in range(b + 1):
        total += math.comb(b, i) * (-1.0) ** i * np.exp((m + i) * math.log(x)) / (m + i)
    return total


def _harmonic(m: np.ndarray) -> np.ndarray:
    return np.cumsum(1.0 / m)


def _word_cutoff(ones: int, x: float, eps: float, floor: int) -> tuple[int, float]:
    """Smallest M with certified tail below eps, and that tail bound."""
    e = max(ones - 1, 0)
    size = 64
    while True:
        m = np.arange(1, size + 2, dtype=np.float64)
        h = _harmonic(m)
        # majorant t(m) = H(m)^e x^m / m, ratio beyond M at most x (1 + 1/(M+1))^e
        log_t_next = e * np.log(h[1:]) + m[1:] * math.log(x) - np.log(m[1:])
        log_rho = math.log(x) + e * np.log1p(1.0 / m[1:])
        ok = log_rho < 0
        with np.errstate(divide="ignore", invalid="ignore"):
            log_bound = np.where(ok, log_t_next - np.log(-np.expm1(log_rho)), np.inf)
        valid = (m[:-1] > floor) & (log_bound <= math.log(eps))
        hit = np.nonzero(valid)[0]
        if hit.size:
            i = int(hit[0])
            return int(m[i]), float(math.exp(log_bound[i]))
        size *= 2
        if size > 1 << 20:
            raise DomainError("word series failed to converge")


def _word_integral(word: Sequence[int], x: float, inner_pow: int, outer_pow: int,
                   eps: float) -> tuple[float, float, int]:
    """``int_{x > t1 > ... > tr > 0} (1-t1)^b w_1(t1) ... w_r(tr) tr^a``.

    Returns ``(value, remainder_bound, cutoff)``. The innermost letter must be 1; if
    ``outer_pow > 0`` the outermost letter must be 0.
    """
    if not word:
        return 1.0, 0.0, 0
    if word[-1] != 1:
        raise DomainError("innermost letter must be dt/(1-t)")
    if outer_pow and word[0] != 0:
        raise DomainError("outer weight needs an outermost dt/t letter")
    M, bound = _word_cutoff(sum(word), x, eps, inner_pow)
    m = np.arange(1, M + 1, dtype=np.float64)
    c = np.where(m > inner_pow, 1.0 / m, 0.0)
    for pos in range(len(word) - 2, -1, -1):
        letter = word[pos]
        if pos == 0 and outer_pow:
            return float(np.sum(c * _outer_weight(m, x, outer_pow))), bound, M
        if letter == 0:
            c = c / m
        else:
            csum = np.cumsum(c)
            c = (csum - c) / m
    return float(np.sum(c * np.exp(m * math.log(x)))), bound, M


def _split_double_tail(k: MultiIndex, p: int, n: int, eps: float, split: float) -> SeriesResult:
    word = index_word(k.parts)
    size = len(word)
    piece_eps = eps * 1e-3 / (size + 1)
    lo = hi = 0.0
    terms = 0
    for j in range(size + 1):
        # letters above the split, mapped by t -> 1 - t onto [0, 1 - split]
        first = tuple(1 - a for a in reversed(word[:j]))
        rest = word[j:]
        v1, b1, m1 = _word_integral(first, 1.0 - split, p, n if j == size else 0, piece_eps)
        v2, b2, m2 = _word_integral(rest, split, n, p if j == 0 else 0, piece_eps)
        lo += v1 * v2
        hi += (v1 + b1) * (v2 + b2)
        terms = max(terms, m1, m2)
    bound = max(hi - lo, 0.0)
    return SeriesResult(lo, bound, terms, bound <= eps)


def eval_double_tail(k: MultiIndex, p: int, n: int, cfg: EvalConfig | None = None,
                     *, split: float = 0.5) -> SeriesResult:
    """Double tail ``zeta(k)_{p,n} = sum_{m1>...>md>n} binom(m1+p,p)^-1 prod m_i^-k_i``.

    Evaluated as an iterated integral over the simplex, split at ``t = split``
    so that each factor is a series converging like ``max(split, 1-split)^m``.
    """
    k.require_admissible()
    if p < 0 or n < 0:
        raise DomainError("double-tail parameters must be nonnegative")
    if not 0.0 < split < 1.0:
        raise DomainError("split point must lie in (0, 1)")
    cfg = cfg or EvalConfig()
    return _split_double_tail(k, p, n, cfg.epsilon, split)


def eval_mzv(k: MultiIndex, cfg: EvalConfig | None = None, *, split: float = 0.5) -> SeriesResult:
    """Multiple zeta value ``zeta(k)``."""
    return eval_double_tail(k, 0, 0, cfg, split=split)


# --------------------------------------------------------------------------
# direct nested summation for classical series (slow, independent route)


def _direct_tail_bound(M: int, k1: int, p: int, j: int) -> float:
    """Bound on ``sum_{m>M} binom(m+p,p)^-1 H(m-1)^j/j! / m^k1``.

    Uses ``binom(m+p,p)^-1 <= p!/m^p`` and ``H(m-1) <= 1 + ln m``, then
    integral comparison against ``(1 + ln x)^j x^-s`` with ``s = k1 + p``,
    valid once the integrand decreases (``j < s (1 + ln M)``).
    """
    s = k1 + p
    y = 1.0 + math.log(M)
    if j >= s * y:
        return math.inf
    # int_M^inf (1+ln x)^j x^-s dx = e^(s-1) Gamma(j+1, (s-1) y) / (s-1)^(j+1)
    upper = float(gammaincc(j + 1, (s - 1) * y))
    if upper == 0.0:
        return 0.0
    log_val = (s - 1) + math.log(upper) + math.lgamma(p + 1) - (j + 1) * math.log(s - 1)
    return math.exp(log_val)


def eval_double_tail_direct(k: MultiIndex, p: int, n: int,
                            cfg: EvalConfig | None = None) -> SeriesResult:
    """Double tail by direct nested summation with an integral-comparison certificate.

    Converges only polynomially (like ``(ln M)^(d-1) / M^(k1+p-1)``); intended
    as a cross-check for the split evaluator.
    """
    k.require_admissible()
    if p < 0 or n < 0:
        raise DomainError("double-tail parameters must be nonnegative")
    cfg = cfg or EvalConfig()
    j = k.depth - 1
    k1 = k.parts[0]
    cap = int(cfg.max_terms)
    if cfg.mode == "empirical":
        M = cap
    else:
        lo, hi = 2, cap
        if _direct_tail_bound(hi, k1, p, j) > cfg.epsilon:
            M = cap
        else:
            while lo < hi:
                mid = (lo + hi) // 2
                if _direct_tail_bound(mid, k1, p, j) <= cfg.epsilon:
                    hi = mid
                else:
                    lo = mid + 1
            M = lo
    m = np.arange(1, M + 1, dtype=np.float64)
    s = np.where(m > n, m ** (-float(k.parts[-1])), 0.0)
    for part in reversed(k.parts[:-1]):
        csum = np.cumsum(s)
        s = (csum - s) * m ** (-float(part))
    if p:
        # binom(m+p,p)^-1 by the ratio m/(m+p) between consecutive m
        ratios = m / (m + p)
        ratios[0] = 1.0 / (1 + p)
        s = s * np.cumprod(ratios)
    bound = _direct_tail_bound(M, k1, p, j)
    return SeriesResult(float(np.sum(s)), bound, M, bound <= cfg.epsilon)


def eval_mzv_direct(k: MultiIndex, cfg: EvalConfig | None = None) -> SeriesResult:
    return eval_double_tail_direct(k, 0, 0, cfg)
