"""Closed-form tail bounds and numerical checkers for the order, duality and
monotonicity statements about q-MZVs.

Each checker sweeps a finite, declared parameter range and returns a
:class:`CheckReport`. A strict inequality ``a < b`` passes only when the
lower end of ``b`` exceeds the upper end of ``a`` (certified margin); an
identity passes when ``|a - b|`` is within both remainder bounds plus a
tolerance.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

from .errors import DomainError
from .indices import MultiIndex, admissible_indices, dual, height_one
from .series import (
    EvalConfig,
    QParam,
    SeriesResult,
    eval_double_tail,
    eval_mzv,
    eval_qmzv,
    eval_qmzv_r,
    eval_qmzv_tail,
    q_integer,
)

__all__ = [
    "CheckInstance",
    "CheckReport",
    "DEFAULT_TOLERANCE",
    "omega_bounds",
    "verify_tail_sandwich",
    "verify_duality",
    "verify_order_relations",
    "verify_monotonicity",
    "default_sample_points",
]

DEFAULT_TOLERANCE = 1e-8
CHECK_GRID = tuple(i / 10 for i in range(1, 10))

# second evaluation route for the classical duality checks; any point other
# than 1/2 makes the two sides independent computations
_DUAL_SPLIT = 1.0 / 3.0


@dataclass
class CheckInstance:
    params: dict[str, Any]
    lhs: float
    rhs: float
    margin: float
    passed: bool
    note: str = ""

    def to_dict(self) -> dict:
        out = {
            "params": self.params,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "passed": self.passed,
        }
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class CheckReport:
    check_id: str
    instances: list[CheckInstance] = field(default_factory=list)
    scope: str = ""

    @property
    def all_passed(self) -> bool:
        return all(inst.passed for inst in self.instances)

    @property
    def worst_margin(self) -> float:
        if not self.instances:
            return math.nan
        return min(inst.margin for inst in self.instances)

    @property
    def failures(self) -> list[CheckInstance]:
        return [inst for inst in self.instances if not inst.passed]

    def to_dict(self) -> dict:
        return {
            "check_id": self.check_id,
            "all_passed": self.all_passed,
            "worst_margin": self.worst_margin,
            "scope": self.scope,
            "instances": [inst.to_dict() for inst in self.instances],
        }


# --------------------------------------------------------------------------
# helpers


def _fan_out(fn: Callable[[Any], Any], items: Sequence[Any], workers: int) -> list[Any]:
    # map() keeps submission order, so reports do not depend on scheduling
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _sharp(fn: Callable[[EvalConfig], SeriesResult], cfg: EvalConfig) -> SeriesResult:
    """Evaluate, tightening epsilon when the value is tiny compared to it."""
    res = fn(cfg)
    if cfg.mode != "certified":
        return res
    eps = cfg.epsilon
    for _ in range(16):
        if res.value >= 1e4 * eps:
            break
        # a zero value means the cutoff fell below the depth: shrink blindly
        target = max(res.value * 1e-8 if res.value > 0 else eps * 1e-20, 1e-300)
        if target >= eps:
            break
        eps = target
        res = fn(cfg.with_epsilon(eps))
    return res


def _strict(params: dict, small: SeriesResult | float, big: SeriesResult | float,
            note: str = "") -> CheckInstance:
    lo_val, lo_err = _unpack(small)
    hi_val, _ = _unpack(big)
    margin = hi_val - (lo_val + lo_err)
    return CheckInstance(params, lo_val, hi_val, margin, margin > 0, note)


def _equal(params: dict, a: SeriesResult, b: SeriesResult, tol: float) -> CheckInstance:
    gap = abs(a.value - b.value)
    margin = tol + a.remainder_bound + b.remainder_bound - gap
    return CheckInstance(params, a.value, b.value, margin, margin >= 0)


def _unpack(x: SeriesResult | float) -> tuple[float, float]:
    if isinstance(x, SeriesResult):
        return x.value, x.remainder_bound
    return float(x), 0.0


def _failed(params: dict, exc: Exception) -> CheckInstance:
    return CheckInstance(params, math.nan, math.nan, -math.inf, False,
                         f"evaluation failed: {type(exc).__name__}: {exc}")


def _guarded(params: dict, body: Callable[[], CheckInstance]) -> CheckInstance:
    try:
        return body()
    except DomainError:
        raise
    except Exception as exc:  # noqa: BLE001 - reported as a failed instance
        return _failed(params, exc)


def _grid_points(grid: Iterable[float] | Any) -> list[float]:
    points = getattr(grid, "points", grid)
    return [QParam(q).q for q in points]


def _idx(k: MultiIndex) -> str:
    return str(k)


def _bump(k: MultiIndex, j: int) -> MultiIndex:
    parts = list(k.parts)
    parts[j - 1] += 1
    return MultiIndex(tuple(parts))


# --------------------------------------------------------------------------
# closed-form tail bounds


def omega_bounds(k: MultiIndex, n: int, q: QParam | float) -> tuple[float, float]:
    """Lower and upper closed-form bounds for the tail ``zeta[k:q]_n`` (n >= 1).

    Both share the factor ``((q-1)/log q)^d * prod_i 1/(k_1+...+k_i - i)``;
    the lower bound raises ``q^(n+d)/[n+d:q]`` and the upper bound
    ``q^n/[n:q]`` to the power ``weight - depth``.
    """
    k.require_admissible()
    if n < 1:
        raise DomainError(f"tail bounds need n >= 1, got {n}")
    qv = q.q if isinstance(q, QParam) else QParam(q).q
    d = k.depth
    e = k.weight - d
    log_q = math.log(qv)
    log_common = d * math.log((qv - 1.0) / log_q)
    partial = 0
    for i, part in enumerate(k.parts, start=1):
        partial += part
        log_common -= math.log(partial - i)

    def log_ratio(m: int) -> float:
        return m * log_q - math.log(q_integer(m, qv))

    lower = math.exp(log_common + e * log_ratio(n + d))
    upper = math.exp(log_common + e * log_ratio(n))
    return lower, upper


def verify_tail_sandwich(k: MultiIndex, n_max: int, grid=CHECK_GRID, cfg: EvalConfig | None = None,
                         *, workers: int = 1) -> CheckReport:
    """Check ``Omega_1 < zeta[k:q]_n < Omega_2`` for ``n = 1..n_max`` on the grid."""
    k.require_admissible()
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    cfg = cfg or EvalConfig()
    cases = [(n, q) for n in range(1, n_max + 1) for q in _grid_points(grid)]

    def run(case: tuple[int, float]) -> CheckInstance:
        n, q = case
        params = {"k": _idx(k), "n": n, "q": q}

        def body() -> CheckInstance:
            lower, upper = omega_bounds(k, n, q)
            eps = min(cfg.epsilon, lower * 1e-8)
            tail = eval_qmzv_tail(k, n, q, cfg.with_epsilon(max(eps, 1e-300)))
            low_gap = tail.value - lower
            high_gap = upper - tail.upper
            margin = min(low_gap, high_gap)
            note = f"omega1={lower!r} omega2={upper!r}"
            return CheckInstance(params, tail.value, upper if high_gap < low_gap else lower,
                                 margin, margin > 0, note)

        return _guarded(params, body)

    return CheckReport("tail_sandwich", _fan_out(run, cases, workers),
                       f"k={k}, n=1..{n_max}, {len(cases) // n_max} q points")


# --------------------------------------------------------------------------
# duality


def verify_duality(kind: str, params: dict | None = None, grid=CHECK_GRID,
                   cfg: EvalConfig | None = None, *, tolerance: float = DEFAULT_TOLERANCE,
                   workers: int = 1) -> CheckReport:
    """Check a duality identity over a declared range.

    ``q_height_one``: ``zeta[2+n,{1}^m:q] = zeta[2+m,{1}^n:q]`` for ``n > m``,
    ``n + m <= params["max_sum"]`` (or explicit ``params["pairs"]``).
    ``mzv``: ``zeta(k) = zeta(dual k)`` for every admissible k up to
    ``params["max_weight"]``.
    ``double_tail``: ``zeta(k)_{p,n} = zeta(dual k)_{n,p}`` for weight up to
    ``max_weight`` and ``p <= p_max``, ``n <= n_max``.

    The classical sides are evaluated by two different routes (split points
    1/2 and 1/3) so the comparison is not an identity of the algorithm.
    """
    params = dict(params or {})
    cfg = cfg or EvalConfig()
    if kind == "q_height_one":
        if "pairs" in params:
            pairs = [tuple(p) for p in params["pairs"]]
        else:
            max_sum = int(params.get("max_sum", 6))
            pairs = [(n, m) for s in range(1, max_sum + 1) for m in range(s + 1)
                     for n in [s - m] if n > m]
        for n, m in pairs:
            if n < 0 or m < 0:
                raise DomainError("height-one parameters must be nonnegative")
        cases = [(n, m, q) for (n, m) in pairs for q in _grid_points(grid)]

        def run(case):
            n, m, q = case
            a, b = height_one(n, m), height_one(m, n)
            p = {"n": n, "m": m, "q": q, "lhs_index": _idx(a), "rhs_index": _idx(b)}
            return _guarded(p, lambda: _equal(p, eval_qmzv(a, q, cfg), eval_qmzv(b, q, cfg),
                                              tolerance))

        scope = f"{len(pairs)} (n,m) pairs x {len(cases) // max(len(pairs), 1)} q points"
        return CheckReport("q_duality", _fan_out(run, cases, workers), scope)

    if kind == "mzv":
        max_weight = int(params.get("max_weight", 7))
        cases = admissible_indices(max_weight)

        def run(k):
            kd = dual(k)
            p = {"k": _idx(k), "dual": _idx(kd)}
            return _guarded(p, lambda: _equal(p, eval_mzv(k, cfg), eval_mzv(kd, cfg, split=_DUAL_SPLIT),
                                              tolerance))

        return CheckReport("mzv_duality", _fan_out(run, cases, workers),
                           f"all admissible k with weight <= {max_weight}")

    if kind == "double_tail":
        max_weight = int(params.get("max_weight", 5))
        p_max = int(params.get("p_max", 3))
        n_max = int(params.get("n_max", 3))
        cases = [(k, pp, nn) for k in admissible_indices(max_weight)
                 for pp in range(p_max + 1) for nn in range(n_max + 1)]

        def run(case):
            k, pp, nn = case
            kd = dual(k)
            p = {"k": _idx(k), "dual": _idx(kd), "p": pp, "n": nn}
            return _guarded(p, lambda: _equal(
                p, eval_double_tail(k, pp, nn, cfg),
                eval_double_tail(kd, nn, pp, cfg, split=_DUAL_SPLIT), tolerance))

        return CheckReport("double_tail_duality", _fan_out(run, cases, workers),
                           f"weight <= {max_weight}, p <= {p_max}, n <= {n_max}")

    raise DomainError(f"unknown duality kind {kind!r}")


# --------------------------------------------------------------------------
# order relations


def _raising_cases(k: MultiIndex, positions: Sequence[int], r: int, n: int, q: float,
                 cfg: EvalConfig) -> list[CheckInstance]:
    out: list[CheckInstance] = []
    base = {"k": _idx(k), "q": q}
    for j in positions:
        kb = _bump(k, j)
        p = dict(base, j=j, relation="qmzv")
        out.append(_guarded(p, lambda: _strict(
            p, _sharp(lambda c: eval_qmzv(kb, q, c), cfg), _sharp(lambda c: eval_qmzv(k, q, c), cfg))))
        p2 = dict(base, j=j, n=n, relation="tail")
        out.append(_guarded(p2, lambda: _strict(
            p2, _sharp(lambda c: eval_qmzv_tail(kb, n, q, c), cfg),
            _sharp(lambda c: eval_qmzv_tail(k, n, q, c), cfg))))
        p3 = dict(base, j=j, r=r, relation="r_extension")
        out.append(_guarded(p3, lambda: _strict(
            p3, _sharp(lambda c: eval_qmzv_r(kb, r, q, c), cfg),
            _sharp(lambda c: eval_qmzv_r(k, r, q, c), cfg))))
    p4 = dict(base, r=r, relation="r_step")
    out.append(_guarded(p4, lambda: _strict(
        p4, _sharp(lambda c: eval_qmzv_r(k, r + 1, q, c), cfg),
        _sharp(lambda c: eval_qmzv_r(k, r, q, c), cfg))))
    p5 = dict(base, r=r, relation="r_vs_append_one")
    out.append(_guarded(p5, lambda: _strict(
        p5, _sharp(lambda c: eval_qmzv_r(k, r, q, c), cfg),
        _sharp(lambda c: eval_qmzv(k.concat((1,)), q, c), cfg))))
    return out


def verify_order_relations(relation: str, params: dict | None = None, grid=CHECK_GRID,
                           cfg: EvalConfig | None = None, *, workers: int = 1) -> CheckReport:
    """Check one family of pointwise order relations over the grid.

    ``q_term_bound`` (params ``m_max``): ``0 < q^m/[m:q] < 1/m``.
    ``raising_order`` (params ``k``, optional ``j``, ``r``, ``n``): raising one
    part, raising r, and ``zeta[k;r:q) < zeta[k,1:q]`` all decrease the value.
    ``depth_order`` (``d_max``): ``zeta[2,{1}^(d+1):q] < zeta[2,{1}^d:q]``.
    ``double_tail_order`` (``k``, ``d_max``): comparisons of ``zeta(.)_{0,1}``.
    ``maximum_element`` (``max_weight``): ``zeta[k:q] <= zeta[2:q]``, equality only at k=(2).
    ``r_extension_upper`` (``max_weight``, ``r_max``): ``zeta[k;r:q) < zeta[2:q]``.
    """
    params = dict(params or {})
    cfg = cfg or EvalConfig()
    qs = _grid_points(grid)

    if relation == "q_term_bound":
        m_max = int(params.get("m_max", 10))
        if m_max < 1:
            raise DomainError("m_max must be >= 1")
        out = []
        for m in range(1, m_max + 1):
            for q in qs:
                value = q ** m / q_integer(m, q)
                margin = min(value, 1.0 / m - value)
                out.append(CheckInstance({"m": m, "q": q}, value, 1.0 / m, margin, margin > 0))
        return CheckReport(relation, out, f"m=1..{m_max}, {len(qs)} q points")

    if relation == "raising_order":
        k = params.get("k", MultiIndex.of(2, 1))
        if not isinstance(k, MultiIndex):
            k = MultiIndex(tuple(k))
        k.require_admissible()
        positions = params.get("j")
        if positions is None:
            positions = list(range(1, k.depth + 1))
        elif isinstance(positions, int):
            positions = [positions]
        for j in positions:
            if not 1 <= j <= k.depth:
                raise DomainError(f"position j={j} outside 1..{k.depth}")
        r = int(params.get("r", 1))
        n = int(params.get("n", 1))
        if r < 1 or n < 0:
            raise DomainError("raising_order needs r >= 1 and n >= 0")
        chunks = _fan_out(lambda q: _raising_cases(k, positions, r, n, q, cfg), qs, workers)
        return CheckReport(relation, [inst for c in chunks for inst in c],
                           f"k={k}, j in {list(positions)}, r={r}, n={n}, {len(qs)} q points")

    if relation == "depth_order":
        d_max = int(params.get("d_max", 6))
        cases = [(d, q) for d in range(d_max + 1) for q in qs]

        def run(case):
            d, q = case
            p = {"d": d, "q": q}
            return _guarded(p, lambda: _strict(
                p, _sharp(lambda c: eval_qmzv(height_one(0, d + 1), q, c), cfg),
                _sharp(lambda c: eval_qmzv(height_one(0, d), q, c), cfg)))

        return CheckReport(relation, _fan_out(run, cases, workers),
                           f"d=0..{d_max}, {len(qs)} q points")

    if relation == "double_tail_order":
        k = params.get("k", MultiIndex.of(2, 1))
        if not isinstance(k, MultiIndex):
            k = MultiIndex(tuple(k))
        k.require_admissible()
        d_max = int(params.get("d_max", 6))
        out = []
        for j in range(1, k.depth + 1):
            kb = _bump(k, j)
            p = {"k": _idx(k), "j": j, "relation": "raise_part"}
            out.append(_guarded(p, lambda: _strict(
                p, _sharp(lambda c: eval_double_tail(kb, 0, 1, c), cfg),
                _sharp(lambda c: eval_double_tail(k, 0, 1, c), cfg))))
        for d in range(1, d_max + 1):
            p = {"d": d, "relation": "add_one"}
            out.append(_guarded(p, lambda: _strict(
                p, _sharp(lambda c: eval_double_tail(height_one(0, d), 0, 1, c), cfg),
                _sharp(lambda c: eval_double_tail(height_one(0, d - 1), 0, 1, c), cfg))))
        return CheckReport(relation, out, f"k={k}, d=1..{d_max}")

    if relation == "maximum_element":
        max_weight = int(params.get("max_weight", 6))
        top = MultiIndex.of(2)
        indices = admissible_indices(max_weight)

        def run(q):
            ref = eval_qmzv(top, q, cfg)
            rows = []
            for k in indices:
                p = {"k": _idx(k), "q": q}
                if k == top:
                    rows.append(CheckInstance(p, ref.value, ref.value, 0.0, True,
                                              "equality: maximum element"))
                    continue
                rows.append(_guarded(p, lambda: _strict(
                    p, _sharp(lambda c: eval_qmzv(k, q, c), cfg), ref)))
            return rows

        chunks = _fan_out(run, qs, workers)
        return CheckReport(relation, [inst for c in chunks for inst in c],
                           f"{len(indices)} admissible indices (weight <= {max_weight}), "
                           f"{len(qs)} q points")

    if relation == "r_extension_upper":
        max_weight = int(params.get("max_weight", 6))
        r_max = int(params.get("r_max", 3))
        if r_max < 1:
            raise DomainError("r_max must be >= 1")
        top = MultiIndex.of(2)
        indices = admissible_indices(max_weight)

        def run(q):
            ref = eval_qmzv(top, q, cfg)
            rows = []
            for k in indices:
                for r in range(1, r_max + 1):
                    p = {"k": _idx(k), "r": r, "q": q}
                    rows.append(_guarded(p, lambda: _strict(
                        p, _sharp(lambda c: eval_qmzv_r(k, r, q, c), cfg), ref)))
            return rows

        chunks = _fan_out(run, qs, workers)
        return CheckReport(relation, [inst for c in chunks for inst in c],
                           f"{len(indices)} indices (weight <= {max_weight}), r<={r_max}, "
                           f"{len(qs)} q points")

    raise DomainError(f"unknown relation {relation!r}")


# --------------------------------------------------------------------------
# monotonicity by sampling


def default_sample_points(count: int = 17) -> list[float]:
    return [i / (count + 1) for i in range(1, count + 1)]


def _one_term(m: int, q: float) -> float:
    return q ** m / q_integer(m, q)


def _x_ratio(x: float, q: float) -> float:
    return x * q ** (x - 1) / -math.expm1(x * math.log(q))


def _qmzv_term(ms: Sequence[int], k: int, q: float) -> float:
    log_val = ms[0] * (k - 1) * math.log(q) - k * math.log(q_integer(ms[0], q))
    log_val -= sum(math.log(q_integer(m, q)) for m in ms[1:])
    return math.exp(log_val)


def verify_monotonicity(target: str, params: dict | None = None,
                        sample_points: Sequence[float] | None = None) -> CheckReport:
    """Sampled strict monotonicity of a closed-form function.

    ``single_term_q`` (``m``): ``q -> q^m/[m:q]`` increasing.
    ``x_ratio`` (``q``): ``x -> x q^(x-1)/(1-q^x)`` decreasing for x >= 1.
    ``qmzv_term`` (``m`` tuple non-increasing, ``k >= d+1``):
    ``q -> q^(m1(k-1)) / ([m1:q]^k [m2:q]...[md:q])`` increasing.
    """
    params = dict(params or {})
    if target == "single_term_q":
        m = int(params.get("m", 2))
        if m < 1:
            raise DomainError("m must be >= 1")
        pts = list(sample_points or default_sample_points())
        for x in pts:
            QParam(x)
        f, increasing, label = (lambda x: _one_term(m, x)), True, {"m": m}
    elif target == "x_ratio":
        q = QParam(params.get("q", 0.5)).q
        pts = list(sample_points or range(1, 11))
        if any(x < 1 for x in pts):
            raise DomainError("x_ratio is only claimed on x >= 1")
        f, increasing, label = (lambda x: _x_ratio(float(x), q)), False, {"q": q}
    elif target == "qmzv_term":
        ms = tuple(int(v) for v in params.get("m", (2,)))
        k = int(params.get("k", 3))
        if not ms or any(v < 1 for v in ms):
            raise DomainError("m entries must be positive")
        if any(a < b for a, b in zip(ms, ms[1:])):
            raise DomainError("need m1 >= m2 >= ... >= md")
        if k < len(ms) + 1:
            raise DomainError(f"need k >= d + 1 = {len(ms) + 1}, got {k}")
        pts = list(sample_points or default_sample_points())
        for x in pts:
            QParam(x)
        f, increasing, label = (lambda x: _qmzv_term(ms, k, x)), True, {"m": list(ms), "k": k}
    else:
        raise DomainError(f"unknown monotonicity target {target!r}")

    pts = sorted(pts)
    values = [f(x) for x in pts]
    out = []
    for (x0, v0), (x1, v1) in zip(zip(pts, values), zip(pts[1:], values[1:])):
        margin = (v1 - v0) if increasing else (v0 - v1)
        out.append(CheckInstance(dict(label, x0=x0, x1=x1), v0, v1, margin, margin > 0))
    direction = "increasing" if increasing else "decreasing"
    return CheckReport(f"monotone_{target}", out, f"{direction} on {len(pts)} sample points")
