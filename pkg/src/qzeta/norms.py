"""Sup-norm estimates over q in (0, 1) and sequence experiments in that norm.

The sup-norm is estimated by the maximum over a finite grid, which is always
a lower bound for the true supremum. Grids are refined near q = 1, where the
suprema of height-one q-MZVs are approached.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .bounds import _fan_out, _sharp
from .errors import DomainError
from .indices import MultiIndex, height_one
from .series import (
    EvalConfig,
    QParam,
    SeriesResult,
    eval_double_tail,
    eval_mzv,
    eval_qmzv_r,
    eval_qmzv_tail,
)

__all__ = [
    "QGrid",
    "FunctionSpec",
    "NormEstimate",
    "SequenceFamily",
    "ConvergenceRecord",
    "ConvergenceReport",
    "sup_norm_estimate",
    "make_sequence",
    "convergence_experiment",
    "divergence_witness",
    "FAMILIES",
]

FAMILIES = ("T1", "T2", "T3", "T4", "T5", "Q1", "Q2", "V")


@dataclass(frozen=True)
class QGrid:
    points: tuple[float, ...]

    def __post_init__(self) -> None:
        pts = tuple(sorted({QParam(q).q for q in self.points}))
        if not pts:
            raise DomainError("a q-grid needs at least one point")
        object.__setattr__(self, "points", pts)

    @classmethod
    def uniform(cls, count: int = 99, near_one: Sequence[int] = (3, 4)) -> QGrid:
        """``{i/(count+1)}`` plus ``1 - 10^-j`` for each j in ``near_one``."""
        if count < 1:
            raise DomainError("grid count must be >= 1")
        pts = [i / (count + 1) for i in range(1, count + 1)]
        pts += [1.0 - 10.0 ** (-j) for j in near_one]
        return cls(tuple(pts))

    @classmethod
    def default(cls) -> QGrid:
        return cls.uniform()

    def __iter__(self):
        return iter(self.points)

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class FunctionSpec:
    """A q-MZV (``qmzv``), its tail (``tail``, with ``n``) or an r-extension (``r``)."""

    tag: str
    k: MultiIndex
    n: int = 0
    r: int = 1

    def __post_init__(self) -> None:
        if self.tag not in ("qmzv", "tail", "r"):
            raise DomainError(f"unknown function tag {self.tag!r}")
        self.k.require_admissible()
        if self.n < 0:
            raise DomainError("tail parameter must be >= 0")
        if self.r < 1:
            raise DomainError("r must be >= 1")

    @classmethod
    def qmzv(cls, k: MultiIndex) -> FunctionSpec:
        return cls("qmzv", k)

    @classmethod
    def tail(cls, k: MultiIndex, n: int) -> FunctionSpec:
        return cls("tail", k, n=n)

    @classmethod
    def r_extension(cls, k: MultiIndex, r: int) -> FunctionSpec:
        return cls("r", k, r=r)

    def evaluate(self, q: float, cfg: EvalConfig | None = None) -> SeriesResult:
        if self.tag == "r":
            return eval_qmzv_r(self.k, self.r, q, cfg)
        return eval_qmzv_tail(self.k, self.n if self.tag == "tail" else 0, q, cfg)

    @property
    def height_one_params(self) -> tuple[int, int] | None:
        """``(n, m)`` when this is ``zeta[2+n,{1}^m:q]``."""
        if self.tag != "qmzv" or self.k.height != 1:
            return None
        return self.k.parts[0] - 2, self.k.depth - 1

    def __str__(self) -> str:
        if self.tag == "r":
            return f"zeta[{self.k};{self.r}:q)"
        if self.tag == "tail":
            return f"zeta[{self.k}:q]_{self.n}"
        return f"zeta[{self.k}:q]"

    def to_dict(self) -> dict:
        out = {"tag": self.tag, "k": str(self.k)}
        if self.tag == "tail":
            out["n"] = self.n
        if self.tag == "r":
            out["r"] = self.r
        return out


@dataclass
class NormEstimate:
    function: FunctionSpec
    grid_max: float
    argmax_q: float
    closed_form: float | None
    upper_bound: float
    max_error: float
    samples: list[tuple[float, float]] = field(default_factory=list)
    excluded: list[tuple[float, str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "function": str(self.function),
            "grid_max": self.grid_max,
            "argmax_q": self.argmax_q,
            "closed_form": self.closed_form,
            "upper_bound": self.upper_bound,
            "max_error": self.max_error,
            "grid_size": len(self.samples),
            "excluded": [{"q": q, "reason": why} for q, why in self.excluded],
        }


def _zeta2() -> float:
    return eval_mzv(MultiIndex.of(2)).upper


def _grid_values(f: FunctionSpec, grid: QGrid, cfg: EvalConfig, workers: int
                 ) -> tuple[list[tuple[float, SeriesResult]], list[tuple[float, str]]]:
    def run(q):
        try:
            return q, _sharp(lambda c: f.evaluate(q, c), cfg), None
        except Exception as exc:  # noqa: BLE001 - point is excluded and flagged
            return q, None, f"{type(exc).__name__}: {exc}"

    good, bad = [], []
    for q, res, err in _fan_out(run, list(grid.points), workers):
        if res is None:
            bad.append((q, err))
        elif not res.certified:
            bad.append((q, f"not certified (bound {res.remainder_bound!r})"))
            good.append((q, res))
        else:
            good.append((q, res))
    return good, bad


def sup_norm_estimate(f: FunctionSpec, grid: QGrid | None = None, cfg: EvalConfig | None = None,
                      *, workers: int = 1) -> NormEstimate:
    """Grid estimate of ``sup_q |f(q)|`` with the known closed form when available.

    For ``zeta[2+n,{1}^m:q]`` the supremum equals the classical MZV
    ``zeta(2+n,{1}^m)``; every other supported function is bounded by
    ``zeta(2)`` because it is dominated by ``zeta[2:q]``.
    """
    grid = grid or QGrid.default()
    cfg = cfg or EvalConfig()
    values, excluded = _grid_values(f, grid, cfg, workers)
    if not values:
        raise DomainError(f"no grid point of {f} could be evaluated")
    q_best, best = max(values, key=lambda item: (item[1].value, -item[0]))
    closed = None
    if f.height_one_params is not None:
        n, m = f.height_one_params
        closed = eval_mzv(height_one(n, m), cfg).value
    upper = closed if closed is not None else _zeta2()
    return NormEstimate(
        function=f,
        grid_max=best.value,
        argmax_q=q_best,
        closed_form=closed,
        upper_bound=upper,
        max_error=max(res.remainder_bound for _, res in values),
        samples=[(q, res.value) for q, res in values],
        excluded=excluded,
    )


# --------------------------------------------------------------------------
# sequence families


def _affine(pair: Sequence[int]) -> tuple[int, int]:
    a, b = (int(v) for v in pair)
    if a < 1:
        raise DomainError("an increasing map a*n+b needs a >= 1")
    if a + b < 1:
        raise DomainError("a*n+b must be a positive integer for n >= 1")
    return a, b


@dataclass(frozen=True)
class SequenceFamily:
    """One of the sequence shapes built from ``(2,{1}^psi(n), ...)`` and ``r = phi(n)+2``.

    ``T1..T5`` are r-extension sequences, ``Q1``/``Q2`` tail sequences and
    ``V`` the vanishing sequence ``zeta[3,{1}^(n-1);1:q)``. ``psi`` and
    ``phi`` are affine maps ``a*n + b`` given as ``(a, b)``.
    """

    family: str
    k: MultiIndex = MultiIndex.of(2)
    r: int = 1
    psi: tuple[int, int] = (1, 0)
    phi: tuple[int, int] = (1, 0)

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise DomainError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        self.k.require_admissible()
        if self.r < 1:
            raise DomainError("r must be >= 1")
        object.__setattr__(self, "psi", _affine(self.psi))
        object.__setattr__(self, "phi", _affine(self.phi))

    def psi_of(self, n: int) -> int:
        return self.psi[0] * n + self.psi[1]

    def phi_of(self, n: int) -> int:
        return self.phi[0] * n + self.phi[1]

    def describe(self) -> str:
        return {
            "T1": f"zeta[{self.k};phi(n)+2:q)",
            "T2": f"zeta[2,{{1}}^psi(n);{self.r}:q)",
            "T3": "zeta[2,{1}^psi(n);phi(n)+2:q)",
            "T4": f"zeta[2,{{1}}^psi(n),{self.k};{self.r}:q)",
            "T5": f"zeta[2,{{1}}^psi(n),{self.k};phi(n)+2:q)",
            "Q1": "zeta[2,{1}^psi(n):q]_1",
            "Q2": f"zeta[2,{{1}}^psi(n),{self.k}:q]_1",
            "V": "zeta[3,{1}^(n-1);1:q)",
        }[self.family]


def make_sequence(family: SequenceFamily, n: int) -> FunctionSpec:
    """The n-th member (n >= 1) of a sequence family."""
    if n < 1:
        raise DomainError("sequence members are numbered from 1")
    fam = family.family
    if fam == "T1":
        return FunctionSpec.r_extension(family.k, family.phi_of(n) + 2)
    if fam == "V":
        return FunctionSpec.r_extension(MultiIndex((3,) + (1,) * (n - 1)), 1)
    head = (2,) + (1,) * family.psi_of(n)
    with_k = MultiIndex(head + family.k.parts)
    plain = MultiIndex(head)
    if fam == "T2":
        return FunctionSpec.r_extension(plain, family.r)
    if fam == "T3":
        return FunctionSpec.r_extension(plain, family.phi_of(n) + 2)
    if fam == "T4":
        return FunctionSpec.r_extension(with_k, family.r)
    if fam == "T5":
        return FunctionSpec.r_extension(with_k, family.phi_of(n) + 2)
    if fam == "Q1":
        return FunctionSpec.tail(plain, 1)
    return FunctionSpec.tail(with_k, 1)


@dataclass
class ConvergenceRecord:
    n: int
    function: str
    distance: float | None
    analytic_bound: float | None
    probe_value: float
    grid_max: float
    error: float
    norm_floor: float | None = None

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "function": self.function,
            "distance": self.distance,
            "analytic_bound": self.analytic_bound,
            "probe_value": self.probe_value,
            "norm_lower_evidence": self.grid_max,
            "norm_floor": self.norm_floor,
            "error": self.error,
        }


@dataclass
class ConvergenceReport:
    family: str
    candidate: str
    records: list[ConvergenceRecord]
    verdict: str
    probe_q: float
    settings: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "candidate": self.candidate,
            "verdict": self.verdict,
            "probe_q": self.probe_q,
            "settings": self.settings,
            "records": [r.to_dict() for r in self.records],
        }


def _norm_of_qmzv(k: MultiIndex, cfg: EvalConfig) -> float:
    # sup-norm of zeta[k:q]: the MZV for height one, else the zeta(2) ceiling
    if k.height == 1:
        return eval_mzv(k, cfg).upper
    return _zeta2()


def _nearest(points: Sequence[float], target: float) -> float:
    return min(points, key=lambda q: (abs(q - target), q))


def convergence_experiment(family: SequenceFamily, n_range: Sequence[int],
                           grid: QGrid | None = None, cfg: EvalConfig | None = None,
                           *, probe_q: float = 0.5, workers: int = 1) -> ConvergenceReport:
    """Distances from the members of a convergent family to their limit.

    ``T1`` members ``zeta[k;phi(n)+2:q)`` approach ``zeta[k:q]_1`` within
    ``||zeta[k:q]|| * sum_{m>=2} m^-(phi(n)+2)``; ``V`` members vanish in
    norm, bounded by ``zeta(n+2,1)``. Verdict ``converges_to_tail`` /
    ``converges_to_zero`` requires every distance to respect its bound and the
    distance sequence to be non-increasing.
    """
    if family.family not in ("T1", "V"):
        raise DomainError(f"family {family.family} does not converge in norm; "
                          "use divergence_witness instead")
    grid = grid or QGrid.default()
    cfg = cfg or EvalConfig()
    QParam(probe_q)
    ns = sorted(set(int(n) for n in n_range))
    if not ns or ns[0] < 1:
        raise DomainError("n_range must contain positive integers")

    tail_values: dict[float, SeriesResult] = {}
    if family.family == "T1":
        for q, res in zip(grid.points, _fan_out(
                lambda q: eval_qmzv_tail(family.k, 1, q, cfg), list(grid.points), workers)):
            tail_values[q] = res
        k_norm = _norm_of_qmzv(family.k, cfg)

    records = []
    for n in ns:
        f = make_sequence(family, n)
        vals = _fan_out(lambda q: f.evaluate(q, cfg), list(grid.points), workers)
        probe = f.evaluate(probe_q, cfg).value
        grid_max = max(v.value for v in vals)
        if family.family == "T1":
            diffs = [(abs(v.value - tail_values[q].value),
                      v.remainder_bound + tail_values[q].remainder_bound)
                     for q, v in zip(grid.points, vals)]
            distance, err = max(diffs)
            bound = k_norm * eval_double_tail(MultiIndex.of(f.r), 0, 1, cfg).upper
        else:
            distance = grid_max
            err = max(v.remainder_bound for v in vals)
            bound = eval_mzv(MultiIndex.of(n + 2, 1), cfg).upper
        records.append(ConvergenceRecord(n, str(f), distance, bound, probe, grid_max, err))

    within = all(r.distance <= r.analytic_bound + r.error for r in records)
    monotone = all(b.distance <= a.distance + a.error + b.error
                   for a, b in zip(records, records[1:]))
    if within and monotone:
        verdict = "converges_to_tail" if family.family == "T1" else "converges_to_zero"
    else:
        verdict = "inconclusive"
    candidate = f"zeta[{family.k}:q]_1" if family.family == "T1" else "0"
    return ConvergenceReport(family.family, candidate, records, verdict, probe_q,
                             {"sequence": family.describe(), "grid_size": len(grid)})


def _witness_bounds(family: SequenceFamily, f: FunctionSpec, n: int, probe_q: float,
                    cfg: EvalConfig) -> tuple[float, float]:
    """Pointwise ceiling at ``probe_q`` and analytic norm floor for a member."""
    psi = family.psi_of(n)
    if family.family in ("Q1", "Q2"):
        ceiling = eval_qmzv_tail(MultiIndex.of(psi + 2), 0, probe_q, cfg).upper
        floor = eval_double_tail(f.k, 0, 1, cfg).value
    else:
        ceiling = eval_qmzv_tail(MultiIndex.of(psi + 3), 0, probe_q, cfg).upper
        # continuity at q = 1: the norm is at least the MZV zeta(k, r)
        floor = eval_mzv(f.k.concat((f.r,)), cfg).value
    return ceiling, floor


def divergence_witness(family: SequenceFamily, n_range: Sequence[int],
                       grid: QGrid | None = None, probe_q: float = 0.5,
                       cfg: EvalConfig | None = None, *, norm_floor: float = 0.5,
                       probe_ceiling: float = 1e-2, workers: int = 1) -> ConvergenceReport:
    """Evidence that a family vanishes pointwise while its norm stays large.

    Per member: the value at ``probe_q`` (with the analytic pointwise ceiling
    ``zeta[psi(n)+3:q]`` or ``zeta[psi(n)+2:q]``) and the grid maximum (with
    the analytic floor from the classical limit at q = 1). The verdict is
    ``norm_bounded_below`` when every grid maximum is at least ``norm_floor``
    and the last probe value is below ``probe_ceiling``.
    """
    if family.family not in ("T2", "T3", "T4", "T5", "Q1", "Q2"):
        raise DomainError(f"family {family.family} is not a divergence family")
    grid = grid or QGrid.default()
    cfg = cfg or EvalConfig()
    probe_q = QParam(probe_q).q
    ns = sorted(set(int(n) for n in n_range))
    if not ns or ns[0] < 1:
        raise DomainError("n_range must contain positive integers")
    records = []
    for n in ns:
        f = make_sequence(family, n)
        vals = _fan_out(lambda q: f.evaluate(q, cfg), list(grid.points), workers)
        probe = f.evaluate(probe_q, cfg)
        ceiling, floor = _witness_bounds(family, f, n, probe_q, cfg)
        records.append(ConvergenceRecord(
            n, str(f), None, ceiling, probe.value, max(v.value for v in vals),
            max(max(v.remainder_bound for v in vals), probe.remainder_bound), floor))
    bounded = all(r.grid_max >= norm_floor for r in records)
    vanishing = records[-1].probe_value < probe_ceiling
    verdict = "norm_bounded_below" if bounded and vanishing else "inconclusive"
    return ConvergenceReport(family.family, "pointwise 0", records, verdict, probe_q,
                             {"sequence": family.describe(), "grid_size": len(grid),
                              "norm_floor": norm_floor, "probe_ceiling": probe_ceiling})
