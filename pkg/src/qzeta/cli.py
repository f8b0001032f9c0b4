"""``qzeta`` command line: evaluation, duality, norms, verification suites and
sequence experiments.

Exit codes: 0 on success (all checks passed), 1 when any check fails, 2 on
usage or domain errors. Settings resolve as flags > the JSON file named by
``QZETA_CONFIG`` > built-in defaults.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass
from typing import Any, Sequence

from .bounds import (
    CHECK_GRID,
    CheckReport,
    verify_duality,
    verify_monotonicity,
    verify_order_relations,
    verify_tail_sandwich,
)
from .errors import DomainError
from .indices import MultiIndex, admissible_indices, dual, parse_index
from .norms import (
    FAMILIES,
    ConvergenceReport,
    FunctionSpec,
    NormEstimate,
    QGrid,
    SequenceFamily,
    convergence_experiment,
    divergence_witness,
    sup_norm_estimate,
)
from .series import EvalConfig, eval_double_tail, eval_mzv, eval_qmzv_r, eval_qmzv_tail

CONFIG_ENV = "QZETA_CONFIG"
FORMATS = ("json", "csv", "text")
CSV_COLUMNS = ("n", "distance", "analytic_bound", "probe_value", "grid_max")

DEFAULTS = {
    "epsilon": 1e-10,
    "max_terms": 50_000_000,
    "mode": "certified",
    "grid_count": 99,
    "near_one": "3,4",
    "format": None,
    "jobs": 1,
}

SUITES = {
    "duality": ("q_duality", "mzv_duality", "double_tail_duality"),
    "sandwich": ("tail_sandwich",),
    "order": ("q_term_bound", "raising_order", "depth_order", "double_tail_order",
              "maximum_element", "r_extension_upper"),
    "monotonicity": ("monotone_single_term_q", "monotone_x_ratio", "monotone_qmzv_term"),
}
SUITES["all"] = tuple(c for name in ("duality", "sandwich", "order", "monotonicity")
                      for c in SUITES[name])


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    epsilon: float
    max_terms: int
    mode: str
    grid_count: int
    near_one: tuple[int, ...]
    format: str | None
    jobs: int
    grid_given: bool = False

    @property
    def eval_config(self) -> EvalConfig:
        return EvalConfig(self.epsilon, self.max_terms, self.mode)

    @property
    def grid(self) -> QGrid:
        return QGrid.uniform(self.grid_count, self.near_one)

    @property
    def check_grid(self):
        # verification sweeps use {0.1, ..., 0.9} unless a grid was configured
        if self.grid_given:
            return QGrid.uniform(self.grid_count, self.near_one).points
        return CHECK_GRID


def _int_list(text: str) -> tuple[int, ...]:
    text = str(text).strip()
    if not text:
        return ()
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _load_config_file() -> dict:
    path = os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {CONFIG_ENV} file {path!r}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError(f"{CONFIG_ENV} file must hold a JSON object")
    unknown = sorted(set(data) - set(DEFAULTS))
    if unknown:
        raise UsageError(f"unknown keys in {CONFIG_ENV} file: {', '.join(unknown)}")
    return data


def resolve_config(args: argparse.Namespace) -> RunConfig:
    merged = dict(DEFAULTS)
    from_file = _load_config_file()
    merged.update(from_file)
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    near = merged["near_one"]
    near = _int_list(near) if isinstance(near, str) else tuple(int(j) for j in near)
    cfg = RunConfig(
        epsilon=float(merged["epsilon"]),
        max_terms=int(merged["max_terms"]),
        mode=str(merged["mode"]),
        grid_count=int(merged["grid_count"]),
        near_one=near,
        format=merged["format"],
        jobs=int(merged["jobs"]),
        grid_given=getattr(args, "grid_count", None) is not None or "grid_count" in from_file,
    )
    if not (cfg.epsilon > 0 and cfg.max_terms > 0 and cfg.grid_count > 0 and cfg.jobs > 0):
        raise UsageError("epsilon, max-terms, grid-count and jobs must be positive")
    if any(j < 1 for j in cfg.near_one):
        raise UsageError("near-one exponents must be positive")
    if cfg.format is not None and cfg.format not in FORMATS:
        raise UsageError(f"unsupported format {cfg.format!r}")
    if cfg.mode not in ("certified", "empirical"):
        raise UsageError(f"unsupported mode {cfg.mode!r}")
    return cfg


# --------------------------------------------------------------------------
# output


def _clean(obj: Any) -> Any:
    """Round floats to 15 significant digits; non-finite floats become null."""
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, float):
        return float(f"{obj:.15g}") if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.15g}" if math.isfinite(value) else ""
    return str(value)


def _csv_text(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _as_dict(result: Any) -> dict:
    if isinstance(result, list):
        return {"reports": [r.to_dict() for r in result],
                "all_passed": all(r.all_passed for r in result)}
    if isinstance(result, dict):
        return result
    return result.to_dict()


def _text(result: Any) -> str:
    if isinstance(result, list):
        lines = [f"{'PASS' if r.all_passed else 'FAIL'} {r.check_id} "
                 f"instances={len(r.instances)} worst_margin={_fmt(r.worst_margin)}"
                 for r in result]
        for r in result:
            for inst in r.failures:
                lines.append(f"  failed {r.check_id} {json.dumps(_clean(inst.params), sort_keys=True)}")
        return "\n".join(lines) + "\n"
    if isinstance(result, ConvergenceReport):
        lines = [f"family {result.family}: {result.settings.get('sequence', '')}",
                 f"candidate {result.candidate}", f"verdict {result.verdict}"]
        for r in result.records:
            lines.append(f"n={r.n} distance={_fmt(r.distance)} bound={_fmt(r.analytic_bound)} "
                         f"probe={_fmt(r.probe_value)} grid_max={_fmt(r.grid_max)}")
        return "\n".join(lines) + "\n"
    flat = _as_dict(result)
    return "".join(f"{k}: {_fmt(v) if not isinstance(v, (list, dict)) else json.dumps(_clean(v))}\n"
                   for k, v in flat.items())


def _csv(result: Any) -> str:
    if isinstance(result, ConvergenceReport):
        return _csv_text(CSV_COLUMNS, [(r.n, r.distance, r.analytic_bound, r.probe_value, r.grid_max)
                                       for r in result.records])
    if isinstance(result, list):
        return _csv_text(("check_id", "all_passed", "instances", "worst_margin"),
                         [(r.check_id, r.all_passed, len(r.instances), r.worst_margin) for r in result])
    if isinstance(result, NormEstimate):
        return _csv_text(("q", "value"), result.samples)
    flat = {k: v for k, v in _as_dict(result).items() if not isinstance(v, (list, dict))}
    return _csv_text(tuple(flat), [tuple(flat.values())])


def emit_report(result: Any, fmt: str) -> str:
    """Serialize a result; output is byte-stable for fixed inputs."""
    if fmt == "json":
        return json.dumps(_clean(_as_dict(result)), separators=(",", ":")) + "\n"
    if fmt == "csv":
        return _csv(result)
    if fmt == "text":
        return _text(result)
    raise UsageError(f"unsupported format {fmt!r}")


# --------------------------------------------------------------------------
# subcommands


def _index(text: str) -> MultiIndex:
    return parse_index(text).require_admissible()


def cmd_eval(args, cfg: RunConfig):
    k = _index(args.index)
    if args.r is not None and args.tail is not None:
        raise UsageError("--r and --tail are mutually exclusive")
    if args.r is not None:
        return eval_qmzv_r(k, args.r, args.q, cfg.eval_config)
    return eval_qmzv_tail(k, args.tail or 0, args.q, cfg.eval_config)


def cmd_mzv(args, cfg: RunConfig):
    k = _index(args.index)
    if args.p or args.n:
        return eval_double_tail(k, args.p or 0, args.n or 0, cfg.eval_config)
    return eval_mzv(k, cfg.eval_config)


def cmd_dual(args, cfg: RunConfig):
    k = _index(args.index)
    d = dual(k)
    if (cfg.format or "text") == "text":
        return str(d)
    return {"index": str(k), "dual": str(d)}


def cmd_norm(args, cfg: RunConfig):
    k = _index(args.index)
    if args.r is not None and args.tail is not None:
        raise UsageError("--r and --tail are mutually exclusive")
    if args.r is not None:
        f = FunctionSpec.r_extension(k, args.r)
    elif args.tail is not None:
        f = FunctionSpec.tail(k, args.tail)
    else:
        f = FunctionSpec.qmzv(k)
    return sup_norm_estimate(f, cfg.grid, cfg.eval_config, workers=cfg.jobs)


def _run_check(check: str, max_weight: int | None, cfg: RunConfig) -> CheckReport:
    grid, ec, jobs = cfg.check_grid, cfg.eval_config, cfg.jobs
    if check == "q_duality":
        params = {"max_sum": max_weight - 2} if max_weight else {}
        return verify_duality("q_height_one", params, grid, ec, workers=jobs)
    if check == "mzv_duality":
        return verify_duality("mzv", {"max_weight": max_weight or 7}, grid, ec, workers=jobs)
    if check == "double_tail_duality":
        return verify_duality("double_tail", {"max_weight": min(max_weight or 5, 5)}, grid, ec,
                              workers=jobs)
    if check == "tail_sandwich":
        reports = [verify_tail_sandwich(k, 5, grid, ec, workers=jobs)
                   for k in admissible_indices(min(max_weight or 5, 5))]
        instances = [i for r in reports for i in r.instances]
        return CheckReport("tail_sandwich", instances,
                           f"admissible k with weight <= {min(max_weight or 5, 5)}, n=1..5")
    if check in ("maximum_element", "r_extension_upper"):
        return verify_order_relations(check, {"max_weight": max_weight or 6}, grid, ec, workers=jobs)
    if check in SUITES["order"]:
        return verify_order_relations(check, {}, grid, ec, workers=jobs)
    if check.startswith("monotone_"):
        return verify_monotonicity(check[len("monotone_"):])
    raise UsageError(f"unknown check {check!r}")


def cmd_verify(args, cfg: RunConfig):
    suite = args.suite
    if suite in SUITES:
        checks = SUITES[suite]
    elif suite in SUITES["all"]:
        checks = (suite,)
    else:
        known = sorted(set(SUITES) | set(SUITES["all"]))
        raise UsageError(f"unknown suite {suite!r}; choose from {', '.join(known)}")
    if args.max_weight is not None and args.max_weight < 2:
        raise UsageError("--max-weight must be >= 2")
    return [_run_check(c, args.max_weight, cfg) for c in checks]


def _affine_arg(text: str) -> tuple[int, int]:
    vals = _int_list(text)
    if len(vals) != 2:
        raise UsageError(f"expected an affine map as 'a,b', got {text!r}")
    return vals


def cmd_converge(args, cfg: RunConfig):
    family = SequenceFamily(
        args.family,
        k=_index(args.k) if args.k else MultiIndex.of(2),
        r=args.r if args.r is not None else 1,
        psi=_affine_arg(args.psi),
        phi=_affine_arg(args.phi),
    )
    if args.n_max < 1:
        raise UsageError("--n-max must be >= 1")
    ns = range(1, args.n_max + 1)
    if args.family in ("T1", "V"):
        return convergence_experiment(family, ns, cfg.grid, cfg.eval_config,
                                      probe_q=args.probe_q, workers=cfg.jobs)
    return divergence_witness(family, ns, cfg.grid, args.probe_q, cfg.eval_config,
                              norm_floor=args.floor, probe_ceiling=args.ceiling, workers=cfg.jobs)


def build_parser() -> argparse.ArgumentParser:
    # SUPPRESS keeps unset flags out of the namespace, so a flag given before
    # the subcommand is not overwritten by the subcommand's own default
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    g = common.add_argument_group("run configuration")
    g.add_argument("--epsilon", type=float, help="target remainder bound (default 1e-10)")
    g.add_argument("--max-terms", type=int, help="outer cutoff cap (default 5e7)")
    g.add_argument("--mode", choices=("certified", "empirical"))
    g.add_argument("--grid-count", type=int, help="uniform grid points i/(count+1) (default 99)")
    g.add_argument("--near-one", help="extra points 1-10^-j, comma-separated j (default 3,4)")
    g.add_argument("--format", choices=FORMATS)
    g.add_argument("--jobs", type=int, help="worker threads (default 1)")

    parser = argparse.ArgumentParser(prog="qzeta", description=__doc__.split("\n")[0],
                                     parents=[common])
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p = sub.add_parser("eval", parents=[common], help="q-MZV, tail or r-extension at one q")
    p.add_argument("index")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--r", type=int)
    p.add_argument("--tail", type=int)
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("mzv", parents=[common], help="classical MZV or double tail")
    p.add_argument("index")
    p.add_argument("--p", type=int, default=0)
    p.add_argument("--n", type=int, default=0)
    p.set_defaults(handler=cmd_mzv)

    p = sub.add_parser("dual", parents=[common], help="dual index")
    p.add_argument("index")
    p.set_defaults(handler=cmd_dual)

    p = sub.add_parser("norm", parents=[common], help="grid estimate of the sup-norm over q")
    p.add_argument("index")
    p.add_argument("--tail", type=int)
    p.add_argument("--r", type=int)
    p.set_defaults(handler=cmd_norm)

    p = sub.add_parser("verify", parents=[common], help="run verification suites")
    p.add_argument("--suite", default="all")
    p.add_argument("--max-weight", type=int)
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("converge", parents=[common], help="sequence convergence / divergence experiment")
    p.add_argument("--family", required=True, choices=FAMILIES)
    p.add_argument("--k")
    p.add_argument("--r", type=int)
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--psi", default="1,0", help="affine map a,b for psi(n)=a*n+b")
    p.add_argument("--phi", default="1,0", help="affine map a,b for phi(n)=a*n+b")
    p.add_argument("--probe-q", type=float, default=0.5)
    p.add_argument("--floor", type=float, default=0.5)
    p.add_argument("--ceiling", type=float, default=1e-2)
    p.set_defaults(handler=cmd_converge)
    return parser


def _exit_code(result: Any) -> int:
    if isinstance(result, list) and not all(r.all_passed for r in result):
        return 1
    if isinstance(result, CheckReport) and not result.all_passed:
        return 1
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args)
        result = args.handler(args, cfg)
        if isinstance(result, str):
            out = result + "\n"
        else:
            out = emit_report(result, cfg.format or "json")
    except (UsageError, DomainError) as exc:
        print(f"qzeta: error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(out)
    return _exit_code(result)


if __name__ == "__main__":
    sys.exit(main())
