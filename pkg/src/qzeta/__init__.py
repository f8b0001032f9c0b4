"""Certified numerics for multiple q-zeta values, their tails and r-extensions,
classical multiple zeta values and double tails, with checkers for the
duality, order and norm statements relating them."""

from .bounds import (
    CheckInstance,
    CheckReport,
    omega_bounds,
    verify_duality,
    verify_monotonicity,
    verify_order_relations,
    verify_tail_sandwich,
)
from .errors import DomainError, IndexParseError
from .indices import (
    MultiIndex,
    admissible_indices,
    dual,
    height_one,
    index_stats,
    parse_index,
    run_decomposition,
    sequence_stats,
)
from .norms import (
    ConvergenceReport,
    FunctionSpec,
    NormEstimate,
    QGrid,
    SequenceFamily,
    convergence_experiment,
    divergence_witness,
    make_sequence,
    sup_norm_estimate,
)
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

__version__ = "0.1.0"
