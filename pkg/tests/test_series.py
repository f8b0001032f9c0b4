from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import anchors as A
from oracles import naive_qmzv, qint_naive, qmzv_term, zeta_depth2
from qzeta.errors import DomainError
from qzeta.indices import MultiIndex, height_one
from qzeta.series import (
    EvalConfig,
    QParam,
    SeriesResult,
    eval_double_tail,
    eval_double_tail_direct,
    eval_mzv,
    eval_mzv_direct,
    eval_qmzv,
    eval_qmzv_r,
    eval_qmzv_tail,
    index_word,
    q_integer,
)

K = MultiIndex.of


def contains(res: SeriesResult, truth: float, slack: float = 1e-13) -> bool:
    """``truth`` lies in the certified bracket, up to float round-off."""
    scale = slack * max(1.0, abs(truth))
    return res.value - scale <= truth <= res.value + res.remainder_bound + scale


# q-integer

@pytest.mark.parametrize("m, q, expected", [(1, 0.3, 1.0), (3, 0.5, 1.75), (2, 0.5, 1.5)])
def test_q_integer_examples(m, q, expected):
    assert q_integer(m, q) == pytest.approx(expected, rel=1e-15)


@given(st.integers(1, 200), st.floats(1e-4, 1 - 1e-6))
def test_q_integer_matches_geometric_sum(m, q):
    assert q_integer(m, q) == pytest.approx(qint_naive(m, q), rel=1e-12)
    assert q_integer(m, q) >= 1.0


def test_q_integer_domain():
    with pytest.raises(DomainError):
        q_integer(0, 0.5)


@pytest.mark.parametrize("q", [0.0, 1.0, -0.2, 1.5, float("nan")])
def test_qparam_rejects(q):
    with pytest.raises(DomainError):
        QParam(q)


def test_eval_config_validation():
    with pytest.raises(DomainError):
        EvalConfig(epsilon=0)
    with pytest.raises(DomainError):
        EvalConfig(max_terms=1)
    with pytest.raises(DomainError):
        EvalConfig(mode="fast")


# q-MZV anchors

def test_zeta2_at_half():
    res = eval_qmzv(K(2), 0.5)
    assert res.certified and res.remainder_bound <= 1e-10
    assert contains(res, A.Z2_Q05)
    assert abs(res.value - 0.68601) < 1e-3


def test_zeta2_small_q():
    res = eval_qmzv(K(2), 0.01)
    assert res.value < 0.02
    assert contains(res, A.Z2_Q001)


def test_zeta2_near_one():
    res = eval_qmzv(K(2), 0.999)
    assert res.certified
    assert abs(res.value - A.ZETA2) < 0.01


@pytest.mark.parametrize("k, truth", [((3,), A.Z3_Q05), ((2, 1), A.Z21_Q05)])
def test_depth_two_anchor(k, truth):
    assert contains(eval_qmzv(MultiIndex(k), 0.5), truth)


def test_tail_anchors():
    assert contains(eval_qmzv_tail(K(2), 1, 0.5), A.Z2_Q05_TAIL1)
    assert contains(eval_qmzv_tail(K(2, 1), 1, 0.5), A.Z21_Q05_TAIL1)
    assert abs(eval_qmzv_tail(K(2), 1, 0.5).value - 0.18601) < 1e-3


@pytest.mark.parametrize("k", [(2,), (2, 1), (3,)])
def test_tail_zero_is_full_value(k):
    k = MultiIndex(k)
    assert eval_qmzv_tail(k, 0, 0.5) == eval_qmzv(k, 0.5)


def test_tail_strictly_decreasing_to_zero():
    vals = [eval_qmzv_tail(K(2), n, 0.5).value for n in range(0, 12)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1e-3


def test_r_extension_anchor():
    res = eval_qmzv_r(K(2), 1, 0.5)
    assert contains(res, A.Z2R1_Q05)
    assert abs(res.value - 0.2416) < 1e-3


def test_r_extension_inner_floor_one_is_tail_difference():
    # zeta[k;r:q) with the extra slot restricted to m > 1 equals
    # zeta[k;r:q) - zeta[k:q]_1
    for k, r in [(K(2), 2), (K(2, 1), 3)]:
        full = eval_qmzv_r(k, r, 0.5, EvalConfig(1e-14)).value
        tail = eval_qmzv_tail(k, 1, 0.5, EvalConfig(1e-14)).value
        rest = eval_qmzv_r(k, r, 0.5, EvalConfig(1e-14), inner_floor=1).value
        assert rest == pytest.approx(full - tail, abs=1e-12)


@pytest.mark.parametrize("q", [0.2, 0.5, 0.8])
def test_r_extension_orderings(q):
    for k in [K(2), K(2, 1), K(3, 2)]:
        r1 = eval_qmzv_r(k, 1, q)
        r2 = eval_qmzv_r(k, 2, q)
        kk = eval_qmzv(k.concat((1,)), q)
        assert r2.upper < r1.value
        assert r1.upper < kk.value


def test_invalid_inputs():
    with pytest.raises(DomainError):
        eval_qmzv(K(1, 2), 0.5)
    with pytest.raises(DomainError):
        eval_qmzv_tail(K(2), -1, 0.5)
    with pytest.raises(DomainError):
        eval_qmzv_r(K(2), 0, 0.5)
    with pytest.raises(DomainError):
        eval_qmzv(K(2), 1.0)


# naive oracle agreement

@pytest.mark.parametrize("k", [(2,), (3,), (2, 1), (3, 2), (2, 1, 1), (4, 1, 2)])
@pytest.mark.parametrize("q", [0.3, 0.7, 0.95])
def test_empirical_mode_matches_naive_loops(k, q):
    cutoff = 40
    res = eval_qmzv(MultiIndex(k), q, EvalConfig(mode="empirical", max_terms=cutoff))
    assert res.terms_used == cutoff
    assert res.value == pytest.approx(naive_qmzv(k, q, cutoff), rel=1e-12)


def test_empirical_tail_and_r_match_naive():
    cfg = EvalConfig(mode="empirical", max_terms=30)
    assert eval_qmzv_tail(K(2, 1), 3, 0.6, cfg).value == pytest.approx(
        naive_qmzv((2, 1), 0.6, 30, floor=3), rel=1e-12)
    assert eval_qmzv_r(K(3, 1), 2, 0.6, cfg).value == pytest.approx(
        naive_qmzv((3, 1), 0.6, 30, r=2), rel=1e-12)


@pytest.mark.parametrize("k", [(2,), (2, 1), (3, 2)])
@pytest.mark.parametrize("q", [0.3, 0.5, 0.7])
def test_tail_consistency_slices(k, q):
    cfg = EvalConfig(1e-13)
    kk = MultiIndex(k)
    for n in range(0, 6):
        drop = eval_qmzv_tail(kk, n, q, cfg).value - eval_qmzv_tail(kk, n + 1, q, cfg).value
        # the slice m_d = n + 1, summed by brute force far enough to converge
        d = len(k)
        if d == 1:
            slice_sum = qmzv_term((n + 1,), k, q)
        else:
            slice_sum = math.fsum(qmzv_term((m, n + 1), k, q) for m in range(n + 2, 600))
        assert drop == pytest.approx(slice_sum, abs=1e-10)


@pytest.mark.parametrize("n, m", [(n, m) for n in range(5) for m in range(5 - n)])
def test_height_one_increasing_in_q(n, m):
    vals = [eval_qmzv(height_one(n, m), q / 10).value for q in range(1, 10)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(1, 3), max_size=3), st.integers(2, 4), st.floats(0.05, 0.95))
def test_values_positive_and_certified(rest, first, q):
    res = eval_qmzv(MultiIndex((first,) + tuple(rest)), q)
    assert res.value > 0
    assert res.certified and res.remainder_bound <= 1e-10


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(1, 3), max_size=2), st.integers(2, 4), st.floats(0.1, 0.95),
       st.integers(5, 200))
def test_bracket_holds_for_truncated_runs(rest, first, q, cut):
    k = MultiIndex((first,) + tuple(rest))
    coarse = eval_qmzv(k, q, EvalConfig(mode="empirical", max_terms=cut))
    fine = eval_qmzv(k, q, EvalConfig(1e-14))
    assert coarse.value <= fine.upper + 1e-15
    assert fine.value <= coarse.upper * (1 + 1e-12)


def test_certificate_cap_reports_uncertified():
    res = eval_qmzv(K(2), 0.9999, EvalConfig(max_terms=1000))
    assert not res.certified
    assert res.terms_used == 1000
    assert res.remainder_bound > 1e-10


def test_near_one_stays_certified():
    res = eval_qmzv(height_one(0, 3), 0.9999)
    assert res.certified


def test_result_serialization():
    d = eval_qmzv(K(2), 0.5).to_dict()
    assert list(d) == ["value", "remainder_bound", "terms_used", "certified"]
    assert SeriesResult(1.0, math.inf, 3, False).to_dict()["remainder_bound"] is None


# classical MZVs and double tails

def test_index_word():
    assert index_word((2, 1)) == (0, 1, 1)
    assert index_word((3,)) == (0, 0, 1)


@pytest.mark.parametrize("k, truth, tol", [
    ((2,), A.ZETA2, 1e-6),
    ((2, 1), A.ZETA3, 1e-6),
    ((3, 1), A.ZETA31, 1e-5),
    ((2, 2), A.ZETA22, 1e-10),
    ((2, 1, 1), A.ZETA4, 1e-10),
    ((11,), A.ZETA11, 1e-10),
])
def test_mzv_anchors(k, truth, tol):
    res = eval_mzv(MultiIndex(k))
    assert res.certified
    assert abs(res.value - truth) < tol
    assert contains(res, truth, slack=1e-12)


def test_mzv_against_hurwitz_oracle():
    for a, b in [(2, 3), (4, 1), (3, 3)]:
        assert eval_mzv(K(a, b)).value == pytest.approx(zeta_depth2(a, b), abs=1e-11)


def test_split_points_agree():
    for k in [K(2, 1), K(3, 1, 2), K(2, 2, 1, 1)]:
        a = eval_mzv(k).value
        b = eval_mzv(k, split=1 / 3).value
        c = eval_mzv(k, split=0.7).value
        assert a == pytest.approx(b, abs=1e-11) and a == pytest.approx(c, abs=1e-11)


def test_double_tail_anchors():
    assert eval_double_tail(K(2), 0, 0).value == pytest.approx(A.ZETA2, abs=1e-11)
    assert contains(eval_double_tail(K(2), 1, 0), A.DT_2_P1, slack=1e-12)
    assert contains(eval_double_tail(K(3), 1, 0), A.DT_3_P1, slack=1e-12)
    assert contains(eval_double_tail(K(2, 1), 0, 1), A.DT_21_N1, slack=1e-12)
    assert contains(eval_double_tail(K(10), 1, 0), A.DT_10_P1, slack=1e-12)
    assert contains(eval_double_tail(K(2, 1), 2, 1), A.DT_21_P2N1, slack=1e-12)


@pytest.mark.parametrize("s, n", [(2, 3), (3, 1), (5, 4)])
def test_double_tail_reduction_to_prefix(s, n):
    prefix = math.fsum(m ** -s for m in range(1, n + 1))
    full = eval_mzv(K(s)).value
    assert eval_double_tail(K(s), 0, n).value == pytest.approx(full - prefix, abs=1e-11)


@pytest.mark.parametrize("k, p, n", [((3,), 1, 0), ((2, 1), 2, 1), ((3, 2), 1, 2), ((4,), 0, 3)])
def test_direct_route_brackets_integral_route(k, p, n):
    k = MultiIndex(k)
    direct = eval_double_tail_direct(k, p, n, EvalConfig(1e-8))
    split = eval_double_tail(k, p, n)
    assert direct.certified
    assert direct.value <= split.upper + 1e-13
    assert split.value <= direct.upper + 1e-13


def test_direct_mzv_route():
    res = eval_mzv_direct(K(3), EvalConfig(1e-9))
    assert res.certified and contains(res, float(np.float64(1.2020569031595942)), slack=1e-12)


def test_double_tail_domain():
    with pytest.raises(DomainError):
        eval_double_tail(K(2), -1, 0)
    with pytest.raises(DomainError):
        eval_mzv(K(1, 1))
