from __future__ import annotations

import pytest

import anchors as A
from qzeta.errors import DomainError
from qzeta.indices import MultiIndex, height_one
from qzeta.norms import (
    FunctionSpec,
    QGrid,
    SequenceFamily,
    convergence_experiment,
    divergence_witness,
    make_sequence,
    sup_norm_estimate,
)
from qzeta.series import EvalConfig

K = MultiIndex.of
COARSE = QGrid.uniform(19, (3,))


def test_grid_validation_and_order():
    g = QGrid((0.5, 0.1, 0.5, 0.9))
    assert g.points == (0.1, 0.5, 0.9)
    with pytest.raises(DomainError):
        QGrid((0.5, 1.0))
    with pytest.raises(DomainError):
        QGrid(())


def test_default_grid():
    g = QGrid.default()
    assert len(g) == 101
    assert g.points[0] == 0.01 and g.points[-1] == pytest.approx(0.9999)
    assert 0.999 in g.points


def test_function_spec_validation():
    with pytest.raises(DomainError):
        FunctionSpec("qmzv", K(1, 2))
    with pytest.raises(DomainError):
        FunctionSpec("bogus", K(2))
    with pytest.raises(DomainError):
        FunctionSpec.r_extension(K(2), 0)
    assert str(FunctionSpec.tail(K(2, 1), 1)) == "zeta[2,1:q]_1"


@pytest.mark.parametrize("k, closed", [((2,), A.ZETA2), ((2, 1), A.ZETA3), ((3, 1), A.ZETA31)])
def test_height_one_closed_forms(k, closed):
    est = sup_norm_estimate(FunctionSpec.qmzv(MultiIndex(k)))
    assert est.closed_form == pytest.approx(closed, abs=1e-9)
    assert est.upper_bound == est.closed_form
    assert est.grid_max <= est.closed_form + 1e-6
    at_0999 = dict(est.samples)[0.999]
    assert abs(at_0999 - closed) / closed < 0.01
    assert est.argmax_q in QGrid.default().points
    assert not est.excluded


def test_non_height_one_uses_zeta2_ceiling():
    est = sup_norm_estimate(FunctionSpec.qmzv(K(3, 2)), COARSE)
    assert est.closed_form is None
    assert est.upper_bound == pytest.approx(A.ZETA2, abs=1e-9)
    est_r = sup_norm_estimate(FunctionSpec.r_extension(K(2), 2), COARSE)
    assert est_r.closed_form is None and est_r.grid_max < est_r.upper_bound


def test_refining_grid_never_decreases_estimate():
    f = FunctionSpec.qmzv(K(2, 1, 1))
    coarse = sup_norm_estimate(f, QGrid.uniform(9, ()))
    finer = sup_norm_estimate(f, QGrid.uniform(19, ()))  # contains the coarse grid
    finest = sup_norm_estimate(f, QGrid.uniform(19, (3, 4)))
    assert set(QGrid.uniform(9, ()).points) <= set(QGrid.uniform(19, ()).points)
    assert coarse.grid_max <= finer.grid_max <= finest.grid_max


def test_uncertifiable_points_are_flagged():
    est = sup_norm_estimate(FunctionSpec.qmzv(K(2)), QGrid((0.5, 0.9999)), EvalConfig(max_terms=100))
    assert [q for q, _ in est.excluded] == [0.9999]


def test_parallel_estimate_identical():
    f = FunctionSpec.qmzv(K(2, 1))
    assert (sup_norm_estimate(f, COARSE, workers=1).to_dict()
            == sup_norm_estimate(f, COARSE, workers=3).to_dict())


# sequences

def test_make_sequence_examples():
    assert make_sequence(SequenceFamily("T1", k=K(2, 1)), 3) == FunctionSpec.r_extension(K(2, 1), 5)
    assert make_sequence(SequenceFamily("T2", r=1), 4) == FunctionSpec.r_extension(K(2, 1, 1, 1, 1), 1)
    assert make_sequence(SequenceFamily("Q1"), 2) == FunctionSpec.tail(K(2, 1, 1), 1)
    assert make_sequence(SequenceFamily("Q2", k=K(3)), 1) == FunctionSpec.tail(K(2, 1, 3), 1)
    assert make_sequence(SequenceFamily("T3"), 2) == FunctionSpec.r_extension(K(2, 1, 1), 4)
    assert make_sequence(SequenceFamily("T4", k=K(2), r=2), 1) == FunctionSpec.r_extension(K(2, 1, 2), 2)
    assert make_sequence(SequenceFamily("T5", k=K(2)), 1) == FunctionSpec.r_extension(K(2, 1, 2), 3)
    assert make_sequence(SequenceFamily("V"), 3) == FunctionSpec.r_extension(K(3, 1, 1), 1)


def test_affine_maps():
    fam = SequenceFamily("T3", psi=(2, 1), phi=(3, -2))
    assert make_sequence(fam, 2) == FunctionSpec.r_extension(MultiIndex((2,) + (1,) * 5), 6)
    with pytest.raises(DomainError):
        SequenceFamily("T3", psi=(0, 3))
    with pytest.raises(DomainError):
        SequenceFamily("T3", phi=(1, -1))
    with pytest.raises(DomainError):
        make_sequence(SequenceFamily("T1"), 0)
    with pytest.raises(DomainError):
        SequenceFamily("T9")


def test_t1_bounds_and_distances():
    rep = convergence_experiment(SequenceFamily("T1", k=K(2, 1)), range(1, 11))
    assert rep.verdict == "converges_to_tail"
    first, last = rep.records[0], rep.records[-1]
    assert first.analytic_bound == pytest.approx(A.ZETA3 * (A.ZETA3 - 1), rel=1e-9)
    assert last.analytic_bound == pytest.approx(A.ZETA3 * A.ZETA12_MINUS_1, rel=1e-9)
    assert abs(first.analytic_bound - 0.2429) < 1e-4
    for r in rep.records:
        assert r.distance <= r.analytic_bound + r.error
    assert last.distance < 1e-3
    assert [r.n for r in rep.records] == list(range(1, 11))


def test_vanishing_family():
    rep = convergence_experiment(SequenceFamily("V"), range(1, 11))
    assert rep.verdict == "converges_to_zero"
    for r in rep.records:
        assert r.distance <= r.analytic_bound + 1e-6
    assert rep.records[-1].distance < 1e-3


def test_convergence_rejects_divergent_family():
    with pytest.raises(DomainError, match="divergence_witness"):
        convergence_experiment(SequenceFamily("T2"), range(1, 3))


def test_divergence_t2():
    rep = divergence_witness(SequenceFamily("T2", r=1), range(1, 9))
    assert rep.verdict == "norm_bounded_below"
    last = rep.records[-1]
    assert last.probe_value < last.analytic_bound  # below zeta[11:0.5]
    assert last.analytic_bound < 1.1e-3
    assert all(r.grid_max >= 0.9 for r in rep.records)
    assert last.norm_floor == pytest.approx(A.ZETA11, abs=1e-9)


def test_divergence_q1_floor_and_refinement():
    rep = divergence_witness(SequenceFamily("Q1"), [8], grid=QGrid.uniform(99, (3, 4, 5)))
    rec = rep.records[0]
    assert rec.norm_floor == pytest.approx(A.DT_10_P1, abs=1e-9)
    assert rec.grid_max > 0.5 and rep.verdict == "norm_bounded_below"
    assert rec.probe_value < rec.analytic_bound


def test_divergence_rejects_convergent_family():
    with pytest.raises(DomainError):
        divergence_witness(SequenceFamily("T1"), range(1, 3))


def test_reports_serialize():
    rep = divergence_witness(SequenceFamily("T4", k=K(2)), [1, 2], grid=COARSE)
    d = rep.to_dict()
    assert d["family"] == "T4" and len(d["records"]) == 2
    assert {"n", "distance", "probe_value", "norm_lower_evidence"} <= set(d["records"][0])


def test_height_one_estimate_matches_lower_bound():
    for n in range(3):
        for m in range(3 - n):
            est = sup_norm_estimate(FunctionSpec.qmzv(height_one(n, m)), COARSE)
            assert est.grid_max <= est.closed_form + 1e-6
