import pytest

from uvcc import cost
from uvcc.lowering import LoweringMethod

TABLE1 = {
    "exponential": [4, 48, 320, 1792],
    "givens": [3, 13, 41, 142],
    "redundant": [3, 13, 25, 42],
}


@pytest.mark.parametrize("method", list(TABLE1))
def test_table1_cells(method):
    assert [cost.cnot_count_table1(method, m) for m in (1, 2, 3, 4)] == TABLE1[method]


def test_table2_examples():
    rel = cost.CostModel(2, 3, "relative")
    assert cost.cnot_count_table2("givens", rel, 3) == 44
    assert cost.cnot_count_table2("redundant", rel, 3) == 28
    assert cost.table2_formula("givens", rel) == "28m-40"
    assert cost.table2_formula("redundant", rel) == "20m-32"
    with pytest.raises(ValueError):
        cost.cnot_count_table2("exponential", rel, 3)
    with pytest.raises(ValueError):
        cost.cnot_count_table2("givens", rel, 1)


@pytest.mark.parametrize("A,B", [(2, 2), (2, 3), (3, 1)])
@pytest.mark.parametrize("kind", ["full", "relative"])
def test_table2_golden_and_crossover(A, B, kind):
    model = cost.CostModel(A, B, kind)
    for m in range(2, 7):
        g = cost.cnot_count_table2("givens", model, m)
        r = cost.cnot_count_table2("redundant", model, m)
        # difference grows linearly from zero at m = 1
        factor = 12 * A - 4 if kind == "full" else 6 * A - 4
        assert g - r == factor * (m - 1)
        assert r < g
        assert cost.cnot_count_table2("givens", model, m + 1) >= g


def test_table1_monotone_and_crossover():
    for meth in LoweringMethod:
        vals = [cost.cnot_count_table1(meth, m) for m in range(1, 8)]
        assert vals == sorted(vals)
    for m in range(3, 9):
        assert cost.cnot_count_table1("redundant", m) < cost.cnot_count_table1("givens", m)


def test_reduction_percent():
    assert cost.reduction_percent(cost.CostModel(2, 3, "relative")) == pytest.approx(0.2857, abs=1e-4)
    assert cost.reduction_percent(cost.CostModel(10 ** 6, 3, "full")) == pytest.approx(0.5, abs=1e-5)
    assert cost.reduction_percent(cost.CostModel(1, 0, "full")) == pytest.approx(1 - 20 / 28)
    assert 0 < cost.reduction_percent(cost.CostModel(2, 3), m=5) < 1


def test_toffoli_leading():
    model = cost.CostModel(2, 3)
    assert cost.toffoli_leading("redundant", model) == "8m + C"
    assert cost.toffoli_leading("givens", model) == "8m + C'"
    assert cost.toffoli_leading("redundant", cost.CostModel(5, 3)) == "14m + C"


def test_measured_audits():
    recs = {(r.method, r.m): r for r in cost.audit_table1()}
    assert recs[("exponential", 3)].measured == 320
    assert recs[("redundant", 2)].deviation in (0, 1)
    assert all(r.ok for r in recs.values())
    merged = {(r.method, r.m): r.measured for r in cost.audit_table1(mcr="multiplex-merge")}
    assert merged[("givens", 3)] == 41
    assert merged[("redundant", 3)] == 25


def test_model_validation():
    with pytest.raises(ValueError):
        cost.CostModel(2, 3, "magic")
    assert not cost.CostModel(2, 3).valid_for("redundant", 2)
    assert cost.CostModel(2, 3).valid_for("givens", 2)


def test_report_serialization():
    d = cost.table2_report(cost.CostModel()).to_dict()
    assert d["counts"]["givens"]["2"] == 16
    assert d["formulas"]["redundant"] == "20m-32"
