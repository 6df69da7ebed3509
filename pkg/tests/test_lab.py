import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pcompact import lab
from pcompact.errors import BenchmarkInvalidError, GridMismatchError, UndefinedOrderError
from pcompact.operators import Grid1D, GridFunction


def test_norms_scaled_by_point_count():
    e = lab.norms_of([3.0, -4.0, 0.0, 0.0])
    assert e.l1 == pytest.approx(7 / 4)
    assert e.l2 == pytest.approx(math.sqrt(25 / 4))
    assert e.linf == 4.0


def test_norms_need_matching_grids():
    a = GridFunction(Grid1D(0.0, 1.0, 10), np.zeros(10))
    b = GridFunction(Grid1D(0.0, 2.0, 10), np.zeros(10))
    with pytest.raises(GridMismatchError):
        lab.error_norms(a, b)
    with pytest.raises(ValueError):
        lab.error_norms(a, b)


@settings(max_examples=50, deadline=None)
@given(p=st.floats(0.5, 16.0), c=st.floats(1e-6, 1e3), h1=st.floats(0.01, 1.0), r=st.floats(1.1, 4.0))
def test_order_recovers_power_law(p, c, h1, r):
    h2 = h1 / r
    assert lab.estimate_order(c * h1**p, c * h2**p, h1, h2) == pytest.approx(p, rel=1e-9)


def test_order_undefined():
    with pytest.raises(UndefinedOrderError):
        lab.estimate_order(0.0, 1.0, 1.0, 0.5)
    with pytest.raises(UndefinedOrderError):
        lab.estimate_order(1.0, 0.5, 1.0, 1.0)
    with pytest.raises(ValueError):
        lab.estimate_order(float("nan"), 0.5, 1.0, 0.5)


def test_grid_points_mapping():
    assert lab.grid_points("linear", [40, 100]) == [400, 1000]
    assert lab.grid_points("burgers", [120]) == [120]


def test_problem_for_rejects_unknown_case():
    with pytest.raises(ValueError):
        lab.problem_for("heat", 100, 6)


def test_convergence_study_burgers():
    st_ = lab.convergence_study("burgers", "PC4", [120, 180])
    assert st_.complete and st_.label == "PC4"
    assert st_.p_endpoint() == pytest.approx(4.0, abs=0.5)
    rows = st_.to_csv().strip().splitlines()
    assert rows[0] == "scheme,n,l1,l2,linf,p_endpoint"
    assert len(rows) == 3 and rows[1].startswith("PC4,120,")
    assert len(st_.p_consecutive()) == 1


def test_convergence_study_records_failure():
    st_ = lab.convergence_study("linear", "PC8", [400, 500], t_final=800.0, dt=4.0)
    assert not st_.complete
    assert set(st_.failures) == {400, 500}
    assert "nan" in st_.to_csv()
    assert all(math.isnan(v) for v in st_.p_consecutive())


def test_convergence_study_validation():
    with pytest.raises(ValueError):
        lab.convergence_study("linear", "PC4", [400])
    with pytest.raises(ValueError):
        lab.convergence_study("plasma", "PC4", [400, 500])
    with pytest.raises(ValueError):
        lab.ConvergenceStudy("PC4", "linear", [500, 400], [1.0, 2.0], [None, None])


def test_benchmark_too_short():
    with pytest.raises(BenchmarkInvalidError):
        lab.benchmark_pair("PC4", "C4", n=200, steps=2, repeats=1)


def test_case_report_csv():
    r = lab.CaseReport("PC6", "C6", 100, 10, 0.6, 1.0, 0.3, 0.5)
    assert r.pair == "PC6:C6"
    assert r.decrease_pct == pytest.approx(40.0)
    assert r.kernel_decrease_pct == pytest.approx(40.0)
    lines = r.to_csv().splitlines()
    assert lines[0] == "pair,n,steps,t_pc_ms,t_c_ms,decrease_pct"
    assert lines[1] == "PC6:C6,100,10,600,1000,40"
    assert len(r.to_csv(header=False).splitlines()) == 1
