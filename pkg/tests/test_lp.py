import numpy as np
import pytest

from ikepsim.lp import (
    DegeneracyError,
    LinearProgram,
    LpInfeasible,
    LpOptimal,
    LpUnbounded,
    solve_lp,
)
from ikepsim.verify import verify_lp


def test_single_bound():
    res = solve_lp(LinearProgram(c=[1.0], A=[[1.0]], senses=["<="], b=[3.0]))
    assert isinstance(res, LpOptimal)
    assert res.value == pytest.approx(3.0)
    assert res.x[0] == pytest.approx(3.0)
    assert res.active_rows == (0,)


def test_simplex_on_equality():
    res = solve_lp(LinearProgram(c=[1.0, 1.0], A=[[1.0, 1.0]], senses=["="],
                                 b=[1.0], lower=[0.0, 0.0]))
    assert res.value == pytest.approx(1.0)


def test_core_lp_of_single_edge_game():
    # max eps subject to x1 >= eps, x2 >= eps, x1 + x2 = 1
    res = solve_lp(LinearProgram(
        c=[0.0, 0.0, 1.0],
        A=[[1, 0, -1], [0, 1, -1], [1, 1, 0]],
        senses=[">=", ">=", "="], b=[0.0, 0.0, 1.0]))
    assert res.value == pytest.approx(0.5)
    assert res.x[:2] == pytest.approx([0.5, 0.5])


def test_unbounded_and_infeasible():
    assert isinstance(solve_lp(LinearProgram(
        c=[1.0], A=[[1.0]], senses=[">="], b=[0.0])), LpUnbounded)
    assert isinstance(solve_lp(LinearProgram(
        c=[1.0], A=[[1.0], [1.0]], senses=["<=", ">="], b=[0.0, 2.0])),
        LpInfeasible)


def test_minimization_orientation():
    res = solve_lp(LinearProgram(c=[2.0], A=[[1.0]], senses=[">="], b=[4.0],
                                 maximize=False))
    assert res.value == pytest.approx(8.0)


def test_degenerate_cycling_guard():
    # Beale's classic cycling example; Bland's rule must still terminate
    A = [[0.25, -60.0, -1.0 / 25.0, 9.0],
         [0.5, -90.0, -1.0 / 50.0, 3.0],
         [0.0, 0.0, 1.0, 0.0]]
    b = [0.0, 0.0, 1.0]
    c = [-0.75, 150.0, -0.02, 6.0]
    res = solve_lp(LinearProgram(c=c, A=A, senses=["<="] * 3, b=b,
                                 maximize=False,
                                 lower=[0.0] * 4))
    assert isinstance(res, LpOptimal)
    assert res.value == pytest.approx(-0.05)


def test_exact_mode_certifies_float():
    lp = LinearProgram(
        c=[0.0, 0.0, 1.0],
        A=[[1, 0, -1], [0, 1, -1], [1, 1, 0]],
        senses=[">=", ">=", "="], b=[0.0, 0.0, 1.0])
    f = solve_lp(lp)
    e = solve_lp(lp, exact=True)
    assert f.value == pytest.approx(e.value, abs=1e-12)
    assert np.allclose(f.x, e.x, atol=1e-12)


def test_dimension_and_sense_validation():
    with pytest.raises(Exception):
        LinearProgram(c=[1.0, 2.0], A=[[1.0]], senses=["<="], b=[1.0])
    with pytest.raises(Exception):
        LinearProgram(c=[1.0], A=[[1.0]], senses=["<>"], b=[1.0])


def test_oracle_suite_vertex_enumeration_and_fm():
    ok, msg = verify_lp(n_cases=200)
    assert ok, msg
