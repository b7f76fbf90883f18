import random
from fractions import Fraction as F

from hypothesis import given, strategies as st

from kac_chain_lab.lp import INFEASIBLE, OPTIMAL, UNBOUNDED, linprog


def feasible(x, A_ub, b_ub, A_eq, b_eq):
    dot = lambda row: sum(a * v for a, v in zip(row, x))  # noqa: E731
    return (all(v >= 0 for v in x)
            and all(dot(r) <= b for r, b in zip(A_ub, b_ub))
            and all(dot(r) == b for r, b in zip(A_eq, b_eq)))


def test_small_optimum():
    # max x + y with x + 2y <= 4, 3x + y <= 6: optimum at (8/5, 6/5)
    res = linprog([-1, -1], A_ub=[[1, 2], [3, 1]], b_ub=[4, 6])
    assert res.status == OPTIMAL
    assert res.x == (F(8, 5), F(6, 5)) and res.value == F(-14, 5)


def test_equalities_and_negative_right_hand_sides():
    res = linprog([1, 1, 1], A_eq=[[1, -1, 0], [0, 1, -1]], b_eq=[-1, -1])
    assert res.status == OPTIMAL and res.x == (0, 1, 2) and res.value == 3


def test_redundant_equalities_are_dropped():
    res = linprog([1, 2], A_eq=[[1, 1], [2, 2], [1, 1]], b_eq=[3, 6, 3])
    assert res.status == OPTIMAL and res.x == (3, 0)


def test_infeasible_and_unbounded():
    assert linprog([1], A_eq=[[1]], b_eq=[-1]).status == INFEASIBLE
    assert linprog([0, 0], A_ub=[[1, 1]], b_ub=[1], A_eq=[[1, 1]], b_eq=[2]).status == INFEASIBLE
    assert linprog([-1, 0], A_ub=[[-1, 1]], b_ub=[1]).status == UNBOUNDED


def test_degenerate_problem_terminates():
    # a classic cycling example for the largest-coefficient rule
    c = [F(-3, 4), 150, F(-1, 50), 6]
    A = [[F(1, 4), -60, F(-1, 25), 9], [F(1, 2), -90, F(-1, 50), 3], [0, 0, 1, 0]]
    res = linprog(c, A_ub=A, b_ub=[0, 0, 1])
    assert res.status == OPTIMAL and res.value == F(-1, 20)


def random_lp(rng):
    n, m_ub, m_eq = rng.randint(1, 4), rng.randint(0, 4), rng.randint(0, 2)
    r = lambda: F(rng.randint(-4, 4), rng.randint(1, 3))  # noqa: E731
    c = [r() for _ in range(n)]
    A_ub = [[r() for _ in range(n)] for _ in range(m_ub)]
    A_eq = [[r() for _ in range(n)] for _ in range(m_eq)]
    return c, A_ub, [r() for _ in range(m_ub)], A_eq, [r() for _ in range(m_eq)]


@given(st.integers(0, 10 ** 9))
def test_strong_duality_on_random_problems(seed):
    c, A_ub, b_ub, A_eq, b_eq = random_lp(random.Random(seed))
    n = len(c)
    primal = linprog(c, A_ub, b_ub, A_eq, b_eq)
    # dual: maximize b_ub.y + b_eq.z with y <= 0 free z, A_ub^T y + A_eq^T z <= c
    # written over nonnegative variables y' = -y, z = z+ - z-
    cols = [[-row[j] for row in A_ub] + [row[j] for row in A_eq] + [-row[j] for row in A_eq] for j in range(n)]
    cost = [v for v in b_ub] + [-v for v in b_eq] + [v for v in b_eq]
    dual = linprog(cost, A_ub=cols, b_ub=c)
    if primal.status == OPTIMAL:
        assert feasible(primal.x, A_ub, b_ub, A_eq, b_eq)
        assert dual.status == OPTIMAL and -dual.value == primal.value
    elif primal.status == UNBOUNDED:
        assert dual.status == INFEASIBLE
    else:
        assert dual.status in (INFEASIBLE, UNBOUNDED)
