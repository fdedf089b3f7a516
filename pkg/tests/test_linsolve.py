"""Exact LP feasibility, max support, and the implication solver."""

import random
from fractions import Fraction

import pytest

from udpn import (ImplicationSystem, LinearSystem, REL_EQ, REL_GE, REL_LE,
                  UdpnError, brute_implication, feasible, max_support,
                  solve_implications)

from helpers import random_implication_system, random_system

ONE = Fraction(1)


def check_assignment(sys, assignment):
    for v in sys.variables:
        assert assignment[v] >= 0
    for coeffs, rel, const in sys.constraints:
        lhs = sum((a * assignment[v] for v, a in coeffs.items()), Fraction(0))
        if rel == REL_EQ:
            assert lhs == const
        elif rel == REL_LE:
            assert lhs <= const
        else:
            assert lhs >= const


def test_feasible_simple():
    sys = LinearSystem(["x"], [({"x": ONE}, REL_EQ, ONE)])
    assert feasible(sys) == {"x": 1}


def test_infeasible_forces_negative():
    sys = LinearSystem(["x", "y"], [
        ({"x": ONE, "y": ONE}, REL_EQ, ONE),
        ({"x": ONE, "y": -ONE}, REL_EQ, Fraction(3)),
    ])
    assert feasible(sys) is None


def test_feasible_empty_system():
    assert feasible(LinearSystem([], [])) == {}


def test_feasible_rejects_undeclared():
    with pytest.raises(UdpnError):
        LinearSystem(["x"], [({"y": ONE}, REL_EQ, ONE)])
    with pytest.raises(UdpnError):
        LinearSystem(["x", "x"], [])


def test_planted_solutions():
    rng = random.Random(20)
    found = 0
    for _ in range(150):
        sys, planted = random_system(rng)
        solution = feasible(sys)
        if planted is not None:
            assert solution is not None
            found += 1
        if solution is not None:
            check_assignment(sys, solution)
    assert found > 30


def test_max_support_split():
    sys = LinearSystem(["x", "y"], [({"x": ONE, "y": ONE}, REL_EQ, ONE)])
    support, assignment = max_support(sys)
    assert support == {"x", "y"}
    assert assignment["x"] > 0 and assignment["y"] > 0
    check_assignment(sys, assignment)


def test_max_support_pinned():
    sys = LinearSystem(["x", "y"], [
        ({"x": ONE}, REL_EQ, Fraction(0)),
        ({"y": ONE}, REL_EQ, ONE),
    ])
    support, assignment = max_support(sys)
    assert support == {"y"}
    assert assignment["x"] == 0


def test_max_support_infeasible():
    sys = LinearSystem(["x"], [({"x": ONE}, REL_EQ, Fraction(-1))])
    assert max_support(sys) is None


def test_max_support_matches_probes():
    # the support is exactly the variables positive in some solution
    rng = random.Random(21)
    for _ in range(60):
        sys, _planted = random_system(rng, max_vars=5, max_constraints=4)
        result = max_support(sys)
        if result is None:
            continue
        support, assignment = result
        check_assignment(sys, assignment)
        assert {v for v in sys.variables if assignment[v] > 0} == support
        for v in sys.variables:
            # any solution with v > 0 has a vertex with v far above 1e-12
            # (coefficients are tiny integers), so the threshold is safe
            bigger = LinearSystem(
                sys.variables,
                list(sys.constraints) + [({v: ONE}, REL_GE, Fraction(1, 10**12))])
            can_be_positive = feasible(bigger) is not None
            assert (v in support) == can_be_positive


def test_solve_implications_examples():
    base = LinearSystem(["x", "y"], [({"x": ONE, "y": ONE}, REL_EQ, ONE)])
    solution = solve_implications(ImplicationSystem(base, (("x", "y"),)))
    assert solution is not None and solution["y"] > 0

    forced = LinearSystem(["x", "y"], [
        ({"x": ONE}, REL_EQ, ONE),
        ({"y": ONE}, REL_EQ, Fraction(0)),
    ])
    assert solve_implications(ImplicationSystem(forced, (("x", "y"),))) is None

    # no implications: same verdict as plain feasibility
    assert solve_implications(ImplicationSystem(forced, ())) is not None
    assert solve_implications(ImplicationSystem(LinearSystem([], []), ())) == {}


def test_implication_declared_variables():
    base = LinearSystem(["x"], [])
    with pytest.raises(UdpnError):
        ImplicationSystem(base, (("x", "y"),))


def test_solver_agrees_with_brute_force():
    rng = random.Random(22)
    for _ in range(80):
        isys = random_implication_system(rng, max_vars=6, max_constraints=5,
                                         max_implications=4)
        got = solve_implications(isys)
        expected = brute_implication(isys)
        assert (got is not None) == expected
        if got is not None:
            check_assignment(isys.base, got)
            for a, b in isys.implications:
                assert got[a] == 0 or got[b] > 0


def test_max_support_scales():
    # larger structured system: chain of equalities sharing mass
    n = 30
    names = [f"x{k}" for k in range(n)]
    constraints = [({names[k]: ONE, names[k + 1]: -ONE}, REL_EQ, Fraction(0))
                   for k in range(n - 1)]
    constraints.append(({names[0]: ONE}, REL_EQ, ONE))
    support, assignment = max_support(LinearSystem(names, constraints))
    assert support == set(names)
    assert all(assignment[v] == 1 for v in names)
