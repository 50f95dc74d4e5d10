from fractions import Fraction

import mpmath
import pytest

from lgfano.geometry import InvalidInput, WeightSystem
from lgfano.ifunctions import gw_small_i, lg_q_form
from lgfano.picardfuchs import (annihilation_report, build_pf, formal_monodromy, gw_frontier, lg_frontier,
                                massive_residual, massive_solutions, reference_delpezzo_recursion, recursion_ratio,
                                solution_audit)

DP = WeightSystem((1, 1, 1, 1), 3)
D8 = WeightSystem((2, 3, 4, 4), 8)


def test_delpezzo_operator_shape():
    op = build_pf(DP, "q")
    assert str(op) == "(1*D^4) + q^1 * (-27*D^3 + -54*D^2 + -33*D + -6)"
    assert op.order == 4


@pytest.mark.parametrize("ws", [DP, D8], ids=["dP", "deg8"])
def test_gw_annihilated_with_formal_z(ws):
    op = build_pf(ws, "q", z=True)
    rep = annihilation_report(op, gw_small_i(ws, 12), gw_frontier(ws, 12, op))
    assert rep.interior_zero, rep.nonzero_interior[:5]
    assert rep.frontier     # the cut is visible, not hidden


def test_gw_at_z_one_with_plain_operator():
    op = build_pf(DP, "q")
    rep = annihilation_report(op, gw_small_i(DP, 12, z="one"), gw_frontier(DP, 12, op))
    assert rep.interior_zero


@pytest.mark.parametrize("ws", [DP, D8], ids=["dP", "deg8"])
def test_lg_side_annihilated(ws):
    op = build_pf(ws, "q")
    rep = annihilation_report(op, lg_q_form(ws, 12), lg_frontier(ws, 12, op))
    assert rep.interior_zero, rep.nonzero_interior[:5]


def test_wrong_operator_is_detected():
    # plain operator on the formal-z series leaves interior garbage
    op = build_pf(DP, "q")
    rep = annihilation_report(op, gw_small_i(DP, 8), gw_frontier(DP, 8, op))
    assert not rep.interior_zero


def test_massive_delpezzo_constants():
    s = massive_solutions(DP, 22)[0]
    assert s.alpha_exact == 27 and s.lambda_exp == 1
    a = s.coefficients
    assert a[0] == 1 and a[1] == Fraction(7, 243)
    for n in range(21):
        lhs = 3 ** 6 * (n + 2) * a[n + 2]
        rhs = (54 * n * n + 162 * n + 129) * a[n + 1] - (n + 1) ** 3 * a[n]
        assert lhs == rhs, n


def test_recursion_proportional_to_reference():
    s = massive_solutions(DP, 3)[0]
    assert recursion_ratio(reference_delpezzo_recursion(), s.recursion.in_a()) == 729


def test_massive_residual_vanishes():
    s = massive_solutions(D8, 15)[0]
    res = massive_residual(D8, s)
    assert all(x == 0 for x in res[:len(s.scaled_coeffs)])


def test_weighted_alpha():
    # alpha = r (d^d / prod w^w)^{1/r}
    s = massive_solutions(D8, 2)[0]
    with mpmath.workprec(200):
        C = mpmath.mpf(8) ** 8 / (2 ** 2 * 3 ** 3 * 4 ** 4 * 4 ** 4)
        assert abs(s.alpha - 5 * mpmath.root(C, 5)) < mpmath.mpf(10) ** -50
    assert s.alpha_exact is None


def test_massive_needs_fano():
    with pytest.raises(InvalidInput):
        massive_solutions(WeightSystem((1, 1, 1), 6))


def test_monodromy_phases():
    m = formal_monodromy(D8)
    assert m.nar_turns == [(0, Fraction(7, 8)), (2, Fraction(5, 8)), (4, Fraction(3, 8)), (6, Fraction(1, 8))]
    assert m.massive_turn == Fraction(4, 5)
    M = m.matrix
    # the massive block permutes cyclically: M^r acts on it as a scalar
    P = M ** 5
    for i in range(4, 9):
        for j in range(4, 9):
            if i != j:
                assert abs(P[i, j]) < mpmath.mpf(10) ** -40


def test_solution_count_audit():
    a = solution_audit(DP)
    assert (a.n_nar, a.r, a.gw_rank, a.ok) == (2, 1, 3, True)
    b = solution_audit(D8)
    assert (b.n_nar, b.r, b.gw_rank, b.ok) == (4, 5, 9, True)
    assert b.reduced_order == 12
