import itertools
from fractions import Fraction

import pytest

from lgfano.algebra import MultiSeries, exp_series
from lgfano.geometry import WeightSystem
from lgfano.ifunctions import fjrw_big_i, untwisted_j
from lgfano.mirror import (ExtractionError, dimension_defect, extract_j, invariant, psi_literal_display,
                           psi_multinomial, psi_recursive, read_invariants, untwisted_j_from_oracle,
                           untwisted_oracle)

DP = WeightSystem((1, 1, 1, 1), 3)
ORDER = 8


@pytest.fixture(scope="module")
def cubic():
    res = extract_j(fjrw_big_i(DP, ORDER), ORDER, ws=DP)
    read_invariants(res, DP)
    return res


def expected_j(vars_, order):
    e = exp_series(vars_, order, "t0", "z", -1)
    z = MultiSeries.monomial(vars_, order, {"z": 1}, 1, "z")
    t1 = MultiSeries.monomial(vars_, order, {"t1": 1}, 1, "z")
    return {0: e * z, 1: e * t1}


def test_j_is_closed_form(cubic):
    J = cubic.j_series
    want = expected_j(J.vars, ORDER)
    for k in (0, 1):
        assert J.comp(k).terms == want[k].terms


def test_mirror_map_is_trivial(cubic):
    for i, tau in cubic.tau_map.items():
        assert tau.terms == {tuple(1 if v == f"t{i}" else 0 for v in tau.vars): 1}


def test_leading_multipliers(cubic):
    c0, c1 = cubic.c_series[0], cubic.c_series[1]
    assert c0.coeff({"t1": 3, "z": 1}) == -Fraction(1, 6) * Fraction(1, 3) ** 4
    assert c1.coeff({"t1": 4}) == -Fraction(1, 2) * Fraction(1, 3) ** 4
    # next terms, kept as regression values
    assert c0.coeff({"t1": 6, "z": 2}) == Fraction(-7, 590490)
    assert c1.coeff({"t1": 7, "z": 1}) == Fraction(-97, 1377810)


def _c1_next_term(cubic, drop_c0_z2):
    big = fjrw_big_i(DP, ORDER)
    V = big.vars
    keep0 = {e: v for e, v in cubic.c_series[0].terms.items() if not (drop_c0_z2 and e == (0, 6, 2))}
    c0 = MultiSeries(V, ORDER, keep0, "z")
    c1 = MultiSeries(V, ORDER, {(0, 4, 0): cubic.c_series[1].terms[(0, 4, 0)]}, "z")
    F = big + big.deriv("t0").shift_z(1).times(c0) + big.deriv("t1").shift_z(1).times(c1)
    return -F.comp(1).terms.get((0, 7, 2), 0)


def test_c1_next_term_needs_full_c0(cubic):
    assert _c1_next_term(cubic, False) == Fraction(-97, 1377810)
    # truncating c_0 after its first term gives a different (incorrect) value
    assert _c1_next_term(cubic, True) == -Fraction(34, 7 * 9 ** 5)


def test_cancel_order_does_not_matter(cubic):
    other = extract_j(fjrw_big_i(DP, ORDER), ORDER, cancel_order=[1, 0], ws=DP)
    assert other.j_series == cubic.j_series


def test_invariant_families(cubic):
    tab = cubic.invariants_table
    for n in range(2, ORDER + 1):
        assert invariant(tab, [0] * n, n - 2, 1) == 1
        assert invariant(tab, [0] * (n - 1) + [1], n - 2, 0) == 1
        assert invariant(tab, [0] * (n - 2) + [1, 1], n - 2, 0) == 0
        assert invariant(tab, [0] * (n - 2) + [1, 1], n - 2, 1) == 0
    assert not any(h.count(1) >= 2 for h, _, _ in tab)


def test_nonzero_invariants_satisfy_dimension_axiom(cubic):
    for (h, a, eps), v in cubic.invariants_table.items():
        assert v == 0 or dimension_defect(DP, h, a, eps) == 0


def test_truncated_input_rejected():
    with pytest.raises(ExtractionError):
        extract_j(fjrw_big_i(DP, 3), 5, ws=DP)


def _exponent_vectors(n):
    for a in itertools.product(range(n - 2), repeat=n):
        if sum(a) == n - 3:
            yield a


def test_psi_integrals_match_string_dilaton():
    for n in range(3, 8):
        for a in _exponent_vectors(n):
            assert psi_recursive(a) == psi_multinomial(a), a


def test_psi_numerator_reading():
    # the two readings of the numerator first part ways at a single psi^3 on M_{0,6}
    a = (0, 0, 0, 0, 0, 3)
    assert psi_recursive(a) == 1
    assert psi_literal_display(a) == Fraction(1, 2)
    first = next(a for n in range(3, 8) for a in _exponent_vectors(n)
                 if psi_recursive(a) != psi_literal_display(a))
    assert first == (0, 0, 0, 0, 0, 3)


def test_untwisted_oracle_selection_rule():
    assert untwisted_oracle(DP, [0, 0, 1], [0, 0, 0]) == 1
    assert untwisted_oracle(DP, [0, 0, 0], [0, 0, 0]) == 0
    assert untwisted_oracle(DP, [1, 1, 0, 0], [0, 0, 0, 1]) == 0


def test_untwisted_j_against_oracle():
    J = untwisted_j(DP, 7)
    zi = J.vars.index("z")
    got = {(m, e[:zi], e[zi]): v for m, s in J.components.items() for e, v in s.terms.items()}
    assert got == untwisted_j_from_oracle(DP, 7)
