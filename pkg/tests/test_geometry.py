from fractions import Fraction

import pytest

from lgfano.geometry import (GroupElement, InvalidInput, SymmetryGroup, WeightSystem, coset_decomposition,
                             cr_age_hypersurface, fjrw_degree, fjrw_degree_sector, j_element, narrow_by_fixed_locus,
                             narrow_set, parse_phase_vector)


@pytest.mark.parametrize("w,d", [((2, 2, 4), 8), ((0, 1), 3), ((1, -1), 2), ((), 3), ((1, 1), 0)])
def test_rejects_bad_weights(w, d):
    with pytest.raises(InvalidInput):
        WeightSystem(w, d)


def test_rejects_inhomogeneous_monomial():
    with pytest.raises(InvalidInput):
        WeightSystem((1, 2), 4, ((4, 0), (1, 1)))


def test_kappa_and_index():
    ws = WeightSystem((1, 1, 1, 1), 3)
    assert ws.kappa == -1 and ws.r == 1 and ws.gorenstein
    assert WeightSystem((1, 1, 1), 6).kappa == 3
    assert not WeightSystem((2, 3, 4, 4), 8).gorenstein


@pytest.mark.parametrize("w,d,nar", [
    ((1, 1, 1, 1), 3, [0, 1]),
    ((1, 1, 1), 6, [0, 1, 2, 3, 4]),
    ((1,) * 5, 5, [0, 1, 2, 3]),
    # (k+1) w_j never divisible by 8 only for even k
    ((2, 3, 4, 4), 8, [0, 2, 4, 6]),
])
def test_narrow_set(w, d, nar):
    ws = WeightSystem(w, d)
    assert narrow_set(ws) == nar
    assert narrow_by_fixed_locus(ws) == nar


def test_degrees_agree():
    ws = WeightSystem((1, 1, 1), 6)
    for k in narrow_set(ws):
        assert fjrw_degree(ws, k) == fjrw_degree_sector(ws, k)


def test_group_closure_and_cosets():
    ws = WeightSystem((1, 3, 3), 6)
    G = SymmetryGroup(ws, [parse_phase_vector("1/2,1/2,0")])
    assert len(G) == 12
    assert j_element(ws) in G
    reps = coset_decomposition(ws, G)
    assert len(reps) == 2


def test_generator_must_preserve_polynomial():
    ws = WeightSystem((1, 1, 1), 3)
    with pytest.raises(InvalidInput):
        SymmetryGroup(ws, [GroupElement((Fraction(1, 2), 0, 0))])


def test_parse_phase_vector():
    g = parse_phase_vector("(1/2, 3/2, -1/3)")
    assert g.phases == (Fraction(1, 2), Fraction(1, 2), Fraction(2, 3))
    assert g.order() == 6


def test_hypersurface_age():
    ws = WeightSystem((2, 3, 4, 4), 8)
    assert cr_age_hypersurface(ws, 0) == 0
    # twisted phases (1/2, 3/4, 0, 0), no correction since 8 * 1/4 is integral
    assert cr_age_hypersurface(ws, "1/4") == Fraction(5, 4)
    # (2/3, 0, 1/3, 1/3) minus <8/3>
    assert cr_age_hypersurface(ws, "1/3") == Fraction(2, 3)
