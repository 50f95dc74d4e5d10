import pytest

from lgfano.cli import load_problem
from lgfano.geometry import SymmetryGroup, WeightSystem, parse_phase_vector
from lgfano.statespace import (BroadDataUnavailable, cr_state_space, fjrw_state_space,
                               milnor_poincare, poincare_polynomial, verify_correspondence)

GOLDEN = {
    "cubic4fold": {-2: 1, 0: 25, 2: 1},
    "degree8": {0: 12},
    "orbicurve": {0: 6},
    "quintic": {-3: 1, -1: 101, 0: 4, 1: 101, 3: 1},
    "sextic": {-1: 10, 0: 5, 1: 10},
    "delpezzo": {0: 9},
}


@pytest.mark.parametrize("name", sorted(GOLDEN))
def test_golden_graded_dimensions(name):
    pb = load_problem(name)
    rep = verify_correspondence(pb.ws, pb.G)
    assert rep.ok
    assert rep.cr.graded_dims == GOLDEN[name]
    assert rep.fjrw.graded_dims == GOLDEN[name]


@pytest.mark.parametrize("name", sorted(GOLDEN))
def test_correction_summand(name):
    pb = load_problem(name)
    ws, G = pb.ws, pb.G
    cr, lg = cr_state_space(ws, G), fjrw_state_space(ws, G)
    size = len(G) // ws.degree * abs(ws.kappa)
    # the deficient side carries the extra degree-zero piece
    if ws.kappa > 0:
        assert (cr.correction_dim, lg.correction_dim) == (size, 0)
    else:
        assert (cr.correction_dim, lg.correction_dim) == (0, size)


def test_poincare_polynomial_cubic_curve():
    # Milnor ring of x^3+y^3+z^3: (1+t)^3 in t-degree steps
    assert poincare_polynomial((1, 1, 1), 3) == [1, 3, 3, 1]


def test_milnor_number():
    # prod (1/q_j - 1) = 3 * 5/3 * 1 * 1
    md = milnor_poincare(WeightSystem((2, 3, 4, 4), 8))
    assert sum(md.dims.values()) == 5


def test_missing_broad_data_is_reported():
    # non-Fermat polynomial with an extra symmetry: no automatic enumeration
    ws = WeightSystem((1, 1, 1), 3, ((3, 0, 0), (0, 3, 0), (0, 0, 3), (1, 1, 1)))
    G = SymmetryGroup(ws, [parse_phase_vector("1/3,2/3,0")])
    with pytest.raises(BroadDataUnavailable):
        verify_correspondence(ws, G)


def test_overrides_feed_both_sides():
    pb = load_problem("orbicurve")
    rep = verify_correspondence(pb.ws, pb.G, {"1/2,1/2,0": {"1/2": 5}})
    # the same supplied broad piece enters CR and FJRW, so they still agree
    assert rep.ok
    assert rep.cr.graded_dims == {0: 11}
