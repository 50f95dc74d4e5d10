from fractions import Fraction

import mpmath
import pytest

from lgfano import asymptotics as asy
from lgfano.geometry import InvalidInput, narrow_set

TOL = mpmath.mpf(10) ** -40


def test_fano_radius_and_ratio(dp):
    reg = asy.regularize_fano(dp, 200, 200)
    assert reg.radius_power_bound == 27
    # the ratio test converges like 1/n
    err = abs(reg.ratio_estimate() / 27 - 1)
    coarse = abs(asy.regularize_fano(dp, 100, 200).ratio_estimate() / 27 - 1)
    assert err < 0.02 and err < 0.6 * coarse


def test_regularized_operator_singularities(dp):
    ode = asy.PolyODE(asy.regularized_operator(dp))
    assert ode.n == 4
    sing = sorted(complex(s).real for s in ode.singular_points())
    assert sing == [-27.0, 0.0]
    assert asy.choose_ray(ode) == 0


def test_series_solves_ode(dp, dp_reg):
    ode = asy.PolyODE(asy.regularized_operator(dp))
    with mpmath.workprec(200):
        tau = mpmath.mpf(5)
        for b in dp_reg.branches:
            derivs = [b.value(tau, j)[0] for j in range(ode.n + 1)]
            scale = max(abs(x) for x in derivs)
            assert abs(ode.residual(derivs, tau)) < scale * TOL


def test_continuation_overlaps_series(dp, dp_reg, dp_cont):
    assert asy.overlap_check(dp_reg, dp, dp_cont.profile) < TOL


def test_ray_through_singularity_rejected(dp, dp_reg):
    with pytest.raises(InvalidInput):
        asy.continue_ode(dp_reg, dp, asy.LaplaceProfile(mpmath.pi, dp_reg.radius / 2, None, 200))


def test_laplace_value_and_error(dp, dp_reg, dp_cont):
    lv = asy.laplace(dp_reg, dp, u=10, cont=dp_cont)
    with mpmath.workprec(200):
        want = [mpmath.mpf("-0.46406362749076300842826"), mpmath.mpf("0.21526679627477053078053")]
        for v, w, e in zip(lv.values, want, lv.error):
            assert abs(v - w) < mpmath.mpf(10) ** -22
            assert e < TOL


def test_laplace_linear_in_seed(dp, dp_reg, dp_cont):
    a = asy.laplace(dp_reg, dp, u=12, cont=dp_cont).values
    with mpmath.workprec(200):
        doubled = [asy.Branch(b.label, b.m, b.pshift, [(e, [2 * c for c in cs]) for e, cs in b.terms],
                              [(e, 2 * c) for e, c in b.exact]) for b in dp_reg.branches]
        reg2 = asy.RegularizedSeries(dp_reg.ws, dp_reg.kind, dp_reg.variable_power, dp_reg.radius,
                                     dp_reg.radius_power_bound, doubled, dp_reg.prec)
        b = asy.laplace(reg2, dp, u=12, cont=asy.continue_ode(reg2, dp)).values
        for x, y in zip(a, b):
            assert abs(y - 2 * x) < abs(x) * TOL


def test_u_outside_sector(dp, dp_reg, dp_cont):
    with pytest.raises(InvalidInput):
        asy.laplace(dp_reg, dp, u=-1, cont=dp_cont)


def test_halving_within_estimate(dp, dp_reg, dp_cont):
    assert asy.halving_check(dp_reg, dp, dp_cont, 1)["ok"]


def test_laplace_derivative_identity():
    assert asy.laplace_property_check()["ok"]


def test_watson_report(dp_watson):
    rep = dp_watson.value
    assert rep["ok"], rep
    Cs = [float(row["C"]) for row in rep["table"]]
    assert max(Cs) <= 10
    assert rep["divergent_tail"] and rep["exp_small_vs_power"]


def test_collapse_map_fano(dp, dp_collapse):
    cm = dp_collapse.value
    assert cm.rank == len(narrow_set(dp)) == 2
    assert cm.gap > 10 ** 6
    assert cm.residual < mpmath.mpf(10) ** -6
    assert cm.uniqueness < mpmath.mpf(10) ** -6
    assert all(h["ok"] for h in cm.halving)


def test_steepest_direction(dp_steepest):
    rep = dp_steepest.value
    assert rep["alpha"] == "27.0" and rep["lambda"] == "1.0"
    # after dividing by the massive series the leading constant is flat
    assert rep["P0_over_massive_series_variation"] < 1e-6
    assert rep["direction_error_at_last_u"] < 1e-6


def test_steepest_rejects_weighted(dp):
    from lgfano.geometry import WeightSystem
    with pytest.raises(InvalidInput):
        asy.steepest_leading(WeightSystem((2, 3, 4, 4), 8))


# general type

def test_gt_radius_and_ray(sextic):
    reg = asy.regularize_gt(sextic, 60, 200)
    # radius in tau is 1/12, stored exactly as its kappa-th power
    assert reg.radius_power_bound == Fraction(1, 12) ** 3
    assert abs(reg.radius * 12 - 1) < TOL
    assert abs(reg.ratio_estimate() * 12 - 1) < 0.02
    ode = asy.PolyODE(asy.regularized_operator(sextic))
    assert ode.n == 6
    th = asy.choose_ray(ode)
    assert abs(th - mpmath.pi / 3) < TOL


def test_fjrw_series_entire(sextic):
    ratios = asy.fjrw_ratio_test(sextic)
    for k, rs in ratios.items():
        assert rs[-1] < 1e-6 and rs[-1] < rs[len(rs) // 2]


def test_fjrw_monodromy_exact(sextic):
    assert asy.fjrw_monodromy_phases(sextic) == {k: Fraction(k + 1, 6) for k in range(5)}


def test_collapse_map_gt(sextic_collapse):
    cm = sextic_collapse.value
    assert cm.rank == 2
    assert cm.residual < mpmath.mpf(10) ** -4
    assert all(h["ok"] for h in cm.halving)
