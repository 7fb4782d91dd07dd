import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wishart2cut import spectral_curve as sc
from wishart2cut.model import ModelParams

from conftest import A_BIG, A_SMALL, MC

triples = st.builds(
    ModelParams,
    st.floats(np.log(0.05), np.log(20.0)).map(np.exp),
    st.floats(0.05, 0.95),
    st.floats(0.05, 0.95),
)


def test_curve_coefficients():
    k = sc.curve_coefficients(ModelParams(1, 0.5, 0.5))
    # B1 = 1 - c(1-beta) + a(1 - c beta) = 1 - 0.25 + 0.75
    assert (k.A2, k.B2, k.B1) == pytest.approx((2, 0.5, 1.5))
    k = sc.curve_coefficients(ModelParams(4, 0.3, 0.2))
    assert (k.A2, k.B2, k.B1) == pytest.approx((5, 3.2, 4.62))


def test_cubic_large_z():
    p = ModelParams(4, 0.3, 0.2)
    r = np.sort(sc.solve_cubic_at(np.array([1e6]), sc.curve_coefficients(p), p.a)[0].real)
    assert r == pytest.approx([-1.0, -0.25, -1e-6], abs=1e-5)


def _vieta(p, z):
    k = sc.curve_coefficients(p)
    r = sc.solve_cubic_at(z, k, p.a)
    lead = z * p.a
    return (r.sum(-1), -(k.A2 * z + k.B2) / lead,
            r[..., 0] * r[..., 1] + r[..., 0] * r[..., 2] + r[..., 1] * r[..., 2], (z + k.B1) / lead,
            r.prod(-1), -1 / lead)


@settings(max_examples=50, deadline=None)
@given(triples, st.complex_numbers(max_magnitude=50).filter(lambda z: abs(z) > 1e-3))
def test_vieta(p, z):
    s, s0, e2, e20, pr, pr0 = _vieta(p, np.array([z]))
    for got, want in ((s, s0), (e2, e20), (pr, pr0)):
        assert abs(got[0] - want[0]) <= 1e-10 * max(1.0, abs(want[0]))


def test_cubic_residual_small(rng):
    p = A_BIG
    z = rng.uniform(-5, 30, 200) + 1j * rng.uniform(-3, 3, 200)
    r = sc.solve_cubic_at(z, sc.curve_coefficients(p), p.a)
    res = sc.cubic_residual(r, z[:, None], sc.curve_coefficients(p), p.a)
    scale = 1 + np.abs(z)[:, None] * np.abs(r) ** 3 + np.abs(r) ** 2 * (1 + np.abs(z)[:, None])
    assert np.all(np.abs(res) <= 1e-10 * scale)


def test_cubic_rejects_zero():
    with pytest.raises(ZeroDivisionError):
        sc.solve_cubic_at(np.array([0.0]), sc.curve_coefficients(A_BIG), A_BIG.a)


def test_double_root_at_branch_point():
    bp = sc.quartic_roots(A_BIG)
    r = sc.solve_cubic_at(np.array([bp.lam[1]]), sc.curve_coefficients(A_BIG), A_BIG.a)[0]
    d = np.abs(r - bp.gamma[1])
    assert np.sort(d)[1] < 1e-6


def test_two_cut_example():
    bp = sc.quartic_roots(A_BIG)
    assert bp.delta > 0 and bp.regime is sc.Regime.TWO_CUT
    assert np.all(bp.gamma < 0)
    assert np.all(np.diff(bp.gamma) > 0) and np.all(np.diff(bp.lam) > 0)
    assert sc.d3_sign_changes(A_BIG) == 4


def test_one_cut_example():
    p = ModelParams(1.05, 0.5, 0.5)
    bp = sc.quartic_roots(p)
    assert bp.delta < 0 and bp.regime is sc.Regime.ONE_CUT
    assert sc.d3_sign_changes(p) == 2


def test_degenerate_marchenko_pastur():
    p = ModelParams(1.0, 0.5, 0.25)
    bp = sc.quartic_roots(p)
    assert bp.degenerate and bp.regime is sc.Regime.ONE_CUT
    assert bp.lam == pytest.approx([(1 - 0.5) ** 2, (1 + 0.5) ** 2], rel=1e-12)
    assert sc.d3_sign_changes(p) == 2


def test_quartic_coefficients_match_curve():
    # critical points of z(xi) are the roots of the quartic
    for p in (A_BIG, A_SMALL, MC):
        g = sc.quartic_roots(p).gamma
        assert np.max(np.abs(sc.dz_dxi(g, p) * g**2)) < 1e-10


@settings(max_examples=40, deadline=None)
@given(triples)
def test_classify_swap_symmetry(p):
    try:
        r = sc.classify(p)
    except sc.NearTransitionError:
        return
    assert sc.classify(p.swapped()) is r


@settings(max_examples=40, deadline=None)
@given(triples)
def test_scaling_of_branch_points(p):
    try:
        b1, b2 = sc.quartic_roots(p), sc.quartic_roots(p.swapped())
    except sc.NearTransitionError:
        return
    np.testing.assert_allclose(b2.lam, b1.lam / p.a, rtol=1e-9)
    # same index: xi -> a xi preserves the ordering of the critical points
    np.testing.assert_allclose(b2.gamma, p.a * b1.gamma, rtol=1e-9)


def _find_transition(beta=0.5, c=0.5, lo=1.05, hi=10.0):
    """Bisect in a between a one-cut and a two-cut triple."""
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        try:
            r = sc.classify(ModelParams(mid, beta, c))
        except sc.NearTransitionError:
            return mid
        if r is sc.Regime.TWO_CUT:
            hi = mid
        else:
            lo = mid
    raise AssertionError("bisection never entered the guard band")


def test_guard_band_fires_at_transition():
    a_star = _find_transition()
    with pytest.raises(sc.NearTransitionError):
        sc.quartic_roots(ModelParams(a_star, 0.5, 0.5))
    # a little away from the transition both regimes are reported normally
    assert sc.classify(ModelParams(a_star * (1 + 1e-3), 0.5, 0.5)) is sc.Regime.TWO_CUT
    assert sc.classify(ModelParams(a_star * (1 - 1e-3), 0.5, 0.5)) is sc.Regime.ONE_CUT


def test_lambda_of_gamma():
    bp = sc.quartic_roots(A_BIG)
    lam = [sc.lambda_of_gamma(g, A_BIG) for g in bp.gamma]
    assert np.all(np.diff(lam) > 0)
    assert sc.lambda_of_gamma(-1e-9, A_BIG) > 1e8
    for pole in (0.0, -1.0, -1 / A_BIG.a):
        with pytest.raises(ZeroDivisionError):
            sc.lambda_of_gamma(pole, A_BIG)


def test_sheet_assignment():
    assert (sc.sheet_assignment(4).k2, sc.sheet_assignment(4).k3) == (2, 4)
    assert (sc.sheet_assignment(0.25).k2, sc.sheet_assignment(0.25).k3) == (4, 2)
    assert sc.sheet_assignment(4).k2 == sc.sheet_assignment(0.25).k3
    with pytest.raises(sc.DegenerateError):
        sc.sheet_assignment(1.0)


def test_d3_at_zero():
    for p in (A_BIG, A_SMALL, MC):
        k = sc.curve_coefficients(p)
        d0 = sc.d3(0.0, p)
        assert d0 == pytest.approx(k.B1**2 * k.B2**2 - 4 * k.B2**3, rel=1e-12)
        assert d0 > 0


def test_d3_sign_and_roots():
    for p in (A_BIG, A_SMALL, MC):
        lam = sc.quartic_roots(p).lam
        z = np.linspace(1e-3, lam[3] * 1.3, 2001)
        inside = ((z > lam[0]) & (z < lam[1])) | ((z > lam[2]) & (z < lam[3]))
        assert np.all((sc.d3_factored(z, p) < 0) == inside)
        scale = np.abs(sc.d3_coefficients(p)) @ np.vander(np.abs(lam), 5, increasing=False).T
        assert np.all(np.abs(sc.d3(lam, p)) <= 1e-8 * scale)
        zs = np.abs(sc.d3_coefficients(p)) @ np.vander(z, 5, increasing=False).T
        assert np.all(np.abs(sc.d3(z, p) - sc.d3_factored(z, p)) <= 1e-8 * zs)


def test_label_branches_asymptotics():
    p = A_BIG
    T = 1e4
    z = 1j * T
    t = sc.label_branches(z, p)
    assert abs(t.xi1 - (-1 / z)) < 1e-7
    assert abs(t.xi2 - (-1 + p.c * (1 - p.beta) / z)) < 1e-6
    assert abs(t.xi3 - (-1 / p.a + p.c * p.beta / z)) < 1e-6


@pytest.mark.parametrize("p", [A_BIG, A_SMALL])
def test_label_branches_on_support(p):
    lam = sc.quartic_roots(p).lam
    eps = 1e-8
    for x in (0.5 * (lam[0] + lam[1]), 0.5 * (lam[2] + lam[3])):
        t = sc.label_branches(x + 1j * eps, p)
        assert t.xi1.imag > 0
        gap = min(abs(t.xi1 - np.conj(t.xi2)), abs(t.xi1 - np.conj(t.xi3)))
        # the pair separates at first order in eps: |d xi/dz| = 1/|z'(xi)|
        first_order = 2 * eps / abs(sc.dz_dxi(t.xi1, p))
        assert gap < max(1e-6, 1.01 * first_order)
        t = sc.label_branches(x + 1e-11j, p)
        assert min(abs(t.xi1 - np.conj(t.xi2)), abs(t.xi1 - np.conj(t.xi3))) < 1e-6


def test_label_branches_right_of_support():
    p = A_BIG
    t = sc.label_branches(sc.quartic_roots(p).lam[3] + 1.0 + 0j, p)
    assert max(abs(t.xi1.imag), abs(t.xi2.imag), abs(t.xi3.imag)) < 1e-12
    assert t.xi1.real > t.xi3.real > t.xi2.real


def test_stieltjes_branch_in_upper_half_plane(rng):
    p = MC
    z = rng.uniform(-5, 30, 40) + 1j * rng.uniform(0.01, 5, 40)
    r = sc.label_branches_array(z, p)
    assert np.all(r[:, 0].imag > 0)


def test_xi1_plus():
    p = A_BIG
    lam = sc.quartic_roots(p).lam
    assert sc.xi1_plus(0.5 * (lam[0] + lam[1]), p).imag > 0
    with pytest.raises(ValueError):
        sc.xi1_plus(lam[3] + 1, p)


def test_xi1_plus_integrates_to_c():
    from scipy import integrate
    p = A_BIG
    lam = sc.quartic_roots(p).lam
    f = lambda x: sc.xi1_plus(x, p).imag / np.pi
    tot = sum(integrate.quad(f, lo, hi, limit=200)[0] for lo, hi in ((lam[0], lam[1]), (lam[2], lam[3])))
    assert tot == pytest.approx(p.c, abs=1e-7)


def test_boundary_values_swap():
    # xi_{1,+} = xi_{j,-} on [lambda_{k_j - 1}, lambda_{k_j}]; the lower boundary
    # value is the conjugate of the upper one by reflection
    p = A_BIG
    lam = sc.quartic_roots(p).lam
    sa = sc.sheet_assignment(p.a)
    for j, k in ((2, sa.k2), (3, sa.k3)):
        x = 0.5 * (lam[k - 2] + lam[k - 1])
        up = sc.label_branches(x + 1e-11j, p)
        xij_minus = np.conj(up.xi2 if j == 2 else up.xi3)
        assert abs(up.xi1 - xij_minus) < 1e-8
        assert abs(up.xi1 - sc.xi1_plus(x, p)) < 1e-8


def test_theta_vanishes_at_anchor():
    p = A_BIG
    lam = sc.quartic_roots(p).lam
    assert abs(sc.theta(1, complex(lam[3]), p)) < 1e-9


@pytest.mark.parametrize("p", [A_BIG, A_SMALL])
def test_theta_jumps(p):
    lam = sc.quartic_roots(p).lam
    sa = sc.sheet_assignment(p.a)
    for j, k, mass in ((2, sa.k2, p.c * (1 - p.beta)), (3, sa.k3, p.c * p.beta)):
        x = np.array([0.3, 0.7]) * lam[k - 2]
        jump = sc.theta(j, x, p, side="+") - sc.theta(j, x, p, side="-")
        np.testing.assert_allclose(jump, 2j * np.pi * mass, atol=1e-8)


@pytest.mark.parametrize("p", [A_BIG, A_SMALL])
def test_theta_orderings(p):
    lam = sc.quartic_roots(p).lam
    grid = np.linspace(0.5 * lam[0], 1.5 * lam[3], 60)
    rep = sc.check_theta_orderings(p, grid)
    assert rep.ok and rep.min_margin > 0
    # grid straddling the gap
    rep = sc.check_theta_orderings(p, np.linspace(lam[1], lam[2], 12)[1:-1])
    assert rep.ok


@pytest.mark.parametrize("p", [A_BIG, A_SMALL])
def test_theta_margin_zero_inside(p):
    lam = sc.quartic_roots(p).lam
    sa = sc.sheet_assignment(p.a)
    for j, k in ((2, sa.k2), (3, sa.k3)):
        x = lam[k - 2] + (lam[k - 1] - lam[k - 2]) * np.array([0.2, 0.5, 0.8])
        assert np.max(np.abs(sc.theta_margin(j, x, p))) < 1e-8


def test_theta_margin_three_halves():
    p = A_BIG
    lam = sc.quartic_roots(p).lam
    sa = sc.sheet_assignment(p.a)
    for j, k in ((2, sa.k2), (3, sa.k3)):
        d = np.array([1e-2, 1e-3])
        m = sc.theta_margin(j, lam[k - 1] + d, p, tol=1e-12)
        slope = np.log(m[0] / m[1]) / np.log(d[0] / d[1])
        assert slope == pytest.approx(1.5, abs=0.05)
