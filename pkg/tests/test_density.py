import numpy as np
import pytest
from scipy import integrate

from wishart2cut import density as dens
from wishart2cut import spectral_curve as sc
from wishart2cut.acceptance import edge_fit, mass_sensitivity_probe
from wishart2cut.model import ModelParams

from conftest import A_BIG, A_SMALL, MC

INSTANCES = [A_BIG, A_SMALL, MC]


@pytest.mark.parametrize("p", INSTANCES)
def test_closed_form_matches_oracle(p, rng):
    lam = sc.quartic_roots(p).lam
    x = np.concatenate([rng.uniform(lam[0], lam[1], 500), rng.uniform(lam[2], lam[3], 500)])
    assert np.max(np.abs(dens.rho_closed_form(x, p) - dens.rho_oracle(x, p))) < 1e-9


def test_closed_form_refuses_off_support():
    lam = sc.quartic_roots(A_BIG).lam
    for z in (0.5 * (lam[1] + lam[2]), lam[3] + 1.0, -1.0):
        with pytest.raises(dens.OffSupportError):
            dens.rho_closed_form(np.array([z]), A_BIG)


def test_closed_form_needs_two_cut():
    with pytest.raises(ValueError):
        dens.rho_closed_form(np.array([1.0]), ModelParams(1.05, 0.5, 0.5))


def test_oracle_zero_off_support():
    lam = sc.quartic_roots(A_BIG).lam
    z = np.array([-3.0, -0.1, 0.0, 0.5 * (lam[1] + lam[2]), lam[3] + 2])
    assert np.all(dens.rho_oracle(z, A_BIG) == 0)


@pytest.mark.parametrize("p", INSTANCES)
def test_oracle_total_mass(p):
    lam = sc.quartic_roots(p).lam
    f = lambda x: dens.rho_oracle(np.array([x]), p)[0]
    tot = integrate.quad(f, 0.0, lam[3] + 1, points=list(lam), limit=500, epsabs=1e-12)[0]
    assert tot == pytest.approx(p.c, abs=1e-6)


def test_masses_examples():
    m = dens.interval_masses(A_BIG)
    assert m == pytest.approx((0.025, 0.025), abs=1e-8)
    m = dens.interval_masses(A_SMALL)
    assert m == pytest.approx((0.015, 0.035), abs=1e-8)


@pytest.mark.parametrize("p", INSTANCES)
def test_masses_sheet_assignment(p):
    m = dens.interval_masses(p)
    assert m == pytest.approx(dens.expected_masses(p), abs=1e-8)
    assert sum(m) == pytest.approx(p.c, abs=1e-8)


def test_mass_check_detects_endpoint_error():
    err, detected = mass_sensitivity_probe()
    assert detected and err > 1e-6


@pytest.mark.parametrize("p", INSTANCES)
def test_edge_square_root(p):
    slopes, errs = edge_fit(p)
    assert np.all(np.abs(slopes - 0.5) <= 0.01)
    assert np.all(errs < 1e-3)
    assert np.all(dens.edge_constants(p) > 0)


@pytest.mark.parametrize("p", INSTANCES)
def test_edge_constant_scaling(p):
    # lambda -> lambda/a and rho'(z) = a rho(a z) give the factor a^{3/2}
    np.testing.assert_allclose(dens.edge_constants(p.swapped()), p.a**1.5 * dens.edge_constants(p), rtol=1e-9)


def test_rho_vanishes_at_edges():
    for p in INSTANCES:
        lam = sc.quartic_roots(p).lam
        assert np.all(dens.rho(lam, p) < 1e-6)
        assert np.all(dens.rho(np.linspace(lam[0], lam[3], 500), p) >= 0)


def test_cdf_examples():
    p = A_BIG
    lam = sc.quartic_roots(p).lam
    F = dens.cdf_F(np.array([lam[0] - 0.01, lam[0], lam[1], lam[3], lam[3] + 1]), p)
    assert F[0] == 0 and F[1] == 0
    assert F[2] == pytest.approx(dens.interval_masses(p)[0] / p.c, abs=1e-10)
    assert F[2] == pytest.approx(1 - p.beta, abs=1e-8)
    assert F[3] == pytest.approx(1.0, abs=1e-8) and F[4] == 1.0


def test_cdf_interpolant_agrees():
    p = MC
    lam = sc.quartic_roots(p).lam
    z = np.linspace(lam[0] - 0.1, lam[3] + 0.1, 37)
    np.testing.assert_allclose(dens.cdf_F_interpolant(p)(z), dens.cdf_F(z, p), atol=1e-7)


@pytest.mark.parametrize("p", INSTANCES)
def test_density_F_symmetry(p, rng):
    lam = sc.quartic_roots(p).lam
    z = rng.uniform(lam[0], lam[3], 200)
    # eigenvalues of the swapped model are 1/a times the original ones
    lhs = dens.density_F(z, p)
    rhs = dens.density_F(z / p.a, p.swapped()) / p.a
    np.testing.assert_allclose(lhs, rhs, atol=1e-8 * np.max(lhs))


@pytest.mark.parametrize("z", [1 + 1j, 1e3j, 0.3 + 0.01j])
def test_self_consistency(z):
    p = A_BIG
    assert dens.self_consistency_residual(z, p) < 1e-10


def test_self_consistency_far_field():
    z = 1e3j
    m = sc.label_branches(z, A_BIG).xi1
    assert abs(m + 1 / z) < 1e-4


def test_other_roots_also_solve_curve():
    z = 1 + 1j
    t = sc.label_branches(z, A_BIG)
    for m in (t.xi2, t.xi3):
        assert dens._fixed_point_residual(m, z, A_BIG) < 1e-10


def test_self_consistency_needs_upper_half_plane():
    with pytest.raises(ValueError):
        dens.self_consistency_residual(1.0 + 0j, A_BIG)


def test_profile():
    prof = dens.density_profile(A_BIG)
    assert len(prof.support) == 2 and len(prof.edge_constants) == 4
    assert prof.masses_total == pytest.approx(A_BIG.c, abs=1e-8)
    prof = dens.density_profile(ModelParams(1.0, 0.5, 0.25))
    assert prof.support == [pytest.approx(((0.5) ** 2, (1.5) ** 2))]


def test_marchenko_pastur_density():
    c = 0.25
    p = ModelParams(1.0, 0.5, c)
    lo, hi = (1 - np.sqrt(c)) ** 2, (1 + np.sqrt(c)) ** 2
    x = np.linspace(lo, hi, 101)[1:-1]
    mp_density = np.sqrt((hi - x) * (x - lo)) / (2 * np.pi * c * x)
    np.testing.assert_allclose(dens.density_F(x, p), mp_density, rtol=1e-9)
