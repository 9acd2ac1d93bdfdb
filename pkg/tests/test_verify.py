"""Verification-suite tests.

Quadrature here is exact up to roundoff for most checks (the integrands are
trigonometric polynomials or polynomials against the matching weight), so the
bounds sit at 1e-12 even where the acceptance tolerances are much looser.
Observed values during calibration: dimension traces 4e-16, Selberg gap
7.6e-15, reproducing residuals 5e-16, Bargmann monomials at most 4e-11.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from magtorus.characters import AutomorphicData, Character, trivial_character, weierstrass_character
from magtorus.errors import ConfigError, NumericError, RdqError
from magtorus.kernels import TruncationPolicy, automorphic_section, theta_section
from magtorus.lattice import Lattice
from magtorus.operators import Bump, ground_transform, grid_points, poincare_periodize, sample_grid
from magtorus.verify import (
    VerificationReport,
    closed_dimension,
    dimension_by_trace,
    run_all,
    selberg_matrix,
    theta_dimension_by_trace,
    verify_bargmann_reproducing,
    verify_functional_equation,
    verify_holomorphic_isomorphism,
    verify_reproducing,
    verify_restriction_identity,
    verify_vanishing_integral,
)

POLICY = TruncationPolicy(tolerance=1e-10)


# -- closed dimension ----------------------------------------------------------


def test_closed_dimension_values():
    for l in range(6):
        assert closed_dimension(1, l, math.pi, 1.0) == 1.0
    assert closed_dimension(2, 3, math.pi, 1.0) == 4.0
    assert closed_dimension(1, 0, 2 * math.pi, 1.0) == 2.0


def test_closed_dimension_polynomial_growth():
    # for n = 2 the count divided by (l+1) is the flux factor, independent of l
    base = closed_dimension(2, 0, 1.7, 2.3)
    for l in range(21):
        assert closed_dimension(2, l, 1.7, 2.3) / (l + 1) == pytest.approx(base, rel=1e-14)


def test_closed_dimension_validation():
    with pytest.raises(ConfigError):
        closed_dimension(0, 1, math.pi, 1.0)
    with pytest.raises(ConfigError):
        closed_dimension(1, -1, math.pi, 1.0)


# -- traces --------------------------------------------------------------------


def test_dimension_trace_matches_formula(weier_square, weier_hex):
    for data in (weier_square, weier_hex):
        for l in range(5):
            value, report = dimension_by_trace(data, l)
            assert report.passed
            assert report.residuals[0] < 1e-12
            assert value == pytest.approx(1.0, rel=1e-12)


def test_dimension_trace_doubled_flux(trivial_2pi):
    value, report = dimension_by_trace(trivial_2pi, 0)
    assert value == pytest.approx(2.0, rel=1e-12)
    assert report.details["closed"] == 2.0


def test_dimension_trace_character_independence(square, trivial_2pi):
    # same (nu, lattice), different compatible characters: identical traces
    weier_2pi = AutomorphicData(2 * math.pi, square, weierstrass_character(square))
    assert weier_2pi.rdq_valid
    for l in (0, 1):
        a, _ = dimension_by_trace(trivial_2pi, l)
        b, _ = dimension_by_trace(weier_2pi, l)
        assert abs(a - b) < 1e-12


def test_dimension_trace_requires_valid_data(square):
    bad = AutomorphicData(math.pi / 2, square, weierstrass_character(square))
    with pytest.raises(RdqError):
        dimension_by_trace(bad, 0)


def test_theta_trace(weier_square, weier_hex, trivial_2pi):
    for data, want in ((weier_square, 1.0), (weier_hex, 1.0), (trivial_2pi, 2.0)):
        value, report = theta_dimension_by_trace(data)
        assert report.passed
        assert value == pytest.approx(want, rel=1e-12)


def test_theta_trace_scales_with_volume():
    root2 = math.sqrt(2)
    doubled = Lattice(np.array([[root2], [1j * root2]], dtype=complex))
    data = AutomorphicData(2 * math.pi, doubled, trivial_character(doubled))
    value, _ = theta_dimension_by_trace(data)
    assert value == pytest.approx(4.0, rel=1e-12)


# -- Selberg matrix ------------------------------------------------------------


def test_selberg_identity():
    h = selberg_matrix(math.pi, 1, 6, 40)
    assert np.max(np.abs(h - np.eye(7))) < 1e-12
    assert h[0, 0] == pytest.approx(1.0, abs=1e-14)


def test_selberg_field_independence_symmetry_idempotence():
    a = selberg_matrix(math.pi, 1, 6, 40)
    b = selberg_matrix(2 * math.pi, 1, 6, 40)
    assert np.max(np.abs(a - b)) < 1e-12
    assert np.max(np.abs(a - a.T)) < 1e-12
    assert np.max(np.abs(a @ a - a)) < 1e-12


def test_selberg_higher_rank():
    h = selberg_matrix(math.pi, 2, 4, 30)
    assert np.max(np.abs(h - np.eye(5))) < 1e-12


def test_selberg_validation():
    with pytest.raises(ConfigError):
        selberg_matrix(math.pi, 1, 11, 40)
    with pytest.raises(ConfigError):
        selberg_matrix(math.pi, 1, 6, 5)
    with pytest.raises(NumericError):
        selberg_matrix(math.pi, 1, 6, 200)


# -- functional equation -------------------------------------------------------


def test_functional_equation_theta_transported(weier_square):
    section = theta_section(weier_square, 0.3 + 0.2j, policy=POLICY)
    in_flat_picture = ground_transform(math.pi, section, "inverse")
    report = verify_functional_equation(in_flat_picture, weier_square)
    assert report.passed
    assert report.residuals[0] < 1e-12


def test_functional_equation_automorphic_section(weier_square):
    report = verify_functional_equation(
        automorphic_section(weier_square, 1, 0.3 + 0.2j, policy=POLICY), weier_square
    )
    assert report.residuals[0] < 1e-12


def test_functional_equation_wrong_character_fails_loudly(square, weier_square):
    # negating one generator value gives a different (still valid) character;
    # a section built for the original must violate its equation at order one
    other = AutomorphicData(math.pi, square, Character(generator_values=(1.0, -1.0)))
    assert other.rdq_valid
    section = automorphic_section(weier_square, 0, 0.3 + 0.2j, policy=POLICY)
    report = verify_functional_equation(section, other)
    assert not report.passed
    assert report.residuals[0] > 0.5


# -- reproducing property ------------------------------------------------------


def test_reproducing_theta_self(weier_square):
    section = theta_section(weier_square, 0.3 + 0.2j, policy=POLICY)
    report = verify_reproducing(weier_square, "theta", section, policy=POLICY)
    assert report.passed
    assert report.residuals[0] < 1e-10


def test_reproducing_automorphic_self(weier_square):
    for l in (0, 1):
        section = automorphic_section(weier_square, l, 0.3 + 0.2j, policy=POLICY)
        report = verify_reproducing(weier_square, l, section, policy=POLICY)
        assert report.residuals[0] < 1e-10


def test_reproducing_cross_level_annihilation(weier_square):
    section = automorphic_section(weier_square, 1, 0.3 + 0.2j, policy=POLICY)
    report = verify_reproducing(weier_square, 0, section, policy=POLICY, expect="annihilate")
    assert report.passed
    assert report.residuals[0] < 1e-10


def test_reproducing_expect_validation(weier_square):
    with pytest.raises(ConfigError):
        verify_reproducing(weier_square, 0, lambda z: 1.0, expect="vanish")


# -- vanishing integrals -------------------------------------------------------


def test_vanishing_integrals(weier_square, weier_hex):
    for data in (weier_square, weier_hex):
        report = verify_vanishing_integral(data, order=16)
        assert report.passed
        assert max(report.residuals) < 1e-12
        assert [2, 0] in report.details["coefficients"]


# -- Bargmann reproducing ------------------------------------------------------


def test_bargmann_monomials():
    for alpha in range(5):
        report = verify_bargmann_reproducing(math.pi, 1, alpha)
        assert report.passed
        assert report.residuals[0] < 1e-9
        assert report.details["tail_bound"] < 1e-10


def test_bargmann_validation():
    with pytest.raises(ConfigError):
        verify_bargmann_reproducing(math.pi, 1, 5)
    with pytest.raises(ConfigError):
        verify_bargmann_reproducing(math.pi, 2, (1,))
    with pytest.raises(ConfigError):
        verify_bargmann_reproducing(math.pi, 1, 0, radius=1.0)


# -- holomorphic isomorphism ---------------------------------------------------


def test_holomorphic_isomorphism(weier_square):
    report = verify_holomorphic_isomorphism(weier_square, 0.3 + 0.2j, size=128, policy=POLICY)
    assert report.passed
    assert report.details["observed_order"] > 1.8
    assert report.details["eq4_residual"] < 1e-8


def test_nonholomorphic_control(weier_square):
    # multiplying the lifted section by zbar must produce an order-one
    # Cauchy-Riemann residual under the same stencil
    size = 64
    section = automorphic_section(weier_square, 0, 0.3 + 0.2j, policy=POLICY)
    field = sample_grid(weier_square, size, section)
    pts = grid_points(weier_square.lattice, size)
    g = np.conj(pts) * np.exp(math.pi * np.abs(pts) ** 2 / 2) * field.values
    dt0 = (g[2:, 1:-1] - g[:-2, 1:-1]) * (size / 2.0)
    dt1 = (g[1:-1, 2:] - g[1:-1, :-2]) * (size / 2.0)
    dbar = 0.5 * (dt0 + 1j * dt1)
    residual = np.max(np.abs(dbar)) / np.max(np.abs(g[1:-1, 1:-1]))
    assert residual > 0.1


# -- restriction identity ------------------------------------------------------


def test_restriction_identity_light(weier_square):
    # low-order variant for the unit suite; calibration: 2.1e-5 at these orders
    psi = poincare_periodize(weier_square, Bump(center=0.5 + 0.5j, radius=0.3))
    report = verify_restriction_identity(weier_square, 0, psi, policy=POLICY,
                                         cell_order=32, bump_order=16, tolerance=5e-5)
    assert report.passed
    assert report.residuals[0] < 5e-5


def test_restriction_identity_zero_field(weier_square):
    report = verify_restriction_identity(weier_square, 0, lambda z: 0.0, policy=POLICY,
                                         support_center=0.5 + 0.5j, support_radius=0.3,
                                         cell_order=16, bump_order=8)
    assert report.residuals[0] == 0.0


def test_restriction_identity_needs_support(weier_square):
    with pytest.raises(ConfigError):
        verify_restriction_identity(weier_square, 0, lambda z: 0.0)


# -- report plumbing -----------------------------------------------------------


def test_report_invariant_and_serialization(weier_square):
    _, report = dimension_by_trace(weier_square, 0)
    assert isinstance(report, VerificationReport)
    assert report.passed == all(r <= report.tolerance for r in report.residuals)
    payload = report.to_dict()
    assert "runtime" not in payload
    assert payload["name"] == "dimension-trace-l0"
    assert report.runtime > 0


def test_run_all_green(weier_square):
    reports = run_all(weier_square, grid=128,
                      restriction_cell_order=32, restriction_bump_order=16,
                      restriction_tolerance=5e-5)
    assert len(reports) >= 15
    assert all(r.passed for r in reports)
    names = [r.name for r in reports]
    for expected in ("rdq", "selberg-identity", "theta-dimension-trace",
                     "holomorphic-isomorphism", "restriction-identity-l0"):
        assert expected in names
