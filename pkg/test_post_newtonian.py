#!/usr/bin/env python3
"""
Test Script for the post-Newtonian potentials and binary dynamics
"""

import numpy as np
import pytest

from desitter_gravity.exceptions import PostNewtonianError
from desitter_gravity.post_newtonian import (
    PSI_DISPLAY_RATIO,
    VECTOR_DISPLAY_RATIO,
    Body,
    assemble_1pn_field,
    displayed_metric_ratios,
    displayed_two_body_metric,
    gauge_function,
    gauge_hessian,
    harmonic_field,
    integrate_1pn_binary,
    isotropic_comparison,
    isotropic_radius,
    iterate_integral_field,
    metric_components,
    newtonian_potential,
    one_pn_acceleration,
    one_pn_energy,
    post_keplerian_parameters,
    psi_phi_potentials,
    schwarzschild_radius,
    smeared_potential,
    ym_isotropic_exact,
)

BINARY = [
    Body(2.0, [-10.0, 0.0, 0.0], [0.0, -0.05, 0.01]),
    Body(1.0, [20.0, 0.0, 0.0], [0.0, 0.1, -0.02]),
]
POINTS = np.array([[0.0, 30.0, 0.0], [50.0, 5.0, -3.0], [-4.0, -25.0, 12.0]])


def test_body_validation():
    with pytest.raises(PostNewtonianError):
        Body(0.0, [0.0, 0.0, 0.0])
    with pytest.raises(PostNewtonianError):
        Body(1.0, [0.0, 0.0, 0.0], [0.8, 0.7, 0.0])
    with pytest.raises(PostNewtonianError):
        Body(1.0, [0.0, 0.0])
    body = Body.from_dict({"mass": 1.5, "position": [1.0, 2.0, 3.0]})
    assert body.to_dict() == {"mass": 1.5, "position": [1.0, 2.0, 3.0], "velocity": [0.0, 0.0, 0.0]}


def test_static_body_field():
    body = Body(3.0, [0.0, 0.0, 0.0])
    field = assemble_1pn_field([body], np.array([[6.0, 0.0, 0.0]]))
    G = metric_components(field)
    assert field.h00[0] == pytest.approx(0.5)
    assert G[0, 0, 0] == pytest.approx(0.0)
    np.testing.assert_allclose(field.hij[0], 0.5 * np.eye(3))
    np.testing.assert_allclose(field.h0j, 0.0)


def test_field_point_on_body():
    with pytest.raises(PostNewtonianError):
        newtonian_potential(BINARY, np.array([-10.0, 0.0, 0.0]))


def test_gauge_identity_termwise():
    """Assembled field = harmonic field + ∂∂χ, component by component"""
    assembled = assemble_1pn_field(BINARY, POINTS)
    harmonic = harmonic_field(BINARY, POINTS)
    hess = gauge_hessian(BINARY, POINTS)
    np.testing.assert_allclose(harmonic.h00 + hess[..., 0, 0], assembled.h00, rtol=1e-13)
    np.testing.assert_allclose(harmonic.h0j + hess[..., 0, 1:], assembled.h0j, rtol=1e-12, atol=1e-16)
    np.testing.assert_allclose(harmonic.hij + hess[..., 1:, 1:], assembled.hij, rtol=1e-12, atol=1e-16)
    print("✅ h = h̃ + ∂∂χ holds termwise")


def test_phi_is_minus_hessian_time_component():
    _, phi = psi_phi_potentials(BINARY, POINTS)
    np.testing.assert_allclose(phi, -gauge_hessian(BINARY, POINTS)[..., 0, 0], rtol=1e-13)


def _chi_at(t, x):
    moved = [Body(b.mass, b.position + b.velocity * t, b.velocity) for b in BINARY]
    return gauge_function(moved, x)


def test_gauge_hessian_matches_finite_differences():
    step = 1e-2
    x0 = POINTS[1]
    numeric = np.zeros((4, 4))
    for mu in range(4):
        for nu in range(4):
            total = 0.0
            for s_mu, s_nu, weight in ((1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)):
                shift = np.zeros(4)
                shift[mu] += s_mu * step
                shift[nu] += s_nu * step
                total += weight * _chi_at(shift[0], x0 + shift[1:])
            numeric[mu, nu] = total / (4 * step**2)
    np.testing.assert_allclose(numeric, gauge_hessian(BINARY, x0), rtol=1e-4, atol=1e-8)


def _slow_binary(lam):
    speed = np.sqrt(lam / 4.0)
    return [Body(lam, [-1.0, 0.0, 0.0], [0.0, -speed, 0.0]), Body(lam, [1.0, 0.0, 0.0], [0.0, speed, 0.0])]


def test_first_iterate_is_the_1pn_field():
    points = np.array([[0.0, 3.0, 0.0], [4.0, 1.0, -1.0], [-2.5, -2.0, 1.5]])
    bodies = _slow_binary(1e-3)
    [first] = iterate_integral_field(bodies, points, 1)
    assembled = assemble_1pn_field(bodies, points)
    np.testing.assert_allclose(first.h00, assembled.h00, rtol=1e-13)
    np.testing.assert_allclose(first.h0j, assembled.h0j, rtol=1e-13)
    np.testing.assert_allclose(first.hij, assembled.hij, rtol=1e-13)
    with pytest.raises(PostNewtonianError):
        iterate_integral_field(bodies, points, 0)


def test_second_iterate_changes_h00_at_sixth_order():
    """Masses λ and speeds √(λ/4) give ε² ∝ λ, so |h² − h¹| / λ³ stays fixed"""
    points = np.array([[0.0, 3.0, 0.0], [4.0, 1.0, -1.0], [-2.5, -2.0, 1.5]])
    scaled = []
    for lam in (1e-2, 1e-3, 1e-4):
        first, second = iterate_integral_field(_slow_binary(lam), points, 2)
        scaled.append(np.max(np.abs(second.h00 - first.h00)) / lam**3)
    print(f"✅ |h2 - h1| / λ³: {scaled}")
    assert scaled[1] == pytest.approx(scaled[0], rel=1e-4)
    assert scaled[2] == pytest.approx(scaled[0], rel=1e-4)


def test_iteration_without_bodies():
    [only] = iterate_integral_field([], POINTS, 1)
    np.testing.assert_array_equal(only.h00, 0.0)


def test_displayed_two_body_metric():
    G = metric_components(assemble_1pn_field(BINARY, POINTS))
    shown = displayed_two_body_metric(BINARY, POINTS)
    np.testing.assert_allclose(G[..., 1, 1] - 1.0, shown["spatial"], rtol=1e-12)
    with pytest.raises(PostNewtonianError):
        displayed_two_body_metric(BINARY[:1], POINTS)


def test_displayed_metric_carries_half_the_psi_and_vector_terms():
    ratios = displayed_metric_ratios(BINARY, POINTS)
    print(f"✅ Assembled over displayed: {ratios}")
    assert ratios["newtonian"] == pytest.approx(1.0, rel=1e-12)
    assert ratios["spatial"] == pytest.approx(1.0, rel=1e-12)
    assert ratios["psi"] == pytest.approx(PSI_DISPLAY_RATIO, rel=1e-10)
    assert ratios["vector"] == pytest.approx(VECTOR_DISPLAY_RATIO, rel=1e-12)
    static = [Body(b.mass, b.position) for b in BINARY]
    assert displayed_metric_ratios(static, POINTS)["vector"] is None


def test_smeared_potential_far_field():
    body = Body(2.0, [0.0, 0.0, 0.0])
    x = np.array([[20.0, 0.0, 0.0]])
    newton = smeared_potential([body], x, width=1.0)
    chi = smeared_potential([body], x, width=1.0, kernel="chi")
    assert newton[0] == pytest.approx(0.1, rel=1e-6)
    assert chi[0] == pytest.approx(2.0 * (20.0 + 1.0 / 20.0), rel=1e-6)
    with pytest.raises(PostNewtonianError):
        smeared_potential([body], x, width=0.0)
    with pytest.raises(PostNewtonianError):
        smeared_potential([body], x, width=1.0, kernel="yukawa")


def test_isotropic_coordinates():
    m, r_bar = 1.0, 100.0
    assert isotropic_radius(schwarzschild_radius(r_bar, m), m) == pytest.approx(r_bar, rel=1e-14)
    ym, gr = isotropic_comparison(m, r_bar)
    x = m / r_bar
    assert ym == pytest.approx(x - 2 * x * x)
    assert gr == pytest.approx(x - x * x, abs=x**3)
    assert ym - gr == pytest.approx(-x * x, abs=2 * x**3)
    assert ym_isotropic_exact(m, r_bar) == pytest.approx(gr, abs=x**4)
    with pytest.raises(PostNewtonianError):
        isotropic_radius(1.0, 1.0)


def test_one_pn_acceleration_newtonian_limit():
    r = np.array([1e6, 0.0, 0.0])
    a = one_pn_acceleration(r, np.zeros(3), 1.0, 0.25)
    assert a[0] == pytest.approx(-1e-12, rel=1e-5)


def test_one_pn_energy_conserved_on_circular_orbit():
    r0, M = 1000.0, 1.0
    v0 = np.sqrt(M / r0)
    period = 2 * np.pi * r0**1.5
    orbit = integrate_1pn_binary(0.6, 0.4, [r0, 0.0, 0.0], [0.0, v0, 0.0], 2 * period)
    assert orbit.success
    energy = one_pn_energy(orbit.r, orbit.v, orbit.total_mass, orbit.nu)
    assert np.max(np.abs(energy - energy[0])) < 1e-6 * abs(energy[0])
    with pytest.raises(PostNewtonianError):
        integrate_1pn_binary(0.0, 1.0, [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], 1.0)


def test_post_keplerian_parameters():
    pk = post_keplerian_parameters(1.0, 1.0, 1e5, 0.0, x_proj=10.0)
    assert pk["gamma"] == 0.0
    assert pk["shapiro_r"] == 1.0
    n = 2 * np.pi / 1e5
    assert pk["omega_dot"] == pytest.approx(3 * n ** (5 / 3) * 2 ** (2 / 3))
    assert "shapiro_s" in pk
    with pytest.raises(PostNewtonianError):
        post_keplerian_parameters(1.0, 1.0, 1e5, 1.0)
