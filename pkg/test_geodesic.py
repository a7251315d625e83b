#!/usr/bin/env python3
"""
Test Script for geodesic motion and the classic observables
"""

import numpy as np
import pytest

from desitter_gravity.exceptions import GeodesicError
from desitter_gravity.field import solve_spherical
from desitter_gravity.geodesic import (
    GeodesicState,
    apsidal_motion,
    bound_orbit_state,
    circular_orbit_state,
    classic_tests,
    gravitational_redshift,
    integrate_geodesic,
    kepler_period_check,
    killing_angular_momentum,
    killing_energy,
    light_deflection,
    perihelion_precession,
    radial_potential_comparison,
)


def test_circular_orbit_conserves_norm_and_radius():
    ic = circular_orbit_state(1.0, 10.0)
    traj = integrate_geodesic(ic, solve_spherical(1.0, r_min=1.0), 2000.0, tol=1e-10, samples=501)
    assert traj.success
    assert traj.norms()[0] == pytest.approx(-1.0, abs=1e-12)
    assert traj.norm_drift() < 1e-8
    assert np.max(np.abs(traj.x[:, 1] - 10.0)) < 1e-6
    assert np.max(np.abs(killing_energy(traj) - killing_energy(traj)[0])) < 1e-8
    print(f"✅ Circular orbit: norm drift {traj.norm_drift():.2e}")


def test_circular_orbit_period_is_keplerian():
    period, kepler = kepler_period_check(1.0, 20.0)
    assert period == pytest.approx(kepler, rel=1e-7)


def test_no_circular_orbit_inside_photon_sphere():
    with pytest.raises(GeodesicError):
        circular_orbit_state(1.0, 3.0)


def test_bound_orbit_turning_points():
    ic = bound_orbit_state(1.0, 20.0, 40.0)
    period = 2.0 * np.pi * 30.0**1.5
    traj = integrate_geodesic(ic, solve_spherical(1.0, r_min=1.0), period, tol=1e-10, samples=20001)
    r = traj.x[:, 1]
    assert r[0] == pytest.approx(40.0, abs=1e-12)
    assert abs(np.min(r) - 20.0) < 2e-3
    assert np.max(r) <= 40.0 + 1e-6
    L = killing_angular_momentum(traj)
    assert np.max(np.abs(L - L[0])) < 1e-8 * abs(L[0])


def test_time_reversal_returns_to_start():
    ic = bound_orbit_state(1.0, 15.0, 25.0)
    potential = solve_spherical(1.0, r_min=1.0)
    forward = integrate_geodesic(ic, potential, 300.0, tol=1e-11)
    back = integrate_geodesic(forward.final.reversed(), potential, 300.0, tol=1e-11)
    np.testing.assert_allclose(back.final.x[1:], ic.x[1:], atol=1e-6)
    np.testing.assert_allclose(back.final.x[0], ic.x[0], atol=1e-5)


def test_integration_input_checks():
    ic = circular_orbit_state(1.0, 10.0)
    potential = solve_spherical(1.0, r_min=1.0)
    with pytest.raises(GeodesicError):
        integrate_geodesic(ic, potential, 10.0, tol=0.0)
    with pytest.raises(GeodesicError):
        integrate_geodesic(ic, potential, -1.0)
    with pytest.raises(GeodesicError):
        GeodesicState(np.zeros(3), np.zeros(4))


def test_perihelion_precession_weak_field():
    advance = perihelion_precession(1.0, 1e4, 0.2)
    oracle = 6.0 * np.pi / (1e4 * (1.0 - 0.2**2))
    print(f"✅ Advance {advance:.6e} vs {oracle:.6e}")
    assert advance == pytest.approx(oracle, rel=1e-2)


def test_perihelion_precession_edge_cases():
    assert perihelion_precession(0.0, 1.0, 0.3) == 0.0
    with pytest.raises(GeodesicError):
        perihelion_precession(1.0, 1e4, 0.2, n_orbits=2)
    with pytest.raises(GeodesicError):
        perihelion_precession(1.0, 1e4, 0.0)
    with pytest.raises(GeodesicError):
        perihelion_precession(1.0, 10.0, 0.5)


def test_apsidal_motion_period_and_advance():
    motion = apsidal_motion(1.0, 1e4, 0.2)
    kepler = 2.0 * np.pi * 1e4**1.5
    print(f"✅ Period {motion.period:.6e} vs Kepler {kepler:.6e}, advance {motion.advance:.6e}")
    assert motion.period == pytest.approx(kepler, rel=1e-2)
    assert motion.advance == perihelion_precession(1.0, 1e4, 0.2)


def test_apsidal_motion_needs_a_central_mass():
    with pytest.raises(GeodesicError):
        apsidal_motion(0.0, 1e4, 0.2)
    with pytest.raises(GeodesicError):
        apsidal_motion(1.0, -1.0, 0.2)


def test_light_deflection_weak_field():
    deflection = light_deflection(1.0, 1e4)
    assert deflection == pytest.approx(4e-4, rel=1e-2)


def test_light_capture():
    with pytest.raises(GeodesicError):
        light_deflection(1.0, 5.0)


def test_gravitational_redshift():
    assert gravitational_redshift(1.0, 10.0, np.inf) == pytest.approx(np.sqrt(0.8))
    assert gravitational_redshift(0.0, 10.0, 20.0) == 1.0
    with pytest.raises(GeodesicError):
        gravitational_redshift(1.0, 2.0, np.inf)


def test_radial_potential_comparison():
    ym, gr, diff = radial_potential_comparison(1e-3, 1.0)
    assert ym == pytest.approx(1.002)
    assert diff / 1e-6 == pytest.approx(4.0, rel=1e-2)
    with pytest.raises(GeodesicError):
        radial_potential_comparison(1.0, 1.5)


def test_classic_tests_all_pass():
    observables = classic_tests()
    assert [o.name for o in observables] == [
        "perihelion_precession", "light_deflection", "redshift", "radial_potential_ratio"]
    for obs in observables:
        print(f"  {obs.name}: {obs.value:.6e} vs {obs.oracle:.6e}")
        assert obs.passed, obs.name
