#!/usr/bin/env python3
"""
Test Script for the spin-tensor matter model
"""

import numpy as np
import pytest
from loguru import logger

from desitter_gravity.exceptions import MatterError
from desitter_gravity.matter import (
    REST_FRAME_T00_RATIO,
    SpinPolarization,
    boost_matrix,
    boost_stress_energy,
    energy_flux,
    rest_frame_components,
    rest_mass,
    spin_tensor,
    stress_energy,
    stress_energy_blocks,
)

MOVING = SpinPolarization(p=[0.3, -1.2, 0.5], s=[0.7, 0.1, -0.4])


def test_stress_energy_matches_block_form():
    T = stress_energy(spin_tensor(MOVING))
    np.testing.assert_allclose(T.T, stress_energy_blocks(MOVING).T, atol=1e-14)
    print(f"✅ T_00 = {T.T[0, 0]:.6f}")


def test_stress_energy_symmetric_and_traceless():
    T = stress_energy(spin_tensor(MOVING))
    assert T.symmetry_residual() < 1e-14
    assert abs(T.trace()) < 1e-14


def test_energy_density_and_flux():
    T = stress_energy(spin_tensor(MOVING)).T
    p, s = MOVING.p, MOVING.s
    assert T[0, 0] == pytest.approx(0.5 * (p @ p + s @ s))
    np.testing.assert_allclose(T[0, 1:], np.cross(p, s), atol=1e-14)
    np.testing.assert_allclose(energy_flux(MOVING), np.cross(p, s))


def test_rest_frame_components():
    sp = SpinPolarization(p=[0.0, 0.0, 1.0], s=[0.0, 0.0, 2.0])
    components = rest_frame_components(sp)
    assert components.rest_mass == pytest.approx(5.0)
    assert components.t00 == pytest.approx(2.5)
    assert components.trr == pytest.approx(-2.5)
    assert np.all(energy_flux(sp) == 0)


def test_rest_frame_t00_is_half_the_rest_mass():
    sp = SpinPolarization(p=[0.0, 3.0, 0.0], s=[0.0, -1.0, 0.0])
    messages = []
    handler = logger.add(messages.append, level="WARNING")
    try:
        components = rest_frame_components(sp)
    finally:
        logger.remove(handler)
    print(f"✅ T_00 {components.t00} for rest mass {components.rest_mass}")
    assert components.t00 == pytest.approx(REST_FRAME_T00_RATIO * components.rest_mass)
    assert components.trr == pytest.approx(-components.t00)
    assert len(messages) == 1
    assert "spherical representation" in messages[0]


def test_rest_frame_needs_parallel_vectors():
    with pytest.raises(MatterError):
        rest_frame_components(MOVING)


def test_printed_layout_differs_but_stays_traceless():
    sp = SpinPolarization(p=[0.0, 0.0, 0.0], s=[1.0, 1.0, 0.0])
    printed = stress_energy(spin_tensor(sp, layout="printed"))
    antisym = stress_energy(spin_tensor(sp))
    assert not np.allclose(printed.T, antisym.T)
    assert abs(printed.trace()) < 1e-14
    assert printed.symmetry_residual() < 1e-14


def test_unknown_layout():
    with pytest.raises(MatterError):
        spin_tensor(MOVING, layout="diagonal")


def test_bad_vectors():
    with pytest.raises(MatterError):
        SpinPolarization(p=[1.0, 0.0], s=[0.0, 0.0, 1.0])


def test_rest_mass():
    assert rest_mass(MOVING) == pytest.approx(MOVING.p @ MOVING.p + MOVING.s @ MOVING.s)


def test_boost_preserves_symmetry_and_trace():
    T = stress_energy(spin_tensor(MOVING))
    boosted = boost_stress_energy(T, [0.6, 0.0, 0.2])
    assert boosted.symmetry_residual() < 1e-12
    assert abs(boosted.trace()) < 1e-12
    assert boosted.T[0, 0] != pytest.approx(T.T[0, 0])


def test_boost_is_lorentz_transformation():
    B = boost_matrix([0.1, -0.5, 0.3])
    eta = np.diag([-1.0, 1.0, 1.0, 1.0])
    np.testing.assert_allclose(B.T @ eta @ B, eta, atol=1e-14)


def test_superluminal_boost():
    with pytest.raises(MatterError):
        boost_matrix([0.8, 0.7, 0.0])
