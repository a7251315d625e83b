#!/usr/bin/env python3
"""
Test Script for field strengths, field equations and the spherical solution
"""

import numpy as np
import pytest

from desitter_gravity.algebra import AlgebraMode, build_generators
from desitter_gravity.exceptions import FieldError
from desitter_gravity.field import (
    AnalyticPotential,
    GaugeParams,
    Grid,
    GridPotential,
    SourceField,
    abelian_limit_check,
    continuity_residual,
    custom_residual_norms,
    field_equation_residual,
    field_strength,
    gauge_transform,
    load_custom_field,
    grid_derivative,
    relaxed_residual,
    solve_spherical,
    spherical_cartesian,
    spherical_refinement_study,
    trace_action,
)
from desitter_gravity.lattice import smooth_test_potential

ETA = np.diag([-1.0, 1.0, 1.0, 1.0])
SMALL_GRID = Grid((0.0, 0.0, 0.0, 0.0), (0.1, 0.1, 0.1, 0.1), (5, 5, 5, 5))


def flat_potential():
    return AnalyticPotential(G_fn=lambda p: np.broadcast_to(ETA, p.shape[:-1] + (4, 4)).copy(), name="flat")


def perturbed_potential(strength):
    def G(points):
        wave = strength * np.sin(points[..., 0] + 0.5 * points[..., 1] - 0.3 * points[..., 3])
        return ETA + wave[..., None, None] * np.array([[1.0, 0.2, 0, 0], [0.2, 0.5, 0, 0], [0, 0, 0, 0], [0, 0, 0, -0.4]])

    return AnalyticPotential(G_fn=G, name="wave")


def test_grid_validation():
    with pytest.raises(FieldError):
        Grid((0.0, 0.0, 0.0), (1.0, 1.0, 1.0), (2, 2, 2))
    with pytest.raises(FieldError):
        Grid((0.0,) * 4, (0.1, 0.0, 0.1, 0.1), (3, 3, 3, 3))
    refined = SMALL_GRID.refined()
    assert refined.shape == (9, 9, 9, 9)
    assert refined.spacing == (0.05, 0.05, 0.05, 0.05)


def test_fourth_order_derivative_exact_for_cubics():
    grid = Grid((0.0, 0.0, 0.0, 0.0), (1.0, 0.25, 1.0, 1.0), (1, 9, 1, 1))
    x = grid.points()[..., 1]
    d = grid_derivative(x**3, grid, 1, order=4)
    np.testing.assert_allclose(d[:, 2:-2], 3 * x[:, 2:-2] ** 2, atol=1e-12)


def test_derivative_needs_enough_points():
    grid = Grid((0.0,) * 4, (0.1,) * 4, (1, 4, 1, 1))
    with pytest.raises(FieldError):
        grid_derivative(np.zeros(grid.shape), grid, 1, order=4)


def test_flat_vacuum_has_no_field_strength(any_generators):
    strengths = field_strength(flat_potential(), any_generators, SMALL_GRID)
    assert np.max(np.abs(strengths.E)) == 0.0
    assert np.max(np.abs(strengths.F)) < 1e-15


def test_field_strength_antisymmetry(desitter):
    points = np.random.default_rng(0).uniform(-1.0, 1.0, (20, 4))
    strengths = field_strength(smooth_test_potential(), desitter, points)
    assert strengths.antisymmetry_residual() < 1e-12
    assert np.max(np.abs(strengths.E)) > 0.0


def test_non_antisymmetric_torsion_rejected():
    potential = AnalyticPotential(G_fn=lambda p: np.zeros(p.shape[:-1] + (4, 4)),
                                  H_fn=lambda p: np.ones(p.shape[:-1] + (4, 4, 4)))
    with pytest.raises(FieldError):
        potential.evaluate(np.zeros((1, 4)))


def test_vacuum_solves_sourceless_equations(any_generators):
    source = SourceField.zeros(SMALL_GRID.shape)
    rank2, rank3 = field_equation_residual(flat_potential(), source, any_generators, SMALL_GRID)
    assert np.max(np.abs(rank2)) < 1e-14
    assert np.max(np.abs(rank3)) < 1e-14
    vector, tensor = continuity_residual(flat_potential(), source, any_generators, SMALL_GRID)
    assert np.max(np.abs(vector)) == 0.0
    assert np.max(np.abs(tensor)) == 0.0


def test_source_shape_mismatch(desitter):
    with pytest.raises(FieldError):
        field_equation_residual(flat_potential(), SourceField.zeros((3, 3, 3, 3)), desitter, SMALL_GRID)


def test_abelian_limit_exact_for_poincare():
    """With commuting translations the full equations are the Abelian ones"""
    gens = build_generators(AlgebraMode.POINCARE)
    source = SourceField.zeros(SMALL_GRID.shape)
    difference = abelian_limit_check(perturbed_potential(0.1), source, gens, SMALL_GRID)
    print(f"✅ Poincaré Abelian difference: {difference:.3e}")
    assert difference < 1e-9


def test_abelian_limit_differs_for_desitter(desitter):
    source = SourceField.zeros(SMALL_GRID.shape)
    difference = abelian_limit_check(perturbed_potential(0.1), source, desitter, SMALL_GRID)
    assert difference > 1e-6


def test_abelian_limit_needs_torsion_free_input(desitter):
    source = SourceField.zeros(SMALL_GRID.shape)
    with pytest.raises(FieldError):
        abelian_limit_check(smooth_test_potential(), source, desitter, SMALL_GRID)


def test_relaxed_residual_of_newtonian_component():
    grid = Grid((0.0, 4.7, -0.3, -0.3), (1.0, 0.1, 0.1, 0.1), (1, 7, 7, 7))
    potential = spherical_cartesian(1.0)
    rank2, rank3 = relaxed_residual(potential, SourceField.zeros(grid.shape), grid)
    inner = grid.interior(2)
    assert np.max(np.abs(rank2[inner][..., 0, 0])) < 1e-6
    assert np.max(np.abs(rank3)) == 0.0


def test_gauge_transform_leaves_action_invariant_at_first_order(desitter):
    potential = smooth_test_potential()
    lower, upper = np.zeros(4), np.full(4, 0.5)
    base = trace_action(potential, desitter, lower, upper, resolution=4)

    def shifted(scale):
        params = GaugeParams(
            xi=lambda p: scale * np.stack([np.cos(p[..., 1]), p[..., 0], np.sin(p[..., 2]), p[..., 3] ** 2], axis=-1),
            chi=lambda p: scale * np.einsum("...,ab->...ab", np.cos(p[..., 0] + p[..., 3]),
                                            np.array([[0, 1, 0, 0], [-1, 0, 2, 0], [0, -2, 0, 1], [0, 0, -1, 0.0]])),
        )
        gauged = gauge_transform(potential, params, desitter)
        return trace_action(gauged, desitter, lower, upper, resolution=4) - base

    first, second = shifted(5e-3), shifted(1e-2)
    print(f"✅ action changes {first:.3e}, {second:.3e}")
    assert second / first == pytest.approx(4.0, rel=0.15)


def test_grid_gauge_transform_with_zero_parameters(desitter):
    potential = GridPotential(SMALL_GRID, perturbed_potential(0.1).G_fn(SMALL_GRID.points()))
    gauged = gauge_transform(potential, GaugeParams(xi=np.zeros(SMALL_GRID.shape + (4,)),
                                                    chi=np.zeros(SMALL_GRID.shape + (4, 4))), desitter)
    np.testing.assert_allclose(gauged.G, potential.G, atol=1e-12)
    np.testing.assert_allclose(gauged.H, 0.0, atol=1e-12)


def test_grid_potential_shape_check():
    with pytest.raises(FieldError):
        GridPotential(SMALL_GRID, np.zeros((5, 5, 5, 4, 4)))


def test_trace_action_resolution(desitter):
    with pytest.raises(FieldError):
        trace_action(flat_potential(), desitter, np.zeros(4), np.ones(4), resolution=1)


def test_spherical_solution_components():
    solution = solve_spherical(2.0, r_min=1.0)
    point = np.array([[0.0, 8.0, np.pi / 2, 0.0]])
    G, _ = solution.evaluate(point)
    assert G[0, 0, 0] == pytest.approx(-0.5)
    assert G[0, 1, 1] == pytest.approx(1.5)
    assert G[0, 2, 2] == pytest.approx(64.0)
    assert G[0, 3, 3] == pytest.approx(64.0)
    with pytest.raises(FieldError):
        solution.evaluate(np.array([[0.0, 0.5, 1.0, 0.0]]))


def test_spherical_zero_mass_is_flat():
    G00, Grr = solve_spherical(0.0, r_min=0.1).radial_components(3.0)
    assert G00 == -1.0
    assert Grr == 1.0


@pytest.mark.parametrize("mass, r_min", [(-1.0, 1.0), (1.0, 0.0)])
def test_spherical_rejects_bad_input(mass, r_min):
    with pytest.raises(FieldError):
        solve_spherical(mass, r_min)


@pytest.mark.parametrize("order, threshold", [(2, 1.9), (4, 3.8)])
def test_spherical_refinement_order(order, threshold):
    study = spherical_refinement_study(order=order, levels=3)
    print(f"✅ order-{order} stencil: {study.orders}")
    assert study.final_order >= threshold
    assert study.rows[-1]["residual_G00"] < study.rows[0]["residual_G00"]


# ===================
# Custom samples
# ===================

def _custom_data(shape=(1, 9, 1, 1), wave=0.0):
    grid = Grid((0.0, 0.0, 0.0, 0.0), (1.0, 0.125, 1.0, 1.0), shape)
    G = perturbed_potential(wave).G_fn(grid.points()) if wave else np.broadcast_to(ETA, shape + (4, 4))
    return {"grid": {"origin": list(grid.origin), "spacing": list(grid.spacing), "shape": list(shape)},
            "potential": {"G": np.asarray(G).tolist()}}


def test_custom_flat_samples_have_no_residual(desitter):
    potential, source = load_custom_field(_custom_data())
    assert potential.grid.shape == (1, 9, 1, 1)
    assert np.all(source.T == 0.0)
    norms = custom_residual_norms(potential, source, desitter)
    print(f"✅ flat custom residuals: {norms}")
    assert norms["h"] == 0.125
    assert norms["residual_rank2"] < 1e-12
    assert norms["residual_rank3"] < 1e-12


def test_custom_wave_leaves_a_residual(desitter):
    potential, source = load_custom_field(_custom_data(wave=0.1), order=2)
    norms = custom_residual_norms(potential, source, desitter, order=2)
    assert norms["residual_rank2"] > 1e-6


@pytest.mark.parametrize("mutate", [
    lambda d: d.pop("grid"),
    lambda d: d["potential"].pop("G"),
    lambda d: d["potential"].update(G=[[1.0, 2.0]]),
    lambda d: d["grid"].update(shape=[1, 9, 1]),
    lambda d: d.update(source={"T": [[0.0]]}),
])
def test_custom_data_errors(mutate):
    data = _custom_data()
    mutate(data)
    with pytest.raises(FieldError):
        load_custom_field(data)


def test_custom_grid_needs_open_axis_and_interior(desitter):
    potential, source = load_custom_field(_custom_data(shape=(1, 1, 1, 1)))
    with pytest.raises(FieldError):
        custom_residual_norms(potential, source, desitter)
    potential, source = load_custom_field(_custom_data(shape=(1, 5, 1, 1)))
    with pytest.raises(FieldError):
        custom_residual_norms(potential, source, desitter)
