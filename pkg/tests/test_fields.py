import numpy as np
import pytest

from src.errors import DomainOfDefinitionError, GridMismatchError
from src.fields import (GridManifold, ScalarField, VectorMapField, bracket_values, bracket_vanishing_report, diff,
                        diff_adjoint, grid_from_dict, max_value, plane_box, poisson_bracket, postcompose,
                        read_field_binary, read_field_csv, read_mask_pbm, scalar_bracket, sup_norm, torus,
                        write_field_binary, write_field_csv, write_mask_pbm)
from src.geometry import make_unit_disc
from src.planar_maps import homothety, identity, pseudoretract_smooth


def coordinate_map(grid, fx, fy, base=(0.0, 0.0)):
    X, Y = grid.coords()
    return VectorMapField(grid, np.stack([fx(X, Y), fy(X, Y)], axis=-1), base)


def interior(grid):
    mask = np.ones(grid.shape, dtype=bool)
    mask[[0, -1], :] = False
    mask[:, [0, -1]] = False
    return mask


def test_plane_box_shape_and_spacing(box):
    assert box.shape == (65, 65)
    assert box.h == pytest.approx(1 / 32)
    assert not box.periodic


def test_torus_shape(small_torus):
    assert small_torus.shape == (32, 32)
    assert small_torus.periodic
    assert not small_torus.frame_mask().any()


def test_unequal_spacing_is_rejected():
    with pytest.raises(GridMismatchError):
        GridManifold('plane', (0.0, 0.0), (1.0, 2.0), (8, 8))


def test_grid_from_dict_override():
    g = grid_from_dict({'kind': 'torus', 'size': [1.0, 1.0], 'cells': 16}, cells_override=32)
    assert g.cells == (32, 32)


def test_frame_mask_width(box):
    frame = box.frame_mask()
    assert frame[1, 30] and not frame[2, 30]


def test_torus_displacement_wraps(small_torus):
    d = small_torus.distance(np.array([0.05, 0.5]), np.array([0.95, 0.5]))
    assert d == pytest.approx(0.1)


def test_canonical_pair_bracket_is_one(box):
    phi = coordinate_map(box, lambda X, Y: X, lambda X, Y: Y)
    b = poisson_bracket(phi)
    np.testing.assert_allclose(b.values[interior(box)], 1.0, atol=1e-12)
    assert sup_norm(b) == pytest.approx(1.0, abs=1e-12)


def test_bracket_of_equal_components_vanishes(box):
    phi = coordinate_map(box, lambda X, Y: np.sin(X * Y), lambda X, Y: np.sin(X * Y))
    assert sup_norm(poisson_bracket(phi)) == 0.0


def test_bracket_of_quadratic_matches_analytic(box):
    phi = coordinate_map(box, lambda X, Y: X ** 2, lambda X, Y: Y)
    b = poisson_bracket(phi).values
    X, _ = box.coords()
    error = np.max(np.abs(b - 2 * X)[interior(box)])
    assert error <= 4 * box.h ** 2


def test_torus_bracket_second_order(small_torus):
    two_pi = 2 * np.pi
    phi = coordinate_map(small_torus, lambda X, Y: np.sin(two_pi * X), lambda X, Y: np.sin(two_pi * Y))
    X, Y = small_torus.coords()
    exact = two_pi ** 2 * np.cos(two_pi * X) * np.cos(two_pi * Y)
    error = np.max(np.abs(poisson_bracket(phi).values - exact))
    assert error <= two_pi ** 4 * small_torus.h ** 2


def test_diff_adjoint_is_transpose(box, small_torus):
    rng = np.random.default_rng(1)
    for grid in (box, small_torus):
        u = rng.normal(size=grid.shape)
        v = rng.normal(size=grid.shape)
        for axis in (0, 1):
            assert np.sum(diff(u, grid, axis) * v) == pytest.approx(np.sum(u * diff_adjoint(v, grid, axis)))


def test_sup_and_max():
    grid = plane_box(cells=8)
    zero = ScalarField(grid, np.zeros(grid.shape))
    assert sup_norm(zero) == 0.0 and max_value(zero) == 0.0
    values = np.zeros(grid.shape)
    values[3, 3] = -3.0
    assert sup_norm(ScalarField(grid, values)) == 3.0
    values[4, 4] = 1.0
    assert max_value(ScalarField(grid, values)) == 1.0


def test_scalar_bracket_antisymmetric(box):
    f = ScalarField.from_function(box, lambda X, Y: X * Y)
    g = ScalarField.from_function(box, lambda X, Y: X + Y ** 3)
    np.testing.assert_allclose(scalar_bracket(f, g).values, -scalar_bracket(g, f).values)


def test_max_of_compactly_supported_bracket_is_nonnegative(box):
    bump = lambda X, Y: np.exp(-8 * (X ** 2 + Y ** 2))
    phi = coordinate_map(box, lambda X, Y: bump(X, Y) * X, lambda X, Y: bump(X, Y) * Y ** 2)
    assert max_value(poisson_bracket(phi)) >= -box.h ** 2


def test_fields_reject_wrong_shape(box):
    with pytest.raises(GridMismatchError):
        ScalarField(box, np.zeros((3, 3)))
    with pytest.raises(GridMismatchError):
        VectorMapField(box, np.full(box.shape + (2,), np.nan))


def test_postcompose_identity_is_noop(box):
    phi = coordinate_map(box, lambda X, Y: X / 2, lambda X, Y: Y / 3)
    out = postcompose(phi, identity())
    np.testing.assert_array_equal(out.values, phi.values)


def test_postcompose_homothety_scales_bracket(box):
    phi = coordinate_map(box, lambda X, Y: X * Y, lambda X, Y: X - Y ** 2)
    before = poisson_bracket(phi).values
    after = poisson_bracket(postcompose(phi, homothety(4.0))).values
    np.testing.assert_allclose(after, 4.0 * before, rtol=1e-12, atol=1e-12)


def test_postcompose_transports_basepoint(box):
    phi = coordinate_map(box, lambda X, Y: X, lambda X, Y: Y, base=(0.5, 0.0))
    assert postcompose(phi, homothety(4.0)).cs_basepoint == (1.0, 0.0)


def test_postcompose_pseudoretract_bracket_growth(box):
    phi = coordinate_map(box, lambda X, Y: 1.5 * X, lambda X, Y: 1.5 * Y)
    T = pseudoretract_smooth(make_unit_disc('ball'), 0.1)
    before = sup_norm(poisson_bracket(phi))
    after = sup_norm(poisson_bracket(postcompose(phi, T)))
    assert after <= 1.1 * before + 10 * box.h


def test_postcompose_checks_domain(box):
    restricted = identity()
    restricted.defined_on = lambda z: z[:, 0] > 0
    phi = coordinate_map(box, lambda X, Y: X, lambda X, Y: Y)
    with pytest.raises(DomainOfDefinitionError):
        postcompose(phi, restricted)


def test_vanishing_report_vacuous_inside(box):
    phi = coordinate_map(box, lambda X, Y: 0.1 * X, lambda X, Y: 0.1 * Y)
    report = bracket_vanishing_report(phi, pseudoretract_smooth(make_unit_disc('ball'), 0.1))
    assert report.vacuous
    assert report.max_abs is None


def test_vanishing_report_outside_tends_to_zero():
    T = pseudoretract_smooth(make_unit_disc('ball'), 0.1)
    maxima = []
    for cells in (16, 32, 64):
        grid = plane_box(cells=cells)
        phi = coordinate_map(grid, lambda X, Y: 3 + X, lambda X, Y: Y)
        report = bracket_vanishing_report(phi, T)
        assert report.node_count == grid.size
        maxima.append(report.max_abs)
    assert maxima[-1] <= maxima[0] + 1e-12
    assert maxima[-1] <= 0.5


def test_binary_round_trip_is_bit_exact(box, tmp_path):
    phi = coordinate_map(box, lambda X, Y: np.sin(X), lambda X, Y: np.cos(Y), base=(0.25, -0.5))
    path = write_field_binary(tmp_path / 'phi.bin', phi, {'note': 'test'})
    back = read_field_binary(path)
    assert back.grid == box
    assert back.cs_basepoint == (0.25, -0.5)
    assert np.array_equal(back.values, phi.values)


def test_csv_round_trip(small_torus, tmp_path):
    f = ScalarField.from_function(small_torus, lambda X, Y: X - 2 * Y)
    back = read_field_csv(write_field_csv(tmp_path / 'f.csv', f))
    assert np.array_equal(back.values, f.values)


def test_pbm_round_trip(box, tmp_path):
    X, Y = box.coords()
    mask = (X > 0.2) & (Y < -0.1)
    back = read_mask_pbm(write_mask_pbm(tmp_path / 'm.pbm', mask))
    assert np.array_equal(back, mask)


def test_bracket_values_linear_in_each_argument(small_torus):
    rng = np.random.default_rng(3)
    f, g, k = (rng.normal(size=small_torus.shape) for _ in range(3))
    lhs = bracket_values(f + 2 * k, g, small_torus)
    rhs = bracket_values(f, g, small_torus) + 2 * bracket_values(k, g, small_torus)
    np.testing.assert_allclose(lhs, rhs, atol=1e-9)
