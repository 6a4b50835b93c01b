import math

import numpy as np
import pytest

from src.errors import CyclicIntersectionError, GridMismatchError, SetValidationError
from src.fields import plane_box
from src.fixtures import arc_shapes, thickened_arcs
from src.sets import (SetConfig, cyclic_neighbours, distance_field, hausdorff_distance, merge_last_two, neighborhood,
                      rasterize, rasterize_set, split_by_neighborhood)


def single_node(grid, i, j):
    mask = np.zeros(grid.shape, dtype=bool)
    mask[i, j] = True
    return mask


def test_cyclic_neighbours():
    assert cyclic_neighbours(0, 3, 4)
    assert not cyclic_neighbours(0, 2, 4)
    assert cyclic_neighbours(0, 2, 3)


def test_three_disjoint_discs_on_torus(small_torus):
    shapes = [{'kind': 'disc', 'center': [x, 0.5], 'radius': 0.1} for x in (0.2, 0.5, 0.8)]
    config = rasterize(shapes, small_torus)
    assert config.n == 3
    assert all(m.any() for m in config.masks)


def test_torus_disc_wraps_across_seam(small_torus):
    mask = rasterize_set({'kind': 'disc', 'center': [0.0, 0.5], 'radius': 0.1}, small_torus)
    assert mask[0, 16] and mask[-1, 16] and mask[1, 16]


def test_four_arcs_form_a_valid_config():
    config = thickened_arcs(4, 64)
    assert config.n == 4
    assert config.intersection(0, 1).any()
    assert config.intersection(3, 0).any()


def test_crossing_sets_name_the_pair():
    shapes = arc_shapes(4)
    shapes[2] = {'kind': 'disc', 'center': [0.6, 0.0], 'radius': 0.1}
    with pytest.raises(CyclicIntersectionError) as info:
        rasterize(shapes, plane_box(cells=64))
    assert info.value.pair == (0, 2)
    assert 'X1' in str(info.value) and 'X3' in str(info.value)


def test_empty_set_is_rejected(box):
    shapes = [{'kind': 'disc', 'center': [0.0, 0.0], 'radius': 0.1},
              {'kind': 'disc', 'center': [5.0, 5.0], 'radius': 0.1}]
    with pytest.raises(SetValidationError):
        rasterize(shapes, box)


def test_mask_shape_checked(box):
    with pytest.raises(GridMismatchError):
        SetConfig(box, (np.ones((3, 3), dtype=bool), np.ones((3, 3), dtype=bool)))


def test_rasterized_polyline_without_thickness_is_a_column(box):
    mask = rasterize_set({'kind': 'polyline', 'points': [[0.25, -0.5], [0.25, 0.5]], 'thickness': 0.0}, box)
    columns = np.unique(np.argwhere(mask)[:, 0])
    assert columns.tolist() == [40]


def test_callable_shape(box):
    mask = rasterize_set(lambda X, Y: X ** 2 + Y ** 2 - 0.25, box)
    X, Y = box.coords()
    assert mask[np.hypot(X, Y) <= 0.5].all()


def test_neighborhood_zero_radius_is_identity(box):
    mask = single_node(box, 20, 20)
    assert np.array_equal(neighborhood(mask, 0.0, box), mask)


def test_neighborhood_of_single_node_is_lattice_disc(box):
    grown = neighborhood(single_node(box, 32, 32), 2.5 * box.h, box)
    I, J = np.meshgrid(np.arange(box.shape[0]), np.arange(box.shape[1]), indexing='ij')
    brute = (I - 32) ** 2 + (J - 32) ** 2 <= 2.5 ** 2
    assert grown.sum() == 21
    assert np.array_equal(grown, brute)


def test_neighborhood_is_monotone(box):
    mask = rasterize_set({'kind': 'box', 'lower': [-0.2, -0.1], 'upper': [0.3, 0.0]}, box)
    small = neighborhood(mask, 0.05, box)
    large = neighborhood(mask, 0.12, box)
    assert not np.any(small & ~large)


def test_neighborhood_rejects_negative_radius(box):
    with pytest.raises(SetValidationError):
        neighborhood(single_node(box, 1, 1), -0.1, box)


def test_distance_field_wraps_on_torus(small_torus):
    d = distance_field(single_node(small_torus, 0, 0), small_torus)
    assert d[-1, 0] == pytest.approx(small_torus.h)


def test_hausdorff_distance(box):
    a = single_node(box, 10, 10)
    assert hausdorff_distance(a, a, box) == 0.0
    b = single_node(box, 13, 14)
    assert hausdorff_distance(a, b, box) == pytest.approx(5 * box.h)


def test_hausdorff_disc_vs_dilation(box):
    disc = rasterize_set({'kind': 'disc', 'center': [0.0, 0.0], 'radius': 0.3}, box)
    r = 0.2
    assert hausdorff_distance(disc, neighborhood(disc, r, box), box) <= r + box.h * math.sqrt(2)


def test_hausdorff_needs_nonempty(box):
    with pytest.raises(SetValidationError):
        hausdorff_distance(single_node(box, 1, 1), np.zeros(box.shape, dtype=bool), box)


def test_merge_four_arcs(quad):
    merged = merge_last_two(quad)
    assert merged.n == 3
    assert np.array_equal(merged.masks[2], quad.masks[2] | quad.masks[3])


def test_merge_far_apart_quadruple(box):
    shapes = [{'kind': 'disc', 'center': [x, y], 'radius': 0.1}
              for x, y in ((-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5))]
    merged = merge_last_two(rasterize(shapes, box))
    assert merged.n == 3


def test_merge_needs_four_sets(triple):
    with pytest.raises(SetValidationError):
        merge_last_two(triple)


def test_split_by_neighbourhood_adds_k(triple):
    grid = triple.grid
    core = triple.intersection(0, 2)
    k = neighborhood(core, 3 * grid.h, grid)
    split = split_by_neighborhood(triple, k)
    assert split.n == 4
    assert np.array_equal(split.masks[3], k)
    assert split.labels[-1] == 'K'


def test_split_rejects_k_meeting_middle_set(triple):
    k = triple.intersection(0, 2) | triple.masks[1]
    with pytest.raises(SetValidationError):
        split_by_neighborhood(triple, k)


def test_split_rejects_empty_k(triple):
    with pytest.raises(SetValidationError):
        split_by_neighborhood(triple, np.zeros(triple.grid.shape, dtype=bool))


def test_shrinking_k_converges_to_core(triple):
    grid = triple.grid
    core = triple.intersection(0, 2)
    gaps = [hausdorff_distance(neighborhood(core, r * grid.h, grid), core, grid) for r in (6, 4, 2, 0)]
    assert gaps == sorted(gaps, reverse=True)
    assert gaps[-1] == 0.0


def test_summary(triple):
    summary = triple.summary()
    assert summary['n'] == 3
    assert summary['labels'] == ['X1', 'X2', 'X3']
    assert all(count > 0 for count in summary['node_counts'])
