import math

import numpy as np
import pytest

from src.admissible import check_admissible, check_circle_admissible, circle_loop, initial_admissible_map
from src.errors import GeometryError, PremiseError, SectorPositioningError
from src.fields import VectorMapField, poisson_bracket, sup_norm
from src.fixtures import thickened_arcs
from src.geometry import MarkedBoundary
from src.pipelines import (PipelineCertificate, collapse_datum, collapse_vertex, default_allowance, forget_point,
                           power_transform, push_away, reduction_data, reduction_pipeline, retract_rescale)
from src.planar_maps import power_map
from src.sets import merge_last_two

EPS, DELTA = 0.3, 0.05


@pytest.fixture
def data():
    return reduction_data(4, EPS, DELTA)


@pytest.fixture
def merged_witness(quad, data):
    _, mb_merged = data
    return initial_admissible_map(merge_last_two(quad), mb_merged)


@pytest.fixture
def circle_witness(triple, ball_datum):
    return initial_admissible_map(triple, ball_datum)


def scaled_identity(grid, factor):
    X, Y = grid.coords()
    return VectorMapField(grid, factor * np.stack([X, Y], axis=-1), (0.0, 0.0))


def test_certificate_arithmetic():
    cert = PipelineCertificate('step', 2.0, 2.4, 1.1 / 0.9, 0.0, 0.1)
    assert cert.claimed_bound == pytest.approx(2.0 * 1.1 / 0.9)
    assert cert.measured_growth == pytest.approx(1.2)
    assert cert.slack == pytest.approx(2.0 * 1.1 / 0.9 + 0.1 - 2.4)
    assert cert.passed
    assert cert.to_dict()['verdict'] == 'pass'


def test_certificate_fails_on_inadmissible_output():
    cert = PipelineCertificate('step', 1.0, 1.0, 1.0, output_report={'all_ok': False})
    assert not cert.passed
    assert cert.to_dict()['verdict'] == 'fail'


def test_certificate_growth_of_zero_input():
    assert PipelineCertificate('step', 0.0, 0.0, 1.0).measured_growth == 1.0
    assert PipelineCertificate('step', 0.0, 0.5, 1.0).measured_growth == math.inf


def test_default_allowance_is_ten_cells():
    assert default_allowance(0.01) == pytest.approx(0.1)


def test_reduction_data_forgets_to_the_merged_datum(data):
    mb_n, mb_merged = data
    assert mb_n.n == 4 and mb_merged.n == 3
    np.testing.assert_allclose(mb_n.point_array[-1], [1.0, 1.0])
    np.testing.assert_allclose(mb_n.forget_last().point_array, mb_merged.point_array)


def test_forget_point_keeps_the_field(quad, data):
    mb_n, _ = data
    phi = initial_admissible_map(quad, mb_n)
    out, cert = forget_point(phi, quad, mb_n)
    assert out is phi
    assert cert.output_sup == cert.input_sup
    assert cert.input_report['all_ok']
    assert cert.admissible and cert.passed


def test_push_away_growth_and_fixed_sets(quad, data, merged_witness):
    _, mb_merged = data
    out, cert = push_away(merged_witness, quad, mb_merged, DELTA, eps0=EPS)
    assert cert.slack >= 0
    assert cert.details['fixed_sets_unchanged']
    assert cert.details['avoids_endpoints']
    assert cert.parameters['eps0_effective'] <= EPS
    for k in range(quad.n - 2):
        U = quad.masks[k]
        np.testing.assert_array_equal(out.values[U], merged_witness.values[U])


@pytest.fixture
def crossed_witness(data):
    """Témoin où X3 s'approche de p1: q sur l'arête haute, juste après p1 vers le coin."""
    quad = thickened_arcs(4, 128)
    _, mb_merged = data
    p1, p2, pm = mb_merged.points
    q = (p1[0] + 0.02, p1[1])
    mb4 = MarkedBoundary(mb_merged.domain, (p1, p2, pm, q))
    phi = initial_admissible_map(quad, mb4)
    forgotten, cert = forget_point(phi, quad, mb4)
    assert cert.admissible
    return quad, forgotten


def test_push_away_moves_crossed_images(crossed_witness, data):
    quad, phi = crossed_witness
    _, mb_merged = data
    out, cert = push_away(phi, quad, mb_merged, DELTA, eps0=EPS)
    assert cert.details['V_sizes'][0] > 0
    assert cert.details['C_rho'] > 0
    assert cert.passed
    assert cert.details['avoids_endpoints']
    assert cert.details['fixed_sets_unchanged']
    assert not np.array_equal(out.values, phi.values)


def test_collapse_vertex_certificate_on_crossed_witness(crossed_witness, data):
    quad, phi = crossed_witness
    _, mb_merged = data
    pushed, _ = push_away(phi, quad, mb_merged, DELTA, eps0=EPS)
    out, new_mb, cert = collapse_vertex(pushed, quad, mb_merged, EPS, DELTA)
    assert cert.passed, cert.to_dict()
    assert cert.details['declared_bound'] == pytest.approx(1 + EPS)
    assert check_admissible(out, quad, new_mb).all_ok


def test_push_away_needs_the_merged_datum(quad, data, merged_witness):
    mb_n, _ = data
    with pytest.raises(GeometryError):
        push_away(merged_witness, quad, mb_n, DELTA, eps0=EPS)


def test_collapse_datum_adds_the_corner(data):
    _, mb_merged = data
    psi, new_mb, info = collapse_datum(mb_merged, EPS, DELTA)
    assert new_mb.n == 4
    np.testing.assert_allclose(new_mb.point_array[-1], [1.0, 1.0])
    leg = info['legs'][0]
    assert info['legs'][1] == pytest.approx(leg)
    assert info['minimum_delta'] == 0.0
    assert leg - DELTA < info['collapse_radius'] < leg
    assert info['outer_radius'] == pytest.approx(0.8)
    assert info['segment_spread'] <= 1e-9
    assert psi.declared_jacobian_bound == pytest.approx(1 + EPS)
    np.testing.assert_allclose(psi([[1.0, 1.0]]), [[1.0, 1.0]], atol=1e-9)


def test_collapse_datum_reports_minimum_delta(data):
    # donnée taillée pour ε = 0.3: à ε = 0.05 le disque effondré ne couvre plus les jambes
    _, mb_merged = data
    leg = 0.8 / math.sqrt(1 + 2 / EPS) + 0.5 * DELTA
    with pytest.raises(SectorPositioningError) as info:
        collapse_datum(mb_merged, 0.05, DELTA)
    assert info.value.minimum_delta == pytest.approx(leg - 1 / math.sqrt(41))


def test_collapse_datum_on_the_suite_datum():
    _, mb_merged = reduction_data(4, 0.05, 0.01)
    psi, new_mb, info = collapse_datum(mb_merged, 0.05, 0.01)
    assert info['minimum_delta'] == 0.0
    assert info['outer_radius'] == pytest.approx(0.8)
    assert info['collapse_radius'] == pytest.approx(0.8 / math.sqrt(41))
    assert new_mb.n == 4
    # les extrémités bougent mais restent hors du coin
    assert np.all(np.linalg.norm(new_mb.point_array[[0, 2]] - [1.0, 1.0], axis=1) > 0)


def test_collapse_datum_needs_a_square(pb_datum):
    with pytest.raises(GeometryError):
        collapse_datum(pb_datum, EPS, DELTA)


@pytest.mark.slow
def test_reduction_pipeline_output_is_admissible(quad, data, merged_witness):
    _, mb_merged = data
    out, new_mb, (cert_push, cert_collapse) = reduction_pipeline(merged_witness, quad, mb_merged, EPS, DELTA, EPS)
    assert new_mb.n == quad.n
    assert cert_collapse.admissible, cert_collapse.output_report
    assert cert_push.passed and cert_collapse.passed
    assert check_admissible(out, quad, new_mb).all_ok
    assert cert_collapse.details['segment_spread'] <= 1e-6
    assert cert_collapse.claimed_factor == pytest.approx((1 + EPS) / (1 - EPS))


def test_retract_rescale_keeps_circle_values(triple, circle_witness):
    out, cert = retract_rescale(circle_witness, 0.1, mask=triple.union())
    assert cert.details['circle_nodes'] > 0
    assert cert.details['circle_shift'] <= 1e-9
    assert check_circle_admissible(out, triple.union()).all_ok


def test_retract_rescale_growth_bound(box):
    phi = scaled_identity(box, 1.2)
    out, cert = retract_rescale(phi, 0.1)
    assert cert.input_sup == pytest.approx(1.44)
    assert cert.output_sup <= cert.claimed_bound + cert.allowance
    assert np.max(np.linalg.norm(out.values, axis=-1)) <= 1.0 + 1e-9


def test_retract_rescale_premise_error(box):
    with pytest.raises(PremiseError) as info:
        retract_rescale(scaled_identity(box, 1.2), 0.1, K=0.5)
    assert info.value.measured == pytest.approx(1.44)


def test_power_transform_doubles_windings(triple, circle_witness):
    loops = [circle_loop(triple.grid, (0.0, 0.0), 0.6)]
    out, cert = power_transform(circle_witness, 2, 0.1, mask=triple.union(), loops=loops)
    assert cert.details['windings_in'] == [1]
    assert cert.details['windings_out'] == [2]
    assert cert.details['windings_multiplied']
    assert cert.claimed_factor == pytest.approx(2 * 1.1 / 0.9)
    assert cert.admissible
    assert cert.output_sup == pytest.approx(sup_norm(poisson_bracket(out)))


def test_power_map_keeps_marked_points_on_the_circle(ball_datum):
    images = power_map(3, 0.1)(ball_datum.point_array)
    np.testing.assert_allclose(np.linalg.norm(images, axis=1), 1.0, atol=1e-12)
    # angles 0, 2π/3, 4π/3 triplés
    np.testing.assert_allclose(images, [[1.0, 0.0]] * 3, atol=1e-9)
