import json
import math

import numpy as np
import pytest

from src.admissible import circle_loop, initial_admissible_map
from src.errors import ConfigError, SetValidationError, SolverError
from src.fields import VectorMapField, plane_box, poisson_bracket, sup_norm, torus
from src.fixtures import (circle_decomposition, fixture_loops, nested_triples, square_quad, standard_triple,
                          thickened_arcs)
from src.sets import rasterize
from src.solver import (PbEstimate, SolveSchedule, TheoremReport, coarsen_config, estimate_pb, estimate_pb3_fg,
                        estimate_pb4, estimate_pb_x, estimate_series, exact_objective, load_witness,
                        objective_and_gradient, objective_value, p_norm, pb3_datum, prolong, quick_schedule,
                        save_estimate, soft_max, theorem_check_htpy, theorem_check_limit, theorem_check_monotonicity,
                        theorem_check_pb3_pb4, theorem_check_reduction, theorem_check_subhomogeneity)
from src.solver.estimate import _smoothed


def test_schedule_defaults_follow_config():
    schedule = SolveSchedule()
    assert schedule.ladder == (8.0, 32.0, 128.0)
    assert schedule.objective == 'sup'
    assert schedule.to_dict()['ladder'] == [8.0, 32.0, 128.0]


@pytest.mark.parametrize('overrides', [
    {'ladder': (32, 8)},
    {'ladder': ()},
    {'step_size': 0.0},
    {'objective': 'min'},
    {'exterior': 'wrap'},
    {'eps': 1.5},
    {'restarts': 2},
    {'smoothing': -1.0},
    {'coarse_levels': -1},
])
def test_schedule_rejects_bad_values(overrides):
    with pytest.raises(ConfigError):
        SolveSchedule(**overrides)


def test_schedule_from_dict_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        SolveSchedule.from_dict({'ladder': [8], 'learning_rate': 0.1})
    assert SolveSchedule.from_dict({'ladder': [4, 16]}).ladder == (4.0, 16.0)


def test_with_objective():
    assert quick_schedule().with_objective('max').objective == 'max'


def test_coarsen_config_keeps_even_nodes(triple):
    coarse = coarsen_config(triple)
    assert coarse.grid.cells == (32, 32)
    assert coarse.grid.h == pytest.approx(2 * triple.grid.h)
    assert np.array_equal(coarse.masks[0], triple.masks[0][::2, ::2])
    assert coarse.labels == triple.labels
    assert coarsen_config(coarse) is None


@pytest.mark.parametrize('grid', [plane_box(cells=16), torus((1.0, 1.0), 16)])
def test_prolong_reproduces_affine_maps(grid):
    X, Y = grid.coords()
    values = np.stack([0.5 * X - 0.25 * Y + 0.1, 0.3 * Y + 0.2], axis=-1)
    fine = grid.with_cells(32)
    out = prolong(VectorMapField(grid, values, (0.1, 0.2)), fine)
    FX, FY = fine.coords()
    expected = np.stack([0.5 * FX - 0.25 * FY + 0.1, 0.3 * FY + 0.2], axis=-1)
    if grid.periodic:
        # la couture du tore n'est pas affine: on compare loin du dernier intervalle
        inner = (FX < grid.lower[0] + grid.extent[0] - grid.h) & (FY < grid.lower[1] + grid.extent[1] - grid.h)
        assert np.allclose(out.values[inner], expected[inner])
    else:
        assert np.allclose(out.values, expected)
    assert out.cs_basepoint == (0.1, 0.2)


@pytest.mark.parametrize('periodic', [False, True])
def test_smoothed_gradient_is_a_descent_direction(periodic):
    grid = torus((1.0, 1.0), 32) if periodic else plane_box(cells=32)
    rng = np.random.default_rng(3)
    grad = rng.normal(size=grid.shape + (2,))
    smooth = _smoothed(grad, grid, 1.0)
    assert np.sum(grad * smooth) > 0
    assert np.abs(smooth).max() < np.abs(grad).max()
    assert np.array_equal(_smoothed(grad, grid, 0.0), grad)


def test_warm_start_never_loses_to_the_given_witness(triple, pb_datum, schedule):
    first = estimate_pb(triple, pb_datum, schedule)
    again = estimate_pb(triple, pb_datum, schedule, warm_starts=[first.witness])
    assert again.metadata['start'] in ('initializer', 'coarse', 'warm 0')
    assert again.value <= first.value * (1 + 1e-6) + 1e-9
    assert again.verify()


def test_coarse_level_is_a_start_candidate(triple, pb_datum):
    flat = quick_schedule(max_iterations=5, plateau_window=5, coarse_levels=0)
    est = estimate_pb(triple, pb_datum, flat)
    assert est.metadata['start'] == 'initializer'
    layered = quick_schedule(max_iterations=5, plateau_window=5, coarse_levels=1)
    assert estimate_pb(triple, pb_datum, layered).metadata['start'] in ('initializer', 'coarse')


def test_p_norm_tends_to_sup():
    b = np.array([0.5, -2.0, 1.0, 0.0])
    values = [p_norm(b, p)[0] for p in (2, 8, 32, 128)]
    assert values == sorted(values)
    assert values[-1] <= 2.0
    assert values[-1] == pytest.approx(2.0, rel=0.02)
    assert p_norm(np.zeros(4), 8)[0] == 0.0


def test_soft_max_is_a_lower_bound():
    b = np.array([0.5, -2.0, 1.0, 0.0])
    for p in (2, 8, 32):
        J, weights = soft_max(b, p)
        assert J <= 1.0
        assert J >= 1.0 - math.log(b.size) / p
        assert weights.sum() == pytest.approx(1.0)


@pytest.mark.parametrize('objective', ['sup', 'max'])
def test_gradient_matches_finite_differences(objective):
    grid = plane_box(cells=8)
    rng = np.random.default_rng(7)
    values = rng.normal(size=grid.shape + (2,))
    direction = rng.normal(size=values.shape)
    _, grad = objective_and_gradient(values, grid, 4.0, objective)
    step = 1e-6
    fd = (objective_value(values + step * direction, grid, 4.0, objective)
          - objective_value(values - step * direction, grid, 4.0, objective)) / (2 * step)
    assert np.sum(grad * direction) == pytest.approx(fd, rel=1e-5, abs=1e-9)


def test_exact_objective(box):
    X, Y = box.coords()
    values = np.stack([X, Y], axis=-1)
    assert exact_objective(values, box) == pytest.approx(1.0)
    assert exact_objective(values[..., ::-1], box, 'max') == pytest.approx(-1.0)


def test_estimate_pb_on_circle_decomposition(triple, pb_datum, schedule):
    start = sup_norm(poisson_bracket(initial_admissible_map(triple, pb_datum)))
    est = estimate_pb(triple, pb_datum, schedule)
    assert est.kind == 'Pb_3'
    assert 0.0 < est.value <= start
    assert est.verify()
    assert est.metadata['pb3_equivalent'] == pytest.approx(0.5 * est.value)
    assert est.report['all_ok']
    assert est.cells == 64


def test_pb3_of_empty_z_is_zero(box, schedule):
    X = np.zeros(box.shape, dtype=bool)
    X[10, 10] = True
    Y = np.zeros(box.shape, dtype=bool)
    Y[50, 50] = True
    est = estimate_pb3_fg(X, Y, np.zeros(box.shape, dtype=bool), box, schedule)
    assert est.value == 0.0
    assert est.report == {'all_ok': True, 'vacuous': True}
    assert est.metadata['Pb3_equivalent'] == 0.0


def test_pb_x_of_trivial_class_is_zero(triple, schedule):
    est = estimate_pb_x(triple, 0, schedule)
    assert est.value == 0.0
    assert est.metadata['windings'] == [0]


def test_pb_x_rejects_negative_multiples(triple, schedule):
    with pytest.raises(SolverError):
        estimate_pb_x(triple, -1, schedule)


def test_save_estimate_and_reload(triple, pb_datum, schedule, tmp_path):
    est = estimate_pb(triple, pb_datum, schedule)
    paths = save_estimate(est, tmp_path, {'command': 'estimate'})
    payload = json.loads(paths['estimate'].read_text(encoding='utf-8'))
    assert payload['value'] == est.value
    assert payload['h'] == pytest.approx(1 / 32)
    assert 'config_hash' in payload and 'tool_version' in payload
    witness = load_witness(paths['witness'])
    assert np.array_equal(witness.values, est.witness.values)
    assert exact_objective(witness.values, witness.grid) == est.value
    assert paths['bracket'].exists()


def test_estimate_series_keeps_submission_order():
    def build(cells):
        return PbEstimate('pb3', 1.0 / cells, 'sup', plane_box(cells=cells).to_dict(), {},
                          report={'all_ok': True}, history=[{'iterations': 3}])
    frame = estimate_series(build, [32, 8, 16], max_workers=3)
    assert frame['cells'].tolist() == [32, 8, 16]
    assert frame['value'].tolist() == [1 / 32, 1 / 8, 1 / 16]
    assert frame['admissible'].all()
    assert list(frame.columns) == ['cells', 'h', 'kind', 'value', 'iterations', 'admissible']


def test_theorem_report_rows():
    report = TheoremReport('demo')
    report.add('a <= b', 1.0, 2.0)
    report.add('within tolerance', 2.05, 2.0, 0.1)
    report.add('informational', 5.0, 1.0, info=True)
    assert report.passed
    report.add_flag('flag', False)
    assert not report.passed
    frame = report.frame()
    assert frame['verdict'].tolist() == ['pass', 'pass', 'info', 'fail']
    assert report.to_dict()['passed'] is False


def test_pb3_datum_is_on_the_area_one_disc():
    mb = pb3_datum()
    assert mb.n == 3
    assert mb.domain.area == pytest.approx(1.0)


def test_monotonicity_needs_nested_configs(triple):
    with pytest.raises(SetValidationError):
        theorem_check_monotonicity([triple])


@pytest.mark.slow
def test_monotonicity_on_nested_triples(schedule):
    report = theorem_check_monotonicity(nested_triples(64), schedule=schedule)
    assert report.passed, report.frame()
    values = report.details['values']
    assert values == sorted(values)


@pytest.mark.slow
def test_pb_x_of_decomposition_class(triple, schedule):
    est = estimate_pb_x(triple, 1, schedule)
    assert est.value > 0.0
    assert est.metadata['windings'] == [1]
    assert est.metadata['Pb3_equivalent'] == pytest.approx(est.value / math.pi)
    assert est.verify()


@pytest.mark.slow
def test_pb4_plus_objective(schedule):
    quad = square_quad(64)
    est = estimate_pb4(quad['X0'], quad['X1'], quad['Y0'], quad['Y1'], quad['grid'], schedule.with_objective('max'))
    assert est.kind == 'pb4+'
    assert est.verify()
    assert est.value == pytest.approx(exact_objective(est.witness.values, est.witness.grid, 'max'))


@pytest.mark.slow
def test_pb3_pb4_report_structure(schedule):
    quad = square_quad(64)
    report = theorem_check_pb3_pb4(quad['X0'], quad['X1'], quad['Y0'], quad['Y1'], quad['grid'], schedule)
    names = report.frame()['name'].tolist()
    assert '2 pb3 <= pb4 (forgotten pb4 witness)' in names
    assert 'pb4 <= (1+eps)/(1-eps) Pb3 + additive' in names
    assert report.details['pb4'] > 0 and report.details['pb3'] > 0
    assert report.details['pb4'] <= report.details['pb4_direct']
    assert 2 * report.details['pb3'] <= 2 * report.details['pb3_fg']


def test_reduction_check_needs_four_sets(triple):
    with pytest.raises(SetValidationError):
        theorem_check_reduction(triple)


def test_limit_check_needs_a_core(quad, box):
    with pytest.raises(SetValidationError):
        theorem_check_limit(quad)
    shapes = [{'kind': 'disc', 'center': [x, 0.0], 'radius': 0.1} for x in (-0.5, 0.0, 0.5)]
    with pytest.raises(SetValidationError):
        theorem_check_limit(rasterize(shapes, box))


def test_htpy_check_needs_three_sets(quad):
    with pytest.raises(SetValidationError):
        theorem_check_htpy(quad)


@pytest.mark.slow
def test_subhomogeneity_report(triple, schedule):
    loops = [circle_loop(triple.grid, (0.0, 0.0), 0.6)]
    report = theorem_check_subhomogeneity(triple, 2, schedule, loops=loops)
    assert len(report.rows) == 4
    assert report.details['k'] == 2
    assert report.frame()['verdict'].iloc[1] == 'pass'


def test_htpy_refinement_needs_three_sets(triple, quad):
    with pytest.raises(SetValidationError):
        theorem_check_htpy(triple, fine_config=quad)


@pytest.mark.slow
def test_htpy_scaled_pb3_witness_bounds_pb_x(triple, schedule):
    report = theorem_check_htpy(triple, schedule, loops=fixture_loops(triple))
    frame = report.frame().set_index('name')
    assert frame.loc['Pb_X/π <= Pb3 (scaled Pb3 witness)', 'verdict'] == 'pass'
    assert len(report.details['passes']) == 1


@pytest.mark.slow
def test_limit_report_has_gap_verdicts(schedule):
    report = theorem_check_limit(standard_triple(64), radii_cells=(4, 2), schedule=schedule)
    names = report.frame()['name'].tolist()
    assert 'gap(K=2h) <= gap(K=4h)' in names
    assert 'final gap <= 0.2 Pb3' in names
    assert [row['radius_cells'] for row in report.details['sequence']] == [4.0, 2.0]


# === Suite par défaut, 128² ===

@pytest.fixture(scope='module')
def suite_schedule():
    return SolveSchedule()


@pytest.mark.slow
def test_default_suite_limit_passes(suite_schedule):
    report = theorem_check_limit(standard_triple(128), radii_cells=(8, 4, 2), schedule=suite_schedule)
    assert report.passed, report.frame()
    gaps = [row['gap'] for row in report.details['sequence']]
    assert gaps[-1] <= 0.2 * report.details['Pb3']


@pytest.mark.slow
def test_default_suite_htpy_gap_shrinks_at_256(suite_schedule):
    coarse = circle_decomposition(128)
    fine = circle_decomposition(256)
    report = theorem_check_htpy(coarse, suite_schedule, rel_tol=0.15, loops=fixture_loops(coarse),
                                fine_config=fine, fine_loops=fixture_loops(fine))
    assert report.passed, report.frame()
    passes = report.details['passes']
    assert [p['cells'] for p in passes] == [128, 256]
    assert passes[1]['gap'] <= passes[0]['gap'] + 10 * coarse.grid.h


@pytest.mark.slow
def test_default_suite_pb3_pb4_passes(suite_schedule):
    quad = square_quad(128)
    report = theorem_check_pb3_pb4(quad['X0'], quad['X1'], quad['Y0'], quad['Y1'], quad['grid'], suite_schedule,
                                   rel_tol=0.2)
    assert report.passed, report.frame()
    assert abs(report.details['pb4'] - 2 * report.details['pb3']) <= 0.2 * report.details['pb4'] + 10 * quad['grid'].h


@pytest.mark.slow
@pytest.mark.parametrize('k', [2, 3])
def test_default_suite_subhomogeneity_passes(suite_schedule, k):
    config = circle_decomposition(128)
    report = theorem_check_subhomogeneity(config, k, suite_schedule, eps=0.05, loops=fixture_loops(config))
    assert report.passed, report.frame()
    assert (report.frame()['verdict'] == 'pass').all()


@pytest.mark.slow
def test_default_suite_reduction_passes(suite_schedule):
    config = thickened_arcs(4, 128)
    report = theorem_check_reduction(config, suite_schedule, eps=0.05, delta=0.01)
    assert report.passed, report.frame()
    _, cert_push, cert_collapse = report.details['certificates']
    assert cert_collapse['passed']
    assert sum(cert_push['details']['V_sizes']) > 0
    assert report.details['C_rho'] > 0
    assert report.details['e_N_collapsed'] <= report.details['pipeline_value'] * (1 + 1e-9)
