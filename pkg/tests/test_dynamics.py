import math

import numpy as np
import pytest

from src.config import Config
from src.dynamics import (ChordReport, HamiltonianVectorField, check_chord_hypotheses, chord_experiment,
                          chord_time_bound, find_chords, hamiltonian_flow, make_hamiltonian, rescaling_check,
                          step_count)
from src.errors import ConfigError, SetValidationError, TrajectoryExitError
from src.fields import grid_from_dict, plane_box
from src.fixtures import annuli_chords, shear_chords
from src.sets import rasterize_set

DT = Config.DEFAULT_DT


def chord_setup(fixture):
    grid = grid_from_dict(fixture['grid'])
    G = make_hamiltonian(fixture['hamiltonian'], grid)
    A = rasterize_set(fixture['A'][0], grid)
    B = rasterize_set(fixture['B'][0], grid)
    return G, A, B


@pytest.fixture(scope='module')
def shear():
    return chord_setup(shear_chords())


@pytest.fixture(scope='module')
def annuli():
    return chord_setup(annuli_chords())


@pytest.fixture(scope='module')
def rotation_field():
    grid = plane_box((-1.5, -1.5), (1.5, 1.5), 48)
    return make_hamiltonian({'kind': 'quadratic'}, grid)


def test_step_count():
    assert step_count(1.0, 1e-3) == 1000
    assert step_count(-0.5, 0.1) == 5
    with pytest.raises(ConfigError):
        step_count(1.0, 0.0)


def test_shear_flow_is_a_translation(shear):
    G, _, _ = shear
    traj = hamiltonian_flow(G, (-0.5, 0.0), 0.5, DT)
    np.testing.assert_allclose(traj.end, [0.0, 0.0], atol=1e-9)
    frame = traj.to_frame()
    assert list(frame.columns) == ['t', 'x', 'y']
    assert frame['t'].iloc[-1] == pytest.approx(0.5)


def test_circular_orbit_keeps_its_radius(rotation_field):
    traj = hamiltonian_flow(rotation_field, (0.5, 0.0), 2 * math.pi, DT)
    radii = np.linalg.norm(traj.points, axis=1)
    assert np.max(np.abs(radii - 0.5)) <= 1e-6
    # une période, arrondie au pas supérieur
    np.testing.assert_allclose(traj.end, [0.5, 0.0], atol=1e-3)


def test_flow_is_reversible(rotation_field):
    forward = hamiltonian_flow(rotation_field, (0.3, 0.2), 1.0, DT)
    back = hamiltonian_flow(rotation_field, forward.end, -1.0, DT)
    np.testing.assert_allclose(back.end, [0.3, 0.2], atol=1e-8)


def test_constant_hamiltonian_has_fixed_points(box):
    G = make_hamiltonian({'kind': 'linear', 'a': 0.0, 'b': 0.0, 'c': 2.0}, box)
    traj = hamiltonian_flow(G, (0.1, -0.3), 0.2, DT)
    assert np.array_equal(traj.end, [0.1, -0.3])


def test_energy_is_conserved(rotation_field):
    vf = HamiltonianVectorField(rotation_field)
    traj = hamiltonian_flow(vf, (0.0, 0.7), 1.5, DT)
    energy = vf.energy(traj.points)
    # interpolation bilinéaire: erreur en h²
    assert np.max(np.abs(energy - energy[0])) <= rotation_field.grid.h ** 2


def test_leaving_the_box_raises(shear):
    G, _, _ = shear
    with pytest.raises(TrajectoryExitError):
        hamiltonian_flow(G, (0.9, 0.0), 1.0, DT)
    with pytest.raises(TrajectoryExitError):
        hamiltonian_flow(G, (2.0, 0.0), 0.1, DT)


def test_trajectory_csv(shear, tmp_path):
    G, _, _ = shear
    path = hamiltonian_flow(G, (0.0, 0.0), 0.01, DT).write_csv(tmp_path / 'trajectory.csv')
    assert path.read_text().splitlines()[0] == 't,x,y'


@pytest.mark.parametrize('spec', [
    {'kind': 'cubic'},
    {'kind': 'gaussian', 'center': [0.0, 0.0]},
    {'kind': 'quadratic', 'center': 'origin'},
])
def test_malformed_hamiltonians(box, spec):
    with pytest.raises(ConfigError):
        make_hamiltonian(spec, box)


def test_shear_chord_time(shear):
    G, A, B = shear
    report = find_chords(G, A, B, 1.0, seeds=4, dt=DT)
    assert not report.empty
    assert abs(report.min_time - 0.75) <= 2 * DT
    shortest = report.shortest()
    assert shortest['start'][0] == pytest.approx(-0.5, abs=2 * DT)
    assert shortest['end'][0] == pytest.approx(0.25, abs=2 * DT)
    assert {c['direction'] for c in report.chords} == {'A→B'}


def test_short_horizon_finds_nothing(shear):
    G, A, B = shear
    assert find_chords(G, A, B, 0.5, seeds=4, dt=DT).empty


def test_chord_search_is_deterministic(shear):
    G, A, B = shear
    first = find_chords(G, A, B, 1.0, seeds=8, dt=DT, max_workers=1)
    second = find_chords(G, A, B, 1.0, seeds=8, dt=DT, max_workers=4)
    assert first.chords == second.chords


def test_invariant_annuli_have_no_chords(annuli):
    G, A, B = annuli
    report = find_chords(G, A, B, 1.0, seeds=8, dt=DT)
    assert report.empty
    assert report.min_time is None
    assert report.to_dict()['chord_count'] == 0
    assert report.to_frame().empty


def test_chord_masks_are_validated(shear):
    G, A, B = shear
    with pytest.raises(SetValidationError):
        find_chords(G, A, A, 1.0)
    with pytest.raises(SetValidationError):
        find_chords(G, A, np.zeros_like(B), 1.0)
    with pytest.raises(SetValidationError):
        find_chords(G, A[:-1], B[:-1], 1.0)


def test_rescaling_shortens_chords(shear):
    G, A, B = shear
    result = rescaling_check(G, A, B, 0.1, 1.0, seeds=8, dt=DT)
    assert result['ok']
    assert result['error'] <= 2 * DT


def test_rescaling_without_chords(annuli):
    G, A, B = annuli
    assert rescaling_check(G, A, B, 0.1, 1.0, seeds=16, dt=DT)['ok']


def test_chord_time_bound():
    assert chord_time_bound(0.25) == 2.0
    assert chord_time_bound(0.0) == math.inf


def test_chord_hypotheses(shear):
    G, A, B = shear
    _, Y = G.grid.coords()
    low = Y <= -0.8
    assert check_chord_hypotheses(G, B, low, A)['ok']
    assert not check_chord_hypotheses(G, B, ~low, A)['G_nonpositive_on_X2']


def test_chord_experiment_is_one_sided(shear):
    G, A, B = shear
    _, Y = G.grid.coords()
    report = chord_experiment(G, B, Y <= -0.8, A, 0.5, margin=0.1, seeds=8, dt=DT)
    assert isinstance(report, ChordReport)
    assert report.details['one_sided']
    assert report.details['time_bound'] == 1.0
    assert report.details['observed_over_bound'] == pytest.approx(report.min_time)
    assert report.parameters['p'] == pytest.approx(1.1)


def test_chord_experiment_needs_a_positive_estimate(shear):
    G, A, B = shear
    _, Y = G.grid.coords()
    with pytest.raises(SetValidationError):
        chord_experiment(G, B, Y <= -0.8, A, 0.0)
