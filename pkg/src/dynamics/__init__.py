from .flow import HamiltonianVectorField, Trajectory, rk4_step, step_count, hamiltonian_flow, make_hamiltonian
from .chords import (ChordReport, first_entry, find_chords, check_chord_hypotheses, chord_time_bound,
                     rescaling_check, chord_experiment)

__all__ = ['HamiltonianVectorField', 'Trajectory', 'rk4_step', 'step_count', 'hamiltonian_flow',
           'make_hamiltonian', 'ChordReport', 'first_entry', 'find_chords', 'check_chord_hypotheses',
           'chord_time_bound', 'rescaling_check', 'chord_experiment']
