import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
import pandas as pd

from ..config import Config
from ..errors import SetValidationError
from ..fields import ScalarField
from ..sets import distance_field
from .flow import HamiltonianVectorField, grid_interpolator, rk4_step, step_count

logger = logging.getLogger('chords')

CHORD_COLUMNS = ['seed', 'direction', 'x_start', 'y_start', 'x_end', 'y_end', 'steps', 'time']


@dataclass
class ChordReport:
    """Cordes trouvées (début, fin, durée, sens) et paramètres d'intégration."""
    chords: List[Dict] = field(default_factory=list)
    parameters: Dict = field(default_factory=dict)
    details: Dict = field(default_factory=dict)

    @property
    def empty(self) -> bool:
        return not self.chords

    @property
    def min_time(self) -> Optional[float]:
        if self.empty:
            return None
        return min(c['time'] for c in self.chords)

    def shortest(self) -> Optional[Dict]:
        if self.empty:
            return None
        return min(self.chords, key=lambda c: (c['time'], c['seed']))

    def to_frame(self) -> pd.DataFrame:
        if self.empty:
            return pd.DataFrame(columns=CHORD_COLUMNS)
        return pd.DataFrame([{
            'seed': c['seed'], 'direction': c['direction'],
            'x_start': c['start'][0], 'y_start': c['start'][1],
            'x_end': c['end'][0], 'y_end': c['end'][1],
            'steps': c['steps'], 'time': c['time'],
        } for c in self.chords], columns=CHORD_COLUMNS)

    def write_csv(self, path) -> Path:
        path = Path(path)
        self.to_frame().to_csv(path, index=False, float_format='%.17g')
        return path

    def to_dict(self) -> Dict:
        return {
            'chord_count': len(self.chords),
            'min_time': self.min_time,
            'shortest': self.shortest(),
            'parameters': self.parameters,
            'details': self.details,
        }


def _seed_nodes(mask: np.ndarray, grid, seeds: Union[None, str, int]) -> np.ndarray:
    """Positions des nœuds de départ: tous ('all'/None) ou un sur `seeds` dans l'ordre des lignes."""
    idx = np.argwhere(mask)
    if seeds not in (None, 'all'):
        stride = int(seeds)
        if stride < 1:
            raise SetValidationError(f"seed stride must be >= 1, got {seeds}")
        idx = idx[::stride]
    X, Y = grid.coords()
    return np.stack([X[idx[:, 0], idx[:, 1]], Y[idx[:, 0], idx[:, 1]]], axis=1)


def first_entry(vf: HamiltonianVectorField, starts: np.ndarray, target: np.ndarray, n_steps: int,
                h: float):
    """
    Premier pas où chaque trajectoire atteint target.

    Une position est dans target quand sa distance interpolée aux nœuds de target ne dépasse pas
    la longueur du dernier pas: l'instant d'entrée est connu à un pas près dans les deux sens.

    Returns:
        Tuple: (pas d'entrée, -1 si aucune; positions d'entrée)
    """
    distance = grid_interpolator(vf.grid, distance_field(target, vf.grid))
    state = np.array(starts, dtype=float)
    entry = np.full(len(state), -1, dtype=int)
    alive = np.ones(len(state), dtype=bool)
    for step in range(1, n_steps + 1):
        if not alive.any():
            break
        moved = rk4_step(vf, state[alive], h)
        live_idx = np.flatnonzero(alive)
        inside = vf.inside(moved)
        travelled = np.linalg.norm(moved - state[live_idx], axis=1)
        state[live_idx] = moved
        # sortie de la boîte: trajectoire abandonnée sans corde
        alive[live_idx[~inside]] = False
        live_idx = live_idx[inside]
        hit = distance(vf.wrap(state[live_idx])) <= travelled[inside] + 1e-12
        entry[live_idx[hit]] = step
        alive[live_idx[hit]] = False
    return entry, vf.wrap(state)


def _chunks(n: int, parts: int) -> List[slice]:
    parts = max(1, min(parts, n))
    bounds = np.linspace(0, n, parts + 1).astype(int)
    return [slice(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def _sweep(vf, starts, target, n_steps, h, max_workers):
    """Intégration parallèle par paquets de graines, fusion dans l'ordre des graines."""
    if len(starts) == 0:
        return np.zeros(0, dtype=int), np.zeros((0, 2))
    slices = _chunks(len(starts), max_workers)
    with ThreadPoolExecutor(max_workers=len(slices)) as executor:
        parts = list(executor.map(lambda s: first_entry(vf, starts[s], target, n_steps, h), slices))
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def find_chords(G: ScalarField, A: np.ndarray, B: np.ndarray, p: float, seeds: Union[None, str, int] = None,
                dt: Optional[float] = None, max_workers: Optional[int] = None) -> ChordReport:
    """
    Cordes du flot de G entre A et B de durée ≤ p.

    Les graines de A sont poussées en avant et en arrière jusqu'au temps p, avec enregistrement
    du premier pas d'entrée dans B; idem pour les graines de B vers A. Une entrée rétrograde
    correspond à une corde parcourue dans l'autre sens.

    Args:
        G: Hamiltonien sur la grille
        A, B: Masques disjoints non vides
        p: Durée maximale
        seeds: 'all' (défaut) ou pas d'échantillonnage des nœuds
        dt: Pas du RK4
        max_workers: Paquets intégrés en parallèle

    Returns:
        ChordReport: éventuellement vide
    """
    grid = G.grid
    A = np.asarray(A, dtype=bool)
    B = np.asarray(B, dtype=bool)
    if A.shape != grid.shape or B.shape != grid.shape:
        raise SetValidationError(f"masks must have grid shape {grid.shape}")
    if not A.any() or not B.any():
        raise SetValidationError("chord endpoints need nonempty masks A and B")
    if (A & B).any():
        raise SetValidationError("chord endpoint masks A and B must be disjoint")
    dt = Config.DEFAULT_DT if dt is None else float(dt)
    n_steps = step_count(p, dt)
    max_workers = max_workers or Config.MAX_WORKERS
    vf = HamiltonianVectorField(G)

    chords = []
    for source, target, forward_dir, backward_dir in ((A, B, 'A→B', 'B→A'), (B, A, 'B→A', 'A→B')):
        starts = _seed_nodes(source, grid, seeds)
        for sign, direction in ((1.0, forward_dir), (-1.0, backward_dir)):
            entry, ends = _sweep(vf, starts, target, n_steps, sign * dt, max_workers)
            for i in np.flatnonzero(entry >= 0):
                seed_pt = starts[i].tolist()
                end_pt = ends[i].tolist()
                start, end = (seed_pt, end_pt) if sign > 0 else (end_pt, seed_pt)
                chords.append({
                    'seed': int(i), 'source': 'A' if source is A else 'B', 'sign': int(sign),
                    'direction': direction, 'start': start, 'end': end,
                    'steps': int(entry[i]), 'time': float(entry[i] * dt),
                })
    # fusion déterministe: masque source, sens d'intégration, indice de graine
    chords.sort(key=lambda c: (c['source'], -c['sign'], c['seed']))

    report = ChordReport(chords, {'p': float(p), 'dt': dt, 'steps': n_steps,
                                  'seeds': 'all' if seeds in (None, 'all') else int(seeds),
                                  'grid': grid.to_dict()})
    if report.empty:
        logger.warning(f"No chord between A and B within time {p}")
    else:
        logger.info(f"Found {len(chords)} chords, minimal time {report.min_time:.6g}")
    return report


def check_chord_hypotheses(G: ScalarField, X1: np.ndarray, X2: np.ndarray, X3: np.ndarray,
                           tol: float = 1e-12) -> Dict:
    """G ≤ 0 sur X₂ et G ≥ 1 sur X₁ ∩ X₃ (vide: condition satisfaite)."""
    v = G.values
    on_x2 = v[np.asarray(X2, dtype=bool)]
    x13 = np.asarray(X1, dtype=bool) & np.asarray(X3, dtype=bool)
    on_x13 = v[x13]
    max_x2 = float(on_x2.max()) if on_x2.size else None
    min_x13 = float(on_x13.min()) if on_x13.size else None
    nonpositive_on_x2 = max_x2 is None or max_x2 <= tol
    at_least_one_on_x13 = min_x13 is None or min_x13 >= 1.0 - tol
    return {
        'max_on_X2': max_x2,
        'min_on_X1_X3': min_x13,
        'G_nonpositive_on_X2': nonpositive_on_x2,
        'G_at_least_one_on_X1_X3': at_least_one_on_x13,
        'ok': nonpositive_on_x2 and at_least_one_on_x13,
    }


def chord_time_bound(pb3_estimate: float) -> float:
    """1/(2e): borne sur la durée des cordes déduite d'une estimation supérieure de pb₃ (unilatérale)."""
    if pb3_estimate <= 0:
        return math.inf
    return 1.0 / (2.0 * pb3_estimate)


def rescaling_check(G: ScalarField, A: np.ndarray, B: np.ndarray, delta: float, p: float,
                    seeds: Union[None, str, int] = None, dt: Optional[float] = None) -> Dict:
    """
    Les cordes de G/(1−δ) sont celles de G parcourues en un temps multiplié par (1−δ).
    Comparaison des durées minimales à 2dt près.
    """
    dt = Config.DEFAULT_DT if dt is None else float(dt)
    base = find_chords(G, A, B, p, seeds, dt)
    scaled = find_chords(ScalarField(G.grid, G.values / (1.0 - delta)), A, B, p, seeds, dt)
    tolerance = 2 * dt
    if base.empty or scaled.empty:
        expected = None if base.empty else (1.0 - delta) * base.min_time
        return {'delta': delta, 'min_time': base.min_time, 'scaled_min_time': scaled.min_time,
                'expected': expected, 'error': None, 'tolerance': tolerance,
                'ok': base.empty and scaled.empty}
    expected = (1.0 - delta) * base.min_time
    error = abs(scaled.min_time - expected)
    return {'delta': delta, 'min_time': base.min_time, 'scaled_min_time': scaled.min_time,
            'expected': expected, 'error': error, 'tolerance': tolerance, 'ok': error <= tolerance}


def chord_experiment(G: ScalarField, X1: np.ndarray, X2: np.ndarray, X3: np.ndarray, pb3_estimate: float,
                     margin: float = 0.1, seeds: Union[None, str, int] = None,
                     dt: Optional[float] = None) -> ChordReport:
    """
    Cordes de X₃∖X₁ vers X₁∖X₃ (ou l'inverse) de durée ≤ (1+margin)/(2e).

    e étant une borne supérieure de pb₃, la durée comparée n'est qu'une évidence unilatérale;
    le rapport l'indique et n'affirme aucune inégalité.
    """
    X1 = np.asarray(X1, dtype=bool)
    X3 = np.asarray(X3, dtype=bool)
    hypotheses = check_chord_hypotheses(G, X1, X2, X3)
    if not hypotheses['ok']:
        logger.warning(f"Hamiltonian violates the chord hypotheses: {hypotheses}")
    bound = chord_time_bound(pb3_estimate)
    p = (1.0 + margin) * bound
    if not math.isfinite(p):
        raise SetValidationError("pb3 estimate must be positive to bound the chord time")
    report = find_chords(G, X3 & ~X1, X1 & ~X3, p, seeds, dt)
    report.details.update({
        'hypotheses': hypotheses,
        'pb3_estimate': pb3_estimate,
        'time_bound': bound,
        'margin': margin,
        'one_sided': True,
        'observed_over_bound': None if report.empty else report.min_time / bound,
    })
    return report
