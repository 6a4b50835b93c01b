"""
Configurations nommées partagées par les suites CLI, le navigateur et les tests.

Chaque ensemble est décrit par des formes JSON (rastérisées à la résolution demandée),
de sorte qu'une même fixture se raffine sans changer de géométrie.
"""
import math
from typing import Dict, List, Sequence

import numpy as np

from .admissible import circle_loop
from .config import Config
from .errors import ConfigError
from .fields import GridManifold, plane_box
from .sets import SetConfig, rasterize, rasterize_set

ARC_RADIUS = 0.6
ARC_THICKNESS = 0.12
ARC_OVERLAP = 0.15


def arc_shapes(n: int, radius: float = ARC_RADIUS, thickness: float = ARC_THICKNESS,
               overlap: float = ARC_OVERLAP) -> List[Dict]:
    """N arcs épaissis couvrant le cercle, chacun chevauchant ses deux voisins de overlap radians."""
    return [{'kind': 'arc', 'center': [0.0, 0.0], 'radius': radius,
             'start': 2 * math.pi * k / n - overlap, 'end': 2 * math.pi * (k + 1) / n + overlap,
             'thickness': thickness} for k in range(n)]


def default_grid(cells: int = None) -> GridManifold:
    return plane_box((-1.0, -1.0), (1.0, 1.0), cells or Config.TEST_GRID)


def thickened_arcs(n: int = 4, cells: int = None, thickness: float = ARC_THICKNESS,
                   overlap: float = ARC_OVERLAP) -> SetConfig:
    grid = default_grid(cells)
    return rasterize(arc_shapes(n, thickness=thickness, overlap=overlap), grid)


def circle_decomposition(cells: int = None) -> SetConfig:
    """Anneau fin découpé en trois arcs: X = X₁ ∪ X₂ ∪ X₃ d'intersection triple vide."""
    return thickened_arcs(3, cells)


def standard_triple(cells: int = None) -> SetConfig:
    """Triplet à large recouvrement X₁ ∩ X₃, pour la suite des voisinages K."""
    return thickened_arcs(3, cells, overlap=0.3)


def nested_triples(cells: int = None, thicknesses: Sequence[float] = (0.08, 0.12, 0.16)) -> List[SetConfig]:
    """Triplets emboîtés par épaisseur croissante."""
    return [thickened_arcs(3, cells, thickness=t) for t in sorted(thicknesses)]


def square_quad_shapes(half: float = 0.5, thickness: float = 0.1) -> Dict[str, Dict]:
    """Arêtes gauche, droite, basse et haute d'un carré centré: X₀, X₁, Y₀, Y₁."""
    a = half
    return {
        'X0': {'kind': 'polyline', 'points': [[-a, -a], [-a, a]], 'thickness': thickness},
        'X1': {'kind': 'polyline', 'points': [[a, -a], [a, a]], 'thickness': thickness},
        'Y0': {'kind': 'polyline', 'points': [[-a, -a], [a, -a]], 'thickness': thickness},
        'Y1': {'kind': 'polyline', 'points': [[-a, a], [a, a]], 'thickness': thickness},
    }


def square_quad(cells: int = None) -> Dict:
    grid = default_grid(cells)
    masks = {name: rasterize_set(shape, grid) for name, shape in square_quad_shapes().items()}
    masks['grid'] = grid
    return masks


def shear_chords(cells: int = 64) -> Dict:
    """G = y sur [-1,1]²: flot horizontal, segments verticaux à distance d = 0.75."""
    return {
        'grid': {'kind': 'plane', 'lower': [-1.0, -1.0], 'upper': [1.0, 1.0], 'cells': cells},
        'hamiltonian': {'kind': 'linear', 'a': 0.0, 'b': 1.0},
        'A': [{'kind': 'polyline', 'points': [[-0.5, -0.5], [-0.5, 0.5]], 'thickness': 0.0}],
        'B': [{'kind': 'polyline', 'points': [[0.25, -0.5], [0.25, 0.5]], 'thickness': 0.0}],
        'p': 1.0,
        'dt': Config.DEFAULT_DT,
        'seeds': 4,
        'rescale_delta': 0.1,
    }


def annuli_chords(cells: int = 64) -> Dict:
    """G = (x²+y²)/2, A et B dans deux anneaux invariants distincts: aucune corde."""
    return {
        'grid': {'kind': 'plane', 'lower': [-1.0, -1.0], 'upper': [1.0, 1.0], 'cells': cells},
        'hamiltonian': {'kind': 'quadratic'},
        'A': [{'kind': 'annulus', 'center': [0.0, 0.0], 'inner': 0.2, 'outer': 0.3}],
        'B': [{'kind': 'annulus', 'center': [0.0, 0.0], 'inner': 0.5, 'outer': 0.6}],
        'p': 1.0,
        'dt': Config.DEFAULT_DT,
        'seeds': 8,
    }


SET_FIXTURES = {
    'thickened_arcs': lambda cells=None: thickened_arcs(4, cells),
    'circle_decomposition': circle_decomposition,
    'standard_triple': standard_triple,
}

CHORD_FIXTURES = {
    'shear': shear_chords,
    'annuli': annuli_chords,
}


def set_fixture(name: str, cells: int = None) -> SetConfig:
    if name not in SET_FIXTURES:
        raise ConfigError(f"unknown set fixture '{name}' (known: {sorted(SET_FIXTURES)})")
    return SET_FIXTURES[name](cells)


def fixture_loops(config: SetConfig) -> List[np.ndarray]:
    """Boucle génératrice du cercle médian pour les fixtures d'arcs."""
    return [circle_loop(config.grid, (0.0, 0.0), ARC_RADIUS)]
