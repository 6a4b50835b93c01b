import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from ..config import Config
from ..errors import SetValidationError, WindingError
from ..fields import GridManifold, VectorMapField
from ..geometry import MarkedBoundary
from ..sets import SetConfig
from .initializer import initial_admissible_map

logger = logging.getLogger('winding')


def as_loop(nodes, grid: GridManifold) -> np.ndarray:
    """Chemin fermé de nœuds 8-connexes, sans répétition finale."""
    loop = np.asarray(nodes, dtype=int).reshape(-1, 2)
    if len(loop) > 1 and np.all(loop[0] == loop[-1]):
        loop = loop[:-1]
    if len(loop) < 3:
        raise WindingError("a loop needs at least three nodes")
    step = np.roll(loop, -1, axis=0) - loop
    if grid.periodic:
        shape = np.asarray(grid.shape)
        step = (step + shape // 2) % shape - shape // 2
    if np.any(np.abs(step) > 1):
        raise WindingError("loop nodes are not 8-connected")
    return loop


def circle_loop(grid: GridManifold, center, radius: float) -> np.ndarray:
    """Cercle projeté sur la grille, parcouru dans le sens trigonométrique."""
    samples = max(16, int(math.ceil(4 * math.pi * radius / grid.h)))
    theta = np.linspace(0.0, 2 * math.pi, samples, endpoint=False)
    pts = np.stack([center[0] + radius * np.cos(theta), center[1] + radius * np.sin(theta)], axis=1)
    nodes = [grid.nearest_node(p) for p in pts]
    loop = [nodes[0]]
    for node in nodes[1:]:
        if node != loop[-1]:
            loop.append(node)
    while len(loop) > 1 and loop[-1] == loop[0]:
        loop.pop()
    return as_loop(loop, grid)


def extract_core_loop(mask: np.ndarray, grid: GridManifold) -> np.ndarray:
    """
    Boucle centrale d'un X en forme d'anneau.

    Le trou est la plus grande composante du complémentaire ne touchant pas le bord;
    la boucle est le cercle centré sur le trou, de rayon médian des nœuds de X.
    """
    labels, count = ndimage.label(~mask)
    border = set(np.unique(np.concatenate([labels[0], labels[-1], labels[:, 0], labels[:, -1]])))
    holes = [k for k in range(1, count + 1) if k not in border]
    if not holes:
        raise SetValidationError("X is not loop-like (no hole found); supply generator loops")
    sizes = ndimage.sum(np.ones_like(labels), labels, holes)
    hole = holes[int(np.argmax(sizes))]
    X, Y = grid.coords()
    center = (float(X[labels == hole].mean()), float(Y[labels == hole].mean()))
    r = float(np.median(np.hypot(X[mask] - center[0], Y[mask] - center[1])))
    loop = circle_loop(grid, center, r)
    if not np.all(mask[loop[:, 0], loop[:, 1]]):
        raise SetValidationError("X is not loop-like (core circle leaves X); supply generator loops")
    return loop


def winding_number(phi: VectorMapField, loop, center=(0.0, 0.0)) -> int:
    """
    Nombre d'enroulement de Φ − center le long de la boucle.

    Lève WindingError si l'image passe trop près du centre (|Φ − center| < garde·h·Lip, Lip
    estimée sur le module le long de la boucle) ou si un saut d'angle atteint π.
    """
    loop = as_loop(loop, phi.grid)
    c = np.asarray(center, dtype=float)
    w = phi.values[loop[:, 0], loop[:, 1]] - c
    z = w[:, 0] + 1j * w[:, 1]
    modulus = np.abs(z)
    step_len = phi.grid.h * np.linalg.norm(as_steps(loop, phi.grid), axis=1)
    lip = float(np.max(np.abs(np.roll(modulus, -1) - modulus) / step_len))
    clearance = Config.WINDING_CLEARANCE * phi.grid.h * lip
    if np.min(modulus) <= max(clearance, 1e-300):
        raise WindingError(f"image passes within {np.min(modulus):.3g} of the center (clearance {clearance:.3g})")
    increments = np.angle(np.roll(z, -1) / z)
    if np.max(np.abs(increments)) >= math.pi * (1 - 1e-12):
        raise WindingError("angle jump of π or more between consecutive loop nodes; refine the grid")
    total = float(np.sum(increments)) / (2 * math.pi)
    return int(round(total))


def as_steps(loop: np.ndarray, grid: GridManifold) -> np.ndarray:
    step = np.roll(loop, -1, axis=0) - loop
    if grid.periodic:
        shape = np.asarray(grid.shape)
        step = (step + shape // 2) % shape - shape // 2
    return step.astype(float)


@dataclass(frozen=True, eq=False)
class HomotopyClass:
    """Classe représentée par ses enroulements sur des boucles génératrices."""
    loops: Tuple[np.ndarray, ...]
    windings: Tuple[int, ...]
    center: Tuple[float, float] = (0.0, 0.0)

    def multiplied(self, k: int) -> 'HomotopyClass':
        return HomotopyClass(self.loops, tuple(k * w for w in self.windings), self.center)

    def same_windings(self, other: 'HomotopyClass') -> bool:
        return tuple(self.windings) == tuple(other.windings)

    def multiple_of(self, base: 'HomotopyClass') -> Optional[int]:
        """k tel que self = k·base, None sinon."""
        ks = set()
        for w, b in zip(self.windings, base.windings):
            if b == 0:
                if w != 0:
                    return None
                continue
            if w % b:
                return None
            ks.add(w // b)
        if len(ks) > 1:
            return None
        return ks.pop() if ks else 0

    def to_dict(self) -> Dict:
        return {'windings': list(self.windings), 'center': list(self.center),
                'loops': [loop.tolist() for loop in self.loops]}


def class_of_map(phi: VectorMapField, loops: Sequence, center=(0.0, 0.0)) -> HomotopyClass:
    loops = tuple(as_loop(loop, phi.grid) for loop in loops)
    windings = tuple(winding_number(phi, loop, center) for loop in loops)
    return HomotopyClass(loops, windings, (float(center[0]), float(center[1])))


def class_of_decomposition(config: SetConfig, mb: MarkedBoundary,
                           loops: Optional[List] = None) -> HomotopyClass:
    """
    Classe déterminée par une décomposition X = X_1 ∪ X_2 ∪ X_3.

    Args:
        config: Trois ensembles sans point triple
        mb: Donnée à trois points marqués
        loops: Boucles génératrices (extraites automatiquement si X est un anneau)

    Returns:
        HomotopyClass: enroulements de l'application initiale autour du centre de Δ
    """
    if config.n != 3:
        raise SetValidationError(f"a decomposition class needs three sets, got {config.n}")
    if not config.triple_intersection_empty():
        raise SetValidationError("X1 ∩ X2 ∩ X3 is not empty")
    if not loops:
        loops = [extract_core_loop(config.union(), config.grid)]
    phi = initial_admissible_map(config, mb)
    cls = class_of_map(phi, loops, tuple(mb.domain.centroid))
    logger.info(f"Decomposition class: windings {cls.windings}")
    return cls
