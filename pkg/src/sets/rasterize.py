import logging
import math
from typing import Callable, Dict, List, Sequence, Union

import numpy as np

from ..errors import ConfigError
from ..fields import GridManifold
from ..geometry import segment_distances
from .config import SetConfig

logger = logging.getLogger('sets')

ShapeSpec = Union[Dict, Callable]


# === Fonctions distance signées (points de forme (..., 2)) ===

def sd_disc(p: np.ndarray, center, radius: float) -> np.ndarray:
    return np.linalg.norm(p - np.asarray(center, dtype=float), axis=-1) - radius


def sd_annulus(p: np.ndarray, center, inner: float, outer: float) -> np.ndarray:
    r = np.linalg.norm(p - np.asarray(center, dtype=float), axis=-1)
    return np.maximum(inner - r, r - outer)


def sd_box(p: np.ndarray, lower, upper) -> np.ndarray:
    lo = np.asarray(lower, dtype=float)
    hi = np.asarray(upper, dtype=float)
    center = (lo + hi) / 2
    d = np.abs(p - center) - (hi - lo) / 2
    return np.linalg.norm(np.maximum(d, 0.0), axis=-1) + np.minimum(np.max(d, axis=-1), 0.0)


def sd_polyline(p: np.ndarray, points, thickness: float, closed: bool = False) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if closed:
        pts = np.concatenate([pts, pts[:1]])
    flat = p.reshape(-1, 2)
    dist, _ = segment_distances(flat, pts[:-1], pts[1:])
    return (dist.min(axis=1) - thickness / 2).reshape(p.shape[:-1])


def sd_arc(p: np.ndarray, center, radius: float, start: float, end: float, thickness: float) -> np.ndarray:
    """Arc de cercle épaissi, angles en radians parcourus de start à end dans le sens direct."""
    c = np.asarray(center, dtype=float)
    rel = p - c
    r = np.linalg.norm(rel, axis=-1)
    span = np.mod(end - start, 2 * math.pi) or 2 * math.pi
    theta = np.mod(np.arctan2(rel[..., 1], rel[..., 0]) - start, 2 * math.pi)
    a = c + radius * np.array([math.cos(start), math.sin(start)])
    b = c + radius * np.array([math.cos(end), math.sin(end)])
    ends = np.minimum(np.linalg.norm(p - a, axis=-1), np.linalg.norm(p - b, axis=-1))
    return np.where(theta <= span, np.abs(r - radius), ends) - thickness / 2


def shape_distance(shape: Dict, p: np.ndarray) -> np.ndarray:
    kind = shape.get('kind')
    try:
        if kind == 'disc':
            return sd_disc(p, shape['center'], shape['radius'])
        if kind == 'annulus':
            return sd_annulus(p, shape['center'], shape['inner'], shape['outer'])
        if kind == 'box':
            return sd_box(p, shape['lower'], shape['upper'])
        if kind == 'polyline':
            return sd_polyline(p, shape['points'], shape['thickness'], shape.get('closed', False))
        if kind == 'arc':
            return sd_arc(p, shape['center'], shape['radius'], shape['start'], shape['end'], shape['thickness'])
    except KeyError as e:
        raise ConfigError(f"shape of kind '{kind}' is missing key {str(e)}")
    raise ConfigError(f"unknown shape kind '{kind}'")


# === Rastérisation ===

def _translates(grid: GridManifold) -> List[np.ndarray]:
    if not grid.periodic:
        return [np.zeros(2)]
    Lx, Ly = grid.extent
    return [np.array([a * Lx, b * Ly]) for a in (-1, 0, 1) for b in (-1, 0, 1)]


def rasterize_shape(shape: ShapeSpec, grid: GridManifold) -> np.ndarray:
    """
    Masque des nœuds dont la cellule rencontre la forme.

    Formes analytiques: distance signée ≤ h/√2 (le disque de ce rayon contient la cellule).
    Sous-niveaux {f ≤ 0} d'un appelable f(X, Y): test au nœud et aux quatre coins de la cellule.
    Sur le tore, minimum sur les 9 translatés.
    """
    pts = grid.node_points()
    h = grid.h
    mask = np.zeros(grid.shape, dtype=bool)
    if callable(shape):
        offsets = [(0.0, 0.0), (h / 2, h / 2), (h / 2, -h / 2), (-h / 2, h / 2), (-h / 2, -h / 2)]
        for t in _translates(grid):
            for ox, oy in offsets:
                q = pts + t + np.array([ox, oy])
                mask |= np.asarray(shape(q[..., 0], q[..., 1])) <= 0
        return mask
    reach = h / math.sqrt(2)
    for t in _translates(grid):
        mask |= shape_distance(shape, pts + t) <= reach
    return mask


def rasterize_set(spec: Union[ShapeSpec, Sequence[ShapeSpec]], grid: GridManifold) -> np.ndarray:
    """Union des formes d'un ensemble."""
    shapes = spec if isinstance(spec, (list, tuple)) else [spec]
    mask = np.zeros(grid.shape, dtype=bool)
    for shape in shapes:
        mask |= rasterize_shape(shape, grid)
    return mask


def rasterize(shapes: Sequence[Union[ShapeSpec, Sequence[ShapeSpec]]], grid: GridManifold,
              labels: Sequence[str] = ()) -> SetConfig:
    """
    Rastérise N ensembles et valide l'intersection cyclique.

    Args:
        shapes: Une entrée par ensemble (forme, appelable ou liste de formes)
        grid: Grille cible
        labels: Noms optionnels des ensembles

    Returns:
        SetConfig: la configuration validée
    """
    masks = [rasterize_set(spec, grid) for spec in shapes]
    logger.debug(f"Rasterized {len(masks)} sets on {grid.shape}: {[int(m.sum()) for m in masks]} nodes")
    return SetConfig(grid, tuple(masks), tuple(labels))
