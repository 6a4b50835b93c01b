import logging
from typing import Dict, Optional

import numpy as np

from ..config import Config
from ..errors import GeometryError, InitializerError
from ..fields import VectorMapField
from ..geometry import MarkedBoundary, make_polygon
from ..sets import SetConfig, cyclic_neighbours, distance_field

logger = logging.getLogger('initializer')


def smoothstep(t: np.ndarray) -> np.ndarray:
    """Raccord C¹ 3t² − 2t³, constant hors de [0, 1]."""
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def cutoff(distance: np.ndarray, inner: float, outer: float) -> np.ndarray:
    """1 pour distance ≤ inner, 0 pour distance ≥ outer, C¹ entre les deux."""
    return smoothstep((outer - distance) / (outer - inner))


def available_radius(config: SetConfig, distances=None) -> Dict[str, float]:
    """
    Rayons disponibles pour les supports de la partition de l'unité.

    Returns:
        Dict: 'gap' (demi-écart entre ensembles non adjacents), 'triple' (N=3),
              'frame' (distance au cadre), 'available' (minimum)
    """
    grid = config.grid
    d = distances if distances is not None else [distance_field(m, grid) for m in config.masks]
    n = config.n
    gap = np.inf
    for i in range(n):
        for j in range(i + 1, n):
            if not cyclic_neighbours(i, j, n):
                gap = min(gap, 0.5 * float(np.min(d[i][config.masks[j]])))
    triple = np.inf
    if n == 3:
        triple = float(np.min(np.maximum(np.maximum(d[0], d[1]), d[2])))
    frame = np.inf
    fm = grid.frame_mask()
    if fm.any():
        frame = min(float(np.min(dk[fm])) for dk in d)
    return {'gap': gap, 'triple': triple, 'frame': frame, 'available': min(gap, triple, frame)}


def _radial_to_boundary(points: np.ndarray, c: np.ndarray, inner, outer) -> np.ndarray:
    """z ↦ c + (R_outer(θ)/R_inner(θ))(z − c): envoie ∂inner sur ∂outer rayon par rayon."""
    rel = points - c
    r = np.linalg.norm(rel, axis=1)
    moving = r > 0
    dirs = rel[moving] / r[moving, None]
    ratio = np.ones(len(points))
    ratio[moving] = outer.ray_exit(c, dirs) / inner.ray_exit(c, dirs)
    return c + rel * ratio[:, None]


def initial_admissible_map(config: SetConfig, mb: MarkedBoundary, radius: Optional[float] = None) -> VectorMapField:
    """
    Application admissible construite par partition de l'unité.

    Les fonctions a_k valent 1 sur le voisinage de rayon radius de X_k et 0 au-delà de r_out.
    On interpole bilinéairement dans le polygone Q des points marqués:
    Φ_Q = c + Σ a_k (m_k − c) + Σ a_k a_{k+1} (p_{k+1} − m_k − m_{k+1} + c),
    m_k milieu de la corde [p_k, p_{k+1}], c centroïde de Q. La corde k est ensuite
    envoyée sur l'arc γ_k par projection radiale depuis c. Le cadre vaut c (condition CS).

    Args:
        config: Configuration validée à N ensembles
        mb: Donnée à N points marqués
        radius: Rayon des voisinages admissibles (2h par défaut)

    Returns:
        VectorMapField: application admissible, point base c
    """
    grid = config.grid
    h = grid.h
    n = config.n
    if mb.n != n:
        raise InitializerError(f"configuration has {n} sets but the datum has {mb.n} marked points")
    if n < 3:
        raise InitializerError("the initializer needs at least three sets")
    r_in = Config.ADMISSIBILITY_RADIUS_CELLS * h if radius is None else float(radius)

    distances = [distance_field(m, grid) for m in config.masks]
    room = available_radius(config, distances)
    avail = room['available']
    if avail - r_in < 2 * h:
        required = r_in + 2 * h
        logger.error(f"Sets too close for the partition of unity: available {avail:.4g}, need {required:.4g}")
        raise InitializerError(
            f"sets too close for an h-scale partition of unity (available radius {avail:.4g}, "
            f"required {required:.4g}; refine the grid to h ≤ {avail / 4:.4g})", required_spacing=required)
    r_out = r_in + 0.9 * (avail - r_in)
    a = np.stack([cutoff(dk, r_in * (1 + 1e-12), r_out) for dk in distances], axis=-1)

    pts = mb.point_array
    try:
        Q = make_polygon(pts)
    except GeometryError as e:
        raise InitializerError(f"marked points do not span a convex polygon: {str(e)}")
    c = Q.centroid
    mids = 0.5 * (pts + np.roll(pts, -1, axis=0))
    mids_next = np.roll(mids, -1, axis=0)
    p_next = np.roll(pts, -1, axis=0)

    flat = a.reshape(-1, n)
    values = np.tile(c, (len(flat), 1))
    values = values + flat @ (mids - c)
    pair = flat * np.roll(flat, -1, axis=1)
    values = values + pair @ (p_next - mids - mids_next + c)

    values = _radial_to_boundary(values, c, Q, mb.domain)
    logger.debug(f"Initializer: r_in={r_in:.4g}, r_out={r_out:.4g}, available {room}")
    return VectorMapField(grid, values.reshape(grid.shape + (2,)), (float(c[0]), float(c[1])))
