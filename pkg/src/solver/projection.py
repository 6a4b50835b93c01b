import logging
from typing import Optional, Sequence

import numpy as np

from ..config import Config
from ..fields import VectorMapField
from ..geometry import MarkedBoundary, make_disc
from ..planar_maps import pseudoretract
from ..admissible import cutoff
from ..sets import SetConfig, distance_field, neighborhood

logger = logging.getLogger('pb_solver')


def _collar_weights(mask: np.ndarray, grid, width: float) -> np.ndarray:
    """1 sur mask, 0 à distance ≥ width, C¹ entre les deux."""
    d = distance_field(mask, grid)
    w = cutoff(d, 0.0, width)
    w[mask] = 1.0
    return w


class FeasibilityProjector:
    """
    Restaure l'admissibilité d'une itérée (forme Φ).

    Ordre: extérieur ramené dans Δ (pseudorétraction ou projection), nœuds de U_k projetés sur γ_k,
    nœuds de U_k ∩ U_{k+1} envoyés sur p_{k+1}, collier de 4h raccordé par combinaison convexe,
    cadre envoyé sur le point base.
    """

    def __init__(self, config: SetConfig, mb: MarkedBoundary, basepoint, exterior: str = 'retract',
                 eps: float = 0.05):
        self.config = config
        self.mb = mb
        self.grid = config.grid
        self.basepoint = np.asarray(basepoint, dtype=float)
        self.exterior = exterior
        self.retract = pseudoretract(mb.domain, eps) if exterior == 'retract' else None
        h = self.grid.h
        radius = Config.ADMISSIBILITY_RADIUS_CELLS * h
        self.U = [neighborhood(m, radius, self.grid) for m in config.masks]
        n = config.n
        self.corners = [self.U[k] & self.U[(k + 1) % n] for k in range(n)]
        self.covered = np.logical_or.reduce(self.U)
        collar = Config.COLLAR_CELLS * h
        self.weights = [_collar_weights(u, self.grid, collar) for u in self.U]
        self.frame = self.grid.frame_mask()

    def _into_domain(self, values: np.ndarray) -> np.ndarray:
        flat = values.reshape(-1, 2)
        if self.retract is not None:
            return self.retract(flat).reshape(values.shape)
        return self.mb.domain.project(flat).reshape(values.shape)

    def project_values(self, values: np.ndarray) -> np.ndarray:
        out = self._into_domain(np.asarray(values, dtype=float))
        for k in range(self.config.n):
            zone = (self.weights[k] > 0) & ~self.covered
            w = self.weights[k][zone][:, None]
            out[zone] = out[zone] + w * (self.mb.arc_project(out[zone], k) - out[zone])
        for k in range(self.config.n):
            out[self.U[k]] = self.mb.arc_project(out[self.U[k]], k)
        for k, corner in enumerate(self.corners):
            out[corner] = self.mb.point_array[(k + 1) % self.config.n]
        out[self.frame] = self.basepoint
        return out

    def __call__(self, phi: VectorMapField) -> VectorMapField:
        return phi.with_values(self.project_values(phi.values), tuple(self.basepoint))


class CircleProjector:
    """
    Projection pour Pb_X: boule ramenée par pseudorétraction, voisinage de X normalisé
    radialement sur le cercle, collier raccordé, cadre sur le point base.
    """

    def __init__(self, mask: np.ndarray, grid, basepoint, center: Sequence[float] = (0.0, 0.0),
                 radius: float = 1.0, eps: float = 0.05):
        self.grid = grid
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        self.basepoint = np.asarray(basepoint, dtype=float)
        self.retract = pseudoretract(make_disc(center, radius), eps)
        h = grid.h
        self.U = neighborhood(mask, Config.ADMISSIBILITY_RADIUS_CELLS * h, grid)
        self.weights = _collar_weights(self.U, grid, Config.COLLAR_CELLS * h)
        self.frame = grid.frame_mask()

    def project_values(self, values: np.ndarray, fallback: Optional[np.ndarray] = None) -> np.ndarray:
        out = self.retract(np.asarray(values, dtype=float).reshape(-1, 2)).reshape(values.shape)
        rel = out - self.center
        r = np.linalg.norm(rel, axis=-1)
        degenerate = r <= 1e-12 * self.radius
        if fallback is not None:
            rel = np.where(degenerate[..., None], np.asarray(fallback) - self.center, rel)
            r = np.linalg.norm(rel, axis=-1)
        safe = np.where(r > 0, r, 1.0)
        on_circle = self.center + self.radius * rel / safe[..., None]
        w = self.weights[..., None]
        out = out + w * (on_circle - out)
        out[self.U] = on_circle[self.U]
        out[self.frame] = self.basepoint
        return out

    def __call__(self, phi: VectorMapField, fallback: Optional[np.ndarray] = None) -> VectorMapField:
        return phi.with_values(self.project_values(phi.values, fallback), tuple(self.basepoint))
