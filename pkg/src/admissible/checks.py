import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from ..config import Config
from ..fields import VectorMapField
from ..geometry import MarkedBoundary
from ..sets import SetConfig, neighborhood

logger = logging.getLogger('admissible')


@dataclass
class AdmissibilityReport:
    """Verdicts d'admissibilité: Φ(U_k) ⊆ γ_k pour chaque k, Φ(M) ⊆ Δ, condition (CS)."""
    radius: float
    tol: float
    verdicts: List[bool]
    max_distances: List[float]
    in_domain: bool
    cs_ok: bool
    cs_violation: float
    worst: Optional[Dict] = None
    labels: List[str] = field(default_factory=list)

    @property
    def all_ok(self) -> bool:
        return all(self.verdicts) and self.in_domain and self.cs_ok

    def failing(self) -> List[int]:
        return [k for k, ok in enumerate(self.verdicts) if not ok]

    def to_dict(self) -> Dict:
        return {'radius': self.radius, 'tol': self.tol, 'verdicts': list(self.verdicts),
                'max_distances': list(self.max_distances), 'in_domain': self.in_domain,
                'cs_ok': self.cs_ok, 'cs_violation': self.cs_violation, 'worst': self.worst,
                'labels': list(self.labels), 'all_ok': self.all_ok}


def _worst_node(phi: VectorMapField, mask: np.ndarray, dist: np.ndarray, k: int, label: str) -> Dict:
    idx = np.argwhere(mask)
    j = int(np.argmax(dist))
    i0, j0 = (int(v) for v in idx[j])
    X, Y = phi.grid.coords()
    return {'set': k, 'label': label, 'node': [i0, j0], 'position': [float(X[i0, j0]), float(Y[i0, j0])],
            'image': [float(v) for v in phi.values[i0, j0]], 'distance': float(dist[j])}


def _cs_check(phi: VectorMapField, domain, tol: float):
    if phi.grid.periodic:
        return True, 0.0
    violation = phi.frame_violation()
    if phi.cs_basepoint is None:
        return False, violation
    base_ok = bool(domain.signed_distance(np.asarray(phi.cs_basepoint)) <= tol)
    return bool(violation <= tol and base_ok), violation


def check_admissible(phi: VectorMapField, config: SetConfig, mb: MarkedBoundary,
                     radius: Optional[float] = None, tol: Optional[float] = None) -> AdmissibilityReport:
    """
    Vérifie l'admissibilité de Φ pour (config, mb); ne lève jamais pour un verdict négatif.

    Args:
        phi: Application discrète
        config: Ensembles X_1..X_N
        mb: Donnée 𝔇 à N points marqués
        radius: Rayon des voisinages U_k (2h par défaut)
        tol: Tolérance d'appartenance aux arcs

    Returns:
        AdmissibilityReport: verdicts par indice, verdict CS, pire nœud fautif
    """
    config.grid.check_same(phi.grid)
    radius = Config.ADMISSIBILITY_RADIUS_CELLS * phi.grid.h if radius is None else float(radius)
    tol = Config.BOUNDARY_TOL if tol is None else float(tol)
    verdicts, maxima = [], []
    worst = None
    n = min(config.n, mb.n)
    if config.n != mb.n:
        logger.warning(f"Admissibility check with {config.n} sets against {mb.n} marked points")
    for k in range(n):
        U = neighborhood(config.masks[k], radius, phi.grid)
        dist = mb.arc_distance(phi.values[U], k)
        m = float(np.max(dist)) if dist.size else 0.0
        verdicts.append(m <= tol)
        maxima.append(m)
        if m > tol and (worst is None or m > worst['distance']):
            worst = _worst_node(phi, U, dist, k, config.labels[k])
    verdicts.extend([False] * (config.n - n))
    inside = mb.domain.signed_distance(phi.values)
    in_domain = bool(np.max(inside) <= tol)
    if not in_domain and worst is None:
        i0, j0 = np.unravel_index(int(np.argmax(inside)), inside.shape)
        worst = {'set': None, 'label': 'M', 'node': [int(i0), int(j0)],
                 'image': [float(v) for v in phi.values[i0, j0]], 'distance': float(np.max(inside))}
    cs_ok, violation = _cs_check(phi, mb.domain, tol)
    report = AdmissibilityReport(radius, tol, verdicts, maxima, in_domain, cs_ok, violation, worst,
                                 list(config.labels))
    if not report.all_ok:
        logger.debug(f"Admissibility failed: {report.to_dict()}")
    return report


def check_circle_admissible(phi: VectorMapField, mask: np.ndarray, center=(0.0, 0.0), circle_radius: float = 1.0,
                            radius: Optional[float] = None, tol: Optional[float] = None) -> AdmissibilityReport:
    """Φ envoie le voisinage de X dans le cercle et M dans la boule (forme Pb_X)."""
    radius = Config.ADMISSIBILITY_RADIUS_CELLS * phi.grid.h if radius is None else float(radius)
    tol = Config.BOUNDARY_TOL if tol is None else float(tol)
    c = np.asarray(center, dtype=float)
    U = neighborhood(mask, radius, phi.grid)
    modulus = np.linalg.norm(phi.values - c, axis=-1)
    dist = np.abs(modulus[U] - circle_radius)
    m = float(np.max(dist)) if dist.size else 0.0
    worst = _worst_node(phi, U, dist, 0, 'X') if m > tol else None
    in_domain = bool(np.max(modulus) <= circle_radius + tol)
    if phi.grid.periodic:
        cs_ok, violation = True, 0.0
    else:
        violation = phi.frame_violation()
        base_ok = phi.cs_basepoint is not None and \
            np.linalg.norm(np.asarray(phi.cs_basepoint) - c) <= circle_radius + tol
        cs_ok = bool(violation <= tol and base_ok)
    return AdmissibilityReport(radius, tol, [m <= tol], [m], in_domain, cs_ok, violation, worst, ['X'])
