import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from ..config import Config
from ..errors import MapConstructionError
from .maps import PlanarMap

logger = logging.getLogger('certify')

Region = Tuple[float, float, float, float]


@dataclass
class CertificationReport:
    """Résultat d'une certification de borne jacobienne par échantillonnage."""
    provenance: Dict
    region: Region
    n: int
    method: str
    step: float
    max_jacobian: float
    argmax: Tuple[float, float]
    min_jacobian: float
    declared_bound: float
    tolerance: float
    richardson_gap: float = 0.0
    undefined_samples: int = 0
    extra: Dict = field(default_factory=dict)

    @property
    def slack(self) -> float:
        return self.declared_bound + self.tolerance - self.max_jacobian

    @property
    def passed(self) -> bool:
        return self.max_jacobian <= self.declared_bound + self.tolerance

    def to_dict(self) -> Dict:
        return {
            'provenance': self.provenance,
            'region': list(self.region),
            'n': self.n,
            'method': self.method,
            'step': self.step,
            'max': self.max_jacobian,
            'argmax': list(self.argmax),
            'min': self.min_jacobian,
            'declared_bound': self.declared_bound,
            'tolerance': self.tolerance,
            'slack': self.slack,
            'richardson_gap': self.richardson_gap,
            'undefined_samples': self.undefined_samples,
            'verdict': 'pass' if self.passed else 'fail',
        }


def _exact_det(A: np.ndarray) -> float:
    return float(A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0])


def jacobian_determinants(T: PlanarMap, points: np.ndarray, step: float) -> np.ndarray:
    """Déterminant jacobien par différences centrées de pas step."""
    ex = np.array([step, 0.0])
    ey = np.array([0.0, step])
    stacked = np.concatenate([points + ex, points - ex, points + ey, points - ey])
    out = T(stacked)
    n = len(points)
    dx = (out[:n] - out[n:2 * n]) / (2 * step)
    dy = (out[2 * n:3 * n] - out[3 * n:]) / (2 * step)
    return dx[:, 0] * dy[:, 1] - dy[:, 0] * dx[:, 1]


def _richardson(T: PlanarMap, points: np.ndarray, step: float) -> Tuple[np.ndarray, np.ndarray]:
    coarse = jacobian_determinants(T, points, step)
    fine = jacobian_determinants(T, points, step / 2)
    return (4 * fine - coarse) / 3, np.abs(fine - coarse)


def certify_jacobian(T: PlanarMap, region: Sequence[float] = (-2.0, 2.0, -2.0, 2.0),
                     n: int = None, tolerance: float = None,
                     max_workers: Optional[int] = None) -> CertificationReport:
    """
    Certifie la borne déclarée du déterminant jacobien sur une grille n×n de la région.

    Les applications affines utilisent le déterminant exact de leur partie linéaire.
    Les autres utilisent des différences centrées de pas (taille/(n-1))/8 avec une
    extrapolation de Richardson à pas moitié.

    Args:
        T: Application à certifier
        region: (xmin, xmax, ymin, ymax)
        n: Nombre d'échantillons par axe (≥ 3)
        tolerance: Tolérance ajoutée à la borne déclarée
        max_workers: Parallélisme sur les lignes d'échantillons

    Returns:
        CertificationReport: max, argmax, verdict
    """
    n = Config.JACOBIAN_SAMPLES if n is None else int(n)
    tolerance = Config.JACOBIAN_TOL if tolerance is None else float(tolerance)
    if n < 3:
        raise MapConstructionError(f"certification needs at least 3 samples per axis, got {n}")
    xmin, xmax, ymin, ymax = map(float, region)
    if not (xmax > xmin and ymax > ymin):
        raise MapConstructionError(f"degenerate certification region {region}")
    region = (xmin, xmax, ymin, ymax)

    if T.linear is not None:
        det = _exact_det(T.linear)
        logger.info(f"Exact affine certification of {T!r}: det = {det!r}")
        return CertificationReport(T.provenance, region, n, 'exact-affine', 0.0, abs(det), (xmin, ymin),
                                   abs(det), T.declared_jacobian_bound, tolerance)

    spacing = max(xmax - xmin, ymax - ymin) / (n - 1)
    step = spacing / 8
    xs = np.linspace(xmin, xmax, n)
    ys = np.linspace(ymin, ymax, n)
    workers = max_workers or Config.MAX_WORKERS
    chunks = np.array_split(np.arange(n), max(1, min(workers * 4, n)))

    def run(rows):
        X, Y = np.meshgrid(xs[rows], ys, indexing='ij')
        pts = np.stack([X.ravel(), Y.ravel()], axis=1)
        ok = T.is_defined(pts)
        vals, gap = _richardson(T, pts[ok], step)
        return pts[ok], vals, gap, int(np.sum(~ok))

    with ThreadPoolExecutor(max_workers=workers) as executor:
        results = list(executor.map(run, chunks))

    pts = np.concatenate([r[0] for r in results])
    vals = np.abs(np.concatenate([r[1] for r in results]))
    gaps = np.concatenate([r[2] for r in results])
    undefined = sum(r[3] for r in results)
    if len(vals) == 0:
        raise MapConstructionError("no sample of the region lies in the domain of definition")
    i = int(np.argmax(vals))
    report = CertificationReport(T.provenance, region, n, 'finite-difference', step, float(vals[i]),
                                 (float(pts[i, 0]), float(pts[i, 1])), float(np.min(vals)),
                                 T.declared_jacobian_bound, tolerance, float(np.max(gaps)), undefined)
    log = logger.info if report.passed else logger.warning
    log(f"Certification of {T!r}: max {report.max_jacobian:.6g} at {report.argmax}, "
        f"declared {report.declared_bound:.6g} + {report.tolerance:.3g}, verdict {'pass' if report.passed else 'fail'}")
    return report
