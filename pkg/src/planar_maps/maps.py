import logging
import math
from typing import Callable, Dict, Optional, Sequence

import numpy as np

from ..errors import DomainOfDefinitionError, MapConstructionError
from ..geometry import ConvexDomain

logger = logging.getLogger('planar_maps')

Evaluator = Callable[[np.ndarray], np.ndarray]


class PlanarMap:
    """
    Application évaluable du plan avec borne déclarée du déterminant jacobien.

    Args:
        evaluator: Fonction (n, 2) -> (n, 2)
        declared_jacobian_bound: Borne supérieure annoncée de det DT
        target: Domaine image éventuel
        provenance: Recette de construction (reconstructible)
        defined_on: Prédicat (n, 2) -> bool du domaine de définition, None = tout le plan
        linear: Partie linéaire exacte si l'application est affine
        details: Données de construction (rayons, profils...)
    """

    def __init__(self, evaluator: Evaluator, declared_jacobian_bound: float,
                 target: Optional[ConvexDomain] = None, provenance: Optional[Dict] = None,
                 defined_on: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                 linear: Optional[np.ndarray] = None, details: Optional[Dict] = None):
        self._evaluator = evaluator
        self.declared_jacobian_bound = float(declared_jacobian_bound)
        self.target = target
        self.provenance = provenance or {'kind': 'custom'}
        self.defined_on = defined_on
        self.linear = None if linear is None else np.asarray(linear, dtype=float)
        self.details = details or {}

    def __call__(self, points) -> np.ndarray:
        arr = np.asarray(points, dtype=float)
        flat = arr.reshape(-1, 2)
        return np.asarray(self._evaluator(flat), dtype=float).reshape(arr.shape)

    def is_defined(self, points) -> np.ndarray:
        arr = np.asarray(points, dtype=float).reshape(-1, 2)
        if self.defined_on is None:
            return np.ones(len(arr), dtype=bool)
        return np.asarray(self.defined_on(arr), dtype=bool)

    def with_bound(self, bound: float) -> 'PlanarMap':
        """Copie avec une borne déclarée différente (rapports de certification forcés)."""
        provenance = dict(self.provenance)
        provenance['declared_bound'] = float(bound)
        return PlanarMap(self._evaluator, bound, self.target, provenance, self.defined_on, self.linear, self.details)

    def __repr__(self):
        return f"PlanarMap({self.provenance.get('kind')}, bound={self.declared_jacobian_bound:.6g})"


def _affine(matrix: np.ndarray, translation: np.ndarray, provenance: Dict) -> PlanarMap:
    A = np.asarray(matrix, dtype=float)
    b = np.asarray(translation, dtype=float)

    def evaluate(z):
        return z @ A.T + b

    return PlanarMap(evaluate, abs(float(np.linalg.det(A))), provenance=provenance, linear=A)


def identity() -> PlanarMap:
    return PlanarMap(lambda z: z.copy(), 1.0, provenance={'kind': 'identity'}, linear=np.eye(2))


def homothety(area_factor: float, center: Sequence[float] = (0.0, 0.0)) -> PlanarMap:
    """Homothétie notée par son effet sur les aires: longueurs multipliées par √area_factor."""
    if not area_factor > 0:
        raise MapConstructionError(f"homothety area factor must be positive, got {area_factor}")
    k = math.sqrt(area_factor)
    c = np.asarray(center, dtype=float)
    A = np.eye(2) * k

    def evaluate(z):
        return c + k * (z - c)

    return PlanarMap(evaluate, float(area_factor), linear=A,
                     provenance={'kind': 'homothety', 'area_factor': float(area_factor), 'center': c.tolist()})


def affine_area_preserving(matrix, translation=(0.0, 0.0)) -> PlanarMap:
    A = np.asarray(matrix, dtype=float)
    if A.shape != (2, 2):
        raise MapConstructionError("affine map needs a 2x2 matrix")
    det = float(np.linalg.det(A))
    if abs(det - 1.0) > 1e-12:
        raise MapConstructionError(f"matrix is not unimodular (det = {det:.12g})")
    m = _affine(A, translation, {'kind': 'affine', 'matrix': A.tolist(), 'translation': list(map(float, translation))})
    m.declared_jacobian_bound = 1.0
    return m


def rotation(angle: float, center: Sequence[float] = (0.0, 0.0)) -> PlanarMap:
    c, s = math.cos(angle), math.sin(angle)
    # multiples exacts de π/2
    quarter = angle / (math.pi / 2)
    if abs(quarter - round(quarter)) < 1e-12:
        c, s = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)][int(round(quarter)) % 4]
    R = np.array([[c, -s], [s, c]])
    ctr = np.asarray(center, dtype=float)
    m = affine_area_preserving(R, ctr - R @ ctr)
    m.provenance = {'kind': 'rotation', 'angle': float(angle), 'center': ctr.tolist()}
    return m


def translation(vector: Sequence[float]) -> PlanarMap:
    m = affine_area_preserving(np.eye(2), vector)
    m.provenance = {'kind': 'translation', 'vector': list(map(float, vector))}
    return m


def _domain_samples(domain: ConvexDomain, n: int = 41) -> np.ndarray:
    """Échantillons du domaine: bord dense plus grille intérieure."""
    t = np.linspace(0.0, 1.0, 8 * n, endpoint=False)
    boundary = domain.boundary_point(t)
    c = domain.centroid
    r = domain.scale
    xs = np.linspace(c[0] - r, c[0] + r, n)
    ys = np.linspace(c[1] - r, c[1] + r, n)
    X, Y = np.meshgrid(xs, ys, indexing='ij')
    grid = np.stack([X.ravel(), Y.ravel()], axis=1)
    grid = grid[domain.contains(grid)]
    return np.concatenate([boundary, grid, c[None, :]], axis=0)


def compose(outer: PlanarMap, inner: PlanarMap, sample_points: Optional[np.ndarray] = None) -> PlanarMap:
    """
    Composition outer ∘ inner; les bornes déclarées se multiplient.

    Le domaine de définition de outer est certifié par échantillonnage de l'image de inner
    (via son domaine cible, ou via les points sample_points).
    """
    if outer.defined_on is not None:
        samples = []
        if inner.target is not None:
            samples.append(_domain_samples(inner.target))
        if sample_points is not None:
            samples.append(inner(np.asarray(sample_points, dtype=float).reshape(-1, 2)))
        if not samples:
            raise DomainOfDefinitionError(
                f"cannot certify that {inner!r} lands in the domain of {outer!r}: no target and no sample points")
        pts = np.concatenate(samples, axis=0)
        ok = outer.is_defined(pts)
        if not np.all(ok):
            bad = pts[np.argmin(ok)]
            raise DomainOfDefinitionError(f"image point {bad.tolist()} lies outside the domain of {outer!r}")

    def evaluate(z):
        return outer(inner(z))

    defined_on = None
    if inner.defined_on is not None:
        defined_on = inner.defined_on
    linear = None
    if outer.linear is not None and inner.linear is not None:
        linear = outer.linear @ inner.linear
    return PlanarMap(evaluate, outer.declared_jacobian_bound * inner.declared_jacobian_bound,
                     target=outer.target, defined_on=defined_on, linear=linear,
                     provenance={'kind': 'compose', 'outer': outer.provenance, 'inner': inner.provenance})


def compose_all(*maps: PlanarMap) -> PlanarMap:
    """compose_all(A, B, C) = A ∘ B ∘ C."""
    result = maps[-1]
    for m in reversed(maps[:-1]):
        result = compose(m, result)
    return result
