import logging
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from ..errors import DomainOfDefinitionError
from ..planar_maps import PlanarMap
from .grid import GridManifold, ScalarField, VectorMapField

logger = logging.getLogger('bracket')


# === Différences centrées et adjoints ===

def diff(values: np.ndarray, grid: GridManifold, axis: int) -> np.ndarray:
    """
    Dérivée discrète le long de axis.

    Tore: différences centrées périodiques. Boîte plane: centrées à l'intérieur,
    décentrées d'ordre 1 sur la première et la dernière rangée.
    """
    h = grid.h
    if grid.periodic:
        return (np.roll(values, -1, axis=axis) - np.roll(values, 1, axis=axis)) / (2 * h)
    return np.gradient(values, h, axis=axis, edge_order=1)


def diff_adjoint(g: np.ndarray, grid: GridManifold, axis: int) -> np.ndarray:
    """Transposée exacte de diff (rétropropagation du gradient)."""
    h = grid.h
    if grid.periodic:
        return (np.roll(g, 1, axis=axis) - np.roll(g, -1, axis=axis)) / (2 * h)
    g = np.moveaxis(g, axis, 0)
    out = np.zeros_like(g)
    out[2:] += g[1:-1] / (2 * h)
    out[:-2] -= g[1:-1] / (2 * h)
    out[1] += g[0] / h
    out[0] -= g[0] / h
    out[-1] += g[-1] / h
    out[-2] -= g[-1] / h
    return np.moveaxis(out, 0, axis)


def bracket_values(f: np.ndarray, g: np.ndarray, grid: GridManifold) -> np.ndarray:
    """{f, g} = ∂ₓf ∂ᵧg − ∂ᵧf ∂ₓg sur les nœuds."""
    return diff(f, grid, 0) * diff(g, grid, 1) - diff(f, grid, 1) * diff(g, grid, 0)


def bracket_gradients(f: np.ndarray, g: np.ndarray, weights: np.ndarray, grid: GridManifold):
    """
    Gradients de Σ w·{f, g} par rapport à f et g.

    Returns:
        Tuple: (∂/∂f, ∂/∂g)
    """
    fx, fy = diff(f, grid, 0), diff(f, grid, 1)
    gx, gy = diff(g, grid, 0), diff(g, grid, 1)
    grad_f = diff_adjoint(weights * gy, grid, 0) - diff_adjoint(weights * gx, grid, 1)
    grad_g = diff_adjoint(weights * fx, grid, 1) - diff_adjoint(weights * fy, grid, 0)
    return grad_f, grad_g


# === Opérations sur les champs ===

def poisson_bracket(phi: VectorMapField) -> ScalarField:
    return ScalarField(phi.grid, bracket_values(phi.values[..., 0], phi.values[..., 1], phi.grid))


def scalar_bracket(f: ScalarField, g: ScalarField) -> ScalarField:
    f.grid.check_same(g.grid)
    return ScalarField(f.grid, bracket_values(f.values, g.values, f.grid))


def sup_norm(f: ScalarField) -> float:
    return float(np.max(np.abs(f.values)))


def max_value(f: ScalarField) -> float:
    return float(np.max(f.values))


def postcompose(phi: VectorMapField, T: PlanarMap) -> VectorMapField:
    """T ∘ Φ nœud par nœud; le point base (CS) est transporté par T."""
    pts = phi.points()
    ok = T.is_defined(pts)
    if not np.all(ok):
        bad = pts[int(np.argmin(ok))]
        raise DomainOfDefinitionError(f"map value {bad.tolist()} lies outside the domain of {T!r}")
    values = T(pts).reshape(phi.values.shape)
    base = None
    if phi.cs_basepoint is not None:
        base = tuple(T(np.asarray([phi.cs_basepoint]))[0])
    return VectorMapField(phi.grid, values, base)


@dataclass
class VanishingReport:
    """Crochet de T∘Φ sur les nœuds dont l'image par Φ est à au moins 2h hors de Δ."""
    threshold: float
    node_count: int
    max_abs: Optional[float]

    @property
    def vacuous(self) -> bool:
        return self.node_count == 0

    def to_dict(self) -> Dict:
        return {'threshold': self.threshold, 'node_count': self.node_count, 'max': self.max_abs,
                'vacuous': self.vacuous}


def bracket_vanishing_report(phi: VectorMapField, T: PlanarMap) -> VanishingReport:
    if T.target is None:
        raise DomainOfDefinitionError(f"{T!r} has no target domain")
    threshold = 2 * phi.grid.h
    outside = T.target.signed_distance(phi.values) >= threshold
    count = int(np.sum(outside))
    if count == 0:
        logger.debug("Vanishing report is vacuous: no image outside the target")
        return VanishingReport(threshold, 0, None)
    b = poisson_bracket(postcompose(phi, T)).values
    return VanishingReport(threshold, count, float(np.max(np.abs(b[outside]))))
