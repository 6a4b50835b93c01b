import logging

import numpy as np
from scipy import ndimage

from ..errors import SetValidationError
from ..fields import GridManifold
from .config import SetConfig

logger = logging.getLogger('sets')


def distance_field(mask: np.ndarray, grid: GridManifold) -> np.ndarray:
    """Distance euclidienne de chaque nœud au masque (quotient sur le tore)."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        return np.full(grid.shape, np.inf)
    if grid.periodic:
        tiled = np.tile(~mask, (3, 3))
        dist = ndimage.distance_transform_edt(tiled, sampling=grid.h)
        nx, ny = grid.shape
        return dist[nx:2 * nx, ny:2 * ny]
    return ndimage.distance_transform_edt(~mask, sampling=grid.h)


def neighborhood(mask: np.ndarray, r: float, grid: GridManifold) -> np.ndarray:
    """Dilatation métrique fermée de rayon r."""
    if r < 0:
        raise SetValidationError(f"neighbourhood radius must be non-negative, got {r}")
    mask = np.asarray(mask, dtype=bool)
    if r == 0 or not mask.any():
        return mask.copy()
    return distance_field(mask, grid) <= r * (1 + 1e-12)


def hausdorff_distance(a: np.ndarray, b: np.ndarray, grid: GridManifold) -> float:
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    if not a.any() or not b.any():
        raise SetValidationError("Hausdorff distance needs two nonempty masks")
    return float(max(np.max(distance_field(b, grid)[a]), np.max(distance_field(a, grid)[b])))


def merge_last_two(config: SetConfig) -> SetConfig:
    """(X_1, …, X_{N-2}, X_{N-1} ∪ X_N), revalidée."""
    if config.n < 4:
        raise SetValidationError(f"merging needs at least four sets, got {config.n}")
    masks = list(config.masks[:-2]) + [config.masks[-2] | config.masks[-1]]
    labels = list(config.labels[:-2]) + [f"{config.labels[-2]}∪{config.labels[-1]}"]
    return SetConfig(config.grid, tuple(masks), tuple(labels))


def closure_minus(x: np.ndarray, k: np.ndarray, grid: GridManifold) -> np.ndarray:
    """Adhérence rastérisée de X∖K: nœuds de X à distance ≤ h de X∖K."""
    rest = x & ~k
    return x & neighborhood(rest, grid.h, grid)


def split_by_neighborhood(config: SetConfig, k: np.ndarray) -> SetConfig:
    """
    (cl(X_1∖K), X_2, …, X_{N-1}, cl(X_N∖K), K).

    Args:
        config: Configuration à N ensembles
        k: Masque K contenant X_1 ∩ X_N et disjoint de X_2 … X_{N-1}

    Returns:
        SetConfig: configuration à N+1 ensembles
    """
    k = np.asarray(k, dtype=bool)
    if not k.any():
        raise SetValidationError("K is empty: the split needs a nonempty neighbourhood of X1 ∩ XN")
    first, last = config.masks[0], config.masks[-1]
    missing = first & last & ~k
    if missing.any():
        raise SetValidationError(f"K misses {int(missing.sum())} nodes of X1 ∩ X{config.n}")
    for j in range(1, config.n - 1):
        if np.any(k & config.masks[j]):
            raise SetValidationError(f"K meets X{j + 1}")
    masks = [closure_minus(first, k, config.grid)] + list(config.masks[1:-1]) + \
        [closure_minus(last, k, config.grid), k]
    labels = [f"{config.labels[0]}∖K"] + list(config.labels[1:-1]) + [f"{config.labels[-1]}∖K", 'K']
    logger.debug(f"Split by K with {int(k.sum())} nodes")
    return SetConfig(config.grid, tuple(masks), tuple(labels))
