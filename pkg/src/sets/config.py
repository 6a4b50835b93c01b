import logging
from dataclasses import dataclass, field
from typing import Dict, Sequence, Tuple

import numpy as np

from ..errors import CyclicIntersectionError, GridMismatchError, SetValidationError
from ..fields import GridManifold

logger = logging.getLogger('sets')


def cyclic_neighbours(i: int, j: int, n: int) -> bool:
    return (i - j) % n in (0, 1, n - 1)


@dataclass(frozen=True)
class SetConfig:
    """
    N masques booléens X_1..X_N sur une grille, en intersection cyclique.

    Les indices sont en base 0 dans l'API; les messages d'erreur utilisent X1..XN.
    """
    grid: GridManifold
    masks: Tuple[np.ndarray, ...]
    labels: Tuple[str, ...] = ()
    _cache: Dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        frozen = []
        for k, m in enumerate(self.masks):
            arr = np.array(m, dtype=bool, copy=True)
            if arr.shape != self.grid.shape:
                raise GridMismatchError(f"mask X{k + 1} has shape {arr.shape}, grid is {self.grid.shape}")
            arr.flags.writeable = False
            frozen.append(arr)
        object.__setattr__(self, 'masks', tuple(frozen))
        if not self.labels:
            object.__setattr__(self, 'labels', tuple(f"X{k + 1}" for k in range(len(frozen))))
        self.validate()

    @property
    def n(self) -> int:
        return len(self.masks)

    def validate(self):
        if self.n < 2:
            raise SetValidationError("a set configuration needs at least two sets")
        for k, m in enumerate(self.masks):
            if not m.any():
                raise SetValidationError(f"set X{k + 1} is empty at this resolution")
        for i in range(self.n):
            for j in range(i + 1, self.n):
                if cyclic_neighbours(i, j, self.n):
                    continue
                if np.any(self.masks[i] & self.masks[j]):
                    logger.error(f"Cyclic intersection violated by X{i + 1} and X{j + 1}")
                    raise CyclicIntersectionError((i, j))

    def union(self) -> np.ndarray:
        if 'union' not in self._cache:
            out = np.zeros(self.grid.shape, dtype=bool)
            for m in self.masks:
                out |= m
            out.flags.writeable = False
            self._cache['union'] = out
        return self._cache['union']

    def intersection(self, i: int, j: int) -> np.ndarray:
        return self.masks[i % self.n] & self.masks[j % self.n]

    def triple_intersection_empty(self) -> bool:
        if self.n != 3:
            return True
        return not np.any(self.masks[0] & self.masks[1] & self.masks[2])

    def with_masks(self, masks: Sequence[np.ndarray], labels: Sequence[str] = ()) -> 'SetConfig':
        return SetConfig(self.grid, tuple(masks), tuple(labels))

    def summary(self) -> Dict:
        return {'grid': self.grid.to_dict(), 'n': self.n, 'labels': list(self.labels),
                'node_counts': [int(m.sum()) for m in self.masks]}
