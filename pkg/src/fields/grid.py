import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from ..config import Config
from ..errors import GridMismatchError


@dataclass(frozen=True)
class GridManifold:
    """
    Variété grille 2D munie de dx∧dy: boîte plane ou tore plat.

    Boîte plane: (nx+1)×(ny+1) nœuds de lower à lower + extent.
    Tore: nx×ny nœuds, le nœud nx s'identifiant au nœud 0.
    """
    kind: str
    lower: Tuple[float, float]
    extent: Tuple[float, float]
    cells: Tuple[int, int]
    _cache: Dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.kind not in ('plane', 'torus'):
            raise GridMismatchError(f"unknown grid kind '{self.kind}'")
        nx, ny = self.cells
        if nx < 4 or ny < 4:
            raise GridMismatchError(f"grid needs at least 4 cells per axis, got {self.cells}")
        hx = self.extent[0] / nx
        hy = self.extent[1] / ny
        if not hx > 0 or abs(hx - hy) > 1e-12 * max(hx, hy):
            raise GridMismatchError(f"grid spacing must be equal on both axes (hx={hx!r}, hy={hy!r})")

    @property
    def h(self) -> float:
        return self.extent[0] / self.cells[0]

    @property
    def periodic(self) -> bool:
        return self.kind == 'torus'

    @property
    def shape(self) -> Tuple[int, int]:
        nx, ny = self.cells
        return (nx, ny) if self.periodic else (nx + 1, ny + 1)

    @property
    def size(self) -> int:
        return self.shape[0] * self.shape[1]

    def axes(self) -> Tuple[np.ndarray, np.ndarray]:
        nx, ny = self.shape
        return (self.lower[0] + self.h * np.arange(nx), self.lower[1] + self.h * np.arange(ny))

    def coords(self) -> Tuple[np.ndarray, np.ndarray]:
        if 'coords' not in self._cache:
            xs, ys = self.axes()
            X, Y = np.meshgrid(xs, ys, indexing='ij')
            X.flags.writeable = False
            Y.flags.writeable = False
            self._cache['coords'] = (X, Y)
        return self._cache['coords']

    def node_points(self) -> np.ndarray:
        X, Y = self.coords()
        return np.stack([X, Y], axis=-1)

    def frame_mask(self, width: int = None) -> np.ndarray:
        """Cadre extérieur de largeur width cellules (vide sur le tore)."""
        width = Config.FRAME_CELLS if width is None else width
        mask = np.zeros(self.shape, dtype=bool)
        if self.periodic:
            return mask
        mask[:width, :] = True
        mask[-width:, :] = True
        mask[:, :width] = True
        mask[:, -width:] = True
        return mask

    def displacement(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """b - a, réduit au plus court représentant sur le tore."""
        d = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
        if self.periodic:
            L = np.asarray(self.extent, dtype=float)
            d = d - L * np.round(d / L)
        return d

    def distance(self, a, b) -> np.ndarray:
        return np.linalg.norm(self.displacement(a, b), axis=-1)

    def nearest_node(self, point) -> Tuple[int, int]:
        p = np.asarray(point, dtype=float)
        idx = np.rint((p - np.asarray(self.lower)) / self.h).astype(int)
        if self.periodic:
            return int(idx[0] % self.shape[0]), int(idx[1] % self.shape[1])
        return int(np.clip(idx[0], 0, self.shape[0] - 1)), int(np.clip(idx[1], 0, self.shape[1] - 1))

    def contains_point(self, point) -> bool:
        if self.periodic:
            return True
        p = np.asarray(point, dtype=float)
        lo = np.asarray(self.lower)
        hi = lo + np.asarray(self.extent)
        return bool(np.all(p >= lo) and np.all(p <= hi))

    def with_cells(self, cells: int) -> 'GridManifold':
        """Même variété, résolution cells sur l'axe x (y ajusté au même pas)."""
        ratio = self.extent[1] / self.extent[0]
        ny = int(round(cells * ratio))
        return GridManifold(self.kind, self.lower, self.extent, (int(cells), ny))

    def check_same(self, other: 'GridManifold'):
        if self != other:
            raise GridMismatchError(f"fields live on different grids: {self} vs {other}")

    def to_dict(self) -> Dict:
        return {'kind': self.kind, 'lower': list(self.lower), 'extent': list(self.extent),
                'cells': list(self.cells), 'h': self.h}


def plane_box(lower: Sequence[float] = (-1.0, -1.0), upper: Sequence[float] = (1.0, 1.0),
              cells: int = None) -> GridManifold:
    """Boîte plane [lower, upper] avec cells cellules sur l'axe x."""
    cells = Config.TEST_GRID if cells is None else int(cells)
    extent = (float(upper[0]) - float(lower[0]), float(upper[1]) - float(lower[1]))
    ny = int(round(cells * extent[1] / extent[0]))
    return GridManifold('plane', (float(lower[0]), float(lower[1])), extent, (cells, ny))


def torus(size: Sequence[float] = (1.0, 1.0), cells: int = None,
          lower: Sequence[float] = (0.0, 0.0)) -> GridManifold:
    cells = Config.TEST_GRID if cells is None else int(cells)
    extent = (float(size[0]), float(size[1]))
    ny = int(round(cells * extent[1] / extent[0]))
    return GridManifold('torus', (float(lower[0]), float(lower[1])), extent, (cells, ny))


def grid_from_dict(spec: Dict, cells_override: Optional[int] = None) -> GridManifold:
    cells = cells_override or spec.get('cells', Config.DEFAULT_GRID)
    if spec['kind'] == 'torus':
        return torus(spec.get('size', (1.0, 1.0)), cells, spec.get('lower', (0.0, 0.0)))
    if spec['kind'] == 'plane':
        return plane_box(spec.get('lower', (-1.0, -1.0)), spec.get('upper', (1.0, 1.0)), cells)
    raise GridMismatchError(f"unknown grid kind '{spec['kind']}'")


def _frozen(values: np.ndarray) -> np.ndarray:
    arr = np.array(values, dtype=float, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class ScalarField:
    grid: GridManifold
    values: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.values)
        if arr.shape != self.grid.shape:
            raise GridMismatchError(f"field shape {arr.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(arr)):
            raise GridMismatchError("field contains non-finite values")
        object.__setattr__(self, 'values', arr)

    @classmethod
    def from_function(cls, grid: GridManifold, func) -> 'ScalarField':
        X, Y = grid.coords()
        return cls(grid, np.broadcast_to(func(X, Y), grid.shape))

    def frame_violation(self, value: float = 0.0) -> float:
        mask = self.grid.frame_mask()
        if not mask.any():
            return 0.0
        return float(np.max(np.abs(self.values[mask] - value)))


@dataclass(frozen=True)
class VectorMapField:
    """
    Application discrète Φ = (Φ₁, Φ₂): M → ℝ², valeurs de forme (nx, ny, 2).

    cs_basepoint est le point p de la condition (CS) sur la boîte plane.
    """
    grid: GridManifold
    values: np.ndarray
    cs_basepoint: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        arr = _frozen(self.values)
        if arr.shape != self.grid.shape + (2,):
            raise GridMismatchError(f"map shape {arr.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(arr)):
            raise GridMismatchError("map contains non-finite values")
        object.__setattr__(self, 'values', arr)
        if self.cs_basepoint is not None:
            object.__setattr__(self, 'cs_basepoint', (float(self.cs_basepoint[0]), float(self.cs_basepoint[1])))

    @classmethod
    def from_components(cls, first: ScalarField, second: ScalarField, cs_basepoint=None) -> 'VectorMapField':
        first.grid.check_same(second.grid)
        return cls(first.grid, np.stack([first.values, second.values], axis=-1), cs_basepoint)

    @property
    def first(self) -> ScalarField:
        return ScalarField(self.grid, self.values[..., 0])

    @property
    def second(self) -> ScalarField:
        return ScalarField(self.grid, self.values[..., 1])

    def points(self) -> np.ndarray:
        return self.values.reshape(-1, 2)

    def with_values(self, values: np.ndarray, cs_basepoint=None) -> 'VectorMapField':
        base = self.cs_basepoint if cs_basepoint is None else cs_basepoint
        return VectorMapField(self.grid, values, base)

    def swapped(self) -> 'VectorMapField':
        return VectorMapField(self.grid, self.values[..., ::-1], self.cs_basepoint)

    def frame_violation(self) -> float:
        """max |Φ - p| sur le cadre (0 sur le tore; inf sans point base sur la boîte plane)."""
        mask = self.grid.frame_mask()
        if not mask.any():
            return 0.0
        if self.cs_basepoint is None:
            return math.inf
        return float(np.max(np.abs(self.values[mask] - np.asarray(self.cs_basepoint))))
