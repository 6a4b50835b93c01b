import math
from dataclasses import dataclass, field
from typing import Dict, Sequence, Tuple, Optional

import numpy as np

from ..config import Config
from ..errors import GeometryError

Point = Tuple[float, float]


def _as_points(points) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.shape[-1] != 2:
        raise GeometryError(f"expected points with 2 coordinates, got shape {arr.shape}")
    return arr


def segment_distances(points: np.ndarray, starts: np.ndarray, ends: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Distances exactes point-segment, vectorisées.

    Args:
        points: Tableau (n, 2)
        starts: Débuts des segments (m, 2)
        ends: Fins des segments (m, 2)

    Returns:
        Tuple: distances (n, m) et paramètres de projection (n, m) dans [0, 1]
    """
    d = ends - starts
    length2 = np.einsum('ij,ij->i', d, d)
    rel = points[:, None, :] - starts[None, :, :]
    with np.errstate(invalid='ignore', divide='ignore'):
        s = np.where(length2 > 0, np.einsum('nmj,mj->nm', rel, d) / np.where(length2 > 0, length2, 1.0), 0.0)
    s = np.clip(s, 0.0, 1.0)
    foot = starts[None, :, :] + s[..., None] * d[None, :, :]
    return np.linalg.norm(points[:, None, :] - foot, axis=-1), s


@dataclass(frozen=True)
class ConvexDomain:
    """Domaine convexe cible Δ: disque ou polygone convexe orienté."""
    kind: str
    center: Point = (0.0, 0.0)
    radius: float = 0.0
    vertices: Tuple[Point, ...] = ()
    declared_area: float = 1.0
    normalization: str = 'custom'
    _cache: Dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.kind == 'disc':
            if not self.radius > 0:
                raise GeometryError(f"disc radius must be positive, got {self.radius}")
        elif self.kind == 'polygon':
            verts = np.asarray(self.vertices, dtype=float)
            if verts.ndim != 2 or verts.shape[0] < 3 or verts.shape[1] != 2:
                raise GeometryError("polygon needs at least three vertices")
            edges = np.roll(verts, -1, axis=0) - verts
            nxt = np.roll(edges, -1, axis=0)
            cross = edges[:, 0] * nxt[:, 1] - edges[:, 1] * nxt[:, 0]
            if np.any(cross <= 0):
                raise GeometryError("polygon vertices must be strictly convex and counterclockwise")
        else:
            raise GeometryError(f"unknown domain kind '{self.kind}'")
        computed = self.area
        if abs(computed - self.declared_area) > Config.AREA_TOL * max(1.0, abs(computed)):
            raise GeometryError(
                f"declared area {self.declared_area!r} does not match computed area {computed!r}")

    # === Géométrie de base ===

    @property
    def area(self) -> float:
        if self.kind == 'disc':
            return math.pi * self.radius ** 2
        v = self.vertex_array
        x, y = v[:, 0], v[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    @property
    def vertex_array(self) -> np.ndarray:
        if 'vertices' not in self._cache:
            self._cache['vertices'] = np.asarray(self.vertices, dtype=float).reshape(-1, 2)
        return self._cache['vertices']

    @property
    def n_edges(self) -> int:
        return len(self.vertices)

    @property
    def centroid(self) -> np.ndarray:
        if self.kind == 'disc':
            return np.asarray(self.center, dtype=float)
        v = self.vertex_array
        x, y = v[:, 0], v[:, 1]
        cross = x * np.roll(y, -1) - np.roll(x, -1) * y
        a = 0.5 * np.sum(cross)
        cx = np.sum((x + np.roll(x, -1)) * cross) / (6 * a)
        cy = np.sum((y + np.roll(y, -1)) * cross) / (6 * a)
        return np.array([cx, cy])

    def edge_data(self):
        """Retourne (débuts, fins, directions unitaires, longueurs, normales intérieures)."""
        if 'edges' not in self._cache:
            starts = self.vertex_array
            ends = np.roll(starts, -1, axis=0)
            d = ends - starts
            lengths = np.linalg.norm(d, axis=1)
            unit = d / lengths[:, None]
            inward = np.stack([-unit[:, 1], unit[:, 0]], axis=1)
            self._cache['edges'] = (starts, ends, unit, lengths, inward)
        return self._cache['edges']

    @property
    def perimeter(self) -> float:
        if self.kind == 'disc':
            return 2 * math.pi * self.radius
        return float(np.sum(self.edge_data()[3]))

    @property
    def scale(self) -> float:
        """Échelle de longueur typique (rayon circonscrit autour du centroïde)."""
        return self.circumradius(self.centroid)

    def circumradius(self, about) -> float:
        about = np.asarray(about, dtype=float)
        if self.kind == 'disc':
            return float(np.linalg.norm(about - np.asarray(self.center)) + self.radius)
        return float(np.max(np.linalg.norm(self.vertex_array - about, axis=1)))

    # === Requêtes ponctuelles ===

    def signed_distance(self, points) -> np.ndarray:
        """Distance signée approchée (exacte à l'intérieur et près des arêtes), négative dedans."""
        pts = _as_points(points)
        flat = pts.reshape(-1, 2)
        if self.kind == 'disc':
            out = np.linalg.norm(flat - np.asarray(self.center), axis=1) - self.radius
        else:
            starts, _, _, _, inward = self.edge_data()
            out = np.max(-np.einsum('nmj,mj->nm', flat[:, None, :] - starts[None], inward), axis=1)
        return out.reshape(pts.shape[:-1])

    def contains(self, points, tol: float = 0.0) -> np.ndarray:
        return self.signed_distance(points) <= tol

    def boundary_distance(self, points) -> np.ndarray:
        """Distance exacte au bord ∂Δ."""
        pts = _as_points(points)
        flat = pts.reshape(-1, 2)
        if self.kind == 'disc':
            out = np.abs(np.linalg.norm(flat - np.asarray(self.center), axis=1) - self.radius)
        else:
            starts, ends, _, _, _ = self.edge_data()
            dist, _ = segment_distances(flat, starts, ends)
            out = dist.min(axis=1)
        return out.reshape(pts.shape[:-1])

    def nearest_boundary_point(self, points) -> np.ndarray:
        pts = _as_points(points)
        flat = pts.reshape(-1, 2)
        if self.kind == 'disc':
            c = np.asarray(self.center, dtype=float)
            rel = flat - c
            r = np.linalg.norm(rel, axis=1)
            safe = np.where(r > 0, r, 1.0)
            unit = np.where(r[:, None] > 0, rel / safe[:, None], np.array([1.0, 0.0]))
            out = c + self.radius * unit
        else:
            starts, ends, _, _, _ = self.edge_data()
            dist, s = segment_distances(flat, starts, ends)
            j = np.argmin(dist, axis=1)
            sj = s[np.arange(len(flat)), j]
            out = starts[j] + sj[:, None] * (ends[j] - starts[j])
        return out.reshape(pts.shape)

    def project(self, points) -> np.ndarray:
        """Projection au plus proche sur Δ (identité à l'intérieur)."""
        pts = _as_points(points)
        inside = self.contains(pts)
        return np.where(inside[..., None], pts, self.nearest_boundary_point(pts))

    # === Paramétrage du bord par fraction de longueur d'arc ===

    def boundary_point(self, t) -> np.ndarray:
        t = np.mod(np.asarray(t, dtype=float), 1.0)
        if self.kind == 'disc':
            ang = 2 * math.pi * t
            return np.stack([self.center[0] + self.radius * np.cos(ang),
                             self.center[1] + self.radius * np.sin(ang)], axis=-1)
        starts, _, unit, lengths, _ = self.edge_data()
        cum = np.concatenate([[0.0], np.cumsum(lengths)])
        s = t * cum[-1]
        j = np.clip(np.searchsorted(cum, s, side='right') - 1, 0, len(lengths) - 1)
        return starts[j] + (s - cum[j])[..., None] * unit[j]

    def boundary_parameter(self, points) -> np.ndarray:
        """Fraction de longueur d'arc du point du bord le plus proche."""
        pts = _as_points(points)
        flat = pts.reshape(-1, 2)
        if self.kind == 'disc':
            rel = flat - np.asarray(self.center)
            out = np.mod(np.arctan2(rel[:, 1], rel[:, 0]) / (2 * math.pi), 1.0)
        else:
            starts, ends, _, lengths, _ = self.edge_data()
            cum = np.concatenate([[0.0], np.cumsum(lengths)])
            dist, s = segment_distances(flat, starts, ends)
            j = np.argmin(dist, axis=1)
            out = np.mod((cum[j] + s[np.arange(len(flat)), j] * lengths[j]) / cum[-1], 1.0)
        return out.reshape(pts.shape[:-1])

    def boundary_tangent(self, t: float, side: str = 'after') -> np.ndarray:
        """Tangente unitaire (sens trigonométrique) juste après ou juste avant le paramètre t."""
        t = float(np.mod(t, 1.0))
        if self.kind == 'disc':
            ang = 2 * math.pi * t
            return np.array([-math.sin(ang), math.cos(ang)])
        _, _, unit, lengths, _ = self.edge_data()
        cum = np.concatenate([[0.0], np.cumsum(lengths)])
        s = t * cum[-1]
        nudge = 1e-9 * cum[-1]
        s = np.mod(s + nudge if side == 'after' else s - nudge, cum[-1])
        j = int(np.clip(np.searchsorted(cum, s, side='right') - 1, 0, len(lengths) - 1))
        return unit[j].copy()

    def ray_exit(self, origin, directions) -> np.ndarray:
        """Distance depuis un point intérieur jusqu'au bord le long de directions unitaires."""
        o = np.asarray(origin, dtype=float)
        dirs = _as_points(directions)
        flat = dirs.reshape(-1, 2)
        if self.kind == 'disc':
            w = o - np.asarray(self.center)
            b = flat @ w
            c = w @ w - self.radius ** 2
            out = -b + np.sqrt(np.maximum(b * b - c, 0.0))
        else:
            starts, _, _, _, inward = self.edge_data()
            outward = -inward
            offset = np.einsum('ij,ij->i', outward, starts) - outward @ o
            speed = flat @ outward.T
            with np.errstate(divide='ignore', invalid='ignore'):
                t = np.where(speed > 1e-15, offset[None, :] / speed, np.inf)
            out = t.min(axis=1)
        return out.reshape(dirs.shape[:-1])

    # === Sérialisation ===

    def to_dict(self) -> Dict:
        if self.kind == 'disc':
            return {'kind': 'disc', 'center': list(self.center), 'radius': self.radius,
                    'declared_area': self.declared_area, 'normalization': self.normalization}
        return {'kind': 'polygon', 'vertices': [list(v) for v in self.vertices],
                'declared_area': self.declared_area, 'normalization': self.normalization}


# === Constructeurs ===

def make_disc(center: Sequence[float] = (0.0, 0.0), radius: float = 1.0,
              normalization: str = 'custom') -> ConvexDomain:
    if not radius > 0:
        raise GeometryError(f"disc radius must be positive, got {radius}")
    return ConvexDomain(kind='disc', center=(float(center[0]), float(center[1])), radius=float(radius),
                        declared_area=math.pi * float(radius) ** 2, normalization=normalization)


def make_unit_disc(normalization: str = 'pb') -> ConvexDomain:
    """
    Disque unité centré à l'origine.

    Args:
        normalization: 'pb' pour l'aire 1 (rayon 1/√π), 'ball' pour le rayon 1

    Returns:
        ConvexDomain: le disque
    """
    if normalization == 'pb':
        return make_disc((0.0, 0.0), 1.0 / math.sqrt(math.pi), normalization='pb')
    if normalization == 'ball':
        return make_disc((0.0, 0.0), 1.0, normalization='ball')
    raise GeometryError(f"unknown normalization '{normalization}'")


def make_polygon(vertices: Sequence[Sequence[float]], normalization: str = 'custom') -> ConvexDomain:
    verts = tuple((float(v[0]), float(v[1])) for v in vertices)
    arr = np.asarray(verts)
    x, y = arr[:, 0], arr[:, 1]
    area = 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))
    return ConvexDomain(kind='polygon', vertices=verts, declared_area=area, normalization=normalization)


def make_square(side: float = 1.0, origin: Sequence[float] = (0.0, 0.0)) -> ConvexDomain:
    """Carré aligné sur les axes, sommets dans le sens trigonométrique depuis l'origine."""
    if not side > 0:
        raise GeometryError(f"square side must be positive, got {side}")
    x0, y0 = float(origin[0]), float(origin[1])
    s = float(side)
    normalization = 'pb' if abs(s - 1.0) < 1e-15 else 'custom'
    return make_polygon([(x0, y0), (x0 + s, y0), (x0 + s, y0 + s), (x0, y0 + s)], normalization)


def make_right_triangle() -> ConvexDomain:
    """Triangle {(0,0),(1,0),(0,1)} d'aire 1/2 (forme bornée de pb3)."""
    return make_polygon([(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)])


def make_regular_polygon(n: int, area: float = 1.0, center: Sequence[float] = (0.0, 0.0)) -> ConvexDomain:
    if n < 3:
        raise GeometryError("a polygon needs at least three vertices")
    r = math.sqrt(2 * area / (n * math.sin(2 * math.pi / n)))
    verts = [(center[0] + r * math.cos(2 * math.pi * k / n), center[1] + r * math.sin(2 * math.pi * k / n))
             for k in range(n)]
    return make_polygon(verts)


def domain_from_dict(spec: Dict) -> ConvexDomain:
    kind = spec.get('kind')
    if kind == 'square':
        return make_square(spec.get('side', 1.0), spec.get('origin', (0.0, 0.0)))
    if kind == 'disc':
        if 'radius' in spec:
            return make_disc(spec.get('center', (0.0, 0.0)), spec['radius'])
        return make_unit_disc(spec.get('normalization', 'pb'))
    if kind == 'triangle':
        return make_right_triangle()
    if kind == 'polygon':
        return make_polygon(spec['vertices'])
    raise GeometryError(f"unknown domain kind '{kind}'")
