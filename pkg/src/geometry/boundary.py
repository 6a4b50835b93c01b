import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Set, Tuple

import numpy as np

from ..config import Config
from ..errors import GeometryError
from .domains import ConvexDomain, make_square, segment_distances, _as_points


@dataclass(frozen=True)
class MarkedBoundary:
    """
    Donnée 𝔇 = (Δ, p_1..p_N): points marqués sur ∂Δ dans l'ordre trigonométrique.

    L'arc γ_k (indice 0) va de p_k à p_{k+1} dans le sens trigonométrique, indices modulo N.
    """
    domain: ConvexDomain
    points: Tuple[Tuple[float, float], ...]
    _cache: Dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        n = len(pts)
        if n < 2:
            raise GeometryError("a marked boundary needs at least two points")
        tol = Config.MARKED_POINT_TOL * max(1.0, self.domain.scale)
        off = self.domain.boundary_distance(pts)
        if np.any(off > tol):
            bad = int(np.argmax(off))
            raise GeometryError(f"marked point p{bad + 1} is {off[bad]:.3g} away from the boundary")
        for i in range(n):
            for j in range(i + 1, n):
                if np.linalg.norm(pts[i] - pts[j]) <= Config.BOUNDARY_TOL:
                    raise GeometryError(f"marked points p{i + 1} and p{j + 1} coincide")
        t = self.domain.boundary_parameter(pts)
        descents = int(np.sum(np.roll(t, -1) < t))
        if descents != 1:
            raise GeometryError("marked points are not in counterclockwise cyclic order")
        self._cache['params'] = t
        self._cache['array'] = pts

    @classmethod
    def from_fractions(cls, domain: ConvexDomain, fractions: Sequence[float]) -> 'MarkedBoundary':
        pts = domain.boundary_point(np.asarray(fractions, dtype=float))
        return cls(domain, tuple((float(p[0]), float(p[1])) for p in np.atleast_2d(pts)))

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def point_array(self) -> np.ndarray:
        return self._cache['array']

    @property
    def params(self) -> np.ndarray:
        return self._cache['params']

    def arc_span(self, k: int) -> Tuple[float, float]:
        """(paramètre de début, longueur en fraction) de l'arc γ_k."""
        t = self.params
        start = t[k % self.n]
        end = t[(k + 1) % self.n]
        return float(start), float(np.mod(end - start, 1.0))

    def arc_polyline(self, k: int) -> np.ndarray:
        """Polyligne exacte de l'arc γ_k (domaines polygonaux)."""
        key = ('poly', k % self.n)
        if key not in self._cache:
            if self.domain.kind != 'polygon':
                raise GeometryError("arc polylines exist only for polygons")
            start, span = self.arc_span(k)
            verts = self.domain.vertex_array
            vt = self.domain.boundary_parameter(verts)
            rel = np.mod(vt - start, 1.0)
            inner = [(r, v) for r, v in zip(rel, verts) if 1e-14 < r < span - 1e-14]
            inner.sort(key=lambda item: item[0])
            pts = [self.point_array[k % self.n]] + [v for _, v in inner] + [self.point_array[(k + 1) % self.n]]
            self._cache[key] = np.asarray(pts)
        return self._cache[key]

    def _disc_arc_inside(self, flat: np.ndarray, k: int) -> np.ndarray:
        c = np.asarray(self.domain.center)
        rel = flat - c
        theta = np.mod(np.arctan2(rel[:, 1], rel[:, 0]) / (2 * math.pi), 1.0)
        start, span = self.arc_span(k)
        return np.mod(theta - start, 1.0) <= span

    def arc_distance(self, points, k: int) -> np.ndarray:
        """Distance exacte des points à l'arc γ_k."""
        pts = _as_points(points)
        flat = pts.reshape(-1, 2)
        a = self.point_array[k % self.n]
        b = self.point_array[(k + 1) % self.n]
        if self.domain.kind == 'disc':
            c = np.asarray(self.domain.center)
            radial = np.abs(np.linalg.norm(flat - c, axis=1) - self.domain.radius)
            ends = np.minimum(np.linalg.norm(flat - a, axis=1), np.linalg.norm(flat - b, axis=1))
            out = np.where(self._disc_arc_inside(flat, k), radial, ends)
        else:
            poly = self.arc_polyline(k)
            dist, _ = segment_distances(flat, poly[:-1], poly[1:])
            out = dist.min(axis=1)
        return out.reshape(pts.shape[:-1])

    def arc_project(self, points, k: int) -> np.ndarray:
        """Point le plus proche de γ_k."""
        pts = _as_points(points)
        flat = pts.reshape(-1, 2)
        a = self.point_array[k % self.n]
        b = self.point_array[(k + 1) % self.n]
        if self.domain.kind == 'disc':
            c = np.asarray(self.domain.center)
            rel = flat - c
            r = np.linalg.norm(rel, axis=1)
            on_circle = c + self.domain.radius * rel / np.where(r > 0, r, 1.0)[:, None]
            nearer_a = np.linalg.norm(flat - a, axis=1) <= np.linalg.norm(flat - b, axis=1)
            ends = np.where(nearer_a[:, None], a, b)
            inside = self._disc_arc_inside(flat, k) & (r > 0)
            out = np.where(inside[:, None], on_circle, ends)
        else:
            poly = self.arc_polyline(k)
            starts, stops = poly[:-1], poly[1:]
            dist, s = segment_distances(flat, starts, stops)
            j = np.argmin(dist, axis=1)
            sj = s[np.arange(len(flat)), j]
            out = starts[j] + sj[:, None] * (stops[j] - starts[j])
        return out.reshape(pts.shape)

    def arc_membership(self, points, tol: float = None) -> np.ndarray:
        """Matrice (..., N) booléenne: le point est à moins de tol de γ_k."""
        tol = Config.BOUNDARY_TOL if tol is None else tol
        pts = _as_points(points)
        return np.stack([self.arc_distance(pts, k) <= tol for k in range(self.n)], axis=-1)

    def arc_index(self, q, tol: float = None) -> Set[int]:
        """
        Indices (base 0) des arcs contenant q à tol près.

        Args:
            q: Point du plan
            tol: Tolérance en unités de longueur

        Returns:
            Set[int]: indices des arcs; un point marqué renvoie ses deux arcs
        """
        tol = Config.BOUNDARY_TOL if tol is None else tol
        q = np.asarray(q, dtype=float).reshape(1, 2)
        off = float(self.domain.boundary_distance(q)[0])
        if off > tol:
            raise GeometryError(f"point {q[0].tolist()} is {off:.3g} away from the boundary (tol {tol})")
        member = self.arc_membership(q, tol)[0]
        return {int(k) for k in np.flatnonzero(member)}

    # === Transformations de la donnée ===

    def forget_last(self) -> 'MarkedBoundary':
        """Oublie p_N: les arcs γ_{N-1} et γ_N fusionnent."""
        if self.n < 3:
            raise GeometryError("cannot forget a point of a datum with fewer than three points")
        return MarkedBoundary(self.domain, self.points[:-1])

    def with_point(self, point, position: int) -> 'MarkedBoundary':
        pts = list(self.points)
        pts.insert(position, (float(point[0]), float(point[1])))
        return MarkedBoundary(self.domain, tuple(pts))

    def to_dict(self) -> Dict:
        return {'domain': self.domain.to_dict(), 'points': [list(p) for p in self.points],
                'fractions': [float(t) for t in self.params]}


def standard_square_datum(n: int, side: float = 1.0) -> MarkedBoundary:
    """Carré unité avec N points marqués à fractions égales depuis (0,0)."""
    square = make_square(side)
    return MarkedBoundary.from_fractions(square, [k / n for k in range(n)])


def corner_datum(n: int, eps: float, delta: float, side: float = 1.0) -> MarkedBoundary:
    """
    Donnée carrée dont le dernier arc entoure le coin nord-est.

    p_1 est sur l'arête haute et p_N sur l'arête droite, tous deux à distance a du coin,
    avec a = b + δ/2 et b = 0.8·côté/√(1 + 2/ε): le disque effondré de rayon b et sa zone de
    raccord (rayon b·√(1 + 2/ε)) restent dans le carré. Les autres points sont répartis sur
    le chemin en L qui longe les arêtes gauche et basse.

    Args:
        n: Nombre de points marqués (≥ 3)
        eps: Budget ε de l'effondrement de sommet
        delta: Rayon δ de la poussée
        side: Côté du carré

    Returns:
        MarkedBoundary: la donnée
    """
    if n < 3:
        raise GeometryError("corner datum needs at least three marked points")
    if not 0 < eps < 0.5:
        raise GeometryError(f"corner datum needs eps in (0, 1/2), got {eps}")
    a = 0.8 * side / math.sqrt(1.0 + 2.0 / eps) + 0.5 * delta
    if a >= side / 2:
        raise GeometryError(f"corner leg {a:.3g} too long for eps={eps}, delta={delta}")
    p_first = (side - a, side)
    p_last = (side, side - a)
    # chemin en L: de (0, c) vers (0, 0) puis vers (c, 0)
    c = side - a
    middle = []
    m = n - 2
    for j in range(1, m + 1):
        s = 2 * c * j / (m + 1)
        middle.append((0.0, c - s) if s <= c else (s - c, 0.0))
    square = make_square(side)
    return MarkedBoundary(square, tuple([p_first] + middle + [p_last]))
