import logging
import math
from typing import Dict, List, Sequence

import numpy as np

from ..config import Config
from ..errors import MapConstructionError
from ..geometry import ConvexDomain, make_disc
from .maps import PlanarMap, compose, homothety
from .profiles import SmoothStep

logger = logging.getLogger('pseudoretract')


def _radial(points: np.ndarray, center: np.ndarray, s: np.ndarray, profile: SmoothStep) -> np.ndarray:
    """z -> c + (z - c)·√(ψ(s)/s), s étant le carré du rayon normalisé."""
    rel = points - center
    positive = s > 0
    safe = np.where(positive, s, 1.0)
    scale = np.where(positive, np.sqrt(np.maximum(profile(safe), 0.0) / safe), 1.0)
    out = center + rel * scale[:, None]
    out[scale == 1.0] = points[scale == 1.0]
    return out


def pseudoretract_smooth(domain: ConvexDomain, eps: float,
                         identity_fraction: float = None) -> PlanarMap:
    """
    ε-pseudorétraction radiale sur un disque.

    Args:
        domain: Disque cible
        eps: Budget ε dans (0, 1)
        identity_fraction: Rayon relatif de la zone identité (1/2 par défaut)

    Returns:
        PlanarMap: application sur Δ, bord fixé, extérieur envoyé sur ∂Δ, borne 1+ε
    """
    if domain.kind != 'disc':
        raise MapConstructionError("smooth pseudoretracts are implemented for discs only")
    if not 0 < eps < 1:
        raise MapConstructionError(f"eps must lie in (0, 1), got {eps}")
    f = Config.IDENTITY_FRACTION if identity_fraction is None else float(identity_fraction)
    if not 0 < f < 1:
        raise MapConstructionError(f"identity fraction must lie in (0, 1), got {f}")
    c = np.asarray(domain.center, dtype=float)
    R = domain.radius
    profile = SmoothStep.ceiling(1.0, 1.0 - f * f, eps)

    def evaluate(z):
        rel = z - c
        s = np.einsum('ij,ij->i', rel, rel) / (R * R)
        return _radial(z, c, s, profile)

    return PlanarMap(evaluate, 1.0 + eps, target=domain,
                     provenance={'kind': 'pseudoretract_smooth', 'domain': domain.to_dict(), 'eps': float(eps),
                                 'identity_fraction': f},
                     details={'identity_radius': f * R, 'profile': profile.to_dict()})


class _EdgeMap:
    """Application T_k associée à l'arête k (trois cas selon les arêtes voisines)."""

    def __init__(self, case: int, origin: np.ndarray, normal: np.ndarray, profile: SmoothStep,
                 height: float = 0.0, basis_inv: np.ndarray = None, along: np.ndarray = None,
                 sweep: np.ndarray = None):
        self.case = case
        self.origin = origin
        self.normal = normal
        self.profile = profile
        self.height = height
        self.basis_inv = basis_inv
        self.along = along
        self.sweep = sweep

    def margin(self, z: np.ndarray) -> np.ndarray:
        """Marge par rapport au demi-plan ouvert de définition (cas 3 uniquement)."""
        if self.case != 3:
            return np.full(len(z), np.inf)
        return (z - self.origin) @ self.normal

    def __call__(self, z: np.ndarray) -> np.ndarray:
        if self.case == 1:
            coords = (z - self.origin) @ self.basis_inv.T
            alpha, beta = coords[:, 0], coords[:, 1]
            return self.origin + alpha[:, None] * self.along + self.profile(beta)[:, None] * self.sweep
        rel = z - self.origin
        lift = rel @ self.normal
        if self.case == 2:
            u = np.where(lift < 0, -lift / self.height, 0.0)
        else:
            u = np.where(lift > 0, lift / self.height, np.inf)
        out = _radial(z, self.origin, np.where(np.isfinite(u), u * u, 0.0), self.profile)
        return np.where(np.isfinite(u)[:, None], out, z)

    def describe(self) -> Dict:
        return {'case': self.case, 'origin': self.origin.tolist(), 'profile': self.profile.to_dict()}


def _line_intersection(p0, d0, p1, d1) -> np.ndarray:
    M = np.column_stack([d0, -d1])
    ab = np.linalg.solve(M, p1 - p0)
    return p0 + ab[0] * d0


def _edge_maps(domain: ConvexDomain, eps: float, band: float, radial_band: float) -> List[_EdgeMap]:
    starts, _, unit, lengths, inward = domain.edge_data()
    verts = domain.vertex_array
    n = len(starts)
    maps = []
    for k in range(n):
        prev, nxt = (k - 1) % n, (k + 1) % n
        cross = unit[prev, 0] * unit[nxt, 1] - unit[prev, 1] * unit[nxt, 0]
        v = starts[k]
        if abs(cross) < 1e-12:
            # === CAS 1: arêtes voisines parallèles ===
            sweep = unit[nxt]
            B = np.column_stack([unit[k], sweep])
            profile = SmoothStep.floor(0.0, band * lengths[nxt], eps)
            maps.append(_EdgeMap(1, v, inward[k], profile, basis_inv=np.linalg.inv(B),
                                 along=unit[k], sweep=sweep))
            continue
        p = _line_intersection(starts[prev], unit[prev], starts[nxt], unit[nxt])
        h_p = float((p - v) @ inward[k])
        if h_p > 0:
            # === CAS 2: point d'intersection du côté de Δ ===
            profile = SmoothStep.ceiling(1.0, 1.0 - (1.0 - radial_band) ** 2, eps)
            maps.append(_EdgeMap(2, p, inward[k], profile, height=h_p))
        else:
            # === CAS 3: point d'intersection au-delà de l'arête ===
            others = [j for j in range(n) if j not in (k, (k + 1) % n)]
            u_far = min(float((verts[j] - p) @ inward[k]) / -h_p for j in others)
            kappa = min(radial_band, 0.5 * (u_far - 1.0))
            if kappa <= 0:
                raise MapConstructionError(f"edge {k}: no room for the outer band (u_far={u_far:.4g})")
            profile = SmoothStep.floor(1.0, (1.0 + kappa) ** 2 - 1.0, eps)
            maps.append(_EdgeMap(3, p, inward[k], profile, height=-h_p))
    return maps


def pseudoretract_polygon(domain: ConvexDomain, eps: float, outer_scale: float = None,
                          band: float = None, radial_band: float = None) -> PlanarMap:
    """
    ε-pseudorétraction sur un polygone convexe: T = T_N ∘ … ∘ T_1 ∘ S.

    Chaque T_k aplatit le demi-plan extérieur de l'arête k selon le cas des arêtes voisines
    (parallèles, concourantes du côté de Δ, concourantes au-delà). S est une pseudorétraction
    lisse sur un disque centré au centroïde, assez petit pour rester dans tous les demi-plans
    ouverts des cas 3. Borne déclarée (1+ε)^{N+1}.

    Args:
        domain: Polygone convexe cible
        eps: Budget ε par facteur, dans (0, 1)
        outer_scale: Rayon de S relatif au rayon circonscrit
        band: Largeur des bandes du cas 1 (fraction de la longueur de l'arête voisine)
        radial_band: Bande radiale des cas 2 et 3

    Returns:
        PlanarMap: la pseudorétraction, avec details['vertex_sector_radius']
    """
    if domain.kind != 'polygon':
        raise MapConstructionError("polygon pseudoretract needs a polygon domain")
    if not 0 < eps < 1:
        raise MapConstructionError(f"eps must lie in (0, 1), got {eps}")
    outer_scale = Config.OUTER_RETRACT_SCALE if outer_scale is None else outer_scale
    band = Config.EDGE_BAND_FRACTION if band is None else band
    radial_band = Config.RADIAL_BAND if radial_band is None else radial_band

    edge_maps = _edge_maps(domain, eps, band, radial_band)
    g = domain.centroid
    r_circ = domain.circumradius(g)
    r_outer = outer_scale * r_circ
    for em in edge_maps:
        if em.case == 3:
            r_outer = min(r_outer, 0.5 * (r_circ + float((g - em.origin) @ em.normal)))
    if r_outer <= r_circ * (1 + 1e-9):
        raise MapConstructionError("eps too large for the geometry: no outer disc fits all half-planes")
    r_identity = r_circ + 0.5 * (r_outer - r_circ)
    outer = pseudoretract_smooth(make_disc(g, r_outer), eps, identity_fraction=r_identity / r_outer)

    def chain(z, track=False):
        out = outer(z)
        worst = np.inf
        for em in edge_maps:
            if track and em.case == 3:
                worst = min(worst, float(np.min(em.margin(out))))
            out = em(out)
        return (out, worst) if track else out

    n = len(edge_maps)
    _, _, _, lengths, _ = domain.edge_data()
    sector = 0.5 * min(r_identity - r_circ, band * float(np.min(lengths)))
    result = PlanarMap(chain, (1.0 + eps) ** (n + 1), target=domain,
                       provenance={'kind': 'pseudoretract_polygon', 'domain': domain.to_dict(), 'eps': float(eps),
                                   'outer_scale': float(outer_scale), 'band': float(band),
                                   'radial_band': float(radial_band)},
                       details={'outer_radius': r_outer, 'identity_radius': r_identity,
                                'vertex_sector_radius': sector,
                                'cases': [em.case for em in edge_maps],
                                'edges': [em.describe() for em in edge_maps]})
    _check_polygon_retract(domain, chain)
    logger.debug(f"Polygon pseudoretract built: cases={[em.case for em in edge_maps]}, outer radius {r_outer:.4g}")
    return result


def _check_polygon_retract(domain: ConvexDomain, chain):
    """Vérifications constructives par échantillonnage; lève si la géométrie est hors de portée."""
    tol = Config.BOUNDARY_TOL
    g = domain.centroid
    r = domain.circumradius(g)
    t = np.linspace(0.0, 1.0, 400, endpoint=False)
    boundary = domain.boundary_point(t)
    xs = np.linspace(g[0] - 3 * r, g[0] + 3 * r, 61)
    X, Y = np.meshgrid(xs, xs, indexing='ij')
    cloud = np.stack([X.ravel(), Y.ravel()], axis=1)
    out, worst = chain(np.concatenate([boundary, cloud]), track=True)
    if worst <= 0:
        raise MapConstructionError("eps too large for the geometry: an intermediate image leaves a half-plane")
    img_b, img_c = out[:len(boundary)], out[len(boundary):]
    if np.max(domain.boundary_distance(img_b)) > tol:
        raise MapConstructionError("eps too large for the geometry: boundary is not preserved")
    if np.any(~domain.contains(img_c, tol)):
        raise MapConstructionError("eps too large for the geometry: an image leaves the polygon")
    exterior = ~domain.contains(cloud, tol)
    if np.any(domain.boundary_distance(img_c[exterior]) > tol):
        raise MapConstructionError("eps too large for the geometry: exterior is not collapsed to the boundary")


def per_factor_eps(eps: float, n_factors: int) -> float:
    """ε' tel que (1+ε')^n = 1+ε."""
    return (1.0 + eps) ** (1.0 / n_factors) - 1.0


def pseudoretract(domain: ConvexDomain, eps: float, overall: bool = False) -> PlanarMap:
    """Pseudorétraction sur un disque ou un polygone; overall=True répartit ε sur les facteurs."""
    if domain.kind == 'disc':
        return pseudoretract_smooth(domain, eps)
    if overall:
        eps = per_factor_eps(eps, domain.n_edges + 1)
    return pseudoretract_polygon(domain, eps)


def power_map(k: int, eps: float) -> PlanarMap:
    """
    R_k(re^{iθ}) = re^{ikθ}, suivi de l'effondrement du disque d'aire ε puis de ℋ_{1/(1-ε)}.

    Le cercle unité est envoyé sur lui-même avec un revêtement d'ordre k. Borne k(1+ε)/(1-ε).
    """
    if int(k) != k or k < 1:
        raise MapConstructionError(f"power map needs a positive integer k, got {k}")
    if not 0 < eps < 0.5:
        raise MapConstructionError(f"eps must lie in (0, 1/2), got {eps}")
    k = int(k)
    profile = SmoothStep.collapse(eps)
    rescale = 1.0 / math.sqrt(1.0 - eps)

    def evaluate(z):
        r2 = np.einsum('ij,ij->i', z, z)
        theta = np.arctan2(z[:, 1], z[:, 0]) * k
        radius = np.sqrt(np.maximum(profile(r2), 0.0)) * rescale
        return np.stack([radius * np.cos(theta), radius * np.sin(theta)], axis=1)

    return PlanarMap(evaluate, k * (1.0 + eps) / (1.0 - eps),
                     provenance={'kind': 'power_map', 'k': k, 'eps': float(eps)},
                     details={'profile': profile.to_dict()})


def collapse_corner(corner: Sequence[float], radius: float, eps: float) -> PlanarMap:
    """
    Effondrement radial autour d'un sommet: le disque de rayon radius va sur le sommet.

    En polaire autour du sommet, (r, θ) ↦ (√ψ(r²), θ) avec ψ = SmoothStep.absorb; le jacobien
    vaut ψ' ≤ 1+ε, ψ(σ) ≤ σ garde les rayons issus du sommet et l'application est l'identité
    hors du disque de rayon radius·√(1 + 2/ε).

    Args:
        corner: Sommet v
        radius: Rayon b du disque absorbé
        eps: Budget ε dans (0, 1/2)

    Returns:
        PlanarMap: borne déclarée 1+ε
    """
    if not radius > 0:
        raise MapConstructionError(f"collapse radius must be positive, got {radius}")
    v = np.asarray(corner, dtype=float)
    profile = SmoothStep.absorb(radius * radius, eps)

    def evaluate(z):
        rel = z - v
        return _radial(z, v, np.einsum('ij,ij->i', rel, rel), profile)

    return PlanarMap(evaluate, 1.0 + eps,
                     provenance={'kind': 'collapse_corner', 'corner': v.tolist(), 'radius': float(radius),
                                 'eps': float(eps)},
                     details={'outer_radius': math.sqrt(profile.end), 'profile': profile.to_dict()})


def retract_onto_shrunken_ball(center, radius: float, eps: float) -> PlanarMap:
    """ℋ_{1/(1-ε)} ∘ T, T pseudorétraction sur la boule d'aire relative 1-ε: identité sur le cercle."""
    shrunk = make_disc(center, radius * math.sqrt(1.0 - eps))
    result = compose(homothety(1.0 / (1.0 - eps), center), pseudoretract_smooth(shrunk, eps))
    result.target = make_disc(center, radius)
    return result
