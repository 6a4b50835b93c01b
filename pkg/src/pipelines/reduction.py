"""Réduction Pb_N → Pb_{N−1}: oubli d'un point, poussée par fonctions plateau, effondrement de sommet."""
import logging
import math
from typing import Dict, List, Tuple

import numpy as np

from ..config import Config
from ..errors import GeometryError, SectorPositioningError, SeparationError, VerificationError
from ..fields import VectorMapField, bracket_values, poisson_bracket, postcompose, sup_norm
from ..geometry import MarkedBoundary, corner_datum
from ..planar_maps import PlanarMap, collapse_corner, jacobian_determinants
from ..admissible import check_admissible, cutoff
from ..sets import SetConfig, distance_field, merge_last_two, neighborhood
from .certificate import PipelineCertificate, default_allowance

logger = logging.getLogger('pipelines')



def reduction_data(n: int, eps: float, delta: float, side: float = 1.0) -> Tuple[MarkedBoundary, MarkedBoundary]:
    """
    Données du test de réduction: (𝔇_N, 𝔇_{N−1}).

    𝔇_{N−1} est la donnée en coin; 𝔇_N lui ajoute le coin nord-est comme N-ième point,
    de sorte qu'oublier ce point redonne exactement 𝔇_{N−1}.
    """
    merged = corner_datum(n - 1, eps, delta, side)
    corner = (side, side)
    return merged.with_point(corner, merged.n), merged


# === Oubli d'un point ===

def forget_point(phi: VectorMapField, config: SetConfig, mb: MarkedBoundary) -> Tuple[VectorMapField, PipelineCertificate]:
    """Φ admissible pour la N-configuration l'est pour la configuration fusionnée: même champ."""
    merged = merge_last_two(config)
    mb_merged = mb.forget_last()
    before = check_admissible(phi, config, mb)
    after = check_admissible(phi, merged, mb_merged)
    if before.all_ok and not after.all_ok:
        logger.error(f"forget_point re-verification failed: {after.to_dict()}")
        raise VerificationError("an admissible map failed re-verification after forgetting a point")
    value = sup_norm(poisson_bracket(phi))
    cert = PipelineCertificate('forget_point', value, value, 1.0, 0.0, 0.0,
                               before.to_dict(), after.to_dict(), {'n': config.n})
    return phi, cert


# === Poussée ===

def _vertex_clearance(domain, p: np.ndarray) -> float:
    if domain.kind != 'polygon':
        raise GeometryError("push_away needs a polygonal domain (tangent pushes must stay on straight edges)")
    return float(np.min(np.linalg.norm(domain.vertex_array - p, axis=1)))


def _cutoff_around(seed: np.ndarray, blockers: List[Tuple[str, np.ndarray]], grid, name: str):
    """Fonction plateau ρ: 1 près de seed, 0 sur les bloqueurs, rayons s/3 et 2s/3."""
    if not seed.any():
        return np.zeros(grid.shape), math.inf
    d = distance_field(seed, grid)
    separation, blocking = math.inf, None
    for label, mask in blockers:
        if mask.any():
            s = float(np.min(d[mask]))
            if s < separation:
                separation, blocking = s, label
    if separation < 3 * grid.h:
        logger.error(f"Separation {separation:.4g} between {name} and {blocking} is below 3h")
        raise SeparationError((name, blocking),
                              f"{name} and {blocking} are {separation:.4g} apart; need at least 3h = {3 * grid.h:.4g}")
    if math.isinf(separation):
        return np.ones(grid.shape), separation
    return cutoff(d, separation / 3, 2 * separation / 3), separation


def push_away(phi: VectorMapField, config: SetConfig, mb: MarkedBoundary, delta: float,
              eps0: float = None) -> Tuple[VectorMapField, PipelineCertificate]:
    """
    Éloigne les images gênantes des extrémités de l'arc fusionné.

    Φ̃ = Φ + δρ₁τ₁ + δρ₂τ₂, τ₁ tangente en p₁ et τ₂ tangente en p_{N−1}, toutes deux dirigées
    vers l'intérieur de l'arc fusionné. ρ₁ vaut 1 sur V₁ = U_{N−1} ∩ Φ⁻¹(B_{ε₀/2}(p₁)),
    ρ₂ vaut 1 sur V₂ = U_N ∩ Φ⁻¹(B_{ε₀/2}(p_{N−1})); les deux s'annulent sur U_1..U_{N−2}
    et hors des préimages des boules B_{ε₀}.

    Args:
        phi: Application admissible pour la configuration fusionnée
        config: Configuration d'origine à N ensembles (X_{N−1} et X_N séparés)
        mb: Donnée fusionnée à N−1 points
        delta: Amplitude δ de la poussée
        eps0: Rayon ε₀ (Config.EPS0 par défaut, réduit à la géométrie de la donnée)

    Returns:
        Tuple: (Φ̃, certificat)
    """
    grid = phi.grid
    n = config.n
    if mb.n != n - 1:
        raise GeometryError(f"push_away needs the merged datum with {n - 1} points, got {mb.n}")
    merged = merge_last_two(config)
    domain = mb.domain
    p1 = mb.point_array[0]
    pm = mb.point_array[-1]
    eps0 = Config.EPS0 if eps0 is None else float(eps0)
    room = min(_vertex_clearance(domain, p1), _vertex_clearance(domain, pm))
    eps0_eff = min(eps0, 0.45 * float(np.linalg.norm(p1 - pm)), 0.9 * (room - delta))
    if not 0 < delta < eps0_eff / 2:
        raise SeparationError(('delta', 'eps0'),
                              f"delta={delta} must lie in (0, eps0/2) with effective eps0={eps0_eff:.4g}")

    t1 = -domain.boundary_tangent(mb.params[0], side='before')
    t2 = domain.boundary_tangent(mb.params[-1], side='after')

    radius = Config.ADMISSIBILITY_RADIUS_CELLS * grid.h
    U = [neighborhood(m, radius, grid) for m in config.masks]
    img = phi.values
    d1 = np.linalg.norm(img - p1, axis=-1)
    d2 = np.linalg.norm(img - pm, axis=-1)
    V1 = U[n - 2] & (d1 < eps0_eff / 2)
    V2 = U[n - 1] & (d2 < eps0_eff / 2)
    fixed = [(config.labels[k], U[k]) for k in range(n - 2)]
    rho1, s1 = _cutoff_around(V1, fixed + [('far from p1', d1 >= eps0_eff)], grid, 'V1')
    rho2, s2 = _cutoff_around(V2, fixed + [('far from p_last', d2 >= eps0_eff)], grid, 'V2')

    shift = delta * (rho1[..., None] * t1 + rho2[..., None] * t2)
    out = phi.with_values(img + shift)

    f, g = img[..., 0], img[..., 1]
    b1 = t1[0] * bracket_values(rho1, g, grid) + t1[1] * bracket_values(f, rho1, grid)
    b2 = t2[0] * bracket_values(rho2, g, grid) + t2[1] * bracket_values(f, rho2, grid)
    b12 = bracket_values(rho1, rho2, grid)
    c1, c2 = float(np.max(np.abs(b1))), float(np.max(np.abs(b2)))
    cross = abs(t1[0] * t2[1] - t1[1] * t2[0]) * float(np.max(np.abs(b12)))
    additive = delta * (c1 + c2) + delta ** 2 * cross

    input_sup = sup_norm(poisson_bracket(phi))
    output_sup = sup_norm(poisson_bracket(out))
    before = check_admissible(phi, merged, mb)
    after = check_admissible(out, merged, mb)
    avoid1 = float(np.min(np.linalg.norm(out.values[U[n - 2]] - p1, axis=-1)))
    avoid2 = float(np.min(np.linalg.norm(out.values[U[n - 1]] - pm, axis=-1)))
    untouched = all(np.array_equal(out.values[U[k]], img[U[k]]) for k in range(n - 2))
    cert = PipelineCertificate(
        'push_away', input_sup, output_sup, 1.0, additive, 1e-9 * max(1.0, input_sup),
        before.to_dict(), after.to_dict(),
        {'delta': delta, 'eps0': eps0, 'eps0_effective': eps0_eff},
        {'C_rho': c1 + c2, 'C_rho1': c1, 'C_rho2': c2, 'cross_term': cross,
         'separation': [s1, s2], 'tangents': [t1.tolist(), t2.tolist()],
         'V_sizes': [int(V1.sum()), int(V2.sum())],
         'min_distance_to_p1': avoid1, 'min_distance_to_p_last': avoid2,
         'avoids_endpoints': avoid1 >= delta * (1 - 1e-9) and avoid2 >= delta * (1 - 1e-9),
         'fixed_sets_unchanged': untouched})
    logger.info(f"push_away: sup {input_sup:.6g} -> {output_sup:.6g} (claimed ≤ {cert.claimed_bound:.6g})")
    return out, cert


# === Effondrement de sommet ===

def _square_frame(domain):
    if domain.kind != 'polygon' or domain.n_edges != 4:
        raise GeometryError("vertex collapse needs a square domain")
    v = domain.vertex_array
    lo, hi = v.min(axis=0), v.max(axis=0)
    side = hi[0] - lo[0]
    if abs((hi[1] - lo[1]) - side) > 1e-12 * side:
        raise GeometryError("vertex collapse needs a square domain")
    for corner in v:
        if not (np.isclose(corner[0], lo[0]) or np.isclose(corner[0], hi[0])) or \
                not (np.isclose(corner[1], lo[1]) or np.isclose(corner[1], hi[1])):
            raise GeometryError("vertex collapse needs an axis-aligned square")
    return lo, side


def collapse_datum(mb: MarkedBoundary, eps: float, delta: float) -> Tuple[PlanarMap, MarkedBoundary, Dict]:
    """
    Effondrement radial Ψ autour du coin v de l'arc fusionné et nouvelle donnée à N points.

    Ψ envoie le disque B_b(v) sur v et vaut l'identité hors de B_{b√(1+2/ε)}(v); le rayon b est
    pris entre max(jambes) − δ et min(jambes), de sorte que la partie de l'arc fusionné à distance
    ≥ δ des extrémités tombe sur v alors que p_1 et p_{N−1} restent distincts de v.

    Returns:
        Tuple: (Ψ, donnée (Ψ(p_1), …, Ψ(p_{N−1}), v), informations de construction)
    """
    domain = mb.domain
    lo, side = _square_frame(domain)
    if not 0 < eps < 0.5:
        raise SectorPositioningError(float('nan'), f"eps must lie in (0, 1/2), got {eps}")
    last = mb.n - 1
    verts = domain.vertex_array
    on_arc = mb.arc_distance(verts, last) <= Config.BOUNDARY_TOL
    ends = np.min(np.linalg.norm(verts[:, None, :] - mb.point_array[[0, last]][None], axis=-1), axis=1)
    corners = verts[on_arc & (ends > Config.BOUNDARY_TOL)]
    if len(corners) != 1:
        raise SectorPositioningError(float('nan'),
                                     f"the merged arc must contain exactly one corner, found {len(corners)}")
    v = corners[0]
    p_first, p_last = mb.point_array[0], mb.point_array[last]
    legs = [float(np.linalg.norm(p_first - v)), float(np.linalg.norm(p_last - v))]
    # les deux extrémités doivent être sur les arêtes issues de v
    for p, leg in zip((p_first, p_last), legs):
        if min(abs(p[0] - v[0]), abs(p[1] - v[1])) > Config.BOUNDARY_TOL or leg >= side:
            raise SectorPositioningError(float('nan'), "merged arc endpoints must lie on the two edges at the corner")

    b_max = side / math.sqrt(1.0 + 2.0 / eps)
    long_leg, short_leg = max(legs), min(legs)
    minimum = max(long_leg - short_leg, long_leg - b_max, 0.0)
    if delta <= minimum:
        raise SectorPositioningError(minimum, f"delta={delta} cannot fit the merged segment inside the collapsed "
                                              f"disc (legs {legs[0]:.4g}, {legs[1]:.4g}); minimum achievable delta "
                                              f"is {minimum:.4g}")
    b = 0.5 * (max(long_leg - delta, 0.0) + min(short_leg, b_max))
    psi = collapse_corner(v, b, eps)
    psi.provenance = dict(psi.provenance, kind='collapse_vertex', delta=float(delta), square=domain.to_dict())

    # l'arc fusionné privé des δ-boules des extrémités doit tomber sur le coin
    t0, span = mb.arc_span(last)
    ts = t0 + span * np.linspace(0.0, 1.0, 2001)
    samples = domain.boundary_point(ts)
    far = (np.linalg.norm(samples - p_first, axis=1) >= delta) & \
          (np.linalg.norm(samples - p_last, axis=1) >= delta)
    spread = float(np.max(np.linalg.norm(psi(samples[far]) - v, axis=1))) if far.any() else 0.0
    if spread > Config.BOUNDARY_TOL:
        raise SectorPositioningError(minimum, f"segment images spread {spread:.3g} around the corner")

    images = psi(mb.point_array)
    snapped = domain.nearest_boundary_point(images)
    new_points = [tuple(map(float, p)) for p in snapped] + [(float(v[0]), float(v[1]))]
    new_mb = MarkedBoundary(domain, tuple(new_points))
    info = {'legs': legs, 'collapse_radius': b, 'outer_radius': psi.details['outer_radius'],
            'minimum_delta': minimum, 'corner': v.tolist(), 'segment_spread': spread}
    return psi, new_mb, info


def collapse_vertex(phi_tilde: VectorMapField, config: SetConfig, mb: MarkedBoundary, eps: float,
                    delta: float) -> Tuple[VectorMapField, MarkedBoundary, PipelineCertificate]:
    """
    Contracte le segment gênant de l'arc fusionné sur un coin du carré.

    Args:
        phi_tilde: Sortie de push_away
        config: Configuration d'origine à N ensembles
        mb: Donnée fusionnée à N−1 points
        eps: Budget ε (croissance (1+ε)/(1−ε))
        delta: Rayon δ utilisé par la poussée

    Returns:
        Tuple: (Φ̂, nouvelle donnée à N points, certificat)
    """
    grid = phi_tilde.grid
    n = config.n
    radius = Config.ADMISSIBILITY_RADIUS_CELLS * grid.h
    p1, pm = mb.point_array[0], mb.point_array[-1]
    U_prev = neighborhood(config.masks[n - 2], radius, grid)
    U_last = neighborhood(config.masks[n - 1], radius, grid)
    near1 = float(np.min(np.linalg.norm(phi_tilde.values[U_prev] - p1, axis=-1)))
    near2 = float(np.min(np.linalg.norm(phi_tilde.values[U_last] - pm, axis=-1)))
    if min(near1, near2) < delta * (1 - 1e-9):
        raise VerificationError(f"push_away postconditions fail: distances {near1:.4g}, {near2:.4g} < delta={delta}")

    psi, new_mb, info = collapse_datum(mb, eps, delta)
    out = postcompose(phi_tilde, psi)

    b_in = poisson_bracket(phi_tilde).values
    b_out = poisson_bracket(out).values
    J = jacobian_determinants(psi, phi_tilde.points(), 1e-6 * mb.domain.scale).reshape(grid.shape)
    chain = float(np.max(np.abs(J * b_in)))

    # nœuds du segment: images dans l'arc fusionné hors des δ-boules
    flat = phi_tilde.points()
    on_merged = mb.arc_distance(flat, mb.n - 1) <= Config.BOUNDARY_TOL
    seg = on_merged & (np.linalg.norm(flat - p1, axis=1) >= delta) & (np.linalg.norm(flat - pm, axis=1) >= delta)
    corner = np.asarray(info['corner'])
    seg_spread = float(np.max(np.linalg.norm(out.points()[seg] - corner, axis=1))) if seg.any() else 0.0

    before = check_admissible(phi_tilde, merge_last_two(config), mb)
    after = check_admissible(out, config, new_mb)
    factor = (1.0 + eps) / (1.0 - eps)
    cert = PipelineCertificate(
        'collapse_vertex', float(np.max(np.abs(b_in))), float(np.max(np.abs(b_out))), factor, 0.0,
        default_allowance(grid.h), before.to_dict(), after.to_dict(),
        {'eps': eps, 'delta': delta},
        dict(info, chain_rule_sup=chain, declared_bound=psi.declared_jacobian_bound,
             segment_nodes=int(seg.sum()), segment_spread=seg_spread, new_datum=new_mb.to_dict()))
    logger.info(f"collapse_vertex: sup {cert.input_sup:.6g} -> {cert.output_sup:.6g} "
                f"(factor {factor:.6g}, chain rule {chain:.6g})")
    return out, new_mb, cert


def reduction_pipeline(phi_merged: VectorMapField, config: SetConfig, mb: MarkedBoundary, eps: float,
                       delta: float, eps0: float = None):
    """push_away puis collapse_vertex: (Φ̂, donnée à N points, [certificats])."""
    pushed, cert_push = push_away(phi_merged, config, mb, delta, eps0)
    out, new_mb, cert_collapse = collapse_vertex(pushed, config, mb, eps, delta)
    return out, new_mb, [cert_push, cert_collapse]
