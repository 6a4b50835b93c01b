import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np

from ..config import Config
from ..errors import PremiseError
from ..fields import VectorMapField, poisson_bracket, postcompose
from ..planar_maps import jacobian_determinants, retract_onto_shrunken_ball
from ..admissible import check_circle_admissible
from .certificate import PipelineCertificate, default_allowance

logger = logging.getLogger('pipelines')


def retract_rescale(phi: VectorMapField, eps: float, K: Optional[float] = None, mask: Optional[np.ndarray] = None,
                    center: Sequence[float] = (0.0, 0.0),
                    radius: float = 1.0) -> Tuple[VectorMapField, PipelineCertificate]:
    """
    Ψ = ℋ_{1/(1−ε)} ∘ T ∘ Φ, T pseudorétraction sur la boule d'aire relative 1−ε.

    Si |{Φ₁, Φ₂}| ≤ K sur Φ⁻¹(B_{1−ε}), alors |{Ψ₁, Ψ₂}| ≤ K(1+ε)/(1−ε) partout, et Ψ = Φ
    là où Φ prend ses valeurs sur le cercle.

    Args:
        phi: Application à valeurs dans le plan (forme Pb_X)
        eps: Budget ε dans (0, 1)
        K: Borne annoncée sur Φ⁻¹(B_{1−ε}); mesurée si absente
        mask: Ensemble X (pour vérifier l'admissibilité de la sortie)
        center: Centre de la boule
        radius: Rayon de la boule

    Returns:
        Tuple: (Ψ, certificat)

    Raises:
        PremiseError: si la borne mesurée sur Φ⁻¹(B_{1−ε}) dépasse K
    """
    grid = phi.grid
    c = np.asarray(center, dtype=float)
    T = retract_onto_shrunken_ball(c, radius, eps)

    modulus = np.linalg.norm(phi.values - c, axis=-1)
    inner = modulus <= radius * math.sqrt(1.0 - eps)
    b_in = poisson_bracket(phi).values
    measured = float(np.max(np.abs(b_in[inner]))) if inner.any() else 0.0
    claimed = measured if K is None else float(K)
    if measured > claimed * (1 + 1e-12) + 1e-300:
        logger.error(f"retract_rescale premise failed: measured {measured:.6g} > K = {claimed:.6g}")
        raise PremiseError(measured, claimed)

    out = postcompose(phi, T)
    b_out = poisson_bracket(out).values
    J = jacobian_determinants(T, phi.points(), 1e-6 * radius).reshape(grid.shape)

    on_circle = np.abs(modulus - radius) <= Config.BOUNDARY_TOL
    fixed_shift = float(np.max(np.abs(out.values[on_circle] - phi.values[on_circle]))) if on_circle.any() else 0.0
    before = check_circle_admissible(phi, mask, c, radius).to_dict() if mask is not None else None
    after = check_circle_admissible(out, mask, c, radius).to_dict() if mask is not None else None

    cert = PipelineCertificate(
        'retract_rescale', claimed, float(np.max(np.abs(b_out))), (1.0 + eps) / (1.0 - eps), 0.0,
        default_allowance(grid.h), before, after, {'eps': eps, 'K': K, 'radius': radius},
        {'measured_premise': measured, 'premise_nodes': int(inner.sum()),
         'chain_rule_sup': float(np.max(np.abs(J * b_in))), 'declared_bound': T.declared_jacobian_bound,
         'circle_nodes': int(on_circle.sum()), 'circle_shift': fixed_shift})
    logger.info(f"retract_rescale: K={claimed:.6g} -> {cert.output_sup:.6g} (claimed ≤ {cert.claimed_bound:.6g})")
    return out, cert
