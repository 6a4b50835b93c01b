import logging
from typing import Optional, Sequence, Tuple

import numpy as np

from ..errors import WindingError
from ..fields import VectorMapField, poisson_bracket, postcompose, sup_norm
from ..planar_maps import power_map
from ..admissible import check_circle_admissible, class_of_map
from .certificate import PipelineCertificate, default_allowance

logger = logging.getLogger('pipelines')


def power_transform(phi: VectorMapField, k: int, eps: float, mask: Optional[np.ndarray] = None,
                    loops: Optional[Sequence] = None) -> Tuple[VectorMapField, PipelineCertificate]:
    """
    Ψ = ℋ_{1/(1−ε)} ∘ T ∘ R_k ∘ Φ: la classe est multipliée par k, le crochet par au plus k(1+ε)/(1−ε).

    Args:
        phi: Application admissible (forme Pb_X, boule unité centrée en 0)
        k: Exposant entier positif
        eps: Budget ε dans (0, 1/2)
        mask: Ensemble X pour les vérifications d'admissibilité
        loops: Boucles génératrices pour suivre les enroulements

    Returns:
        Tuple: (Ψ, certificat)
    """
    R = power_map(k, eps)
    out = postcompose(phi, R)
    details = {'declared_bound': R.declared_jacobian_bound}
    if loops:
        try:
            before = class_of_map(phi, loops)
            after = class_of_map(out, loops)
            details.update(windings_in=list(before.windings), windings_out=list(after.windings),
                           windings_multiplied=after.same_windings(before.multiplied(int(k))))
        except WindingError as e:
            logger.warning(f"Winding check skipped: {str(e)}")
            details.update(winding_error=str(e))
    report_in = check_circle_admissible(phi, mask).to_dict() if mask is not None else None
    report_out = check_circle_admissible(out, mask).to_dict() if mask is not None else None
    cert = PipelineCertificate(
        'power_transform', sup_norm(poisson_bracket(phi)), sup_norm(poisson_bracket(out)),
        R.declared_jacobian_bound, 0.0, default_allowance(phi.grid.h), report_in, report_out,
        {'k': int(k), 'eps': eps}, details)
    logger.info(f"power_transform k={k}: sup {cert.input_sup:.6g} -> {cert.output_sup:.6g}")
    return out, cert
