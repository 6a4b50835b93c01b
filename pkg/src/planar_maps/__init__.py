from .profiles import SmoothStep
from .maps import (PlanarMap, identity, homothety, affine_area_preserving, rotation, translation,
                   compose, compose_all)
from .pseudoretracts import (pseudoretract_smooth, pseudoretract_polygon, pseudoretract, power_map, collapse_corner,
                             per_factor_eps, retract_onto_shrunken_ball)
from .certify import CertificationReport, certify_jacobian, jacobian_determinants
from .recipes import map_from_recipe

__all__ = ['SmoothStep', 'PlanarMap', 'identity', 'homothety', 'affine_area_preserving', 'rotation',
           'translation', 'compose', 'compose_all', 'pseudoretract_smooth', 'pseudoretract_polygon',
           'pseudoretract', 'power_map', 'collapse_corner', 'per_factor_eps', 'retract_onto_shrunken_ball',
           'CertificationReport', 'certify_jacobian', 'jacobian_determinants', 'map_from_recipe']
