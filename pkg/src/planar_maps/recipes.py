"""Reconstruction d'une PlanarMap à partir de sa recette (provenance sérialisée)."""
from typing import Dict

from ..errors import ConfigError
from ..geometry import domain_from_dict
from .maps import (PlanarMap, affine_area_preserving, compose, homothety, identity, rotation,
                   translation)
from .pseudoretracts import collapse_corner, power_map, pseudoretract, pseudoretract_polygon, pseudoretract_smooth


def map_from_recipe(recipe: Dict) -> PlanarMap:
    """
    Construit l'application décrite par recipe.

    Les clés reconnues suivent les provenances émises par les constructeurs; la clé
    optionnelle 'declared_bound' force une borne déclarée (rapports de certification).
    """
    if not isinstance(recipe, dict) or 'kind' not in recipe:
        raise ConfigError("map recipe must be an object with a 'kind' key")
    kind = recipe['kind']
    try:
        if kind == 'identity':
            result = identity()
        elif kind == 'homothety':
            result = homothety(recipe['area_factor'], recipe.get('center', (0.0, 0.0)))
        elif kind == 'affine':
            result = affine_area_preserving(recipe['matrix'], recipe.get('translation', (0.0, 0.0)))
        elif kind == 'rotation':
            result = rotation(recipe['angle'], recipe.get('center', (0.0, 0.0)))
        elif kind == 'translation':
            result = translation(recipe['vector'])
        elif kind == 'pseudoretract_smooth':
            result = pseudoretract_smooth(domain_from_dict(recipe['domain']), recipe['eps'],
                                          recipe.get('identity_fraction'))
        elif kind == 'pseudoretract_polygon':
            result = pseudoretract_polygon(domain_from_dict(recipe['domain']), recipe['eps'],
                                           recipe.get('outer_scale'), recipe.get('band'),
                                           recipe.get('radial_band'))
        elif kind == 'pseudoretract':
            result = pseudoretract(domain_from_dict(recipe['domain']), recipe['eps'],
                                   overall=recipe.get('overall', False))
        elif kind == 'power_map':
            result = power_map(recipe['k'], recipe['eps'])
        elif kind == 'collapse_corner':
            result = collapse_corner(recipe['corner'], recipe['radius'], recipe['eps'])
        elif kind == 'compose':
            result = compose(map_from_recipe(recipe['outer']), map_from_recipe(recipe['inner']))
        else:
            raise ConfigError(f"unknown map kind '{kind}'")
    except KeyError as e:
        raise ConfigError(f"map recipe of kind '{kind}' is missing key {str(e)}")
    if 'declared_bound' in recipe:
        result = result.with_bound(recipe['declared_bound'])
    return result
