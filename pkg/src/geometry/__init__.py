from .domains import (ConvexDomain, make_disc, make_unit_disc, make_square, make_polygon,
                      make_right_triangle, make_regular_polygon, domain_from_dict, segment_distances)
from .boundary import MarkedBoundary, standard_square_datum, corner_datum

__all__ = ['ConvexDomain', 'make_disc', 'make_unit_disc', 'make_square', 'make_polygon',
           'make_right_triangle', 'make_regular_polygon', 'domain_from_dict', 'segment_distances',
           'MarkedBoundary', 'standard_square_datum', 'corner_datum']
