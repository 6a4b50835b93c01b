from .config import SetConfig, cyclic_neighbours
from .rasterize import (rasterize, rasterize_set, rasterize_shape, shape_distance, sd_disc, sd_annulus,
                        sd_box, sd_polyline, sd_arc)
from .ops import (distance_field, neighborhood, hausdorff_distance, merge_last_two, closure_minus,
                  split_by_neighborhood)

__all__ = ['SetConfig', 'cyclic_neighbours', 'rasterize', 'rasterize_set', 'rasterize_shape', 'shape_distance',
           'sd_disc', 'sd_annulus', 'sd_box', 'sd_polyline', 'sd_arc', 'distance_field', 'neighborhood',
           'hausdorff_distance', 'merge_last_two', 'closure_minus', 'split_by_neighborhood']
