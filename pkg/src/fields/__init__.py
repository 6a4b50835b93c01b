from .grid import GridManifold, ScalarField, VectorMapField, plane_box, torus, grid_from_dict
from .bracket import (diff, diff_adjoint, bracket_values, bracket_gradients, poisson_bracket, scalar_bracket,
                      sup_norm, max_value, postcompose, VanishingReport, bracket_vanishing_report)
from .io import (write_field_binary, read_field_binary, write_field_csv, read_field_csv, field_frame,
                 write_mask_pbm, read_mask_pbm)

__all__ = ['GridManifold', 'ScalarField', 'VectorMapField', 'plane_box', 'torus', 'grid_from_dict',
           'diff', 'diff_adjoint', 'bracket_values', 'bracket_gradients', 'poisson_bracket', 'scalar_bracket',
           'sup_norm', 'max_value', 'postcompose', 'VanishingReport', 'bracket_vanishing_report',
           'write_field_binary', 'read_field_binary', 'write_field_csv', 'read_field_csv', 'field_frame',
           'write_mask_pbm', 'read_mask_pbm']
