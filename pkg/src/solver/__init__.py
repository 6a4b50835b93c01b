from .schedule import SolveSchedule, quick_schedule
from .objective import p_norm, soft_max, objective_and_gradient, objective_value, exact_objective
from .projection import FeasibilityProjector, CircleProjector
from .estimate import (PbEstimate, estimate_pb, estimate_pb3_fg, estimate_pb4, estimate_pb_x, decomposition_class,
                       estimate_series, save_estimate, load_witness, coarsen_config, prolong)
from .theorems import (TheoremReport, pb3_datum, theorem_check_reduction, theorem_check_limit,
                       theorem_check_subhomogeneity, theorem_check_htpy, theorem_check_monotonicity,
                       theorem_check_pb3_pb4, THEOREM_CHECKS)

__all__ = ['SolveSchedule', 'quick_schedule', 'p_norm', 'soft_max', 'objective_and_gradient', 'objective_value',
           'exact_objective', 'FeasibilityProjector', 'CircleProjector', 'PbEstimate', 'estimate_pb',
           'estimate_pb3_fg', 'estimate_pb4', 'estimate_pb_x', 'decomposition_class', 'estimate_series',
           'save_estimate', 'load_witness', 'coarsen_config', 'prolong', 'TheoremReport', 'pb3_datum',
           'theorem_check_reduction', 'theorem_check_limit', 'theorem_check_subhomogeneity', 'theorem_check_htpy',
           'theorem_check_monotonicity', 'theorem_check_pb3_pb4', 'THEOREM_CHECKS']
