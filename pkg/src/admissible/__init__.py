from .initializer import smoothstep, cutoff, available_radius, initial_admissible_map
from .checks import AdmissibilityReport, check_admissible, check_circle_admissible
from .winding import (as_loop, circle_loop, extract_core_loop, winding_number, HomotopyClass, class_of_map,
                      class_of_decomposition)

__all__ = ['smoothstep', 'cutoff', 'available_radius', 'initial_admissible_map', 'AdmissibilityReport',
           'check_admissible', 'check_circle_admissible', 'as_loop', 'circle_loop', 'extract_core_loop',
           'winding_number', 'HomotopyClass', 'class_of_map', 'class_of_decomposition']
