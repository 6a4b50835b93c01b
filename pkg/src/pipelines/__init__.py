from .certificate import PipelineCertificate, default_allowance
from .reduction import (reduction_data, forget_point, push_away, collapse_datum, collapse_vertex,
                        reduction_pipeline)
from .retract import retract_rescale
from .power import power_transform

__all__ = ['PipelineCertificate', 'default_allowance', 'reduction_data', 'forget_point', 'push_away',
           'collapse_datum', 'collapse_vertex', 'reduction_pipeline', 'retract_rescale', 'power_transform']
