from . import config
from . import errors
from . import utils

__all__ = ['config', 'errors', 'utils']
