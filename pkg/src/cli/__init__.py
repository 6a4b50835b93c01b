from .schema import validate_config, validation_errors, load_config, get_validator
from .commands import (cmd_estimate, cmd_certify, cmd_theorems, cmd_chords, run_estimate, run_check,
                       effective_config, COMMANDS, EXIT_OK, EXIT_VERDICT, EXIT_CONFIG, EXIT_RUNTIME)
from .main import main, run, build_parser

__all__ = ['validate_config', 'validation_errors', 'load_config', 'get_validator', 'cmd_estimate', 'cmd_certify',
           'cmd_theorems', 'cmd_chords', 'run_estimate', 'run_check', 'effective_config', 'COMMANDS', 'EXIT_OK',
           'EXIT_VERDICT', 'EXIT_CONFIG', 'EXIT_RUNTIME', 'main', 'run', 'build_parser']
