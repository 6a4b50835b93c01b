"""Point d'entrée en ligne de commande: python -m src.cli {estimate,certify,theorems,chords}."""
import argparse
import logging
from typing import List, Optional

from ..config import Config
from ..errors import ConfigError, PbLabError
from ..utils import configure_logging
from .commands import COMMANDS, EXIT_CONFIG, EXIT_RUNTIME, effective_config
from .schema import load_config, validate_config

logger = logging.getLogger('pb_cli')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='python -m src.cli',
                                     description='Certified upper bounds for Poisson-bracket invariants on 2D grids.')
    parser.add_argument('--log-level', default=None, help=f"logging level (default {Config.LOG_LEVEL})")
    sub = parser.add_subparsers(dest='command', required=True)
    helps = {
        'estimate': 'solve one invariant and write estimate.json, witness.bin and bracket.csv',
        'certify': 'certify the Jacobian bound of a map recipe',
        'theorems': 'run a suite of theorem checks and write summary.csv / summary.txt',
        'chords': 'search Hamiltonian chords between two sets',
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument('--config', required=True, help='JSON config file')
        p.add_argument('--out', default=None, help='output directory (default: config output or runs/<hash>)')
        p.add_argument('--seed', type=int, default=None, help='random seed (restarts)')
        p.add_argument('--grid-override', type=int, default=None, help='grid cells per axis')
        p.add_argument('--objective', choices=['sup', 'max'], default=None, help='sup |{F,G}| or max {F,G}')
    return parser


def run(command: str, config_path: str, out: Optional[str] = None, seed: Optional[int] = None,
        grid_override: Optional[int] = None, objective: Optional[str] = None) -> int:
    """Valide, exécute et traduit les erreurs en codes de sortie."""
    stage = 'config'
    try:
        config = load_config(command, config_path)
        config = validate_config(command, effective_config(command, config, seed, grid_override, objective))
        stage = command
        return COMMANDS[command](config, out)
    except ConfigError as e:
        logger.error(f"Configuration error ({stage}): {str(e)}")
        return EXIT_CONFIG
    except PbLabError as e:
        logger.error(f"{type(e).__name__} during {stage}: {str(e)}")
        return EXIT_RUNTIME
    except Exception as e:
        logger.error(f"Unexpected error during {stage}: {str(e)}")
        return EXIT_RUNTIME


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    return run(args.command, args.config, args.out, args.seed, args.grid_override, args.objective)
