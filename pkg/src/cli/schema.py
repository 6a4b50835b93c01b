"""Validation stricte des fichiers de configuration (jsonschema, draft 7)."""
import json
import logging
from pathlib import Path
from typing import Dict, List

from jsonschema import Draft7Validator
from jsonschema.exceptions import best_match
from referencing import Registry, Resource

from ..errors import ConfigError
from ..utils import load_json_resource

logger = logging.getLogger('pb_cli')

SCHEMAS = {
    'estimate': 'run_config.schema.json',
    'theorems': 'suite.schema.json',
    'certify': 'recipe.schema.json',
    'chords': 'chords.schema.json',
}
SHARED_DEFINITIONS = 'shape.defs.json'

_validators: Dict[str, Draft7Validator] = {}


def _registry() -> Registry:
    shared = Resource.from_contents(load_json_resource(SHARED_DEFINITIONS))
    return Registry().with_resource(SHARED_DEFINITIONS, shared)


def get_validator(command: str) -> Draft7Validator:
    if command not in SCHEMAS:
        raise ConfigError(f"no schema for command '{command}'")
    if command not in _validators:
        schema = load_json_resource(SCHEMAS[command])
        Draft7Validator.check_schema(schema)
        _validators[command] = Draft7Validator(schema, registry=_registry())
    return _validators[command]


def error_path(error) -> str:
    path = '/'.join(str(p) for p in error.absolute_path)
    return path or '<root>'


def validation_errors(command: str, config: Dict) -> List[str]:
    """Tous les messages d'erreur, chacun préfixé du chemin de la clé fautive."""
    validator = get_validator(command)
    return [f"{error_path(e)}: {e.message}" for e in sorted(validator.iter_errors(config), key=lambda e: e.path)]


def validate_config(command: str, config: Dict) -> Dict:
    """
    Valide config contre le schéma de la commande.

    Raises:
        ConfigError: message nommant la clé fautive (meilleure erreur selon jsonschema)
    """
    error = best_match(get_validator(command).iter_errors(config))
    if error is not None:
        message = f"invalid {command} config at {error_path(error)}: {error.message}"
        logger.error(message)
        raise ConfigError(message)
    return config


def load_config(command: str, path) -> Dict:
    """Lit un fichier JSON et le valide."""
    path = Path(path)
    try:
        with open(path, 'r', encoding='utf-8') as handle:
            config = json.load(handle)
    except FileNotFoundError:
        raise ConfigError(f"config file {path} does not exist")
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file {path} is not valid JSON: {str(e)}")
    return validate_config(command, config)

