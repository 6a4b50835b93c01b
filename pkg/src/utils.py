import hashlib
import json
import logging
import math
from pathlib import Path
from typing import Any

import numpy as np

from .config import Config


def configure_logging(level: str = None):
    """Configure le logger racine une seule fois (points d'entrée uniquement)."""
    logging.basicConfig(
        level=getattr(logging, (level or Config.LOG_LEVEL).upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )


def _plain(value: Any) -> Any:
    """Convertit récursivement les types numpy en types JSON natifs."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value) or math.isinf(value):
            return str(value)
        return float(repr(value))
    if isinstance(value, Path):
        return str(value)
    return value


def canonical_json(data: Any, indent: int = 2) -> str:
    """
    Sérialise en JSON canonique (clés triées, flottants en repr).

    Args:
        data: Structure à sérialiser
        indent: Indentation

    Returns:
        str: Texte JSON stable octet pour octet
    """
    return json.dumps(_plain(data), sort_keys=True, indent=indent, ensure_ascii=True) + "\n"


def config_hash(config: Any) -> str:
    """Empreinte SHA-256 de la configuration canonique."""
    return hashlib.sha256(canonical_json(config, indent=None).encode('utf-8')).hexdigest()


def get_project_root() -> Path:
    """Retourne le répertoire racine du projet de façon cross-platform."""
    return Path(__file__).parent.parent


def get_data_file_path(filename: str) -> Path:
    """Retourne le chemin vers un fichier dans le dossier data."""
    return get_project_root() / "data" / filename


def load_json_resource(filename: str) -> Any:
    with open(get_data_file_path(filename), 'r', encoding='utf-8') as handle:
        return json.load(handle)
