"""
Utility functions for reading configuration, loading input documents and
fingerprinting inputs so that every output can be traced to what produced it.
"""

import hashlib
import json
import os
from pathlib import Path
from typing import Any, Dict, Iterable

import yaml

from modules.exceptions import SchemaError

try:
    import settings
except ModuleNotFoundError:
    # No local override; fall back to the shipped defaults
    import settings_template as settings  # type: ignore[no-redef]

SEED_ENV_VAR = "LIECTL_SEED"


def get_setting(name: str, default: Any = None) -> Any:
    """
    Read a configuration value from ``settings`` (or ``settings_template``).

    Args:
        name: Attribute name in the settings module.
        default: Value returned when the attribute is absent.
    """
    return getattr(settings, name, default)


def resolve_seed(cli_seed: int | None = None) -> int:
    """
    Pick the seed for a run.

    An explicit command-line seed wins, then the ``LIECTL_SEED`` environment
    variable, then the configured default.

    Raises:
        SchemaError: If ``LIECTL_SEED`` is set but is not an integer.
    """
    if cli_seed is not None:
        return cli_seed
    env_seed = os.environ.get(SEED_ENV_VAR)
    if env_seed:
        try:
            return int(env_seed)
        except ValueError as exc:
            raise SchemaError(f"{SEED_ENV_VAR} must be an integer, got {env_seed!r}") from exc
    return int(get_setting("seed", 42))


def load_document(path: str | Path) -> Dict[str, Any]:
    """
    Load a JSON or YAML document.

    Files ending in ``.yaml`` or ``.yml`` are read with ``yaml.safe_load``;
    everything else is parsed as JSON.

    Args:
        path: Location of the document.

    Returns:
        The parsed top-level object.

    Raises:
        SchemaError: If the file is missing, unparsable, or not an object.
    """
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as file:
            if path.suffix.lower() in (".yaml", ".yml"):
                document = yaml.safe_load(file)
            else:
                document = json.load(file)
    except FileNotFoundError as exc:
        raise SchemaError(f"Input file not found: {path}") from exc
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise SchemaError(f"Could not parse {path}: {exc}") from exc
    if not isinstance(document, dict):
        raise SchemaError(f"{path}: top-level value must be an object")
    return document


def file_digest(paths: Iterable[str | Path]) -> str:
    """
    SHA-256 over the bytes of the given files, in the order given.

    Returns:
        Hex digest; the digest of no input when ``paths`` is empty.
    """
    digest = hashlib.sha256()
    for path in paths:
        digest.update(Path(path).read_bytes())
    return digest.hexdigest()


def dump_json(document: Any) -> str:
    """Serialize with sorted keys and fixed indentation so reruns are byte-identical."""
    return json.dumps(document, sort_keys=True, indent=2) + "\n"
