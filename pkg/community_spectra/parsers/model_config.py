"""Parser for JSON model configuration files."""

import json
import math
from pathlib import Path
from typing import Any, Optional, Union

from community_spectra.errors import ConfigError
from community_spectra.model import (
    build_model,
    build_simplex_model,
    build_two_community_model,
)
from community_spectra.models import ModelSpec, ParamAtom

FORMS = ('atoms', 'two_community', 'simplex')


def load_model_config(path: Union[str, Path], n: Optional[int] = None) -> tuple[ModelSpec, dict]:
    """Read a model file and build the model it describes.

    Args:
        path: JSON file path
        n: Overrides the vertex count in the file

    Returns:
        (model, raw config dict)

    Raises:
        ConfigError: If the file is missing, not JSON or malformed
        ModelError: If the atoms violate the model constraints
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read model file {path}: {e}")
    try:
        config = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path} is not valid JSON: {e}")
    return parse_model_config(config, n), config


def parse_model_config(config: Any, n: Optional[int] = None) -> ModelSpec:
    """Build a ModelSpec from an already-decoded config dictionary.

    Exactly one of the keys 'atoms', 'two_community' or 'simplex' must be
    present next to 'n'.

    Args:
        config: Decoded JSON object
        n: Overrides config['n'] when given

    Returns:
        Validated ModelSpec
    """
    if not isinstance(config, dict):
        raise ConfigError("model config must be a JSON object")

    present = [form for form in FORMS if form in config]
    if len(present) != 1:
        raise ConfigError(
            f"model config needs exactly one of {', '.join(FORMS)}, found {present or 'none'}"
        )
    unknown = set(config) - set(FORMS) - {'n', 'name', 'description'}
    if unknown:
        raise ConfigError(f"unknown model config keys: {sorted(unknown)}")

    if n is None:
        n = _positive_int(config.get('n'), 'n')

    form = present[0]
    body = config[form]
    if form == 'atoms':
        return build_model(_parse_atoms(body), n)
    if form == 'two_community':
        return _parse_two_community(body, n)
    return _parse_simplex(body, n)


def _parse_atoms(body: Any) -> list[ParamAtom]:
    if not isinstance(body, list) or not body:
        raise ConfigError("'atoms' must be a non-empty list")
    atoms = []
    for idx, entry in enumerate(body):
        if not isinstance(entry, dict) or 'k' not in entry or 'weight' not in entry:
            raise ConfigError(f"atom {idx} needs 'k' and 'weight'")
        k = entry['k']
        if isinstance(k, (int, float)):
            k = [k]
        if not isinstance(k, list) or not all(_is_number(v) for v in k):
            raise ConfigError(f"atom {idx}: 'k' must be a list of numbers")
        group = entry.get('group')
        if group is not None and not isinstance(group, int):
            raise ConfigError(f"atom {idx}: 'group' must be an integer")
        atoms.append(ParamAtom(
            k=tuple(float(v) for v in k),
            weight=_number(entry['weight'], f"atom {idx} weight"),
            group=group
        ))
    return atoms


def _parse_two_community(body: Any, n: int) -> ModelSpec:
    if not isinstance(body, dict):
        raise ConfigError("'two_community' must be an object")
    kappas = body.get('kappas')
    if not isinstance(kappas, list) or not kappas:
        raise ConfigError("'two_community.kappas' must be a non-empty list")
    kappa_atoms = []
    for idx, entry in enumerate(kappas):
        if isinstance(entry, dict):
            kappa_atoms.append((
                _number(entry.get('kappa'), f"kappas[{idx}].kappa"),
                _number(entry.get('weight'), f"kappas[{idx}].weight")
            ))
        else:
            raise ConfigError(f"kappas[{idx}] must be an object with 'kappa' and 'weight'")
    theta = _number(body.get('theta', 0.0), 'two_community.theta')
    return build_two_community_model(kappa_atoms, theta, n)


def _parse_simplex(body: Any, n: int) -> ModelSpec:
    if not isinstance(body, dict):
        raise ConfigError("'simplex' must be an object")
    q = _positive_int(body.get('q'), 'simplex.q')
    if 'phi' in body:
        phi = _number(body['phi'], 'simplex.phi')
    elif 'phi_degrees' in body:
        phi = math.radians(_number(body['phi_degrees'], 'simplex.phi_degrees'))
    else:
        raise ConfigError("'simplex' needs 'phi' (radians) or 'phi_degrees'")

    magnitudes = body.get('magnitudes')
    if not isinstance(magnitudes, list) or not magnitudes:
        raise ConfigError("'simplex.magnitudes' must be a non-empty list")
    magnitude_atoms = []
    for idx, entry in enumerate(magnitudes):
        if _is_number(entry):
            # bare numbers share the weight equally
            magnitude_atoms.append((float(entry), 1.0 / len(magnitudes)))
        elif isinstance(entry, dict):
            magnitude_atoms.append((
                _number(entry.get('k'), f"magnitudes[{idx}].k"),
                _number(entry.get('weight'), f"magnitudes[{idx}].weight")
            ))
        else:
            raise ConfigError(f"magnitudes[{idx}] must be a number or {{k, weight}}")
    return build_simplex_model(q, phi, magnitude_atoms, n)


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _number(value: Any, name: str) -> float:
    if not _is_number(value):
        raise ConfigError(f"'{name}' must be a number, got {value!r}")
    return float(value)


def _positive_int(value: Any, name: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        raise ConfigError(f"'{name}' must be a positive integer, got {value!r}")
    return value


def two_community_kappas(config: dict) -> list[tuple[float, float]]:
    """(kappa, weight) pairs of a two_community config.

    Raises:
        ConfigError: If the config uses another form
    """
    if 'two_community' not in config:
        raise ConfigError("this command needs a model file in the 'two_community' form")
    kappas = config['two_community'].get('kappas') or []
    return [(float(entry['kappa']), float(entry['weight'])) for entry in kappas]


def simplex_parameters(config: dict) -> tuple[int, list[tuple[float, float]]]:
    """(q, magnitude atoms) of a simplex config."""
    if 'simplex' not in config:
        raise ConfigError("this command needs a model file in the 'simplex' form")
    body = config['simplex']
    magnitudes = body['magnitudes']
    atoms = [
        (float(entry), 1.0 / len(magnitudes)) if _is_number(entry)
        else (float(entry['k']), float(entry['weight']))
        for entry in magnitudes
    ]
    return int(body['q']), atoms
