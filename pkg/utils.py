import json
import logging
import os
import sys
import tomllib

import numpy as np
import pandas as pd

from engine import PRESETS, Strategy
from errors import InvalidConfig, InvalidParam, NumericalFailure

logger = logging.getLogger(__name__)

CONFIG_ENV_VAR = "SZILARD_CONFIG"

# Every long CLI flag has a key here (dashes become underscores)
DEFAULT_SETTINGS = {
    'family': 'werner',
    'eta': 0.0,
    'q': 1.0,
    'eta_min': -0.9,
    'eta_max': 0.9,
    'eta_steps': 19,
    'q_min': 0.0,
    'q_max': 1.0,
    'q_steps': 11,
    'strategy': 'w3',
    'c1': None,
    'c2': None,
    'c3': None,
    'mode': 'exact',
    'shots': 10000,
    'seed': 0,
    'readout_fidelity': 1.0,
    'chunk_size': 4096,
    'correct_readout': False,
    'resolution': 20000,
    'format': 'csv',
    'out': None,
    'boundary_out': None,
    'data_dir': 'data',
    'threads': 1,
    'log_level': 'WARNING',
}


# Keys whose default is None still need a type for config-file values
SETTING_TYPES = {'c1': float, 'c2': float, 'c3': float, 'out': str, 'boundary_out': str}


def _coerce_setting(key, value, path):
    """Convert a config-file value to the type of its default, rejecting lossy conversions"""
    kind = SETTING_TYPES.get(key) or type(DEFAULT_SETTINGS[key])
    if kind is bool:
        if isinstance(value, bool):
            return value
    elif kind is int:
        if isinstance(value, int) and not isinstance(value, bool):
            return value
    elif kind is float:
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
    elif isinstance(value, str):
        return value
    raise InvalidConfig(f"config key {key!r} in {path} must be {kind.__name__}, got {value!r}")


def load_config_file(path):
    """Read a TOML config file whose keys mirror the CLI flags"""
    try:
        with open(path, 'rb') as file:
            content = tomllib.load(file)
    except FileNotFoundError:
        raise InvalidConfig(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as e:
        raise InvalidConfig(f"cannot parse config file {path}: {e}")

    settings = {}
    for key, value in content.items():
        key = key.replace('-', '_')
        if key not in DEFAULT_SETTINGS or key == 'config':
            raise InvalidConfig(f"unknown config key {key!r} in {path}")
        settings[key] = _coerce_setting(key, value, path)
    return settings


def initialize_settings(config_path=None, overrides=None, environ=None):
    """
    Resolve settings: defaults, then the config file, then explicit overrides.

    Args:
        config_path: config file path; falls back to $SZILARD_CONFIG when None
        overrides: dict of flag values, None entries are ignored
        environ: environment mapping (default: os.environ)
    """
    environ = os.environ if environ is None else environ
    settings = dict(DEFAULT_SETTINGS)

    path = config_path or environ.get(CONFIG_ENV_VAR)
    if path:
        settings.update(load_config_file(path))
        logger.info("loaded settings from %s", path)

    for key, value in (overrides or {}).items():
        if value is not None:
            settings[key] = value
    return settings


def resolve_strategy(settings):
    """Explicit --c1/--c2/--c3 win over the preset name"""
    weights = [settings.get(k) for k in ('c1', 'c2', 'c3')]
    if any(w is not None for w in weights):
        return Strategy.of([0.0 if w is None else w for w in weights])
    name = str(settings.get('strategy', 'w3')).lower()
    if name not in PRESETS:
        raise InvalidConfig(f"unknown strategy preset {name!r}, expected one of {sorted(PRESETS)}")
    return PRESETS[name]


def make_grid(start, stop, steps):
    """Inclusive evenly spaced grid; a single step yields [start]"""
    steps = int(steps)
    if steps < 1:
        raise InvalidParam(f"grid needs at least one point, got {steps}")
    if steps == 1:
        return np.array([float(start)])
    return np.linspace(float(start), float(stop), steps)


def eta_grid(settings):
    grid = make_grid(settings['eta_min'], settings['eta_max'], settings['eta_steps'])
    if np.any(np.abs(grid) > 1):
        raise InvalidParam("eta grid must stay within [-1, 1]")
    return grid


def q_grid(settings):
    grid = make_grid(settings['q_min'], settings['q_max'], settings['q_steps'])
    if np.any(grid < 0) or np.any(grid > 1):
        raise InvalidParam("q grid must stay within [0, 1]")
    return grid


def row_seed(seed, *key):
    """Independent 64-bit seed for a grid row, derived from the base seed"""
    return int(np.random.SeedSequence([int(seed), *key]).generate_state(1, np.uint64)[0])


def format_number(value, digits=6):
    """Format a float for human-readable summaries"""
    if value is None or pd.isna(value):
        return "n/a"
    return f"{value:.{digits}g}"


def validate_table(df):
    """Every emitted row must have every column filled with a finite number"""
    numeric = df.select_dtypes(include='number')
    if numeric.shape[1] != df.shape[1]:
        bad = sorted(set(df.columns) - set(numeric.columns))
        raise NumericalFailure(f"non-numeric columns in output table: {bad}")
    if not np.all(np.isfinite(numeric.to_numpy(dtype=float))):
        raise NumericalFailure("output table contains non-finite values")
    return df


def table_to_text(df, fmt):
    """CSV (full precision, '\\n' line ends) or JSON (array of row objects)"""
    validate_table(df)
    if fmt == 'csv':
        return df.to_csv(index=False, float_format='%.17g', lineterminator='\n')
    if fmt == 'json':
        return json.dumps(df.to_dict(orient='records'), indent=2) + '\n'
    raise InvalidConfig(f"unknown output format {fmt!r}")


def export_table(df, path=None, fmt='csv'):
    """Write a table to path, or to stdout when path is None"""
    text = table_to_text(df, fmt)
    if path is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(path)
    if directory and not os.path.exists(directory):
        os.makedirs(directory)
    with open(path, 'w', newline='') as file:
        file.write(text)
    logger.info("wrote %d rows to %s", len(df), path)
