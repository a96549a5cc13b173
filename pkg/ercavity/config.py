"""
ercavity/config.py
Flat key=value configuration with unit-suffixed values.

    # comment
    lambda0 = 1536nm
    tau_bulk = 11.4ms
    alpha_d1 = 24.5/cm

Every key has a dimension. Dimensional keys require a unit suffix; a bare
number there is a UsageError, as are unknown or duplicate keys. Values are
stored in SI. Precedence: command-line flags > config file > DEFAULT_CONFIG.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from ercavity.errors import UsageError
from ercavity.parsers.text_io import read_text
from ercavity.spectroscopy.rate_chain import AXIS_ABSORPTION, CONVENTIONS, yso_yttrium_density

logger = logging.getLogger(__name__)

UNITS: Dict[str, Dict[str, float]] = {
    'length':         {'m': 1.0, 'cm': 1e-2, 'mm': 1e-3, 'um': 1e-6, 'µm': 1e-6, 'nm': 1e-9},
    'time':           {'s': 1.0, 'ms': 1e-3, 'us': 1e-6, 'µs': 1e-6, 'ns': 1e-9},
    'frequency':      {'hz': 1.0, 'khz': 1e3, 'mhz': 1e6, 'ghz': 1e9, 'thz': 1e12},
    'inverse_length': {'/m': 1.0, '/cm': 1e2},
    'density':        {'/m3': 1.0, '/cm3': 1e6},
}

# key -> (dimension, default). Dimension 'number' takes bare floats, 'integer'
# bare ints, 'choice:a|b' one of the listed words.
SCHEMA: Dict[str, tuple] = {
    'lambda0':           ('length',         1536e-9),
    'n':                 ('number',         1.785),
    'q':                 ('number',         11400.0),
    'q_sim':             ('number',         70000.0),
    'vnorm':             ('number',         1.65),
    'overlap':           ('number',         1.0),
    'f_max':             ('number',         517.0),
    'f_eff':             ('number',         116.0),
    'alpha_d1':          ('inverse_length', AXIS_ABSORPTION['D1'][0]),
    'alpha_d2':          ('inverse_length', AXIS_ABSORPTION['D2'][0]),
    'fwhm_d1':           ('frequency',      AXIS_ABSORPTION['D1'][1]),
    'fwhm_d2':           ('frequency',      AXIS_ABSORPTION['D2'][1]),
    'inhom_fwhm':        ('frequency',      500e6),
    'dipole_axis':       ('choice:D1|D2',   'D1'),
    'dopant_fraction':   ('number',         2e-4),
    'y_density':         ('density',        yso_yttrium_density()),
    'site_share':        ('number',         1.0),
    'convention':        ('choice:' + '|'.join(CONVENTIONS), 'local_field'),
    'tau_bulk':          ('time',           11.4e-3),
    'tau_bulk_measured': ('time',           10.8e-3),
    'tau_cav':           ('time',           1.8e-3),
    'beta':              ('number',         0.114),
    'gamma_rad':         ('frequency',      10.03),
    'oscillator_strength': ('number',       1.095e-7),
    'gamma_opt':         ('frequency',      1.0 / 11e-3),
    't_z':               ('time',           100e-3),
    'p_return':          ('number',         0.8213),
    'eta_target':        ('number',         0.68),
    'waveguide_length':  ('length',         26e-6),
    'confinement':       ('number',         1.0),
    'cooperativity':     ('number',         0.291),
    'saturation':        ('number',         0.0),
    'pulse_duration':    ('time',           20e-3),
    'repetition_period': ('time',           75e-3),
    'bin_width':         ('time',           0.2e-3),
    'n_bins':            ('integer',        250),
    't0':                ('time',           0.0),
    'dark_rate':         ('frequency',      20.0),
    'collection_scale':  ('number',         50.0),
    'n_pulses':          ('integer',        100),
    'hist_bins':         ('integer',        64),
}

DEFAULT_CONFIG: Dict[str, Any] = {key: default for key, (_, default) in SCHEMA.items()}

_QUANTITY = re.compile(r'^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(\S*)\s*$')


def parse_quantity(text: str, dimension: str) -> Union[float, int, str]:
    """Parse one value for a key of the given dimension into SI."""
    text = str(text).strip()
    if dimension.startswith('choice:'):
        options = dimension.split(':', 1)[1].split('|')
        if text not in options:
            raise UsageError(f"{text!r} is not one of {options}")
        return text

    match = _QUANTITY.match(text)
    if not match:
        raise UsageError(f"cannot parse {text!r} as a number")
    number, unit = match.group(1), match.group(2).lower()

    if dimension == 'integer':
        if unit or not re.fullmatch(r'[-+]?\d+', number):
            raise UsageError(f"expected an integer, got {text!r}")
        return int(number)
    if dimension == 'number':
        if unit:
            raise UsageError(f"{text!r}: dimensionless value takes no unit")
        return float(number)

    units = UNITS[dimension]
    if not unit:
        raise UsageError(f"{text!r} needs a {dimension} unit, one of {sorted(units)}")
    if unit not in units:
        raise UsageError(f"unknown {dimension} unit {unit!r}, expected one of {sorted(units)}")
    return float(number) * units[unit]


def load_config(path: Optional[Path] = None) -> Dict[str, Any]:
    """Built-in defaults overlaid with the file's settings. No path returns the defaults."""
    if path is None:
        return dict(DEFAULT_CONFIG)
    path = Path(path)
    if not path.exists():
        raise UsageError(f"config file not found: {path}")

    seen: Dict[str, int] = {}
    settings: Dict[str, Any] = {}
    for lineno, raw in enumerate(read_text(path).splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise UsageError(f"{path.name}:{lineno}: expected key=value, got {line!r}")
        key, value = (part.strip() for part in line.split('=', 1))
        key = key.lower()
        if key not in SCHEMA:
            raise UsageError(f"{path.name}:{lineno}: unknown key {key!r}")
        if key in seen:
            raise UsageError(f"{path.name}:{lineno}: duplicate key {key!r} (first set on line {seen[key]})")
        try:
            settings[key] = parse_quantity(value, SCHEMA[key][0])
        except UsageError as e:
            raise UsageError(f"{path.name}:{lineno}: {key}: {e}") from None
        seen[key] = lineno

    logger.info(f"Loaded {len(settings)} settings from {path.name}")
    return {**DEFAULT_CONFIG, **settings}


def merge_flags(config: Dict[str, Any], flags: Dict[str, Any]) -> Dict[str, Any]:
    """Flags win over config; None means the flag was not given."""
    unknown = sorted(set(flags) - set(SCHEMA))
    if unknown:
        raise UsageError(f"unknown settings {unknown}")
    return {**config, **{k: v for k, v in flags.items() if v is not None}}


@dataclass
class Scenario:
    """One fully resolved command invocation."""
    name:    str
    inputs:  Dict[str, Any]
    outputs: List[str] = field(default_factory=list)


def resolve_scenario(
    name:        str,
    flags:       Dict[str, Any],
    config_path: Optional[Path] = None,
    outputs:     Optional[List[str]] = None,
) -> Scenario:
    return Scenario(name=name, inputs=merge_flags(load_config(config_path), flags), outputs=list(outputs or []))
