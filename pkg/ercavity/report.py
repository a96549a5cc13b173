"""
ercavity/report.py
Structured result of one command: resolved inputs, named results with their
units, and the conventions that shaped them. report_export turns this into
the JSON written to stdout or --out.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from ercavity import __version__

TOOLKIT_NAME = 'ercavity'


@dataclass
class Report:
    command:     str
    inputs:      Dict[str, Any]
    results:     Dict[str, Any]
    units:       Dict[str, str]       = field(default_factory=dict)
    conventions: Dict[str, str]       = field(default_factory=dict)
    warnings:    List[str]            = field(default_factory=list)
    artifacts:   List[str]            = field(default_factory=list)
    version:     str                  = __version__


def build_report(
    command:     str,
    inputs:      Dict[str, Any],
    results:     Dict[str, Any],
    units:       Optional[Dict[str, str]] = None,
    conventions: Optional[Dict[str, str]] = None,
    warnings:    Optional[List[str]] = None,
    artifacts:   Optional[List[str]] = None,
) -> Report:
    return Report(
        command     = command,
        inputs      = dict(inputs),
        results     = dict(results),
        units       = dict(units or {}),
        conventions = dict(conventions or {}),
        warnings    = list(warnings or []),
        artifacts   = list(artifacts or []),
    )


def _plain(obj):
    """numpy scalars/arrays and dataclasses to JSON-native values."""
    if hasattr(obj, '__dataclass_fields__'):
        return {k: _plain(getattr(obj, k)) for k in obj.__dataclass_fields__}
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(x) for x in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return _plain(obj.item())
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    return obj


def report_to_dict(report: Report) -> Dict:
    """JSON-serializable dict of the report body (no metadata, no hash)."""
    body = _plain(report)
    for key in ('command', 'inputs', 'version'):
        body.pop(key)
    return body
