"""
ercavity/report_export.py
JSON export of a Report with an integrity hash.

Every export carries the format version, report metadata (toolkit name and
version, command, resolved inputs) and a SHA-256 over the canonical JSON of
everything else. Nothing time-dependent enters the payload, so rerunning
with the echoed inputs reproduces the file byte for byte.
"""

import hashlib
import json
from typing import Any, Dict, Optional

from ercavity.report import TOOLKIT_NAME, Report, _plain, report_to_dict

EXPORT_FORMAT_VERSION = "1.0"


def _build_export_payload(report: Report) -> Dict[str, Any]:
    report_metadata = {
        "toolkit": TOOLKIT_NAME,
        "toolkit_version": report.version,
        "command": report.command,
        "inputs": _plain(report.inputs),
    }
    return {
        "export_format_version": EXPORT_FORMAT_VERSION,
        "report_metadata": report_metadata,
        "report": report_to_dict(report),
    }


def _content_hash(payload: Dict[str, Any]) -> str:
    """SHA-256 of canonical JSON serialization of payload (no hash field)."""
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def export_to_dict(report: Report) -> Dict[str, Any]:
    payload = _build_export_payload(report)
    return {**payload, "content_hash_sha256": _content_hash(payload)}


def export_to_json(report: Report, indent: Optional[int] = 2) -> str:
    return json.dumps(export_to_dict(report), indent=indent, sort_keys=False)


def verify_content_hash(exported: Dict[str, Any]) -> bool:
    """True when the stored hash matches the rest of the exported object."""
    payload = {k: v for k, v in exported.items() if k != "content_hash_sha256"}
    return exported.get("content_hash_sha256") == _content_hash(payload)
