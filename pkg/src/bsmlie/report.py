"""Deterministic report envelopes and serializers (JSON, CSV, text)."""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from . import __version__

ARTIFACT = "artifact"
SCHEMA = 1


def _clean(v):
    """Plain JSON types; non-finite floats become strings so output stays valid JSON."""
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, np.ndarray):
        return _clean(v.tolist())
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, (complex, np.complexfloating)):
        return [_clean(v.real), _clean(v.imag)]
    return v


def envelope(command: str, params, seed: int, tolerances: dict, results, passed: bool,
             status: str | None = None) -> dict:
    """Wrap results with everything needed to reproduce them."""
    return _clean({
        "artifact": {"name": ARTIFACT, "version": __version__, "schema": SCHEMA},
        "command": command,
        "params": params,
        "seed": seed,
        "tolerances": tolerances,
        "passed": passed,
        "status": status or ("pass" if passed else "fail"),
        "results": results,
    })


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path
