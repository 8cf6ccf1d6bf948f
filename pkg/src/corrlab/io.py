"""DistFile reading and writing.

A DistFile is a JSON object::

    {
      "format_version": 1,
      "alphabets": [["0", "1"], ["a", "b", "c"]],
      "metrics": "discrete",
      "pmf": [0.1, 0.2, ...]
    }

``metrics`` is optional; besides ``"discrete"`` it may be a list holding one
square table (or ``"discrete"``) per coordinate. ``pmf`` is dense in
row-major order with the last coordinate varying fastest.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np

from .errors import CapacityExceeded, CorrlabError
from .space import JointDist, ProductSpace, make_joint

FORMAT_VERSION = 1
REPORT_SCHEMA_VERSION = 1


class DistFileError(CorrlabError, ValueError):
    """A DistFile could not be parsed or does not describe a valid distribution."""


def _field_line(text: str, name: str) -> int | None:
    m = re.search(r'"%s"\s*:' % re.escape(name), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _fail(source: str, text: str, name: str, msg: str):
    line = _field_line(text, name) if text else None
    where = f"{source}:{line}" if line else source
    raise DistFileError(f"{where}: field '{name}': {msg}")


def loads(text: str, source: str = "<string>") -> JointDist:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DistFileError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise DistFileError(f"{source}: top level must be an object")
    return from_document(doc, source, text)


def from_document(doc: dict, source: str = "<document>", text: str = "") -> JointDist:
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        _fail(source, text, "format_version", f"expected {FORMAT_VERSION}, got {version!r}")
    alphabets = doc.get("alphabets")
    if not isinstance(alphabets, list) or not alphabets:
        _fail(source, text, "alphabets", "expected a non-empty list of symbol lists")
    for i, a in enumerate(alphabets):
        if not isinstance(a, list) or not a or not all(isinstance(s, (str, int)) for s in a):
            _fail(source, text, "alphabets", f"entry {i} must be a non-empty list of symbols")
    metrics = doc.get("metrics", "discrete")
    if metrics == "discrete":
        tables = None
    elif isinstance(metrics, list) and len(metrics) == len(alphabets):
        tables = [None if m == "discrete" else m for m in metrics]
    else:
        _fail(source, text, "metrics", "expected \"discrete\" or one table per coordinate")
    try:
        space = ProductSpace(alphabets, tables)
    except (CorrlabError, ValueError, TypeError) as exc:
        _fail(source, text, "metrics" if tables else "alphabets", str(exc))
    pmf = doc.get("pmf")
    if not isinstance(pmf, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in pmf):
        _fail(source, text, "pmf", "expected a flat list of numbers")
    if len(pmf) != space.cells:
        _fail(source, text, "pmf", f"expected {space.cells} entries for shape {space.shape}, got {len(pmf)}")
    try:
        return make_joint(space, np.array(pmf, dtype=float).reshape(space.shape))
    except CapacityExceeded:
        raise
    except CorrlabError as exc:
        _fail(source, text, "pmf", str(exc))


def load(path) -> JointDist:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DistFileError(f"{path}: {exc.strerror}") from None
    return loads(text, str(path))


def to_document(dist: JointDist) -> dict:
    space = dist.space
    doc = {
        "format_version": FORMAT_VERSION,
        "alphabets": [list(a.symbols) for a in space.alphabets],
    }
    if space.is_discrete:
        doc["metrics"] = "discrete"
    else:
        doc["metrics"] = [
            "discrete" if np.array_equal(m, 1 - np.eye(len(m))) else m.tolist() for m in space.metrics
        ]
    doc["pmf"] = [float(v) for v in dist.flat]
    return doc


def dumps(dist: JointDist) -> str:
    """Canonical text: two-space indentation, shortest round-trip float repr."""
    doc = to_document(dist)
    lines = ['  "format_version": %d' % doc["format_version"]]
    alph = ",\n".join("    " + json.dumps(a) for a in doc["alphabets"])
    lines.append('  "alphabets": [\n' + alph + "\n  ]")
    if isinstance(doc["metrics"], str):
        lines.append('  "metrics": "discrete"')
    else:
        mets = ",\n".join("    " + json.dumps(m) for m in doc["metrics"])
        lines.append('  "metrics": [\n' + mets + "\n  ]")
    lines.append('  "pmf": ' + json.dumps(doc["pmf"]))
    return "{\n" + ",\n".join(lines) + "\n}\n"


def save(dist: JointDist, path) -> Path:
    path = Path(path)
    path.write_text(dumps(dist))
    return path
