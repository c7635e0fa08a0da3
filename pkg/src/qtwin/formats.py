"""Reading and writing distribution, report and stats files."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Mapping

from .circuit import Circuit
from .errors import ParseError, ValidationError
from .metrics import Histogram
from .qasm import serialize_qasm

OUTPUT_DIR_ENV = "QTWIN_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "qtwin-out"
DIST_COLUMNS = ("bitstring", "probability", "count")


def output_dir(explicit: str | os.PathLike | None = None) -> Path:
    """``explicit``, else $QTWIN_OUTPUT_DIR, else ./qtwin-out."""
    return Path(explicit or os.environ.get(OUTPUT_DIR_ENV) or DEFAULT_OUTPUT_DIR)


def circuit_digest(c: Circuit) -> str:
    return hashlib.sha256(serialize_qasm(c).encode()).hexdigest()[:16]


def atomic_write(path: str | os.PathLike, text: str) -> Path:
    """Write via a temporary file in the same directory and rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


# --- distributions -----------------------------------------------------------


def distribution_rows(probs: Mapping[str, float], counts: Mapping[str, float]) -> list[tuple]:
    keys = sorted(set(probs) | set(counts))
    return [(k, probs.get(k, 0.0), counts.get(k, 0)) for k in keys]


def distribution_json(metadata: dict, probs: Mapping[str, float],
                      counts: Mapping[str, float]) -> str:
    rows = [{"bitstring": k, "probability": p, "count": n}
            for k, p, n in distribution_rows(probs, counts)]
    return dumps_json({"metadata": metadata, "distribution": rows})


def distribution_csv(metadata: dict, probs: Mapping[str, float],
                     counts: Mapping[str, float]) -> str:
    buf = io.StringIO()
    for key in sorted(metadata):
        buf.write(f"# {key}: {json.dumps(metadata[key], sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(DIST_COLUMNS)
    for k, p, n in distribution_rows(probs, counts):
        w.writerow([k, repr(float(p)), repr(n)])
    return buf.getvalue()


def _number(text: str, line: int, column: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ParseError(f"{column} {text!r} is not a number", line) from None
    if v < 0 or v != v:
        raise ParseError(f"{column} must be a nonnegative number, got {text!r}", line)
    return v


def parse_distribution_csv(text: str) -> tuple[dict, dict[str, float], dict[str, float]]:
    """(metadata, probabilities, counts) from the CSV layout; either column may be absent."""
    meta: dict = {}
    header: list[str] | None = None
    probs: dict[str, float] = {}
    counts: dict[str, float] = {}
    width = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, sep, value = line[1:].partition(":")
            if sep:
                try:
                    meta[key.strip()] = json.loads(value)
                except json.JSONDecodeError:
                    meta[key.strip()] = value.strip()
            continue
        cells = next(csv.reader([line]))
        if header is None:
            header = [c.strip() for c in cells]
            if "bitstring" not in header or not {"probability", "count"} & set(header):
                raise ParseError("header must name bitstring and probability and/or count",
                                 lineno)
            continue
        if len(cells) != len(header):
            raise ParseError(f"expected {len(header)} fields, found {len(cells)}", lineno)
        row = dict(zip(header, (c.strip() for c in cells)))
        key = row["bitstring"]
        if not key or set(key) - {"0", "1"}:
            raise ParseError(f"bitstring {key!r} must consist of 0 and 1", lineno)
        if width is None:
            width = len(key)
        elif len(key) != width:
            raise ParseError(f"bitstring {key!r} has {len(key)} bits, expected {width}", lineno)
        if key in probs or key in counts:
            raise ParseError(f"duplicate bitstring {key!r}", lineno)
        if "probability" in row:
            probs[key] = _number(row["probability"], lineno, "probability")
        if "count" in row:
            counts[key] = _number(row["count"], lineno, "count")
    if header is None:
        raise ParseError("no header row found")
    return meta, probs, counts


def parse_distribution_json(text: str) -> tuple[dict, dict[str, float], dict[str, float]]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON ({exc.msg})", exc.lineno, exc.colno) from None
    if not isinstance(doc, dict) or not isinstance(doc.get("distribution"), list):
        raise ValidationError("distribution JSON needs a 'distribution' list")
    probs, counts = {}, {}
    for i, row in enumerate(doc["distribution"]):
        if not isinstance(row, dict) or "bitstring" not in row:
            raise ValidationError(f"distribution entry {i} lacks a bitstring")
        if "probability" in row:
            probs[row["bitstring"]] = float(row["probability"])
        if "count" in row:
            counts[row["bitstring"]] = float(row["count"])
    return doc.get("metadata", {}), probs, counts


def load_distribution(path: str | os.PathLike) -> tuple[dict, Histogram]:
    """Read a distribution file into a histogram (counts if present, else probabilities)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    try:
        if path.suffix.lower() == ".json":
            meta, probs, counts = parse_distribution_json(text)
        else:
            meta, probs, counts = parse_distribution_csv(text)
    except ParseError as exc:
        err = ParseError(f"{path}: {exc.args[0]}")
        err.line, err.column = exc.line, exc.column
        raise err from None
    if counts and sum(counts.values()) > 0:
        return meta, Histogram(counts)
    return meta, Histogram(probs)
