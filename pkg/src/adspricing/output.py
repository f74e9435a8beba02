"""CSV/JSON rendering and atomic file output."""

from __future__ import annotations

import csv
import dataclasses
import enum
import io
import json
import math
import os
import sys
import tempfile
from typing import Iterable, Mapping, Sequence

import numpy as np

from adspricing.errors import IoFailure

FORMATS = ("csv", "json")


def to_jsonable(obj):
    """Plain JSON types from results, enums, numpy scalars and arrays."""
    if hasattr(obj, "as_dict"):
        return to_jsonable(obj.as_dict())
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, Mapping):
        return {str(to_jsonable(k)): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(x) for x in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if dataclasses.is_dataclass(obj):
        return to_jsonable({f.name: getattr(obj, f.name) for f in dataclasses.fields(obj)})
    return obj


def format_json(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2) + "\n"


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, enum.Enum):
        return x.value
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".12g")
    return str(x)


def format_csv(rows: Iterable[Mapping], columns: Sequence[str]) -> str:
    """Header plus one line per row; floats at 12 significant digits, '\\n' endings."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def write_text(text: str, path: str | os.PathLike | None) -> None:
    """Write to ``path`` via a temp file and rename, or to stdout when no path."""
    if path is None:
        sys.stdout.write(text)
        return
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    tmp = None
    try:
        fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        if tmp is not None and os.path.exists(tmp):
            os.unlink(tmp)
        raise IoFailure(f"cannot write {path}: {exc.strerror or exc}") from exc


def emit(results, fmt: str = "json", path=None, rows: Iterable[Mapping] | None = None, columns=None) -> str:
    """Render ``results`` and write them out; returns the rendered text.

    CSV needs ``rows`` and ``columns`` unless ``results`` provides
    ``rows()``/``columns()`` itself (as a region map does).
    """
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}")
    if fmt == "json":
        text = format_json(results)
    else:
        if rows is None:
            rows, columns = results.rows(), results.columns()
        text = format_csv(rows, columns)
    write_text(text, path)
    return text
