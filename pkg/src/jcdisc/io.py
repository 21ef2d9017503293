"""Problem files, CSV/JSON artifacts and run manifests.

Problem file (JSON, one problem per file)::

    {
      "input_alphabet": ["0", "1"],
      "output_alphabet_z": ["0", "1"],
      "output_alphabet_y": ["0", "1"],
      "comm": [[0.9, 0.1], [0.1, 0.9]],
      "w":    [[0.9, 0.1], [0.9, 0.1]],
      "v":    [[0.9, 0.1], [0.1, 0.9]],
      "cost": [0, 1],
      "budget": 0.8
    }

Tables are written as CSV with ``# key: value`` preamble lines followed by a
header row, or as JSON ``{"kind", "units", "columns", "rows", "meta"}``.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import tempfile
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from .core import ChannelProblem, CostSpec, DiscreteChannel, DomainError, ShapeError

SIG_DIGITS = 12
NATS_PER_BIT = math.log(2.0)
REQUIRED_KEYS = ("comm", "w", "v", "cost", "budget")


class ProblemFileError(DomainError):
    """Problem file could not be parsed; the message names the line or field."""


def _matrix(doc: dict, key: str) -> np.ndarray:
    val = doc[key]
    if not isinstance(val, list) or not val or not all(isinstance(r, list) for r in val):
        raise ProblemFileError(f"field '{key}': expected a non-empty list of rows")
    width = len(val[0])
    for i, row in enumerate(val):
        if len(row) != width:
            raise ProblemFileError(f"field '{key}[{i}]': row has {len(row)} entries, expected {width}")
        for j, x in enumerate(row):
            if isinstance(x, bool) or not isinstance(x, (int, float)):
                raise ProblemFileError(f"field '{key}[{i}][{j}]': not a number")
    m = np.asarray(val, dtype=np.float64)
    for i, row in enumerate(m):
        if np.any(row < 0) or abs(row.sum() - 1.0) > 1e-9:
            raise ProblemFileError(f"field '{key}[{i}]': not a probability vector (sum {row.sum()!r})")
    return m


def parse_problem(text: str, source: str = "<problem>") -> ChannelProblem:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"{source}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ProblemFileError(f"{source}: top level must be a JSON object")
    for key in REQUIRED_KEYS:
        if key not in doc:
            raise ProblemFileError(f"{source}: missing field '{key}'")
    comm, w, v = (_matrix(doc, k) for k in ("comm", "w", "v"))
    cost = doc["cost"]
    if not isinstance(cost, list) or any(isinstance(c, bool) or not isinstance(c, (int, float)) for c in cost):
        raise ProblemFileError(f"{source}: field 'cost': expected a list of numbers")
    budget = doc["budget"]
    if isinstance(budget, bool) or not isinstance(budget, (int, float)):
        raise ProblemFileError(f"{source}: field 'budget': expected a number")
    sizes = {"input_alphabet": comm.shape[0], "output_alphabet_z": comm.shape[1],
             "output_alphabet_y": w.shape[1]}
    for key, size in sizes.items():
        if key in doc and len(doc[key]) != size:
            raise ProblemFileError(f"{source}: field '{key}': {len(doc[key])} labels for {size} symbols")
    labels = doc.get("input_alphabet")
    try:
        return ChannelProblem(
            comm=DiscreteChannel(comm, in_labels=_labels(labels), out_labels=_labels(doc.get("output_alphabet_z"))),
            w=DiscreteChannel(w, in_labels=_labels(labels), out_labels=_labels(doc.get("output_alphabet_y"))),
            v=DiscreteChannel(v, in_labels=_labels(labels), out_labels=_labels(doc.get("output_alphabet_y"))),
            cost=CostSpec(np.asarray(cost, dtype=np.float64), float(budget)),
        )
    except (DomainError, ShapeError) as exc:
        raise ProblemFileError(f"{source}: {exc}") from None


def _labels(seq) -> Optional[tuple]:
    return None if seq is None else tuple(str(s) for s in seq)


def load_problem(path: str) -> ChannelProblem:
    with open(path, encoding="utf-8") as fh:
        return parse_problem(fh.read(), source=path)


def problem_to_dict(problem: ChannelProblem) -> dict:
    doc = {}
    if problem.comm.in_labels is not None:
        doc["input_alphabet"] = list(problem.comm.in_labels)
    if problem.comm.out_labels is not None:
        doc["output_alphabet_z"] = list(problem.comm.out_labels)
    if problem.w.out_labels is not None:
        doc["output_alphabet_y"] = list(problem.w.out_labels)
    doc.update({
        "comm": problem.comm.matrix.tolist(),
        "w": problem.w.matrix.tolist(),
        "v": problem.v.matrix.tolist(),
        "cost": problem.cost.costs.tolist(),
        "budget": problem.cost.budget,
    })
    return doc


def problem_hash(problem: ChannelProblem) -> str:
    canon = json.dumps({k: v for k, v in problem_to_dict(problem).items() if k in REQUIRED_KEYS},
                       sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


# ---------------------------------------------------------------- tables

def fmt(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.{SIG_DIGITS}g}"


def round_sig(x):
    """Round to the printed precision; non-finite values become strings for JSON."""
    if x is None:
        return None
    if isinstance(x, (list, tuple)):
        return [round_sig(v) for v in x]
    if isinstance(x, dict):
        return {k: round_sig(v) for k, v in x.items()}
    if isinstance(x, (bool, str)):
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    if not math.isfinite(x):
        return fmt(x)
    return float(fmt(x))


def to_units(values, units: str):
    if units == "nats":
        return values
    if units == "bits":
        return np.asarray(values, dtype=np.float64) / NATS_PER_BIT
    raise DomainError(f"unknown units {units!r}")


def render_csv(columns: Sequence[str], rows: Iterable[Sequence[float]], meta: dict) -> str:
    buf = io.StringIO()
    for key, val in meta.items():
        buf.write(f"# {key}: {val}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def parse_csv(text: str) -> tuple[dict, list[str], np.ndarray]:
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, val = line[1:].partition(":")
            meta[key.strip()] = val.strip()
        elif line.strip():
            body.append(line)
    reader = csv.reader(body)
    columns = next(reader)
    rows = np.array([[float(v) for v in r] for r in reader], dtype=np.float64)
    return meta, columns, rows.reshape(-1, len(columns))


def render_json(kind: str, columns: Sequence[str], rows: Iterable[Sequence[float]],
                meta: dict) -> str:
    doc = {"kind": kind, "columns": list(columns),
           "rows": [round_sig(list(map(float, r))) for r in rows], "meta": meta}
    return dumps(doc)


def dumps(doc: Any) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def parse_json_table(text: str) -> tuple[dict, list[str], np.ndarray]:
    doc = json.loads(text)
    for key in ("kind", "columns", "rows", "meta"):
        if key not in doc:
            raise DomainError(f"table JSON missing '{key}'")
    cols = doc["columns"]
    rows = np.array(doc["rows"], dtype=np.float64).reshape(-1, len(cols))
    return doc["meta"], cols, rows


def write_atomic(path: str, text: str) -> None:
    """Write via a temp file in the target directory and rename over ``path``."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
