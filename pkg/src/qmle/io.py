"""Problem files (JSON) and convergence traces (CSV).

Problem file layout::

    {
      "format_version": 1,
      "dim": 2,
      "elements": [ [[[re, im], [re, im]], [[re, im], [re, im]]], ... ],
      "weights": [0.75, 0.25],          # or "counts": [3, 1], never both
      "true_state": [[[re, im], ...], ...],   # optional
      "metadata": {...}                 # optional, free-form
    }

Matrices are row-major lists of ``[re, im]`` pairs. Floats are written with
``repr`` precision so a save/load cycle is bit-exact.
"""

import csv
import json

import numpy as np

from .errors import ParseError, QmleError, ValidationError
from .model import MeasurementEnsemble
from .problems import ProblemInstance

FORMAT_VERSION = 1
TRACE_COLUMNS = ("k", "f_rho", "f_rho_bar", "cert_rho", "cert_rho_bar", "tau", "elapsed_ms")


def encode_matrix(m):
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def decode_matrix(data, dim, where):
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{where}: matrix entries must be [re, im] number pairs ({exc})") from exc
    if arr.shape != (dim, dim, 2):
        raise ValidationError(f"{where}: expected shape ({dim}, {dim}, 2), got {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def problem_to_dict(inst: ProblemInstance):
    ens = inst.ensemble
    out = {
        "format_version": FORMAT_VERSION,
        "dim": ens.dim,
        "elements": [encode_matrix(m) for m in ens.elements],
    }
    if inst.counts is not None:
        out["counts"] = [int(c) for c in inst.counts]
    else:
        out["weights"] = [float(w) for w in ens.weights]
    if inst.true_state is not None:
        out["true_state"] = encode_matrix(inst.true_state)
    out["metadata"] = _jsonable(inst.metadata or {})
    return out


def problem_from_dict(data) -> ProblemInstance:
    if not isinstance(data, dict):
        raise ParseError("top level: expected a JSON object")
    for key in ("format_version", "dim", "elements"):
        if key not in data:
            raise ParseError(f"missing field {key!r}")
    if data["format_version"] != FORMAT_VERSION:
        raise ValidationError(f"format_version: unsupported value {data['format_version']!r}")
    dim = data["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ValidationError(f"dim: expected a positive integer, got {dim!r}")
    if not isinstance(data["elements"], list) or not data["elements"]:
        raise ValidationError("elements: expected a non-empty list")
    elements = np.array(
        [decode_matrix(m, dim, f"elements[{i}]") for i, m in enumerate(data["elements"])]
    )
    has_w, has_c = "weights" in data, "counts" in data
    if has_w == has_c:
        raise ValidationError("exactly one of 'weights' or 'counts' must be present")
    key = "weights" if has_w else "counts"
    try:
        values = np.asarray(data[key], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{key}: expected a list of numbers ({exc})") from exc
    if values.shape != (len(elements),):
        raise ValidationError(f"{key}: expected {len(elements)} entries, got shape {values.shape}")
    counts = None
    try:
        if has_w:
            ens = MeasurementEnsemble(elements, values)
        else:
            if np.any(values != np.round(values)) or np.any(values <= 0):
                raise ValidationError("counts: expected positive integers")
            counts = values.astype(np.int64)
            ens = MeasurementEnsemble.from_counts(elements, counts)
    except QmleError as exc:
        raise ValidationError(f"{key}: {exc}") from exc
    true_state = None
    if data.get("true_state") is not None:
        true_state = decode_matrix(data["true_state"], dim, "true_state")
    metadata = data.get("metadata") or {}
    if not isinstance(metadata, dict):
        raise ValidationError("metadata: expected an object")
    return ProblemInstance(ens, true_state, metadata, counts)


def save_problem(inst: ProblemInstance, path):
    with open(path, "w") as fh:
        json.dump(problem_to_dict(inst), fh, allow_nan=False)
        fh.write("\n")


def load_problem(path) -> ProblemInstance:
    with open(path) as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return problem_from_dict(data)


def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % x


def write_trace(report, path):
    """Write one CSV row per trace record, doubles at 17 significant digits."""
    if not report.records:
        raise ValueError("report has no records")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for rec in report.records:
            writer.writerow([_fmt(v) for v in rec])


def read_trace(path):
    """Parse a trace file into a dict of numpy column arrays."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != TRACE_COLUMNS:
            raise ParseError(f"{path}: line 1: unexpected header {header!r}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise ParseError(f"{path}: line {lineno}: {exc}") from exc
            if len(row) != len(TRACE_COLUMNS):
                raise ParseError(f"{path}: line {lineno}: expected {len(TRACE_COLUMNS)} fields")
    table = np.array(rows, dtype=float).reshape(-1, len(TRACE_COLUMNS))
    out = {name: table[:, i] for i, name in enumerate(TRACE_COLUMNS)}
    out["k"] = out["k"].astype(np.int64)
    return out


def load_returns(path):
    """Load an N x D matrix of non-negative returns from a CSV file."""
    try:
        data = np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not np.all(np.isfinite(data)):
        raise ParseError(f"{path}: non-finite value")
    return data

