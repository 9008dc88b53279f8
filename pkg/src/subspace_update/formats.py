"""Plain-text formats for matrices, update streams and tracking reports.

Matrix file::

    # optional comment lines
    rows cols
    x11 x12 ...
    ...

Update stream: header ``n p``, then one record of ``n + p`` floats per line,
``a_1 .. a_n b_1 .. b_p``. Floats are written with 17 significant digits,
which round-trips every finite float64 exactly.
"""

import csv
import math

import numpy as np

from .core import RankOneUpdate
from .exceptions import DimensionMismatchError, ParseError

REPORT_COLUMNS = ("step", "kind", "distance", "ortho_drift", "recon_residual", "wall_time_ns")


def format_float(x):
    return format(float(x), ".17g")


def _content_lines(text):
    """Yield ``(line_number, tokens)`` for non-blank, non-comment lines."""
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield lineno, stripped.split()


def _parse_floats(tokens, lineno):
    values = []
    for tok in tokens:
        try:
            value = float(tok)
        except ValueError:
            raise ParseError(f"not a number: {tok!r}", lineno) from None
        if not math.isfinite(value):
            raise ParseError(f"non-finite value: {tok!r}", lineno)
        values.append(value)
    return values


def _parse_header(lines, what):
    try:
        lineno, tokens = next(lines)
    except StopIteration:
        raise ParseError(f"missing {what} header") from None
    if len(tokens) != 2:
        raise ParseError(f"{what} header needs two integers", lineno)
    try:
        dims = tuple(int(t) for t in tokens)
    except ValueError:
        raise ParseError(f"{what} header needs two integers", lineno) from None
    if min(dims) < 1:
        raise ParseError(f"{what} dimensions must be positive", lineno)
    return lineno, dims


def parse_matrix(text):
    lines = _content_lines(text)
    header_line, (rows, cols) = _parse_header(lines, "matrix")
    data = []
    last = header_line
    for lineno, tokens in lines:
        if len(data) == rows:
            raise DimensionMismatchError(f"more than {rows} rows", lineno)
        if len(tokens) != cols:
            raise ParseError(f"expected {cols} values, got {len(tokens)}", lineno)
        data.append(_parse_floats(tokens, lineno))
        last = lineno
    if len(data) != rows:
        raise DimensionMismatchError(f"expected {rows} rows, got {len(data)}", last + 1)
    return np.array(data, dtype=np.float64).reshape(rows, cols)


def format_matrix(m):
    m = np.atleast_2d(np.asarray(m, dtype=np.float64))
    out = [f"{m.shape[0]} {m.shape[1]}"]
    out.extend(" ".join(format_float(x) for x in row) for row in m)
    return "\n".join(out) + "\n"


def read_matrix(path):
    with open(path) as fh:
        return parse_matrix(fh.read())


def write_matrix(path, m):
    with open(path, "w") as fh:
        fh.write(format_matrix(m))


def parse_update_stream(text):
    lines = _content_lines(text)
    _, (n, p) = _parse_header(lines, "update stream")
    updates = []
    for lineno, tokens in lines:
        if len(tokens) != n + p:
            raise ParseError(f"expected {n + p} values, got {len(tokens)}", lineno)
        values = np.array(_parse_floats(tokens, lineno))
        updates.append(RankOneUpdate(values[:n], values[n:]))
    return (n, p), updates


def read_update_stream(path, with_dims=False):
    """Read an update stream file; returns the list of updates
    (and ``(n, p)`` first when ``with_dims``)."""
    with open(path) as fh:
        dims, updates = parse_update_stream(fh.read())
    return (dims, updates) if with_dims else updates


def format_update_stream(updates, n, p):
    out = [f"{n} {p}"]
    for a, b in updates:
        out.append(" ".join(format_float(x) for x in np.concatenate([a, b])))
    return "\n".join(out) + "\n"


def write_update_stream(path, updates, n, p):
    with open(path, "w") as fh:
        fh.write(format_update_stream(updates, n, p))


def _opt(x):
    return "" if x is None or (isinstance(x, float) and math.isnan(x)) else format_float(x)


def write_report(fh, reports):
    """Write step reports as CSV to the open text file ``fh``."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for r in reports:
        writer.writerow(
            [
                r.step_index,
                r.kind.value,
                _opt(r.distance),
                format_float(r.ortho_drift),
                _opt(r.recon_residual),
                r.wall_time_ns,
            ]
        )


def read_report(fh):
    """Parse a report CSV back into a list of dicts with typed values."""
    reader = csv.DictReader(fh)
    if tuple(reader.fieldnames or ()) != REPORT_COLUMNS:
        raise ParseError(f"unexpected report header {reader.fieldnames}", 1)
    rows = []
    for row in reader:
        rows.append(
            {
                "step": int(row["step"]),
                "kind": row["kind"],
                "distance": float(row["distance"]) if row["distance"] else None,
                "ortho_drift": float(row["ortho_drift"]),
                "recon_residual": float(row["recon_residual"]) if row["recon_residual"] else None,
                "wall_time_ns": int(row["wall_time_ns"]),
            }
        )
    return rows
