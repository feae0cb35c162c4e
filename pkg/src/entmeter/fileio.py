"""Plain-text operator and channel files.

An operator file is UTF-8 text::

    dims: A=2,B=2 ; bside: B
    0.5 0  0 0  0 0  0.5 0
    ...

The header names the tensor factors in order with their dimensions and lists
the B-side labels.  Each following line is one matrix row, written as
whitespace-separated ``re imag`` pairs.  Blank lines and lines starting with
``#`` are ignored.

A channel file additionally carries an ``in: A'=2,B'=2 ; out: A=2,B=2`` line
and stores the Choi matrix in ``(S_A, A, B, S_B)`` order.  The ``dims`` line
is optional for channels; when present it must agree with the channel
dimensions.  With a single input and a single output label the file describes
a point-to-point channel, stored ``(S, B)``, which is embedded with trivial
``B'`` and ``A``.
"""

from __future__ import annotations

from pathlib import Path
from typing import TextIO

import numpy as np

from .channels import BipartiteChannel, embed_point_to_point
from .operators import HermitianOperator, SystemLayout


class FileFormatError(ValueError):
    """Malformed file or inconsistent dimension metadata."""


def _parse_pairs(text: str, what: str) -> list[tuple[str, int]]:
    out = []
    for item in filter(None, (p.strip() for p in text.split(","))):
        label, eq, dim = item.partition("=")
        if not eq or not label.strip():
            raise FileFormatError(f"{what}: expected label=dim, got {item!r}")
        try:
            d = int(dim)
        except ValueError:
            raise FileFormatError(f"{what}: dimension {dim.strip()!r} is not an integer") from None
        if d < 1:
            raise FileFormatError(f"{what}: dimension of {label.strip()!r} must be positive")
        out.append((label.strip(), d))
    if not out:
        raise FileFormatError(f"{what}: no factors listed")
    return out


def _parse_header(line: str) -> dict[str, str]:
    fields = {}
    for part in line.split(";"):
        key, colon, value = part.partition(":")
        key = key.strip().lower()
        if not colon or not key:
            raise FileFormatError(f"bad header segment {part.strip()!r}")
        if key in fields:
            raise FileFormatError(f"header key {key!r} repeated")
        fields[key] = value.strip()
    return fields


def _read_lines(source) -> tuple[list[dict[str, str]], list[str]]:
    if isinstance(source, (str, Path)):
        try:
            text = Path(source).read_text(encoding="utf-8")
        except UnicodeDecodeError as exc:
            raise FileFormatError(f"{source}: not UTF-8 text ({exc.reason})") from None
    else:
        text = source.read()
    headers, rows = [], []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if ":" in line:
            if rows:
                raise FileFormatError("header line after matrix rows")
            headers.append(_parse_header(line))
        else:
            rows.append(line)
    return headers, rows


def _parse_matrix(rows: list[str], dim: int) -> np.ndarray:
    if len(rows) != dim:
        raise FileFormatError(f"expected {dim} matrix rows, found {len(rows)}")
    m = np.empty((dim, dim), dtype=complex)
    for i, row in enumerate(rows):
        try:
            vals = np.array([float(tok) for tok in row.split()])
        except ValueError as exc:
            raise FileFormatError(f"row {i + 1}: {exc}") from None
        if vals.size != 2 * dim:
            raise FileFormatError(f"row {i + 1}: expected {2 * dim} numbers (re imag pairs), found {vals.size}")
        m[i] = vals[0::2] + 1j * vals[1::2]
    if not np.all(np.isfinite(m)):
        raise FileFormatError("matrix contains non-finite entries")
    return m


def _layout_from(fields: dict[str, str]) -> SystemLayout:
    unknown = set(fields) - {"dims", "bside"}
    if unknown:
        raise FileFormatError(f"unknown header keys {sorted(unknown)}")
    if "dims" not in fields:
        raise FileFormatError("missing 'dims:' header")
    factors = _parse_pairs(fields["dims"], "dims")
    b_side = [b.strip() for b in fields.get("bside", "").split(",") if b.strip()]
    try:
        return SystemLayout(tuple(factors), frozenset(b_side))
    except ValueError as exc:
        raise FileFormatError(str(exc)) from None


def load_operator(source) -> HermitianOperator:
    """Read an operator file (path or text stream)."""
    headers, rows = _read_lines(source)
    if len(headers) != 1:
        raise FileFormatError(f"expected one header line, found {len(headers)}")
    layout = _layout_from(headers[0])
    m = _parse_matrix(rows, layout.dim)
    try:
        return HermitianOperator(m, layout)
    except ValueError as exc:
        raise FileFormatError(str(exc)) from None


def load_channel(source) -> BipartiteChannel:
    """Read a channel file (path or text stream)."""
    headers, rows = _read_lines(source)
    io = [h for h in headers if "in" in h or "out" in h]
    rest = [h for h in headers if h not in io]
    if len(io) != 1 or len(rest) > 1:
        raise FileFormatError("channel file needs one 'in: ... ; out: ...' header and at most one 'dims:' header")
    fields = io[0]
    if set(fields) != {"in", "out"}:
        raise FileFormatError(f"channel header must have exactly the keys 'in' and 'out', got {sorted(fields)}")
    ins = _parse_pairs(fields["in"], "in")
    outs = _parse_pairs(fields["out"], "out")
    if len(ins) != len(outs) or len(ins) not in (1, 2):
        raise FileFormatError("channel needs one input and one output, or two of each")
    d_in = [d for _, d in ins]
    d_out = [d for _, d in outs]
    total = int(np.prod(d_in + d_out))
    if rest:
        layout = _layout_from(rest[0])
        if layout.dim != total:
            raise FileFormatError(f"dims header gives dimension {layout.dim}, channel needs {total}")
        if len(ins) == 2 and layout.dims != (d_in[0], d_out[0], d_out[1], d_in[1]):
            raise FileFormatError(
                f"dims header {layout.dims} does not match Choi order (S_A, A, B, S_B) = "
                f"{(d_in[0], d_out[0], d_out[1], d_in[1])}"
            )
    m = _parse_matrix(rows, total)
    try:
        if len(ins) == 1:
            return embed_point_to_point(m, d_in[0], d_out[0])
        return BipartiteChannel(m, tuple(d_in), tuple(d_out))
    except ValueError as exc:
        raise FileFormatError(str(exc)) from None


def _format_rows(m: np.ndarray) -> str:
    return "\n".join(" ".join(f"{float(z.real)!r} {float(z.imag)!r}" for z in row) for row in m) + "\n"


def _format_pairs(pairs) -> str:
    return ",".join(f"{lab}={d}" for lab, d in pairs)


def dump_operator(op: HermitianOperator, stream: TextIO | None = None) -> str:
    """Serialize ``op``; numbers round-trip exactly."""
    bside = ",".join(lab for lab in op.labels if lab in op.layout.b_side)
    text = f"dims: {_format_pairs(op.layout.factors)} ; bside: {bside}\n" + _format_rows(op.matrix)
    if stream is not None:
        stream.write(text)
    return text


def dump_channel(n: BipartiteChannel, stream: TextIO | None = None) -> str:
    """Serialize a bipartite channel with both headers."""
    (da_in, db_in), (da, db) = n.in_dims, n.out_dims
    text = (
        f"in: A'={da_in},B'={db_in} ; out: A={da},B={db}\n"
        f"dims: {_format_pairs(n.choi.layout.factors)} ; bside: B,S_B\n" + _format_rows(n.matrix)
    )
    if stream is not None:
        stream.write(text)
    return text


def save_operator(op: HermitianOperator, path) -> None:
    Path(path).write_text(dump_operator(op), encoding="utf-8")


def save_channel(n: BipartiteChannel, path) -> None:
    Path(path).write_text(dump_channel(n), encoding="utf-8")


__all__ = [
    "FileFormatError",
    "dump_channel",
    "dump_operator",
    "load_channel",
    "load_operator",
    "save_channel",
    "save_operator",
]
