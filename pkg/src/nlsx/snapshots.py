"""NLSX1 field snapshot format.

ASCII header (one item per line): ``NLSX1``, ``n=<int>``, ``L=<float>``,
``t=<float>``, ``mu=<0|1>``, then a blank line, then n^2*2 little-endian
64-bit floats (re, im interleaved, row-major).  Round-trips are bit-exact:
floats are written with shortest round-trip repr and the payload is the raw
complex128 buffer.
"""

import numpy as np

from .grid import Field, make_grid

MAGIC = "NLSX1"


class SnapshotFormatError(ValueError):
    """Malformed NLSX1 header or payload."""


def save_snapshot(field, mu, path):
    """Write a field (with its nonlinearity flavor mu) to an NLSX1 file."""
    if mu not in (0, 1):
        raise ValueError(f"mu must be 0 or 1, got {mu!r}")
    g = field.grid
    header = (
        f"{MAGIC}\n"
        f"n={g.n}\n"
        f"L={float(g.half_width)!r}\n"
        f"t={float(field.time)!r}\n"
        f"mu={int(mu)}\n"
        "\n"
    )
    payload = np.ascontiguousarray(field.values, dtype="<c16").tobytes()
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(payload)


def _parse_header_line(line, key, conv, blob_name):
    text = line.decode("ascii", errors="replace")
    if not text.startswith(key + "="):
        raise SnapshotFormatError(f"malformed header in {blob_name}: expected "
                                  f"'{key}=...', got {text!r}")
    try:
        return conv(text[len(key) + 1:])
    except ValueError as exc:
        raise SnapshotFormatError(
            f"malformed header in {blob_name}: bad value for {key}: {exc}"
        ) from exc


def load_snapshot(path):
    """Read an NLSX1 file; returns (Field, mu)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    lines = blob.split(b"\n", 6)
    if len(lines) < 7 or lines[0] != MAGIC.encode("ascii"):
        raise SnapshotFormatError(f"malformed header in {path}: missing {MAGIC} magic")
    n = _parse_header_line(lines[1], "n", int, str(path))
    half_width = _parse_header_line(lines[2], "L", float, str(path))
    t = _parse_header_line(lines[3], "t", float, str(path))
    mu = _parse_header_line(lines[4], "mu", int, str(path))
    if lines[5] != b"":
        raise SnapshotFormatError(f"malformed header in {path}: missing blank line")
    if mu not in (0, 1):
        raise SnapshotFormatError(f"malformed header in {path}: mu={mu} not in {{0,1}}")
    try:
        grid = make_grid(n, half_width)  # rejects non-power-of-two n
    except ValueError as exc:
        raise SnapshotFormatError(f"malformed header in {path}: {exc}") from exc
    payload = lines[6]
    expected = n * n * 16
    if len(payload) < expected:
        header_len = len(blob) - len(payload)
        raise SnapshotFormatError(
            f"truncated payload at byte {header_len + len(payload)}: "
            f"expected {expected} payload bytes, got {len(payload)}"
        )
    if len(payload) > expected:
        raise SnapshotFormatError(
            f"oversized payload: expected {expected} bytes, got {len(payload)}"
        )
    values = np.frombuffer(payload, dtype="<c16").reshape(n, n)
    return Field(grid, values.astype(np.complex128), float(t)), mu
