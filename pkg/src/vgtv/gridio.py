"""Grayscale image and parameter-grid file I/O.

Two formats:

* PGM, binary ``P5`` or ASCII ``P2``, 8-bit.  Loading divides by maxval so
  pixel values land in [0, 1]; saving clamps to [0, 1] and quantises with
  round-half-to-even at maxval 255.
* A plain-text float grid (extension ``.fgrid``) that round-trips float64
  exactly: a magic line ``FGRID``, a line ``<rows> <cols> <spacing>``, then
  one ``repr`` value per line in row-major order.  Used for parameter
  fields, dual-field components and intermediate states.

Parse failures raise :class:`ParseError` carrying the byte offset of the
offending (or missing) byte.
"""

from __future__ import annotations

import numpy as np

from .calculus import ScalarImage, default_spacing

__all__ = ["ParseError", "load_image", "save_image", "load_grid_bytes", "MAX_PIXELS"]

MAX_PIXELS = 1 << 24  # refuse absurd headers before allocating


class ParseError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


def _tokens(data: bytes, start: int):
    """Yield (token, offset) over whitespace-separated tokens, '#' comments skipped."""
    i = start
    n = len(data)
    while i < n:
        c = data[i:i + 1]
        if c.isspace():
            i += 1
        elif c == b"#":
            while i < n and data[i:i + 1] != b"\n":
                i += 1
        else:
            j = i
            while j < n and not data[j:j + 1].isspace() and data[j:j + 1] != b"#":
                j += 1
            yield data[i:j], i
            i = j


def _int_token(tokens, what: str, total: int):
    try:
        tok, off = next(tokens)
    except StopIteration:
        raise ParseError(f"unexpected end of header, missing {what}", total) from None
    try:
        value = int(tok)
    except ValueError:
        raise ParseError(f"malformed {what} {tok!r}", off) from None
    return value, off, off + len(tok)


def _parse_pgm(data: bytes, h):
    tokens = _tokens(data, 0)
    magic, off = next(tokens)
    if magic not in (b"P2", b"P5"):
        raise ParseError(f"unknown format {magic!r}", off)
    width, woff, _ = _int_token(tokens, "width", len(data))
    height, hoff, _ = _int_token(tokens, "height", len(data))
    maxval, moff, mend = _int_token(tokens, "maxval", len(data))
    if width < 1 or height < 1 or width * height > MAX_PIXELS:
        raise ParseError(f"dimension overflow: {width} x {height}", woff)
    if not 0 < maxval <= 255:
        raise ParseError(f"unsupported maxval {maxval}", moff)

    if magic == b"P2":
        values = np.empty(width * height)
        count = 0
        for tok, toff in tokens:
            if count >= width * height:
                raise ParseError("trailing data after pixel values", toff)
            try:
                v = int(tok)
            except ValueError:
                raise ParseError(f"malformed pixel value {tok!r}", toff) from None
            if not 0 <= v <= maxval:
                raise ParseError(f"pixel value {v} outside [0, {maxval}]", toff)
            values[count] = v
            count += 1
        if count < width * height:
            raise ParseError(
                f"truncated pixel data: got {count} of {width * height} values",
                len(data))
        grid = values.reshape(height, width) / maxval
    else:
        # single whitespace byte separates the maxval token from the payload
        payload_start = mend + 1
        payload = data[payload_start:payload_start + width * height]
        if len(payload) < width * height:
            raise ParseError(
                f"truncated P5 payload: expected {width * height} bytes from "
                f"offset {payload_start}", len(data))
        grid = np.frombuffer(payload, dtype=np.uint8).astype(float)
        grid = grid.reshape(height, width) / maxval
    return ScalarImage(grid, h if h is not None else default_spacing(grid.shape))


def _parse_fgrid(data: bytes, h):
    lines = data.split(b"\n")
    offsets = np.cumsum([0] + [len(ln) + 1 for ln in lines[:-1]])
    if len(lines) < 2:
        raise ParseError("missing float-grid dimension line", len(data))
    dims = lines[1].split()
    if len(dims) != 3:
        raise ParseError(f"malformed dimension line {lines[1]!r}", int(offsets[1]))
    try:
        rows, cols, spacing = int(dims[0]), int(dims[1]), float(dims[2])
    except ValueError:
        raise ParseError(f"malformed dimension line {lines[1]!r}", int(offsets[1])) from None
    if rows < 1 or cols < 1 or rows * cols > MAX_PIXELS:
        raise ParseError(f"dimension overflow: {rows} x {cols}", int(offsets[1]))
    values = np.empty(rows * cols)
    count = 0
    for k in range(2, len(lines)):
        line = lines[k].strip()
        if not line:
            continue
        if count >= rows * cols:
            raise ParseError("trailing data after grid values", int(offsets[k]))
        try:
            values[count] = float(line)
        except ValueError:
            raise ParseError(f"malformed value {line!r}", int(offsets[k])) from None
        count += 1
    if count < rows * cols:
        raise ParseError(
            f"truncated grid: got {count} of {rows * cols} values", len(data))
    return ScalarImage(values.reshape(rows, cols),
                       h if h is not None else spacing)


def load_grid_bytes(data: bytes, h: float | None = None) -> ScalarImage:
    """Parse PGM or FGRID content (sniffed from the magic token)."""
    if data.startswith(b"P5") or data.startswith(b"P2"):
        return _parse_pgm(data, h)
    if data.startswith(b"FGRID"):
        return _parse_fgrid(data, h)
    raise ParseError(f"unknown magic {data[:5]!r}", 0)


def load_image(path, h: float | None = None) -> ScalarImage:
    """Load a PGM image (normalised to [0, 1]) or a raw float grid.

    ``h`` overrides the grid spacing; by default PGM files get
    1/max(H, W) and float grids carry their own.
    """
    with open(path, "rb") as handle:
        data = handle.read()
    return load_grid_bytes(data, h)


def save_image(img: ScalarImage, path) -> None:
    """Write PGM P5 for ``.pgm`` paths, the lossless float grid otherwise."""
    path = str(path)
    if path.endswith(".pgm"):
        quant = np.rint(np.clip(img.data, 0.0, 1.0) * 255.0).astype(np.uint8)
        header = f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode()
        with open(path, "wb") as handle:
            handle.write(header + quant.tobytes())
        return
    rows, cols = img.shape
    out = [b"FGRID", f"{rows} {cols} {img.h!r}".encode()]
    out.extend(repr(float(v)).encode() for v in img.data.ravel())
    with open(path, "wb") as handle:
        handle.write(b"\n".join(out) + b"\n")
