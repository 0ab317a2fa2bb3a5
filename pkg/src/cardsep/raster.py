"""Gray image container, binary PGM I/O, crop and rotation."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from cardsep import fixedpoint as fx
from cardsep.errors import BoundsError, DomainError, PgmFormatError, PgmLengthError

MAX_ROTATION = 45.0


class GrayImage:
    """Immutable 8-bit single-channel raster.

    Pixels are held in a read-only ``(height, width)`` uint8 array.
    """

    __slots__ = ("_a",)

    def __init__(self, pixels):
        if _is_frozen_u8(pixels):
            a = pixels
        else:
            raw = np.asarray(pixels)
            if raw.dtype != np.uint8:
                if raw.size and (raw.min() < 0 or raw.max() > 255):
                    raise ValueError("intensities must lie in [0, 255]")
            a = np.array(raw, dtype=np.uint8, copy=True)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise ValueError(f"expected a non-empty 2-D raster, got shape {a.shape}")
        a.setflags(write=False)
        self._a = a

    @classmethod
    def filled(cls, width: int, height: int, value: int = 255) -> GrayImage:
        return cls(np.full((height, width), value, dtype=np.uint8))

    @property
    def array(self) -> np.ndarray:
        return self._a

    @property
    def width(self) -> int:
        return self._a.shape[1]

    @property
    def height(self) -> int:
        return self._a.shape[0]

    @property
    def pixels(self) -> bytes:
        """Row-major pixel bytes."""
        return self._a.tobytes()

    def __eq__(self, other) -> bool:
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self._a.shape == other._a.shape and bool(np.array_equal(self._a, other._a))

    def __hash__(self):
        return hash((self._a.shape, self._a.tobytes()))

    def __repr__(self) -> str:
        return f"GrayImage({self.width}x{self.height})"


def _is_frozen_u8(a) -> bool:
    return isinstance(a, np.ndarray) and a.dtype == np.uint8 and not a.flags.writeable


@dataclass(frozen=True)
class Rect:
    x: int
    y: int
    w: int
    h: int

    @property
    def x2(self) -> int:
        return self.x + self.w

    @property
    def y2(self) -> int:
        return self.y + self.h

    @property
    def area(self) -> int:
        return self.w * self.h

    def inside(self, width: int, height: int) -> bool:
        return self.x >= 0 and self.y >= 0 and self.w >= 1 and self.h >= 1 \
            and self.x2 <= width and self.y2 <= height

    def intersection(self, other: Rect) -> int:
        iw = min(self.x2, other.x2) - max(self.x, other.x)
        ih = min(self.y2, other.y2) - max(self.y, other.y)
        return iw * ih if iw > 0 and ih > 0 else 0

    def iou(self, other: Rect) -> float:
        inter = self.intersection(other)
        return inter / (self.area + other.area - inter) if inter else 0.0

    def slices(self) -> tuple[slice, slice]:
        return slice(self.y, self.y2), slice(self.x, self.x2)


# ---------------------------------------------------------------------------
# PGM (P5, maxval 255)
# ---------------------------------------------------------------------------

_TOKEN = re.compile(rb"\S+")


def load_pgm(data: bytes) -> GrayImage:
    """Parse a binary PGM.

    Comment lines starting with ``#`` are allowed between header tokens. A
    single whitespace byte separates the maxval from the pixel payload.
    """
    pos = 0
    tokens = []
    while len(tokens) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos >= len(data):
            raise PgmFormatError(f"unexpected end of header after {len(tokens)} token(s)")
        if data[pos:pos + 1] == b"#":
            nl = data.find(b"\n", pos)
            pos = len(data) if nl < 0 else nl + 1
            continue
        m = _TOKEN.match(data, pos)
        tok = m.group()
        if b"#" in tok:
            tok = tok[:tok.index(b"#")]
        tokens.append(tok)
        pos += len(tok)

    magic, sw, sh, smax = tokens
    if magic != b"P5":
        raise PgmFormatError(f"bad magic {magic!r}, expected b'P5'")
    dims = []
    for name, tok in (("width", sw), ("height", sh), ("maxval", smax)):
        if not tok.isdigit():
            raise PgmFormatError(f"bad {name} token {tok!r}")
        dims.append(int(tok))
    width, height, maxval = dims
    if width < 1 or height < 1:
        raise PgmFormatError(f"bad dimensions {width}x{height}")
    if maxval != 255:
        raise PgmFormatError(f"bad maxval token {smax!r}, only 255 is supported")
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise PgmFormatError("missing whitespace after maxval")
    pos += 1

    expected = width * height
    payload = data[pos:pos + expected]
    if len(payload) < expected:
        raise PgmLengthError(expected, len(payload))
    return GrayImage(np.frombuffer(payload, dtype=np.uint8).reshape(height, width))


def save_pgm(img: GrayImage) -> bytes:
    return b"P5\n%d %d\n255\n" % (img.width, img.height) + img.pixels


def read_pgm(path) -> GrayImage:
    with open(path, "rb") as f:
        return load_pgm(f.read())


def write_pgm(path, img: GrayImage) -> None:
    with open(path, "wb") as f:
        f.write(save_pgm(img))


# ---------------------------------------------------------------------------
# Geometry
# ---------------------------------------------------------------------------

def crop(img: GrayImage, r: Rect) -> GrayImage:
    if not r.inside(img.width, img.height):
        raise BoundsError(f"{r} is not inside a {img.width}x{img.height} image")
    return GrayImage(img.array[r.slices()])


def _trig(angle: float, integer: bool):
    if integer:
        q = fx.to_fixed(angle)
        return fx.cos_deg(q), fx.sin_deg(q)
    rad = math.radians(angle)
    return math.cos(rad), math.sin(rad)


def rotated_size(w: int, h: int, angle: float, integer: bool = False) -> tuple[int, int]:
    """Canvas that holds every source pixel after rotation.

    Each side keeps the parity of the source side so that the center pixel
    of an odd-sized image stays on the pixel grid.
    """
    c, s = (abs(v) for v in _trig(angle, integer))
    if integer:
        nw = (w * c + h * s + fx.ONE - 1) >> fx.FRAC_BITS
        nh = (w * s + h * c + fx.ONE - 1) >> fx.FRAC_BITS
    else:
        nw = math.ceil(w * c + h * s - 1e-9)
        nh = math.ceil(w * s + h * c - 1e-9)
    nw += (nw - w) % 2
    nh += (nh - h) % 2
    return nw, nh


def source_coords(w: int, h: int, out_w: int, out_h: int, angle: float, integer: bool = False):
    """Nearest source pixel (sx, sy) for every output pixel, by inverse mapping.

    Positive angles rotate counter-clockwise as displayed (y axis down), so a
    horizontal baseline rotated by a positive angle rises left to right.
    """
    # Offsets from the centers in half-pixel units keep everything integral.
    x2 = (2 * np.arange(out_w, dtype=np.int64) - (out_w - 1))[None, :]
    y2 = (2 * np.arange(out_h, dtype=np.int64) - (out_h - 1))[:, None]
    c, s = _trig(angle, integer)
    if integer:
        sh = fx.FRAC_BITS + 1
        sx = ((w * fx.ONE) + x2 * c - y2 * s) >> sh
        sy = ((h * fx.ONE) + x2 * s + y2 * c) >> sh
    else:
        sx = np.floor((w + x2 * c - y2 * s) / 2.0).astype(np.int64)
        sy = np.floor((h + x2 * s + y2 * c) / 2.0).astype(np.int64)
    return sx, sy


def rotate(img: GrayImage, angle: float, fill: int = 255, integer: bool = False) -> GrayImage:
    """Rotate about the image center with nearest-neighbour sampling.

    The canvas grows to hold the whole source; uncovered pixels get ``fill``.
    ``integer=True`` uses Q16.16 fixed-point trigonometry.
    """
    if not abs(angle) <= MAX_ROTATION:
        raise DomainError(f"rotation angle {angle} outside [-{MAX_ROTATION}, {MAX_ROTATION}]")
    if angle == 0:
        return img
    w, h = img.width, img.height
    out_w, out_h = rotated_size(w, h, angle, integer)
    sx, sy = source_coords(w, h, out_w, out_h, angle, integer)
    ok = (sx >= 0) & (sx < w) & (sy >= 0) & (sy < h)
    out = np.full((out_h, out_w), fill, dtype=np.uint8)
    ys, xs = np.broadcast_arrays(sy, sx)
    out[ok] = img.array[ys[ok], xs[ok]]
    return GrayImage(out)
