"""Synthetic business cards with region-level ground truth.

Cards are gray paper with a flash-like brightness falloff and sensor noise,
optionally overlaid with light stripes and a mid-tone texture patch. Text
lines are rows of dark glyph boxes sitting on a (possibly skewed) baseline;
logos are filled or hollow dark shapes; rules are thin dark lines. Element
positions are drawn by rejection sampling so that elements never come closer
than two blocks of the default block size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from cardsep.background import default_block_size
from cardsep.components import Label
from cardsep.evaluation import GroundTruthRegion
from cardsep.raster import GrayImage, Rect

PAPER_MAX = 247
INK_MAX = 110


@dataclass(frozen=True)
class SynthCardSpec:
    width: int = 1024
    height: int = 768
    n_text_lines: int = 4
    # one angle per line; a single angle applies to all lines; empty = random
    skew_per_line: tuple[float, ...] = ()
    include_logo: bool = True
    include_lines: bool = True
    background: int = 215
    texture: bool = True
    seed: int = 0
    max_skew: float = 5.0

    def __post_init__(self):
        if self.width < 64 or self.height < 48:
            raise ValueError(f"card must be at least 64x48, got {self.width}x{self.height}")
        if self.n_text_lines < 0:
            raise ValueError("n_text_lines must be >= 0")
        if not 150 <= self.background <= 240:
            raise ValueError(f"background must lie in [150, 240], got {self.background}")
        if len(self.skew_per_line) not in (0, 1, self.n_text_lines):
            raise ValueError(f"skew_per_line has {len(self.skew_per_line)} entries for "
                             f"{self.n_text_lines} lines")
        if any(abs(a) > 30 for a in self.skew_per_line):
            raise ValueError("skew angles must lie in [-30, 30]")

    def line_angles(self, rng: np.random.Generator) -> list[float]:
        if not self.skew_per_line:
            return [float(a) for a in rng.uniform(-self.max_skew, self.max_skew, self.n_text_lines)]
        if len(self.skew_per_line) == 1:
            return [float(self.skew_per_line[0])] * self.n_text_lines
        return [float(a) for a in self.skew_per_line]


@dataclass
class TextLine:
    """Glyph boxes along a baseline, in the line's own (u, v) frame.

    ``u`` runs along the baseline from its left end at (ox, oy); ``v`` is the
    height above the baseline. Positive angles make the baseline rise.
    """

    angle: float
    glyphs: list[tuple[float, float, float]]  # (u0, u1, height)
    ox: float = 0.0
    oy: float = 0.0

    @property
    def length(self) -> float:
        return self.glyphs[-1][1]

    @property
    def height(self) -> float:
        return max(g[2] for g in self.glyphs)

    def corners(self) -> np.ndarray:
        t = math.radians(self.angle)
        c, s = math.cos(t), math.sin(t)
        uv = np.array([(0, 0), (self.length, 0), (0, self.height), (self.length, self.height)])
        x = self.ox + uv[:, 0] * c - uv[:, 1] * s
        y = self.oy - uv[:, 0] * s - uv[:, 1] * c
        return np.stack([x, y], axis=1)

    def extent(self) -> tuple[float, float, float, float]:
        """(x0, y0, x1, y1) relative to the origin."""
        k = self.corners() - (self.ox, self.oy)
        return k[:, 0].min(), k[:, 1].min(), k[:, 0].max(), k[:, 1].max()

    def mask(self, shape: tuple[int, int]) -> np.ndarray:
        h, w = shape
        k = self.corners()
        x0, y0 = max(0, int(math.floor(k[:, 0].min())) - 1), max(0, int(math.floor(k[:, 1].min())) - 1)
        x1, y1 = min(w, int(math.ceil(k[:, 0].max())) + 2), min(h, int(math.ceil(k[:, 1].max())) + 2)
        out = np.zeros(shape, dtype=bool)
        if x0 >= x1 or y0 >= y1:
            return out
        t = math.radians(self.angle)
        c, s = math.cos(t), math.sin(t)
        dx = np.arange(x0, x1)[None, :] - self.ox
        dy = np.arange(y0, y1)[:, None] - self.oy
        u = dx * c - dy * s
        v = -dx * s - dy * c
        u0 = np.array([g[0] for g in self.glyphs])
        u1 = np.array([g[1] for g in self.glyphs])
        gh = np.array([g[2] for g in self.glyphs])
        i = np.clip(np.searchsorted(u0, u, side="right") - 1, 0, len(u0) - 1)
        out[y0:y1, x0:x1] = (u >= u0[i]) & (u < u1[i]) & (v >= 0) & (v < gh[i])
        return out


def make_glyphs(rng: np.random.Generator, n: int, glyph_h: int, word_space: int) -> list[tuple[float, float, float]]:
    glyphs = []
    u = 0.0
    next_space = int(rng.integers(3, 8))
    for k in range(n):
        width = round(glyph_h * rng.uniform(0.45, 0.8))
        height = glyph_h if rng.random() < 0.4 else round(glyph_h * 0.7)
        glyphs.append((u, u + width, float(height)))
        u += width
        if k + 1 == next_space:
            u += word_space
            next_space += int(rng.integers(3, 8))
        else:
            u += max(2, round(glyph_h * rng.uniform(0.25, 0.35)))
    return glyphs


def _ink(rng: np.random.Generator, shape) -> np.ndarray:
    base = rng.integers(20, 71)
    return np.clip(base + rng.normal(0, 6, shape), 0, INK_MAX)


def _paper(rng: np.random.Generator, spec: SynthCardSpec) -> np.ndarray:
    h, w = spec.height, spec.width
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float32)
    cx, cy = w * rng.uniform(0.35, 0.65), h * rng.uniform(0.35, 0.65)
    r2 = ((xx - cx) / w) ** 2 + ((yy - cy) / h) ** 2
    paper = spec.background - 20.0 * r2 + rng.normal(0, 3, (h, w))
    if spec.texture:
        period = rng.uniform(10, 30)
        stripes = (np.floor((xx + yy) / period) % 2) * rng.uniform(6, 12)
        paper -= stripes
    return np.clip(paper, 0, PAPER_MAX)


def text_line_region(angle: float, seed: int = 0, glyph_h: int = 24, n_glyphs: int = 20,
                     margin: int = 4) -> GrayImage:
    """One skewed text line, dark on white, tightly framed."""
    rng = np.random.default_rng(seed)
    line = TextLine(angle, make_glyphs(rng, n_glyphs, glyph_h, round(glyph_h * 0.55)))
    x0, y0, x1, y1 = line.extent()
    line.ox, line.oy = margin - x0, margin - y0
    shape = (int(math.ceil(y1 - y0)) + 2 * margin, int(math.ceil(x1 - x0)) + 2 * margin)
    ink = line.mask(shape)
    out = np.full(shape, 255, dtype=np.uint8)
    out[ink] = _ink(rng, int(ink.sum()))
    return GrayImage(out)


@dataclass
class _Placer:
    width: int
    height: int
    gap: int
    taken: list[Rect] = field(default_factory=list)

    def fits(self, r: Rect) -> bool:
        g = self.gap
        if r.x < g or r.y < g or r.x2 > self.width - g or r.y2 > self.height - g:
            return False
        grown = Rect(r.x - g, r.y - g, r.w + 2 * g, r.h + 2 * g)
        return all(grown.intersection(t) == 0 for t in self.taken)


def _bbox(mask: np.ndarray) -> Rect | None:
    rows = np.flatnonzero(mask.any(axis=1))
    if len(rows) == 0:
        return None
    cols = np.flatnonzero(mask.any(axis=0))
    return Rect(int(cols[0]), int(rows[0]), int(cols[-1] - cols[0] + 1), int(rows[-1] - rows[0] + 1))


def generate_card(spec: SynthCardSpec) -> tuple[GrayImage, list[GroundTruthRegion]]:
    """Render a card and its ground truth; identical specs give identical output."""
    rng = np.random.default_rng(spec.seed)
    w, h = spec.width, spec.height
    bs = default_block_size(w, h)
    glyph_h = max(6, h // 32)
    placer = _Placer(w, h, gap=2 * bs + 2)
    img = _paper(rng, spec)
    truth: list[GroundTruthRegion] = []

    def try_place(bw: int, bh: int, tries: int = 400) -> Rect | None:
        for _ in range(tries):
            if bw + 2 * placer.gap >= w or bh + 2 * placer.gap >= h:
                return None
            x = int(rng.integers(placer.gap, w - placer.gap - bw + 1))
            y = int(rng.integers(placer.gap, h - placer.gap - bh + 1))
            r = Rect(x, y, bw, bh)
            if placer.fits(r):
                placer.taken.append(r)
                return r
        return None

    if spec.include_logo:
        kind = rng.choice(["square", "ring", "wide"])
        side = int(h * rng.uniform(0.15, 0.2))
        lw = int(side * 1.5) if kind == "wide" else side
        r = try_place(lw, side)
        if r is not None:
            shape = np.zeros((h, w), dtype=bool)
            shape[r.slices()] = True
            if kind == "ring":
                t = max(3, side // 5)
                shape[r.y + t:r.y2 - t, r.x + t:r.x2 - t] = False
            img[shape] = _ink(rng, int(shape.sum()))
            truth.append(GroundTruthRegion(Label.GRAPHICS, r))

    if spec.texture and rng.random() < 0.5:
        pw, ph = int(w * rng.uniform(0.1, 0.2)), int(h * rng.uniform(0.1, 0.2))
        r = try_place(pw, ph)
        if r is not None:
            img[r.slices()] = rng.uniform(135, 215, (r.h, r.w))

    for angle in spec.line_angles(rng):
        n_glyphs = int(rng.integers(10, 25))
        for _ in range(8):
            line = TextLine(angle, make_glyphs(rng, n_glyphs, glyph_h, round(glyph_h * 0.55)))
            x0, y0, x1, y1 = line.extent()
            r = try_place(int(math.ceil(x1 - x0)) + 1, int(math.ceil(y1 - y0)) + 1, tries=200)
            if r is not None:
                break
            n_glyphs = max(4, n_glyphs * 3 // 4)
        if r is None:
            continue
        line.ox, line.oy = r.x - x0, r.y - y0
        ink = line.mask((h, w))
        box = _bbox(ink)
        if box is None:
            continue
        img[ink] = _ink(rng, int(ink.sum()))
        truth.append(GroundTruthRegion(Label.TEXT, box))

    if spec.include_lines:
        for _ in range(int(rng.integers(1, 3))):
            thick = int(rng.integers(1, max(2, 3 * min(w, h) // 768) + 1))
            length = int(w * rng.uniform(0.35, 0.6))
            r = try_place(length, thick)
            if r is not None:
                img[r.slices()] = _ink(rng, (r.h, r.w))
                truth.append(GroundTruthRegion(Label.GRAPHICS, r))

    return GrayImage(np.rint(img).astype(np.uint8)), truth


def card_suite(n: int, seed: int = 0, width: int = 1024, height: int = 768) -> list[SynthCardSpec]:
    """Varied card specs for benchmarking and acceptance runs."""
    rng = np.random.default_rng(seed)
    specs = []
    for k in range(n):
        specs.append(SynthCardSpec(
            width=width,
            height=height,
            n_text_lines=int(rng.integers(2, 6)),
            include_logo=bool(rng.random() < 0.8),
            include_lines=bool(rng.random() < 0.7),
            background=int(rng.integers(185, 236)),
            texture=bool(rng.random() < 0.7),
            seed=int(rng.integers(0, 2**31)),
        ))
    return specs
