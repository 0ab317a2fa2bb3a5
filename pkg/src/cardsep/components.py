"""Connected-component extraction and rule-based text/graphics classification.

Components are maximal 4-connected sets of foreground pixels (intensity below
``fg_threshold``) in the background-eliminated image. A text region is
therefore a patch of gray paper holding dark ink, and most features look at
the ink (pixels at or below ``black_threshold``) inside the component.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from cardsep.background import BlockMask
from cardsep.errors import ConfigError
from cardsep.raster import GrayImage, Rect


class Label(enum.Enum):
    TEXT = "T"
    GRAPHICS = "G"


@dataclass(frozen=True)
class PixelThresholds:
    fg_threshold: int = 250
    black_threshold: int = 128


@dataclass(frozen=True, eq=False)
class ConnectedComponent:
    id: int
    bbox: Rect
    pixel_count: int
    mask: np.ndarray = field(repr=False)  # bool, bbox-sized

    def pixels(self) -> set[tuple[int, int]]:
        """Member coordinates as (x, y) in image space."""
        ys, xs = np.nonzero(self.mask)
        return set(zip((xs + self.bbox.x).tolist(), (ys + self.bbox.y).tolist()))


@dataclass(frozen=True)
class CcFeatures:
    height: int
    width: int
    pixel_count: int
    gray_count: int
    black_count: int
    v_segments: int
    h_segments: int
    transitions: int
    ink_bbox: Rect | None = None
    clear_row: bool = True
    clear_col: bool = True

    @property
    def area(self) -> int:
        return self.width * self.height

    @property
    def aspect(self) -> float:
        return self.width / self.height

    @property
    def cuts(self) -> int:
        return self.transitions // 2

    @property
    def gray_density(self) -> float:
        return 100.0 * self.gray_count / self.area

    @property
    def black_density(self) -> float:
        return 100.0 * self.black_count / self.area

    @property
    def fg_bg_ratio(self) -> float:
        """Ink pixels as a percentage of the bounding box."""
        return 100.0 * self.black_count / self.area


@dataclass(frozen=True)
class ClassifierParams:
    r_min: float = 1.2
    r_max: float = 32.0
    ra_min: float = 5.0
    ra_max: float = 90.0
    # None means "derive from the image size", see resolved()
    min_area: int | None = None
    line_thickness: int | None = None
    max_char_height: int | None = None

    def __post_init__(self):
        if not self.r_min < self.r_max:
            raise ConfigError(f"r_min ({self.r_min}) must be below r_max ({self.r_max})")
        if not self.ra_min < self.ra_max:
            raise ConfigError(f"ra_min ({self.ra_min}) must be below ra_max ({self.ra_max})")

    def resolved(self, width: int, height: int) -> ClassifierParams:
        short = min(width, height)
        return replace(
            self,
            min_area=self.min_area if self.min_area is not None else max(4, width * height // 50_000),
            line_thickness=self.line_thickness if self.line_thickness is not None
            else max(1, (3 * short + 384) // 768),
            max_char_height=self.max_char_height if self.max_char_height is not None else height // 8,
        )


@dataclass(frozen=True)
class ClassifiedComponent:
    component: ConnectedComponent
    features: CcFeatures
    label: Label

    @property
    def region_box(self) -> Rect:
        """Extent of the ink, or of the whole component when it has none."""
        return self.features.ink_bbox or self.component.bbox


@dataclass(frozen=True)
class SeparationResult:
    components: list[ClassifiedComponent]
    text_image: GrayImage

    def text_regions(self) -> list[ClassifiedComponent]:
        return [c for c in self.components if c.label is Label.TEXT]


# ---------------------------------------------------------------------------
# Extraction
# ---------------------------------------------------------------------------

class _DisjointSet:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        parent = self.parent
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # the smaller index wins so roots stay at the first run in scan order
            if ra < rb:
                self.parent[rb] = ra
            else:
                self.parent[ra] = rb


def label_components(fg: np.ndarray) -> tuple[np.ndarray, list[ConnectedComponent]]:
    """Label 4-connected foreground regions of a boolean image.

    Regions are grown over horizontal runs: every run is a node, runs in
    consecutive rows that share a column are joined. Returns an int32 label
    image (0 = not foreground, k + 1 = component k) and the components ordered
    by (bbox.y, bbox.x, pixel_count).
    """
    h, w = fg.shape
    padded = np.zeros((h, w + 2), dtype=np.int8)
    padded[:, 1:-1] = fg
    d = np.diff(padded, axis=1)
    run_row, run_x0 = np.nonzero(d == 1)
    _, run_x1 = np.nonzero(d == -1)
    del padded, d
    n_runs = len(run_row)
    if n_runs == 0:
        return np.zeros((h, w), dtype=np.int32), []

    marks = np.zeros(h * w, dtype=np.int32)
    marks[run_row * w + run_x0] = 1
    run_id = np.cumsum(marks, dtype=np.int32).reshape(h, w)  # 1-based
    del marks
    run_id[~fg] = 0

    touching = fg[:-1] & fg[1:]
    upper = run_id[:-1][touching].astype(np.int64) - 1
    lower = run_id[1:][touching].astype(np.int64) - 1
    del touching
    pairs = np.unique(upper * n_runs + lower)
    del upper, lower

    ds = _DisjointSet(n_runs)
    for a, b in zip((pairs // n_runs).tolist(), (pairs % n_runs).tolist()):
        ds.union(a, b)
    roots = np.fromiter((ds.find(i) for i in range(n_runs)), dtype=np.int64, count=n_runs)
    uniq_roots, comp = np.unique(roots, return_inverse=True)
    n = len(uniq_roots)

    count = np.bincount(comp, weights=run_x1 - run_x0, minlength=n).astype(np.int64)
    y0 = np.full(n, h, dtype=np.int64)
    y1 = np.zeros(n, dtype=np.int64)
    x0 = np.full(n, w, dtype=np.int64)
    x1 = np.zeros(n, dtype=np.int64)
    np.minimum.at(y0, comp, run_row)
    np.maximum.at(y1, comp, run_row + 1)
    np.minimum.at(x0, comp, run_x0)
    np.maximum.at(x1, comp, run_x1)

    order = np.lexsort((uniq_roots, count, x0, y0))
    rank = np.empty(n, dtype=np.int32)
    rank[order] = np.arange(n, dtype=np.int32)
    lut = np.zeros(n_runs + 1, dtype=np.int32)
    lut[1:] = rank[comp] + 1
    labels = lut[run_id]
    del run_id

    components = []
    for k, c in enumerate(order.tolist()):
        bbox = Rect(int(x0[c]), int(y0[c]), int(x1[c] - x0[c]), int(y1[c] - y0[c]))
        components.append(ConnectedComponent(k, bbox, int(count[c]), labels[bbox.slices()] == k + 1))
    return labels, components


def foreground_pixels(img: GrayImage, mask: BlockMask | None, fg_threshold: int) -> np.ndarray:
    fg = img.array < fg_threshold
    if mask is not None:
        fg &= mask.pixel_mask(img.width, img.height)
    return fg


def extract_components(img: GrayImage, mask: BlockMask | None, fg_threshold: int = 250) -> list[ConnectedComponent]:
    return label_components(foreground_pixels(img, mask, fg_threshold))[1]


# ---------------------------------------------------------------------------
# Features and classification
# ---------------------------------------------------------------------------

def _runs(line: np.ndarray) -> tuple[int, int]:
    """(runs, transitions) of a boolean scanline closed by background at both ends."""
    padded = np.concatenate(([False], line, [False]))
    transitions = int(np.count_nonzero(padded[1:] != padded[:-1]))
    return transitions // 2, transitions


def compute_features(img: GrayImage, cc: ConnectedComponent, fg_threshold: int = 250,
                     black_threshold: int = 128) -> CcFeatures:
    b = cc.bbox
    sub = img.array[b.slices()]
    member = cc.mask
    black = member & (sub <= black_threshold)
    gray = member & (sub > black_threshold) & (sub < fg_threshold)

    h_segments, transitions = _runs(black[b.h // 2])
    v_segments, _ = _runs(black[:, b.w // 2])

    ink_rows = black.any(axis=1)
    ink_cols = black.any(axis=0)
    ink_bbox = None
    clear_row = clear_col = True
    if ink_rows.any():
        r = np.flatnonzero(ink_rows)
        c = np.flatnonzero(ink_cols)
        ink_bbox = Rect(b.x + int(c[0]), b.y + int(r[0]), int(c[-1] - c[0] + 1), int(r[-1] - r[0] + 1))
        clear_row = not ink_rows[r[0]:r[-1] + 1].all()
        clear_col = not ink_cols[c[0]:c[-1] + 1].all()

    return CcFeatures(
        height=b.h,
        width=b.w,
        pixel_count=cc.pixel_count,
        gray_count=int(np.count_nonzero(gray)),
        black_count=int(np.count_nonzero(black)),
        v_segments=v_segments,
        h_segments=h_segments,
        transitions=transitions,
        ink_bbox=ink_bbox,
        clear_row=clear_row,
        clear_col=clear_col,
    )


def rejection_reason(f: CcFeatures, p: ClassifierParams) -> str | None:
    """Name of the first rule that marks the component as graphics, or None."""
    r_min, r_max = Fraction(str(p.r_min)), Fraction(str(p.r_max))
    ra_min, ra_max = Fraction(str(p.ra_min)), Fraction(str(p.ra_max))

    if p.min_area is not None and f.pixel_count < p.min_area:
        return "small"
    if f.ink_bbox is not None and p.line_thickness is not None:
        ih, iw = f.ink_bbox.h, f.ink_bbox.w
        if (ih <= p.line_thickness and iw > r_max * ih) or (iw <= p.line_thickness and ih > r_max * iw):
            return "line"
    if not r_min * f.height < f.width < r_max * f.height:
        return "aspect"
    if not ra_min * f.area < 100 * f.black_count < ra_max * f.area:
        return "density"
    if p.max_char_height is not None and f.height > p.max_char_height \
            and not f.clear_row and not f.clear_col:
        return "logo"
    return None


def classify_component(f: CcFeatures, p: ClassifierParams) -> Label:
    return Label.GRAPHICS if rejection_reason(f, p) else Label.TEXT


def separate_text_graphics(img: GrayImage, mask: BlockMask | None, p: ClassifierParams,
                           thresholds: PixelThresholds = PixelThresholds()) -> SeparationResult:
    p = p.resolved(img.width, img.height)
    labels, comps = label_components(foreground_pixels(img, mask, thresholds.fg_threshold))
    classified = []
    erase = np.zeros(len(comps) + 1, dtype=bool)
    for cc in comps:
        f = compute_features(img, cc, thresholds.fg_threshold, thresholds.black_threshold)
        label = classify_component(f, p)
        erase[cc.id + 1] = label is Label.GRAPHICS
        classified.append(ClassifiedComponent(cc, f, label))
    if erase.any():
        out = img.array.copy()
        out[erase[labels]] = 255
        text_image = GrayImage(out)
    else:
        text_image = img
    return SeparationResult(classified, text_image)
