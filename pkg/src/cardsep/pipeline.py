"""Stage wiring, configuration files, output files and benchmarking."""

from __future__ import annotations

import dataclasses
import statistics
import time
import tracemalloc
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from cardsep.background import BlockMask, ThresholdParams, default_block_size, eliminate_background
from cardsep.components import (
    ClassifiedComponent,
    ClassifierParams,
    PixelThresholds,
    SeparationResult,
    separate_text_graphics,
)
from cardsep.errors import ConfigError, SkewUnavailable
from cardsep.raster import GrayImage, write_pgm
from cardsep.skew import (
    BottomProfile,
    SkewEstimate,
    bottom_profile,
    deskew_region,
    envelope_width,
    estimate_skew,
    lower_envelope,
)

MODES = ("float", "integer")
PROFILE_SOURCES = ("ink", "component")


@dataclass(frozen=True)
class PipelineConfig:
    t_fixed: int = 20
    lam: int = 100
    block_size: int | None = None  # None: scale with resolution
    fg_threshold: int = 250
    black_threshold: int = 128
    r_min: float = 1.2
    r_max: float = 32.0
    ra_min: float = 5.0
    ra_max: float = 90.0
    min_area: int | None = None
    line_thickness: int | None = None
    max_char_height: int | None = None
    white_threshold: int = 250
    min_run: int = 2
    # "ink" traces the bottom profile on the region's ink; "component" on
    # every member pixel, which follows the block outline
    profile_source: str = "ink"
    envelope: int | None = None  # lower-envelope window; None: from ink extent, <= 1: off
    iou_min: float = 0.5
    mode: str = "float"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.profile_source not in PROFILE_SOURCES:
            raise ConfigError(f"profile_source must be one of {PROFILE_SOURCES}, got {self.profile_source!r}")
        if self.block_size is not None and self.block_size < 2:
            raise ConfigError(f"block_size must be >= 2, got {self.block_size}")
        if not 0 < self.iou_min <= 1:
            raise ConfigError(f"iou_min must lie in (0, 1], got {self.iou_min}")
        if self.min_run < 1:
            raise ConfigError(f"min_run must be >= 1, got {self.min_run}")
        for name in ("fg_threshold", "black_threshold", "white_threshold"):
            if not 0 <= getattr(self, name) <= 256:
                raise ConfigError(f"{name} must lie in [0, 256]")
        self.threshold_params()
        self.classifier_params()

    @property
    def integer(self) -> bool:
        return self.mode == "integer"

    def threshold_params(self) -> ThresholdParams:
        return ThresholdParams(self.t_fixed, self.lam)

    def classifier_params(self) -> ClassifierParams:
        return ClassifierParams(self.r_min, self.r_max, self.ra_min, self.ra_max,
                                self.min_area, self.line_thickness, self.max_char_height)

    def pixel_thresholds(self) -> PixelThresholds:
        return PixelThresholds(self.fg_threshold, self.black_threshold)

    def block_size_for(self, width: int, height: int) -> int:
        return self.block_size if self.block_size is not None else default_block_size(width, height)

    # -- key = value files --------------------------------------------------

    @classmethod
    def from_text(cls, text: str) -> PipelineConfig:
        fields = {f.name: f for f in dataclasses.fields(cls)}
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            attr = _KEY_TO_ATTR.get(key, key)
            if attr not in fields or key in _ATTR_TO_KEY:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            values[attr] = _parse_value(attr, value, lineno)
        try:
            return cls(**values)
        except ConfigError:
            raise
        except (TypeError, ValueError) as e:
            raise ConfigError(str(e)) from None

    @classmethod
    def load(cls, path) -> PipelineConfig:
        return cls.from_text(Path(path).read_text())

    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            key = _ATTR_TO_KEY.get(f.name, f.name)
            lines.append(f"{key} = {'auto' if v is None else v}")
        return "\n".join(lines) + "\n"


_KEY_TO_ATTR = {"lambda": "lam"}
_ATTR_TO_KEY = {v: k for k, v in _KEY_TO_ATTR.items()}
_AUTO = {"block_size", "min_area", "line_thickness", "max_char_height", "envelope"}
_FLOATS = {"r_min", "r_max", "ra_min", "ra_max", "iou_min"}
_STRINGS = {"mode", "profile_source"}


def _parse_value(attr: str, value: str, lineno: int):
    if attr in _STRINGS:
        return value
    if attr in _AUTO and value == "auto":
        return None
    try:
        return float(value) if attr in _FLOATS else int(value)
    except ValueError:
        raise ConfigError(f"line {lineno}: bad value {value!r} for {attr}") from None


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------

@dataclass
class RegionOutput:
    item: ClassifiedComponent
    estimate: SkewEstimate | None = None
    deskewed: GrayImage | None = None

    @property
    def angle(self) -> float:
        return 0.0 if self.estimate is None or self.estimate.low_confidence else self.estimate.angle

    @property
    def low_confidence(self) -> bool:
        return self.estimate is None or self.estimate.low_confidence


@dataclass
class PipelineResult:
    background: GrayImage
    mask: BlockMask
    separation: SeparationResult
    regions: list[RegionOutput]
    timings_ms: dict[str, float] = field(default_factory=dict)

    @property
    def text_image(self) -> GrayImage:
        return self.separation.text_image


def eliminate(img: GrayImage, config: PipelineConfig) -> tuple[GrayImage, BlockMask]:
    return eliminate_background(img, config.threshold_params(), config.block_size_for(img.width, img.height))


def region_image(text_image: GrayImage, item: ClassifiedComponent) -> GrayImage:
    """The component's pixels inside its bounding box, everything else white."""
    cc = item.component
    sub = text_image.array[cc.bbox.slices()]
    return GrayImage(np.where(cc.mask, sub, 255).astype(np.uint8))


def profile_view(region: GrayImage, config: PipelineConfig) -> GrayImage:
    if config.profile_source == "component":
        return region
    a = region.array
    return GrayImage(np.where(a <= config.black_threshold, a, 255).astype(np.uint8))


def region_profile(region: GrayImage, config: PipelineConfig) -> BottomProfile:
    view = profile_view(region, config)
    profile = bottom_profile(view, config.white_threshold, config.min_run)
    width = config.envelope if config.envelope is not None else envelope_width(view, config.white_threshold)
    return lower_envelope(profile, width)


def estimate_region_skew(region: GrayImage, config: PipelineConfig | None = None) -> SkewEstimate | None:
    """Skew of one cropped region, or None when no column is usable."""
    config = config or PipelineConfig()
    try:
        return estimate_skew(region_profile(region, config), config.integer)
    except SkewUnavailable:
        return None


def correct_skew(text_image: GrayImage, item: ClassifiedComponent, config: PipelineConfig) -> RegionOutput:
    region = region_image(text_image, item)
    est = estimate_region_skew(region, config)
    if est is None:
        return RegionOutput(item, None, region)
    return RegionOutput(item, est, deskew_region(region, est, config.integer))


def run_pipeline(img: GrayImage, config: PipelineConfig | None = None) -> PipelineResult:
    config = config or PipelineConfig()
    clock = time.perf_counter
    t0 = clock()
    background, mask = eliminate(img, config)
    t1 = clock()
    sep = separate_text_graphics(background, mask, config.classifier_params(), config.pixel_thresholds())
    t2 = clock()
    regions = [correct_skew(sep.text_image, item, config) for item in sep.text_regions()]
    t3 = clock()
    timings = {"bg": (t1 - t0) * 1e3, "cc": (t2 - t1) * 1e3, "skew": (t3 - t2) * 1e3,
               "total": (t3 - t0) * 1e3}
    return PipelineResult(background, mask, sep, regions, timings)


# ---------------------------------------------------------------------------
# Output files
# ---------------------------------------------------------------------------

def format_regions(result: PipelineResult) -> str:
    """One line per component: ``label x y w h`` plus ``angle confidence`` for text."""
    by_id = {r.item.component.id: r for r in result.regions}
    lines = []
    for item in result.separation.components:
        b = item.region_box
        line = f"{item.label.value} {b.x} {b.y} {b.w} {b.h}"
        r = by_id.get(item.component.id)
        if r is not None:
            line += f" {r.angle:.4f} {'low' if r.low_confidence else 'ok'}"
        lines.append(line)
    return "".join(line + "\n" for line in lines)


def write_outputs(result: PipelineResult, out_dir) -> None:
    """text.pgm, regions.txt and region_<k>.pgm, k being the line index in regions.txt."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_pgm(out / "text.pgm", result.text_image)
    (out / "regions.txt").write_text(format_regions(result))
    for r in result.regions:
        if r.deskewed is not None:
            write_pgm(out / f"region_{r.item.component.id}.pgm", r.deskewed)


# ---------------------------------------------------------------------------
# Benchmarking
# ---------------------------------------------------------------------------

BENCH_HEADER = ["resolution", "bg_ms", "cc_ms", "skew_ms", "total_ms", "peak_bytes"]


@dataclass(frozen=True)
class BenchReport:
    width: int
    height: int
    bg_ms: float
    cc_ms: float
    skew_ms: float
    total_ms: float
    peak_bytes: int

    @property
    def resolution(self) -> str:
        return f"{self.width}x{self.height}"

    def csv_row(self) -> str:
        return (f"{self.resolution},{self.bg_ms:.3f},{self.cc_ms:.3f},{self.skew_ms:.3f},"
                f"{self.total_ms:.3f},{self.peak_bytes}")


def peak_memory(img: GrayImage, config: PipelineConfig) -> int:
    """Allocator high-water mark of one pipeline run, in bytes."""
    was_tracing = tracemalloc.is_tracing()
    if not was_tracing:
        tracemalloc.start()
    tracemalloc.reset_peak()
    base = tracemalloc.get_traced_memory()[0]
    run_pipeline(img, config)
    peak = tracemalloc.get_traced_memory()[1] - base
    if not was_tracing:
        tracemalloc.stop()
    return peak


def bench(img: GrayImage, config: PipelineConfig | None = None, repetitions: int = 5) -> BenchReport:
    """Median stage times over untraced runs; peak memory from one extra traced run."""
    if repetitions < 1:
        raise ConfigError(f"repetitions must be >= 1, got {repetitions}")
    config = config or PipelineConfig()
    runs = [run_pipeline(img, config).timings_ms for _ in range(repetitions)]

    def median(key):
        return statistics.median(t[key] for t in runs)

    return BenchReport(img.width, img.height, median("bg"), median("cc"), median("skew"),
                       median("total"), peak_memory(img, config))

