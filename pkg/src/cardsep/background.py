"""Block-wise background elimination.

The image is tiled into square blocks. A block is background when its minimum
intensity is above ``lam`` and its intensity variation (max - min) stays below
an adaptive threshold that grows with the block's minimum intensity.
Background blocks are painted white; everything else is left untouched.

All arithmetic here is exact integer arithmetic.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from cardsep.errors import ConfigError, DomainError
from cardsep.raster import GrayImage, Rect

BACKGROUND_FILL = 255


class BlockLabel(enum.Enum):
    BACKGROUND = "background"
    FOREGROUND = "foreground"


@dataclass(frozen=True)
class BlockStats:
    g_min: int
    g_max: int

    @property
    def variation(self) -> int:
        return self.g_max - self.g_min


@dataclass(frozen=True)
class ThresholdParams:
    t_fixed: int = 20
    lam: int = 100

    def __post_init__(self):
        if not 0 <= self.lam <= 255:
            raise ConfigError(f"lambda must lie in [0, 255], got {self.lam}")
        if self.t_fixed < 0:
            raise ConfigError(f"t_fixed must be >= 0, got {self.t_fixed}")


@dataclass(frozen=True)
class BlockMask:
    """Per-block labels; ``foreground[r, c]`` is True for foreground blocks."""

    block_size: int
    foreground: np.ndarray

    @property
    def rows(self) -> int:
        return self.foreground.shape[0]

    @property
    def cols(self) -> int:
        return self.foreground.shape[1]

    def label(self, row: int, col: int) -> BlockLabel:
        return BlockLabel.FOREGROUND if self.foreground[row, col] else BlockLabel.BACKGROUND

    def pixel_mask(self, width: int, height: int) -> np.ndarray:
        """Expand block labels to a ``(height, width)`` boolean pixel mask."""
        bs = self.block_size
        m = np.repeat(np.repeat(self.foreground, bs, axis=0), bs, axis=1)
        return m[:height, :width]

    def __eq__(self, other):
        if not isinstance(other, BlockMask):
            return NotImplemented
        return self.block_size == other.block_size and np.array_equal(self.foreground, other.foreground)


def default_block_size(width: int, height: int) -> int:
    """Block side scaled with resolution: 16 px at 1024x768, never below 8."""
    return max(8, (min(width, height) + 24) // 48)


def block_stats(img: GrayImage, r: Rect) -> BlockStats:
    if r.w < 1 or r.h < 1:
        raise DomainError(f"empty block {r}")
    if not r.inside(img.width, img.height):
        raise DomainError(f"block {r} is not inside a {img.width}x{img.height} image")
    block = img.array[r.slices()]
    return BlockStats(int(block.min()), int(block.max()))


def adaptive_threshold(g_min, p: ThresholdParams):
    """T_sigma = t_fixed + 2 * ((g_min - lam) - min(t_fixed, g_min - lam)).

    Works elementwise on integer numpy arrays as well as on Python ints.
    """
    d = g_min - p.lam
    if isinstance(d, np.ndarray):
        return p.t_fixed + (d - np.minimum(p.t_fixed, d)) * 2
    return p.t_fixed + (d - min(p.t_fixed, d)) * 2


def classify_block(s: BlockStats, p: ThresholdParams) -> BlockLabel:
    if s.g_min > p.lam and s.variation < adaptive_threshold(s.g_min, p):
        return BlockLabel.BACKGROUND
    return BlockLabel.FOREGROUND


def _grid_stats(a: np.ndarray, bs: int):
    rows = np.arange(0, a.shape[0], bs)
    cols = np.arange(0, a.shape[1], bs)
    g_min = np.minimum.reduceat(np.minimum.reduceat(a, rows, axis=0), cols, axis=1)
    g_max = np.maximum.reduceat(np.maximum.reduceat(a, rows, axis=0), cols, axis=1)
    return g_min.astype(np.int32), g_max.astype(np.int32)


def eliminate_background(img: GrayImage, p: ThresholdParams, block_size: int) -> tuple[GrayImage, BlockMask]:
    """Paint background blocks white; edge blocks are clipped, not padded."""
    if block_size < 2:
        raise ConfigError(f"block_size must be >= 2, got {block_size}")
    g_min, g_max = _grid_stats(img.array, block_size)
    background = (g_min > p.lam) & ((g_max - g_min) < adaptive_threshold(g_min, p))
    mask = BlockMask(block_size, ~background)
    if not background.any():
        return img, mask
    out = img.array.copy()
    out[~mask.pixel_mask(img.width, img.height)] = BACKGROUND_FILL
    return GrayImage(out), mask
