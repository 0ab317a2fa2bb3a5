"""Per-region skew estimation from the bottom profile, and deskewing.

For each column of a region the profile stores the height, measured up from
the bottom edge, of the first dark pixel. Heights further than the mean
deviation from the mean are dropped; the leftmost, rightmost and middle
survivors give three pairwise slopes whose mean is the skew angle.

Angles are in degrees, positive when the baseline rises from left to right.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from cardsep import fixedpoint as fx
from cardsep.errors import SkewUnavailable
from cardsep.raster import GrayImage, rotate

# mean and mean deviation are kept in 1/256 pixel units
STAT_SCALE = 256


@dataclass(frozen=True, eq=False)
class BottomProfile:
    heights: np.ndarray  # int, one per column
    valid: np.ndarray  # bool, one per column

    @property
    def n(self) -> int:
        return int(np.count_nonzero(self.valid))

    def valid_columns(self) -> tuple[np.ndarray, np.ndarray]:
        xs = np.flatnonzero(self.valid)
        return xs, self.heights[xs]


@dataclass(frozen=True)
class SkewEstimate:
    mu: Fraction
    tau: Fraction
    x1: float = 0
    h1: int = 0
    x2: float = 0
    h2: int = 0
    x3: float = 0
    h3: int = 0
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    angle: float = 0.0
    low_confidence: bool = False
    survivors: int = 0


def bottom_profile(region: GrayImage, white_threshold: int = 250, min_run: int = 2) -> BottomProfile:
    """Height of the first sub-threshold pixel above the bottom edge, per column.

    A column is valid only when that pixel starts an upward run of at least
    ``min_run`` sub-threshold pixels.
    """
    dark = region.array[::-1] < white_threshold  # row 0 is now the bottom row
    h = dark.shape[0]
    has_dark = dark.any(axis=0)
    first = np.argmax(dark, axis=0)
    valid = has_dark.copy()
    cols = np.arange(dark.shape[1])
    for k in range(1, min_run):
        row = first + k
        inside = row < h
        valid &= inside
        valid[inside] &= dark[row[inside], cols[inside]]
    return BottomProfile(first.astype(np.int64), valid)


def _fixed_stats(heights: np.ndarray) -> tuple[int, int]:
    n = len(heights)
    if n == 0:
        raise SkewUnavailable("profile has no valid column")
    total = int(heights.sum())
    mu_q = (total * STAT_SCALE + n // 2) // n
    dev = int(np.abs(mu_q - heights * STAT_SCALE).sum())
    tau_q = (dev + n // 2) // n
    return mu_q, tau_q


def profile_stats(p: BottomProfile) -> tuple[Fraction, Fraction]:
    """Mean and mean absolute deviation of the valid heights, at 1/256 px."""
    mu_q, tau_q = _fixed_stats(p.valid_columns()[1])
    return Fraction(mu_q, STAT_SCALE), Fraction(tau_q, STAT_SCALE)


def lower_envelope(p: BottomProfile, width: int) -> BottomProfile:
    """Replace each valid height by the minimum valid height within a centred window.

    Columns that meet a glyph on its slanted side edge rather than its
    bottom read too high; the running minimum pulls them back onto the
    baseline. ``width`` <= 1 leaves the profile unchanged.
    """
    if width <= 1 or p.n == 0:
        return p
    big = np.iinfo(np.int64).max
    h = np.where(p.valid, p.heights, big)
    half = width // 2
    padded = np.concatenate([np.full(half, big), h, np.full(half, big)])
    windows = np.lib.stride_tricks.sliding_window_view(padded, 2 * half + 1)
    return BottomProfile(np.where(p.valid, windows.min(axis=1), p.heights), p.valid)


def envelope_width(region: GrayImage, white_threshold: int = 250) -> int:
    """Window for lower_envelope: 0.6 x the median vertical ink extent, odd."""
    extent = np.count_nonzero(region.array < white_threshold, axis=0)
    extent = extent[extent > 0]
    if len(extent) == 0:
        return 1
    return (int(np.median(extent)) * 3 // 5) | 1


def three_point_angles(p1, p2, p3, integer: bool = False) -> tuple[float, float, float, float]:
    """(alpha, beta, gamma, mean) for points (x, h) ordered left, right, middle.

    alpha joins p1-p2, beta p1-p3 and gamma p3-p2. A pair with no horizontal
    separation takes alpha's value.
    """
    (x1, h1), (x2, h2), (x3, h3) = p1, p2, p3
    pairs = [(h2 - h1, x2 - x1), (h3 - h1, x3 - x1), (h2 - h3, x2 - x3)]
    pairs = [pr if pr[1] else pairs[0] for pr in pairs]
    if integer:
        # positions may be half-integers; doubling both terms keeps integers
        qs = [fx.atan2_deg(int(2 * dh), int(2 * dx)) for dh, dx in pairs]
        alpha, beta, gamma = (fx.from_fixed(q) for q in qs)
        return alpha, beta, gamma, fx.from_fixed((2 * sum(qs) + 3) // 6)
    alpha, beta, gamma = (math.degrees(math.atan2(dh, dx)) for dh, dx in pairs)
    return alpha, beta, gamma, (alpha + beta + gamma) / 3


def _run_center(xs: np.ndarray, hs: np.ndarray, i: int) -> float:
    """Centre of the stretch of consecutive survivors sharing height hs[i]."""
    a = b = i
    while a > 0 and hs[a - 1] == hs[i]:
        a -= 1
    while b < len(hs) - 1 and hs[b + 1] == hs[i]:
        b += 1
    return (int(xs[a]) + int(xs[b])) / 2


def estimate_skew(p: BottomProfile, integer: bool = False) -> SkewEstimate:
    """Skew angle from the leftmost, rightmost and middle surviving heights.

    Survivors are the valid heights within one mean deviation of the mean.
    Each selected height is placed at the centre of its stretch of equal
    survivors, which cancels the staircase bias of pixel-quantized edges.
    """
    xs, hs = p.valid_columns()
    mu_q, tau_q = _fixed_stats(hs)
    mu, tau = Fraction(mu_q, STAT_SCALE), Fraction(tau_q, STAT_SCALE)

    keep = np.abs(hs * STAT_SCALE - mu_q) <= tau_q
    xs, hs = xs[keep], hs[keep]
    n = len(xs)
    if n < 2 or xs[0] == xs[-1]:
        return SkewEstimate(mu, tau, low_confidence=True, survivors=n)

    mid = (n - 1) // 2
    x1, x2, x3 = (_run_center(xs, hs, i) for i in (0, n - 1, mid))
    h1, h2, h3 = int(hs[0]), int(hs[-1]), int(hs[mid])
    if x1 == x2:
        # a single flat stretch: no slope to measure
        return SkewEstimate(mu, tau, x1, h1, x2, h2, x3, h3, survivors=n)
    alpha, beta, gamma, angle = three_point_angles((x1, h1), (x2, h2), (x3, h3), integer)
    return SkewEstimate(mu, tau, x1, h1, x2, h2, x3, h3, alpha, beta, gamma, angle, survivors=n)


def deskew_region(region: GrayImage, est: SkewEstimate, integer: bool = False) -> GrayImage:
    if est.low_confidence or est.angle == 0:
        return region
    return rotate(region, -est.angle, 255, integer=integer)
