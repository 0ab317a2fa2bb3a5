"""Q16.16 fixed-point helpers for the integer-only arithmetic path.

The lookup tables are built once at import time; after that, every function
here uses integer operations only.
"""

import math

FRAC_BITS = 16
ONE = 1 << FRAC_BITS
HALF = 1 << (FRAC_BITS - 1)
LUT_SIZE = 1024

# atan(i / LUT_SIZE) for i in [0, LUT_SIZE], in Q16.16 degrees.
_ATAN_LUT = [round(math.degrees(math.atan(i / LUT_SIZE)) * ONE) for i in range(LUT_SIZE + 1)]
# sin(i * 90 / LUT_SIZE degrees) for i in [0, LUT_SIZE], in Q16.16.
_SIN_LUT = [round(math.sin(math.radians(i * 90.0 / LUT_SIZE)) * ONE) for i in range(LUT_SIZE + 1)]

_DEG90 = 90 * ONE
_DEG180 = 180 * ONE


def to_fixed(x: float) -> int:
    return int(math.floor(x * ONE + 0.5))


def from_fixed(q: int) -> float:
    return q / ONE


def _interp(table: list[int], pos: int) -> int:
    # pos is a Q16.16 table index
    i = pos >> FRAC_BITS
    if i >= LUT_SIZE:
        return table[LUT_SIZE]
    frac = pos & (ONE - 1)
    a = table[i]
    return a + (((table[i + 1] - a) * frac + HALF) >> FRAC_BITS)


def _atan_unit(num: int, den: int) -> int:
    # 0 <= num <= den, den > 0
    return _interp(_ATAN_LUT, ((num * LUT_SIZE) << FRAC_BITS) // den)


def atan2_deg(dy: int, dx: int) -> int:
    """Four-quadrant arctangent of integer operands, as Q16.16 degrees."""
    if dx == 0 and dy == 0:
        return 0
    ady, adx = abs(dy), abs(dx)
    if ady <= adx:
        t = _atan_unit(ady, adx)
    else:
        t = _DEG90 - _atan_unit(adx, ady)
    if dx < 0:
        t = _DEG180 - t
    return -t if dy < 0 else t


def sin_deg(angle_q: int) -> int:
    """Sine of a Q16.16 angle in degrees, |angle| <= 90, as Q16.16."""
    a = abs(angle_q)
    if a > _DEG90:
        raise ValueError("sin_deg supports |angle| <= 90 degrees")
    s = _interp(_SIN_LUT, (a * LUT_SIZE) // 90)
    return -s if angle_q < 0 else s


def cos_deg(angle_q: int) -> int:
    return sin_deg(_DEG90 - abs(angle_q))
