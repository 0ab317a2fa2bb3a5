"""Text/graphics separation and per-region skew correction for camera-captured
business card images."""

from cardsep.raster import GrayImage, Rect, crop, load_pgm, rotate, save_pgm

__all__ = ["GrayImage", "Rect", "crop", "load_pgm", "rotate", "save_pgm"]
__version__ = "0.1.0"
