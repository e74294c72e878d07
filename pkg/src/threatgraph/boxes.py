"""Axis-aligned bounding box geometry.

Boxes use the detector convention: (u, v) is the box center in pixels,
r the width/height aspect ratio, h the height in pixels, so the box
width is r * h.
"""

from __future__ import annotations

from typing import NamedTuple


class Box(NamedTuple):
    u: float
    v: float
    r: float
    h: float
    conf: float

    @property
    def width(self) -> float:
        return self.r * self.h

    def corners(self) -> tuple[float, float, float, float]:
        """(x1, y1, x2, y2) corner coordinates."""
        w = self.width
        return (self.u - 0.5 * w, self.v - 0.5 * self.h,
                self.u + 0.5 * w, self.v + 0.5 * self.h)

    @property
    def area(self) -> float:
        return self.width * self.h

    def bottom_center(self) -> tuple[float, float]:
        """Ground contact point: bottom edge midpoint of the box."""
        return (self.u, self.v + 0.5 * self.h)


def intersection_area(a: Box, b: Box) -> float:
    ax1, ay1, ax2, ay2 = a.corners()
    bx1, by1, bx2, by2 = b.corners()
    iw = min(ax2, bx2) - max(ax1, bx1)
    ih = min(ay2, by2) - max(ay1, by1)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    return iw * ih


def iou(a: Box, b: Box) -> float:
    inter = intersection_area(a, b)
    if inter == 0.0:
        return 0.0
    return inter / (a.area + b.area - inter)


def containment_fraction(inner: Box, outer: Box) -> float:
    """Fraction of `inner`'s area covered by `outer`."""
    if inner.area == 0.0:
        return 0.0
    return intersection_area(inner, outer) / inner.area
