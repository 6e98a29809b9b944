"""Affine transforms and bounding boxes in SVG user units."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .errors import UnsupportedFeature

# Matches an SVG number, including exponents and leading sign.
_NUMBER = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_NUMBER_RE = re.compile(_NUMBER)


@dataclass(frozen=True)
class Affine:
    """2-D affine map, SVG matrix order: x' = a*x + c*y + e, y' = b*x + d*y + f."""

    a: float = 1.0
    b: float = 0.0
    c: float = 0.0
    d: float = 1.0
    e: float = 0.0
    f: float = 0.0

    def apply(self, x: float, y: float) -> tuple[float, float]:
        return (self.a * x + self.c * y + self.e, self.b * x + self.d * y + self.f)

    def __matmul__(self, other: "Affine") -> "Affine":
        # self after other is applied? SVG composes left-to-right in the
        # attribute, so (parent @ child) applies child first in child space.
        return Affine(
            a=self.a * other.a + self.c * other.b,
            b=self.b * other.a + self.d * other.b,
            c=self.a * other.c + self.c * other.d,
            d=self.b * other.c + self.d * other.d,
            e=self.a * other.e + self.c * other.f + self.e,
            f=self.b * other.e + self.d * other.f + self.f,
        )

    @property
    def is_identity(self) -> bool:
        return self == IDENTITY


IDENTITY = Affine()

_TRANSFORM_RE = re.compile(
    r"\s*(matrix|translate|scale|rotate|skewX|skewY)\s*\(([^)]*)\)\s*,?"
)


def parse_transform(text: str, path: str | None = None) -> Affine:
    """Parse an SVG transform attribute into a single Affine."""
    result = IDENTITY
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TRANSFORM_RE.match(text, pos)
        if m is None:
            raise UnsupportedFeature(f"unparseable transform {text!r}", path)
        name = m.group(1)
        args = [float(v) for v in _NUMBER_RE.findall(m.group(2))]
        result = result @ _single_transform(name, args, path)
        pos = m.end()
    return result


def _single_transform(name: str, args: list[float], path: str | None) -> Affine:
    if name == "matrix" and len(args) == 6:
        return Affine(*args)
    if name == "translate" and len(args) in (1, 2):
        tx = args[0]
        ty = args[1] if len(args) == 2 else 0.0
        return Affine(e=tx, f=ty)
    if name == "scale" and len(args) in (1, 2):
        sx = args[0]
        sy = args[1] if len(args) == 2 else sx
        return Affine(a=sx, d=sy)
    if name == "rotate" and len(args) in (1, 3):
        ang = math.radians(args[0])
        rot = Affine(a=math.cos(ang), b=math.sin(ang), c=-math.sin(ang), d=math.cos(ang))
        if len(args) == 3:
            cx, cy = args[1], args[2]
            return Affine(e=cx, f=cy) @ rot @ Affine(e=-cx, f=-cy)
        return rot
    if name == "skewX" and len(args) == 1:
        return Affine(c=math.tan(math.radians(args[0])))
    if name == "skewY" and len(args) == 1:
        return Affine(b=math.tan(math.radians(args[0])))
    raise UnsupportedFeature(f"bad transform {name}({args})", path)


@dataclass(frozen=True)
class BBox:
    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        assert self.x0 <= self.x1 and self.y0 <= self.y1

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)

    @property
    def corners(self) -> tuple[tuple[float, float], tuple[float, float]]:
        return ((self.x0, self.y0), (self.x1, self.y1))

    @property
    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)

    def union(self, other: "BBox") -> "BBox":
        return BBox(
            min(self.x0, other.x0),
            min(self.y0, other.y0),
            max(self.x1, other.x1),
            max(self.y1, other.y1),
        )

    def approx_equal(self, other: "BBox", tol: float = 1e-6) -> bool:
        return (
            abs(self.x0 - other.x0) <= tol
            and abs(self.y0 - other.y0) <= tol
            and abs(self.x1 - other.x1) <= tol
            and abs(self.y1 - other.y1) <= tol
        )


def bbox_of_points(points) -> BBox | None:
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    if not xs:
        return None
    return BBox(min(xs), min(ys), max(xs), max(ys))


def union_all(boxes) -> BBox | None:
    boxes = [b for b in boxes if b is not None]
    if not boxes:
        return None
    out = boxes[0]
    for b in boxes[1:]:
        out = out.union(b)
    return out
