"""SVG path-data parsing and exact bounding boxes.

Paths are normalized to absolute line/cubic/quadratic/arc segments.
Bounding boxes are analytic: curve extremes come from derivative roots,
arc extremes from the phase of the (affine-transformed) ellipse sweep,
so boxes are exact up to float rounding rather than sampled.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .errors import MalformedXml
from .geometry import Affine, BBox, IDENTITY

_NUMBER_RE = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_WSP_COMMA = " \t\r\n\f,"

Point = tuple[float, float]


@dataclass(frozen=True)
class Line:
    p0: Point
    p1: Point

    def point(self, t: float) -> Point:
        return (
            self.p0[0] + t * (self.p1[0] - self.p0[0]),
            self.p0[1] + t * (self.p1[1] - self.p0[1]),
        )


@dataclass(frozen=True)
class Cubic:
    p0: Point
    c1: Point
    c2: Point
    p1: Point

    def point(self, t: float) -> Point:
        s = 1.0 - t
        return tuple(
            s * s * s * self.p0[k]
            + 3 * s * s * t * self.c1[k]
            + 3 * s * t * t * self.c2[k]
            + t * t * t * self.p1[k]
            for k in (0, 1)
        )


@dataclass(frozen=True)
class Quadratic:
    p0: Point
    c: Point
    p1: Point

    def point(self, t: float) -> Point:
        s = 1.0 - t
        return tuple(
            s * s * self.p0[k] + 2 * s * t * self.c[k] + t * t * self.p1[k]
            for k in (0, 1)
        )


@dataclass(frozen=True)
class Arc:
    """Center-parameterized elliptical arc: c + R(phi) @ (rx cos a, ry sin a)."""

    center: Point
    rx: float
    ry: float
    phi: float
    theta1: float
    delta: float

    def point(self, t: float) -> Point:
        a = self.theta1 + t * self.delta
        cos_p, sin_p = math.cos(self.phi), math.sin(self.phi)
        ex, ey = self.rx * math.cos(a), self.ry * math.sin(a)
        return (
            self.center[0] + cos_p * ex - sin_p * ey,
            self.center[1] + sin_p * ex + cos_p * ey,
        )


Segment = Line | Cubic | Quadratic | Arc


class _Scanner:
    def __init__(self, d: str):
        self.d = d
        self.pos = 0

    def skip_sep(self):
        while self.pos < len(self.d) and self.d[self.pos] in _WSP_COMMA:
            self.pos += 1

    def at_end(self) -> bool:
        self.skip_sep()
        return self.pos >= len(self.d)

    def peek_command(self) -> str | None:
        self.skip_sep()
        if self.pos < len(self.d) and self.d[self.pos].isalpha():
            return self.d[self.pos]
        return None

    def take_command(self) -> str:
        cmd = self.peek_command()
        if cmd is None:
            raise MalformedXml(f"expected path command at offset {self.pos} in {self.d!r}")
        self.pos += 1
        return cmd

    def number(self) -> float:
        self.skip_sep()
        m = _NUMBER_RE.match(self.d, self.pos)
        if m is None:
            raise MalformedXml(f"expected number at offset {self.pos} in {self.d!r}")
        self.pos = m.end()
        return float(m.group())

    def flag(self) -> int:
        # Arc flags are single characters and may be run together.
        self.skip_sep()
        if self.pos < len(self.d) and self.d[self.pos] in "01":
            value = int(self.d[self.pos])
            self.pos += 1
            return value
        raise MalformedXml(f"expected arc flag at offset {self.pos} in {self.d!r}")

    def has_number(self) -> bool:
        self.skip_sep()
        return bool(_NUMBER_RE.match(self.d, self.pos))


def parse_path(d: str) -> list[Segment]:
    """Normalize path data to absolute segments. Zero-length closes are dropped."""
    scan = _Scanner(d)
    segments: list[Segment] = []
    cur: Point = (0.0, 0.0)
    start: Point = (0.0, 0.0)
    prev_cmd = ""
    prev_cubic_ctrl: Point | None = None
    prev_quad_ctrl: Point | None = None

    if scan.at_end():
        return segments
    if scan.peek_command() not in ("M", "m"):
        raise MalformedXml(f"path data must start with a moveto: {d!r}")

    while not scan.at_end():
        cmd = scan.take_command() if scan.peek_command() else prev_cmd
        rel = cmd.islower()
        op = cmd.upper()

        def pt(rel=rel) -> Point:
            x, y = scan.number(), scan.number()
            return (cur[0] + x, cur[1] + y) if rel else (x, y)

        if op == "M":
            cur = pt()
            start = cur
            # Subsequent pairs are implicit linetos.
            while scan.has_number():
                nxt = pt()
                segments.append(Line(cur, nxt))
                cur = nxt
            prev_cubic_ctrl = prev_quad_ctrl = None
        elif op == "L":
            while True:
                nxt = pt()
                segments.append(Line(cur, nxt))
                cur = nxt
                if not scan.has_number():
                    break
            prev_cubic_ctrl = prev_quad_ctrl = None
        elif op in ("H", "V"):
            while True:
                v = scan.number()
                if op == "H":
                    nxt = ((cur[0] + v) if rel else v, cur[1])
                else:
                    nxt = (cur[0], (cur[1] + v) if rel else v)
                segments.append(Line(cur, nxt))
                cur = nxt
                if not scan.has_number():
                    break
            prev_cubic_ctrl = prev_quad_ctrl = None
        elif op in ("C", "S"):
            while True:
                if op == "C":
                    c1 = pt()
                else:
                    c1 = _reflect(cur, prev_cubic_ctrl)
                c2 = pt()
                nxt = pt()
                segments.append(Cubic(cur, c1, c2, nxt))
                prev_cubic_ctrl = c2
                cur = nxt
                if not scan.has_number():
                    break
            prev_quad_ctrl = None
        elif op in ("Q", "T"):
            while True:
                if op == "Q":
                    c = pt()
                else:
                    c = _reflect(cur, prev_quad_ctrl)
                nxt = pt()
                segments.append(Quadratic(cur, c, nxt))
                prev_quad_ctrl = c
                cur = nxt
                if not scan.has_number():
                    break
            prev_cubic_ctrl = None
        elif op == "A":
            while True:
                rx, ry = scan.number(), scan.number()
                rot = scan.number()
                large = scan.flag()
                sweep = scan.flag()
                nxt = pt()
                arc = _arc_from_endpoints(cur, nxt, rx, ry, rot, large, sweep)
                if arc is not None:
                    segments.append(arc)
                elif nxt != cur:
                    segments.append(Line(cur, nxt))
                cur = nxt
                if not scan.has_number():
                    break
            prev_cubic_ctrl = prev_quad_ctrl = None
        elif op == "Z":
            if cur != start:
                segments.append(Line(cur, start))
            cur = start
            prev_cubic_ctrl = prev_quad_ctrl = None
        else:
            raise MalformedXml(f"unknown path command {cmd!r} in {d!r}")
        prev_cmd = cmd if op != "M" else ("l" if rel else "L")
    return segments


def _reflect(cur: Point, ctrl: Point | None) -> Point:
    if ctrl is None:
        return cur
    return (2 * cur[0] - ctrl[0], 2 * cur[1] - ctrl[1])


def _arc_from_endpoints(p0, p1, rx, ry, rot_deg, large, sweep) -> Arc | None:
    # SVG endpoint-to-center conversion, including radius scale-up.
    if p0 == p1:
        return None
    rx, ry = abs(rx), abs(ry)
    if rx == 0.0 or ry == 0.0:
        return None
    phi = math.radians(rot_deg % 360.0)
    cos_p, sin_p = math.cos(phi), math.sin(phi)
    dx, dy = (p0[0] - p1[0]) / 2.0, (p0[1] - p1[1]) / 2.0
    x1p = cos_p * dx + sin_p * dy
    y1p = -sin_p * dx + cos_p * dy
    lam = (x1p / rx) ** 2 + (y1p / ry) ** 2
    if lam > 1.0:
        scale = math.sqrt(lam)
        rx *= scale
        ry *= scale
    num = rx**2 * ry**2 - rx**2 * y1p**2 - ry**2 * x1p**2
    den = rx**2 * y1p**2 + ry**2 * x1p**2
    coef = math.sqrt(max(num, 0.0) / den)
    if large == sweep:
        coef = -coef
    cxp = coef * rx * y1p / ry
    cyp = -coef * ry * x1p / rx
    cx = cos_p * cxp - sin_p * cyp + (p0[0] + p1[0]) / 2.0
    cy = sin_p * cxp + cos_p * cyp + (p0[1] + p1[1]) / 2.0

    def angle(ux, uy, vx, vy):
        dot = ux * vx + uy * vy
        norm = math.hypot(ux, uy) * math.hypot(vx, vy)
        ang = math.acos(max(-1.0, min(1.0, dot / norm)))
        if ux * vy - uy * vx < 0:
            ang = -ang
        return ang

    theta1 = angle(1.0, 0.0, (x1p - cxp) / rx, (y1p - cyp) / ry)
    delta = angle(
        (x1p - cxp) / rx, (y1p - cyp) / ry, (-x1p - cxp) / rx, (-y1p - cyp) / ry
    ) % (2 * math.pi)
    if sweep == 0 and delta > 0:
        delta -= 2 * math.pi
    elif sweep == 1 and delta < 0:
        delta += 2 * math.pi
    return Arc((cx, cy), rx, ry, phi, theta1, delta)


def path_bbox(segments: list[Segment], transform: Affine = IDENTITY) -> BBox | None:
    """Exact bbox of the transformed path; None for an empty path."""
    lo = [math.inf, math.inf]
    hi = [-math.inf, -math.inf]

    def add(p: Point):
        x, y = transform.apply(*p)
        lo[0] = min(lo[0], x)
        lo[1] = min(lo[1], y)
        hi[0] = max(hi[0], x)
        hi[1] = max(hi[1], y)

    for seg in segments:
        if isinstance(seg, Line):
            add(seg.p0)
            add(seg.p1)
        elif isinstance(seg, Cubic):
            tp = Cubic(
                transform.apply(*seg.p0),
                transform.apply(*seg.c1),
                transform.apply(*seg.c2),
                transform.apply(*seg.p1),
            )
            for k in (0, 1):
                for t in _cubic_extreme_ts(tp, k):
                    p = tp.point(t)
                    lo[k] = min(lo[k], p[k])
                    hi[k] = max(hi[k], p[k])
            add(seg.p0)
            add(seg.p1)
        elif isinstance(seg, Quadratic):
            tp = Quadratic(
                transform.apply(*seg.p0),
                transform.apply(*seg.c),
                transform.apply(*seg.p1),
            )
            for k in (0, 1):
                t = _quad_extreme_t(tp, k)
                if t is not None:
                    p = tp.point(t)
                    lo[k] = min(lo[k], p[k])
                    hi[k] = max(hi[k], p[k])
            add(seg.p0)
            add(seg.p1)
        elif isinstance(seg, Arc):
            for x, y in _arc_extremes(seg, transform):
                lo[0] = min(lo[0], x)
                lo[1] = min(lo[1], y)
                hi[0] = max(hi[0], x)
                hi[1] = max(hi[1], y)
    if lo[0] is math.inf:
        return None
    return BBox(lo[0], lo[1], hi[0], hi[1])


def _cubic_extreme_ts(c: Cubic, k: int) -> list[float]:
    # Roots of the derivative quadratic, restricted to (0, 1).
    d0 = c.c1[k] - c.p0[k]
    d1 = c.c2[k] - c.c1[k]
    d2 = c.p1[k] - c.c2[k]
    a = d0 - 2 * d1 + d2
    b = 2 * (d1 - d0)
    cc = d0
    ts = []
    if abs(a) < 1e-14:
        if abs(b) > 1e-14:
            ts.append(-cc / b)
    else:
        disc = b * b - 4 * a * cc
        if disc >= 0:
            r = math.sqrt(disc)
            ts.extend([(-b + r) / (2 * a), (-b - r) / (2 * a)])
    return [t for t in ts if 0.0 < t < 1.0]


def _quad_extreme_t(q: Quadratic, k: int) -> float | None:
    d0 = q.c[k] - q.p0[k]
    d1 = q.p1[k] - q.c[k]
    den = d0 - d1
    if abs(den) < 1e-14:
        return None
    t = d0 / den
    return t if 0.0 < t < 1.0 else None


def _arc_extremes(arc: Arc, transform: Affine):
    """Endpoint and interior extreme points of a transformed elliptical arc."""
    cos_p, sin_p = math.cos(arc.phi), math.sin(arc.phi)
    # Linear map from (cos a, sin a) to user space, composed with transform.
    m00 = transform.a * (cos_p * arc.rx) + transform.c * (sin_p * arc.rx)
    m10 = transform.b * (cos_p * arc.rx) + transform.d * (sin_p * arc.rx)
    m01 = transform.a * (-sin_p * arc.ry) + transform.c * (cos_p * arc.ry)
    m11 = transform.b * (-sin_p * arc.ry) + transform.d * (cos_p * arc.ry)
    ox, oy = transform.apply(*arc.center)

    def at(a: float) -> Point:
        return (ox + m00 * math.cos(a) + m01 * math.sin(a),
                oy + m10 * math.cos(a) + m11 * math.sin(a))

    points = [at(arc.theta1), at(arc.theta1 + arc.delta)]
    for mc, ms in ((m00, m01), (m10, m11)):
        if mc == 0.0 and ms == 0.0:
            continue
        base = math.atan2(ms, mc)
        for cand in (base, base + math.pi):
            if _angle_in_sweep(cand, arc.theta1, arc.delta):
                points.append(at(cand))
    return points


def _angle_in_sweep(angle: float, theta1: float, delta: float) -> bool:
    two_pi = 2 * math.pi
    if delta >= 0:
        rel = (angle - theta1) % two_pi
        return rel <= delta
    rel = (theta1 - angle) % two_pi
    return rel <= -delta
