"""Planar geometry helpers: oriented rectangles and piecewise ego routes."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, List, Sequence, Tuple, Union

Point = Tuple[float, float]
Pose = Tuple[float, float, float]


def wrap_angle(a: float) -> float:
    return math.atan2(math.sin(a), math.cos(a))


def obb_corners(pose: Pose, length: float, width: float) -> List[Point]:
    x, y, h = pose
    c, s = math.cos(h), math.sin(h)
    hl, hw = 0.5 * length, 0.5 * width
    return [
        (x + dx * c - dy * s, y + dx * s + dy * c)
        for dx, dy in ((hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw))
    ]


def obb_overlap(pose_a: Pose, size_a: Tuple[float, float],
                pose_b: Pose, size_b: Tuple[float, float]) -> bool:
    """Separating-axis test for two oriented rectangles.

    ``size`` is ``(length, width)``. The rectangles are closed sets, so
    touching edges or corners count as overlap.
    """
    ra = 0.5 * math.hypot(*size_a)
    rb = 0.5 * math.hypot(*size_b)
    dx = pose_b[0] - pose_a[0]
    dy = pose_b[1] - pose_a[1]
    if dx * dx + dy * dy > (ra + rb) ** 2:
        return False
    for h, (la, wa), (lb, wb), hb in (
        (pose_a[2], size_a, size_b, pose_b[2]),
        (pose_b[2], size_b, size_a, pose_a[2]),
    ):
        # Axes of one box; the other box's radius is projected onto them.
        for ax, ay, own in ((math.cos(h), math.sin(h), 0.5 * la),
                            (-math.sin(h), math.cos(h), 0.5 * wa)):
            d = abs(dx * ax + dy * ay)
            ca = math.cos(hb) * ax + math.sin(hb) * ay
            sa = -math.sin(hb) * ax + math.cos(hb) * ay
            other = 0.5 * lb * abs(ca) + 0.5 * wb * abs(sa)
            if d > own + other:
                return False
    return True


def extents_along(heading: float, length: float, width: float,
                  axis_heading: float) -> Tuple[float, float]:
    """Half-extents of a rectangle along and across a direction."""
    d = heading - axis_heading
    c, s = abs(math.cos(d)), abs(math.sin(d))
    along = 0.5 * length * c + 0.5 * width * s
    across = 0.5 * length * s + 0.5 * width * c
    return along, across


@dataclass(frozen=True)
class LinePiece:
    start: Point
    end: Point

    @property
    def length(self) -> float:
        return math.dist(self.start, self.end)

    @property
    def heading(self) -> float:
        return math.atan2(self.end[1] - self.start[1], self.end[0] - self.start[0])

    def pose_at(self, u: float) -> Pose:
        h = self.heading
        return (self.start[0] + u * math.cos(h), self.start[1] + u * math.sin(h), h)

    @property
    def curvature(self) -> float:
        return 0.0

    def chords(self, n: int = 1) -> List["LinePiece"]:
        return [self]


@dataclass(frozen=True)
class ArcPiece:
    """Circular arc; ``sweep`` > 0 turns left (counter-clockwise)."""

    center: Point
    radius: float
    start_angle: float
    sweep: float

    @property
    def length(self) -> float:
        return abs(self.sweep) * self.radius

    @property
    def curvature(self) -> float:
        return 1.0 / self.radius

    def pose_at(self, u: float) -> Pose:
        sign = 1.0 if self.sweep > 0 else -1.0
        a = self.start_angle + sign * u / self.radius
        x = self.center[0] + self.radius * math.cos(a)
        y = self.center[1] + self.radius * math.sin(a)
        return (x, y, wrap_angle(a + sign * math.pi / 2))

    def chords(self, n: int = 6) -> List[LinePiece]:
        pts = [self.pose_at(self.length * k / n)[:2] for k in range(n + 1)]
        return [LinePiece(pts[k], pts[k + 1]) for k in range(n)]


Piece = Union[LinePiece, ArcPiece]


class Path:
    """Arc-length parameterised chain of line and arc pieces."""

    def __init__(self, pieces: Sequence[Piece]):
        if not pieces:
            raise ValueError("path needs at least one piece")
        self.pieces = tuple(pieces)
        self.offsets: List[float] = []
        total = 0.0
        for p in self.pieces:
            self.offsets.append(total)
            total += p.length
        self.length = total
        self._chords = self._build_chords()

    def _locate(self, s: float) -> Tuple[Piece, float]:
        s = min(max(s, 0.0), self.length)
        for piece, off in zip(reversed(self.pieces), reversed(self.offsets)):
            if s >= off:
                return piece, s - off
        return self.pieces[0], s

    def pose_at(self, s: float) -> Pose:
        piece, u = self._locate(s)
        return piece.pose_at(u)

    def curvature_segments(self) -> Iterator[Tuple[float, float, float]]:
        """Yield ``(s_start, s_end, curvature)`` for every curved piece."""
        for piece, off in zip(self.pieces, self.offsets):
            if piece.curvature > 0.0:
                yield off, off + piece.length, piece.curvature

    def _build_chords(self) -> List[Tuple[float, LinePiece]]:
        out = []
        for piece, off in zip(self.pieces, self.offsets):
            acc = off
            for ch in piece.chords():
                out.append((acc, ch))
                acc += ch.length
        return out

    @property
    def chords(self) -> List[Tuple[float, LinePiece]]:
        """Straight approximation of the path as ``(s_offset, chord)`` pairs."""
        return self._chords

    @property
    def end(self) -> Point:
        return self.pose_at(self.length)[:2]


def ray_corridor_hit(origin: Point, direction: Point, ray_len: float,
                     chord: LinePiece, half_width: float) -> Tuple[float, float] | None:
    """Longitudinal interval where a ray lies inside a chord's corridor.

    The corridor is the rectangle of ``half_width`` around the chord.
    Returns ``(u_min, u_max)`` in chord coordinates, or ``None``.
    """
    h = chord.heading
    c, s = math.cos(h), math.sin(h)
    rx, ry = origin[0] - chord.start[0], origin[1] - chord.start[1]
    a = rx * c + ry * s            # along
    b = -rx * s + ry * c           # across
    da = direction[0] * c + direction[1] * s
    db = -direction[0] * s + direction[1] * c
    lo, hi = 0.0, ray_len
    for p0, dp, lim_lo, lim_hi in ((a, da, 0.0, chord.length), (b, db, -half_width, half_width)):
        if abs(dp) < 1e-12:
            if p0 < lim_lo or p0 > lim_hi:
                return None
            continue
        t1, t2 = (lim_lo - p0) / dp, (lim_hi - p0) / dp
        if t1 > t2:
            t1, t2 = t2, t1
        lo, hi = max(lo, t1), min(hi, t2)
        if lo > hi:
            return None
    u1, u2 = a + da * lo, a + da * hi
    return (min(u1, u2), max(u1, u2))
