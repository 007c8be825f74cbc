"""Brute-force reference implementations used to check the fast code paths."""

from __future__ import annotations

import math

import numpy as np

RESOLUTION = 0.01   # 1 cm sampling grid


def corners(pose, size):
    x, y, h = pose
    c, s = math.cos(h), math.sin(h)
    hl, hw = size[0] / 2, size[1] / 2
    return np.array([(x + dx * c - dy * s, y + dx * s + dy * c)
                     for dx, dy in ((hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw))])


def _inside(px, py, pose, size):
    x, y, h = pose
    c, s = math.cos(h), math.sin(h)
    u = (px - x) * c + (py - y) * s
    v = -(px - x) * s + (py - y) * c
    return (np.abs(u) <= size[0] / 2) & (np.abs(v) <= size[1] / 2)


def sampled_overlap(pose_a, size_a, pose_b, size_b, res: float = RESOLUTION) -> bool:
    """True iff some point of a ``res`` grid lies inside both rectangles."""
    ca, cb = corners(pose_a, size_a), corners(pose_b, size_b)
    lo = np.maximum(ca.min(axis=0), cb.min(axis=0))
    hi = np.minimum(ca.max(axis=0), cb.max(axis=0))
    if np.any(lo > hi):
        return False
    xs = np.arange(math.floor(lo[0] / res), math.ceil(hi[0] / res) + 1) * res
    ys = np.arange(math.floor(lo[1] / res), math.ceil(hi[1] / res) + 1) * res
    px, py = np.meshgrid(xs, ys)
    return bool(np.any(_inside(px, py, pose_a, size_a) & _inside(px, py, pose_b, size_b)))


def _point_segment(p, a, b):
    ab = b - a
    t = np.clip(np.dot(p - a, ab) / np.dot(ab, ab), 0.0, 1.0)
    return float(np.linalg.norm(p - (a + t * ab)))


def gap_distance(pose_a, size_a, pose_b, size_b) -> float:
    """Euclidean distance between the boundaries of two rectangles."""
    ca, cb = corners(pose_a, size_a), corners(pose_b, size_b)
    best = math.inf
    for P, Q in ((ca, cb), (cb, ca)):
        for p in P:
            for k in range(4):
                best = min(best, _point_segment(p, Q[k], Q[(k + 1) % 4]))
    return best


def penetration_depth(pose_a, size_a, pose_b, size_b) -> float:
    """Smallest projection overlap over the four edge normals (minimum translation)."""
    ca, cb = corners(pose_a, size_a), corners(pose_b, size_b)
    depth = math.inf
    for h in (pose_a[2], pose_a[2] + math.pi / 2, pose_b[2], pose_b[2] + math.pi / 2):
        ax = np.array([math.cos(h), math.sin(h)])
        pa, pb = ca @ ax, cb @ ax
        depth = min(depth, min(pa.max(), pb.max()) - max(pa.min(), pb.min()))
    return depth


def signed_separation(pose_a, size_a, pose_b, size_b) -> float:
    """Positive gap when apart, negative penetration when overlapping."""
    pen = penetration_depth(pose_a, size_a, pose_b, size_b)
    if pen >= 0:
        return -pen
    return gap_distance(pose_a, size_a, pose_b, size_b)


def random_pair(rng: np.random.Generator):
    size_a = tuple(rng.uniform(0.3, 4.0, 2))
    size_b = tuple(rng.uniform(0.3, 4.0, 2))
    pose_a = (float(rng.uniform(-5, 5)), float(rng.uniform(-5, 5)), float(rng.uniform(-math.pi, math.pi)))
    r, t = rng.uniform(0, 5.0), rng.uniform(-math.pi, math.pi)
    pose_b = (pose_a[0] + r * math.cos(t), pose_a[1] + r * math.sin(t),
              float(rng.uniform(-math.pi, math.pi)))
    return pose_a, size_a, pose_b, size_b
