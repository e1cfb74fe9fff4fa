"""Polyline math for lane-based placement and trajectory synthesis."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np


class Polyline:
    """Piecewise-linear curve parameterized by arc length.

    Lateral offsets are signed: positive is left of the travel direction.
    Queries clamp to the curve's arc-length range.
    """

    def __init__(self, points: Sequence[Sequence[float]]):
        array = np.asarray(points, dtype=float)
        if array.ndim != 2 or array.shape[0] < 2 or array.shape[1] != 2:
            raise ValueError("polyline needs at least two 2D points")
        segments = np.diff(array, axis=0)
        seg_lengths = np.hypot(segments[:, 0], segments[:, 1])
        if np.any(seg_lengths <= 0):
            raise ValueError("polyline has zero-length segments")
        self._points = array
        self._seg_lengths = seg_lengths
        self._cumulative = np.concatenate([[0.0], np.cumsum(seg_lengths)])

    @property
    def length(self) -> float:
        return float(self._cumulative[-1])

    def _locate(self, s: float) -> tuple[int, float]:
        s = min(max(s, 0.0), self.length)
        index = int(np.searchsorted(self._cumulative, s, side="right")) - 1
        index = min(max(index, 0), len(self._seg_lengths) - 1)
        within = (s - self._cumulative[index]) / self._seg_lengths[index]
        return index, within

    def point_at(self, s: float) -> tuple[float, float]:
        index, within = self._locate(s)
        p = self._points[index] + within * (self._points[index + 1] - self._points[index])
        return float(p[0]), float(p[1])

    def tangent_at(self, s: float) -> tuple[float, float]:
        index, _ = self._locate(s)
        seg = self._points[index + 1] - self._points[index]
        norm = self._seg_lengths[index]
        return float(seg[0] / norm), float(seg[1] / norm)

    def heading_at(self, s: float) -> float:
        tx, ty = self.tangent_at(s)
        return math.atan2(ty, tx)

    def offset_point(self, s: float, lateral: float) -> tuple[float, float]:
        x, y = self.point_at(s)
        tx, ty = self.tangent_at(s)
        return x - lateral * ty, y + lateral * tx

    def project(self, x: float, y: float) -> float:
        """Arc length of the closest point on the curve."""
        best_s = 0.0
        best_d2 = math.inf
        p = np.array([x, y])
        for index in range(len(self._seg_lengths)):
            a = self._points[index]
            seg = self._points[index + 1] - a
            t = float(np.dot(p - a, seg) / np.dot(seg, seg))
            t = min(max(t, 0.0), 1.0)
            candidate = a + t * seg
            d2 = float(np.sum((p - candidate) ** 2))
            if d2 < best_d2:
                best_d2 = d2
                best_s = float(self._cumulative[index] + t * self._seg_lengths[index])
        return best_s

    def self_intersects(self) -> bool:
        """True when two non-adjacent segments cross."""
        n = len(self._seg_lengths)
        for i in range(n):
            for j in range(i + 2, n):
                if i == 0 and j == n - 1 and np.allclose(self._points[0], self._points[-1]):
                    continue
                if _segments_cross(
                    self._points[i], self._points[i + 1], self._points[j], self._points[j + 1]
                ):
                    return True
        return False


def _orientation(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _segments_cross(p1, p2, q1, q2) -> bool:
    d1 = _orientation(q1, q2, p1)
    d2 = _orientation(q1, q2, p2)
    d3 = _orientation(p1, p2, q1)
    d4 = _orientation(p1, p2, q2)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0))


def rotate_into_frame(dx: float, dy: float, heading: float) -> tuple[float, float]:
    """World offset expressed in a heading frame: (longitudinal, lateral-left)."""
    cos_h = math.cos(heading)
    sin_h = math.sin(heading)
    longitudinal = dx * cos_h + dy * sin_h
    lateral = -dx * sin_h + dy * cos_h
    return longitudinal, lateral
