"""
Path geometry of the merging conflict. The ego approaches the west entry,
circulates counter-clockwise through the south point and leaves at the
east exit; the aggressive vehicle comes up from the south and merges into
the ring at the south point, which is the conflict point.
"""
from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np

from trajectory.models import TWO_PI, TrajectoryPoint


class Path:
    """
    Densely sampled 2D polyline parameterized by arclength. Positions past
    either end are extrapolated along the end headings.
    """

    def __init__(self, x, y):
        self.x = np.asarray(x, dtype=float)
        self.y = np.asarray(y, dtype=float)
        if self.x.size < 2:
            raise ValueError("a path needs at least two points")
        step = np.hypot(np.diff(self.x), np.diff(self.y))
        if np.any(step <= 0):
            raise ValueError("path points must be distinct")
        self.s = np.concatenate([[0.0], np.cumsum(step)])
        # one heading per segment
        self._heading = np.arctan2(np.diff(self.y), np.diff(self.x))

    @property
    def length(self):
        return float(self.s[-1])

    def position(self, s):
        """(x, y) at arclength(s); accepts scalars or arrays"""
        s = np.asarray(s, dtype=float)
        x = np.interp(s, self.s, self.x)
        y = np.interp(s, self.s, self.y)
        before, after = s < 0.0, s > self.length
        if np.any(before):
            h = self._heading[0]
            x = np.where(before, self.x[0] + s * math.cos(h), x)
            y = np.where(before, self.y[0] + s * math.sin(h), y)
        if np.any(after):
            h = self._heading[-1]
            extra = s - self.length
            x = np.where(after, self.x[-1] + extra * math.cos(h), x)
            y = np.where(after, self.y[-1] + extra * math.sin(h), y)
        return x, y

    def heading(self, s):
        """Direction of travel at arclength s, in [0, 2*pi): the heading of the segment holding s"""
        i = np.clip(np.searchsorted(self.s, s, side='right') - 1, 0, self.s.size - 2)
        return np.mod(self._heading[i], TWO_PI)

    def project(self, x, y):
        """Arclength of the path point closest to (x, y)"""
        i = int(np.argmin(np.hypot(self.x - x, self.y - y)))
        best_s, best_d = float(self.s[i]), math.hypot(self.x[i] - x, self.y[i] - y)
        for j in (i - 1, i):
            if j < 0 or j + 1 >= self.x.size:
                continue
            ax, ay = self.x[j], self.y[j]
            bx, by = self.x[j + 1], self.y[j + 1]
            seg = (bx - ax) ** 2 + (by - ay) ** 2
            u = min(max(((x - ax) * (bx - ax) + (y - ay) * (by - ay)) / seg, 0.0), 1.0)
            px, py = ax + u * (bx - ax), ay + u * (by - ay)
            d = math.hypot(px - x, py - y)
            if d < best_d:
                best_d, best_s = d, float(self.s[j] + u * math.sqrt(seg))
        return best_s


@dataclass(frozen=True)
class PathGeometry:
    ego_path: Path
    aggressive_path: Path
    conflict_s_ego: float
    conflict_s_agg: float
    roundabout_entry_s_ego: float
    aggressive_yield_s: float
    shared_length: float

    @property
    def conflict_point(self):
        x, y = self.ego_path.position(self.conflict_s_ego)
        return float(x), float(y)

    @property
    def shared_offset(self):
        """Ego arclength minus aggressive arclength on the common arc"""
        return self.conflict_s_ego - self.conflict_s_agg

    def aggressive_in_ego_frame(self, s_agg):
        """Aggressive position as ego arclength while it is on the common arc, else None"""
        if self.conflict_s_agg <= s_agg <= self.conflict_s_agg + self.shared_length:
            return s_agg + self.shared_offset
        return None

    def ego_in_aggressive_frame(self, s_ego):
        if self.conflict_s_ego <= s_ego <= self.conflict_s_ego + self.shared_length:
            return s_ego - self.shared_offset
        return None

    def conflict_open(self, s_ego, s_agg):
        """
        True while the pair can still meet: the ego has not reached the
        conflict point, or the aggressive vehicle is ahead of it on the
        common arc
        """
        if s_ego < self.conflict_s_ego:
            return True
        ahead = self.aggressive_in_ego_frame(s_agg)
        return ahead is not None and ahead > s_ego

    def center_distance(self, s_ego, s_agg):
        xe, ye = self.ego_path.position(s_ego)
        xa, ya = self.aggressive_path.position(s_agg)
        return np.hypot(xe - xa, ye - ya)


def _points(start, stop, spacing, endpoint=False):
    n = max(int(math.ceil(abs(stop - start) / spacing)), 1)
    return np.linspace(start, stop, n + 1)[:None if endpoint else -1]


@lru_cache(maxsize=8)
def build_geometry(spec):
    """Ego and aggressive paths for a GeometrySpec"""
    R, h = spec.radius, spec.sample_spacing
    arc_step = h / R

    # ego: south along x = -R, ring from the west point through south to east, north exit
    y = _points(spec.ego_approach_length, 0.0, h)
    ego_x, ego_y = [np.full_like(y, -R)], [y]
    theta = _points(math.pi, TWO_PI, arc_step)
    ego_x.append(R * np.cos(theta))
    ego_y.append(R * np.sin(theta))
    y = _points(0.0, spec.exit_length, h, endpoint=True)
    ego_x.append(np.full_like(y, R))
    ego_y.append(y)
    ego_path = Path(np.concatenate(ego_x), np.concatenate(ego_y))

    # aggressive: north along x = 0 up to the south point, ring to the north point, north exit
    y = _points(-R - spec.aggressive_approach_length, -R, h)
    agg_x, agg_y = [np.zeros_like(y)], [y]
    theta = _points(1.5 * math.pi, 2.5 * math.pi, arc_step)
    agg_x.append(R * np.cos(theta))
    agg_y.append(R * np.sin(theta))
    y = _points(R, R + spec.exit_length, h, endpoint=True)
    agg_x.append(np.zeros_like(y))
    agg_y.append(y)
    aggressive_path = Path(np.concatenate(agg_x), np.concatenate(agg_y))

    conflict_s_ego = ego_path.project(0.0, -R)
    conflict_s_agg = aggressive_path.project(0.0, -R)
    return PathGeometry(
        ego_path=ego_path,
        aggressive_path=aggressive_path,
        conflict_s_ego=conflict_s_ego,
        conflict_s_agg=conflict_s_agg,
        roundabout_entry_s_ego=ego_path.project(-R, 0.0),
        aggressive_yield_s=conflict_s_agg - spec.yield_setback,
        shared_length=0.5 * math.pi * R,
    )


def path_point(path, t, s, v, a):
    """TrajectoryPoint of a vehicle at arclength s of ``path``"""
    x, y = path.position(s)
    return TrajectoryPoint(t=t, x=float(x), y=float(y), v=float(v), a=float(a), heading=float(path.heading(s)))
