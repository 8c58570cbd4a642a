"""Chip geometry: current-carrying wires and charged electrode polygons.

All electrode polygons and the ground plane lie in the chip plane
z = surface_z; atoms live strictly above it.  Wires are polylines of 3D
vertices carrying a signed current along the vertex order.
"""

from dataclasses import dataclass, field

import numpy as np


class LayoutError(ValueError):
    """A layout violates a geometric invariant."""


def _segments_intersect(p1, p2, p3, p4):
    """Proper or improper intersection of segments p1-p2 and p3-p4 (2D)."""
    d1 = np.cross(p4 - p3, p1 - p3)
    d2 = np.cross(p4 - p3, p2 - p3)
    d3 = np.cross(p2 - p1, p3 - p1)
    d4 = np.cross(p2 - p1, p4 - p1)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)):
        return True

    def on_segment(a, b, c):
        return (min(a[0], b[0]) - 1e-15 <= c[0] <= max(a[0], b[0]) + 1e-15 and
                min(a[1], b[1]) - 1e-15 <= c[1] <= max(a[1], b[1]) + 1e-15)

    if d1 == 0 and on_segment(p3, p4, p1):
        return True
    if d2 == 0 and on_segment(p3, p4, p2):
        return True
    if d3 == 0 and on_segment(p1, p2, p3):
        return True
    if d4 == 0 and on_segment(p1, p2, p4):
        return True
    return False


def polygon_is_simple(vertices):
    """True if the closed polygon has no self-intersections.

    Adjacent edges share a vertex by construction; only non-adjacent edge
    pairs are tested.
    """
    v = np.asarray(vertices, dtype=float)
    n = len(v)
    if n < 3:
        return False
    for i in range(n):
        a1, a2 = v[i], v[(i + 1) % n]
        if np.allclose(a1, a2):
            return False
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            if _segments_intersect(a1, a2, v[j], v[(j + 1) % n]):
                return False
    return True


def polygon_area(vertices):
    """Signed shoelace area of a 2D polygon."""
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)


def point_in_polygon(points, vertices):
    """Even-odd rule point-in-polygon test, vectorized over points (N,2)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    v = np.asarray(vertices, dtype=float)
    n = len(v)
    inside = np.zeros(len(pts), dtype=bool)
    x, y = pts[:, 0], pts[:, 1]
    j = n - 1
    with np.errstate(divide="ignore", invalid="ignore"):
        for i in range(n):
            xi, yi = v[i]
            xj, yj = v[j]
            crosses = ((yi > y) != (yj > y)) & (
                x < (xj - xi) * (y - yi) / (yj - yi) + xi)
            inside ^= crosses
            j = i
    return inside


def polygons_overlap(va, vb):
    """True if two simple polygons overlap with nonzero area.

    Polygons are shrunk by a relative 1e-9 about their centroids first, so
    shared edges (exactly abutting rectangles) do not count as overlap.
    """
    va = np.asarray(va, dtype=float)
    vb = np.asarray(vb, dtype=float)
    va = va.mean(axis=0) + (va - va.mean(axis=0)) * (1.0 - 1e-9)
    vb = vb.mean(axis=0) + (vb - vb.mean(axis=0)) * (1.0 - 1e-9)
    # bounding-box reject
    if (va[:, 0].max() <= vb[:, 0].min() or vb[:, 0].max() <= va[:, 0].min() or
            va[:, 1].max() <= vb[:, 1].min() or vb[:, 1].max() <= va[:, 1].min()):
        return False
    na, nb = len(va), len(vb)
    for i in range(na):
        for j in range(nb):
            if _segments_intersect(va[i], va[(i + 1) % na],
                                   vb[j], vb[(j + 1) % nb]):
                return True
    if point_in_polygon(va.mean(axis=0), vb)[0]:
        return True
    if point_in_polygon(vb.mean(axis=0), va)[0]:
        return True
    return False


@dataclass(frozen=True)
class Wire:
    """A current-carrying polyline.

    vertices: (n, 3) array, meters.  current: amps, positive along the
    vertex order.  filaments: the wire ribbon is split into this many
    parallel filaments along `spread_axis`, sharing the current, to
    approximate finite width.
    """

    vertices: np.ndarray
    current: float
    filaments: int = 1
    width: float = 0.0
    spread_axis: int = 0

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 3 or len(v) < 2:
            raise LayoutError("wire needs >= 2 three-dimensional vertices")
        if np.any(np.linalg.norm(np.diff(v, axis=0), axis=1) == 0.0):
            raise LayoutError("wire has coincident consecutive vertices")
        if self.filaments < 1:
            raise LayoutError("filaments must be >= 1")
        object.__setattr__(self, "vertices", v)

    def filament_segments(self):
        """Segment arrays (starts, ends, currents) for all filaments."""
        starts, ends, currents = [], [], []
        n = self.filaments
        if n == 1 or self.width == 0.0:
            offsets = [0.0]
        else:
            offsets = np.linspace(-self.width / 2.0, self.width / 2.0, n)
        for off in offsets:
            v = self.vertices.copy()
            v[:, self.spread_axis] += off
            starts.append(v[:-1])
            ends.append(v[1:])
            currents.append(np.full(len(v) - 1, self.current / len(offsets)))
        return (np.concatenate(starts), np.concatenate(ends),
                np.concatenate(currents))


@dataclass(frozen=True)
class Electrode:
    """A planar polygon in the chip plane, tied to a voltage channel."""

    channel: str
    polygon: np.ndarray  # (n, 2) in-plane vertices, meters

    def __post_init__(self):
        v = np.asarray(self.polygon, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise LayoutError(f"electrode {self.channel}: polygon needs >= 3 "
                              "two-dimensional vertices")
        if not polygon_is_simple(v):
            raise LayoutError(f"electrode {self.channel}: polygon is "
                              "self-intersecting or degenerate")
        object.__setattr__(self, "polygon", v)

    @property
    def area(self):
        return abs(polygon_area(self.polygon))


def rectangle(cx, cy, wx, wy):
    """Vertices of an axis-aligned rectangle centered at (cx, cy)."""
    hx, hy = wx / 2.0, wy / 2.0
    return np.array([
        [cx - hx, cy - hy],
        [cx + hx, cy - hy],
        [cx + hx, cy + hy],
        [cx - hx, cy + hy],
    ])


GROUND_CHANNEL = "gnd"


@dataclass(frozen=True)
class ChipLayout:
    """Wires, electrodes, ground-plane polygons, and the bias field."""

    wires: tuple
    electrodes: tuple
    bias_field: np.ndarray          # (3,) tesla
    ground_plane: tuple = ()        # polygons pinned to 0 V
    surface_z: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "wires", tuple(self.wires))
        object.__setattr__(self, "electrodes", tuple(self.electrodes))
        object.__setattr__(self, "ground_plane",
                           tuple(np.asarray(p, dtype=float)
                                 for p in self.ground_plane))
        b = np.asarray(self.bias_field, dtype=float)
        if b.shape != (3,):
            raise LayoutError("bias_field must be a 3-vector")
        object.__setattr__(self, "bias_field", b)
        self._validate()

    def _validate(self):
        names = [e.channel for e in self.electrodes]
        if GROUND_CHANNEL in names:
            raise LayoutError(f"channel name {GROUND_CHANNEL!r} is reserved")
        for g in self.ground_plane:
            if not polygon_is_simple(g):
                raise LayoutError("ground-plane polygon is self-intersecting")
        polys = [(e.channel, e.polygon) for e in self.electrodes]
        polys += [(GROUND_CHANNEL, g) for g in self.ground_plane]
        for i in range(len(polys)):
            for j in range(i + 1, len(polys)):
                if polygons_overlap(polys[i][1], polys[j][1]):
                    raise LayoutError(
                        f"polygons {polys[i][0]!r} and {polys[j][0]!r} overlap "
                        "(insulation gap required)")

    @property
    def channels(self):
        return tuple(e.channel for e in self.electrodes)

    def wire_segments(self):
        """Stacked (starts, ends, currents) over all wires and filaments."""
        if not self.wires:
            z = np.zeros((0, 3))
            return z, z.copy(), np.zeros(0)
        parts = [w.filament_segments() for w in self.wires]
        return (np.concatenate([p[0] for p in parts]),
                np.concatenate([p[1] for p in parts]),
                np.concatenate([p[2] for p in parts]))
