"""Boundary-element electrostatics for voltage-driven chip electrodes.

Electrode polygons (and ground-plane polygons pinned to 0 V) are tiled by
rectangular constant-charge panels; collocation at panel centroids with the
analytic uniformly-charged-rectangle potential gives a dense influence
system.  Per-channel unit-voltage solutions are cached so arbitrary and
time-dependent voltage assignments are cheap superpositions.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import _kernels
from .geometry import (GROUND_CHANNEL, point_in_polygon, polygon_area,
                       _segments_intersect)

PANEL_PLANE_EPS = 1e-9  # m, singularity guard distance from a panel
DEFAULT_TARGET_EDGE = 12.5e-6
DEFAULT_GROUND_FACTOR = 16  # ground-plane panels are this much coarser
FAR_FIELD_DIAGONALS = 8.0
GRADIENT_FD_STEP = 1e-8


class SolverError(RuntimeError):
    """Dense solve failed (degenerate panel geometry)."""


class PanelSingularityError(ValueError):
    """Evaluation point lies on a charged panel."""


@dataclass
class PanelSet:
    """Rectangular panels tiling the electrode and ground polygons."""

    centers: np.ndarray       # (P, 3)
    axes_u: np.ndarray        # (P, 3) unit
    axes_v: np.ndarray        # (P, 3) unit
    half_widths: np.ndarray   # (P, 2)
    channel_index: np.ndarray  # (P,) int; -1 = ground
    channels: tuple           # channel names, index order
    _ops: dict = field(default_factory=dict, repr=False)

    @property
    def n_panels(self):
        return len(self.centers)

    @property
    def areas(self):
        return 4.0 * self.half_widths[:, 0] * self.half_widths[:, 1]

    def channel_area(self, index):
        return self.areas[self.channel_index == index].sum()


def _cell_state(cell, poly):
    """0 outside, 1 inside, 2 boundary for an axis-aligned cell vs polygon.

    The cell is shrunk by a relative epsilon before testing so that cells
    whose edges coincide with the polygon boundary (the common exactly
    tiled case) classify as interior rather than boundary.
    """
    x0, x1, y0, y1 = cell
    eps = 1e-9 * max(x1 - x0, y1 - y0)
    x0s, x1s, y0s, y1s = x0 + eps, x1 - eps, y0 + eps, y1 - eps
    corners = np.array([[x0s, y0s], [x1s, y0s], [x1s, y1s], [x0s, y1s]])
    inside = point_in_polygon(corners, poly)
    # polygon vertices inside the (shrunk) cell force boundary handling
    vin = ((poly[:, 0] > x0s) & (poly[:, 0] < x1s) &
           (poly[:, 1] > y0s) & (poly[:, 1] < y1s))
    crossing = False
    n = len(poly)
    if not vin.any():
        for i in range(n):
            a, b = poly[i], poly[(i + 1) % n]
            if max(a[0], b[0]) < x0s or min(a[0], b[0]) > x1s:
                continue
            if max(a[1], b[1]) < y0s or min(a[1], b[1]) > y1s:
                continue
            for c1, c2 in ((corners[0], corners[1]), (corners[1], corners[2]),
                           (corners[2], corners[3]), (corners[3], corners[0])):
                if _segments_intersect(a, b, c1, c2):
                    crossing = True
                    break
            if crossing:
                break
    if vin.any() or crossing:
        return 2
    return 1 if inside.all() else 0


def _dist_to_boundary(px, py, poly):
    """Distance from a point to the polygon boundary."""
    n = len(poly)
    p = np.array([px, py])
    d = np.inf
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        ab = b - a
        t = np.clip(np.dot(p - a, ab) / np.dot(ab, ab), 0.0, 1.0)
        d = min(d, np.hypot(*(p - (a + t * ab))))
    return d


def _tile_polygon(poly, target, boundary_depth=3):
    """Tile one polygon with cells; returns (x0, x1, y0, y1) rectangles.

    Base cells have edge <= target; cells within one panel-width of the
    polygon boundary are split in half once (graded refinement); cells cut
    by the boundary are subdivided recursively, keeping sub-cells whose
    center lies inside.
    """
    xmin, ymin = poly.min(axis=0)
    xmax, ymax = poly.max(axis=0)
    nx = max(1, int(np.ceil((xmax - xmin) / target - 1e-9)))
    ny = max(1, int(np.ceil((ymax - ymin) / target - 1e-9)))
    dx = (xmax - xmin) / nx
    dy = (ymax - ymin) / ny
    edge = max(dx, dy)
    out = []

    def emit_boundary(cell, depth):
        if _cell_state(cell, poly) == 1:
            out.append(cell)
            return
        x0, x1, y0, y1 = cell
        if depth == 0:
            cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
            if point_in_polygon(np.array([[cx, cy]]), poly)[0]:
                out.append(cell)
            return
        xm, ym = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
        for sub in ((x0, xm, y0, ym), (xm, x1, y0, ym),
                    (x0, xm, ym, y1), (xm, x1, ym, y1)):
            if _cell_state(sub, poly) != 0:
                emit_boundary(sub, depth - 1)

    for i in range(nx):
        for j in range(ny):
            cell = (xmin + i * dx, xmin + (i + 1) * dx,
                    ymin + j * dy, ymin + (j + 1) * dy)
            state = _cell_state(cell, poly)
            if state == 0:
                continue
            if state == 2:
                emit_boundary(cell, boundary_depth)
                continue
            cx, cy = 0.5 * (cell[0] + cell[1]), 0.5 * (cell[2] + cell[3])
            if _dist_to_boundary(cx, cy, poly) <= 1.5 * edge:
                xm, ym = cx, cy
                out.extend([(cell[0], xm, cell[2], ym),
                            (xm, cell[1], cell[2], ym),
                            (cell[0], xm, ym, cell[3]),
                            (xm, cell[1], ym, cell[3])])
            else:
                out.append(cell)
    return out


def panelize(layout, target_edge=DEFAULT_TARGET_EDGE, ground_target_edge=None,
             max_coverage_error=5e-3):
    """Tile all electrode and ground polygons of a layout into panels."""
    if target_edge <= 0:
        raise ValueError("target_edge must be positive")
    if ground_target_edge is None:
        ground_target_edge = DEFAULT_GROUND_FACTOR * target_edge
    centers, halfs, chan_idx = [], [], []
    channels = tuple(e.channel for e in layout.electrodes)
    jobs = [(i, e.polygon, target_edge) for i, e in enumerate(layout.electrodes)]
    jobs += [(-1, g, ground_target_edge) for g in layout.ground_plane]
    for idx, poly, target in jobs:
        area = abs(polygon_area(poly))
        depth = 3
        while True:
            cells = _tile_polygon(poly, target, boundary_depth=depth)
            cov = sum((c[1] - c[0]) * (c[3] - c[2]) for c in cells)
            if abs(cov - area) <= max_coverage_error * area or depth >= 6:
                break
            depth += 1
        if abs(cov - area) > max_coverage_error * area:
            raise ValueError("cannot tile polygon to required coverage")
        for x0, x1, y0, y1 in cells:
            centers.append([0.5 * (x0 + x1), 0.5 * (y0 + y1), layout.surface_z])
            halfs.append([0.5 * (x1 - x0), 0.5 * (y1 - y0)])
            chan_idx.append(idx)
    n = len(centers)
    return PanelSet(
        centers=np.ascontiguousarray(centers, dtype=float),
        axes_u=np.ascontiguousarray(np.tile([1.0, 0.0, 0.0], (n, 1))),
        axes_v=np.ascontiguousarray(np.tile([0.0, 1.0, 0.0], (n, 1))),
        half_widths=np.ascontiguousarray(halfs, dtype=float),
        channel_index=np.asarray(chan_idx, dtype=np.int64),
        channels=channels,
    )


def make_panel_set(centers, axes_u, axes_v, half_widths, channel_index,
                   channels):
    """Assemble a PanelSet from raw arrays (arbitrary panel orientations)."""
    return PanelSet(
        centers=np.ascontiguousarray(centers, dtype=float),
        axes_u=np.ascontiguousarray(axes_u, dtype=float),
        axes_v=np.ascontiguousarray(axes_v, dtype=float),
        half_widths=np.ascontiguousarray(half_widths, dtype=float),
        channel_index=np.asarray(channel_index, dtype=np.int64),
        channels=tuple(channels),
    )


@dataclass(frozen=True)
class PanelSolution:
    """Solved surface charge density for one voltage assignment."""

    panel_set: PanelSet
    sigma: np.ndarray     # (P,) C/m^2
    voltages: dict        # channel -> volt


def _unit_solutions(panel_set):
    """(P, C) unit-voltage charge densities; cached on the panel set."""
    if "unit_sigma" in panel_set._ops:
        return panel_set._ops["unit_sigma"]
    p = panel_set.n_panels
    mat = np.zeros((p, p))
    _kernels.rect_potential_matrix(panel_set.centers, panel_set.axes_u,
                                   panel_set.axes_v, panel_set.half_widths,
                                   panel_set.centers, mat)
    nchan = len(panel_set.channels)
    rhs = np.zeros((p, nchan))
    for c in range(nchan):
        rhs[panel_set.channel_index == c, c] = 1.0
    try:
        lu, piv = scipy.linalg.lu_factor(mat)
        unit = scipy.linalg.lu_solve((lu, piv), rhs)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise SolverError(f"influence matrix solve failed: {exc}") from exc
    if not np.isfinite(unit).all():
        cond = np.linalg.cond(mat)
        raise SolverError(f"influence matrix ill-conditioned (cond={cond:.3e})")
    panel_set._ops["unit_sigma"] = unit
    return unit


def solve_charges(panel_set, voltages):
    """Charge densities for a channel->volt map (missing channels at 0 V)."""
    for name in voltages:
        if name not in panel_set.channels:
            raise KeyError(f"unknown voltage channel {name!r}")
    unit = _unit_solutions(panel_set)
    v = np.array([float(voltages.get(c, 0.0)) for c in panel_set.channels])
    sigma = unit @ v
    return PanelSolution(panel_set=panel_set, sigma=sigma, voltages=dict(voltages))


def _check_singular(panel_set, points):
    """Raise if any point lies within the guard distance of a panel."""
    ps = panel_set
    normals = np.cross(ps.axes_u, ps.axes_v)
    offsets = np.einsum("ij,ij->i", normals, ps.centers)
    planes = {}
    for j in range(ps.n_panels):
        key = (tuple(np.round(normals[j], 9)), round(offsets[j], 12))
        planes.setdefault(key, []).append(j)
    for (nhat, off), idx in planes.items():
        nhat = np.asarray(nhat)
        d = points @ nhat - off
        close = np.abs(d) < PANEL_PLANE_EPS
        if not close.any():
            continue
        pts = points[close]
        for j in idx:
            rel = pts - ps.centers[j]
            u = rel @ ps.axes_u[j]
            v = rel @ ps.axes_v[j]
            hit = (np.abs(u) <= ps.half_widths[j, 0]) & \
                  (np.abs(v) <= ps.half_widths[j, 1])
            if hit.any():
                raise PanelSingularityError(
                    f"evaluation point within {PANEL_PLANE_EPS} m of panel {j}")


def e_field(solution, points, far_mult=FAR_FIELD_DIAGONALS,
            check_singularity=True):
    """E (V/m) of the solved charges at points (N, 3) or (3,)."""
    pts = np.ascontiguousarray(np.atleast_2d(np.asarray(points, dtype=float)))
    single = np.asarray(points).ndim == 1
    if check_singularity:
        _check_singular(solution.panel_set, pts)
    out = np.zeros_like(pts)
    ps = solution.panel_set
    _kernels.rect_e_field(ps.centers, ps.axes_u, ps.axes_v, ps.half_widths,
                          solution.sigma, pts, far_mult, out)
    return out[0] if single else out


def e_field_gradient(solution, points, far_mult=FAR_FIELD_DIAGONALS,
                     fd_h=GRADIENT_FD_STEP, check_singularity=True):
    """E and dE_i/dx_j at points; far panels analytic, near panels by
    central differences of the analytic field."""
    pts = np.ascontiguousarray(np.atleast_2d(np.asarray(points, dtype=float)))
    single = np.asarray(points).ndim == 1
    if check_singularity:
        _check_singular(solution.panel_set, pts)
    out_e = np.zeros_like(pts)
    out_g = np.zeros((len(pts), 3, 3))
    ps = solution.panel_set
    _kernels.rect_e_field_gradient(ps.centers, ps.axes_u, ps.axes_v,
                                   ps.half_widths, solution.sigma, pts,
                                   far_mult, fd_h, out_e, out_g)
    if single:
        return out_e[0], out_g[0]
    return out_e, out_g


def potential(solution, points):
    """Electrostatic potential (V) of the solved charges at points."""
    pts = np.ascontiguousarray(np.atleast_2d(np.asarray(points, dtype=float)))
    single = np.asarray(points).ndim == 1
    out = np.zeros(len(pts))
    ps = solution.panel_set
    _kernels.rect_potential(ps.centers, ps.axes_u, ps.axes_v, ps.half_widths,
                            solution.sigma, pts, out)
    return out[0] if single else out


def collocation_residual(solution):
    """Max |reproduced - assigned| voltage at panel centroids."""
    ps = solution.panel_set
    target = np.zeros(ps.n_panels)
    for c, name in enumerate(ps.channels):
        target[ps.channel_index == c] = solution.voltages.get(name, 0.0)
    phi = potential(solution, ps.centers)
    return float(np.abs(phi - target).max())


def total_charge(solution, channel=None):
    """Total charge (C), optionally restricted to one channel."""
    ps = solution.panel_set
    if channel is None:
        mask = slice(None)
    else:
        mask = ps.channel_index == ps.channels.index(channel)
    return float((solution.sigma[mask] * ps.areas[mask]).sum())
