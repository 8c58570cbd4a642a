"""Magnetic field of wire polylines plus a uniform bias field.

The finite-segment Biot-Savart field is analytic; gradients are analytic
as well (needed for forces and trap Hessians).
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .constants import mu_0

SINGULARITY_RADIUS = 1e-9  # m


class SingularityError(ValueError):
    """Evaluation point too close to a wire segment."""


@dataclass(frozen=True)
class MagneticFieldSample:
    position: np.ndarray
    B: np.ndarray
    modulus: float


def segment_field(a, b, current, points):
    """Biot-Savart field of one straight segment at points (N, 3) or (3,)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.array_equal(a, b):
        raise ValueError("segment endpoints coincide")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    single = np.asarray(points).ndim == 1
    seg_a = np.ascontiguousarray(a[None, :])
    seg_b = np.ascontiguousarray(b[None, :])
    cur = np.array([float(current)])
    dmin = _kernels.segment_min_distance(seg_a, seg_b, np.ascontiguousarray(pts))
    if np.any(dmin < SINGULARITY_RADIUS):
        raise SingularityError(
            f"evaluation point within {SINGULARITY_RADIUS} m of a wire segment")
    out = np.zeros_like(pts)
    _kernels.segment_b_field(seg_a, seg_b, cur, np.ascontiguousarray(pts), out)
    return out[0] if single else out


def layout_b_field(layout, points, check_singularity=True):
    """Total field (bias + all wire filaments) at points (N, 3)."""
    pts = np.ascontiguousarray(np.atleast_2d(np.asarray(points, dtype=float)))
    seg_a, seg_b, cur = layout.wire_segments()
    out = np.tile(layout.bias_field, (len(pts), 1))
    if len(cur):
        if check_singularity:
            dmin = _kernels.segment_min_distance(
                np.ascontiguousarray(seg_a), np.ascontiguousarray(seg_b), pts)
            if np.any(dmin < SINGULARITY_RADIUS):
                raise SingularityError(
                    f"evaluation point within {SINGULARITY_RADIUS} m of a wire")
        _kernels.segment_b_field(np.ascontiguousarray(seg_a),
                                 np.ascontiguousarray(seg_b),
                                 np.ascontiguousarray(cur), pts, out)
    return out


def layout_field(layout, point):
    """Field sample (B vector and modulus) at one point above the surface."""
    p = np.asarray(point, dtype=float)
    if p[2] <= layout.surface_z:
        raise ValueError("point must lie strictly above the chip surface")
    b = layout_b_field(layout, p[None, :])[0]
    return MagneticFieldSample(position=p, B=b, modulus=float(np.linalg.norm(b)))


def field_gradient(layout, points, check_singularity=True):
    """B and the 3x3 matrix dB_i/dx_j at points (N, 3)."""
    pts = np.ascontiguousarray(np.atleast_2d(np.asarray(points, dtype=float)))
    seg_a, seg_b, cur = layout.wire_segments()
    out_b = np.tile(layout.bias_field, (len(pts), 1))
    out_g = np.zeros((len(pts), 3, 3))
    if len(cur):
        if check_singularity:
            dmin = _kernels.segment_min_distance(
                np.ascontiguousarray(seg_a), np.ascontiguousarray(seg_b), pts)
            if np.any(dmin < SINGULARITY_RADIUS):
                raise SingularityError(
                    f"evaluation point within {SINGULARITY_RADIUS} m of a wire")
        _kernels.segment_b_field_gradient(np.ascontiguousarray(seg_a),
                                          np.ascontiguousarray(seg_b),
                                          np.ascontiguousarray(cur),
                                          pts, out_b, out_g)
    return out_b, out_g


def guide_height(current, bias):
    """Side-guide minimum height mu0*I/(2*pi*B) for an infinite wire."""
    if current <= 0 or bias <= 0:
        raise ValueError("current and bias must be positive")
    return mu_0 * current / (2.0 * np.pi * bias)
