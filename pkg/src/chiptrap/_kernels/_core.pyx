# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels: Biot-Savart segments, charged-rectangle fields,
cubic-convolution interpolation, and the velocity-Verlet atom loop.

Contracts match chiptrap._kernels._ref; see that module for reference
semantics.  All per-point scratch lives on helper-function stacks so the
prange loops stay thread-safe.
"""

import numpy as np

cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport atan, fabs, floor, isfinite, log, sqrt, M_PI, NAN

from ..constants import k_e as _k_e, mu_0 as _mu_0

cnp.import_array()

cdef double MU0_4PI = _mu_0 / (4.0 * M_PI)
cdef double K_E = _k_e


# ---------------------------------------------------------------------------
# Biot-Savart
# ---------------------------------------------------------------------------

cdef inline void _seg_b(const double* a0, const double* b0, double cur,
                        double px, double py, double pz, double* out) noexcept nogil:
    cdef double ax = px - a0[0], ay = py - a0[1], az = pz - a0[2]
    cdef double bx = px - b0[0], by = py - b0[1], bz = pz - b0[2]
    cdef double na = sqrt(ax * ax + ay * ay + az * az)
    cdef double nb = sqrt(bx * bx + by * by + bz * bz)
    cdef double adotb = ax * bx + ay * by + az * bz
    cdef double u = na * nb
    cdef double q = u + adotb
    cdef double coef = MU0_4PI * cur * (na + nb) / (u * q)
    out[0] += coef * (ay * bz - az * by)
    out[1] += coef * (az * bx - ax * bz)
    out[2] += coef * (ax * by - ay * bx)


cdef inline void _seg_b_grad(const double* a0, const double* b0, double cur,
                             double px, double py, double pz,
                             double* outb, double* outg) noexcept nogil:
    cdef double ax = px - a0[0], ay = py - a0[1], az = pz - a0[2]
    cdef double bx = px - b0[0], by = py - b0[1], bz = pz - b0[2]
    cdef double lx = b0[0] - a0[0], ly = b0[1] - a0[1], lz = b0[2] - a0[2]
    cdef double na = sqrt(ax * ax + ay * ay + az * az)
    cdef double nb = sqrt(bx * bx + by * by + bz * bz)
    cdef double adotb = ax * bx + ay * by + az * bz
    cdef double u = na * nb
    cdef double q = u + adotb
    cdef double s = na + nb
    cdef double c = s / (u * q)
    cdef double ki = MU0_4PI * cur
    cdef double wx = ay * bz - az * by
    cdef double wy = az * bx - ax * bz
    cdef double wz = ax * by - ay * bx
    outb[0] += ki * c * wx
    outb[1] += ki * c * wy
    outb[2] += ki * c * wz
    cdef double uq = u * q
    cdef double inv_uq2 = 1.0 / (uq * uq)
    cdef double ahx = ax / na, ahy = ay / na, ahz = az / na
    cdef double bhx = bx / nb, bhy = by / nb, bhz = bz / nb
    cdef double dsx = ahx + bhx, dsy = ahy + bhy, dsz = ahz + bhz
    cdef double dux = nb * ahx + na * bhx
    cdef double duy = nb * ahy + na * bhy
    cdef double duz = nb * ahz + na * bhz
    cdef double dqx = dux + ax + bx
    cdef double dqy = duy + ay + by
    cdef double dqz = duz + az + bz
    cdef double dcx = (dsx * uq - s * (dux * q + dqx * u)) * inv_uq2
    cdef double dcy = (dsy * uq - s * (duy * q + dqy * u)) * inv_uq2
    cdef double dcz = (dsz * uq - s * (duz * q + dqz * u)) * inv_uq2
    # dw_i/dp_j = (L x e_j)_i
    outg[0] += ki * (wx * dcx)
    outg[1] += ki * (wx * dcy - c * lz)
    outg[2] += ki * (wx * dcz + c * ly)
    outg[3] += ki * (wy * dcx + c * lz)
    outg[4] += ki * (wy * dcy)
    outg[5] += ki * (wy * dcz - c * lx)
    outg[6] += ki * (wz * dcx - c * ly)
    outg[7] += ki * (wz * dcy + c * lx)
    outg[8] += ki * (wz * dcz)


def segment_b_field(double[:, ::1] seg_a, double[:, ::1] seg_b,
                    double[::1] seg_cur, double[:, ::1] points,
                    double[:, ::1] out):
    cdef Py_ssize_t n = points.shape[0], ns = seg_cur.shape[0]
    cdef Py_ssize_t i, s
    with nogil:
        for i in prange(n, schedule="static"):
            for s in range(ns):
                _seg_b(&seg_a[s, 0], &seg_b[s, 0], seg_cur[s],
                       points[i, 0], points[i, 1], points[i, 2], &out[i, 0])
    return np.asarray(out)


def segment_b_field_gradient(double[:, ::1] seg_a, double[:, ::1] seg_b,
                             double[::1] seg_cur, double[:, ::1] points,
                             double[:, ::1] out_b, double[:, :, ::1] out_g):
    cdef Py_ssize_t n = points.shape[0], ns = seg_cur.shape[0]
    cdef Py_ssize_t i, s
    with nogil:
        for i in prange(n, schedule="static"):
            for s in range(ns):
                _seg_b_grad(&seg_a[s, 0], &seg_b[s, 0], seg_cur[s],
                            points[i, 0], points[i, 1], points[i, 2],
                            &out_b[i, 0], &out_g[i, 0, 0])
    return np.asarray(out_b), np.asarray(out_g)


cdef inline double _point_seg_dist(double[:, ::1] seg_a, double[:, ::1] seg_b,
                                   Py_ssize_t ns, double px, double py,
                                   double pz) noexcept nogil:
    cdef Py_ssize_t s
    cdef double lx, ly, lz, ll, t, fx, fy, fz, d
    cdef double dmin = 1e300
    for s in range(ns):
        lx = seg_b[s, 0] - seg_a[s, 0]
        ly = seg_b[s, 1] - seg_a[s, 1]
        lz = seg_b[s, 2] - seg_a[s, 2]
        ll = lx * lx + ly * ly + lz * lz
        t = ((px - seg_a[s, 0]) * lx + (py - seg_a[s, 1]) * ly +
             (pz - seg_a[s, 2]) * lz) / ll
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
        fx = px - (seg_a[s, 0] + t * lx)
        fy = py - (seg_a[s, 1] + t * ly)
        fz = pz - (seg_a[s, 2] + t * lz)
        d = sqrt(fx * fx + fy * fy + fz * fz)
        if d < dmin:
            dmin = d
    return dmin


def segment_min_distance(double[:, ::1] seg_a, double[:, ::1] seg_b,
                         double[:, ::1] points):
    cdef Py_ssize_t n = points.shape[0], ns = seg_a.shape[0]
    out = np.full(n, np.inf)
    cdef double[::1] dmin = out
    cdef Py_ssize_t i
    with nogil:
        for i in prange(n, schedule="static"):
            dmin[i] = _point_seg_dist(seg_a, seg_b, ns,
                                      points[i, 0], points[i, 1], points[i, 2])
    return out


# ---------------------------------------------------------------------------
# Charged rectangles
# ---------------------------------------------------------------------------

cdef inline double _safe_log(double num, double other2, double r) noexcept nogil:
    if num >= 0.0:
        return log(num + r)
    return log(other2 / (r - num))


cdef inline double _rect_phi(double u, double v, double w,
                             double hu, double hv) noexcept nogil:
    cdef double phi = 0.0
    cdef double w2 = w * w
    cdef double uu, vv, r, sgn, term, uu2, vv2
    cdef int iu, iv
    for iu in range(2):
        uu = u + hu if iu == 0 else u - hu
        for iv in range(2):
            vv = v + hv if iv == 0 else v - hv
            sgn = 1.0 if iu == iv else -1.0
            uu2 = uu * uu
            vv2 = vv * vv
            r = sqrt(uu2 + vv2 + w2)
            term = 0.0
            if uu != 0.0:
                term = uu * _safe_log(vv, uu2 + w2, r)
            if vv != 0.0:
                term = term + vv * _safe_log(uu, vv2 + w2, r)
            if w != 0.0:
                term = term - w * atan((uu * vv) / (w * r))
            phi += sgn * term
    return K_E * phi


cdef inline void _rect_e(double u, double v, double w, double hu, double hv,
                         double* eu, double* ev, double* ew) noexcept nogil:
    cdef double su = 0.0, sv = 0.0, sw = 0.0
    cdef double w2 = w * w
    cdef double uu, vv, r, sgn, uu2, vv2
    cdef int iu, iv
    for iu in range(2):
        uu = u + hu if iu == 0 else u - hu
        for iv in range(2):
            vv = v + hv if iv == 0 else v - hv
            sgn = 1.0 if iu == iv else -1.0
            uu2 = uu * uu
            vv2 = vv * vv
            r = sqrt(uu2 + vv2 + w2)
            su -= sgn * _safe_log(vv, uu2 + w2, r)
            sv -= sgn * _safe_log(uu, vv2 + w2, r)
            if w != 0.0:
                sw += sgn * atan((uu * vv) / (w * r))
    eu[0] = K_E * su
    ev[0] = K_E * sv
    ew[0] = K_E * sw


cdef inline double _point_phi_row(double[:, ::1] cen, double[:, ::1] axu,
                                  double[:, ::1] axv, double[:, ::1] half,
                                  double px, double py, double pz,
                                  Py_ssize_t j) noexcept nogil:
    cdef double rx = px - cen[j, 0]
    cdef double ry = py - cen[j, 1]
    cdef double rz = pz - cen[j, 2]
    cdef double nx = axu[j, 1] * axv[j, 2] - axu[j, 2] * axv[j, 1]
    cdef double ny = axu[j, 2] * axv[j, 0] - axu[j, 0] * axv[j, 2]
    cdef double nz = axu[j, 0] * axv[j, 1] - axu[j, 1] * axv[j, 0]
    cdef double u = rx * axu[j, 0] + ry * axu[j, 1] + rz * axu[j, 2]
    cdef double v = rx * axv[j, 0] + ry * axv[j, 1] + rz * axv[j, 2]
    cdef double w = rx * nx + ry * ny + rz * nz
    return _rect_phi(u, v, w, half[j, 0], half[j, 1])


def rect_potential_matrix(double[:, ::1] cen, double[:, ::1] axu,
                          double[:, ::1] axv, double[:, ::1] half,
                          double[:, ::1] points, double[:, ::1] out):
    cdef Py_ssize_t n = points.shape[0], npan = cen.shape[0]
    cdef Py_ssize_t i, j
    with nogil:
        for i in prange(n, schedule="static"):
            for j in range(npan):
                out[i, j] = _point_phi_row(cen, axu, axv, half,
                                           points[i, 0], points[i, 1],
                                           points[i, 2], j)
    return np.asarray(out)


def rect_potential(double[:, ::1] cen, double[:, ::1] axu, double[:, ::1] axv,
                   double[:, ::1] half, double[::1] sigma,
                   double[:, ::1] points, double[::1] out):
    cdef Py_ssize_t n = points.shape[0], npan = cen.shape[0]
    cdef Py_ssize_t i, j
    cdef double acc
    with nogil:
        for i in prange(n, schedule="static"):
            acc = 0.0
            for j in range(npan):
                acc = acc + sigma[j] * _point_phi_row(cen, axu, axv, half,
                                                      points[i, 0],
                                                      points[i, 1],
                                                      points[i, 2], j)
            out[i] += acc
    return np.asarray(out)


cdef inline void _panel_e_lab(const double* cenj, const double* axuj,
                              const double* axvj, double hu, double hv,
                              double sig, double px, double py, double pz,
                              double far2, double area, double* out) noexcept nogil:
    """Field of one panel at one point, near/far switched, accumulated."""
    cdef double rx = px - cenj[0]
    cdef double ry = py - cenj[1]
    cdef double rz = pz - cenj[2]
    cdef double r2 = rx * rx + ry * ry + rz * rz
    cdef double nx, ny, nz, u, v, w, eu, ev, ew, q, r3i
    if far2 > 0.0 and r2 > far2:
        q = K_E * sig * area
        r3i = q / (r2 * sqrt(r2))
        out[0] += r3i * rx
        out[1] += r3i * ry
        out[2] += r3i * rz
        return
    nx = axuj[1] * axvj[2] - axuj[2] * axvj[1]
    ny = axuj[2] * axvj[0] - axuj[0] * axvj[2]
    nz = axuj[0] * axvj[1] - axuj[1] * axvj[0]
    u = rx * axuj[0] + ry * axuj[1] + rz * axuj[2]
    v = rx * axvj[0] + ry * axvj[1] + rz * axvj[2]
    w = rx * nx + ry * ny + rz * nz
    _rect_e(u, v, w, hu, hv, &eu, &ev, &ew)
    out[0] += sig * (eu * axuj[0] + ev * axvj[0] + ew * nx)
    out[1] += sig * (eu * axuj[1] + ev * axvj[1] + ew * ny)
    out[2] += sig * (eu * axuj[2] + ev * axvj[2] + ew * nz)


cdef inline void _point_e_total(double[:, ::1] cen, double[:, ::1] axu,
                                double[:, ::1] axv, double[:, ::1] half,
                                double[::1] sigma, double[::1] far2,
                                double[::1] area, Py_ssize_t npan,
                                double px, double py, double pz,
                                double* out3) noexcept nogil:
    cdef Py_ssize_t j
    cdef double acc[3]
    acc[0] = 0.0; acc[1] = 0.0; acc[2] = 0.0
    for j in range(npan):
        _panel_e_lab(&cen[j, 0], &axu[j, 0], &axv[j, 0], half[j, 0],
                     half[j, 1], sigma[j], px, py, pz, far2[j], area[j], acc)
    out3[0] += acc[0]
    out3[1] += acc[1]
    out3[2] += acc[2]


def _far_area(double[:, ::1] half, double far_mult):
    npan = half.shape[0]
    far2 = np.zeros(npan)
    area = np.zeros(npan)
    h = np.asarray(half)
    area[:] = 4.0 * h[:, 0] * h[:, 1]
    if far_mult > 0.0:
        diag = 2.0 * np.hypot(h[:, 0], h[:, 1])
        far2[:] = (far_mult * diag) ** 2
    return far2, area


def rect_e_field(double[:, ::1] cen, double[:, ::1] axu, double[:, ::1] axv,
                 double[:, ::1] half, double[::1] sigma,
                 double[:, ::1] points, double far_mult, double[:, ::1] out):
    cdef Py_ssize_t n = points.shape[0], npan = cen.shape[0]
    cdef Py_ssize_t i
    far2_arr, area_arr = _far_area(half, far_mult)
    cdef double[::1] far2 = far2_arr
    cdef double[::1] area = area_arr
    with nogil:
        for i in prange(n, schedule="static"):
            _point_e_total(cen, axu, axv, half, sigma, far2, area, npan,
                           points[i, 0], points[i, 1], points[i, 2],
                           &out[i, 0])
    return np.asarray(out)


cdef inline void _point_e_grad(double[:, ::1] cen, double[:, ::1] axu,
                               double[:, ::1] axv, double[:, ::1] half,
                               double[::1] sigma, double[::1] far2,
                               double[::1] area, Py_ssize_t npan,
                               double px, double py, double pz, double fd_h,
                               double* out_e, double* out_g) noexcept nogil:
    """Hybrid field gradient: analytic point-charge far part + central
    finite differences of the analytic near part."""
    cdef Py_ssize_t j, ax
    cdef double rx, ry, rz, r2, r, q, r3i, r5i
    cdef double ep[3]
    cdef double em[3]
    cdef double sx, sy, sz
    for j in range(npan):
        rx = px - cen[j, 0]
        ry = py - cen[j, 1]
        rz = pz - cen[j, 2]
        r2 = rx * rx + ry * ry + rz * rz
        if far2[j] > 0.0 and r2 > far2[j]:
            q = K_E * sigma[j] * area[j]
            r = sqrt(r2)
            r3i = q / (r2 * r)
            r5i = 3.0 * r3i / r2
            out_e[0] += r3i * rx
            out_e[1] += r3i * ry
            out_e[2] += r3i * rz
            out_g[0] += r3i - r5i * rx * rx
            out_g[1] += -r5i * rx * ry
            out_g[2] += -r5i * rx * rz
            out_g[3] += -r5i * ry * rx
            out_g[4] += r3i - r5i * ry * ry
            out_g[5] += -r5i * ry * rz
            out_g[6] += -r5i * rz * rx
            out_g[7] += -r5i * rz * ry
            out_g[8] += r3i - r5i * rz * rz
        else:
            _panel_e_lab(&cen[j, 0], &axu[j, 0], &axv[j, 0], half[j, 0],
                         half[j, 1], sigma[j], px, py, pz, 0.0, area[j],
                         out_e)
            for ax in range(3):
                sx = fd_h if ax == 0 else 0.0
                sy = fd_h if ax == 1 else 0.0
                sz = fd_h if ax == 2 else 0.0
                ep[0] = 0.0; ep[1] = 0.0; ep[2] = 0.0
                em[0] = 0.0; em[1] = 0.0; em[2] = 0.0
                _panel_e_lab(&cen[j, 0], &axu[j, 0], &axv[j, 0], half[j, 0],
                             half[j, 1], sigma[j], px + sx, py + sy, pz + sz,
                             0.0, area[j], ep)
                _panel_e_lab(&cen[j, 0], &axu[j, 0], &axv[j, 0], half[j, 0],
                             half[j, 1], sigma[j], px - sx, py - sy, pz - sz,
                             0.0, area[j], em)
                out_g[ax] += (ep[0] - em[0]) / (2.0 * fd_h)
                out_g[3 + ax] += (ep[1] - em[1]) / (2.0 * fd_h)
                out_g[6 + ax] += (ep[2] - em[2]) / (2.0 * fd_h)


def rect_e_field_gradient(double[:, ::1] cen, double[:, ::1] axu,
                          double[:, ::1] axv, double[:, ::1] half,
                          double[::1] sigma, double[:, ::1] points,
                          double far_mult, double fd_h,
                          double[:, ::1] out_e, double[:, :, ::1] out_g):
    cdef Py_ssize_t n = points.shape[0], npan = cen.shape[0]
    cdef Py_ssize_t i
    far2_arr, area_arr = _far_area(half, far_mult)
    cdef double[::1] far2 = far2_arr
    cdef double[::1] area = area_arr
    with nogil:
        for i in prange(n, schedule="static"):
            _point_e_grad(cen, axu, axv, half, sigma, far2, area, npan,
                          points[i, 0], points[i, 1], points[i, 2], fd_h,
                          &out_e[i, 0], &out_g[i, 0, 0])
    return np.asarray(out_e), np.asarray(out_g)


# ---------------------------------------------------------------------------
# Cubic-convolution interpolation (Keys, a = -1/2)
# ---------------------------------------------------------------------------

cdef inline void _keys_w(double f, double* w, double* dw) noexcept nogil:
    cdef double t, at, s
    cdef int k
    for k in range(4):
        t = f + 1.0 - k
        at = fabs(t)
        s = 1.0 if t > 0.0 else (-1.0 if t < 0.0 else 0.0)
        if at <= 1.0:
            w[k] = 1.5 * at * at * at - 2.5 * at * at + 1.0
            dw[k] = (4.5 * at * at - 5.0 * at) * s
        else:
            w[k] = -0.5 * (at * at * at - 5.0 * at * at + 8.0 * at - 4.0)
            dw[k] = -0.5 * (3.0 * at * at - 10.0 * at + 8.0) * s


cdef inline void _interp_point(const double* g, Py_ssize_t m,
                               Py_ssize_t nx, Py_ssize_t ny, Py_ssize_t nz,
                               double ox, double oy, double oz,
                               double sx, double sy, double sz,
                               double px, double py, double pz,
                               double* val, double* grad) noexcept nogil:
    """Interpolate m stacked scalar grids at one point.

    val: m values; grad: m x 3 row-major.  Edge stencils clamp.
    """
    cdef double tx = (px - ox) / sx
    cdef double ty = (py - oy) / sy
    cdef double tz = (pz - oz) / sz
    cdef Py_ssize_t ix0 = <Py_ssize_t>floor(tx)
    cdef Py_ssize_t iy0 = <Py_ssize_t>floor(ty)
    cdef Py_ssize_t iz0 = <Py_ssize_t>floor(tz)
    cdef double fx = tx - ix0
    cdef double fy = ty - iy0
    cdef double fz = tz - iz0
    cdef double wx[4]
    cdef double dwx[4]
    cdef double wy[4]
    cdef double dwy[4]
    cdef double wz[4]
    cdef double dwz[4]
    _keys_w(fx, wx, dwx)
    _keys_w(fy, wy, dwy)
    _keys_w(fz, wz, dwz)
    cdef Py_ssize_t jx[4]
    cdef Py_ssize_t jy[4]
    cdef Py_ssize_t jz[4]
    cdef Py_ssize_t k, a, b, c, q
    for k in range(4):
        jx[k] = ix0 - 1 + k
        if jx[k] < 0:
            jx[k] = 0
        elif jx[k] > nx - 1:
            jx[k] = nx - 1
        jy[k] = iy0 - 1 + k
        if jy[k] < 0:
            jy[k] = 0
        elif jy[k] > ny - 1:
            jy[k] = ny - 1
        jz[k] = iz0 - 1 + k
        if jz[k] < 0:
            jz[k] = 0
        elif jz[k] > nz - 1:
            jz[k] = nz - 1
    cdef double v, wbc, dbc_y, dbc_z
    cdef const double* gq
    for q in range(m):
        gq = g + q * nx * ny * nz
        val[q] = 0.0
        grad[3 * q] = 0.0
        grad[3 * q + 1] = 0.0
        grad[3 * q + 2] = 0.0
        for a in range(4):
            for b in range(4):
                for c in range(4):
                    v = gq[(jx[a] * ny + jy[b]) * nz + jz[c]]
                    wbc = wy[b] * wz[c]
                    val[q] += v * wx[a] * wbc
                    grad[3 * q] += v * dwx[a] * wbc
                    grad[3 * q + 1] += v * wx[a] * dwy[b] * wz[c]
                    grad[3 * q + 2] += v * wx[a] * wy[b] * dwz[c]
        grad[3 * q] /= sx
        grad[3 * q + 1] /= sy
        grad[3 * q + 2] /= sz


def cubic_interp(double[:, :, :, ::1] grids, double[::1] origin,
                 double[::1] spacing, double[:, ::1] points,
                 double[:, ::1] out_val, double[:, :, ::1] out_grad):
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t m = grids.shape[0]
    cdef Py_ssize_t nx = grids.shape[1], ny = grids.shape[2], nz = grids.shape[3]
    cdef Py_ssize_t i
    with nogil:
        for i in prange(n, schedule="static"):
            _interp_point(&grids[0, 0, 0, 0], m, nx, ny, nz,
                          origin[0], origin[1], origin[2],
                          spacing[0], spacing[1], spacing[2],
                          points[i, 0], points[i, 1], points[i, 2],
                          &out_val[i, 0], &out_grad[i, 0, 0])
    return np.asarray(out_val), np.asarray(out_grad)


# ---------------------------------------------------------------------------
# Velocity-Verlet
# ---------------------------------------------------------------------------

cdef inline int _force_u(double px, double py, double pz, double t,
                         double mu_eff, double alpha,
                         double[:, ::1] seg_a, double[:, ::1] seg_b,
                         double[::1] seg_cur, const double* bias,
                         double[::1] qseg_t, const double* qgrids,
                         Py_ssize_t nseg_q, Py_ssize_t nx, Py_ssize_t ny,
                         Py_ssize_t nz, const double* origin,
                         const double* spacing,
                         double* force, double* pot) noexcept nogil:
    """Force and potential of the integrator's field model; 0 if non-finite."""
    cdef double bv[3]
    cdef double bg[9]
    cdef double val[3]
    cdef double grad[9]
    cdef Py_ssize_t s, k
    cdef double bmod, bhx, bhy, bhz, tau, tmax, e2
    bv[0] = bias[0]; bv[1] = bias[1]; bv[2] = bias[2]
    for s in range(9):
        bg[s] = 0.0
    for s in range(seg_cur.shape[0]):
        _seg_b_grad(&seg_a[s, 0], &seg_b[s, 0], seg_cur[s], px, py, pz, bv, bg)
    bmod = sqrt(bv[0] * bv[0] + bv[1] * bv[1] + bv[2] * bv[2])
    if bmod > 0.0:
        bhx = bv[0] / bmod; bhy = bv[1] / bmod; bhz = bv[2] / bmod
    else:
        bhx = 0.0; bhy = 0.0; bhz = 0.0
    force[0] = -mu_eff * (bhx * bg[0] + bhy * bg[3] + bhz * bg[6])
    force[1] = -mu_eff * (bhx * bg[1] + bhy * bg[4] + bhz * bg[7])
    force[2] = -mu_eff * (bhx * bg[2] + bhy * bg[5] + bhz * bg[8])
    pot[0] = mu_eff * bmod

    k = 0
    while k < nseg_q - 1 and t >= qseg_t[k + 1]:
        k = k + 1
    tau = t - qseg_t[k]
    tmax = qseg_t[k + 1] - qseg_t[k]
    if tau < 0.0:
        tau = 0.0
    elif tau > tmax:
        tau = tmax
    _interp_point(qgrids + k * 3 * nx * ny * nz, 3, nx, ny, nz,
                  origin[0], origin[1], origin[2],
                  spacing[0], spacing[1], spacing[2],
                  px, py, pz, val, grad)
    e2 = val[0] + tau * val[1] + tau * tau * val[2]
    force[0] += 0.5 * alpha * (grad[0] + tau * grad[3] + tau * tau * grad[6])
    force[1] += 0.5 * alpha * (grad[1] + tau * grad[4] + tau * tau * grad[7])
    force[2] += 0.5 * alpha * (grad[2] + tau * grad[5] + tau * tau * grad[8])
    pot[0] -= 0.5 * alpha * e2
    if isfinite(force[0]) and isfinite(force[1]) and isfinite(force[2]):
        return 1
    return 0


cdef inline void _integrate_atom(Py_ssize_t i, double[:, ::1] pos,
                                 double[:, ::1] vel, cnp.uint8_t[::1] alive,
                                 double[::1] loss_time, double[:, ::1] loss_pos,
                                 double mass, double mu_eff, double alpha,
                                 double[:, ::1] seg_a, double[:, ::1] seg_b,
                                 double[::1] seg_cur, const double* bias,
                                 double[::1] qseg_t, const double* qgrids,
                                 Py_ssize_t nseg_q, Py_ssize_t nx,
                                 Py_ssize_t ny, Py_ssize_t nz,
                                 const double* origin, const double* spacing,
                                 double dt, Py_ssize_t n_steps, double t_start,
                                 double loss_z, const double* box_lo,
                                 const double* box_hi, Py_ssize_t record_every,
                                 float[:, :, ::1] rec_pos,
                                 cnp.uint8_t[:, ::1] rec_alive,
                                 double[:, ::1] rec_energy) noexcept nogil:
    cdef double f[3]
    cdef double u[1]
    cdef double ax, ay, az, nax, nay, naz, t, ke
    cdef double hdt2 = 0.5 * dt * dt
    cdef Py_ssize_t step, rec_i
    cdef int ok, dead
    _force_u(pos[i, 0], pos[i, 1], pos[i, 2], t_start, mu_eff, alpha,
             seg_a, seg_b, seg_cur, bias, qseg_t, qgrids, nseg_q,
             nx, ny, nz, origin, spacing, f, u)
    ax = f[0] / mass; ay = f[1] / mass; az = f[2] / mass
    dead = 0 if alive[i] else 1
    rec_i = 0
    for step in range(1, n_steps + 1):
        t = t_start + step * dt
        if not dead:
            pos[i, 0] += vel[i, 0] * dt + ax * hdt2
            pos[i, 1] += vel[i, 1] * dt + ay * hdt2
            pos[i, 2] += vel[i, 2] * dt + az * hdt2
            ok = _force_u(pos[i, 0], pos[i, 1], pos[i, 2], t, mu_eff, alpha,
                          seg_a, seg_b, seg_cur, bias, qseg_t, qgrids,
                          nseg_q, nx, ny, nz, origin, spacing, f, u)
            if (pos[i, 2] <= loss_z or not ok or
                    pos[i, 0] < box_lo[0] or pos[i, 0] > box_hi[0] or
                    pos[i, 1] < box_lo[1] or pos[i, 1] > box_hi[1] or
                    pos[i, 2] < box_lo[2] or pos[i, 2] > box_hi[2]):
                dead = 1
                alive[i] = 0
                loss_time[i] = t
                loss_pos[i, 0] = pos[i, 0]
                loss_pos[i, 1] = pos[i, 1]
                loss_pos[i, 2] = pos[i, 2]
            else:
                nax = f[0] / mass; nay = f[1] / mass; naz = f[2] / mass
                vel[i, 0] += 0.5 * (ax + nax) * dt
                vel[i, 1] += 0.5 * (ay + nay) * dt
                vel[i, 2] += 0.5 * (az + naz) * dt
                ax = nax; ay = nay; az = naz
        if record_every > 0 and step % record_every == 0:
            rec_pos[rec_i, i, 0] = <float>pos[i, 0]
            rec_pos[rec_i, i, 1] = <float>pos[i, 1]
            rec_pos[rec_i, i, 2] = <float>pos[i, 2]
            rec_alive[rec_i, i] = alive[i]
            if not dead:
                _force_u(pos[i, 0], pos[i, 1], pos[i, 2], t, mu_eff, alpha,
                         seg_a, seg_b, seg_cur, bias, qseg_t, qgrids,
                         nseg_q, nx, ny, nz, origin, spacing, f, u)
                ke = 0.5 * mass * (vel[i, 0] * vel[i, 0] +
                                   vel[i, 1] * vel[i, 1] +
                                   vel[i, 2] * vel[i, 2])
                rec_energy[rec_i, i] = ke + u[0]
                # restore acceleration consistency for the next step
                ax = f[0] / mass; ay = f[1] / mass; az = f[2] / mass
            else:
                rec_energy[rec_i, i] = NAN
            rec_i = rec_i + 1


def verlet_run(double[:, ::1] pos, double[:, ::1] vel,
               cnp.uint8_t[::1] alive, double[::1] loss_time,
               double[:, ::1] loss_pos, double mass, double mu_eff,
               double alpha, double[:, ::1] seg_a, double[:, ::1] seg_b,
               double[::1] seg_cur, double[::1] bias, double[::1] qseg_t,
               double[:, :, :, :, ::1] qgrids, double[::1] origin,
               double[::1] spacing, double dt, Py_ssize_t n_steps,
               double t_start, double loss_z, double[::1] box_lo,
               double[::1] box_hi, Py_ssize_t record_every,
               float[:, :, ::1] rec_pos, cnp.uint8_t[:, ::1] rec_alive,
               double[:, ::1] rec_energy):
    """Integrate all atoms for n_steps; snapshots every record_every steps."""
    cdef Py_ssize_t n = pos.shape[0]
    cdef Py_ssize_t nseg_q = qseg_t.shape[0] - 1
    cdef Py_ssize_t nx = qgrids.shape[2], ny = qgrids.shape[3], nz = qgrids.shape[4]
    cdef Py_ssize_t i
    with nogil:
        for i in prange(n, schedule="static"):
            _integrate_atom(i, pos, vel, alive, loss_time, loss_pos, mass,
                            mu_eff, alpha, seg_a, seg_b, seg_cur, &bias[0],
                            qseg_t, &qgrids[0, 0, 0, 0, 0], nseg_q,
                            nx, ny, nz, &origin[0], &spacing[0], dt, n_steps,
                            t_start, loss_z, &box_lo[0], &box_hi[0],
                            record_every, rec_pos, rec_alive, rec_energy)
    return n_steps / record_every if record_every > 0 else 0
