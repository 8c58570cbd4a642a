"""Pure-numpy reference implementations of the hot kernels.

Same contracts as the compiled backend in ``_core.pyx``; selected at import
time when the extension is unavailable (or CHIPTRAP_BACKEND=python).
Vectorized over evaluation points; callers chunk very large point sets.
"""

import numpy as np

from ..constants import k_e, mu_0

_K_BS = mu_0 / (4.0 * np.pi)


# ---------------------------------------------------------------------------
# Biot-Savart segments
# ---------------------------------------------------------------------------

def segment_b_field(seg_a, seg_b, seg_cur, points, out):
    """Accumulate the field of straight current segments into out (N, 3)."""
    p = points
    for s in range(len(seg_cur)):
        a = p - seg_a[s]
        b = p - seg_b[s]
        na = np.linalg.norm(a, axis=1)
        nb = np.linalg.norm(b, axis=1)
        w = np.cross(a, b)
        q = na * nb + np.einsum("ij,ij->i", a, b)
        denom = na * nb * q
        coef = _K_BS * seg_cur[s] * (na + nb) / denom
        out += coef[:, None] * w
    return out


def segment_b_field_gradient(seg_a, seg_b, seg_cur, points, out_b, out_g):
    """Field and spatial gradient d B_i / d x_j of straight segments."""
    p = points
    eye = np.eye(3)
    for s in range(len(seg_cur)):
        a = p - seg_a[s]
        b = p - seg_b[s]
        lvec = seg_b[s] - seg_a[s]
        na = np.linalg.norm(a, axis=1)
        nb = np.linalg.norm(b, axis=1)
        w = np.cross(a, b)
        adotb = np.einsum("ij,ij->i", a, b)
        u = na * nb
        q = u + adotb
        ssum = na + nb
        c = ssum / (u * q)
        ki = _K_BS * seg_cur[s]
        out_b += ki * c[:, None] * w

        ahat = a / na[:, None]
        bhat = b / nb[:, None]
        ds = ahat + bhat                      # d(|a|+|b|)
        du = nb[:, None] * ahat + na[:, None] * bhat
        dq = du + a + b
        # dc = [ds*(u q) - s*(du q + u dq)] / (u q)^2
        uq = u * q
        dc = (ds * uq[:, None]
              - ssum[:, None] * (du * q[:, None] + dq * u[:, None])) / \
            (uq ** 2)[:, None]
        # d w_i / d x_j = (L cross e_j)_i
        wgrad = np.cross(lvec[None, :], eye)[None, :, :]   # (1, j, i)
        wgrad = np.swapaxes(wgrad, 1, 2)                    # (1, i, j)
        out_g += ki * (w[:, :, None] * dc[:, None, :] +
                       c[:, None, None] * wgrad)
    return out_b, out_g


def segment_min_distance(seg_a, seg_b, points):
    """Minimum distance from each point to any of the segments."""
    p = points
    dmin = np.full(len(p), np.inf)
    for s in range(len(seg_a)):
        lvec = seg_b[s] - seg_a[s]
        ll = lvec @ lvec
        t = np.clip(((p - seg_a[s]) @ lvec) / ll, 0.0, 1.0)
        foot = seg_a[s] + t[:, None] * lvec
        np.minimum(dmin, np.linalg.norm(p - foot, axis=1), out=dmin)
    return dmin


# ---------------------------------------------------------------------------
# Uniformly charged rectangles
# ---------------------------------------------------------------------------

def _safe_log(num, other2, r):
    """log(num + r) robust when num < 0 and r ~ |num|.

    other2 = r^2 - num^2 computed stably by the caller (sum of the squares
    of the remaining coordinates).
    """
    pos = num >= 0.0
    out = np.empty_like(r)
    out[pos] = np.log(num[pos] + r[pos])
    neg = ~pos
    out[neg] = np.log(other2[neg] / (r[neg] - num[neg]))
    return out


def _panel_frame_coords(center, axu, axv, points):
    rel = points - center
    return rel @ axu, rel @ axv, rel @ np.cross(axu, axv)


def _rect_phi_uvw(u, v, w, hu, hv):
    """Potential of a unit-sigma rectangle, panel-frame coords (vectorized)."""
    phi = np.zeros_like(u)
    w2 = w * w
    for su, uu in ((1.0, u + hu), (-1.0, u - hu)):
        for sv, vv in ((1.0, v + hv), (-1.0, v - hv)):
            sgn = su * sv
            uu2 = uu * uu
            vv2 = vv * vv
            r = np.sqrt(uu2 + vv2 + w2)
            term = np.zeros_like(r)
            m = uu != 0.0
            term[m] = uu[m] * _safe_log(vv[m], (uu2 + w2)[m], r[m])
            m = vv != 0.0
            term[m] += vv[m] * _safe_log(uu[m], (vv2 + w2)[m], r[m])
            m = w != 0.0
            term[m] -= w[m] * np.arctan((uu[m] * vv[m]) / (w[m] * r[m]))
            phi += sgn * term
    return k_e * phi


def _rect_e_uvw(u, v, w, hu, hv):
    """E field of a unit-sigma rectangle in its own frame."""
    eu = np.zeros_like(u)
    ev = np.zeros_like(u)
    ew = np.zeros_like(u)
    w2 = w * w
    wnz = w != 0.0
    for su, uu in ((1.0, u + hu), (-1.0, u - hu)):
        for sv, vv in ((1.0, v + hv), (-1.0, v - hv)):
            sgn = su * sv
            uu2 = uu * uu
            vv2 = vv * vv
            r = np.sqrt(uu2 + vv2 + w2)
            eu -= sgn * _safe_log(vv, uu2 + w2, r)
            ev -= sgn * _safe_log(uu, vv2 + w2, r)
            # normal component: 0 exactly in-plane outside the footprint
            ew[wnz] += sgn * np.arctan((uu[wnz] * vv[wnz]) / (w[wnz] * r[wnz]))
    return k_e * eu, k_e * ev, k_e * ew


def rect_potential_matrix(cen, axu, axv, half, points, out):
    """Unit-sigma potential coefficients, out[n, p] (volts per C/m^2)."""
    for j in range(len(cen)):
        u, v, w = _panel_frame_coords(cen[j], axu[j], axv[j], points)
        out[:, j] = _rect_phi_uvw(u, v, w, half[j, 0], half[j, 1])
    return out


def rect_potential(cen, axu, axv, half, sigma, points, out):
    """Potential of charged rectangles at points, accumulated into out (N,)."""
    for j in range(len(cen)):
        u, v, w = _panel_frame_coords(cen[j], axu[j], axv[j], points)
        out += sigma[j] * _rect_phi_uvw(u, v, w, half[j, 0], half[j, 1])
    return out


def rect_e_field(cen, axu, axv, half, sigma, points, far_mult, out):
    """E field of charged rectangles at points, accumulated into out (N, 3).

    Panels farther than far_mult panel-diagonals are treated as point
    charges; far_mult <= 0 disables the approximation.
    """
    for j in range(len(cen)):
        rel = points - cen[j]
        if far_mult > 0.0:
            diag = 2.0 * np.hypot(half[j, 0], half[j, 1])
            r2 = np.einsum("ij,ij->i", rel, rel)
            far = r2 > (far_mult * diag) ** 2
        else:
            far = np.zeros(len(points), dtype=bool)
        near = ~far
        if far.any():
            q = sigma[j] * 4.0 * half[j, 0] * half[j, 1]
            r = np.sqrt(r2[far])
            out[far] += (k_e * q / r ** 3)[:, None] * rel[far]
        if near.any():
            nhat = np.cross(axu[j], axv[j])
            rn = rel[near]
            u = rn @ axu[j]
            v = rn @ axv[j]
            w = rn @ nhat
            eu, ev, ew = _rect_e_uvw(u, v, w, half[j, 0], half[j, 1])
            out[near] += sigma[j] * (eu[:, None] * axu[j] +
                                     ev[:, None] * axv[j] +
                                     ew[:, None] * nhat)
    return out


def rect_e_field_gradient(cen, axu, axv, half, sigma, points, far_mult,
                          fd_h, out_e, out_g):
    """E and dE_i/dx_j: analytic point-charge far field, central finite
    differences of the analytic near field (step fd_h)."""
    n = len(points)
    near_acc = np.zeros((6, n, 3))
    for j in range(len(cen)):
        rel = points - cen[j]
        diag = 2.0 * np.hypot(half[j, 0], half[j, 1])
        r2 = np.einsum("ij,ij->i", rel, rel)
        if far_mult > 0.0:
            far = r2 > (far_mult * diag) ** 2
        else:
            far = np.zeros(n, dtype=bool)
        near = ~far
        if far.any():
            q = sigma[j] * 4.0 * half[j, 0] * half[j, 1]
            rf = rel[far]
            r = np.sqrt(r2[far])
            out_e[far] += (k_e * q / r ** 3)[:, None] * rf
            # d/dx_j [k q x_i / r^3]
            g = (np.eye(3)[None, :, :] / (r ** 3)[:, None, None]
                 - 3.0 * rf[:, :, None] * rf[:, None, :] / (r ** 5)[:, None, None])
            out_g[far] += k_e * q * g
        if near.any():
            nhat = np.cross(axu[j], axv[j])
            rn = rel[near]

            def add_e(shift, acc):
                u = (rn + shift) @ axu[j]
                v = (rn + shift) @ axv[j]
                w = (rn + shift) @ nhat
                eu, ev, ew = _rect_e_uvw(u, v, w, half[j, 0], half[j, 1])
                acc[near] += sigma[j] * (eu[:, None] * axu[j] +
                                         ev[:, None] * axv[j] +
                                         ew[:, None] * nhat)

            add_e(np.zeros(3), out_e)
            for ax in range(3):
                shift = np.zeros(3)
                shift[ax] = fd_h
                add_e(shift, near_acc[2 * ax])
                add_e(-shift, near_acc[2 * ax + 1])
    for ax in range(3):
        out_g[:, :, ax] += (near_acc[2 * ax] - near_acc[2 * ax + 1]) / (2.0 * fd_h)
    return out_e, out_g


# ---------------------------------------------------------------------------
# Cubic-convolution interpolation (Keys, a = -1/2): C1, 3rd-order accurate
# ---------------------------------------------------------------------------

def _keys_weights(f):
    """Weights and derivative weights for stencil offsets -1..2 (a=-0.5)."""
    # distances t_k = f + 1 - k for k = 0..3, all in [0, 2)
    w = np.empty(f.shape + (4,))
    dw = np.empty_like(w)
    for k in range(4):
        t = np.abs(f + 1.0 - k)
        sgn = np.sign(f + 1.0 - k)
        inner = t <= 1.0
        wk = np.where(inner,
                      1.5 * t ** 3 - 2.5 * t ** 2 + 1.0,
                      -0.5 * (t ** 3 - 5.0 * t ** 2 + 8.0 * t - 4.0))
        dwk = np.where(inner,
                       4.5 * t ** 2 - 5.0 * t,
                       -0.5 * (3.0 * t ** 2 - 10.0 * t + 8.0))
        w[..., k] = wk
        dw[..., k] = dwk * sgn
    return w, dw


def cubic_interp(grids, origin, spacing, points, out_val, out_grad):
    """Interpolate M scalar grids (and gradients) at N points.

    grids: (M, nx, ny, nz) float64; out_val: (N, M); out_grad: (N, M, 3).
    Edge stencils clamp to the boundary node (callers keep trajectories
    inside the interior).
    """
    m, nx, ny, nz = grids.shape
    t = (points - origin) / spacing
    i0 = np.floor(t).astype(np.int64)
    f = t - i0
    wx, dwx = _keys_weights(f[:, 0])
    wy, dwy = _keys_weights(f[:, 1])
    wz, dwz = _keys_weights(f[:, 2])
    ix = np.clip(i0[:, 0, None] + np.arange(-1, 3), 0, nx - 1)
    iy = np.clip(i0[:, 1, None] + np.arange(-1, 3), 0, ny - 1)
    iz = np.clip(i0[:, 2, None] + np.arange(-1, 3), 0, nz - 1)
    out_val[:] = 0.0
    out_grad[:] = 0.0
    for a in range(4):
        for b in range(4):
            for c in range(4):
                vals = grids[:, ix[:, a], iy[:, b], iz[:, c]]  # (M, N)
                vals = vals.T                                   # (N, M)
                wxyz = wx[:, a] * wy[:, b] * wz[:, c]
                out_val += vals * wxyz[:, None]
                out_grad[:, :, 0] += vals * (dwx[:, a] * wy[:, b] * wz[:, c])[:, None]
                out_grad[:, :, 1] += vals * (wx[:, a] * dwy[:, b] * wz[:, c])[:, None]
                out_grad[:, :, 2] += vals * (wx[:, a] * wy[:, b] * dwz[:, c])[:, None]
    out_grad /= spacing[None, None, :]
    return out_val, out_grad


# ---------------------------------------------------------------------------
# Velocity-Verlet integration in B(r) + schedule-segment electric grids
# ---------------------------------------------------------------------------

def _forces(pos, t, mass, mu_eff, alpha, seg_a, seg_b, seg_cur, bias,
            qseg_t, qgrids, origin, spacing):
    """Force and potential energy for all atoms at time t."""
    n = len(pos)
    bvec = np.tile(bias, (n, 1))
    grad = np.zeros((n, 3, 3))
    if len(seg_cur):
        segment_b_field_gradient(seg_a, seg_b, seg_cur, pos, bvec, grad)
    bmod = np.linalg.norm(bvec, axis=1)
    safe = np.where(bmod > 0.0, bmod, 1.0)
    bhat = bvec / safe[:, None]
    grad_bmod = np.einsum("ni,nij->nj", bhat, grad)
    force = -mu_eff * grad_bmod
    pot = mu_eff * bmod

    k = np.searchsorted(qseg_t, t, side="right") - 1
    k = min(max(k, 0), len(qseg_t) - 2)
    tau = min(max(t - qseg_t[k], 0.0), qseg_t[k + 1] - qseg_t[k])
    vals = np.empty((n, 3))
    grads = np.empty((n, 3, 3))
    cubic_interp(qgrids[k], origin, spacing, pos, vals, grads)
    e2 = vals[:, 0] + tau * vals[:, 1] + tau * tau * vals[:, 2]
    de2 = grads[:, 0] + tau * grads[:, 1] + tau * tau * grads[:, 2]
    force += 0.5 * alpha * de2
    pot -= 0.5 * alpha * e2
    return force, pot


def verlet_run(pos, vel, alive, loss_time, loss_pos, mass, mu_eff, alpha,
               seg_a, seg_b, seg_cur, bias, qseg_t, qgrids, origin, spacing,
               dt, n_steps, t_start, loss_z, box_lo, box_hi, record_every,
               rec_pos, rec_alive, rec_energy):
    """Integrate all atoms for n_steps; record snapshots every record_every.

    Dead atoms keep their loss position; records carry position, alive flag,
    and per-atom total energy in the integrator's own field model.
    """
    t = t_start
    args = (mass, mu_eff, alpha, seg_a, seg_b, seg_cur, bias,
            qseg_t, qgrids, origin, spacing)
    force, _ = _forces(pos, t, *args)
    acc = force / mass
    rec_i = 0
    for step in range(1, n_steps + 1):
        live = alive.astype(bool)
        pos[live] += vel[live] * dt + 0.5 * acc[live] * dt * dt
        t = t_start + step * dt
        # losses: below margin, out of box, or non-finite force
        bad = live & ((pos[:, 2] <= loss_z) |
                      np.any(pos < box_lo, axis=1) |
                      np.any(pos > box_hi, axis=1))
        force, _ = _forces(pos, t, *args)
        bad |= live & ~np.isfinite(force).all(axis=1)
        if bad.any():
            alive[bad] = 0
            loss_time[bad] = t
            loss_pos[bad] = pos[bad]
        live = alive.astype(bool)
        new_acc = force / mass
        vel[live] += 0.5 * (acc[live] + new_acc[live]) * dt
        acc = new_acc
        if step % record_every == 0:
            rec_pos[rec_i] = pos
            rec_alive[rec_i] = alive
            _, pot = _forces(pos, t, *args)
            en = 0.5 * mass * np.einsum("ij,ij->i", vel, vel) + pot
            en[~alive.astype(bool)] = np.nan
            rec_energy[rec_i] = en
            rec_i += 1
    return rec_i
