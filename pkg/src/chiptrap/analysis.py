"""Locating and characterizing traps in the combined potential.

Minima are found by derivative-based descent from seed points; depths probe
three escape channels (straight descent to the chip surface, longitudinal
saddles along the transversally relaxed guide valley, transverse escape
over the bias-field ceiling).  Barriers between two minima use a relaxed
elastic path (perpendicular-gradient steps + equal-arc-length
reparametrization, 21 nodes).
"""

import warnings
from dataclasses import dataclass, replace

import numpy as np
import scipy.optimize

from .constants import k_B

# convergence: |grad U| below 1e-3 * (k_B * 1 uK / 1 um)
GRAD_TOL = 1e-3 * k_B * 1e-6 / 1e-6
MERGE_RADIUS = 1e-6
HESSIAN_STEP = 0.5e-6


@dataclass
class TrapSite:
    """A verified local minimum of the combined potential."""

    position: np.ndarray
    u_min: float
    frequencies: np.ndarray          # angular, rad/s
    hessian_eigenvalues: np.ndarray  # J/m^2
    depth: float = None
    escape_channel: str = None

    def depth_uK(self):
        return self.depth / k_B * 1e6 if self.depth is not None else None


@dataclass
class MinimizationReport:
    sites: list
    failures: list  # (seed, message)


# optimizer scaling: positions in um, energies in k_B*uK, so gradients and
# scipy's internal tolerances are O(1)
_XS = 1e-6
_US = k_B * 1e-6


def find_minima(field, seeds, bounds, merge_radius=MERGE_RADIUS,
                grad_tol=GRAD_TOL, require_positive_hessian=True):
    """Minimize U from every seed; dedupe and verify positive Hessians.

    bounds: (lo, hi) 3-vectors of the search box.  Non-converged seeds are
    reported, not fatal.
    """
    lo = np.asarray(bounds[0], dtype=float)
    hi = np.asarray(bounds[1], dtype=float)
    sites = []
    failures = []

    def objective(ps):
        u, g = field.u_and_gradient(ps * _XS)
        return u / _US, g * (_XS / _US)

    for seed in np.atleast_2d(np.asarray(seeds, dtype=float)):
        res = scipy.optimize.minimize(
            objective, seed / _XS, jac=True, method="L-BFGS-B",
            bounds=list(zip(lo / _XS, hi / _XS)),
            options={"maxiter": 500, "ftol": 1e-14,
                     "gtol": grad_tol * (_XS / _US) * 1e-2})
        p = res.x * _XS
        _, g = field.u_and_gradient(p)
        if not np.isfinite(p).all() or np.linalg.norm(g) > grad_tol:
            failures.append((seed, f"no convergence (|grad|="
                             f"{np.linalg.norm(g):.3e} J/m)"))
            continue
        if np.any(p <= lo + 1e-9) or np.any(p >= hi - 1e-9):
            failures.append((seed, "converged onto the search boundary"))
            continue
        if any(np.linalg.norm(p - s.position) < merge_radius for s in sites):
            continue
        H = field.hessian(p)
        eig = np.linalg.eigvalsh(H)
        if require_positive_hessian and eig.min() <= 0:
            failures.append((seed, f"not a minimum (min eig {eig.min():.3e})"))
            continue
        freqs = np.sqrt(np.abs(eig) / field.species.mass)
        sites.append(TrapSite(position=p, u_min=float(field.u(p)),
                              frequencies=freqs, hessian_eigenvalues=eig))
    sites.sort(key=lambda s: s.position[1])
    return MinimizationReport(sites=sites, failures=failures)


def default_seeds(layout, bounds, n_along=41, height=None):
    """Seed points along the guide axis (x=0) inside the bounds box."""
    lo, hi = bounds
    if height is None:
        height = 0.5 * (lo[2] + hi[2])
    ys = np.linspace(lo[1], hi[1], n_along + 2)[1:-1]
    return np.column_stack([np.zeros(n_along), ys, np.full(n_along, height)])


# ---------------------------------------------------------------------------
# Guide valley profile (transversally relaxed)
# ---------------------------------------------------------------------------

def guide_profile(field, y_values, x0, z0, bounds_xz, max_iter=250,
                  step0=2e-6, step_min=3e-9):
    """Minimize U over (x, z) for each y (all columns relaxed in parallel).

    Returns (points (n, 3), u (n,)); this is the valley floor of the guide,
    i.e. the minimum-energy path for longitudinal motion.  Per-column
    backtracking descent along the normalized transverse gradient; one
    batched field evaluation per iteration.
    """
    (xlo, xhi), (zlo, zhi) = bounds_xz
    ys = np.asarray(y_values, dtype=float)
    n = len(ys)
    pts = np.column_stack([np.full(n, float(x0)), ys, np.full(n, float(z0))])
    u, g = field.u_and_gradient(pts)
    step = np.full(n, step0)
    for _ in range(max_iter):
        active = step > step_min
        if not active.any():
            break
        gxz = g[:, [0, 2]]
        gn = np.linalg.norm(gxz, axis=1)
        gn = np.where(gn > 0, gn, 1.0)
        trial = pts.copy()
        trial[:, 0] = np.clip(pts[:, 0] - step * gxz[:, 0] / gn, xlo, xhi)
        trial[:, 2] = np.clip(pts[:, 2] - step * gxz[:, 1] / gn, zlo, zhi)
        trial[~active] = pts[~active]
        u_t, g_t = field.u_and_gradient(trial)
        better = active & (u_t < u)
        pts[better] = trial[better]
        u[better] = u_t[better]
        g[better] = g_t[better]
        step[better] *= 1.3
        step[active & ~better] *= 0.4
    return pts, u


def modulation_depth(field, y_center, bounds, window=100e-6, step=4e-6,
                     z_start=48e-6):
    """Longitudinal modulation around one well, from the valley profile.

    Works for arbitrarily shallow modulation (no Hessian verification):
    the lower of the two saddles flanking the central well, relative to
    the well bottom.
    """
    lo, hi = bounds
    n = max(8, int(2 * window / step))
    ys = np.linspace(y_center - window, y_center + window, n)
    _, us = guide_profile(field, ys, 0.0, z_start,
                          ((lo[0], hi[0]), (lo[2], hi[2])))
    mid = slice(n // 4, 3 * n // 4)
    i_min = n // 4 + np.argmin(us[mid])
    left = us[:i_min].max() if i_min > 0 else us[i_min]
    right = us[i_min + 1:].max() if i_min < n - 1 else us[i_min]
    return float(min(left, right) - us[i_min])


def profile_minima_count(us, min_prominence):
    """Count interior local minima of a 1D profile with given prominence."""
    n = len(us)
    count = 0
    for i in range(1, n - 1):
        if us[i] <= us[i - 1] and us[i] <= us[i + 1]:
            left = us[:i].max() - us[i]
            right = us[i + 1:].max() - us[i]
            if min(left, right) >= min_prominence:
                # skip plateau duplicates
                if us[i] == us[i - 1]:
                    continue
                count += 1
    return count


# ---------------------------------------------------------------------------
# Trap depth
# ---------------------------------------------------------------------------

def _ray_barrier(field, start, direction, t_max, n=160):
    """Max of U - U(start) along start + t*direction for t in (0, t_max]."""
    ts = np.linspace(0.0, t_max, n)[1:]
    pts = start[None, :] + ts[:, None] * direction[None, :]
    u = field.u(pts)
    u0 = field.u(start)
    return float(np.max(u) - u0), pts, u


def _longitudinal_barrier(field, site, bounds, step=4e-6, window=None):
    """Saddle height toward the adjacent well (or guide end) on each side."""
    lo, hi = bounds
    x0, y0, z0 = site.position
    hysteresis = 0.5e-6 * k_B
    best = np.inf
    for sgn in (+1.0, -1.0):
        y_end = hi[1] if sgn > 0 else lo[1]
        if window is not None:
            y_end = y0 + sgn * window if sgn > 0 else y0 - window
            y_end = min(max(y_end, lo[1]), hi[1])
        n = max(4, int(abs(y_end - y0) / step))
        ys = y0 + sgn * np.linspace(0.0, abs(y_end - y0), n + 1)[1:]
        _, us = guide_profile(field, ys, x0, z0,
                              ((lo[0], hi[0]), (lo[2], hi[2])))
        runmax = site.u_min
        barrier = None
        for u in us:
            runmax = max(runmax, u)
            if u < runmax - hysteresis and u < site.u_min + (runmax - site.u_min) * 0.5:
                barrier = runmax - site.u_min
                break
        if barrier is None:
            barrier = runmax - site.u_min
        best = min(best, barrier)
    return best


def trap_depth(field, site, bounds, long_window=None):
    """Smallest escape barrier and its channel for a verified minimum.

    Channels: to_surface (straight descent beneath the site), longitudinal
    (adjacent saddles along the relaxed valley), transverse (past the
    bias-field ceiling above).
    """
    if site.hessian_eigenvalues.min() <= 0:
        raise ValueError("site is not a verified minimum")
    lo, hi = bounds
    p = site.position
    surface_z = field.layout.surface_z
    # descent fan: straight down plus slanted rays toward the electrodes
    # (the barrier that collapses at high voltage opens toward the charged
    # plates, not directly beneath the guide)
    b_surface = np.inf
    for ang in np.linspace(-75.0, 75.0, 11):
        th = np.radians(ang)
        direction = np.array([np.sin(th), 0.0, -np.cos(th)])
        t_down = (p[2] - (surface_z + 1.5e-6)) / np.cos(th)
        b, pts, _ = _ray_barrier(field, p, direction, t_down)
        inside = (pts[:, 0] > lo[0]) & (pts[:, 0] < hi[0])
        if not inside.all():
            t_down = t_down * np.argmin(inside) / len(pts)
            if t_down <= 0:
                continue
            b, _, _ = _ray_barrier(field, p, direction, t_down)
        b_surface = min(b_surface, b)
    up = np.array([0.0, 0.0, 1.0])
    b_up, _, _ = _ray_barrier(field, p, up, hi[2] - p[2] - 1e-9)
    b_trans = b_up
    for sgn in (+1.0, -1.0):
        side = np.array([sgn, 0.0, 0.0])
        t_side = (hi[0] - p[0] - 1e-9) if sgn > 0 else (p[0] - lo[0] - 1e-9)
        b_side, _, _ = _ray_barrier(field, p, side, t_side)
        b_trans = min(b_trans, b_side)
    b_long = _longitudinal_barrier(field, site, bounds, window=long_window)
    channels = {"to_surface": b_surface, "longitudinal": b_long,
                "transverse": b_trans}
    channel = min(channels, key=channels.get)
    depth = max(channels[channel], 0.0)
    return depth, channel


def characterize(field, site, bounds, long_window=None):
    """TrapSite with depth and escape channel filled in."""
    depth, channel = trap_depth(field, site, bounds, long_window=long_window)
    return replace(site, depth=depth, escape_channel=channel)


# ---------------------------------------------------------------------------
# Relaxed path between two minima
# ---------------------------------------------------------------------------

def relaxed_path(field, p_a, p_b, n_nodes=21, max_iter=500, step=0.25e-6,
                 rel_tol=5e-3):
    """Minimum-energy path by perpendicular-gradient relaxation.

    Interior nodes move by a fixed step along the normalized perpendicular
    force and the chain is reparametrized to equal arc length each
    iteration (scale-invariant, so paths are identical for potentials that
    differ by an overall factor).
    """
    p_a = np.asarray(p_a, dtype=float)
    p_b = np.asarray(p_b, dtype=float)
    ts = np.linspace(0.0, 1.0, n_nodes)
    path = p_a[None, :] + ts[:, None] * (p_b - p_a)[None, :]
    if np.linalg.norm(p_b - p_a) < 1e-12:
        return path
    for _ in range(max_iter):
        u, g = field.u_and_gradient(path)
        tang = np.zeros_like(path)
        tang[1:-1] = path[2:] - path[:-2]
        norms = np.linalg.norm(tang[1:-1], axis=1, keepdims=True)
        tang[1:-1] /= np.where(norms > 0, norms, 1.0)
        gperp = g - np.einsum("ij,ij->i", g, tang)[:, None] * tang
        gnorm = np.linalg.norm(g[1:-1], axis=1)
        pnorm = np.linalg.norm(gperp[1:-1], axis=1)
        if np.max(pnorm / np.where(gnorm > 0, gnorm, 1.0)) < rel_tol:
            break
        direction = gperp[1:-1] / np.where(pnorm > 0, pnorm, 1.0)[:, None]
        path[1:-1] -= step * direction
        # equal-arc-length reparametrization (the elastic constraint)
        seg = np.linalg.norm(np.diff(path, axis=0), axis=1)
        s = np.concatenate([[0.0], np.cumsum(seg)])
        s_new = np.linspace(0.0, s[-1], n_nodes)
        for d in range(3):
            path[:, d] = np.interp(s_new, s, path[:, d])
    return path


def barrier_between(field, site_a, site_b, n_nodes=21, refine=10):
    """Max U on the relaxed path minus max(U_min_a, U_min_b)."""
    if np.linalg.norm(site_a.position - site_b.position) < 1e-12:
        return 0.0
    path = relaxed_path(field, site_a.position, site_b.position,
                        n_nodes=n_nodes)
    # densify linearly between nodes for the 1D maximization
    ts = np.linspace(0.0, 1.0, refine, endpoint=False)
    dense = (path[:-1, None, :] * (1.0 - ts)[None, :, None] +
             path[1:, None, :] * ts[None, :, None]).reshape(-1, 3)
    dense = np.vstack([dense, path[-1]])
    u = field.u(dense)
    return float(u.max() - max(site_a.u_min, site_b.u_min))


# ---------------------------------------------------------------------------
# State-selective double-well analysis
# ---------------------------------------------------------------------------

def state_selective_barrier(field, states, bounds, seeds):
    """Central double-well barrier per magnetic quantum number.

    Rebuilds the potential per m_F on the shared electrostatic solution.
    Rows carry (m_F, barrier_J, electric energy at the fixed inter-well
    probe point); the electric column is identical across rows because the
    electric term does not depend on the atomic state.
    """
    rows = []
    probe = None
    for m in states:
        species_m = replace(field.species, m_F=m)
        if species_m.g_F * species_m.m_F <= 0:
            raise ValueError(f"state m_F={m} is not trappable (g_F*m_F <= 0)")
        fld = field.with_species(species_m)
        rep = find_minima(fld, seeds, bounds)
        if len(rep.sites) < 2:
            rows.append({"m_F": m, "barrier": -np.inf, "n_wells":
                         len(rep.sites), "electric_energy": None})
            continue
        # the two deepest wells
        sites = sorted(rep.sites, key=lambda s: s.u_min)[:2]
        sites.sort(key=lambda s: s.position[1])
        if probe is None:
            probe = 0.5 * (sites[0].position + sites[1].position)
        barrier = barrier_between(fld, sites[0], sites[1])
        rows.append({"m_F": m, "barrier": barrier, "n_wells": len(rep.sites),
                     "electric_energy": None})
    if probe is None:
        probe = np.asarray(seeds, dtype=float).reshape(-1, 3)[0]
    e2 = float(field.electric_e2(probe[None, :])[0])
    e_energy = -0.5 * field.species.alpha * e2
    for row in rows:
        row["electric_energy"] = e_energy
    return rows
