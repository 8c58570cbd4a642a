"""The combined magnetic + electric trapping potential.

U(r) = mu_B * g_F * m_F * |B(r)| - (alpha/2) * |E(r)|^2

Low-field-seeking atoms are confined transversally by the wire-plus-bias
guide; charged electrodes modulate the potential along the guide through
the always-attractive induced-dipole term.
"""

import numpy as np

from . import electrostatics as es
from . import magnetics as mag
from .gridio import GridDump


def potential_energy(species, B, E):
    """Pointwise combined potential (J).

    B: field 3-vector or modulus (T); E: field 3-vector or magnitude (V/m).
    """
    b = np.asarray(B, dtype=float)
    bmod = np.linalg.norm(b, axis=-1) if b.ndim and b.shape[-1] == 3 else b
    e = np.asarray(E, dtype=float)
    e2 = np.sum(e * e, axis=-1) if e.ndim and e.shape[-1] == 3 else e * e
    return species.mu_eff * bmod - 0.5 * species.alpha * e2


def stark_detuning(species, e_magnitude):
    """Differential-Stark transition shift (Hz) at field magnitude E."""
    if np.any(np.asarray(e_magnitude) < 0):
        raise ValueError("field magnitude must be nonnegative")
    return species.stark_k * np.asarray(e_magnitude, dtype=float) ** 2


class PotentialField:
    """U and its derivatives for one layout + species + voltage assignment.

    The electrostatic solution is shared (the electric term is independent
    of the atomic state); rebinding a different species reuses it.
    """

    def __init__(self, layout, species, solution=None):
        self.layout = layout
        self.species = species
        self.solution = solution  # PanelSolution or None (no charges)

    def with_species(self, species):
        return PotentialField(self.layout, species, self.solution)

    @property
    def voltages(self):
        return dict(self.solution.voltages) if self.solution else {}

    def electric_e2(self, points, check_singularity=False):
        """|E|^2 at points (the species-independent electric part)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.solution is None:
            return np.zeros(len(pts))
        e = es.e_field(self.solution, pts, check_singularity=check_singularity)
        return np.einsum("ij,ij->i", e, e)

    def u(self, points, check_singularity=False):
        """Potential (J) at points (N, 3) or a single (3,) point."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        single = np.asarray(points).ndim == 1
        b = mag.layout_b_field(self.layout, pts,
                               check_singularity=check_singularity)
        bmod = np.linalg.norm(b, axis=1)
        u = self.species.mu_eff * bmod
        if self.solution is not None:
            u = u - 0.5 * self.species.alpha * self.electric_e2(
                pts, check_singularity=check_singularity)
        return float(u[0]) if single else u

    def u_and_gradient(self, points, check_singularity=False):
        """U and grad U; analytic B part, hybrid analytic/FD electric part."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        single = np.asarray(points).ndim == 1
        b, bg = mag.field_gradient(self.layout, pts,
                                   check_singularity=check_singularity)
        bmod = np.linalg.norm(b, axis=1)
        safe = np.where(bmod > 0.0, bmod, 1.0)
        bhat = b / safe[:, None]
        grad = self.species.mu_eff * np.einsum("ni,nij->nj", bhat, bg)
        u = self.species.mu_eff * bmod
        if self.solution is not None:
            e, eg = es.e_field_gradient(self.solution, pts,
                                        check_singularity=check_singularity)
            u = u - 0.5 * self.species.alpha * np.einsum("ij,ij->i", e, e)
            grad = grad - self.species.alpha * np.einsum("ni,nij->nj", e, eg)
        if single:
            return float(u[0]), grad[0]
        return u, grad

    def gradient_fd(self, point, h=1e-7):
        """Independent all-finite-difference gradient (cross-check path)."""
        p = np.asarray(point, dtype=float)
        g = np.zeros(3)
        for j in range(3):
            dp = np.zeros(3)
            dp[j] = h
            g[j] = (self.u(p + dp) - self.u(p - dp)) / (2.0 * h)
        return g

    def hessian(self, point, h=0.5e-6):
        """Central-difference Hessian of U (symmetrized), step h."""
        p = np.asarray(point, dtype=float)
        H = np.zeros((3, 3))
        for j in range(3):
            dp = np.zeros(3)
            dp[j] = h
            _, gp = self.u_and_gradient(p + dp)
            _, gm = self.u_and_gradient(p - dp)
            H[:, j] = (gp - gm) / (2.0 * h)
        return 0.5 * (H + H.T)

    def u_grid(self, spec, chunk=200_000):
        """U sampled on a GridSpec, float64 (chunked over nodes)."""
        pts = spec.points()
        out = np.empty(len(pts))
        for i0 in range(0, len(pts), chunk):
            out[i0:i0 + chunk] = self.u(pts[i0:i0 + chunk])
        return out.reshape(spec.shape)


def make_field(layout, species, voltages, target_edge=None,
               ground_target_edge=None):
    """Panelize + solve and wrap into a PotentialField.

    A zero/empty voltage assignment (or a layout with no electrodes) gives
    a purely magnetic field; the electric term is then exactly absent.
    """
    kwargs = {}
    if target_edge is not None:
        kwargs["target_edge"] = target_edge
    if ground_target_edge is not None:
        kwargs["ground_target_edge"] = ground_target_edge
    has_polys = layout.electrodes or layout.ground_plane
    if not has_polys or not any(v != 0.0 for v in voltages.values()):
        return PotentialField(layout, species, None)
    panel_set = es.panelize(layout, **kwargs)
    solution = es.solve_charges(panel_set, voltages)
    return PotentialField(layout, species, solution)


def grid_interior_minima(u):
    """Boolean array of strict interior local minima (26-neighborhood)."""
    interior = np.ones_like(u, dtype=bool)
    is_min = np.ones_like(u, dtype=bool)
    for ax in range(3):
        sl_lo = [slice(None)] * 3
        sl_hi = [slice(None)] * 3
        sl_lo[ax] = slice(0, 1)
        sl_hi[ax] = slice(-1, None)
        interior[tuple(sl_lo)] = False
        interior[tuple(sl_hi)] = False
    for dx in (-1, 0, 1):
        for dy in (-1, 0, 1):
            for dz in (-1, 0, 1):
                if dx == dy == dz == 0:
                    continue
                shifted = np.roll(u, (dx, dy, dz), axis=(0, 1, 2))
                is_min &= u < shifted
    return is_min & interior


def potential_grid(field, spec, iso_level=None, reference="local_min"):
    """Sample U on a grid; optionally also return the iso mask.

    The mask marks nodes with U - U_ref <= iso_level.  The default
    reference is the deepest interior local minimum of the sampled grid,
    i.e. the deepest trap bottom (the near-surface attraction sheet only
    descends toward the conductors and has no interior minimum); this is
    the trap-depth energy convention, with U_ref = 0 on a bare guide axis.
    reference="min" uses the raw grid minimum, "absolute" uses 0.
    """
    u = field.u_grid(spec)
    dump = GridDump(spec=spec, values=u, quantity="U", unit="J")
    if iso_level is None:
        return dump, None
    if reference == "local_min":
        mins = grid_interior_minima(u)
        u_ref = float(u[mins].min()) if mins.any() else float(np.nanmin(u))
    elif reference == "min":
        u_ref = float(np.nanmin(u))
    elif reference == "absolute":
        u_ref = 0.0
    else:
        raise ValueError("reference must be 'local_min', 'min' or 'absolute'")
    mask = (u - u_ref) <= iso_level
    mask_dump = GridDump(spec=spec, values=mask.astype(np.float32),
                         quantity="mask", unit="bool")
    return dump, mask_dump


def count_pockets(mask_dump, exclude_bottom=True, min_voxels=2):
    """Count connected components of an iso mask.

    Components touching the bottom grid face are the surface-attached
    region, not trap pockets, and are excluded by default.
    """
    from scipy import ndimage

    mask = mask_dump.values > 0.5
    labels, n = ndimage.label(mask)
    count = 0
    for lab in range(1, n + 1):
        comp = labels == lab
        if comp.sum() < min_voxels:
            continue
        if exclude_bottom and comp[:, :, 0].any():
            continue
        count += 1
    return count
