"""Classical thermal-cloud dynamics in the time-dependent potential.

The integrator force model uses the analytic wire field plus electric
coefficient grids: within each piecewise-linear schedule segment the
voltages are affine in time, so |E|^2 = Q0 + Q1*tau + Q2*tau^2 with three
scalar fields cached per segment (built from per-channel unit-voltage
solutions).  The grids are interpolated with a C1 cubic kernel, so the
integrator sees an exactly conservative force between breakpoints.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from . import electrostatics as es
from .constants import k_B
from .schedule import VoltageSchedule

CACHE_SPACING = (3e-6, 5e-6, 3e-6)   # m; transverse finer than longitudinal
RECORD_INTERVAL = 0.5e-3            # s
HIST_BIN = 5e-6                     # m, fluorescence-scale resolution


@dataclass
class CloudState:
    positions: np.ndarray   # (N, 3)
    velocities: np.ndarray  # (N, 3)
    alive: np.ndarray       # (N,) uint8
    loss_time: np.ndarray   # (N,) s, nan while alive
    loss_pos: np.ndarray    # (N, 3)
    species: object
    time: float = 0.0

    @property
    def n_atoms(self):
        return len(self.positions)

    def alive_fraction(self):
        return float(self.alive.sum()) / max(self.n_atoms, 1)

    def copy(self):
        return CloudState(self.positions.copy(), self.velocities.copy(),
                          self.alive.copy(), self.loss_time.copy(),
                          self.loss_pos.copy(), self.species, self.time)


@dataclass
class TrajectoryRecord:
    times: np.ndarray       # (R,)
    positions: np.ndarray   # (R, N, 3) float32 snapshots
    alive: np.ndarray       # (R, N) uint8
    energy: np.ndarray      # (R, N) total energy in the integrator model
    hist_edges: np.ndarray  # longitudinal bin edges
    histograms: np.ndarray  # (R, nbins) alive-atom counts

    def alive_fraction(self):
        return self.alive.sum(axis=1) / self.alive.shape[1]

    def com(self):
        """Center of mass of alive atoms per snapshot, (R, 3)."""
        out = np.full((len(self.times), 3), np.nan)
        for i in range(len(self.times)):
            m = self.alive[i].astype(bool)
            if m.any():
                out[i] = self.positions[i, m].mean(axis=0)
        return out


def _new_cloud(pos, vel, species, time=0.0):
    n = len(pos)
    return CloudState(positions=np.ascontiguousarray(pos, dtype=float),
                      velocities=np.ascontiguousarray(vel, dtype=float),
                      alive=np.ones(n, dtype=np.uint8),
                      loss_time=np.full(n, np.nan),
                      loss_pos=np.zeros((n, 3)),
                      species=species, time=time)


def _maxwell_velocities(rng, n, temperature, mass):
    return rng.normal(0.0, np.sqrt(k_B * temperature / mass), (n, 3))


def sample_cloud(field, site, n, temperature, seed):
    """Truncated-Boltzmann positions in a trap basin + thermal velocities.

    Deterministic for a given seed.  Warns when the trap depth is below
    k_B*T/10 (heavy truncation).
    """
    if n <= 0:
        raise ValueError("need at least one atom")
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    if site.depth is None or site.depth <= 0:
        raise ValueError("site must carry a positive depth "
                         "(run analysis.characterize first)")
    if site.depth <= k_B * temperature / 10.0:
        warnings.warn("trap depth below k_B*T/10: sampling is heavily "
                      "truncated", stacklevel=2)
    rng = np.random.default_rng(seed)
    p0 = site.position
    depth = site.depth
    # basin extents: march along each axis until U - U_min reaches depth
    half = np.empty((3, 2))
    for ax in range(3):
        for j, sgn in enumerate((-1.0, +1.0)):
            step = 0.5e-6
            d = step
            runmax = 0.0
            while d < 400e-6:
                q = p0.copy()
                q[ax] += sgn * d
                if q[2] <= field.layout.surface_z + 1e-6:
                    break
                du = field.u(q) - site.u_min
                if du >= depth:
                    break
                # crossed a crest into the next basin: stop at the crest
                if runmax - du > max(0.05 * depth, 2e-6 * k_B):
                    break
                runmax = max(runmax, du)
                d += step
                step *= 1.3
            half[ax, j] = d
    lo = p0 - half[:, 0]
    hi = p0 + half[:, 1]
    lo[2] = max(lo[2], field.layout.surface_z + 1e-6)
    positions = np.empty((n, 3))
    got = 0
    beta = 1.0 / (k_B * temperature)
    while got < n:
        m = max(4 * (n - got), 256)
        cand = rng.uniform(lo, hi, (m, 3))
        du = field.u(cand) - site.u_min
        acc = (du < depth) & (rng.uniform(0.0, 1.0, m) < np.exp(-beta * du))
        take = min(acc.sum(), n - got)
        positions[got:got + take] = cand[acc][:take]
        got += take
    vel = _maxwell_velocities(rng, n, temperature, field.species.mass)
    return _new_cloud(positions, vel, field.species)


def sample_guide_cloud(field, n, temperature, y_sigma, y_center=0.0,
                       guide_z=None, seed=0, y_clip=None):
    """Thermal cloud released into the (uncharged) guide: Gaussian along y,
    transverse Boltzmann of the local guide cross-section."""
    rng = np.random.default_rng(seed)
    if guide_z is None:
        guide_z = 50e-6
    beta = 1.0 / (k_B * temperature)
    # transverse window wide enough for the thermal spread
    width = 40e-6
    positions = np.empty((n, 3))
    got = 0
    while got < n:
        m = max(4 * (n - got), 256)
        y = rng.normal(y_center, y_sigma, m)
        if y_clip is not None:
            y = np.clip(y, y_clip[0], y_clip[1])
        x = rng.uniform(-width, width, m)
        z = guide_z + rng.uniform(-width, width, m)
        cand = np.column_stack([x, y, z])
        cand = cand[cand[:, 2] > field.layout.surface_z + 2e-6]
        u = field.u(cand)
        # reference: the guide line has U = 0 for the bare side guide
        acc = rng.uniform(0.0, 1.0, len(cand)) < np.exp(-beta * np.clip(u, 0, None))
        take = min(acc.sum(), n - got)
        positions[got:got + take] = cand[acc][:take]
        got += take
    vel = _maxwell_velocities(rng, n, temperature, field.species.mass)
    return _new_cloud(positions, vel, field.species)


class DynamicsModel:
    """Field cache + integrator for one layout/species/box."""

    def __init__(self, layout, species, panel_set=None, box=None,
                 cache_spacing=CACHE_SPACING, far_mult=es.FAR_FIELD_DIAGONALS):
        self.layout = layout
        self.species = species
        self.panel_set = panel_set
        lo = np.asarray(box[0], dtype=float)
        hi = np.asarray(box[1], dtype=float)
        self.box_lo = lo
        self.box_hi = hi
        self.far_mult = far_mult
        shape = np.maximum(
            4, np.ceil((hi - lo) / np.asarray(cache_spacing)).astype(int) + 1)
        self.grid_shape = tuple(shape)
        self.grid_origin = lo.copy()
        self.grid_spacing = (hi - lo) / (shape - 1)
        self._unit_grids = {}
        self._static_cache = {}
        seg_a, seg_b, cur = layout.wire_segments()
        self.seg_a = np.ascontiguousarray(seg_a)
        self.seg_b = np.ascontiguousarray(seg_b)
        self.seg_cur = np.ascontiguousarray(cur)

    def _nodes(self):
        nx, ny, nz = self.grid_shape
        ax = self.grid_origin[0] + self.grid_spacing[0] * np.arange(nx)
        ay = self.grid_origin[1] + self.grid_spacing[1] * np.arange(ny)
        az = self.grid_origin[2] + self.grid_spacing[2] * np.arange(nz)
        xx, yy, zz = np.meshgrid(ax, ay, az, indexing="ij")
        return np.ascontiguousarray(
            np.column_stack([xx.ravel(), yy.ravel(), zz.ravel()]))

    def _e_grid(self, sigma):
        """E field of a charge vector on the cache grid, (3, nx, ny, nz)."""
        ps = self.panel_set
        pts = self._nodes()
        out = np.zeros_like(pts)
        chunk = 400_000
        for i0 in range(0, len(pts), chunk):
            _kernels.rect_e_field(ps.centers, ps.axes_u, ps.axes_v,
                                  ps.half_widths, np.ascontiguousarray(sigma),
                                  pts[i0:i0 + chunk], self.far_mult,
                                  out[i0:i0 + chunk])
        # nodes are x-major (meshgrid ij), so reshape directly
        return np.ascontiguousarray(out.T.reshape(3, *self.grid_shape))

    def unit_e_grid(self, channel):
        """Cached unit-voltage E grid for one channel."""
        if channel not in self._unit_grids:
            unit = es._unit_solutions(self.panel_set)
            c = self.panel_set.channels.index(channel)
            self._unit_grids[channel] = self._e_grid(unit[:, c])
        return self._unit_grids[channel]

    def _zero_qgrids(self, duration):
        qseg_t = np.array([0.0, max(duration, 1e-9)])
        qgrids = np.zeros((1, 3, 2, 2, 2))
        origin = np.array([-1.0, -1.0, -1.0])
        spacing = np.array([1.0, 1.0, 1.0])
        return qseg_t, qgrids, origin, spacing

    def segment_grids(self, schedule, duration):
        """Per-segment (Q0, Q1, Q2) coefficient grids for |E(t)|^2."""
        if self.panel_set is None or schedule is None or not schedule.channels:
            return self._zero_qgrids(duration)
        times = schedule.segment_times()
        if times[-1] < duration:
            times = np.append(times, duration)
        active = [c for c in schedule.channels]
        # channels at a fixed nonzero voltage would need their own grid too;
        # schedules produced here always include every driven channel
        a_grid = None
        unit = {c: self.unit_e_grid(c) for c in active}
        qseg_t = times
        nseg = len(times) - 1
        nx, ny, nz = self.grid_shape
        qgrids = np.zeros((nseg, 3, nx, ny, nz))
        v0 = {c: schedule.value(c, times[0]) for c in active}
        a_grid = sum(v0[c] * unit[c] for c in active)
        for k in range(nseg):
            t0, t1 = times[k], times[k + 1]
            slope = {c: schedule.slope(c, t0, t1) for c in active}
            b_grid = sum(slope[c] * unit[c] for c in active)
            if not isinstance(b_grid, np.ndarray):
                b_grid = np.zeros_like(a_grid)
            qgrids[k, 0] = np.einsum("cxyz,cxyz->xyz", a_grid, a_grid)
            qgrids[k, 1] = 2.0 * np.einsum("cxyz,cxyz->xyz", a_grid, b_grid)
            qgrids[k, 2] = np.einsum("cxyz,cxyz->xyz", b_grid, b_grid)
            a_grid = a_grid + (t1 - t0) * b_grid
        return (qseg_t, np.ascontiguousarray(qgrids), self.grid_origin,
                self.grid_spacing)

    def static_grids(self, voltages, duration):
        """Single-segment grids for a constant voltage assignment (cached)."""
        if self.panel_set is None or not voltages or \
                not any(v != 0.0 for v in voltages.values()):
            return self._zero_qgrids(duration)
        key = tuple(sorted((k, round(v, 9)) for k, v in voltages.items()))
        if key not in self._static_cache:
            sol = es.solve_charges(self.panel_set, voltages)
            e = self._e_grid(sol.sigma)
            nx, ny, nz = self.grid_shape
            qgrids = np.zeros((1, 3, nx, ny, nz))
            qgrids[0, 0] = np.einsum("cxyz,cxyz->xyz", e, e)
            self._static_cache[key] = np.ascontiguousarray(qgrids)
        return (np.array([0.0, max(duration, 1e-9)]),
                self._static_cache[key], self.grid_origin, self.grid_spacing)

    def run(self, cloud, t_end, dt=1e-6, schedule=None, voltages=None,
            loss_margin=2e-6, record_interval=RECORD_INTERVAL):
        """Velocity-Verlet all atoms to t_end; returns (cloud', record).

        Atoms are lost at z <= surface + loss_margin, outside the box, or
        on non-finite force; lost atoms keep their loss time and position.
        """
        if dt <= 0:
            raise ValueError("dt must be positive")
        out = cloud.copy()
        n_steps = int(round((t_end - cloud.time) / dt))
        record_every = max(1, int(round(record_interval / dt)))
        n_rec = n_steps // record_every
        n = out.n_atoms
        if schedule is not None and any(len(b) > 1
                                        for b in schedule.channels.values()):
            qseg_t, qgrids, origin, spacing = self.segment_grids(
                schedule, t_end)
        else:
            if schedule is not None:
                voltages = {c: b[0, 1] for c, b in schedule.channels.items()}
            qseg_t, qgrids, origin, spacing = self.static_grids(
                voltages or {}, t_end)
        rec_pos = np.zeros((max(n_rec, 1), n, 3), dtype=np.float32)
        rec_alive = np.zeros((max(n_rec, 1), n), dtype=np.uint8)
        rec_energy = np.zeros((max(n_rec, 1), n))
        loss_z = self.layout.surface_z + loss_margin
        _kernels.verlet_run(
            out.positions, out.velocities, out.alive, out.loss_time,
            out.loss_pos, self.species.mass, self.species.mu_eff,
            self.species.alpha, self.seg_a, self.seg_b, self.seg_cur,
            np.ascontiguousarray(self.layout.bias_field),
            np.ascontiguousarray(qseg_t), qgrids,
            np.ascontiguousarray(origin), np.ascontiguousarray(spacing),
            dt, n_steps, cloud.time, loss_z,
            np.ascontiguousarray(self.box_lo),
            np.ascontiguousarray(self.box_hi), record_every,
            rec_pos, rec_alive, rec_energy)
        out.time = cloud.time + n_steps * dt
        times = cloud.time + dt * record_every * np.arange(1, max(n_rec, 1) + 1)
        edges = np.arange(self.box_lo[1], self.box_hi[1] + HIST_BIN, HIST_BIN)
        hists = np.zeros((max(n_rec, 1), len(edges) - 1))
        for i in range(n_rec):
            m = rec_alive[i].astype(bool)
            hists[i], _ = np.histogram(rec_pos[i, m, 1], bins=edges)
        record = TrajectoryRecord(times=times[:max(n_rec, 1)],
                                  positions=rec_pos, alive=rec_alive,
                                  energy=rec_energy, hist_edges=edges,
                                  histograms=hists)
        return out, record


def frame_image(cloud_or_positions, alive, y_edges, z_edges):
    """2D (y, z) histogram of alive atoms, fluorescence-frame style."""
    pos = cloud_or_positions
    m = alive.astype(bool)
    img, _, _ = np.histogram2d(pos[m, 1], pos[m, 2], bins=(y_edges, z_edges))
    return img


def transport_metrics(record, schedule=None, displacement_axis=1):
    """Summary of a transport run: COM path, displacement, survival."""
    com = record.com()
    alive_frac = record.alive_fraction()
    good = ~np.isnan(com[:, displacement_axis])
    displacement = np.nan
    monotone_fraction = np.nan
    if good.sum() >= 2:
        path = com[good, displacement_axis]
        displacement = float(path[-1] - path[0])
        steps = np.diff(path)
        if len(steps):
            sgn = np.sign(displacement) if displacement != 0 else 1.0
            monotone_fraction = float((sgn * steps >= -1e-6).mean())
    return {
        "com_path": com,
        "displacement": displacement,
        "monotone_fraction": monotone_fraction,
        "survival": float(alive_frac[-1]) if len(alive_frac) else np.nan,
        "alive_fraction": alive_frac,
    }
