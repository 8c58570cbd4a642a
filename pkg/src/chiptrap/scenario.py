"""Scenario configuration: parsing, serialization, and packaged setups.

The packaged scenarios use one default chip: a guiding wire along y with
1.5 mm leads, six 100x100 um electrodes on alternating sides of the wire
(center-to-center pitch 200 um, 20 um insulation grooves), and a 2x2 mm
grounded mirror window around them.  The bias field points along -x so it
cancels the wire field on a line above the wire.

Scenario JSON quantities are bare SI numbers or "<number> <unit>" strings
(A, G, T, V, um, mm, m, uK, K, us, ms, s).
"""

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import ChipLayout, Electrode, LayoutError, Wire, rectangle
from .gridio import GridSpec
from .schedule import VoltageSchedule, motor_schedule, splitter_schedule
from .species import LI7, AtomSpecies
from .units import UnitError, to_si

# default chip dimensions (m); groove width sits inside the fabricated
# 10-50 um range, electrode size/wire width calibrated so the published
# operating points produce the published trap depths
WIRE_WIDTH = 20e-6
GROOVE = 15e-6
ELECTRODE_SIZE = 140e-6
ELECTRODE_PITCH = 200e-6
N_ELECTRODES = 6
LEAD_LENGTH = 1.5e-3
WIRE_HALF_LENGTH = 1.05e-3
WINDOW_HALF = 1.0e-3

ELECTRODE_X = WIRE_WIDTH / 2 + GROOVE + ELECTRODE_SIZE / 2  # 95 um
CUTOUT_HALF = ELECTRODE_SIZE / 2 + GROOVE                   # 70 um
STRIP_HALF = WIRE_WIDTH / 2 + GROOVE                        # 45 um

BUILTIN_NAMES = ("fig1_string", "fig2_dump", "fig3_motor", "fig4_split",
                 "state_selective")


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class DynamicsParams:
    n_atoms: int = 1000
    temperature: float = 100e-6   # K
    dt: float = 1e-6              # s
    duration: float = 50e-3      # s
    loss_margin: float = 2e-6    # m above the surface
    seed: int = 1234
    cloud_sigma_y: float = None  # guide-released cloud extent; None = trap


@dataclass
class ScenarioConfig:
    name: str
    layout: ChipLayout
    species: AtomSpecies
    voltages: dict
    schedule: VoltageSchedule
    grid: GridSpec
    dynamics: DynamicsParams

    def __post_init__(self):
        if self.grid.lo[2] <= self.layout.surface_z:
            raise ScenarioError("grid box must lie strictly above the chip "
                                "surface")
        known = set(self.layout.channels)
        for ch in self.voltages:
            if ch not in known:
                raise ScenarioError(f"voltage channel {ch!r} not in layout")
        if self.schedule is not None:
            for ch in self.schedule.channels:
                if ch not in known:
                    raise ScenarioError(
                        f"schedule channel {ch!r} not in layout")


def electrode_centers():
    """(channel, x, y) of the six default electrodes, alternating sides."""
    out = []
    for k in range(N_ELECTRODES):
        y = (k - (N_ELECTRODES - 1) / 2) * ELECTRODE_PITCH
        x = ELECTRODE_X if k % 2 == 0 else -ELECTRODE_X
        out.append((f"e{k + 1}", x, y))
    return out


def _ground_rectangles():
    """Rectangles tiling the grounded window minus wire strip and cutouts."""
    rects = []
    w = WINDOW_HALF
    # outer slabs beyond the electrode columns
    outer = ELECTRODE_X + CUTOUT_HALF  # 165 um
    rects.append(rectangle(-(outer + w) / 2, 0, w - outer, 2 * w))
    rects.append(rectangle((outer + w) / 2, 0, w - outer, 2 * w))
    # electrode columns, split around the cutout bands
    for side in (+1, -1):
        ys = sorted(y for _, x, y in electrode_centers()
                    if (x > 0) == (side > 0))
        edges = [-w]
        for y in ys:
            edges += [y - CUTOUT_HALF, y + CUTOUT_HALF]
        edges.append(w)
        x_mid = side * (STRIP_HALF + outer) / 2
        width = outer - STRIP_HALF
        for lo, hi in zip(edges[0::2], edges[1::2]):
            if hi - lo > GROOVE:
                rects.append(rectangle(x_mid, (lo + hi) / 2, width, hi - lo))
    return tuple(rects)


def default_chip(current, bias_tesla, wire_shape="Z", filaments=1,
                 ground=True, extra_wires=()):
    """The default six-electrode chip layout."""
    fan = []
    if wire_shape == "Z":
        verts = [(-LEAD_LENGTH, -WIRE_HALF_LENGTH, 0.0),
                 (0.0, -WIRE_HALF_LENGTH, 0.0),
                 (0.0, WIRE_HALF_LENGTH, 0.0),
                 (LEAD_LENGTH, WIRE_HALF_LENGTH, 0.0)]
    elif wire_shape == "L":
        # the open end is broadened: the current spreads into a tapering
        # ribbon (filament fan), the surface field drops below the bias,
        # and the guide line dives into the chip instead of mirroring
        # atoms at an abrupt wire end
        fan_start = 0.70e-3
        fan_half_width = 300e-6
        n_fan = 25
        verts = [(-LEAD_LENGTH, -WIRE_HALF_LENGTH, 0.0),
                 (0.0, -WIRE_HALF_LENGTH, 0.0),
                 (0.0, fan_start, 0.0)]
        for x_end in np.linspace(-fan_half_width, fan_half_width, n_fan):
            fan.append(Wire(vertices=np.array([(0.0, fan_start, 0.0),
                                               (x_end, WIRE_HALF_LENGTH, 0.0)]),
                            current=current / n_fan))
    else:
        raise ScenarioError(f"unknown wire shape {wire_shape!r}")
    wires = [Wire(vertices=np.asarray(verts), current=current,
                  filaments=filaments, width=WIRE_WIDTH, spread_axis=0)]
    wires += fan
    wires += list(extra_wires)
    electrodes = tuple(
        Electrode(name, rectangle(x, y, ELECTRODE_SIZE, ELECTRODE_SIZE))
        for name, x, y in electrode_centers())
    return ChipLayout(
        wires=tuple(wires),
        electrodes=electrodes,
        bias_field=np.array([-bias_tesla, 0.0, 0.0]),
        ground_plane=_ground_rectangles() if ground else (),
    )


def _crossing_wire(y, current):
    verts = np.array([(-WIRE_HALF_LENGTH, y, 0.0), (WIRE_HALF_LENGTH, y, 0.0)])
    return Wire(vertices=verts, current=current)


# state-selective double well: two outer crossing wires close the well
# along y and a counter-running center wire raises the inter-well barrier
SS_CENTER_Y = -100e-6
SS_WIRE_OFFSET = 150e-6
SS_OUTER_CURRENT = 0.2
SS_BARRIER_CURRENT = -0.05


def _um(v):
    return v * 1e-6


def builtin_scenario(name):
    """A packaged scenario with the published operating parameters."""
    if name == "fig1_string":
        layout = default_chip(current=1.0, bias_tesla=40e-4)
        voltages = {f"e{k}": 475.0 for k in range(1, 7)}
        grid = GridSpec(lo=(_um(-100), _um(-700), _um(2)),
                        hi=(_um(100), _um(700), _um(102)),
                        shape=(100, 280, 50))
        dyn = DynamicsParams(n_atoms=1000, temperature=100e-6)
        return ScenarioConfig(name=name, layout=layout, species=LI7,
                              voltages=voltages, schedule=None, grid=grid,
                              dynamics=dyn)
    if name == "fig2_dump":
        layout = default_chip(current=1.6, bias_tesla=44e-4, wire_shape="L")
        voltages = {f"e{k}": 300.0 for k in range(1, 7)}
        grid = GridSpec(lo=(_um(-80), _um(-950), _um(2)),
                        hi=(_um(80), _um(950), _um(220)),
                        shape=(64, 380, 88))
        dyn = DynamicsParams(n_atoms=2000, temperature=100e-6,
                             duration=50e-3, cloud_sigma_y=300e-6)
        schedule = VoltageSchedule.constant(voltages, dyn.duration,
                                            nonadiabatic_switch_on=True)
        return ScenarioConfig(name=name, layout=layout, species=LI7,
                              voltages=voltages, schedule=schedule, grid=grid,
                              dynamics=dyn)
    if name == "fig3_motor":
        layout = default_chip(current=1.5, bias_tesla=30e-4)
        voltages = {"e2": 280.0}
        schedule = motor_schedule(280.0, 200.0, 7.5e-3, 2,
                                  channels=("e2", "e3", "e4"))
        grid = GridSpec(lo=(_um(-80), _um(-550), _um(2)),
                        hi=(_um(80), _um(350), _um(260)),
                        shape=(64, 180, 52))
        dyn = DynamicsParams(n_atoms=600, temperature=25e-6, duration=30e-3)
        return ScenarioConfig(name=name, layout=layout, species=LI7,
                              voltages=voltages, schedule=schedule, grid=grid,
                              dynamics=dyn)
    if name == "fig4_split":
        layout = default_chip(current=1.5, bias_tesla=30e-4)
        voltages = {"e3": 280.0}
        schedule = splitter_schedule(280.0, 200.0, 15e-3, center="e3",
                                     flanks=("e2", "e4"))
        grid = GridSpec(lo=(_um(-80), _um(-550), _um(2)),
                        hi=(_um(80), _um(350), _um(260)),
                        shape=(64, 180, 52))
        dyn = DynamicsParams(n_atoms=600, temperature=25e-6, duration=15e-3)
        return ScenarioConfig(name=name, layout=layout, species=LI7,
                              voltages=voltages, schedule=schedule, grid=grid,
                              dynamics=dyn)
    if name == "state_selective":
        extra = (_crossing_wire(SS_CENTER_Y - SS_WIRE_OFFSET, SS_OUTER_CURRENT),
                 _crossing_wire(SS_CENTER_Y + SS_WIRE_OFFSET, SS_OUTER_CURRENT),
                 _crossing_wire(SS_CENTER_Y, SS_BARRIER_CURRENT))
        layout = default_chip(current=1.0, bias_tesla=40e-4, extra_wires=extra)
        voltages = {"e3": 0.0}
        grid = GridSpec(lo=(_um(-80), _um(-400), _um(2)),
                        hi=(_um(80), _um(200), _um(160)),
                        shape=(64, 120, 64))
        dyn = DynamicsParams(n_atoms=200, temperature=10e-6, duration=10e-3)
        return ScenarioConfig(name=name, layout=layout, species=LI7,
                              voltages=voltages, schedule=None, grid=grid,
                              dynamics=dyn)
    raise ScenarioError(f"unknown builtin scenario {name!r}; choose from "
                        f"{BUILTIN_NAMES}")


# ---------------------------------------------------------------------------
# Parsing and serialization
# ---------------------------------------------------------------------------

def _get(d, key, path, default=None, required=False):
    if key not in d:
        if required:
            raise ScenarioError(f"{path}: missing required field {key!r}")
        return default
    return d[key]


def _vec3(value, dimension, path):
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise ScenarioError(f"{path}: expected a 3-component list")
    return np.array([to_si(v, dimension, f"{path}[{i}]")
                     for i, v in enumerate(value)])


def parse_scenario(doc):
    """Parse a scenario JSON document (text or already-loaded dict)."""
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"parse error at line {exc.lineno}, column "
                                f"{exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a JSON object")
    try:
        return _parse_dict(doc)
    except UnitError as exc:
        raise ScenarioError(str(exc)) from exc
    except LayoutError as exc:
        raise ScenarioError(f"layout invariant violated: {exc}") from exc


def _parse_dict(doc):
    lay = _get(doc, "layout", "", required=True)
    surface_z = to_si(_get(lay, "surface_z", "layout", 0.0), "length",
                      "layout.surface_z")
    bias = _vec3(_get(lay, "bias_field", "layout", required=True), "field",
                 "layout.bias_field")
    wires = []
    for i, w in enumerate(_get(lay, "wires", "layout", [])):
        path = f"layout.wires[{i}]"
        verts = [_vec3(v, "length", f"{path}.vertices[{j}]")
                 for j, v in enumerate(_get(w, "vertices", path, required=True))]
        wires.append(Wire(
            vertices=np.asarray(verts),
            current=to_si(_get(w, "current", path, required=True), "current",
                          f"{path}.current"),
            filaments=int(_get(w, "filaments", path, 1)),
            width=to_si(_get(w, "width", path, 0.0), "length",
                        f"{path}.width"),
            spread_axis=int(_get(w, "spread_axis", path, 0))))
    electrodes = []
    for i, e in enumerate(_get(lay, "electrodes", "layout", [])):
        path = f"layout.electrodes[{i}]"
        poly = [[to_si(c, "length", f"{path}.polygon[{j}][{k}]")
                 for k, c in enumerate(pt)]
                for j, pt in enumerate(_get(e, "polygon", path, required=True))]
        electrodes.append(Electrode(
            channel=str(_get(e, "channel", path, required=True)),
            polygon=np.asarray(poly)))
    ground = []
    for i, g in enumerate(_get(lay, "ground_plane", "layout", []) or []):
        path = f"layout.ground_plane[{i}]"
        ground.append(np.asarray(
            [[to_si(c, "length", f"{path}[{j}][{k}]")
              for k, c in enumerate(pt)] for j, pt in enumerate(g)]))
    layout = ChipLayout(wires=tuple(wires), electrodes=tuple(electrodes),
                        bias_field=bias, ground_plane=tuple(ground),
                        surface_z=surface_z)

    sp = _get(doc, "species", "", None)
    if sp is None:
        species = LI7
    else:
        # mass, alpha, stark_k have no display units; they are bare SI
        species = AtomSpecies(
            mass=float(_get(sp, "mass", "species", required=True)),
            g_F=float(_get(sp, "g_F", "species", required=True)),
            m_F=int(_get(sp, "m_F", "species", required=True)),
            alpha=float(_get(sp, "alpha", "species", required=True)),
            stark_k=float(_get(sp, "stark_k", "species", LI7.stark_k)),
            label=str(_get(sp, "label", "species", "")))

    voltages = {str(k): to_si(v, "voltage", f"voltages.{k}")
                for k, v in _get(doc, "voltages", "", {}).items()}

    sched_doc = _get(doc, "schedule", "", None)
    schedule = None
    if sched_doc is not None:
        channels = {}
        for name, bps in _get(sched_doc, "channels", "schedule",
                              required=True).items():
            channels[str(name)] = [
                [to_si(t, "time", f"schedule.channels.{name}[{i}][0]"),
                 to_si(v, "voltage", f"schedule.channels.{name}[{i}][1]")]
                for i, (t, v) in enumerate(bps)]
        schedule = VoltageSchedule(
            channels,
            to_si(_get(sched_doc, "duration", "schedule", required=True),
                  "time", "schedule.duration"),
            nonadiabatic_switch_on=bool(
                _get(sched_doc, "nonadiabatic_switch_on", "schedule", False)))

    gr = _get(doc, "grid", "", required=True)
    grid = GridSpec(
        lo=tuple(_vec3(_get(gr, "lo", "grid", required=True), "length",
                       "grid.lo")),
        hi=tuple(_vec3(_get(gr, "hi", "grid", required=True), "length",
                       "grid.hi")),
        shape=tuple(int(n) for n in _get(gr, "shape", "grid", required=True)))

    dy = _get(doc, "dynamics", "", {})
    sigma_y = _get(dy, "cloud_sigma_y", "dynamics", None)
    dynamics = DynamicsParams(
        n_atoms=int(_get(dy, "atoms", "dynamics", 1000)),
        temperature=to_si(_get(dy, "temperature", "dynamics", 100e-6),
                          "temperature", "dynamics.temperature"),
        dt=to_si(_get(dy, "dt", "dynamics", 1e-6), "time", "dynamics.dt"),
        duration=to_si(_get(dy, "duration", "dynamics", 50e-3), "time",
                       "dynamics.duration"),
        loss_margin=to_si(_get(dy, "loss_margin", "dynamics", 2e-6),
                          "length", "dynamics.loss_margin"),
        seed=int(_get(dy, "seed", "dynamics", 1234)),
        cloud_sigma_y=None if sigma_y is None else
        to_si(sigma_y, "length", "dynamics.cloud_sigma_y"))

    return ScenarioConfig(name=str(_get(doc, "name", "", "scenario")),
                          layout=layout, species=species, voltages=voltages,
                          schedule=schedule, grid=grid, dynamics=dynamics)


def scenario_to_dict(config):
    """Serialize to plain SI numbers (parse_scenario round-trips exactly)."""
    lay = config.layout
    doc = {
        "name": config.name,
        "layout": {
            "surface_z": lay.surface_z,
            "bias_field": list(lay.bias_field),
            "wires": [{
                "vertices": w.vertices.tolist(),
                "current": w.current,
                "filaments": w.filaments,
                "width": w.width,
                "spread_axis": w.spread_axis,
            } for w in lay.wires],
            "electrodes": [{
                "channel": e.channel,
                "polygon": e.polygon.tolist(),
            } for e in lay.electrodes],
            "ground_plane": [g.tolist() for g in lay.ground_plane],
        },
        "species": {
            "label": config.species.label,
            "mass": config.species.mass,
            "g_F": config.species.g_F,
            "m_F": config.species.m_F,
            "alpha": config.species.alpha,
            "stark_k": config.species.stark_k,
        },
        "voltages": dict(config.voltages),
        "schedule": (config.schedule.to_dict()
                     if config.schedule is not None else None),
        "grid": {"lo": list(config.grid.lo), "hi": list(config.grid.hi),
                 "shape": list(config.grid.shape)},
        "dynamics": {
            "atoms": config.dynamics.n_atoms,
            "temperature": config.dynamics.temperature,
            "dt": config.dynamics.dt,
            "duration": config.dynamics.duration,
            "loss_margin": config.dynamics.loss_margin,
            "seed": config.dynamics.seed,
            "cloud_sigma_y": config.dynamics.cloud_sigma_y,
        },
    }
    return doc


def scenario_to_json(config, indent=2):
    return json.dumps(scenario_to_dict(config), indent=indent)
