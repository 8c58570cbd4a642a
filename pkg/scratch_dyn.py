import time
import numpy as np
from chiptrap.scenario import builtin_scenario
from chiptrap.potential import make_field
from chiptrap import analysis, dynamics
from chiptrap import electrostatics as es
from chiptrap.constants import k_B

cfg = builtin_scenario("fig1_string")
field = make_field(cfg.layout, cfg.species, cfg.voltages)
lo = np.array(cfg.grid.lo); hi = np.array(cfg.grid.hi)

rep = analysis.find_minima(field, np.array([[0.0, -100e-6, 48e-6]]), (lo, hi))
site = analysis.characterize(field, rep.sites[0], (lo, hi), long_window=300e-6)
print(f"site depth {site.depth/k_B*1e6:.0f} uK via {site.escape_channel}")

t0 = time.time()
cloud = dynamics.sample_cloud(field, site, 200, 20e-6, seed=42)
print(f"sampled 200 atoms at 20 uK in {time.time()-t0:.1f}s; "
      f"spread um: {cloud.positions.std(axis=0)*1e6}")

# same seed determinism
cloud2 = dynamics.sample_cloud(field, site, 200, 20e-6, seed=42)
print("deterministic:", np.array_equal(cloud.positions, cloud2.positions))

t0 = time.time()
model = dynamics.DynamicsModel(cfg.layout, cfg.species,
                               panel_set=field.solution.panel_set,
                               box=(lo, hi))
print(f"model grid {model.grid_shape}")
out, rec = model.run(cloud, t_end=5e-3, dt=1e-6, voltages=cfg.voltages)
print(f"5 ms run in {time.time()-t0:.1f}s (incl. grid build); alive "
      f"{out.alive_fraction():.3f}")
e0 = rec.energy[0]; e1 = rec.energy[-1]
m = rec.alive[-1].astype(bool)
drift = np.abs(e1[m] - e0[m]) / np.abs(e0[m])
print(f"energy drift over 5 ms: max {drift.max():.2e} median "
      f"{np.median(drift):.2e}")
t0 = time.time()
out2, rec2 = model.run(cloud, t_end=5e-3, dt=1e-6, voltages=cfg.voltages)
print(f"second run (cached grids): {time.time()-t0:.1f}s")
