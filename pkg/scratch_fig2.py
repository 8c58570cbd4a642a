import time
import numpy as np
from chiptrap.scenario import builtin_scenario
from chiptrap.potential import make_field
from chiptrap import dynamics
from chiptrap.constants import k_B

t00 = time.time()
cfg = builtin_scenario("fig2_dump")
bare = make_field(cfg.layout, cfg.species, {})
lo = np.array(cfg.grid.lo); hi = np.array(cfg.grid.hi)

from chiptrap.magnetics import guide_height
zg = guide_height(1.6, 44e-4)
print(f"guide height fig2: {zg*1e6:.1f} um")

t0 = time.time()
cloud = dynamics.sample_guide_cloud(bare, cfg.dynamics.n_atoms,
                                    cfg.dynamics.temperature,
                                    y_sigma=cfg.dynamics.cloud_sigma_y,
                                    guide_z=zg, seed=cfg.dynamics.seed)
print(f"cloud sampled in {time.time()-t0:.1f}s; z mean "
      f"{cloud.positions[:,2].mean()*1e6:.1f} um, y std "
      f"{cloud.positions[:,1].std()*1e6:.0f} um")

from chiptrap import electrostatics as es
panel_set = es.panelize(cfg.layout)
model = dynamics.DynamicsModel(cfg.layout, cfg.species, panel_set=panel_set,
                               box=(lo, hi))
print(f"cache grid {model.grid_shape}")

# V = 0 run
t0 = time.time()
out0, rec0 = model.run(cloud, t_end=50e-3, dt=1e-6, voltages={})
print(f"V=0 run: {time.time()-t0:.0f}s, alive {out0.alive_fraction():.4f}")

# V = +300 run (same initial cloud)
t0 = time.time()
outV, recV = model.run(cloud, t_end=50e-3, dt=1e-6, schedule=cfg.schedule)
print(f"V=300 run: {time.time()-t0:.0f}s, alive {outV.alive_fraction():.4f}")
print(f"contrast: {outV.alive_fraction()/max(out0.alive_fraction(),1e-9):.1f}x")

# 6-peak check: peak windows at electrode centers
from chiptrap.scenario import electrode_centers
pos = outV.positions[outV.alive.astype(bool)]
print("alive atoms by electrode window:")
counts = []
for name, x, y in electrode_centers():
    c = int(((np.abs(pos[:, 1] - y) < 70e-6)).sum())
    counts.append(c)
    print(f"  {name} (y={y*1e6:+.0f}): {c}")
between = int((np.abs(np.abs(pos[:, 1]) - 200e-6) < 30e-6).sum())
print(f"between-electrode atoms (|y|~200): {between}")
print(f"total wall time {time.time()-t00:.0f}s")
