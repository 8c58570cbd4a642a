import time
import numpy as np
from chiptrap.scenario import builtin_scenario
from chiptrap.potential import make_field, potential_grid, count_pockets
from chiptrap import analysis
from chiptrap.constants import k_B
from chiptrap.gridio import GridSpec

t0 = time.time()
cfg = builtin_scenario("fig1_string")
field = make_field(cfg.layout, cfg.species, cfg.voltages)
print(f"setup {time.time()-t0:.1f}s, panels {field.solution.panel_set.n_panels}")

lo = np.array(cfg.grid.lo); hi = np.array(cfg.grid.hi)
t0 = time.time()
seeds = analysis.default_seeds(cfg.layout, (lo, hi), n_along=31, height=48e-6)
rep = analysis.find_minima(field, seeds, (lo, hi))
print(f"find_minima {time.time()-t0:.1f}s: {len(rep.sites)} sites")
for s in rep.sites:
    print(f"  ({s.position[0]*1e6:6.2f},{s.position[1]*1e6:7.1f},"
          f"{s.position[2]*1e6:5.1f}) um  U={s.u_min/k_B*1e6:8.1f} uK "
          f"f={np.round(s.frequencies/2/np.pi).astype(int)} Hz")

t0 = time.time()
mid = rep.sites[2]
depth, ch = analysis.trap_depth(field, mid, (lo, hi))
print(f"interior depth {depth/k_B*1e6:.0f} uK via {ch} ({time.time()-t0:.0f}s)")

# small grid pocket check first (fast): 100 x 280 x 50
t0 = time.time()
dump, mask = potential_grid(field, cfg.grid, iso_level=475e-6 * k_B)
n_pockets = count_pockets(mask)
print(f"small grid {cfg.grid.shape}: {time.time()-t0:.0f}s, "
      f"pockets at 475uK: {n_pockets}")
u_ref = dump.values.min()
print(f"grid U_ref = {u_ref/k_B*1e6:.0f} uK (deepest site "
      f"{min(s.u_min for s in rep.sites)/k_B*1e6:.0f})")

# acceptance-size grid timing: 200 x 400 x 100
spec_big = GridSpec(lo=cfg.grid.lo, hi=cfg.grid.hi, shape=(200, 400, 100))
t0 = time.time()
dump2, mask2 = potential_grid(field, spec_big, iso_level=475e-6 * k_B)
n2 = count_pockets(mask2)
print(f"desktop grid (200,400,100): {time.time()-t0:.0f}s, pockets: {n2}")
