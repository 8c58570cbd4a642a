"""Dev scratch: fig1 six-trap string landscape exploration."""
import time
import numpy as np

from chiptrap.scenario import builtin_scenario
from chiptrap.potential import make_field
from chiptrap import analysis
from chiptrap.constants import k_B
from chiptrap.magnetics import guide_height

t0 = time.time()
cfg = builtin_scenario("fig1_string")
print("guide height:", guide_height(1.0, 40e-4) * 1e6, "um")

field = make_field(cfg.layout, cfg.species, cfg.voltages)
print(f"panels: {field.solution.panel_set.n_panels}, "
      f"setup {time.time()-t0:.1f}s")

# potential along the guide line at a few heights
for z in [40e-6, 45e-6, 50e-6, 55e-6]:
    ys = np.linspace(-600e-6, 600e-6, 25)
    pts = np.column_stack([np.zeros_like(ys), ys, np.full_like(ys, z)])
    u = field.u(pts) / k_B * 1e6
    print(f"z={z*1e6:.0f}um U(uK) min {u.min():8.1f} max {u.max():8.1f}")

# valley profile
t0 = time.time()
ys = np.linspace(-620e-6, 620e-6, 125)
pts, us = analysis.guide_profile(field, ys, 0.0, 45e-6,
                                 ((-80e-6, 80e-6), (5e-6, 100e-6)))
print(f"profile in {time.time()-t0:.1f}s")
uuK = us / k_B * 1e6
for i in range(0, 125, 6):
    print(f"  y={ys[i]*1e6:7.1f} x={pts[i,0]*1e6:6.1f} z={pts[i,2]*1e6:5.1f} "
          f"U={uuK[i]:8.1f} uK")

t0 = time.time()
lo = np.array(cfg.grid.lo); hi = np.array(cfg.grid.hi)
seeds = analysis.default_seeds(cfg.layout, (lo, hi), n_along=31, height=45e-6)
rep = analysis.find_minima(field, seeds, (lo, hi))
print(f"find_minima in {time.time()-t0:.1f}s: {len(rep.sites)} sites, "
      f"{len(rep.failures)} failures")
for s in rep.sites:
    print(f"  pos um ({s.position[0]*1e6:6.1f},{s.position[1]*1e6:7.1f},"
          f"{s.position[2]*1e6:5.1f})  U={s.u_min/k_B*1e6:8.1f} uK  "
          f"f={np.round(s.frequencies/2/np.pi).astype(int)} Hz")

if rep.sites:
    t0 = time.time()
    s = rep.sites[len(rep.sites) // 2]
    depth, ch = analysis.trap_depth(field, s, (lo, hi))
    print(f"middle trap depth {depth/k_B*1e6:.0f} uK via {ch} "
          f"({time.time()-t0:.1f}s)")
