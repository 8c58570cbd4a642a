import time
import numpy as np
from scipy import ndimage
from chiptrap.scenario import builtin_scenario
from chiptrap.potential import make_field, potential_grid, grid_interior_minima
from chiptrap import analysis
from chiptrap.constants import k_B

cfg = builtin_scenario("fig1_string")
field = make_field(cfg.layout, cfg.species, cfg.voltages)
u = field.u_grid(cfg.grid)
mins = grid_interior_minima(u)
u_ref = u[mins].min()
mask = (u - u_ref) <= 475e-6 * k_B
labels, n = ndimage.label(mask)
ax, ay, az = cfg.grid.axes()
print(f"u_ref {u_ref/k_B*1e6:.0f} uK, raw components: {n}")
for lab in range(1, n + 1):
    comp = labels == lab
    size = comp.sum()
    iy = np.where(comp.any(axis=(0, 2)))[0]
    iz = np.where(comp.any(axis=(0, 1)))[0]
    touch = comp[:, :, 0].any()
    print(f"  comp {lab}: {size} voxels, y [{ay[iy[0]]*1e6:.0f}, "
          f"{ay[iy[-1]]*1e6:.0f}] um, z [{az[iz[0]]*1e6:.0f}, "
          f"{az[iz[-1]]*1e6:.0f}] um, bottom-touch {touch}")

# valley profile over the whole string for saddle levels
t0 = time.time()
ys = np.linspace(-640e-6, 640e-6, 161)
pts, us = analysis.guide_profile(field, ys, 0.0, 48e-6,
                                 ((-90e-6, 90e-6), (5e-6, 120e-6)))
uu = us / k_B * 1e6
print(f"profile ({time.time()-t0:.0f}s):")
# report local maxima and minima inline
for i in range(1, 160):
    if (uu[i] > uu[i-1] and uu[i] >= uu[i+1]) or (uu[i] < uu[i-1] and uu[i] <= uu[i+1]):
        kind = "max" if uu[i] > uu[i-1] else "min"
        print(f"  {kind} at y={ys[i]*1e6:7.1f} um: {uu[i]:8.1f} uK "
          f"(x={pts[i,0]*1e6:.1f}, z={pts[i,2]*1e6:.1f})")
