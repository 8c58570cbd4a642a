import time
import numpy as np
from chiptrap.scenario import builtin_scenario
from chiptrap.potential import make_field
from chiptrap import analysis
from chiptrap.constants import k_B

cfg = builtin_scenario("fig1_string")
lo = np.array(cfg.grid.lo); hi = np.array(cfg.grid.hi)

for scale in [0.05, 0.25, 0.5, 1.0, 3.0, 10.0]:
    volts = {f"e{k}": 475.0 * scale for k in range(1, 7)}
    field = make_field(cfg.layout, cfg.species, volts)
    t0 = time.time()
    seeds = np.array([[0.0, -100e-6, 48e-6], [0.0, -100e-6, 40e-6],
                      [0.0, -80e-6, 52e-6]])
    rep = analysis.find_minima(field, seeds, (lo, hi))
    if not rep.sites:
        print(f"V={475*scale:6.0f}: no interior minimum "
              f"({rep.failures[0][1] if rep.failures else ''})", flush=True)
        continue
    s = rep.sites[0]
    depth, ch = analysis.trap_depth(field, s, (lo, hi), long_window=300e-6)
    blong = analysis._longitudinal_barrier(field, s, (lo, hi), window=300e-6)
    print(f"V={475*scale:6.0f}: U_min {s.u_min/k_B*1e6:8.1f} uK at "
          f"z={s.position[2]*1e6:.1f}; depth {depth/k_B*1e6:7.1f} via {ch}; "
          f"modulation {blong/k_B*1e6:7.1f} uK ({time.time()-t0:.0f}s)",
          flush=True)
