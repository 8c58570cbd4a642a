import time
import numpy as np
import chiptrap.scenario as sc
from chiptrap.potential import make_field
from chiptrap import analysis
from chiptrap.constants import k_B
from chiptrap.species import LI7

def build_and_measure(esize, groove, wire_w, label, volts=475.0):
    sc.ELECTRODE_SIZE = esize
    sc.GROOVE = groove
    sc.WIRE_WIDTH = wire_w
    sc.ELECTRODE_X = wire_w/2 + groove + esize/2
    sc.CUTOUT_HALF = esize/2 + groove
    sc.STRIP_HALF = wire_w/2 + groove
    layout = sc.default_chip(current=1.0, bias_tesla=40e-4)
    field = make_field(layout, LI7, {f"e{k}": volts for k in range(1, 7)})
    ys = np.linspace(-180e-6, 20e-6, 41)  # one well (e3 at -100) + saddles
    t0 = time.time()
    pts, us = analysis.guide_profile(field, ys, 0.0, 48e-6,
                                     ((-90e-6, 90e-6), (5e-6, 120e-6)))
    u = us / k_B * 1e6
    iw = np.argmin(u)
    print(f"{label}: panels={field.solution.panel_set.n_panels} "
          f"well~{u.min():.0f} saddle~{u.max():.0f} "
          f"modulation {u.max()-u.min():.0f} uK  "
          f"well z={pts[iw,2]*1e6:.1f} x={pts[iw,0]*1e6:.1f} um "
          f"({time.time()-t0:.0f}s)", flush=True)

build_and_measure(150e-6, 20e-6, 50e-6, "e150 g20 w50")
build_and_measure(150e-6, 10e-6, 50e-6, "e150 g10 w50")
build_and_measure(180e-6, 10e-6, 50e-6, "e180 g10 w50")
build_and_measure(150e-6, 10e-6, 30e-6, "e150 g10 w30")
build_and_measure(180e-6, 10e-6, 30e-6, "e180 g10 w30")
