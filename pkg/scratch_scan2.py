import time
import numpy as np
import chiptrap.scenario as sc
from chiptrap.potential import make_field
from chiptrap import analysis
from chiptrap.constants import k_B
from chiptrap.species import LI7

def fan_barrier(field, p0, u0):
    best = 1e9
    for ang in np.linspace(-80, 80, 33):
        th = np.radians(ang)
        d = np.array([np.sin(th), 0.0, -np.cos(th)])
        tmax = (p0[2] - 4e-6) / np.cos(th)
        ts = np.linspace(0, tmax, 90)[1:]
        pts = p0[None, :] + ts[:, None] * d[None, :]
        pts = pts[np.abs(pts[:, 0]) < 158e-6]
        u = field.u(pts) / k_B * 1e6
        best = min(best, u.max())
    return best - u0

def measure(esize, groove, wire_w, label, volts=475.0):
    sc.ELECTRODE_SIZE = esize
    sc.GROOVE = groove
    sc.WIRE_WIDTH = wire_w
    sc.ELECTRODE_X = wire_w/2 + groove + esize/2
    sc.CUTOUT_HALF = esize/2 + groove
    sc.STRIP_HALF = wire_w/2 + groove
    layout = sc.default_chip(current=1.0, bias_tesla=40e-4)
    field = make_field(layout, LI7, {f"e{k}": volts for k in range(1, 7)})
    t0 = time.time()
    # coarse valley profile: end well (y~-510), interior well (-100), saddles
    ys = np.linspace(-640e-6, 40e-6, 69)
    pts, us = analysis.guide_profile(field, ys, 0.0, 48e-6,
                                     ((-90e-6, 90e-6), (5e-6, 120e-6)))
    u = us / k_B * 1e6
    i_end = np.argmin(u[ys < -420e-6])
    i_int = np.where(ys > -180e-6)[0][0] + np.argmin(u[ys > -180e-6])
    sad = u[(ys > -480e-6) & (ys < -320e-6)].max()  # e1-e2 saddle
    sad2 = u[(ys > -80e-6)].max() if (ys > -80e-6).any() else np.nan
    end_sb = fan_barrier(field, pts[i_end], u[i_end])
    int_sb = fan_barrier(field, pts[i_int], u[i_int])
    u_end, u_int = u[i_end], u[i_int]
    # pocket margins with U_ref = deepest well
    uref = min(u_end, u_int)
    print(f"{label}: wells end {u_end:.0f} int {u_int:.0f}; saddle {sad:.0f}"
          f"; end_surfb {end_sb:.0f} int_surfb {int_sb:.0f}; "
          f"margins: saddle {sad-uref:.0f}, endcrest {end_sb+u_end-uref:.0f}"
          f"; int depth ~{min(sad-u_int, int_sb):.0f} ({time.time()-t0:.0f}s)",
          flush=True)

measure(120e-6, 10e-6, 20e-6, "e120 g10 w20 (current)")
measure(140e-6, 15e-6, 20e-6, "e140 g15 w20")
measure(120e-6, 15e-6, 20e-6, "e120 g15 w20")
measure(140e-6, 20e-6, 20e-6, "e140 g20 w20")
measure(120e-6, 10e-6, 16e-6, "e120 g10 w16")
