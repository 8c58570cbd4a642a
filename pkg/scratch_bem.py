"""Dev scratch: BEM capacitance oracle + panelize sanity."""
import time
import numpy as np

from chiptrap.geometry import ChipLayout, Electrode, rectangle
from chiptrap import electrostatics as es
from chiptrap.constants import epsilon_0

a = 1.0  # unit square plate
layout = ChipLayout(wires=(), electrodes=(Electrode("p", rectangle(0, 0, a, a)),),
                    bias_field=[0, 0, 0])

prev = None
results = {}
for target in [a / 4, a / 8, a / 16, a / 32]:
    t0 = time.time()
    ps = es.panelize(layout, target_edge=target)
    sol = es.solve_charges(ps, {"p": 1.0})
    C = es.total_charge(sol)
    cn = C / (4 * np.pi * epsilon_0 * a)
    results[target] = cn
    print(f"target {target}: {ps.n_panels} panels, C_norm = {cn:.6f}, "
          f"resid {es.collocation_residual(sol):.2e}, {time.time()-t0:.2f}s")

ts = sorted(results.keys(), reverse=True)
c1, c2, c3 = results[ts[-3]], results[ts[-2]], results[ts[-1]]
p = np.log2((c1 - c2) / (c2 - c3))
cstar = c3 + (c3 - c2) / (2 ** p - 1)
print(f"observed order {p:.2f}, Richardson C* = {cstar:.6f} (lit 0.3667892)")
# two-level Richardson with order-1 assumption, as a simpler variant
print("2-level (order1) from /8,/16:", 2 * results[a/16] - results[a/8])
print("2-level (order1) from /16,/32:", 2 * results[a/32] - results[a/16])

# panel-count examples from the contract
from chiptrap.geometry import ChipLayout as CL
lay = CL(wires=(), electrodes=(Electrode("e", rectangle(0, 0, 100e-6, 100e-6)),),
         bias_field=[0, 0, 0])
ps1 = es.panelize(lay, target_edge=25e-6)
ps2 = es.panelize(lay, target_edge=12.5e-6)
print("100um square @25um:", ps1.n_panels, "area err:",
      abs(ps1.areas.sum() - 1e-8) / 1e-8)
print("100um square @12.5um:", ps2.n_panels, "ratio:", ps2.n_panels / ps1.n_panels)

# mirror antisymmetry: +V/-V pair
lay2 = CL(wires=(), electrodes=(Electrode("a", rectangle(-100e-6, 0, 100e-6, 100e-6)),
                                Electrode("b", rectangle(100e-6, 0, 100e-6, 100e-6))),
          bias_field=[0, 0, 0])
ps3 = es.panelize(lay2, target_edge=25e-6)
sol3 = es.solve_charges(ps3, {"a": 1.0, "b": -1.0})
na = ps3.channel_index == 0
nb = ps3.channel_index == 1
# panels are generated in the same in-polygon order; mirror maps a-panel k to b-panel k
ca = ps3.centers[na]; cb = ps3.centers[nb]
order_a = np.lexsort((ca[:, 1], ca[:, 0]))
order_b = np.lexsort((cb[:, 1], -cb[:, 0]))
sa = sol3.sigma[na][order_a]; sb = sol3.sigma[nb][order_b]
print("mirror antisym max:", np.abs(sa + sb).max() / np.abs(sa).max())

# midplane field perpendicularity
sol4 = sol3
pts = np.column_stack([np.zeros(7), np.linspace(-2e-4, 2e-4, 7), np.full(7, 5e-5)])
E = es.e_field(sol4, pts)
print("midplane tangential/|E|:", np.abs(E[:, 1:]).max() / np.abs(E).max(),
      "(x dominates):", np.abs(E[:, 0]).min() > 0)
# linearity: solve(c*V) = c*solution(V)
sol5 = es.solve_charges(ps3, {"a": 2.5, "b": -2.5})
print("linearity:", np.abs(sol5.sigma - 2.5 * sol3.sigma).max())
