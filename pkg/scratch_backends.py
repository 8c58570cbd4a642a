"""Dev scratch: compiled vs python backend equivalence."""
import numpy as np
from chiptrap._kernels import _ref
from chiptrap._kernels import _core

rng = np.random.default_rng(7)

# segments
sa = rng.uniform(-1e-3, 1e-3, (5, 3)); sa[:, 2] = 0
sb = rng.uniform(-1e-3, 1e-3, (5, 3)); sb[:, 2] = 0
cur = rng.uniform(0.5, 2, 5)
pts = rng.uniform(-2e-4, 2e-4, (200, 3)); pts[:, 2] = np.abs(pts[:, 2]) + 1e-5
o1 = np.zeros((200, 3)); o2 = np.zeros((200, 3))
_ref.segment_b_field(sa, sb, cur, pts, o1)
_core.segment_b_field(sa, sb, cur, pts, o2)
print("seg B:", np.abs(o1 - o2).max() / np.abs(o1).max())

b1 = np.zeros((200, 3)); g1 = np.zeros((200, 3, 3))
b2 = np.zeros((200, 3)); g2 = np.zeros((200, 3, 3))
_ref.segment_b_field_gradient(sa, sb, cur, pts, b1, g1)
_core.segment_b_field_gradient(sa, sb, cur, pts, b2, g2)
print("seg G:", np.abs(g1 - g2).max() / np.abs(g1).max())

d1 = _ref.segment_min_distance(sa, sb, pts)
d2 = _core.segment_min_distance(sa, sb, pts)
print("dist:", np.abs(d1 - d2).max())

# rectangles
P = 40
cen = rng.uniform(-3e-4, 3e-4, (P, 3)); cen[:, 2] = 0
axu = np.tile([1.0, 0, 0], (P, 1)); axv = np.tile([0, 1.0, 0], (P, 1))
half = rng.uniform(5e-6, 3e-5, (P, 2))
sig = rng.normal(0, 1e-6, P)
M1 = np.zeros((200, P)); M2 = np.zeros((200, P))
_ref.rect_potential_matrix(cen, axu, axv, half, pts, M1)
_core.rect_potential_matrix(cen, axu, axv, half, pts, M2)
print("mat:", np.abs(M1 - M2).max() / np.abs(M1).max())

p1 = np.zeros(200); p2 = np.zeros(200)
_ref.rect_potential(cen, axu, axv, half, sig, pts, p1)
_core.rect_potential(cen, axu, axv, half, sig, pts, p2)
print("phi:", np.abs(p1 - p2).max() / np.abs(p1).max())

e1 = np.zeros((200, 3)); e2 = np.zeros((200, 3))
_ref.rect_e_field(cen, axu, axv, half, sig, pts, 8.0, e1)
_core.rect_e_field(cen, axu, axv, half, sig, pts, 8.0, e2)
print("E:", np.abs(e1 - e2).max() / np.abs(e1).max())

ee1 = np.zeros((50, 3)); gg1 = np.zeros((50, 3, 3))
ee2 = np.zeros((50, 3)); gg2 = np.zeros((50, 3, 3))
_ref.rect_e_field_gradient(cen, axu, axv, half, sig, pts[:50], 8.0, 1e-8, ee1, gg1)
_core.rect_e_field_gradient(cen, axu, axv, half, sig, pts[:50], 8.0, 1e-8, ee2, gg2)
print("Egrad E:", np.abs(ee1 - ee2).max() / np.abs(ee1).max())
print("Egrad G:", np.abs(gg1 - gg2).max() / np.abs(gg1).max())

# interp
G = rng.normal(0, 1, (3, 14, 16, 12))
origin = np.array([-1.0, -1.0, -1.0]); spacing = np.array([0.15, 0.13, 0.17])
qp = rng.uniform(-0.7, 0.6, (300, 3))
v1 = np.zeros((300, 3)); gr1 = np.zeros((300, 3, 3))
v2 = np.zeros((300, 3)); gr2 = np.zeros((300, 3, 3))
_ref.cubic_interp(G, origin, spacing, qp, v1, gr1)
_core.cubic_interp(G, origin, spacing, qp, v2, gr2)
print("interp v:", np.abs(v1 - v2).max(), "g:", np.abs(gr1 - gr2).max())

# verlet: harmonic-ish trap via quadratic E^2 grid? Use wire+bias w/ zero E grids.
def run(mod):
    n = 16
    rngl = np.random.default_rng(3)
    pos = rngl.normal(0, 3e-6, (n, 3)) + np.array([0, 0, 5e-5])
    vel = rngl.normal(0, 0.1, (n, 3))
    alive = np.ones(n, np.uint8)
    lt = np.full(n, np.nan); lp = np.zeros((n, 3))
    qseg_t = np.array([0.0, 1.0])
    qg = np.zeros((1, 3, 2, 2, 2))
    og = np.array([-1.0, -1.0, -1.0]); sp = np.array([1.0, 1.0, 1.0])
    wa = np.array([[0.0, -0.05, 0.0]]); wb = np.array([[0.0, 0.05, 0.0]])
    wc = np.array([1.0])
    bias = np.array([-4e-3, 0.0, 0.0])
    nrec = 10
    rp = np.zeros((nrec, n, 3), np.float32); ra = np.zeros((nrec, n), np.uint8)
    re = np.zeros((nrec, n))
    mass = 1.165e-26; mu = 9.274e-24; alpha = 2.7e-39
    mod.verlet_run(pos, vel, alive, lt, lp, mass, mu, alpha, wa, wb, wc, bias,
                   qseg_t, qg, og, sp, 1e-6, 1000, 0.0, 2e-6,
                   np.array([-1e-3, -1e-3, 0.0]), np.array([1e-3, 1e-3, 1e-3]),
                   100, rp, ra, re)
    return pos, vel, alive, re

p1_, v1_, a1_, re1 = run(_ref)
p2_, v2_, a2_, re2 = run(_core)
print("verlet pos:", np.abs(p1_ - p2_).max(), "vel:", np.abs(v1_ - v2_).max(),
      "alive:", (a1_ == a2_).all())
print("energy rec close:", np.nanmax(np.abs(re1 - re2)))
live = a1_.astype(bool)
drift = np.abs(re1[-1, live] - re1[0, live]) / np.abs(re1[0, live])
print("1k-step energy drift (bare guide, 16 atoms):", drift.max())
