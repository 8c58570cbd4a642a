"""Dev scratch: validate reference kernels against independent oracles."""
import sys
sys.path.insert(0, "src")
import numpy as np
from scipy.integrate import dblquad

from chiptrap._kernels import _ref as K
from chiptrap.constants import mu_0, k_e

rng = np.random.default_rng(1)

# --- Biot-Savart vs infinite wire ---
a = np.array([[0.0, -1.0, 0.0]]); b = np.array([[0.0, 1.0, 0.0]]); I = np.array([1.0])
p = np.array([[50e-6, 0.0, 0.0]])
out = np.zeros((1, 3))
K.segment_b_field(a, b, I, p, out)
Binf = mu_0 * 1.0 / (2 * np.pi * 50e-6)
print("BS inf-wire:", out[0], "|B|=", np.linalg.norm(out[0]), "oracle", Binf,
      "rel", abs(np.linalg.norm(out[0]) - Binf) / Binf)

# --- B gradient vs FD ---
pts = rng.uniform(-1e-4, 1e-4, (10, 3)) + np.array([0, 0, 2e-4])
segs_a = rng.uniform(-1e-3, 1e-3, (4, 3)); segs_a[:, 2] = 0
segs_b = rng.uniform(-1e-3, 1e-3, (4, 3)); segs_b[:, 2] = 0
cur = rng.uniform(0.5, 2.0, 4)
outB = np.zeros((10, 3)); outG = np.zeros((10, 3, 3))
K.segment_b_field_gradient(segs_a, segs_b, cur, pts, outB, outG)
h = 1e-8
maxrel = 0
for j in range(3):
    dp = np.zeros(3); dp[j] = h
    Bp = np.zeros((10, 3)); Bm = np.zeros((10, 3))
    K.segment_b_field(segs_a, segs_b, cur, pts + dp, Bp)
    K.segment_b_field(segs_a, segs_b, cur, pts - dp, Bm)
    fd = (Bp - Bm) / (2 * h)
    rel = np.abs(fd - outG[:, :, j]).max() / np.abs(outG).max()
    maxrel = max(maxrel, rel)
print("B grad vs FD max rel:", maxrel)
print("B grad trace (divB):", np.abs(np.trace(outG, axis1=1, axis2=2)).max() / np.abs(outG).max())
print("B curl (G - G.T antisym? curl=0 -> G symmetric):",
      np.abs(outG - np.swapaxes(outG, 1, 2)).max() / np.abs(outG).max())

# --- rect potential vs dblquad ---
hu, hv = 30e-6, 20e-6
cen = np.array([[0.0, 0.0, 0.0]])
axu = np.array([[1.0, 0, 0]]); axv = np.array([[0, 1.0, 0]])
half = np.array([[hu, hv]])
for pt in [np.array([10e-6, 5e-6, 40e-6]), np.array([100e-6, -50e-6, 3e-6]),
           np.array([5e-6, 2e-6, 0.0]), np.array([hu + 10e-6, 0.0, 0.0])]:
    out = np.zeros(1)
    K.rect_potential(cen, axu, axv, half, np.array([1.0]), pt[None, :], out)
    def integrand(yy, xx):
        return 1.0 / np.sqrt((pt[0]-xx)**2 + (pt[1]-yy)**2 + pt[2]**2)
    val, _ = dblquad(integrand, -hu, hu, -hv, hv, epsabs=1e-14, epsrel=1e-11)
    val *= k_e
    print(f"phi at {pt}: kernel {out[0]:.10e} quad {val:.10e} rel {abs(out[0]-val)/abs(val):.2e}")

# --- rect E vs FD of potential, above and below plane ---
for pt in [np.array([10e-6, 5e-6, 40e-6]), np.array([12e-6, -8e-6, -25e-6]),
           np.array([70e-6, 33e-6, 15e-6])]:
    outE = np.zeros((1, 3))
    K.rect_e_field(cen, axu, axv, half, np.array([1.0]), pt[None, :], 0.0, outE)
    h = 1e-9
    fd = np.zeros(3)
    for j in range(3):
        dp = np.zeros(3); dp[j] = h
        op = np.zeros(1); om = np.zeros(1)
        K.rect_potential(cen, axu, axv, half, np.array([1.0]), (pt+dp)[None, :], op)
        K.rect_potential(cen, axu, axv, half, np.array([1.0]), (pt-dp)[None, :], om)
        fd[j] = -(op[0] - om[0]) / (2 * h)
    print(f"E at {pt}: kernel {outE[0]} fd {fd} rel {np.abs(outE[0]-fd).max()/np.abs(fd).max():.2e}")

# --- far-field vs point charge ---
q = 4 * hu * hv * 1.0
r = 100 * 2 * np.hypot(hu, hv)
pt = np.array([[0.6, 0.53, 0.6]]) / np.linalg.norm([0.6, 0.53, 0.6]) * r
outE = np.zeros((1, 3))
K.rect_e_field(cen, axu, axv, half, np.array([1.0]), pt, 0.0, outE)
Epc = k_e * q * pt[0] / r**3
print("far-field vs pc rel:", np.abs(outE[0] - Epc).max() / np.abs(Epc).max())

# --- E gradient hybrid vs FD of full field ---
pts = np.array([[40e-6, 10e-6, 50e-6], [300e-6, 100e-6, 80e-6]])
outE = np.zeros((2, 3)); outG = np.zeros((2, 3, 3))
K.rect_e_field_gradient(cen, axu, axv, half, np.array([1.0]), pts, 8.0, 1e-8, outE, outG)
h = 1e-8
for j in range(3):
    dp = np.zeros(3); dp[j] = h
    Ep = np.zeros((2, 3)); Em = np.zeros((2, 3))
    K.rect_e_field(cen, axu, axv, half, np.array([1.0]), pts + dp, 0.0, Ep)
    K.rect_e_field(cen, axu, axv, half, np.array([1.0]), pts - dp, 0.0, Em)
    fd = (Ep - Em) / (2 * h)
    print(f"E grad col {j} rel:", np.abs(fd - outG[:, :, j]).max() / np.abs(outG).max())

# --- cubic interp: reproduce smooth function + gradient ---
nx, ny, nz = 24, 30, 20
origin = np.array([-1.0, -1.5, 0.5]); spacing = np.array([0.1, 0.11, 0.09])
X = origin[0] + spacing[0] * np.arange(nx)
Y = origin[1] + spacing[1] * np.arange(ny)
Z = origin[2] + spacing[2] * np.arange(nz)
XX, YY, ZZ = np.meshgrid(X, Y, Z, indexing="ij")
F = np.sin(3 * XX) * np.cos(2 * YY) * np.exp(-ZZ)
G = np.stack([F])
pts = rng.uniform(0.25, 0.7, (50, 3)) * (np.array([X[-1]-X[0], Y[-1]-Y[0], Z[-1]-Z[0]])) + origin
vals = np.zeros((50, 1)); grads = np.zeros((50, 1, 3))
K.cubic_interp(G, origin, spacing, pts, vals, grads)
truth = np.sin(3*pts[:,0])*np.cos(2*pts[:,1])*np.exp(-pts[:,2])
gt = np.stack([3*np.cos(3*pts[:,0])*np.cos(2*pts[:,1])*np.exp(-pts[:,2]),
               -2*np.sin(3*pts[:,0])*np.sin(2*pts[:,1])*np.exp(-pts[:,2]),
               -truth], axis=1)
print("interp val err:", np.abs(vals[:,0]-truth).max() / np.abs(truth).max())
print("interp grad err:", np.abs(grads[:,0,:]-gt).max() / np.abs(gt).max())
