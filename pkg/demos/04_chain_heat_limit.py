"""The n-step XY chain kernel converges to the wrapped heat kernel at rate 1/n.

With inverse temperature B_n = n b, one step of the chain moves the angle by
O(1/sqrt(n b)); after n steps the angle increment is a wrapped Gaussian with
variance 1/b.  The sup-distance halves every time n doubles, and the
pinned-end partition ratio approaches a ratio of wrapped Gaussians.
"""

import math

from leeyang import chain_vs_heat, dirichlet_ratio

print("n-step kernel vs heat kernel (b = 1, N = 512):")
prev = None
for n in (16, 32, 64, 128, 256):
    r = chain_vs_heat(n, 1.0, 512)
    ratio = f"{prev / r['sup_distance']:.3f}" if prev else "  -  "
    prev = r["sup_distance"]
    print(f"  n={n:4d}  sup={r['sup_distance']:.3e}  l1={r['l1_distance']:.3e}"
          f"  halving ratio={ratio}")

print("\npinned-end ratio, angles (0, pi/2) vs (0, 0):")
for n in (32, 128, 256):
    r = dirichlet_ratio(n, 1.0, (0.0, math.pi / 2), (0.0, 0.0), 512)
    print(f"  n={n:4d}  ratio={r['ratio']:.6f}  limit={r['limit_ratio']:.6f}"
          f"  gap={r['gap']:.2e}")
