"""The variance of a symmetric law equals twice its summed inverse-square zeros.

For a symmetric sub-Gaussian law the MGF factors as
exp(B z^2) prod_k (1 + z^2 / y_k^2) and Var = 2 (B + sum_k y_k^{-2}).
Three instructive cases:

* two-point law: zeros at pi (k + 1/2), sum = 1/2, B = 0, Var = 1;
* uniform-angle cosine: f(iy) = J0(y), Bessel-root zeros, sum = 1/4, Var = 1/2;
* discretized Gaussian: no zeros at all, everything sits in B = sigma^2 / 2.
"""

import math

from leeyang import (EntireMGF, ModelSpec, Rectangle, build_graph,
                     discretized_gaussian, hadamard_fit, locate_zeros,
                     observable_distribution, rademacher)

Y = 60 * math.pi

for name, f in [
    ("two-point", EntireMGF(rademacher())),
    ("cos(uniform)", EntireMGF(observable_distribution(
        ModelSpec("xy", build_graph(["a"], [], {}, {"a": 1.0})), 512))),
]:
    rep = locate_zeros(f, Rectangle(-1, 1, 0, Y))
    fit = hadamard_fit(f, rep, Y=Y)
    print(f"{name:12s} Var = {f.variance:.6f}  zeros used = {len(fit.y_k)}  "
          f"sum 1/y^2 = {fit.sum_inv_sq:.8f}  tail = {fit.tail_correction:.2e}")
    print(f"{'':12s} identity gap |Var - 2(sum+tail)| = "
          f"{fit.identity_gap(f.variance):.2e}, B = {fit.B:.2e}")

fg = EntireMGF(discretized_gaussian(1.0))
fit = hadamard_fit(fg, [], Y=8.0)
print(f"{'gaussian':12s} no zeros, B = {fit.B:.10f} (expect sigma^2/2 = 0.5)")
