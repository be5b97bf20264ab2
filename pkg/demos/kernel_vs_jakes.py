"""Temporal correlation: polarized field kernel versus the classic
scalar isotropic model.

At zero displacement the kernel's time dependence enters only through
the equivalent motion displacement v dt.  This script compares the
y-polarized scalar kernel correlation against the classic
J0(2 pi v dt / lambda) curve for an isotropically scattered scalar
field, for several concentrations.

With mu = 0 both models describe isotropic scattering, but the vector
kernel averages over polarization projections of a 3-D wave field
rather than a 2-D scalar one, so the curves differ; with growing
concentration the kernel decorrelates ever more slowly along time.

Run:  python3 demos/kernel_vs_jakes.py
"""

import numpy as np

from emgpr import KernelParams, em_kernel, jakes_correlation
from emgpr.kernel import SPEED_OF_LIGHT

f_c = 3.5e9
lam = SPEED_OF_LIGHT / f_c
k0 = 2 * np.pi / lam
v = np.array([25.0, 0.0, 0.0])
pol = np.array([0.0, 1.0, 0.0])
dts = np.linspace(0.0, 8e-3, 9)

print(f"{'dt [ms]':>8s} {'jakes':>9s} " +
      "".join(f"{'|mu|=' + str(m):>10s}" for m in (0, 5, 20)))
for dt in dts:
    row = f"{dt * 1e3:8.2f} {jakes_correlation(dt, 25.0, lam, 1.0):9.4f} "
    for mu_norm in (0, 5, 20):
        p = KernelParams(mu=np.array([0.0, 0.0, float(mu_norm)]), sigma2=1.0,
                         velocity=v, k0=k0)
        K = em_kernel(np.zeros(3), dt, np.zeros(3), 0.0, p)
        c = (pol @ K @ pol).real
        c0 = (pol @ em_kernel(np.zeros(3), 0.0, np.zeros(3), 0.0, p) @ pol).real
        row += f"{c / c0:10.4f}"
    print(row)
