"""Modified-equation stability of the characteristic prototype splitting.

Every Fourier mode k of the modified equation evolves under the frequency
matrix -2 pi i k A - 4 pi^2 k^2 B.  For the characteristic splitting its
eigenvalue real parts are known in closed form, which gives a-priori CFL
bounds nu1 and nu2.  Here we compare the closed forms with a numeric
eigen-solve, then bisect the largest stable CFL number over an eps grid
and check it never drops below the a-priori bound.
"""

import math

import numpy as np

from splitstab import SchemeParams, alpha_values, cfl_bounds, char_real_parts, frequency_spectrum, get_splitting
from splitstab.modeq import max_stable_ratio

a, dx = 2.0, 1e-2
sp = get_splitting("prototype", a=a)
alpha_hat = a + math.sqrt(2)

# closed forms against the numeric spectrum
p = SchemeParams.from_cfl(0.5, dx, a, alpha_hat)
for eps in (1.0, 1e-3, 1e-6):
    for k in (1, 7):
        closed = np.sort(char_real_parts(a, eps, p, k))
        numeric = np.sort([float(v.real) for v in frequency_spectrum(sp, eps, p, k, dps=40).values])
        err = np.max(np.abs(numeric - closed) / np.abs(closed))
        print(f"eps={eps:7.0e} k={k}: Re mu = {numeric}, rel err vs closed form {err:.1e}")

# bisected CFL limit against the bounds, for both implicit viscosity rules
for rule in ("zero", "sqrt2"):
    print(f"\nalpha_tilde rule: {rule}")
    print(f"{'eps':>8} {'nu_numeric':>12} {'nu1':>12} {'nu2':>12}")
    for eps in np.logspace(0, -6, 7):
        ah, at = alpha_values(sp, eps, rule, alpha_hat)
        b = cfl_bounds(a, eps, ah, at)
        nu = max_stable_ratio(sp, eps, dx, rule, alpha_hat=ah)
        print(f"{eps:8.0e} {nu:12.5g} {b.nu1:12.5g} {b.nu2:12.5g}")
