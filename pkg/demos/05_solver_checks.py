"""Two end-to-end checks of the time stepper.

1. Refinement at eps = 1 against the exact solution shows first order.
2. A single Fourier mode advanced N steps matches G(theta)^N applied to its
   coefficient, where G is the discrete amplification matrix, even for a
   very stiff eps where the implicit system is badly scaled.  The stiff
   waves are damped almost completely, so the deviation is measured
   against the larger of the initial and final norms.
"""

import math

import numpy as np

from splitstab import (
    Grid,
    ImexStepper,
    SchemeParams,
    alpha_values,
    convergence_study,
    discrete_symbol,
    get_splitting,
    init_fourier,
    observed_orders,
)

sp = get_splitting("prototype")
base = SchemeParams(1 / 50, 0.25 / 50, 2 + math.sqrt(2))
study = convergence_study(sp, 1.0, base, 4)
for (dx, err), q in zip(study, [None] + observed_orders(study)):
    print(f"dx={dx:.5f}  L2 error {err:.3e}" + ("" if q is None else f"  order {q:.3f}"))

eps, k, n = 1e-6, 3, 40
grid = Grid(32)
sp = get_splitting("euler-characteristic")
p = SchemeParams(grid.dx, grid.dx / 10, *alpha_values(sp, eps))
c = np.array([1.0, 0.5j, -0.25])
u0 = init_fourier(grid, 3, [(k, c)]).values
u = u0
stepper = ImexStepper(sp, eps, p, grid)
for _ in range(n):
    u = stepper.advance(u)
G = discrete_symbol(sp, eps, p, 2 * math.pi * k * grid.dx)
exact = init_fourier(grid, 3, [(k, np.linalg.matrix_power(G, n) @ c)]).values
scale = max(np.linalg.norm(exact), np.linalg.norm(u0))
print(f"\nsingle mode k={k}, eps={eps:g}, {n} steps")
print(f"  norm ratio final/initial {np.linalg.norm(exact) / np.linalg.norm(u0):.3e}")
print(f"  deviation from G^N {np.linalg.norm(u - exact) / scale:.2e}")
