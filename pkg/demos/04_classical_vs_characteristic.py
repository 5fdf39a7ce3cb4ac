"""Linearized Euler equations near the low Mach limit.

A cos(4 pi x) wave in the first characteristic variable is advanced to
T = 0.1 on 200 cells with dt = dx/10.  The characteristic splitting stays
bounded for every eps; the classical pressure splitting blows up within a
handful of steps once eps is small.
"""

from splitstab import Grid, SchemeParams, alpha_values, characteristic_basis, get_splitting, init_fourier, run

grid = Grid(200)
for name in ("euler-characteristic", "euler-paper"):
    sp = get_splitting(name)
    print(f"\n{name}")
    for eps in (1e-1, 1e-3, 1e-5, 1e-7):
        p = SchemeParams(grid.dx, grid.dx / 10, alpha_values(sp, eps)[0], 0.0)
        _, Q = characteristic_basis(sp.system, eps)
        u0 = init_fourier(grid, 3, [(2, [1.0, 0.0, 0.0])], basis=Q)
        res = run(u0, sp, eps, p, 0.1)
        status = f"blow-up after {res.steps} steps" if res.blew_up else f"bounded, {res.steps} steps"
        print(f"  eps={eps:7.0e}: L2 growth {res.growth:10.3g}  ({status})")
