"""Tour of the cataloged flux splittings.

For each splitting we split A(eps) = A_hat + A_tilde, look at how the
spectra of the explicit and implicit parts scale as eps shrinks, and check
whether the two parts commute.  Characteristic splittings keep the explicit
spectrum bounded and commute exactly; the others do neither.
"""

import numpy as np

from splitstab import CATALOG, commutator, eig, get_splitting
from splitstab.smallmat import norm_inf

for name in sorted(CATALOG):
    sp = get_splitting(name)
    print(f"\n{name} ({sp.kind}): {sp.description}")
    print(f"{'eps':>8} {'max|eig A_hat|':>16} {'max|eig A_tilde|':>18} {'|[A_hat,A_tilde]|':>18}")
    for eps in (0.5, 1e-1, 1e-2, 1e-3, 1e-4):
        A_hat, A_tilde = sp.hat(eps), sp.tilde(eps)
        lam_hat = np.abs(eig(A_hat).values).max()
        lam_tilde = np.abs(eig(A_tilde).values).max()
        comm = norm_inf(commutator(A_hat, A_tilde))
        print(f"{eps:8.0e} {lam_hat:16.6g} {lam_tilde:18.6g} {comm:18.3e}")
