"""Catalog of linear hyperbolic systems and their flux splittings.

A :class:`SystemSpec` is a family ``eps -> A(eps)`` of flux matrices and a
:class:`FluxSplitting` pairs it with ``eps -> (A_hat(eps), A_tilde(eps))``,
the explicit (nonstiff) and implicit (stiff) parts.  Matrix builders use
plain arithmetic only, so passing an ``mpmath.mpf`` for ``eps`` yields
``object`` arrays at extended precision.

Catalog names: ``prototype``, ``prototype-noncommuting``, ``euler-paper``,
``euler-characteristic``.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from math import sqrt
from typing import Callable, NamedTuple, Optional

import numpy as np

from .smallmat import EigenConvergenceError, eig, norm_inf, solve_linear

__all__ = [
    "SystemSpec",
    "FluxSplitting",
    "CharacteristicData",
    "AdmissibilityReport",
    "prototype_system",
    "prototype_characteristic_splitting",
    "prototype_noncommuting_splitting",
    "euler_linearized_system",
    "euler_pressure_splitting",
    "euler_characteristic_splitting",
    "generic_characteristic_splitting",
    "frozen_eigenvalues",
    "characteristic_basis",
    "check_admissible",
    "is_hyperbolic",
    "normalize_columns",
    "CATALOG",
    "get_splitting",
]

SQRT2 = sqrt(2.0)
DEFAULT_EPS_SAMPLES = tuple(10.0 ** (-i) for i in range(9))


def _matrix(rows):
    arr = np.array(rows)
    if arr.dtype != object:
        arr = arr.astype(float)
    return arr


def _check_eps(eps, upper=1.0, strict_upper=False):
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if eps > upper or (strict_upper and eps >= upper):
        bound = "<" if strict_upper else "<="
        raise ValueError(f"eps must satisfy eps {bound} {upper}, got {eps}")


@dataclass(frozen=True)
class SystemSpec:
    """Parametrized family of d x d flux matrices."""

    name: str
    dim: int
    build: Callable
    params: dict = field(default_factory=dict)
    advective_speed: float = 1.0
    description: str = ""

    def matrix(self, eps):
        _check_eps(eps)
        return self.build(eps)


class CharacteristicData(NamedTuple):
    """Eigendecomposition ``A = Q diag(lam) Q^-1`` split as ``lam = lam_hat + lam_tilde``."""

    Q: np.ndarray
    lam_hat: np.ndarray
    lam_tilde: np.ndarray


@dataclass(frozen=True)
class FluxSplitting:
    """A splitting ``A = A_hat + A_tilde``; ``A_hat`` is treated explicitly."""

    name: str
    system: SystemSpec
    build_hat: Callable
    build_tilde: Callable
    kind: str = "general"
    char_data: Optional[Callable] = None
    description: str = ""

    def matrix(self, eps):
        return self.system.matrix(eps)

    def hat(self, eps):
        _check_eps(eps)
        return self.build_hat(eps)

    def tilde(self, eps):
        _check_eps(eps)
        return self.build_tilde(eps)

    def matrices(self, eps):
        """``(A, A_hat, A_tilde)`` at ``eps``."""
        return self.matrix(eps), self.hat(eps), self.tilde(eps)

    def characteristic(self, eps):
        if self.char_data is None:
            raise ValueError(f"splitting {self.name!r} carries no characteristic data")
        _check_eps(eps)
        return self.char_data(eps)

    @property
    def advective_speed(self):
        return self.system.advective_speed


def normalize_columns(V):
    """Unit Euclidean columns with the first nonzero component positive.

    Complex columns that are a phase times a real vector are rotated back to
    the real axis first.
    """
    V = np.array(V, dtype=complex)
    out = np.empty(V.shape)
    for j in range(V.shape[1]):
        col = V[:, j]
        big = col[np.argmax(np.abs(col))]
        col = (col * abs(big) / big).real
        col = col / np.linalg.norm(col)
        lead = col[np.flatnonzero(np.abs(col) > 1e-14 * np.abs(col).max())[0]]
        out[:, j] = col if lead > 0 else -col
    return out


# -- prototype -------------------------------------------------------------


def prototype_system(a=2.0):
    """``A = [[a, 1, 0], [1/eps^2, a, 1/eps^2], [0, 1, a]]``, eigenvalues ``a, a +- sqrt(2)/eps``."""
    if not a > 0:
        raise ValueError(f"prototype requires a > 0, got {a}")

    def build(eps):
        q = 1 / eps**2
        return _matrix([[a, 1, 0], [q, a, q], [0, 1, a]])

    return SystemSpec(
        name="prototype",
        dim=3,
        build=build,
        params={"a": a},
        advective_speed=a,
        description="3x3 prototype with one slow wave a and fast waves a +- sqrt(2)/eps",
    )


def _prototype_Q(eps):
    r = SQRT2 / eps
    Q = np.array([[1.0, 1.0, 1.0], [-r, 0.0, r], [1.0, -1.0, 1.0]])
    return Q / np.linalg.norm(Q, axis=0)


def prototype_characteristic_splitting(a=2.0):
    """Characteristic splitting of the prototype, fully explicit at ``eps = 1``.

    Uses ``lam_hat = (a - sqrt2, a, a + sqrt2)`` and
    ``lam_tilde = (-sqrt2 (1-eps)/eps, 0, sqrt2 (1-eps)/eps)``.
    """
    system = prototype_system(a)

    def hat(eps):
        return _matrix([[a, eps, 0], [1 / eps, a, 1 / eps], [0, eps, a]])

    def tilde(eps):
        s = 1 - eps
        q = s / eps**2
        return _matrix([[0, s, 0], [q, 0, q], [0, s, 0]])

    def char(eps):
        stiff = SQRT2 * (1 - eps) / eps
        return CharacteristicData(
            _prototype_Q(eps),
            np.array([a - SQRT2, a, a + SQRT2]),
            np.array([-stiff, 0.0, stiff]),
        )

    return FluxSplitting(
        name="prototype",
        system=system,
        build_hat=hat,
        build_tilde=tilde,
        kind="characteristic",
        char_data=char,
        description="characteristic splitting of the prototype (commuting parts)",
    )


def prototype_noncommuting_splitting(a=2.0):
    """Non-characteristic prototype splitting; hyperbolic only for ``eps < 1``."""
    system = prototype_system(a)

    def hat(eps):
        _check_eps(eps, strict_upper=True)
        s = 1 - eps
        return _matrix([[a, s, 0], [1, a, 1], [0, s, a]])

    def tilde(eps):
        _check_eps(eps, strict_upper=True)
        q = (1 - eps**2) / eps**2
        return _matrix([[0, eps, 0], [q, 0, q], [0, eps, 0]])

    return FluxSplitting(
        name="prototype-noncommuting",
        system=system,
        build_hat=hat,
        build_tilde=tilde,
        kind="general",
        description="non-commuting prototype splitting; stable only for dt = O(eps)",
    )


# -- linearized Euler ------------------------------------------------------


def euler_linearized_system(gamma=1.4):
    """Euler flux Jacobian at ``(rho, rho u, E) = (1, 1, 1)`` with Mach number ``eps``.

    Eigenvalues are ``1`` and ``1 +- sqrt(gamma (gamma-1) (1 - eps^2/2)) / eps``.
    """
    if not gamma > 1:
        raise ValueError(f"gamma must exceed 1, got {gamma}")

    if gamma == 1.4:
        # exact integer form of the gamma = 7/5 matrix, scaled by 1/5
        def build(eps):
            e2 = eps**2
            return _matrix([[0, 5, 0], [-4, 8, 2 / e2], [2 * e2 - 7, 7 - 3 * e2, 7]]) / 5

    else:

        def build(eps):
            e2 = eps**2
            g = gamma
            return _matrix(
                [
                    [0, 1, 0],
                    [-1.5 + 0.5 * g, 3 - g, (g - 1) / e2],
                    [g * e2 - e2 - g, g - 1.5 * g * e2 + 1.5 * e2, g],
                ]
            )

    return SystemSpec(
        name="euler",
        dim=3,
        build=build,
        params={"gamma": gamma},
        advective_speed=1.0,
        description="linearized Euler equations at low Mach number eps",
    )


def euler_pressure_splitting():
    """Linearization of the classical pressure splitting with ``p_bar = 1/5``."""
    system = euler_linearized_system(1.4)

    def hat(eps):
        e2 = eps**2
        e4 = e2 * e2
        return (
            _matrix(
                [
                    [0, 5, 0],
                    [-5 + e2, 10 - 2 * e2, 2],
                    [-6 - e2 + 2 * e4, 6 + e2 - 3 * e4, 5 + 2 * e2],
                ]
            )
            / 5
        )

    def tilde(eps):
        e2 = eps**2
        e4 = e2 * e2
        return (
            _matrix(
                [
                    [0, 0, 0],
                    [1 - e2, -2 + 2 * e2, -2 * (e2 - 1) / e2],
                    [-1 + 3 * e2 - 2 * e4, 1 - 4 * e2 + 3 * e4, 2 - 2 * e2],
                ]
            )
            / 5
        )

    return FluxSplitting(
        name="euler-paper",
        system=system,
        build_hat=hat,
        build_tilde=tilde,
        kind="general",
        description="linearized pressure splitting of the Euler equations (non-commuting)",
    )


# -- generic characteristic splittings -------------------------------------


def _real_eigendecomposition(A):
    spec, V = eig(A, vectors=True)
    lam = spec.values
    scale = max(norm_inf(A), 1e-300)
    if np.max(np.abs(lam.imag)) > 1e-9 * scale:
        raise ValueError("matrix has non-real eigenvalues; no characteristic splitting")
    lam = lam.real
    if len(lam) > 1 and np.min(np.diff(lam)) <= 1e-12 * scale:
        raise ValueError("matrix has repeated eigenvalues; characteristic splitting needs distinct ones")
    return lam, normalize_columns(V)


def characteristic_basis(system, eps):
    """Ascending eigenvalues and normalized eigenvectors ``Q`` of ``A(eps)``.

    Characteristic variables are ``w = Q^-1 u``; the ordering and sign
    convention match the ``Q`` carried by characteristic splittings.
    """
    return _real_eigendecomposition(system.matrix(eps))


def frozen_eigenvalues(system, eps0=1.0):
    """Hat rule returning the (sorted) eigenvalues of ``A(eps0)`` regardless of ``eps``."""
    frozen, _ = _real_eigendecomposition(system.matrix(eps0))

    def rule(lam):
        return frozen.copy()

    return rule


def generic_characteristic_splitting(system, hat_rule, name=None, eps_samples=DEFAULT_EPS_SAMPLES, bound_factor=10.0):
    """Build ``A_hat = Q diag(hat_rule(lam)) Q^-1`` and ``A_tilde = Q diag(lam - hat_rule(lam)) Q^-1``.

    ``hat_rule`` maps the ascending eigenvalues of ``A(eps)`` to the
    nonstiff eigenvalues.  The rule is probed on ``eps_samples`` and
    rejected if the nonstiff eigenvalues grow by more than
    ``bound_factor`` relative to the largest sampled ``eps``.
    """

    @lru_cache(maxsize=256)
    def decompose(eps):
        A = system.matrix(eps)
        lam, Q = _real_eigendecomposition(A)
        lam_hat = np.asarray(hat_rule(lam), dtype=float)
        if lam_hat.shape != lam.shape:
            raise ValueError(f"hat rule returned shape {lam_hat.shape}, expected {lam.shape}")
        Qinv = solve_linear(Q, np.eye(len(lam)))
        lam_tilde = lam - lam_hat
        A_hat = (Q * lam_hat) @ Qinv
        A_tilde = (Q * lam_tilde) @ Qinv
        return A_hat, A_tilde, CharacteristicData(Q, lam_hat, lam_tilde)

    sup = [np.max(np.abs(decompose(float(e))[2].lam_hat)) for e in eps_samples]
    ref = sup[int(np.argmax(eps_samples))] if sup else 0.0
    if sup and max(sup) > bound_factor * (1.0 + ref):
        raise ValueError(f"nonstiff eigenvalues are not bounded in eps (sup {max(sup):.3e})")

    def hat(eps):
        return decompose(float(eps))[0].copy()

    def tilde(eps):
        return decompose(float(eps))[1].copy()

    def char(eps):
        return decompose(float(eps))[2]

    return FluxSplitting(
        name=name or f"{system.name}-characteristic",
        system=system,
        build_hat=hat,
        build_tilde=tilde,
        kind="characteristic",
        char_data=char,
        description=f"characteristic splitting of {system.name}",
    )


def euler_characteristic_splitting():
    """Characteristic splitting of linearized Euler with ``lam_hat = lam(eps=1)``."""
    system = euler_linearized_system(1.4)
    return generic_characteristic_splitting(system, frozen_eigenvalues(system, 1.0), name="euler-characteristic")


# -- admissibility ---------------------------------------------------------


@dataclass(frozen=True)
class AdmissibilityReport:
    eps_samples: list
    hyperbolic_hat: list
    hyperbolic_tilde: list
    hat_eig_sup: float
    bounded: bool
    verdict: bool
    failures: list = field(default_factory=list)


def is_hyperbolic(M, imag_tol=1e-9):
    """Real spectrum and a complete set of eigenvectors (numerically)."""
    M = np.asarray(M, dtype=float)
    scale = norm_inf(M)
    if scale == 0:
        return True
    try:
        lam = eig(M).values
    except EigenConvergenceError:
        return False
    if np.max(np.abs(lam.imag)) > imag_tol * scale:
        return False
    lam = np.sort(lam.real)
    d = len(lam)
    # repeated eigenvalues need a matching eigenspace dimension
    groups = np.split(lam, np.flatnonzero(np.diff(lam) > 1e-8 * scale) + 1)
    for g in groups:
        if len(g) > 1:
            rank = np.linalg.matrix_rank(M - g.mean() * np.eye(d), tol=1e-9 * scale * d)
            if rank != d - len(g):
                return False
    return True


def check_admissible(sp, eps_grid, bound_factor=10.0):
    """Check both hyperbolicity conditions and eps-boundedness on a grid."""
    eps_grid = [float(e) for e in eps_grid]
    if not eps_grid:
        raise ValueError("eps_grid must be nonempty")
    hyp_hat, hyp_tilde, sups, failures = [], [], [], []
    for e in eps_grid:
        try:
            A_hat, A_tilde = sp.hat(e), sp.tilde(e)
        except ValueError as exc:
            hyp_hat.append(False)
            hyp_tilde.append(False)
            sups.append(np.nan)
            failures.append((e, str(exc)))
            continue
        h, t = is_hyperbolic(A_hat), is_hyperbolic(A_tilde)
        hyp_hat.append(h)
        hyp_tilde.append(t)
        sups.append(float(np.max(np.abs(eig(A_hat).values))))
        if not h:
            failures.append((e, "A_hat not hyperbolic"))
        if not t:
            failures.append((e, "A_tilde not hyperbolic"))
    finite = [s for s in sups if np.isfinite(s)]
    sup = max(finite) if finite else np.nan
    ref = sups[int(np.argmax(eps_grid))]
    if not np.isfinite(ref):
        ref = min(finite, default=np.nan)
    bounded = bool(finite) and sup <= bound_factor * (1.0 + ref)
    verdict = all(hyp_hat) and all(hyp_tilde) and bounded
    return AdmissibilityReport(eps_grid, hyp_hat, hyp_tilde, sup, bounded, verdict, failures)


CATALOG = {
    "prototype": prototype_characteristic_splitting,
    "prototype-noncommuting": prototype_noncommuting_splitting,
    "euler-paper": lambda a=None: euler_pressure_splitting(),
    "euler-characteristic": lambda a=None: euler_characteristic_splitting(),
}


def get_splitting(name, a=2.0):
    """Look up a cataloged splitting; ``a`` applies to the prototype family only."""
    try:
        factory = CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown splitting {name!r}; choose from {sorted(CATALOG)}") from None
    return factory(a)
