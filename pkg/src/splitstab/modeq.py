"""Modified-equation stability analysis of the first-order IMEX scheme.

The scheme is, to second order, a discretization of ``w_t + A w_x = B w_xx``
with viscosity matrix::

    B = (dt/2) * ((alpha_hat + alpha_tilde) dx/dt * I - (A_hat - A_tilde) A)

Fourier mode ``k`` evolves under the frequency matrix
``F_k = -2 pi i k A - 4 pi^2 k^2 B``; the modified equation is L2-stable
when every eigenvalue of every ``F_k`` (k != 0) has negative real part.

Besides the numerical scan this module carries the closed-form real parts
and CFL bounds available for characteristic splittings, and the exact
one-step Fourier symbol of the discrete scheme, which the solver is checked
against.
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .smallmat import eig, is_mp, norm_inf, solve_linear

__all__ = [
    "SchemeParams",
    "StabilityReport",
    "CflBounds",
    "viscosity_matrix",
    "frequency_matrix",
    "frequency_spectrum",
    "stability_scan",
    "char_real_parts",
    "characteristic_real_parts",
    "cfl_bounds",
    "alpha_values",
    "max_stable_ratio",
    "discrete_symbol",
    "symbol_radius",
    "ALPHA_TILDE_RULES",
]

ALPHA_TILDE_RULES = ("zero", "sqrt2", "stiff-eig")
STABILITY_TOL = 1e-12
REFINE_DPS = 34
_NOISE_FACTOR = 64


@dataclass(frozen=True)
class SchemeParams:
    """Cell width, time step and the two scalar numerical viscosities."""

    dx: float
    dt: float
    alpha_hat: float
    alpha_tilde: float = 0.0

    def __post_init__(self):
        for name in ("dx", "dt"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and positive, got {v}")
        for name in ("alpha_hat", "alpha_tilde"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and non-negative, got {v}")

    def nu_hat(self, speed):
        """Advective CFL number ``speed * dt / dx``."""
        return speed * self.dt / self.dx

    @classmethod
    def from_cfl(cls, nu_hat, dx, speed, alpha_hat, alpha_tilde=0.0):
        return cls(dx=dx, dt=nu_hat * dx / speed, alpha_hat=alpha_hat, alpha_tilde=alpha_tilde)


@dataclass(frozen=True)
class StabilityReport:
    k_list: list
    spectra: list
    max_real_overall: float
    verdict: str
    witness_k: int
    tol: float = field(default=0.0)

    @property
    def stable(self):
        return self.verdict == "stable"


class CflBounds(NamedTuple):
    nu1: float
    phi: float
    psi: float
    nu2: float


def _pi(like):
    if is_mp(like):
        import mpmath

        return mpmath.pi
    return math.pi


def viscosity_matrix(sp, eps, p):
    """Viscosity matrix ``B`` of the modified equation at ``eps``."""
    A, A_hat, A_tilde = sp.matrices(eps)
    d = A.shape[0]
    alpha = p.alpha_hat + p.alpha_tilde
    return (alpha * p.dx / 2) * np.eye(d) - (p.dt / 2) * ((A_hat - A_tilde) @ A)


def frequency_matrix(A, B, k):
    """``-2 pi i k A - 4 pi^2 k^2 B``."""
    A = np.asarray(A)
    pi = _pi(A)
    return (-2j * pi * k) * A - (4 * pi**2 * k**2) * np.asarray(B)


def frequency_spectrum(sp, eps, p, k, dps=None):
    """Spectrum of the frequency matrix for mode ``k``.

    With ``dps`` set, matrices are assembled and diagonalized in mpmath at
    that many decimal digits.  Needed when ``eps`` is so small that double
    precision rounding of the O(1/eps^3) viscosity entries swamps the O(1)
    eigenvalues.
    """
    if dps is None:
        A = sp.matrix(eps)
        return eig(frequency_matrix(A, viscosity_matrix(sp, eps, p), k))
    import mpmath

    with mpmath.workdps(dps):
        e = mpmath.mpf(eps)
        mp_params = _MpParams(*(mpmath.mpf(v) for v in (p.dx, p.dt, p.alpha_hat, p.alpha_tilde)))
        A = sp.matrix(e)
        return eig(frequency_matrix(A, viscosity_matrix(sp, e, mp_params), k))


class _MpParams(NamedTuple):
    dx: object
    dt: object
    alpha_hat: object
    alpha_tilde: object


def _classify(max_re):
    tol = STABILITY_TOL * (1.0 + abs(max_re))
    if max_re < -tol:
        return "stable", tol
    if max_re <= tol:
        return "marginal", tol
    return "unstable", tol


def _certified_spectrum(sp, eps, p, k, dps):
    # a max real part inside the rounding band of the assembled matrix has an
    # unreliable sign in double precision: redo it in extended precision
    if dps is not None:
        return frequency_spectrum(sp, eps, p, k, dps)
    F = frequency_matrix(sp.matrix(eps), viscosity_matrix(sp, eps, p), k)
    spec = eig(F)
    if abs(spec.max_real) <= _NOISE_FACTOR * np.finfo(float).eps * norm_inf(F):
        spec = frequency_spectrum(sp, eps, p, k, REFINE_DPS)
    return spec


def _scan(sp, eps, p, ks, dps):
    spectra = [_certified_spectrum(sp, eps, p, k, dps) for k in ks]
    reals = [s.max_real for s in spectra]
    i = int(np.argmax(reals))
    verdict, tol = _classify(reals[i])
    return StabilityReport(list(ks), spectra, reals[i], verdict, ks[i], tol)


def stability_scan(sp, eps, p, k_max=64, dps=None):
    """Scan frequency-matrix spectra for ``k = 1..k_max``.

    For characteristic splittings the sign of every real part is independent
    of ``k``, so only ``k = 1, 2, 7`` (capped at ``k_max``) are evaluated;
    should their verdicts disagree the full range is scanned instead.
    ``k = 0`` is never included since its frequency matrix vanishes.

    In double precision, any spectrum whose largest real part lies within
    the rounding band ``64 * eps_mach * ||F_k||`` is recomputed with
    ``REFINE_DPS`` digits so that the sign, and hence the verdict, is
    trustworthy.
    """
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")
    if sp.kind == "characteristic":
        ks = sorted({1, min(2, k_max), min(7, k_max)})
        spectra = [_certified_spectrum(sp, eps, p, k, dps) for k in ks]
        verdicts = {_classify(s.max_real)[0] for s in spectra}
        if len(verdicts) == 1:
            reals = [s.max_real for s in spectra]
            i = int(np.argmax(reals))
            verdict, tol = _classify(reals[i])
            return StabilityReport(ks, spectra, reals[i], verdict, ks[i], tol)
    return _scan(sp, eps, p, list(range(1, k_max + 1)), dps)


def char_real_parts(a, eps, p, k):
    """Closed-form real parts ``(mu_0, mu_+, mu_-)`` for the prototype characteristic splitting."""
    c = 2 * math.pi**2 * k**2
    alpha = p.alpha_hat + p.alpha_tilde
    re0 = -c * p.dx * alpha + c * p.dt * a**2
    base = -2 * c * p.dt / eps**2 + 4 * c * p.dt / eps + c * a**2 * p.dt - c * p.dx * alpha
    split = 2 * math.sqrt(2) * a * c * p.dt
    return re0, base + split, base - split


def characteristic_real_parts(sp, eps, p, k):
    """Real parts ``2 pi^2 k^2 dt (lam_hat_i^2 - lam_tilde_i^2) - 2 pi^2 k^2 dx alpha``.

    Valid for any splitting carrying characteristic data; ordered like the
    characteristic variables.
    """
    cd = sp.characteristic(eps)
    c = 2 * math.pi**2 * k**2
    alpha = p.alpha_hat + p.alpha_tilde
    return c * p.dt * (cd.lam_hat**2 - cd.lam_tilde**2) - c * p.dx * alpha


def cfl_bounds(a, eps, alpha_hat, alpha_tilde):
    """A-priori advective CFL bounds for the prototype characteristic splitting."""
    if not a > 0:
        raise ValueError(f"a must be positive, got {a}")
    nu1 = (alpha_hat + alpha_tilde) / a
    phi = math.sqrt(2) / (a + 2 * math.sqrt(2))
    psi = 1.0 if eps <= phi else (a / (a + math.sqrt(2))) ** 2
    return CflBounds(nu1, phi, psi, nu1 * psi)


def alpha_values(sp, eps, rule="zero", alpha_hat=None):
    """Default viscosities: ``alpha_hat = max|eig(A_hat)|`` and ``alpha_tilde`` by rule.

    Rules: ``zero``; ``sqrt2`` for ``sqrt(2)(1-eps)/eps``; ``stiff-eig`` for
    ``max|eig(A_tilde)|``.
    """
    if alpha_hat is None:
        alpha_hat = float(np.max(np.abs(eig(sp.hat(eps)).values)))
    if rule == "zero":
        alpha_tilde = 0.0
    elif rule == "sqrt2":
        alpha_tilde = math.sqrt(2) * (1 - eps) / eps
    elif rule == "stiff-eig":
        alpha_tilde = float(np.max(np.abs(eig(sp.tilde(eps)).values)))
    else:
        raise ValueError(f"unknown alpha_tilde rule {rule!r}; choose from {ALPHA_TILDE_RULES}")
    return alpha_hat, alpha_tilde


def max_stable_ratio(sp, eps, dx, alpha_rule="zero", nu_hi=None, k_max=64, alpha_hat=None, rtol=1e-3):
    """Largest advective CFL number ``nu_hat`` with a stable scan, by bisection.

    The bracket is ``(nu_hi * 2**-60, nu_hi]`` with ``nu_hi`` defaulting to
    four times ``(alpha_hat + alpha_tilde) / speed``.  Geometric bisection is
    used while the bracket spans more than a factor of four, arithmetic
    bisection after that, until the relative width is below ``rtol``.
    Returns 0 when even the lower end is unstable.
    """
    speed = sp.advective_speed
    ah, at = alpha_values(sp, eps, alpha_rule, alpha_hat)
    if nu_hi is None:
        nu_hi = 4 * (ah + at) / speed
    if not nu_hi > 0:
        raise ValueError(f"nu_hi must be positive, got {nu_hi}")

    def stable(nu):
        p = SchemeParams.from_cfl(nu, dx, speed, ah, at)
        return stability_scan(sp, eps, p, k_max).stable

    if stable(nu_hi):
        return nu_hi
    lo, hi = nu_hi * 2.0**-60, nu_hi
    if not stable(lo):
        return 0.0
    for _ in range(60):
        if hi - lo <= rtol * lo:
            break
        mid = math.sqrt(lo * hi) if hi > 4 * lo else 0.5 * (lo + hi)
        if stable(mid):
            lo = mid
        else:
            hi = mid
    return lo


def discrete_symbol(sp, eps, p, theta):
    """One-step amplification matrix of the IMEX scheme for the Fourier angle ``theta``.

    ``G = (I + r S_tilde)^-1 (I - r S_hat)`` with ``r = dt/dx`` and
    ``S = i sin(theta) M + (1 - cos(theta)) alpha I`` for each part.
    """
    _, A_hat, A_tilde = sp.matrices(eps)
    d = A_hat.shape[0]
    r = p.dt / p.dx
    s, c = math.sin(theta), 1.0 - math.cos(theta)
    eye = np.eye(d)
    S_hat = 1j * s * A_hat + c * p.alpha_hat * eye
    S_tilde = 1j * s * A_tilde + c * p.alpha_tilde * eye
    return solve_linear(eye + r * S_tilde, eye - r * S_hat)


def symbol_radius(sp, eps, p, thetas):
    """Spectral radius of ``discrete_symbol`` on each angle in ``thetas``."""
    return np.array([np.max(np.abs(eig(discrete_symbol(sp, eps, p, t)).values)) for t in thetas])

