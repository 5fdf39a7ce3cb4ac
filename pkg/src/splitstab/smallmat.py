"""Dense kernels for small (d <= 8) real and complex matrices.

Eigenvalues come from a Householder reduction to upper Hessenberg form
followed by single-shift complex QR iteration with Wilkinson shifts.  All
routines are written against plain arithmetic on array elements, so they
work for ``float``/``complex`` arrays and equally for ``object`` arrays of
:mod:`mpmath` numbers.  The latter is what makes extended-precision spectra
possible when a matrix mixes entries of very different magnitude.
"""

from dataclasses import dataclass

import math

import numpy as np

__all__ = [
    "Spectrum",
    "EigenConvergenceError",
    "SingularMatrixError",
    "eig",
    "commutator",
    "solve_linear",
    "norm_inf",
    "is_mp",
]

_TOL = 1e-13


class EigenConvergenceError(ArithmeticError):
    """QR iteration hit its sweep cap.

    Attributes
    ----------
    residual : float
        Largest undeflated subdiagonal magnitude when iteration stopped.
    """

    def __init__(self, residual, sweeps):
        self.residual = float(residual)
        self.sweeps = sweeps
        super().__init__(
            f"QR iteration did not converge after {sweeps} sweeps "
            f"(subdiagonal residual {self.residual:.3e})"
        )


class SingularMatrixError(ArithmeticError):
    """Raised by :func:`solve_linear` for matrices singular to working precision."""

    def __init__(self, condition):
        self.condition = float(condition)
        super().__init__(f"matrix is singular to working precision (condition estimate {self.condition:.3e})")


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted by real part, then imaginary part."""

    values: np.ndarray

    @property
    def max_real(self):
        return float(np.max(self.values.real))

    def __len__(self):
        return len(self.values)


def is_mp(m):
    """True if ``m`` holds mpmath numbers (object dtype)."""
    return np.asarray(m).dtype == object


def _eps_of(m):
    if is_mp(m):
        import mpmath

        return float(mpmath.mp.eps)
    return float(np.finfo(float).eps)


def norm_inf(m):
    return max(sum(abs(x) for x in row) for row in m)


def _eps_of_rows(mp):
    if mp:
        import mpmath

        return float(mpmath.mp.eps)
    return float(np.finfo(float).eps)


def _as_complex_rows(m):
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if is_mp(m):
        import mpmath

        return [[mpmath.mpc(x) for x in row] for row in m]
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return [[complex(x) for x in row] for row in m.tolist()]


def _balance(h):
    """Parlett-Reinsch balancing with powers of two, in place.

    Returns the diagonal ``D`` such that the balanced matrix is ``D^-1 m D``.
    """
    n = len(h)
    scale = [1.0] * n
    done = False
    while not done:
        done = True
        for i in range(n):
            c = sum(abs(h[j][i]) for j in range(n) if j != i)
            r = sum(abs(h[i][j]) for j in range(n) if j != i)
            if c == 0 or r == 0:
                continue
            s = c + r
            f = 1.0
            g = r / 2
            while c < g:
                f *= 2.0
                c *= 4
            g = r * 2
            while c >= g:
                f /= 2.0
                c /= 4
            if (c + r) / f < 0.95 * s:
                done = False
                scale[i] *= f
                for j in range(n):
                    h[j][i] *= f
                    h[i][j] /= f
    return scale


def _hessenberg(h, z):
    n = len(h)
    for k in range(n - 2):
        v = [h[i][k] for i in range(k + 1, n)]
        alpha = sum(abs(x) ** 2 for x in v) ** 0.5
        if alpha == 0:
            continue
        x0 = v[0]
        v[0] = x0 + (x0 / abs(x0) if x0 != 0 else 1) * alpha
        beta = 2 / sum(abs(x) ** 2 for x in v)
        vc = [x.conjugate() for x in v]
        m = len(v)
        # rows k+1.. : H <- (I - beta v v^H) H
        for j in range(n):
            w = beta * sum(vc[i] * h[k + 1 + i][j] for i in range(m))
            for i in range(m):
                h[k + 1 + i][j] -= v[i] * w
        # columns k+1.. : H <- H (I - beta v v^H), same for Z
        for mat in (h, z):
            for row in mat:
                w = beta * sum(row[k + 1 + i] * v[i] for i in range(m))
                for i in range(m):
                    row[k + 1 + i] -= w * vc[i]
        for i in range(k + 2, n):
            h[i][k] = 0 * h[i][k]


def _givens(a, b):
    # G = [[c, s], [-conj(s), c]] maps (a, b) to (r, 0); c is real.
    if b == 0:
        return 1, 0 * b
    if a == 0:
        return 0, 1 + 0 * b
    r = (abs(a) ** 2 + abs(b) ** 2) ** 0.5
    return abs(a) / r, (a / abs(a)) * b.conjugate() / r


def _wilkinson(a, b, c, d):
    half = (a - d) / 2
    disc = (half * half + b * c) ** 0.5
    mu1 = d - b * c / (half + disc) if half + disc != 0 else d
    mu2 = d - b * c / (half - disc) if half - disc != 0 else d
    return mu1 if abs(mu1 - d) <= abs(mu2 - d) else mu2


def _qr_sweep(h, z, lo, hi, shift):
    n = len(h)
    for i in range(lo, hi + 1):
        h[i][i] -= shift
    rots = []
    for i in range(lo, hi):
        c, s = _givens(h[i][i], h[i + 1][i])
        sc = s.conjugate()
        r0, r1 = h[i], h[i + 1]
        for j in range(i, n):
            x, y = r0[j], r1[j]
            r0[j] = c * x + s * y
            r1[j] = c * y - sc * x
        rots.append((c, s, sc))
    for i, (c, s, sc) in zip(range(lo, hi), rots):
        top = min(i + 2, hi) + 1
        for row in h[:top]:
            x, y = row[i], row[i + 1]
            row[i] = c * x + sc * y
            row[i + 1] = c * y - s * x
        for row in z:
            x, y = row[i], row[i + 1]
            row[i] = c * x + sc * y
            row[i + 1] = c * y - s * x
    for i in range(lo, hi + 1):
        h[i][i] += shift


def _schur(h, z, tol):
    n = len(h)
    cap = 100 * n
    sweeps = 0
    since_deflation = 0
    hnorm = norm_inf(h)
    hi = n - 1
    while hi > 0:
        lo = hi
        while lo > 0:
            ref = abs(h[lo - 1][lo - 1]) + abs(h[lo][lo])
            if ref == 0:
                ref = hnorm
            if abs(h[lo][lo - 1]) <= tol * ref:
                h[lo][lo - 1] = 0 * h[lo][lo - 1]
                break
            lo -= 1
        if lo == hi:
            hi -= 1
            since_deflation = 0
            continue
        if sweeps >= cap:
            resid = max(abs(h[i][i - 1]) for i in range(1, n))
            raise EigenConvergenceError(resid, sweeps)
        sweeps += 1
        since_deflation += 1
        if since_deflation % 11 == 10:
            shift = h[hi][hi] + 0.75 * abs(h[hi][hi - 1])
        else:
            shift = _wilkinson(h[hi - 1][hi - 1], h[hi - 1][hi], h[hi][hi - 1], h[hi][hi])
        _qr_sweep(h, z, lo, hi, shift)


def _triangular_eigvecs(t, eps):
    n = len(t)
    tnorm = norm_inf(t)
    small = eps * tnorm if tnorm else eps
    y = [[0 * t[0][0]] * n for _ in range(n)]
    for i in range(n):
        lam = t[i][i]
        y[i][i] = 1 + 0 * lam
        for j in range(i - 1, -1, -1):
            acc = sum(t[j][m] * y[m][i] for m in range(j + 1, i + 1))
            den = t[j][j] - lam
            if abs(den) < small:
                den = small + 0 * den
            y[j][i] = -acc / den
    return y


def _sort_order(vals):
    re = np.array([float(v.real) for v in vals])
    im = np.array([float(v.imag) for v in vals])
    return np.lexsort((im, re))


def _quadratic(m):
    (a, b), (c, d) = m
    mean = (a + d) / 2
    disc = (((a - d) / 2) ** 2 + b * c) ** 0.5
    l1 = mean + disc
    l2 = mean - disc
    det = a * d - b * c
    # recover the smaller root from the product to avoid cancellation
    if abs(l1) >= abs(l2) and l1 != 0:
        l2 = det / l1
    elif l2 != 0:
        l1 = det / l2
    return [l1, l2]


def eig(m, *, vectors=False, balance=True, tol=None):
    """Eigenvalues (and optionally eigenvectors) of a small square matrix.

    Parameters
    ----------
    m : array_like, shape (d, d)
        Real or complex matrix; an ``object`` array of mpmath numbers is
        processed at the current ``mpmath.mp`` precision.
    vectors : bool
        Also return eigenvectors as the columns of a matrix, ordered like
        the eigenvalues, with unit Euclidean norm.
    balance : bool
        Apply diagonal balancing first.  Strongly recommended for matrices
        whose entries span many orders of magnitude.
    tol : float, optional
        Deflation tolerance, relative to neighbouring diagonal entries.
        Defaults to 1e-13 in double precision and to a few ulps otherwise.

    Returns
    -------
    Spectrum or (Spectrum, ndarray)

    Raises
    ------
    EigenConvergenceError
        If QR iteration needs more than ``100 * d`` sweeps.
    """
    mp = is_mp(m)
    h = _as_complex_rows(m)
    n = len(h)
    eps = _eps_of_rows(mp)
    if tol is None:
        tol = 16 * eps if mp else _TOL

    if n == 2 and not vectors:
        vals = _quadratic(h)
    else:
        scale = _balance(h) if balance else [1.0] * n
        one, zero = 1 + 0 * h[0][0], 0 * h[0][0]
        z = [[one if i == j else zero for j in range(n)] for i in range(n)]
        if n > 1:
            _hessenberg(h, z)
            _schur(h, z, tol)
        vals = [h[i][i] for i in range(n)]

    order = _sort_order(vals)
    values = np.array([complex(vals[i]) for i in order])
    spec = Spectrum(values)
    if not vectors:
        return spec

    y = _triangular_eigvecs(h, eps)
    v = np.empty((n, n), dtype=complex)
    for col, k in enumerate(order):
        vec = [scale[i] * sum(z[i][m] * y[m][k] for m in range(n)) for i in range(n)]
        nrm = sum(abs(x) ** 2 for x in vec) ** 0.5
        v[:, col] = [complex(x / nrm) for x in vec]
    return spec, v


def commutator(a, b):
    """Return ``a @ b - b @ a``."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"commutator needs equal square shapes, got {a.shape} and {b.shape}")
    return a @ b - b @ a


def _pow2(v):
    # nearest power of two to 1/v, so scaling is exact
    return 2.0 ** -math.frexp(float(v))[1]


def solve_linear(m, rhs):
    """Solve ``m x = rhs`` by LU factorization with partial pivoting.

    Rows and then columns are first equilibrated by powers of two, so
    badly scaled but well-conditioned systems (entries spanning many
    orders of magnitude) are handled.

    Raises
    ------
    SingularMatrixError
        When a pivot of the equilibrated matrix drops below ``d * eps``.
    """
    m = np.asarray(m)
    rhs = np.asarray(rhs)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    n = m.shape[0]
    if rhs.shape[0] != n:
        raise ValueError(f"rhs has length {rhs.shape[0]}, matrix has dimension {n}")
    dtype = object if (is_mp(m) or is_mp(rhs)) else np.result_type(m, rhs, float)
    lu = np.array(m, dtype=dtype)
    x = np.array(rhs, dtype=dtype)
    absm = np.array([[float(abs(v)) for v in row] for row in lu])
    row_max = absm.max(axis=1)
    if np.any(row_max == 0):
        raise SingularMatrixError(np.inf)
    rs = np.array([_pow2(v) for v in row_max])
    absm *= rs[:, None]
    col_max = absm.max(axis=0)
    if np.any(col_max == 0):
        raise SingularMatrixError(np.inf)
    cs = np.array([_pow2(v) for v in col_max])
    for i in range(n):
        for j in range(n):
            lu[i, j] = lu[i, j] * (rs[i] * cs[j])
        x[i] = x[i] * rs[i]
    floor = n * _eps_of(lu)
    for k in range(n):
        p = k + int(np.argmax([abs(v) for v in lu[k:, k]]))
        piv = abs(lu[p, k])
        if piv <= floor:
            raise SingularMatrixError(1.0 / float(piv) if piv else np.inf)
        if p != k:
            lu[[k, p]] = lu[[p, k]]
            x[[k, p]] = x[[p, k]]
        f = lu[k + 1 :, k] / lu[k, k]
        lu[k + 1 :, k:] -= np.outer(f, lu[k, k:])
        x[k + 1 :] -= np.outer(f, x[k]) if x.ndim > 1 else f * x[k]
    for k in range(n - 1, -1, -1):
        x[k] = (x[k] - lu[k, k + 1 :] @ x[k + 1 :]) / lu[k, k]
    for i in range(n):
        x[i] = x[i] * cs[i]
    return x
