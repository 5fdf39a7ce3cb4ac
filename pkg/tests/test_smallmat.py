import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from splitstab.models import prototype_noncommuting_splitting, prototype_characteristic_splitting, prototype_system
from splitstab.smallmat import (
    EigenConvergenceError,
    SingularMatrixError,
    Spectrum,
    commutator,
    eig,
    norm_inf,
    solve_linear,
)

SQRT2 = math.sqrt(2)


def test_diagonal():
    spec = eig(np.diag([3.0, 1.0, 2.0]))
    assert isinstance(spec, Spectrum)
    np.testing.assert_allclose(spec.values, [1, 2, 3], atol=1e-14)


def test_prototype_eigenvalues():
    A = prototype_system(2.0).matrix(0.5)
    np.testing.assert_allclose(eig(A).values, [2 - 2 * SQRT2, 2, 2 + 2 * SQRT2], rtol=1e-13)


def test_rotation_generator():
    vals = eig(np.array([[0.0, 1.0], [-1.0, 0.0]])).values
    np.testing.assert_allclose(vals, [-1j, 1j], atol=1e-15)


def test_sorted_by_real_then_imag():
    m = np.diag([1 + 2j, -1 + 0j, 1 - 2j, 0.5j])
    vals = eig(m).values
    np.testing.assert_allclose(vals, [-1, 0.5j, 1 - 2j, 1 + 2j], atol=1e-14)


def test_max_real():
    assert eig(np.diag([-3.0, -1.0, -2.0])).max_real == pytest.approx(-1.0)


def test_one_by_one_and_empty_shape_checks():
    np.testing.assert_allclose(eig(np.array([[4.0]])).values, [4.0])
    with pytest.raises(ValueError):
        eig(np.ones((2, 3)))


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        eig(np.array([[np.nan, 0.0], [0.0, 1.0]]))


def test_defective_jordan_block():
    vals = eig(np.array([[2.0, 1.0, 0.0], [0.0, 2.0, 1.0], [0.0, 0.0, 2.0]])).values
    np.testing.assert_allclose(vals, [2, 2, 2], atol=1e-4)


def test_eigenvectors_residual():
    rng = np.random.default_rng(3)
    for d in range(1, 8):
        m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        spec, V = eig(m, vectors=True)
        np.testing.assert_allclose(np.linalg.norm(V, axis=0), 1.0, rtol=1e-12)
        res = m @ V - V * spec.values
        assert np.abs(res).max() <= 1e-12 * norm_inf(m)


def test_mp_precision_path():
    with mpmath.workdps(40):
        m = np.array([[mpmath.mpf(2), mpmath.mpf(1)], [mpmath.mpf(1), mpmath.mpf(3)]], dtype=object)
        m3 = np.array(
            [[mpmath.mpf(v) for v in row] for row in [[4, 1, 0], [1, 3, 1], [0, 1, 2]]],
            dtype=object,
        )
        v2 = eig(m).values
        v3 = eig(m3).values
    assert abs(complex(v2[0]) - (5 - math.sqrt(5)) / 2) < 1e-15
    np.testing.assert_allclose(np.array([complex(v) for v in v3]).real, np.linalg.eigvalsh(m3.astype(float)), rtol=1e-14)


def test_convergence_error_fields():
    err = EigenConvergenceError(1e-3, 300)
    assert err.residual == 1e-3 and err.sweeps == 300


def test_commutator_identity_and_shape():
    B = np.arange(9.0).reshape(3, 3)
    assert not np.any(commutator(np.eye(3), B))
    with pytest.raises(ValueError):
        commutator(np.eye(2), np.eye(3))


def test_commutator_noncommuting_splitting():
    sp = prototype_noncommuting_splitting(2.0)
    eps = 0.1
    C = commutator(sp.tilde(eps), sp.hat(eps))
    expected = 2 * (1 - eps - eps**2) / eps**2
    assert expected == pytest.approx(178.0)
    vals = eig(C).values
    np.testing.assert_allclose(vals, [-expected, 0, expected], atol=1e-9 * expected)


@pytest.mark.parametrize("a,eps", [(0.5, 1.0), (2.0, 0.1), (4.0, 1e-3), (1.0, 1e-6)])
def test_commutator_characteristic_vanishes(a, eps):
    sp = prototype_characteristic_splitting(a)
    C = commutator(sp.hat(eps), sp.tilde(eps))
    assert norm_inf(C) <= 1e-10 * max(1.0, norm_inf(sp.hat(eps)) * norm_inf(sp.tilde(eps)))


def test_solve_linear_examples():
    v = np.array([1.0, -2.0, 3.0])
    np.testing.assert_array_equal(solve_linear(np.eye(3), v), v)
    np.testing.assert_allclose(solve_linear(np.diag([2.0, 4.0]), np.array([2.0, 8.0])), [1.0, 2.0])
    hilbert = np.array([[1.0, 0.5], [0.5, 1 / 3]])
    x = solve_linear(hilbert, np.array([1.0, 0.0]))
    assert np.abs(hilbert @ x - [1, 0]).max() <= 1e-12 * (norm_inf(hilbert) * np.abs(x).max() + 1)
    np.testing.assert_allclose(x, [4.0, -6.0], rtol=1e-12)


def test_solve_linear_singular_and_matrix_rhs():
    with pytest.raises(SingularMatrixError):
        solve_linear(np.ones((3, 3)), np.ones(3))
    m = np.array([[1.0, 2.0], [3.0, 4.0j]])
    rhs = np.eye(2)
    np.testing.assert_allclose(m @ solve_linear(m, rhs), rhs, atol=1e-14)


def test_solve_linear_badly_scaled():
    # entries spanning 28 orders of magnitude, yet well conditioned after scaling
    s = np.array([1e-14, 1.0, 1e14])
    m = (np.array([[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 2.0]]) * s[:, None]) / s[None, :]
    x_true = s * np.array([1.0, -2.0, 3.0])
    x = solve_linear(m, m @ x_true)
    np.testing.assert_allclose(x, x_true, rtol=1e-13)


def _well_conditioned(rng, d):
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    return q @ np.diag(rng.uniform(1, 3, d)) @ np.linalg.qr(rng.standard_normal((d, d)))[0]


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_reconstructs_prescribed_spectrum(d, seed):
    rng = np.random.default_rng(seed)
    lam = rng.uniform(-5, 5, d) + 1j * rng.uniform(-5, 5, d)
    Q = _well_conditioned(rng, d)
    m = Q @ np.diag(lam) @ np.linalg.inv(Q)
    got = eig(m).values
    for v in lam:
        assert np.min(np.abs(got - v)) <= 1e-9 * max(1.0, abs(v))


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_trace_equals_eigenvalue_sum(d, seed):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    total = eig(m).values.sum()
    assert abs(total - np.trace(m)) <= 1e-10 * max(1.0, np.abs(m).sum())


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_commutator_antisymmetric(d, seed):
    rng = np.random.default_rng(seed)
    a, b = rng.standard_normal((2, d, d))
    np.testing.assert_array_equal(commutator(a, b), -commutator(b, a))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_solve_residual(d, seed):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)) + 2 * np.eye(d)
    b = rng.standard_normal(d)
    x = solve_linear(m, b)
    assert np.abs(m @ x - b).max() <= 1e-12 * (norm_inf(m) * np.abs(x).max() + np.abs(b).max())
