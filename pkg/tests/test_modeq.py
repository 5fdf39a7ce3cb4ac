import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from splitstab.models import (
    FluxSplitting,
    SystemSpec,
    euler_characteristic_splitting,
    euler_pressure_splitting,
    get_splitting,
    prototype_characteristic_splitting,
    prototype_noncommuting_splitting,
)
from splitstab.modeq import (
    SchemeParams,
    alpha_values,
    cfl_bounds,
    char_real_parts,
    characteristic_real_parts,
    discrete_symbol,
    frequency_matrix,
    frequency_spectrum,
    max_stable_ratio,
    stability_scan,
    symbol_radius,
    viscosity_matrix,
)
from splitstab.smallmat import eig

SQRT2 = math.sqrt(2)
PHI2 = SQRT2 / (2 + 2 * SQRT2)


def scalar_splitting(a, explicit=True):
    system = SystemSpec("scalar", 1, lambda eps: np.array([[a]]), advective_speed=a)
    A = np.array([[a]])
    Z = np.zeros((1, 1))
    if explicit:
        return FluxSplitting("scalar-explicit", system, lambda eps: A, lambda eps: Z)
    return FluxSplitting("scalar-implicit", system, lambda eps: Z, lambda eps: A)


# -- viscosity and frequency matrices ---------------------------------------


def test_scalar_upwind_viscosity():
    a, dx, dt = 1.5, 0.02, 0.004
    B = viscosity_matrix(scalar_splitting(a), 0.5, SchemeParams(dx, dt, alpha_hat=a))
    assert B[0, 0] == pytest.approx(a / 2 * (dx - a * dt), rel=1e-14)


def test_viscosity_diagonal_in_characteristic_basis():
    sp = prototype_characteristic_splitting(2.0)
    eps = 0.2
    p = SchemeParams(0.01, 0.002, 3.0, 0.7)
    cd = sp.characteristic(eps)
    D = np.linalg.solve(cd.Q, viscosity_matrix(sp, eps, p) @ cd.Q)
    expected = p.dt / 2 * ((p.alpha_hat + p.alpha_tilde) * p.dx / p.dt - cd.lam_hat**2 + cd.lam_tilde**2)
    np.testing.assert_allclose(np.diag(D), expected, rtol=1e-10)
    assert np.abs(D - np.diag(np.diag(D))).max() <= 1e-10 * np.abs(expected).max()


def test_viscosity_vanishes_for_equal_parts():
    system = SystemSpec("half", 2, lambda eps: np.array([[1.0, 2.0], [2.0, 1.0]]))
    half = lambda eps: 0.5 * system.matrix(eps)
    sp = FluxSplitting("half", system, half, half)
    assert not np.any(viscosity_matrix(sp, 1.0, SchemeParams(0.1, 0.1, 0.0, 0.0)))


def test_frequency_matrix_examples():
    A = np.array([[1.0, 2.0], [0.5, -1.0]])
    B = np.array([[0.3, 0.1], [0.0, 0.2]])
    assert not np.any(frequency_matrix(A, B, 0))
    np.testing.assert_array_equal(frequency_matrix(A, B, -3), np.conj(frequency_matrix(A, B, 3)))
    F = frequency_matrix(np.array([[2.0]]), np.array([[0.25]]), 1)
    assert F[0, 0] == pytest.approx(-2j * math.pi * 2 - 4 * math.pi**2 * 0.25)


@pytest.mark.parametrize("name", ["prototype", "prototype-noncommuting", "euler-paper"])
def test_frequency_conjugacy(name):
    sp = get_splitting(name)
    eps = 0.05
    p = SchemeParams(0.01, 0.001, *alpha_values(sp, eps, "stiff-eig"))
    for k in (1, 3):
        plus = frequency_spectrum(sp, eps, p, k).values
        minus = frequency_spectrum(sp, eps, p, -k).values
        np.testing.assert_allclose(np.sort_complex(minus), np.sort_complex(np.conj(plus)), rtol=1e-12, atol=1e-9)


# -- closed forms ------------------------------------------------------------


def test_char_real_parts_match_numeric():
    a, eps = 2.0, 0.1
    p = SchemeParams(1e-2, 7.5e-4, 2 + SQRT2)
    sp = prototype_characteristic_splitting(a)
    for k in (1, 2, 7):
        closed = np.sort(char_real_parts(a, eps, p, k))
        numeric = np.sort(frequency_spectrum(sp, eps, p, k).values.real)
        np.testing.assert_allclose(numeric, closed, rtol=1e-9)
        np.testing.assert_allclose(np.sort(characteristic_real_parts(sp, eps, p, k)), closed, rtol=1e-12)


def test_char_real_parts_balance_point():
    a = 2.0
    alpha = 2 + SQRT2
    nu1 = alpha / a
    p = SchemeParams.from_cfl(nu1, 1e-2, a, alpha)
    re0, _, _ = char_real_parts(a, 0.3, p, 1)
    assert abs(re0) <= 1e-12 * 2 * math.pi**2 * p.dx * alpha


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0, 4.0])
def test_phi_kills_eps_bracket(a):
    phi = cfl_bounds(a, 1.0, 1.0, 0.0).phi
    bracket = -2 / phi**2 + 4 / phi + a**2 + 2 * SQRT2 * a
    assert abs(bracket) <= 1e-12 * (2 / phi**2)


def test_euler_characteristic_closed_form():
    sp = euler_characteristic_splitting()
    eps = 1e-2
    p = SchemeParams(1e-2, 1e-3, *alpha_values(sp, eps, "stiff-eig"))
    for k in (1, 2):
        np.testing.assert_allclose(
            np.sort(frequency_spectrum(sp, eps, p, k).values.real),
            np.sort(characteristic_real_parts(sp, eps, p, k)),
            rtol=1e-9,
        )


def test_cfl_bounds_examples():
    b = cfl_bounds(2.0, 0.9, 2 + SQRT2, 0.0)
    assert b.phi == pytest.approx(0.29289, abs=1e-5)
    assert b.nu1 == pytest.approx(1.70711, abs=1e-5)
    assert b.psi == pytest.approx(0.34315, abs=1e-5)
    assert b.nu2 == pytest.approx(0.58579, abs=1e-5)
    small = cfl_bounds(2.0, 0.05, 2 + SQRT2, 0.0)
    assert small.psi == 1.0 and small.nu2 == small.nu1
    with pytest.raises(ValueError):
        cfl_bounds(0.0, 0.5, 1.0, 0.0)


def test_alpha_rules():
    sp = prototype_characteristic_splitting(2.0)
    assert alpha_values(sp, 0.1, "zero") == pytest.approx((2 + SQRT2, 0.0))
    assert alpha_values(sp, 0.1, "sqrt2")[1] == pytest.approx(SQRT2 * 0.9 / 0.1)
    assert alpha_values(sp, 0.1, "stiff-eig")[1] == pytest.approx(SQRT2 * 0.9 / 0.1, rel=1e-12)
    with pytest.raises(ValueError):
        alpha_values(sp, 0.1, "bogus")


# -- stability scan ----------------------------------------------------------


def test_scan_stable_below_nu1():
    sp = prototype_characteristic_splitting(2.0)
    p = SchemeParams.from_cfl(1.0, 1e-2, 2.0, 2 + SQRT2)
    rep = stability_scan(sp, 0.05, p)
    assert rep.verdict == "stable" and rep.stable
    assert rep.k_list == [1, 2, 7]
    assert 0 not in rep.k_list


def test_scan_unstable_above_nu1_slow_wave_witness():
    sp = prototype_characteristic_splitting(2.0)
    eps = 0.05
    p = SchemeParams.from_cfl(2.0, 1e-2, 2.0, 2 + SQRT2)
    rep = stability_scan(sp, eps, p)
    assert rep.verdict == "unstable"
    re0 = char_real_parts(2.0, eps, p, rep.witness_k)[0]
    assert re0 > 0
    assert rep.max_real_overall == pytest.approx(re0, rel=1e-9)


def test_scan_noncommuting_unstable():
    sp = prototype_noncommuting_splitting(2.0)
    eps = 1e-3
    p = SchemeParams(5e-4, 1e-3, alpha_values(sp, eps)[0])
    rep = stability_scan(sp, eps, p, k_max=1)
    assert rep.verdict == "unstable" and rep.witness_k == 1


def test_scan_marginal_for_zero_system():
    system = SystemSpec("zero", 2, lambda eps: np.zeros((2, 2)))
    sp = FluxSplitting("zero", system, lambda eps: np.zeros((2, 2)), lambda eps: np.zeros((2, 2)))
    rep = stability_scan(sp, 1.0, SchemeParams(0.1, 0.1, 0.0), k_max=3)
    assert rep.verdict == "marginal"


def test_scan_rejects_bad_kmax():
    with pytest.raises(ValueError):
        stability_scan(prototype_characteristic_splitting(), 0.5, SchemeParams(0.1, 0.1, 1.0), k_max=0)


def test_scheme_params_validation():
    with pytest.raises(ValueError):
        SchemeParams(0.0, 0.1, 1.0)
    with pytest.raises(ValueError):
        SchemeParams(0.1, 0.1, -1.0)
    with pytest.raises(ValueError):
        SchemeParams(0.1, math.nan, 1.0)


@settings(max_examples=40, deadline=None)
@given(
    st.sampled_from([0.5, 1.0, 2.0, 4.0]),
    st.floats(-6, 0),
    st.floats(0.05, 3.0),
    st.sampled_from(["zero", "sqrt2"]),
)
def test_characteristic_sign_is_k_independent(a, log_eps, nu, rule):
    eps = 10**log_eps
    sp = prototype_characteristic_splitting(a)
    ah, at = alpha_values(sp, eps, rule, alpha_hat=a + SQRT2)
    p = SchemeParams.from_cfl(nu, 1e-2, a, ah, at)
    signs = {np.sign(max(char_real_parts(a, eps, p, k))) for k in (1, 2, 7)}
    assert len(signs) == 1


@settings(max_examples=40, deadline=None)
@given(st.floats(-5, 0), st.floats(0.05, 0.99), st.sampled_from(["zero", "stiff-eig"]))
def test_explicit_part_sufficient_condition(log_eps, frac, rule):
    # dt/dx below (alpha_hat + alpha_tilde) / max lam_hat^2 forces stability
    eps = 10**log_eps
    for sp in (prototype_characteristic_splitting(2.0), euler_characteristic_splitting()):
        ah, at = alpha_values(sp, eps, rule)
        ratio = frac * (ah + at) / np.max(sp.characteristic(eps).lam_hat ** 2)
        p = SchemeParams(1e-2, ratio * 1e-2, ah, at)
        assert stability_scan(sp, eps, p).stable


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0, 4.0])
@pytest.mark.parametrize("eps", [1.0, 0.3, 0.1, 1e-3, 1e-6])
@pytest.mark.parametrize("rule", ["zero", "sqrt2"])
def test_below_nu2_is_stable(a, eps, rule):
    sp = prototype_characteristic_splitting(a)
    ah, at = alpha_values(sp, eps, rule, alpha_hat=a + SQRT2)
    nu2 = cfl_bounds(a, eps, ah, at).nu2
    p = SchemeParams.from_cfl(0.99 * nu2, 1e-2, a, ah, at)
    assert stability_scan(sp, eps, p).stable


# -- bisection ---------------------------------------------------------------


def test_max_ratio_small_eps_reaches_nu1():
    sp = prototype_characteristic_splitting(2.0)
    nu = max_stable_ratio(sp, 0.05, 1e-2, alpha_hat=2 + SQRT2)
    nu1 = cfl_bounds(2.0, 0.05, 2 + SQRT2, 0.0).nu1
    assert nu1 * (1 - 1e-3) <= nu <= nu1


def test_max_ratio_large_eps_above_nu2():
    sp = prototype_characteristic_splitting(2.0)
    nu = max_stable_ratio(sp, 0.9, 1e-2, alpha_hat=2 + SQRT2)
    assert 0.586 * (1 - 1e-3) <= nu < 4 * (2 + SQRT2) / 2


def test_max_ratio_noncommuting_halves():
    sp = prototype_noncommuting_splitting(2.0)
    r1 = max_stable_ratio(sp, 1e-2, 5e-3, k_max=8)
    r2 = max_stable_ratio(sp, 5e-3, 5e-3, k_max=8)
    assert r1 / r2 == pytest.approx(2.0, rel=0.1)


def test_max_ratio_stable_top_returned():
    sp = prototype_characteristic_splitting(2.0)
    assert max_stable_ratio(sp, 0.05, 1e-2, alpha_hat=2 + SQRT2, nu_hi=1.0) == 1.0


def test_euler_pressure_growth_is_inverse_square():
    sp = euler_pressure_splitting()
    vals = []
    for eps in (1e-2, 1e-3, 1e-4):
        p = SchemeParams(1e-2, 1e-2, alpha_values(sp, eps)[0])
        vals.append(frequency_spectrum(sp, eps, p, 1).max_real)
    assert 80 <= vals[1] / vals[0] <= 150
    assert 90 <= vals[2] / vals[1] <= 110


# -- discrete symbol ---------------------------------------------------------


def test_symbol_identity_at_zero():
    for name in ("prototype", "euler-paper"):
        sp = get_splitting(name)
        p = SchemeParams(0.01, 0.002, *alpha_values(sp, 0.1, "stiff-eig"))
        np.testing.assert_allclose(discrete_symbol(sp, 0.1, p, 0.0), np.eye(3), atol=1e-15)


def test_symbol_scalar_upwind():
    a, dx, dt = 1.3, 0.01, 0.005
    p = SchemeParams(dx, dt, alpha_hat=a)
    nu = a * dt / dx
    for theta in np.linspace(-math.pi, math.pi, 9):
        G = discrete_symbol(scalar_splitting(a), 1.0, p, theta)
        assert G[0, 0] == pytest.approx(1 - nu * (1 - np.exp(-1j * theta)), abs=1e-14)


def test_symbol_scalar_implicit():
    a, dx, dt = 1.0, 0.01, 0.05
    p = SchemeParams(dx, dt, alpha_hat=0.0, alpha_tilde=a)
    r = dt / dx
    theta = 0.7
    G = discrete_symbol(scalar_splitting(a, explicit=False), 1.0, p, theta)
    assert G[0, 0] == pytest.approx(1 / (1 + r * a * (1 - np.exp(-1j * theta))), abs=1e-14)
    assert abs(G[0, 0]) < 1


def test_symbol_radius_stable_vs_unstable():
    thetas = np.linspace(0, math.pi, 65)
    sp = prototype_characteristic_splitting(2.0)
    p = SchemeParams.from_cfl(0.5, 1e-2, 2.0, *alpha_values(sp, 1e-3))
    assert symbol_radius(sp, 1e-3, p, thetas).max() <= 1 + 10 * p.dt
    nc = prototype_noncommuting_splitting(2.0)
    q = SchemeParams.from_cfl(0.5, 1e-2, 2.0, *alpha_values(nc, 1e-3))
    assert symbol_radius(nc, 1e-3, q, thetas).max() > 1 + 10 * q.dt


def test_eig_of_symbol_consistent():
    sp = prototype_characteristic_splitting(2.0)
    p = SchemeParams(0.01, 0.004, *alpha_values(sp, 0.2))
    G = discrete_symbol(sp, 0.2, p, 0.3)
    assert np.max(np.abs(eig(G).values)) == pytest.approx(max(abs(np.linalg.eigvals(G))), rel=1e-12)
