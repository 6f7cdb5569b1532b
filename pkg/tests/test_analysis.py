import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mg1split import (
    MG1Model,
    analyze,
    build_P_omega,
    build_W,
    cost_model,
    cost_per_step,
    drift,
    gen_example_1a,
    gen_example_1b,
    kron_rates,
    omega_hat_c1,
    optimal_omega,
    qbd_rate,
    rho_bounds,
    solve,
    staircase_point,
    staircase_rho,
)
from mg1split.exceptions import GuardExceededError
from mg1split.kernel import dominant_eig

from conftest import scalar_model


def _G(model, tol=1e-14):
    res = solve(model, method="ubased", tol=tol)
    assert res.converged
    return res.G_approx


@pytest.fixture(scope="module")
def qbd20():
    m = gen_example_1a(20, 1e-2)
    return m, _G(m)


@pytest.fixture(scope="module")
def geo03():
    m = gen_example_1b(0.3)
    return m, _G(m)


ONE = np.array([[1.0]])


def test_W_scalar(recurrent_scalar):
    assert build_W(recurrent_scalar, ONE)[0, 0] == pytest.approx(0.6)


def test_W_empty_sum():
    m = MG1Model((np.array([[0.5]]), np.array([[0.5]])))
    assert build_W(m, np.array([[1.0]]))[0, 0] == 0.0


def test_W_direct_sum(geo03):
    m, G = geo03
    direct = np.zeros((5, 5))
    for i in range(1, m.q + 1):
        direct += m.block(i) @ sum(np.linalg.matrix_power(G, j) for j in range(i + 1))
    np.testing.assert_allclose(build_W(m, G), direct, atol=1e-14)


def test_P_omega_scalar(recurrent_scalar):
    W = build_W(recurrent_scalar, ONE)
    assert build_P_omega(recurrent_scalar, ONE, W, 0.0)[0, 0] == pytest.approx(6 / 7, abs=1e-15)
    assert build_P_omega(recurrent_scalar, ONE, W, 1.0)[0, 0] == pytest.approx(36 / 49, abs=1e-15)
    assert build_P_omega(recurrent_scalar, ONE, W, 7.0)[0, 0] == pytest.approx(0.0, abs=1e-15)


def test_omega_hat_scalar(recurrent_scalar):
    W = build_W(recurrent_scalar, ONE)
    assert omega_hat_c1(recurrent_scalar, ONE, W) == pytest.approx(7.0, rel=1e-13)


def test_omega_hat_without_A1():
    m = MG1Model((np.array([[0.5]]), np.array([[0.5]])))
    assert math.isinf(omega_hat_c1(m, ONE, build_W(m, ONE)))


def test_omega_hat_floor_warns(recurrent_scalar):
    # an artificially small W gives a raw cap 0.01 / (0.6 (1 - 0.01/0.7)) < 1
    W = np.array([[0.01]])
    raw = omega_hat_c1(recurrent_scalar, ONE, W, floor=False)
    assert raw == pytest.approx(0.01 / (0.6 * (1 - 0.01 / 0.7)))
    with pytest.warns(RuntimeWarning):
        assert omega_hat_c1(recurrent_scalar, ONE, W) == 1.0


def test_omega_hat_cap_keeps_N_nonnegative(qbd20):
    m, G = qbd20
    W = build_W(m, G)
    cap = omega_hat_c1(m, G, W)
    assert cap >= 6.0
    n = m.n
    K = np.linalg.solve(np.eye(n) - m.A0, W)
    for omega in (0.0, 0.5 * cap, cap):
        N = W - omega * m.A1 @ (np.eye(n) + G) @ (np.eye(n) - K)
        assert N.min() >= -1e-12


def test_bounds_collapse_at_zero(geo03):
    m, G = geo03
    ra = rho_bounds(m, G, omega=0.0)
    assert ra.bound_lo == ra.bound_hi == ra.rho0 == ra.rho_omega


def test_sigma_range(geo03):
    m, G = geo03
    ra = rho_bounds(m, G, omega=1.0)
    assert 0 <= ra.sigma_min <= ra.sigma_max <= ra.rho0 + 1e-12
    assert ra.rho0 < 1


def test_sandwich_geometric(geo03):
    m, G = geo03
    W = build_W(m, G)
    cap = rho_bounds(m, G, W, 0.0).omega_hat_c1
    for omega in (0.5, 1.0, min(2.0, cap), cap):
        ra = rho_bounds(m, G, W, omega)
        assert ra.bound_lo - 1e-10 <= ra.rho_omega <= ra.bound_hi + 1e-10


def test_rho_omega_matches_dense_eigensolver(geo03):
    m, G = geo03
    ra = rho_bounds(m, G, omega=1.5)
    assert ra.rho_omega == pytest.approx(np.max(np.abs(np.linalg.eigvals(ra.P_omega))), abs=1e-10)


@pytest.mark.parametrize("omega", [0.5, 1.0, 2.0])
def test_qbd_identity(qbd20, omega):
    m, G = qbd20
    ra = rho_bounds(m, G, omega=omega)
    assert ra.rho_omega == pytest.approx(qbd_rate(ra.rho0, omega), abs=1e-8)
    if omega == 1.0:
        assert ra.rho_omega == pytest.approx(ra.rho0**2, abs=1e-8)


def test_grid_is_linear_for_qbd(qbd20):
    m, G = qbd20
    res = analyze(m, G, np.arange(0, 6.01, 0.5))
    rho = np.array([r[1] for r in res["rows"]])
    assert np.all(np.diff(rho) < 0)
    np.testing.assert_allclose(np.diff(rho, 2), 0.0, atol=1e-10)
    assert res["qbd"]


def test_staircase_rho_limits():
    for lam in (0.1, 0.5, 0.9, 0.999):
        assert staircase_rho(lam, 1.0) == lam * lam
        assert staircase_rho(lam, 0.0) == pytest.approx(lam, abs=1e-15)


@pytest.mark.parametrize("lam", [0.5, 0.9, 0.999])
def test_optimal_omega(lam):
    omega_star, rho_star = optimal_omega(lam)
    assert rho_star == pytest.approx(1 - math.sqrt(1 - lam * lam), abs=1e-15)
    assert abs(staircase_rho(lam, omega_star) - rho_star) <= 1e-12


def test_optimal_omega_values():
    omega_star, rho_star = optimal_omega(0.999)
    assert omega_star == pytest.approx(1.9144065430551349, abs=1e-12)
    assert rho_star == pytest.approx(0.955290, abs=1e-6)


def test_optimal_omega_small_lambda():
    assert optimal_omega(1e-6)[1] < 1e-11


@settings(max_examples=80, deadline=None)
@given(lam=st.floats(0.01, 0.999), omega=st.floats(0.0, 3.0))
def test_optimal_omega_minimizes(lam, omega):
    omega_star, rho_star = optimal_omega(lam)
    assert staircase_rho(lam, omega) >= rho_star - 1e-9


@settings(max_examples=80, deadline=None)
@given(lam=st.floats(0.01, 0.999), omega=st.floats(0.0, 3.0))
def test_staircase_rho_is_root_modulus(lam, omega):
    l2 = lam * lam
    roots = np.roots([1.0, -l2 * omega, l2 * (omega - 1.0)])
    assert staircase_rho(lam, omega) == pytest.approx(np.max(np.abs(roots)), abs=1e-7)


def test_staircase_point():
    pt = staircase_point(0.9, 1.2)
    assert pt.omega_star == optimal_omega(0.9)[0]
    assert pt.rho_s == staircase_rho(0.9, 1.2)


def test_staircase_rho_domain():
    with pytest.raises(ValueError):
        staircase_rho(1.0, 1.0)
    with pytest.raises(ValueError):
        staircase_rho(0.5, -1.0)


@pytest.mark.parametrize(
    "model", [gen_example_1a(4, 1e-2), gen_example_1a(6, 0.2), gen_example_1b(0.3, 10)],
    ids=["1a-n4", "1a-n6", "1b-q10"],
)
def test_kron_dominance(model):
    # the truncated geometric model is only approximately stochastic; G still exists
    G = _G(model)
    k = kron_rates(model, G)
    W = build_W(model, G)
    assert k.rho_H0 <= rho_bounds(model, G, W, 0.0).rho0 + 1e-10
    assert k.rho_H1 <= rho_bounds(model, G, W, 1.0).rho_omega + 1e-10


def test_kron_H0_of_qbd_matches_P0():
    m = gen_example_1a(4, 1e-2)
    G = _G(m)
    k = kron_rates(m, G)
    assert k.rho_H0 == pytest.approx(rho_bounds(m, G, omega=0.0).rho0, abs=1e-8)


def test_kron_empty():
    m = MG1Model((np.full((2, 2), 0.25), np.full((2, 2), 0.25)))
    k = kron_rates(m, np.full((2, 2), 0.5))
    assert k.rho_H0 == 0.0 and k.rho_H1 == 0.0


def test_kron_guard():
    m = gen_example_1a(33, 0.1)
    with pytest.raises(GuardExceededError):
        kron_rates(m, np.zeros((33, 33)))


def test_costs():
    assert cost_per_step("traditional", 100, 1, 1.0) == 1e6 + 2e4
    assert cost_per_step("staircase", 100, 1, 1.0) == 2e6 + 4e4
    assert cost_per_step("adaptive_zero", 10, 5, 1.0) == 8000 + 400
    assert cost_per_step("ubased", 3, 1, 0.0) == pytest.approx((1 + 4 / 3) * 27)
    with pytest.raises(ValueError):
        cost_per_step("bogus", 3, 1)
    cm = cost_model(10, 2, gamma=10)
    assert cm.per_step["relaxed"] == cm.per_step["staircase"]


def test_analyze_scalar(recurrent_scalar):
    res = analyze(recurrent_scalar, ONE, [1.0])
    assert res["rho0"] == pytest.approx(6 / 7, abs=1e-14)
    assert res["omega_hat_c1"] == pytest.approx(7.0, rel=1e-13)
    assert res["rows"][0][1] == pytest.approx(36 / 49, abs=1e-14)


def test_perron_vector_positive_for_P0(geo03):
    m, G = geo03
    ra = rho_bounds(m, G, omega=0.0)
    assert ra.v.min() > 0
    est = dominant_eig(ra.P_omega)
    assert est.value == pytest.approx(ra.rho0, abs=1e-12)


def _random_recurrent(seed, n=3, q=2):
    rng = np.random.default_rng(seed)
    B = rng.random((q + 2, n, n))
    B[0] *= 3.0 * q
    B /= B.sum(axis=(0, 2))[None, :, None]
    return MG1Model(tuple(B))


@pytest.mark.parametrize("seed", range(8))
def test_sandwich_random_models(seed):
    m = _random_recurrent(seed)
    assert drift(m).eta < 0
    G = _G(m)
    W = build_W(m, G)
    base = rho_bounds(m, G, W, 0.0)
    assert base.rho0 < 1
    assert 0 <= base.sigma_min <= base.sigma_max <= base.rho0 + 1e-12
    for omega in (0.5, 1.0, min(2.0, base.omega_hat_c1), base.omega_hat_c1):
        ra = rho_bounds(m, G, W, omega)
        assert ra.bound_lo - 1e-10 <= ra.rho_omega <= ra.bound_hi + 1e-10
