import math

import numpy as np
import pytest
from scipy.linalg import expm

from becprobe.dissipation import ChannelKind, make_channel
from becprobe.errors import DimMismatch, StepTooLarge, ZeroChi
from becprobe.fock import FockCutoff, State, coherent_state, fock_state
from becprobe.liouville import (AnalyticCrossTerm, Liouvillian,
                                analytic_cross_coefficient, analytic_gamma_bar,
                                analytic_thermal_visibility, build_liouvillian,
                                evolve, evolve_trajectory)
from becprobe.model import ModelParams, build_hamiltonian


def _random_density(dim, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def _test_liouvillian(n_max=6):
    cut = FockCutoff(n_max)
    h = build_hamiltonian(ModelParams(omega0=0.3, omega=1.1, kappa=0.05,
                                      chi=1.0), cut)
    channels = [make_channel(ChannelKind.ONE_BODY, 0.04, cut).lifted(),
                make_channel(ChannelKind.THREE_BODY, 0.002, cut).lifted(),
                make_channel(ChannelKind.DEPHASING, 0.03, cut).lifted()]
    return Liouvillian(h, channels)


def test_apply_matches_direct_master_equation():
    lv = _test_liouvillian()
    h = lv.hamiltonian.mat
    for seed in range(5):
        rho = _random_density(lv.dim, seed)
        expected = -1j * (h @ rho - rho @ h)
        for ch in lv.channels:
            j = ch.jump.mat
            jj = j.conj().T @ j
            expected += ch.weight * (2 * j @ rho @ j.conj().T
                                     - jj @ rho - rho @ jj)
        assert np.allclose(lv.apply(rho), expected, atol=1e-13)


def test_apply_hermiticity_and_trace():
    lv = _test_liouvillian()
    for seed in range(3):
        out = lv.apply(_random_density(lv.dim, seed))
        assert np.abs(out - out.conj().T).max() < 1e-12
        assert abs(np.trace(out)) < 1e-12


def test_matrix_matches_apply():
    lv = _test_liouvillian(4)
    rho = _random_density(lv.dim, 3)
    via_matrix = (lv.matrix() @ rho.reshape(-1)).reshape(rho.shape)
    assert np.allclose(via_matrix, lv.apply(rho), atol=1e-12)


def test_closed_generator_spectrum_imaginary():
    cut = FockCutoff(3)
    h = build_hamiltonian(ModelParams(omega0=0.2, omega=1.0, chi=0.5), cut)
    lv = Liouvillian(h, [])
    evals = np.linalg.eigvals(lv.matrix())
    assert np.abs(evals.real).max() < 1e-12


def test_one_body_dark_state_is_vacuum():
    cut = FockCutoff(4)
    lv = Liouvillian(None, [make_channel(ChannelKind.ONE_BODY, 0.5, cut)])
    evals = np.linalg.eigvals(lv.matrix())
    assert evals.real.max() < 1e-12
    st = evolve(fock_state(3, cut), lv, 60.0)
    assert st.rho[0, 0].real == pytest.approx(1.0, abs=1e-8)


def test_sectored_exact_matches_dense_superoperator():
    lv = _test_liouvillian()
    assert lv.is_diagonal_sectored
    rho = _random_density(lv.dim, 5)
    t = 0.9
    sectored = lv.propagate_matrix(rho, t, method="exact")
    dense = (expm(lv.matrix() * t) @ rho.reshape(-1)).reshape(rho.shape)
    assert np.abs(sectored - dense).max() < 1e-12


def test_exact_matches_rk4():
    lv = _test_liouvillian()
    rho = _random_density(lv.dim, 2)
    exact = lv.propagate_matrix(rho, 0.7, method="exact")
    rk4 = lv.propagate_matrix(rho, 0.7, method="rk4", dt=1e-3)
    assert np.abs(exact - rk4).max() < 1e-8


def test_evolve_identity_at_zero_time():
    lv = _test_liouvillian()
    s = State.from_density(lv.dims, _random_density(lv.dim, 1))
    out = evolve(s, lv, 0.0)
    assert np.array_equal(out.rho, s.rho)


def test_closed_evolution_preserves_purity():
    cut = FockCutoff(25)
    h = build_hamiltonian(ModelParams(omega=1.0, kappa=0.1, chi=1.0), cut)
    lv = Liouvillian(h, [])
    from becprobe.fock import tensor
    q = State.from_vector((2,), np.array([1.0, 1.0]) / math.sqrt(2))
    s = tensor(q, coherent_state(2.0, cut))
    out = evolve(s, lv, 1.7)
    assert out.purity() == pytest.approx(1.0, abs=1e-10)


def test_evolve_mixture_linearity():
    lv = _test_liouvillian()
    rho1 = _random_density(lv.dim, 10)
    rho2 = _random_density(lv.dim, 11)
    for w in (0.25, 0.6):
        mixed = lv.propagate_matrix(w * rho1 + (1 - w) * rho2, 0.4)
        parts = (w * lv.propagate_matrix(rho1, 0.4)
                 + (1 - w) * lv.propagate_matrix(rho2, 0.4))
        assert np.abs(mixed - parts).max() < 1e-9


def test_rk4_trace_drift_raises():
    cut = FockCutoff(30)
    lv = Liouvillian(None, [make_channel(ChannelKind.ONE_BODY, 5.0, cut)])
    s = coherent_state(2.0, cut)
    with pytest.raises(StepTooLarge):
        evolve(s, lv, 3.0, method="rk4", dt=0.5)


def test_dim_mismatch():
    lv = _test_liouvillian()
    with pytest.raises(DimMismatch):
        evolve(fock_state(0, FockCutoff(3)), lv, 1.0)


def test_trajectory_matches_single_shot():
    lv = _test_liouvillian()
    s = State.from_density(lv.dims, _random_density(lv.dim, 4))
    traj = evolve_trajectory(s, lv, [0.2, 0.5, 1.0])
    direct = evolve(s, lv, 1.0)
    assert np.abs(traj[-1].rho - direct.rho).max() < 1e-10


def test_cross_coefficient_trivials():
    assert analytic_cross_coefficient(2.0, 0.0, 0.3, 1.0) == pytest.approx(1.0)
    assert analytic_cross_coefficient(2.0, 1.0, 0.0, 1.0) == pytest.approx(1.0)
    assert abs(AnalyticCrossTerm(2.0, 1.2, 0.4, 0.7).coefficient) <= 1.0


def test_cross_coefficient_value():
    # alpha=2, theta=pi, number-decay exponent 0.1:
    # exp(-4 * 2 * (1 - e^{-0.1})) = 0.46703...
    c = analytic_cross_coefficient(2.0, math.pi, 1.0, 0.1)
    assert abs(c) == pytest.approx(math.exp(-8 * (1 - math.exp(-0.1))), rel=1e-12)
    assert abs(c) == pytest.approx(0.4670, abs=1e-4)


def test_cross_coefficient_short_time_expansion():
    # for small exponents, coefficient ~ exp(-|alpha|^2 (1 - e^{-i theta}) g t)
    for theta in (0.4, 1.5, math.pi):
        for a2 in (1.0, 4.0, 9.0):
            exact = analytic_cross_coefficient(math.sqrt(a2), theta, 1.0, 0.01)
            approx = np.exp(-a2 * (1 - np.exp(-1j * theta)) * 0.01)
            assert abs(exact - approx) <= 1e-3 * a2


def test_cross_term_evolution_oracle():
    # evolve |alpha><alpha e^{i theta}| under one-body loss and project onto
    # the damped dyad; the coefficient is the closed-form exponential
    cut = FockCutoff(40)
    gamma = 0.03  # channel weight; number decay rate is 2 gamma
    lv = Liouvillian(None, [make_channel(ChannelKind.ONE_BODY, gamma, cut)])
    alpha, theta, t = 2.0, 0.9, 1.3
    v1 = coherent_state(alpha, cut).vector
    v2 = coherent_state(alpha * np.exp(1j * theta), cut).vector
    ct = lv.propagate_matrix(np.outer(v1, v2.conj()), t, method="exact")
    damp = math.exp(-gamma * t)
    w1 = coherent_state(alpha * damp, cut).vector
    w2 = coherent_state(alpha * damp * np.exp(1j * theta), cut).vector
    measured = complex(w1.conj() @ ct @ w2)
    predicted = analytic_cross_coefficient(alpha, theta, 2 * gamma, t)
    assert abs(measured / predicted - 1) < 1e-10


def test_gamma_bar_values():
    assert analytic_gamma_bar(9.0, 0.0, 1.0) == 0.0
    assert analytic_gamma_bar(0.0, 0.01, 1.0) == 0.0
    assert analytic_gamma_bar(9.0, 0.005, 1.0) == pytest.approx(0.28274, abs=1e-5)
    with pytest.raises(ZeroChi):
        analytic_gamma_bar(1.0, 0.1, 0.0)


def test_gamma_bar_matches_numerical_rate_integral():
    # 2 pi Gamma |alpha|^2 / chi == integral of Gamma D^2(t) over one period
    from becprobe.protocol import distance_D
    gamma, chi, alpha = 0.005, 1.0, 3.0
    ts = np.linspace(0, math.pi / chi, 20001)
    integrand = gamma * np.array([distance_D(alpha, chi, t) for t in ts]) ** 2
    assert np.trapezoid(integrand, ts) == pytest.approx(
        analytic_gamma_bar(alpha ** 2, gamma, chi), rel=1e-8)


def test_thermal_visibility_values():
    assert analytic_thermal_visibility(0.0, 0.1, 1.0) == 1.0
    assert analytic_thermal_visibility(4.0, 0.0, 1.0) == 1.0
    assert analytic_thermal_visibility(4.0, 0.01, 1.0) == pytest.approx(
        1.0 / (1.0 + 0.08 * math.pi), rel=1e-12)
    assert analytic_thermal_visibility(4.0, 0.01, 1.0) == pytest.approx(
        0.7992, abs=5e-5)


def test_thermal_visibility_matches_quadrature():
    # Gaussian integral of exp(-2 pi Gamma |alpha|^2 / chi) over the thermal
    # coherent-state distribution, by brute-force radial quadrature
    nbar, gamma, chi = 2.0, 0.01, 1.0
    a2 = np.linspace(0, 60 * nbar, 400001)
    p = np.exp(-a2 / nbar) / nbar
    integrand = p * np.exp(-analytic_gamma_bar(1.0, gamma, chi) * a2)
    assert np.trapezoid(integrand, a2) == pytest.approx(
        analytic_thermal_visibility(nbar, gamma, chi), rel=1e-6)


def test_build_liouvillian_dim_mismatch():
    cut = FockCutoff(4)
    h = build_hamiltonian(ModelParams(chi=1.0), cut)
    with pytest.raises(DimMismatch):
        build_liouvillian(h, [make_channel(ChannelKind.ONE_BODY, 0.1,
                                           FockCutoff(6))])
