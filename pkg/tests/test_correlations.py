"""Correlation-level dynamics against closed forms and structure invariants."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lohe_sync import (
    ConfigurationError,
    CorrelationState,
    MacroCorrelation,
    ModelConfig,
    integrate,
    random_correlation_matrix,
    two_rhs,
)
from lohe_sync.correlations import fg_rhs, macro_rhs, full_rhs, step_count, zeta_norm_rhs

from conftest import assert_close


def config_for(n, coupling=1.0, omega=0.0):
    if n == 2:
        return ModelConfig(coupling=coupling, frequencies=(omega, -omega))
    assert omega == 0.0
    return ModelConfig(coupling=coupling, frequencies=(0.0,) * n)


# -- scalar pair system -------------------------------------------------------


def test_tanh_solution():
    # Omega = 0, K = 2, z(0) = 0: dz/dt = 1 - z^2, so z(t) = tanh(t)
    config = config_for(2, coupling=2.0)
    series = integrate("two", 0.0, config, 1e-3, 5.0, sample_stride=100)
    assert_close(series.z, np.tanh(series.times), 1e-10, "tanh")


def test_two_rhs_fixed_points():
    k, omega = 1.0, 0.375
    lam = 2 * omega / k
    root = np.sqrt(1 - lam**2)
    assert abs(two_rhs(complex(root, lam), omega, k)) <= 1e-14
    assert abs(two_rhs(complex(-root, lam), omega, k)) <= 1e-14
    assert abs(two_rhs(1.0, 0.0, k)) == 0.0


def test_unit_circle_is_invariant():
    # on |z| = 1 the pair system is the classical phase model
    # theta' = 2 Omega - K sin(theta)
    k, omega, theta0 = 1.3, 0.25, 2.0
    dt, t_end = 1e-3, 5.0
    config = config_for(2, coupling=k, omega=omega)
    series = integrate("two", np.exp(1j * theta0), config, dt, t_end, sample_stride=100)
    assert float(np.max(np.abs(np.abs(series.z) - 1.0))) <= 1e-9

    theta = theta0
    thetas = [theta]
    deriv = lambda th: 2 * omega - k * np.sin(th)
    for _ in range(step_count(dt, t_end)):
        k1 = deriv(theta)
        k2 = deriv(theta + 0.5 * dt * k1)
        k3 = deriv(theta + 0.5 * dt * k2)
        k4 = deriv(theta + dt * k3)
        theta += (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        thetas.append(theta)
    assert_close(series.z, np.exp(1j * np.array(thetas))[::100], 1e-9, "phase model")


def test_richardson_estimate():
    config = config_for(2, coupling=2.0)
    series = integrate("two", 0.2 + 0.1j, config, 1e-2, 4.0, self_check=True)
    assert series.richardson_error is not None
    # z is smooth here, so the estimate must be tiny but nonzero
    assert 0.0 < series.richardson_error < 1e-8


def test_richardson_skipped_on_odd_steps():
    config = config_for(2, coupling=2.0)
    with pytest.warns(UserWarning):
        series = integrate("two", 0.2, config, 1e-3, 0.005, self_check=True)
    assert series.richardson_error is None


# -- full pairwise system -----------------------------------------------------


def test_full_structure_preserved():
    z0 = random_correlation_matrix(4, seed=9, coherence=0.3)
    config = config_for(4)
    series = integrate("full", z0, config, 1e-3, 3.0, sample_stride=50, self_check=True)
    for z in series.z[:: len(series.z) // 5]:
        assert np.array_equal(z, z.conj().T)
        assert_close(np.diag(z), np.ones(4), 0.0)
    assert float(np.max(np.abs(series.z))) <= 1.0 + 1e-9
    assert series.richardson_error < 1e-10


def test_fg_matches_full_for_identical_oscillators():
    # F = 1 - z is an affine change of variables, so RK4 commutes with it
    z0 = random_correlation_matrix(3, seed=21, coherence=0.4)
    config = config_for(3, coupling=1.5)
    a = integrate("full", z0, config, 1e-3, 2.0, sample_stride=200)
    b = integrate("fg", z0, config, 1e-3, 2.0, sample_stride=200)
    assert_close(a.z, b.z, 1e-12, "fg vs full")


def test_fg_rejects_detuning():
    z0 = random_correlation_matrix(2, seed=3)
    config = ModelConfig(coupling=1.0, frequencies=(0.1, -0.1))
    with pytest.raises(Exception):
        integrate("fg", z0, config, 1e-3, 0.1)


def test_lyapunov_descends_for_identical_oscillators():
    z0 = random_correlation_matrix(5, seed=17, coherence=0.5)
    config = config_for(5, coupling=1.0)
    series = integrate("full", z0, config, 1e-3, 10.0, sample_stride=100)
    lyap = series.lyapunov
    assert float(np.max(np.diff(lyap))) <= 1e-12
    assert lyap[-1] < lyap[0]


def test_zeta_norm_rhs_matches_difference_quotient():
    z0 = random_correlation_matrix(4, seed=2, coherence=0.3)
    config = config_for(4, coupling=0.9)
    dt = 1e-4
    series = integrate("full", z0, config, dt, 10 * dt)
    zeta_sq = series.zeta_norm_sq
    mid = series.state_at(5)
    fd = (zeta_sq[6] - zeta_sq[4]) / (2 * dt)
    assert abs(zeta_norm_rhs(mid, config) - fd) <= 1e-6


def test_macro_rhs_is_row_average_of_full():
    z0 = random_correlation_matrix(4, seed=31, coherence=0.2)
    config = ModelConfig(coupling=1.1, frequencies=(0.3, -0.1, 0.2, -0.4))
    state = CorrelationState(0.0, z0)
    dr, ds = full_rhs(state, config)
    dz = dr + 1j * ds
    dw_r, dw_s = macro_rhs(state, config)
    assert_close(dw_r + 1j * dw_s, dz.mean(axis=0), 1e-13, "macro vs full")


def test_fg_rhs_matches_full_rhs_algebra():
    z0 = random_correlation_matrix(3, seed=8, coherence=0.4)
    state = CorrelationState(0.0, z0)
    config = config_for(3, coupling=1.5)
    macro = MacroCorrelation.from_correlation(state)
    df, dg = fg_rhs(macro, config.coupling, config.frequencies)
    dw_r, dw_s = macro_rhs(state, config)
    # f = 1 - r_tilde, g = -s_tilde
    assert_close(df, -dw_r, 1e-13)
    assert_close(dg, -dw_s, 1e-13)


# -- construction and validation ----------------------------------------------


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 6), st.integers(0, 10_000), st.floats(0.0, 1.0))
def test_random_correlation_matrix_is_admissible(n, seed, coherence):
    z = random_correlation_matrix(n, seed, coherence=coherence)
    assert np.array_equal(z, z.conj().T)
    assert np.array_equal(np.diag(z), np.ones(n))
    assert float(np.max(np.abs(z))) <= 1.0 + 1e-12
    assert float(np.linalg.eigvalsh(z).min()) >= -1e-12


def test_random_correlation_matrix_deterministic():
    a = random_correlation_matrix(3, seed=5, coherence=0.2)
    b = random_correlation_matrix(3, seed=5, coherence=0.2)
    c = random_correlation_matrix(3, seed=6, coherence=0.2)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_coherence_bias():
    flat = random_correlation_matrix(6, seed=1, coherence=0.0)
    biased = random_correlation_matrix(6, seed=1, coherence=2.0)
    assert biased.real.mean() > flat.real.mean()


def test_correlation_state_validation():
    with pytest.raises(ConfigurationError):
        CorrelationState(0.0, np.array([[1.0, 0.5], [0.9, 1.0]]))  # not Hermitian
    with pytest.raises(ConfigurationError):
        CorrelationState(0.0, np.array([[2.0, 0.0], [0.0, 1.0]]))  # bad diagonal
    with pytest.raises(ConfigurationError):
        CorrelationState(0.0, np.eye(1))  # too small
    state = CorrelationState(0.0, np.array([[1.0, 0.5j], [-0.5j, 1.0]]))
    assert state.z[1, 0] == np.conj(state.z[0, 1])


def test_step_count_validation():
    assert step_count(1e-3, 2.0) == 2000
    assert step_count(0.1, 0.0) == 0
    with pytest.raises(ConfigurationError):
        step_count(1e-3, 0.0015)
    with pytest.raises(ConfigurationError):
        step_count(-1.0, 1.0)


def test_integrate_rejects_unknown_system():
    config = config_for(2)
    with pytest.raises(ConfigurationError):
        integrate("macro", 0.0, config, 1e-3, 1.0)
