"""Time integration against closed forms the solver does not know about."""

import numpy as np
import pytest

from lohe_sync import (
    DivergenceError,
    EnsembleState,
    GridSpec,
    ModelConfig,
    SolverParams,
    WaveField,
    center_frequencies,
    evolve,
    propagate_linear,
    stability_report,
)
from lohe_sync.initial_data import gaussian, gaussian_pair, perturbed_gaussians
from lohe_sync.potentials import cosine_potential

from conftest import assert_close


def free_gaussian(grid, t, center, sigma):
    """Dispersive spreading of a Gaussian on the line.

    psi(x, 0) = (pi sigma^2)^{-1/4} exp(-(x - c)^2 / (2 sigma^2)) evolves under
    i d_t psi = -psi''/2 into the same form with sigma^2 -> sigma^2 + i t.
    Valid on the torus while the tails stay far below roundoff.
    """
    x = grid.coordinates()[0]
    s2 = sigma**2 + 1j * t
    return (np.pi * sigma**2) ** -0.25 * np.sqrt(sigma**2 / s2) * np.exp(
        -((x - center) ** 2) / (2 * s2)
    )


# -- the linear propagator ---------------------------------------------------


def test_propagate_linear_plane_wave_phase(grid64):
    x = grid64.coordinates()[0]
    k = 2 * np.pi * 4 / grid64.length
    f = np.exp(1j * k * x) / np.sqrt(grid64.length)
    out = propagate_linear(grid64, None, f, 2.5)
    assert_close(out, np.exp(-0.5j * k**2 * 2.5) * f, 1e-13, "plane wave phase")


def test_propagate_linear_free_gaussian(grid64):
    # t short enough that the periodic image tails stay below roundoff
    f = free_gaussian(grid64, 0.0, 10.0, 1.0)
    out = propagate_linear(grid64, None, f, 0.5)
    assert_close(out, free_gaussian(grid64, 0.5, 10.0, 1.0), 1e-12, "free gaussian")


def test_propagate_linear_unitary_and_invertible(grid64):
    rng = np.random.default_rng(5)
    f = rng.normal(size=grid64.shape) + 1j * rng.normal(size=grid64.shape)
    v = cosine_potential(grid64, amplitude=0.8)
    out = propagate_linear(grid64, v, f, 0.7)
    back = propagate_linear(grid64, v, out, -0.7)
    n0 = np.sqrt(grid64.dv * np.sum(np.abs(f) ** 2))
    n1 = np.sqrt(grid64.dv * np.sum(np.abs(out) ** 2))
    assert abs(n1 - n0) <= 1e-12 * n0
    assert_close(back, f, 1e-10, "round trip")


def test_propagate_linear_batched_matches_loop(grid64):
    rng = np.random.default_rng(6)
    batch = rng.normal(size=(3, *grid64.shape)) + 1j * rng.normal(size=(3, *grid64.shape))
    v = cosine_potential(grid64, amplitude=0.5)
    out = propagate_linear(grid64, v, batch, 0.4)
    for j in range(3):
        assert_close(out[j], propagate_linear(grid64, v, batch[j], 0.4), 1e-13)


# -- full evolution against closed forms --------------------------------------


def test_decoupled_free_gaussians_match_closed_form(grid64):
    # K = 0, V = 0, Omega = 0: each field disperses independently
    fields = [
        WaveField(grid64, free_gaussian(grid64, 0.0, 9.0, 1.0)),
        WaveField(grid64, free_gaussian(grid64, 0.0, 11.0, 1.2)),
    ]
    initial = EnsembleState.from_fields(fields)
    config = ModelConfig(coupling=0.0, frequencies=(0.0, 0.0))
    params = SolverParams(dt=1e-3, t_end=0.5, snapshot_stride=500)
    final = evolve(initial, config, params, collect_diagnostics=False).final
    assert_close(final.psi[0], free_gaussian(grid64, 0.5, 9.0, 1.0), 1e-10)
    assert_close(final.psi[1], free_gaussian(grid64, 0.5, 11.0, 1.2), 1e-10)


def test_frequency_term_is_a_pure_phase(grid64):
    # K = 0: Omega_j only multiplies each field by exp(-i Omega_j t)
    initial = gaussian_pair(grid64)
    config = ModelConfig(coupling=0.0, frequencies=(0.7, -0.3))
    reference = ModelConfig(coupling=0.0, frequencies=(0.0, 0.0))
    params = SolverParams(dt=1e-3, t_end=0.5, snapshot_stride=500)
    a = evolve(initial, config, params, collect_diagnostics=False).final
    b = evolve(initial, reference, params, collect_diagnostics=False).final
    phases = np.exp(-1j * np.array([0.7, -0.3]) * 0.5).reshape(-1, 1)
    assert_close(a.psi, phases * b.psi, 1e-12, "frequency phase")


def test_schemes_agree(grid64, pair_config):
    initial = gaussian_pair(grid64)
    strang = evolve(
        initial,
        pair_config,
        SolverParams(dt=1e-3, t_end=1.0, scheme="strang_rk4", snapshot_stride=1000),
        collect_diagnostics=False,
    ).final
    rk4 = evolve(
        initial,
        pair_config,
        SolverParams(dt=1e-3, t_end=1.0, scheme="full_rk4", snapshot_stride=1000),
        collect_diagnostics=False,
    ).final
    assert_close(strang.psi, rk4.psi, 1e-6, "strang vs rk4")


def test_mass_conserved_with_potential(grid64):
    config = ModelConfig(
        coupling=1.0,
        frequencies=(0.375, -0.375),
        potential=cosine_potential(grid64, amplitude=1.0, offset=1.0),
    )
    initial = gaussian_pair(grid64)
    trajectory = evolve(initial, config, SolverParams(dt=1e-3, t_end=2.0, snapshot_stride=200))
    for record in trajectory.diagnostics_stream:
        assert float(np.max(np.abs(record.mass_drift))) <= 1e-12


def test_gauge_covariance(grid64):
    # shifting every Omega_j by alpha only rotates the global phase:
    # the centered run equals exp(+i alpha t) times the uncentered one
    initial = gaussian_pair(grid64)
    shifted = ModelConfig(coupling=1.0, frequencies=(0.375 + 0.4, -0.375 + 0.4))
    centered = center_frequencies(shifted)
    assert centered.centering_shift == pytest.approx(0.4)
    params = SolverParams(dt=1e-3, t_end=1.0, snapshot_stride=1000)
    psi = evolve(initial, shifted, params, collect_diagnostics=False).final.psi
    chi = evolve(initial, centered, params, collect_diagnostics=False).final.psi
    assert_close(chi, np.exp(1j * 0.4 * 1.0) * psi, 1e-10, "gauge")


def test_sampling_and_final_state(grid64, pair_config):
    initial = gaussian_pair(grid64)
    params = SolverParams(dt=1e-3, t_end=0.01, snapshot_stride=3)
    trajectory = evolve(initial, pair_config, params)
    # strides at 0, 3, 6, 9 plus the endpoint 10
    assert_close(trajectory.times, [0.0, 0.003, 0.006, 0.009, 0.01], 1e-12)
    assert trajectory.final.time == pytest.approx(0.01)
    assert len(trajectory.diagnostics_stream) == trajectory.n_samples


def test_renormalize_each_step(grid64, pair_config):
    initial = gaussian_pair(grid64)
    params = SolverParams(dt=1e-2, t_end=0.5, renormalize_each_step=True, snapshot_stride=10)
    trajectory = evolve(initial, pair_config, params)
    final_norms = trajectory.final.norms()
    assert_close(final_norms, np.ones(2), 1e-14, "renormalized")


def test_advisory_warning(grid64, pair_config):
    initial = gaussian_pair(grid64)
    bound = stability_report(grid64, pair_config).potential_dt
    with pytest.warns(UserWarning):
        evolve(
            initial,
            pair_config,
            SolverParams(dt=bound, t_end=bound * 4, snapshot_stride=4),
            collect_diagnostics=False,
        )


def test_divergence_carries_partial_trajectory(grid256):
    config = ModelConfig(coupling=1.0, frequencies=(0.0, 0.0))
    initial = gaussian_pair(grid256)
    params = SolverParams(dt=0.05, t_end=5.0, scheme="full_rk4", snapshot_stride=1)
    with pytest.warns(UserWarning):
        with pytest.raises(DivergenceError) as err:
            evolve(initial, config, params, collect_diagnostics=False)
    assert err.value.partial is not None
    assert err.value.partial.n_samples >= 1
    assert err.value.step_index is not None


def test_stability_report_scales(grid256):
    config = ModelConfig(
        coupling=2.0,
        frequencies=(1.0, -1.0),
        potential=cosine_potential(grid256, amplitude=3.0),
    )
    report = stability_report(grid256, config)
    assert report.potential_dt == pytest.approx(0.1 / 6.0)
    assert report.max_wavenumber == pytest.approx(np.pi * 256 / 20.0)
    assert report.recommended_dt <= report.potential_dt


def test_identical_ensemble_stays_identical(grid64):
    # exact synchrony is a fixed point of the coupling
    state = perturbed_gaussians(grid64, 3, seed=11, epsilon=0.0)
    config = ModelConfig(coupling=1.0, frequencies=(0.0, 0.0, 0.0))
    final = evolve(
        state, config, SolverParams(dt=1e-3, t_end=0.5, snapshot_stride=500),
        collect_diagnostics=False,
    ).final
    assert_close(final.psi[0], final.psi[1], 1e-13)
    assert_close(final.psi[0], final.psi[2], 1e-13)
