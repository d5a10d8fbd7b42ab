"""Grid, field, and right-hand-side invariants, mostly property-based."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lohe_sync import (
    ConfigurationError,
    EnsembleState,
    GridSpec,
    GridMismatchError,
    ModelConfig,
    WaveField,
    center_frequencies,
    gram_matrix,
    inner_product,
    lohe_rhs,
    order_parameter,
)
from lohe_sync.core import k_squared, spectral_gradient, spectral_laplacian, wavenumbers

from conftest import assert_close

GRID = GridSpec(dim=1, points=32, length=10.0)


def random_ensemble(n, seed, grid=GRID):
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=(n, *grid.shape)) + 1j * rng.normal(size=(n, *grid.shape))
    return EnsembleState(grid, psi, 0.0).normalized()


def random_config(n, seed, coupling=1.0):
    rng = np.random.default_rng(seed + 10_000)
    return ModelConfig(coupling=coupling, frequencies=tuple(rng.normal(size=n)))


ensembles = st.builds(random_ensemble, st.integers(2, 5), st.integers(0, 10_000))


# -- grids and spectral operators ------------------------------------------


def test_grid_validation():
    with pytest.raises(ConfigurationError):
        GridSpec(dim=4, points=32, length=1.0)
    with pytest.raises(ConfigurationError):
        GridSpec(dim=1, points=48, length=1.0)
    with pytest.raises(ConfigurationError):
        GridSpec(dim=1, points=8, length=1.0)
    with pytest.raises(ConfigurationError):
        GridSpec(dim=1, points=32, length=0.0)


def test_grid_geometry():
    g = GridSpec(dim=2, points=16, length=4.0)
    assert g.shape == (16, 16)
    assert g.dx == 0.25
    assert g.dv == 0.0625
    assert g.size == 256
    x = g.axis_coordinates()
    assert x[0] == 0.0 and x[-1] == pytest.approx(4.0 - 0.25)


def test_wavenumbers_match_fft_convention():
    k = wavenumbers(GRID)[0]
    assert_close(k, 2 * np.pi * np.fft.fftfreq(GRID.points, GRID.dx), 1e-14)
    assert_close(k_squared(GRID), k**2, 1e-14)


def test_spectral_derivatives_on_plane_wave():
    # exact for any resolved Fourier mode
    x = GRID.coordinates()[0]
    k = 2 * np.pi * 3 / GRID.length
    f = np.exp(1j * k * x)
    (grad,) = spectral_gradient(GRID, f)
    assert_close(grad, 1j * k * f, 1e-12)
    assert_close(spectral_laplacian(GRID, f), -(k**2) * f, 1e-11)


def test_inner_product_conventions():
    x = GRID.coordinates()[0]
    a = WaveField(GRID, np.exp(-((x - 5) ** 2))).normalized()
    b = WaveField(GRID, np.exp(-((x - 6) ** 2))).normalized()
    zab = inner_product(a, b)
    zba = inner_product(b, a)
    assert zab == pytest.approx(np.conj(zba))
    # conjugate linear in the first slot
    assert inner_product(WaveField(GRID, 1j * a.values), b) == pytest.approx(-1j * zab)
    assert inner_product(a, WaveField(GRID, 1j * b.values)) == pytest.approx(1j * zab)
    other = WaveField(GridSpec(dim=1, points=64, length=10.0), np.zeros(64))
    with pytest.raises(GridMismatchError):
        inner_product(a, other)


# -- ensemble-level identities ----------------------------------------------


@settings(max_examples=40, deadline=None)
@given(ensembles)
def test_gram_matrix_hermitian_unit_diagonal(state):
    z = gram_matrix(state)
    assert np.array_equal(z, z.conj().T)
    assert_close(np.diag(z), np.ones(state.n_oscillators), 1e-12)
    assert float(np.max(np.abs(z))) <= 1.0 + 1e-12


@settings(max_examples=40, deadline=None)
@given(ensembles)
def test_order_parameter_identity(state):
    # 1 - ||zeta||^2 == (1/2N^2) sum_{jk} ||psi_j - psi_k||^2 for unit norms
    op = order_parameter(state)
    z = gram_matrix(state)
    n = state.n_oscillators
    dist_sq = 2.0 * (1.0 - z.real)
    assert abs((1.0 - op.norm**2) - dist_sq.sum() / (2 * n * n)) <= 1e-12
    assert abs(op.overlaps.real.mean() - op.norm**2) <= 1e-12
    assert abs(op.overlaps.imag.mean()) <= 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 5), st.integers(0, 10_000))
def test_rhs_conserves_mass(n, seed):
    # d/dt ||psi_j||^2 = 2 Re <psi_j, rhs_j> must vanish on unit-norm data
    state = random_ensemble(n, seed)
    config = random_config(n, seed)
    rhs = lohe_rhs(state, config)
    flux = GRID.dv * np.sum(np.conj(state.psi) * rhs, axis=tuple(range(1, state.psi.ndim)))
    assert float(np.max(np.abs(flux.real))) <= 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 5), st.integers(0, 10_000))
def test_rhs_forms_agree(n, seed):
    state = random_ensemble(n, seed)
    config = random_config(n, seed)
    a = lohe_rhs(state, config, form="order_parameter")
    b = lohe_rhs(state, config, form="pairwise")
    assert_close(a, b, 1e-13, "rhs forms")


@settings(max_examples=25, deadline=None)
@given(ensembles, st.floats(-np.pi, np.pi))
def test_gram_invariant_under_common_phase(state, theta):
    rotated = EnsembleState(state.grid, np.exp(1j * theta) * state.psi, state.time)
    assert_close(gram_matrix(rotated), gram_matrix(state), 1e-13)


def test_rhs_rejects_mismatched_config(pair_state):
    config = ModelConfig(coupling=1.0, frequencies=(0.1, 0.2, 0.3))
    with pytest.raises(ConfigurationError):
        lohe_rhs(pair_state, config)


# -- frequency centering -----------------------------------------------------

# dyadic values with a power-of-two count keep every step of the mean
# subtraction exact, so pairwise differences must survive bitwise
dyadic = st.integers(-64, 64).map(lambda k: k / 16.0)
dyadic_lists = st.sampled_from([2, 4]).flatmap(
    lambda n: st.lists(dyadic, min_size=n, max_size=n)
)


@settings(max_examples=50, deadline=None)
@given(dyadic_lists)
def test_center_frequencies_exact_on_dyadic_lattice(freqs):
    config = ModelConfig(coupling=1.0, frequencies=tuple(freqs))
    centered = center_frequencies(config)
    w0 = np.asarray(config.frequencies)
    w1 = np.asarray(centered.frequencies)
    assert np.mean(w1) == 0.0
    assert np.array_equal(w1[:, None] - w1[None, :], w0[:, None] - w0[None, :])
    assert centered.centering_shift == pytest.approx(np.mean(w0))
    again = center_frequencies(centered)
    assert again.frequencies == centered.frequencies
    assert again.centering_shift == centered.centering_shift


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=2, max_size=7))
def test_center_frequencies_general(freqs):
    config = ModelConfig(coupling=1.0, frequencies=tuple(freqs))
    centered = center_frequencies(config)
    scale = max(1.0, float(np.max(np.abs(config.frequencies))))
    w1 = np.asarray(centered.frequencies)
    w0 = np.asarray(config.frequencies)
    assert abs(np.mean(w1)) <= 1e-15 * scale
    diff = (w1[:, None] - w1[None, :]) - (w0[:, None] - w0[None, :])
    assert float(np.max(np.abs(diff))) <= 1e-15 * scale


def test_lambda_ratio():
    config = ModelConfig(coupling=1.0, frequencies=(0.375, -0.375))
    assert config.lambda_ratio == pytest.approx(0.75)
    from lohe_sync import ContractViolationError

    with pytest.raises(ContractViolationError):
        ModelConfig(coupling=1.0, frequencies=(0.3, -0.2)).lambda_ratio
