"""Exact finite-dimensional reductions of the coupled-wavefunction dynamics.

The pairwise correlations z_jk = <psi_j, psi_k> close on themselves: along
any solution of the wave system,

    dz_jk/dt = i (Omega_j - Omega_k) z_jk
               + (K/2N) sum_l (z_jl + z_lk) (1 - z_jk)

with z_jj = 1 frozen and Hermitian symmetry preserved. This module integrates
that system (and its two-oscillator, macroscopic, and identical-frequency
specializations) independently of any PDE machinery, so the two levels can be
checked against each other.

Derivatives are exposed in real/imaginary split form (r, s), matching the
emitted file schemas; the integrator works on the complex matrix and mirrors
the lower triangle from the upper one every step, so r_jk - r_kj and
s_jk + s_kj are exactly zero along trajectories.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import EnsembleState, ModelConfig, gram_matrix
from .errors import (
    ConfigurationError,
    ContractViolationError,
    DivergenceError,
)

__all__ = [
    "CorrelationState",
    "MacroCorrelation",
    "CorrelationSeries",
    "TwoOscillatorSeries",
    "full_rhs",
    "two_rhs",
    "macro_rhs",
    "fg_rhs",
    "zeta_norm_rhs",
    "random_correlation_matrix",
    "integrate",
    "step_count",
]

_HERMITIAN_TOL = 1e-9


def step_count(dt: float, t_end: float) -> int:
    """Number of fixed steps covering [0, t_end]; t_end/dt must be integral."""
    if not (np.isfinite(dt) and dt > 0):
        raise ConfigurationError(f"dt must be positive, got {dt!r}")
    if not (np.isfinite(t_end) and t_end >= 0):
        raise ConfigurationError(f"t_end must be >= 0, got {t_end!r}")
    steps = t_end / dt
    n = int(round(steps))
    if abs(steps - n) > 1e-6 * max(1.0, abs(steps)):
        raise ConfigurationError(f"t_end = {t_end} is not an integer multiple of dt = {dt}")
    return n


def _mirror(z: np.ndarray) -> np.ndarray:
    """Copy the upper triangle onto the lower as its conjugate, in place."""
    iu = np.triu_indices(z.shape[0], k=1)
    z[(iu[1], iu[0])] = np.conj(z[iu])
    return z


@dataclass
class CorrelationState:
    """N x N correlation matrix z_jk = r_jk + i s_jk at one instant.

    The constructor symmetrizes within a small tolerance and pins the
    diagonal to exactly 1; matrices further than that from admissibility are
    rejected. Gram matrices of non-unit vectors are not meaningful here.
    """

    time: float
    z: np.ndarray

    def __post_init__(self):
        z = np.array(self.z, dtype=np.complex128)
        if z.ndim != 2 or z.shape[0] != z.shape[1] or z.shape[0] < 2:
            raise ConfigurationError(f"z must be square with N >= 2, got shape {z.shape}")
        if not np.all(np.isfinite(z.view(np.float64))):
            raise ConfigurationError("z must be finite")
        if np.max(np.abs(z - z.conj().T)) > _HERMITIAN_TOL:
            raise ConfigurationError("z is not Hermitian within tolerance")
        if np.max(np.abs(np.diag(z) - 1.0)) > _HERMITIAN_TOL:
            raise ConfigurationError("diagonal of z must be 1 (unit-norm states)")
        if np.max(np.abs(z)) > 1.0 + _HERMITIAN_TOL:
            raise ConfigurationError("|z_jk| must be <= 1 (Cauchy-Schwarz)")
        z = 0.5 * (z + z.conj().T)
        eigs = np.linalg.eigvalsh(z)
        if eigs.min() < -1e-9 * max(1.0, eigs.max()):
            warnings.warn(
                "correlation matrix is not positive semidefinite; "
                "no unit-vector ensemble realizes it",
                stacklevel=2,
            )
        _mirror(z)
        np.fill_diagonal(z, 1.0)
        self.z = z

    @classmethod
    def from_ensemble(cls, state: EnsembleState) -> "CorrelationState":
        z = gram_matrix(state)
        # measured Gram of near-unit states; rescale the diagonal drift away
        d = np.sqrt(np.abs(np.diag(z)))
        z = z / np.outer(d, d)
        return cls(time=state.time, z=z)

    @property
    def n_oscillators(self) -> int:
        return self.z.shape[0]

    @property
    def r(self) -> np.ndarray:
        return self.z.real

    @property
    def s(self) -> np.ndarray:
        return self.z.imag


@dataclass
class MacroCorrelation:
    """Row-averaged correlations and their decay variables.

    r_tilde_j + i s_tilde_j = (1/N) sum_l z_lj = <zeta, psi_j>; the decay
    variables are f_j = 1 - r_tilde_j, g_j = -s_tilde_j, and pairwise
    f_pair = 1 - r, g_pair = -s.
    """

    r_tilde: np.ndarray
    s_tilde: np.ndarray
    f: np.ndarray
    g: np.ndarray
    f_pair: np.ndarray
    g_pair: np.ndarray

    @classmethod
    def from_correlation(cls, state: CorrelationState) -> "MacroCorrelation":
        w = state.z.mean(axis=0)
        return cls(
            r_tilde=w.real.copy(),
            s_tilde=w.imag.copy(),
            f=1.0 - w.real,
            g=-w.imag,
            f_pair=1.0 - state.z.real,
            g_pair=-state.z.imag,
        )

    @property
    def zeta_norm_sq(self) -> float:
        return float(self.r_tilde.mean())

    @property
    def lyapunov(self) -> float:
        return float(0.5 * np.mean(self.f**2 + self.g**2))


def _require_n(config: ModelConfig, n: int) -> None:
    if config.n_oscillators != n:
        raise ConfigurationError(
            f"config holds {config.n_oscillators} frequencies but z is {n} x {n}"
        )


def _dz(z: np.ndarray, omega: np.ndarray, coupling: float) -> np.ndarray:
    n = z.shape[0]
    row = z.sum(axis=1)
    col = z.sum(axis=0)
    detune = 1j * (omega[:, None] - omega[None, :]) * z
    return detune + (0.5 * coupling / n) * (row[:, None] + col[None, :]) * (1.0 - z)


def full_rhs(state: CorrelationState, config: ModelConfig) -> tuple[np.ndarray, np.ndarray]:
    """Time derivative of the full pairwise system, split as (dr, ds)."""
    _require_n(config, state.n_oscillators)
    dz = _dz(state.z, np.asarray(config.frequencies), config.coupling)
    return dz.real, dz.imag


def two_rhs(z: complex, omega: float, k_coupling: float) -> complex:
    """Scalar pair correlation: dz/dt = 2 i Omega z + (K/2)(1 - z^2).

    omega is the half-difference of the two detunings (frequencies are
    (Omega, -Omega) after centering). Fixed points for 2 Omega <= K sit at
    +-sqrt(1 - Lambda^2) + i Lambda with Lambda = 2 Omega / K.
    """
    return 2j * omega * z + 0.5 * k_coupling * (1.0 - z * z)


def macro_rhs(state: CorrelationState, config: ModelConfig) -> tuple[np.ndarray, np.ndarray]:
    """Time derivative of (r_tilde, s_tilde).

    The macroscopic system is not closed; pairwise entries are read from the
    state. Equals the row average of full_rhs identically.
    """
    _require_n(config, state.n_oscillators)
    z = state.z
    n = state.n_oscillators
    omega = np.asarray(config.frequencies)
    w = z.mean(axis=0)
    dw = (
        -1j * omega * w
        + 1j * (omega @ z) / n
        + 0.5
        * config.coupling
        * (w * (1.0 - w) + (np.conj(w) @ (1.0 - z)) / n)
    )
    return dw.real, dw.imag


def fg_rhs(
    macro: MacroCorrelation,
    k_coupling: float,
    frequencies=None,
) -> tuple[np.ndarray, np.ndarray]:
    """Time derivative of the decay variables (f_j, g_j), identical oscillators.

    Valid only when every detuning vanishes; pass the config frequencies to
    have that checked. Pairwise f_pair, g_pair are read from the input.
    """
    if frequencies is not None and np.max(np.abs(np.asarray(frequencies))) > 0.0:
        raise ContractViolationError("the f/g reduction requires zero frequencies")
    f, g = macro.f, macro.g
    cross_f = np.mean(f[:, None] * macro.f_pair + g[:, None] * macro.g_pair, axis=0)
    cross_g = np.mean(f[:, None] * macro.g_pair - g[:, None] * macro.f_pair, axis=0)
    df = -0.5 * k_coupling * (2.0 * f - (f**2 - g**2) - cross_f)
    dg = -0.5 * k_coupling * (2.0 * g - 2.0 * f * g - cross_g)
    return df, dg


def zeta_norm_rhs(state: CorrelationState, config: ModelConfig) -> float:
    """Time derivative of the squared order-parameter norm (1/N) sum r_tilde."""
    _require_n(config, state.n_oscillators)
    omega = np.asarray(config.frequencies)
    macro = MacroCorrelation.from_correlation(state)
    zeta_sq = macro.zeta_norm_sq
    return float(
        2.0 * np.mean(omega * macro.s_tilde)
        + config.coupling * (zeta_sq - np.mean(macro.r_tilde**2 - macro.s_tilde**2))
    )


def random_correlation_matrix(
    n: int,
    seed: int,
    ambient_dim: int | None = None,
    coherence: float = 0.0,
) -> np.ndarray:
    """Gram matrix of n random unit vectors: always a valid initial z.

    coherence > 0 biases all vectors toward a common direction, raising every
    r_tilde_j above zero (the generic basin of the synchronization results).
    """
    if n < 2:
        raise ConfigurationError("need n >= 2")
    m = ambient_dim if ambient_dim is not None else 4 * n
    if m < n:
        raise ConfigurationError("ambient_dim must be >= n for a full-rank Gram matrix")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((n, m, 2))
    v = v[..., 0] + 1j * v[..., 1]
    if coherence > 0.0:
        v[:, 0] += coherence * np.sqrt(2.0 * m)
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    z = v.conj() @ v.T
    _mirror(z)
    np.fill_diagonal(z, 1.0)
    return z


@dataclass
class CorrelationSeries:
    """Sampled trajectory of the pairwise system: times (S,), z (S, N, N)."""

    times: np.ndarray
    z: np.ndarray
    richardson_error: float | None = None

    @property
    def n_oscillators(self) -> int:
        return self.z.shape[1]

    @property
    def r(self) -> np.ndarray:
        return self.z.real

    @property
    def s(self) -> np.ndarray:
        return self.z.imag

    @property
    def macroscopic(self) -> np.ndarray:
        """w_j(t) = (1/N) sum_l z_lj, shape (S, N)."""
        return self.z.mean(axis=1)

    @property
    def r_tilde(self) -> np.ndarray:
        return self.macroscopic.real

    @property
    def s_tilde(self) -> np.ndarray:
        return self.macroscopic.imag

    @property
    def zeta_norm_sq(self) -> np.ndarray:
        return self.z.mean(axis=(1, 2)).real

    @property
    def lyapunov(self) -> np.ndarray:
        w = self.macroscopic
        return 0.5 * np.mean((1.0 - w.real) ** 2 + w.imag**2, axis=1)

    def pair_distance(self, j: int, k: int) -> np.ndarray:
        """||psi_j - psi_k||(t) implied by the correlations."""
        return np.sqrt(np.maximum(0.0, 2.0 * (1.0 - self.z[:, j, k].real)))

    def state_at(self, index: int) -> CorrelationState:
        return CorrelationState(time=float(self.times[index]), z=self.z[index].copy())


@dataclass
class TwoOscillatorSeries:
    """Sampled scalar pair correlation z(t) for the two-oscillator system."""

    times: np.ndarray
    z: np.ndarray
    richardson_error: float | None = None

    @property
    def r(self) -> np.ndarray:
        return self.z.real

    @property
    def s(self) -> np.ndarray:
        return self.z.imag

    @property
    def distance(self) -> np.ndarray:
        return np.sqrt(np.maximum(0.0, 2.0 * (1.0 - self.z.real)))

    def sync_distance_sq(self, phi: float) -> np.ndarray:
        """||e^{i phi} psi_1 - psi_2||^2 = 2 (1 - Re(e^{-i phi} z))."""
        return 2.0 * (1.0 - (np.exp(-1j * phi) * self.z).real)


def _rk4_matrix(z0, deriv, dt, n_steps, sample_stride, self_check_every=0):
    z = z0.copy()
    samples = [z.copy()]
    sample_steps = [0]
    for step in range(1, n_steps + 1):
        k1 = deriv(z)
        k2 = deriv(z + 0.5 * dt * k1)
        k3 = deriv(z + 0.5 * dt * k2)
        k4 = deriv(z + dt * k3)
        z = z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        _mirror(z)
        if step % sample_stride == 0 or step == n_steps:
            if not np.all(np.isfinite(z.view(np.float64))):
                raise DivergenceError(
                    "correlation integration produced non-finite values",
                    step_index=step,
                    time=step * dt,
                    partial={"times": np.array(sample_steps) * dt, "values": np.array(samples)},
                )
            if self_check_every and (step // sample_stride) % self_check_every == 0:
                drift = np.max(np.abs(z - z.conj().T))
                if drift > 1e-12:
                    raise ContractViolationError(
                        f"Hermitian drift {drift:.2e} at step {step}"
                    )
            if step % sample_stride == 0:
                samples.append(z.copy())
                sample_steps.append(step)
    if sample_steps[-1] != n_steps:
        samples.append(z.copy())
        sample_steps.append(n_steps)
    return np.array(sample_steps), np.array(samples)


def _rk4_scalar(z0, deriv, dt, n_steps, sample_stride):
    z = complex(z0)
    samples = [z]
    sample_steps = [0]
    for step in range(1, n_steps + 1):
        k1 = deriv(z)
        k2 = deriv(z + 0.5 * dt * k1)
        k3 = deriv(z + 0.5 * dt * k2)
        k4 = deriv(z + dt * k3)
        z = z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if step % sample_stride == 0 or step == n_steps:
            if not (np.isfinite(z.real) and np.isfinite(z.imag)):
                raise DivergenceError(
                    "correlation integration produced non-finite values",
                    step_index=step,
                    time=step * dt,
                    partial={"times": np.array(sample_steps) * dt, "values": np.array(samples)},
                )
            if step % sample_stride == 0:
                samples.append(z)
                sample_steps.append(step)
    if sample_steps[-1] != n_steps:
        samples.append(z)
        sample_steps.append(n_steps)
    return np.array(sample_steps), np.array(samples)


def _two_omega(config: ModelConfig) -> float:
    if config.n_oscillators != 2:
        raise ConfigurationError("the two-oscillator system needs exactly 2 frequencies")
    w1, w2 = config.frequencies
    return 0.5 * (w1 - w2)


def integrate(
    system: str,
    initial,
    config: ModelConfig,
    dt: float,
    t_end: float,
    sample_stride: int = 1,
    self_check: bool = False,
):
    """Fixed-step RK4 integration of one of the reduced systems.

    system is "full" (N x N pairwise), "two" (scalar pair correlation; the
    config must hold two frequencies), or "fg" (pairwise system under
    identical oscillators, stepped in the decay variables F = 1 - z).
    initial is a CorrelationState or raw matrix for "full"/"fg", a complex
    number for "two". Samples land every sample_stride steps plus the final
    time. self_check = True repeats the run at twice the step and attaches a
    Richardson estimate of the terminal error.
    """
    if sample_stride < 1:
        raise ConfigurationError("sample_stride must be >= 1")
    n_steps = step_count(dt, t_end)

    if system == "two":
        omega = _two_omega(config)
        k = config.coupling
        steps, samples = _rk4_scalar(
            initial, lambda z: two_rhs(z, omega, k), dt, n_steps, sample_stride
        )
        series = TwoOscillatorSeries(times=steps * dt, z=samples)
        if self_check:
            if n_steps % 2:
                warnings.warn("self_check needs an even step count; estimate skipped")
            elif n_steps >= 2:
                half = n_steps // 2
                _, coarse = _rk4_scalar(
                    initial, lambda z: two_rhs(z, omega, k), 2.0 * dt, half, half
                )
                series.richardson_error = abs(samples[-1] - coarse[-1]) / 15.0
        return series

    if system in ("full", "fg"):
        state = initial if isinstance(initial, CorrelationState) else CorrelationState(0.0, initial)
        omega = np.asarray(config.frequencies, dtype=float)
        _require_n(config, state.n_oscillators)
        k = config.coupling
        if system == "fg":
            if np.max(np.abs(omega)) > 0.0:
                raise ContractViolationError("the f/g reduction requires zero frequencies")

            def deriv(big_f):
                phi = big_f.mean(axis=0)
                return -0.5 * k * (2.0 - np.conj(phi)[:, None] - phi[None, :]) * big_f

            y0 = 1.0 - state.z
        else:

            def deriv(z):
                return _dz(z, omega, k)

            y0 = state.z

        check_every = 8 if self_check else 0
        steps, samples = _rk4_matrix(y0, deriv, dt, n_steps, sample_stride, check_every)
        if system == "fg":
            samples = 1.0 - samples
        series = CorrelationSeries(times=steps * dt, z=samples)
        if self_check:
            if n_steps % 2:
                warnings.warn("self_check needs an even step count; estimate skipped")
            elif n_steps >= 2:
                half = n_steps // 2
                _, coarse = _rk4_matrix(y0, deriv, 2.0 * dt, half, half)
                last = 1.0 - coarse[-1] if system == "fg" else coarse[-1]
                series.richardson_error = float(np.max(np.abs(samples[-1] - last)) / 15.0)
        return series

    raise ConfigurationError(f"unknown system {system!r}; expected full, two, or fg")
