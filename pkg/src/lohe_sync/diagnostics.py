"""Observables, synchronization classification, and rate fitting.

Everything the qualitative statements are written in lives here: pairwise
L2/H1 distances, the quadratic energy functionals and their decomposition,
Madelung density/current alignment, tail-window classification into
phase/frequency synchronization, and least-squares decay-rate fits.

All quadratic quantities are computed through one Hermitian bilinear form
B_jk = integral of (1/2) grad psi_j~ grad psi_k + V psi_j~ psi_k, so the
identities E = E_zeta + E_rel and the polarization rule hold to rounding
rather than to quadrature mismatch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    EnsembleState,
    ModelConfig,
    gram_matrix,
    order_parameter,
    wavenumbers,
)
from .correlations import CorrelationSeries, CorrelationState
from .errors import ContractViolationError, SeriesTooShortError

__all__ = [
    "EnergyReport",
    "DiagnosticsRecord",
    "SyncClassification",
    "FitResult",
    "LimitFit",
    "EnergyBoundCheck",
    "compute_record",
    "classify_sync",
    "classify_correlation_sync",
    "fit_rate",
    "fit_algebraic_limit",
    "energy_bound_check",
    "detect_period",
    "interpolate_series",
]


@dataclass(frozen=True)
class EnergyReport:
    """Quadratic energies of one ensemble snapshot.

    total      E = (1/N) sum_j E_j
    per_osc    E_j = int (1/2)|grad psi_j|^2 + V |psi_j|^2
    pair       E_jk, same functional applied to psi_j - psi_k
    relative   (1/(2N^2)) sum_jk E_jk
    zeta_energy  the functional applied to the order parameter
    diff_energy_two  functional of e^{i phi} psi_1 - psi_2 when the
                 two-oscillator phase offset phi is defined, else None
    """

    total: float
    per_osc: np.ndarray
    pair: np.ndarray
    relative: float
    zeta_energy: float
    diff_energy_two: float | None


@dataclass(frozen=True)
class DiagnosticsRecord:
    time: float
    pair_l2: np.ndarray
    pair_h1: np.ndarray
    zeta_norm: float
    correlations: CorrelationState
    energies: EnergyReport
    mass_drift: np.ndarray
    madelung_rho_l1: np.ndarray
    madelung_current_l1: np.ndarray


def _axis_shaped(k: np.ndarray, axis: int, dim: int) -> np.ndarray:
    shape = [1] * dim
    shape[axis] = k.size
    return k.reshape(shape)


def compute_record(state: EnsembleState, config: ModelConfig) -> DiagnosticsRecord:
    """All observables of one snapshot. O(N^2) reductions, N FFT gradients."""
    grid = state.grid
    n = state.n_oscillators
    dv = grid.dv
    psi = state.psi
    axes = tuple(range(1, psi.ndim))

    norms = state.norms()
    raw_gram = gram_matrix(state)

    # spectral gradients of all fields at once, one array per axis; the
    # Nyquist mode is dropped to match spectral_gradient (real fields must
    # not pick up imaginary gradient components)
    psi_hat = np.fft.fftn(psi, axes=axes)
    ks = [k.copy() for k in wavenumbers(grid)]
    for k in ks:
        k[grid.points // 2] = 0.0
    grads = [
        np.fft.ifftn(1j * _axis_shaped(ks[a], a, grid.dim) * psi_hat, axes=axes)
        for a in range(grid.dim)
    ]

    flat = psi.reshape(n, -1)
    grad_gram = np.zeros((n, n), dtype=np.complex128)
    for g in grads:
        gf = g.reshape(n, -1)
        grad_gram += dv * (np.conj(gf) @ gf.T)

    if config.potential is not None:
        vflat = config.potential.reshape(-1)
        pot_gram = dv * (np.conj(flat) * vflat) @ flat.T
    else:
        pot_gram = np.zeros((n, n), dtype=np.complex128)

    b = 0.5 * grad_gram + pot_gram

    diag_b = np.diag(b).real
    pair_energy = diag_b[:, None] + diag_b[None, :] - 2.0 * b.real
    total = float(diag_b.mean())
    relative = float(pair_energy.sum() / (2.0 * n * n))
    zeta_energy = float(b.mean().real)

    diff_energy_two = None
    if n == 2:
        try:
            lam = config.lambda_ratio
        except ContractViolationError:
            lam = None
        if lam is not None and abs(lam) <= 1.0:
            phi = np.arcsin(lam)
            diff_energy_two = float(
                diag_b[0] + diag_b[1] - 2.0 * (np.exp(-1j * phi) * b[0, 1]).real
            )

    diag_g = np.diag(raw_gram).real
    l2_sq = np.maximum(0.0, diag_g[:, None] + diag_g[None, :] - 2.0 * raw_gram.real)
    pair_l2 = np.sqrt(l2_sq)
    diag_gg = np.diag(grad_gram).real
    h1_sq = l2_sq + np.maximum(
        0.0, diag_gg[:, None] + diag_gg[None, :] - 2.0 * grad_gram.real
    )
    pair_h1 = np.sqrt(h1_sq)

    rho = np.abs(psi) ** 2
    rho_l1 = np.zeros((n, n))
    currents = [np.imag(np.conj(psi) * g) for g in grads]
    cur_l1 = np.zeros((n, n))
    for j in range(n):
        for k in range(j + 1, n):
            rho_l1[j, k] = rho_l1[k, j] = dv * np.sum(np.abs(rho[j] - rho[k]))
            diff_sq = np.zeros(grid.shape)
            for cur in currents:
                diff_sq = diff_sq + (cur[j] - cur[k]) ** 2
            cur_l1[j, k] = cur_l1[k, j] = dv * np.sum(np.sqrt(diff_sq))

    op = order_parameter(state)

    return DiagnosticsRecord(
        time=state.time,
        pair_l2=pair_l2,
        pair_h1=pair_h1,
        zeta_norm=op.norm,
        correlations=CorrelationState.from_ensemble(state),
        energies=EnergyReport(
            total=total,
            per_osc=diag_b,
            pair=pair_energy,
            relative=relative,
            zeta_energy=zeta_energy,
            diff_energy_two=diff_energy_two,
        ),
        mass_drift=norms - 1.0,
        madelung_rho_l1=rho_l1,
        madelung_current_l1=cur_l1,
    )


@dataclass(frozen=True)
class SyncClassification:
    kind: str
    evidence: dict


def _classify(times, pair_dist, zeta, tol, min_samples):
    n_samples = len(times)
    if n_samples < min_samples:
        raise SeriesTooShortError(
            f"classification needs at least {min_samples} samples, got {n_samples}"
        )
    tail = max(2, n_samples // 4)
    d_tail = pair_dist[-tail:]
    z_tail = zeta[-tail:]

    iu = np.triu_indices(pair_dist.shape[1], k=1)
    d_max = float(d_tail[:, iu[0], iu[1]].max()) if iu[0].size else 0.0
    d_mean = d_tail[:, iu[0], iu[1]].mean(axis=0) if iu[0].size else np.zeros(0)
    d_var = (
        d_tail[:, iu[0], iu[1]].max(axis=0) - d_tail[:, iu[0], iu[1]].min(axis=0)
        if iu[0].size
        else np.zeros(0)
    )
    z_mean = float(z_tail.mean())
    z_dev_one = float(np.max(np.abs(z_tail - 1.0)))

    evidence = {
        "tail_start_time": float(times[-tail]),
        "tail_samples": int(tail),
        "pair_distance_max": d_max,
        "pair_distance_mean": d_mean,
        "pair_distance_variation": d_var,
        "zeta_norm_mean": z_mean,
        "zeta_norm_deviation_from_one": z_dev_one,
    }

    if d_max <= tol and z_dev_one <= tol:
        return SyncClassification("phase_sync", evidence)
    if (
        d_var.size
        and float(d_var.max()) <= tol
        and float(d_mean.max()) > tol
        and tol < z_mean < 1.0 - tol
        and float(np.ptp(z_tail)) <= tol
    ):
        return SyncClassification("frequency_sync", evidence)
    return SyncClassification("none", evidence)


def classify_sync(
    series, tol: float, min_samples: int = 50
) -> SyncClassification:
    """Tail-window trichotomy over a stream of DiagnosticsRecord.

    phase_sync: every pair distance and |zeta_norm - 1| stay within tol over
    the final quarter. frequency_sync: pair distances settle (variation
    within tol) at nonzero values with zeta_norm strictly inside (tol,
    1 - tol). Anything else: none.
    """
    records = list(series)
    times = np.array([rec.time for rec in records])
    pair = np.stack([rec.pair_l2 for rec in records]) if records else np.zeros((0, 0, 0))
    zeta = np.array([rec.zeta_norm for rec in records])
    return _classify(times, pair, zeta, tol, min_samples)


def classify_correlation_sync(
    series: CorrelationSeries, tol: float, min_samples: int = 50
) -> SyncClassification:
    """Same trichotomy evaluated on a correlation-level trajectory."""
    n = series.n_oscillators
    dist = np.sqrt(np.maximum(0.0, 2.0 * (1.0 - series.r)))
    for j in range(n):
        dist[:, j, j] = 0.0
    zeta = np.sqrt(np.maximum(0.0, series.zeta_norm_sq))
    return _classify(series.times, dist, zeta, tol, min_samples)


@dataclass(frozen=True)
class FitResult:
    rate: float
    r_squared: float
    window: tuple[float, float]
    n_points: int


def _default_window(times) -> tuple[float, float]:
    # asymptotic statements: last half of the span, minus its leading 10%
    t0, t1 = float(times[0]), float(times[-1])
    start = t1 - 0.5 * (t1 - t0)
    return (start + 0.1 * (t1 - start), t1)


def fit_rate(times, values, window=None, kind: str = "exponential") -> FitResult:
    """Least-squares decay fit over a time window.

    kind "exponential": fit log y = c - rate * t; rate is positive for decay.
    kind "algebraic": fit log y = c + rate * log t; a t^(-1) tail gives
    rate = -1. Values must be strictly positive inside the window (and times
    positive for the algebraic kind).
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if window is None:
        window = _default_window(times)
    ta, tb = float(window[0]), float(window[1])
    mask = (times >= ta) & (times <= tb)
    if mask.sum() < 3:
        raise ContractViolationError(
            f"fit window [{ta}, {tb}] holds {int(mask.sum())} samples; need >= 3"
        )
    t = times[mask]
    y = values[mask]
    if np.any(y <= 0.0):
        raise ContractViolationError("fit requires strictly positive values in the window")
    if kind == "exponential":
        x = t
        sign = -1.0
    elif kind == "algebraic":
        if np.any(t <= 0.0):
            raise ContractViolationError("algebraic fit requires positive times")
        x = np.log(t)
        sign = 1.0
    else:
        raise ContractViolationError(f"unknown fit kind {kind!r}")
    logy = np.log(y)
    design = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(design, logy, rcond=None)
    pred = design @ coef
    ss_res = float(np.sum((logy - pred) ** 2))
    ss_tot = float(np.sum((logy - logy.mean()) ** 2))
    r2 = 1.0 if ss_tot <= 1e-300 else 1.0 - ss_res / ss_tot
    return FitResult(
        rate=float(sign * coef[1]), r_squared=r2, window=(ta, tb), n_points=int(mask.sum())
    )


@dataclass(frozen=True)
class LimitFit:
    limit: float
    coefficient: float
    r_squared: float
    window: tuple[float, float]


def fit_algebraic_limit(times, values, window=None) -> LimitFit:
    """Fit y(t) = limit + coefficient / t on the window; the t -> infinity
    extrapolation for quantities with a verified 1/t approach."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if window is None:
        window = _default_window(times)
    ta, tb = float(window[0]), float(window[1])
    mask = (times >= ta) & (times <= tb) & (times > 0.0)
    if mask.sum() < 3:
        raise ContractViolationError("limit fit needs >= 3 positive-time samples in the window")
    t = times[mask]
    y = values[mask]
    design = np.column_stack([np.ones_like(t), 1.0 / t])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    pred = design @ coef
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot <= 1e-300 else 1.0 - ss_res / ss_tot
    return LimitFit(
        limit=float(coef[0]), coefficient=float(coef[1]), r_squared=r2, window=(ta, tb)
    )


@dataclass(frozen=True)
class EnergyBoundCheck:
    c_measured: float
    bounded: bool
    initial_energy: float
    relative_rate: float | None
    relative_r_squared: float | None


def energy_bound_check(times, reports, rtol: float = 1e-9) -> EnergyBoundCheck:
    """Growth constant max E(t)/E(0) plus a decay fit of the relative energy.

    E(0) must be positive relative to the series scale (pick potentials
    V >= 0 for meaningful checks). The relative-energy fit is skipped (None)
    when the relative energy is not strictly positive, e.g. for identical
    ensembles where it vanishes identically.
    """
    times = np.asarray(times, dtype=float)
    total = np.array([rep.total for rep in reports])
    relative = np.array([rep.relative for rep in reports])
    if len(total) != len(times) or len(total) < 2:
        raise ContractViolationError("need matching times and at least 2 energy reports")
    scale = float(np.max(np.abs(total)))
    e0 = float(total[0])
    if e0 <= rtol * scale:
        raise ContractViolationError(
            f"initial energy {e0:g} is not positive at relative tolerance {rtol:g}"
        )
    c = float(total.max() / e0)
    rate = r2 = None
    if np.all(relative > 0.0):
        fit = fit_rate(times, relative)
        rate, r2 = fit.rate, fit.r_squared
    return EnergyBoundCheck(
        c_measured=c,
        bounded=bool(np.isfinite(c)),
        initial_energy=e0,
        relative_rate=rate,
        relative_r_squared=r2,
    )


def interpolate_series(times, values, t: float):
    """Cubic Lagrange interpolation through the 4 samples nearest t."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values)
    if len(times) < 4:
        raise SeriesTooShortError("interpolation needs at least 4 samples")
    if not (times[0] <= t <= times[-1]):
        raise ContractViolationError(f"t = {t} outside the sampled span")
    idx = int(np.searchsorted(times, t))
    lo = min(max(idx - 2, 0), len(times) - 4)
    ts = times[lo : lo + 4]
    ys = values[lo : lo + 4]
    out = 0.0
    for i in range(4):
        weight = 1.0
        for m in range(4):
            if m != i:
                weight *= (t - ts[m]) / (ts[i] - ts[m])
        out = out + weight * ys[i]
    return out


def detect_period(times, values, threshold: float | None = None) -> float:
    """Period of a nonnegative signal that dips to ~0 once per cycle.

    Finds all interior local minima below threshold (default: a tenth of the
    signal maximum), refines each by parabolic interpolation, and returns the
    median spacing. Needs at least two qualifying minima.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(times) < 5:
        raise SeriesTooShortError("period detection needs at least 5 samples")
    if threshold is None:
        threshold = 0.1 * float(values.max())
    minima = []
    for i in range(1, len(values) - 1):
        if values[i] <= values[i - 1] and values[i] < values[i + 1] and values[i] < threshold:
            y0, y1, y2 = values[i - 1 : i + 2]
            denom = y0 - 2.0 * y1 + y2
            shift = 0.0 if denom == 0.0 else 0.5 * (y0 - y2) / denom
            shift = float(np.clip(shift, -1.0, 1.0))
            dt_local = 0.5 * (times[i + 1] - times[i - 1])
            minima.append(times[i] + shift * dt_local)
    if len(minima) < 2:
        raise ContractViolationError("fewer than two sub-threshold minima; no period visible")
    return float(np.median(np.diff(minima)))
