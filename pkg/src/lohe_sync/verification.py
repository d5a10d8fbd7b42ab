"""Named cross-level verification checks behind the `verify` subcommand.

Each check compares a measured quantity from an actual run against an
independent reference: a conserved quantity, a closed form, a fitted rate
against the predicted contraction, or a classification against the regime
the parameters dictate. Checks are looked up by name from scenario
[verify] sections, so the set of names below is a stable interface:

  mass                   max |  ||psi_j|| - 1  | over the PDE run
  order_identity         residual of 1 - ||zeta||^2 = mean pair distance^2 / 2
  energy_decomposition   residual of E = E_zeta + E_rel per sample
  pde_ode_closure        max |z_pde - z_ode| between measured and integrated
  two_exact              max |z - z_exact| on PDE and/or ODE trajectories
  sync_rate              fitted rate of the squared sync distance vs
                         sqrt(K^2 - 4 Omega^2), relative tolerance
  distance_limit         tail pair distance vs 2 sin(phi/2) (1/t
                         extrapolation at the critical point)
  periodicity            detected period vs 2 pi / sqrt(4 Omega^2 - K^2)
  stationary             max |z(t) - z(0)| on the ODE trajectory
  lyapunov_monotone      largest uphill step of the Lyapunov series
  phase_sync / frequency_sync / no_sync
                         classification of the run matches the name
  scattering             ||exp(iHt) psi_1(t) - psi~|| decreasing, final <= tol

All checks return a CheckResult; nothing raises on a mere failure, so a
verify pass always produces a complete report.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ModelConfig, gram_matrix
from .correlations import CorrelationState, integrate
from .diagnostics import (
    classify_correlation_sync,
    classify_sync,
    detect_period,
    fit_algebraic_limit,
    fit_rate,
)
from .errors import ConfigurationError, LoheSyncError
from .oracles import classify_two, scattering_state, sync_limits_two, z_exact
from .scenario import Scenario, build_ensemble, build_grid, build_model, build_ode_initial
from .solver import Trajectory, evolve, propagate_linear

__all__ = ["CheckResult", "VerifyContext", "run_checks", "CHECK_NAMES", "CLASSIFY_MIN_SAMPLES"]

CLASSIFY_MIN_SAMPLES = 50


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float | str | None
    expected: float | str | None
    tol: float
    detail: str = ""


class VerifyContext:
    """Lazily runs and caches whatever artifacts the selected checks need,
    so one scenario drives many checks without repeating the simulation."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.grid = build_grid(scenario)
        self.config: ModelConfig = build_model(scenario, self.grid)
        self._trajectory: Trajectory | None = None
        self._ode_series = None
        self._gram_series = None

    @property
    def trajectory(self) -> Trajectory:
        if self._trajectory is None:
            if self.scenario.solver is None:
                raise ConfigurationError("this check needs a [solver] section (PDE run)")
            initial = build_ensemble(self.scenario, self.grid)
            self._trajectory = evolve(initial, self.config, self.scenario.solver)
        return self._trajectory

    @property
    def gram_series(self):
        if self._gram_series is None:
            self._gram_series = self.trajectory.gram_series()
        return self._gram_series

    @property
    def ode_series(self):
        if self._ode_series is None:
            if self.scenario.ode is None:
                raise ConfigurationError("this check needs an [ode] section")
            ode = self.scenario.ode
            initial = build_ode_initial(self.scenario, self.config)
            self._ode_series = integrate(
                ode.system,
                initial,
                self.config,
                ode.dt,
                ode.t_end,
                sample_stride=ode.sample_stride,
                self_check=ode.self_check,
            )
        return self._ode_series

    def regime(self):
        w = self.config.frequencies
        if len(w) != 2:
            raise ConfigurationError("this check is defined for two oscillators")
        return classify_two(self.config.coupling, 0.5 * (w[0] - w[1]))

    def pair_z_series(self, prefer: str = "pde"):
        """(times, z_01) from whichever level the scenario runs.

        prefer="ode" flips the choice when both levels are configured; rate
        fits want the ODE series, whose tail is not polluted by the PDE
        splitting-error floor.
        """
        has_pde = self.scenario.solver is not None
        has_ode = self.scenario.ode is not None
        use_pde = has_pde and not (prefer == "ode" and has_ode)
        if use_pde:
            series = self.gram_series
            return series.times, series.z[:, 0, 1]
        series = self.ode_series
        z = series.z
        if z.ndim == 3:
            return series.times, z[:, 0, 1]
        return series.times, z


def _check_mass(ctx: VerifyContext, tol: float) -> CheckResult:
    drift = max(float(np.max(np.abs(r.mass_drift))) for r in ctx.trajectory.diagnostics_stream)
    return CheckResult("mass", drift <= tol, drift, 0.0, tol, "max | ||psi_j|| - 1 |")


def _check_order_identity(ctx: VerifyContext, tol: float) -> CheckResult:
    worst = 0.0
    for state in ctx.trajectory.states:
        z = gram_matrix(state)
        n = z.shape[0]
        zeta_sq = float(np.sum(z).real) / (n * n)
        diag = np.diag(z).real
        dist_sq = diag[:, None] + diag[None, :] - 2.0 * z.real
        mean_dist = float(np.sum(dist_sq)) / (2.0 * n * n)
        worst = max(worst, abs((1.0 - zeta_sq) - mean_dist))
    return CheckResult(
        "order_identity", worst <= tol, worst, 0.0, tol, "1 - ||zeta||^2 vs mean pair distance"
    )


def _check_energy_decomposition(ctx: VerifyContext, tol: float) -> CheckResult:
    worst = 0.0
    for rec in ctx.trajectory.diagnostics_stream:
        en = rec.energies
        worst = max(worst, abs(en.total - (en.zeta_energy + en.relative)))
    return CheckResult(
        "energy_decomposition", worst <= tol, worst, 0.0, tol, "E - (E_zeta + E_rel)"
    )


def _check_pde_ode_closure(ctx: VerifyContext, tol: float) -> CheckResult:
    measured = ctx.gram_series
    params = ctx.scenario.solver
    ode = integrate(
        "full",
        CorrelationState(0.0, measured.z[0].copy()),
        ctx.config,
        params.dt,
        params.t_end,
        sample_stride=params.snapshot_stride,
    )
    if len(ode.times) != len(measured.times):
        raise ConfigurationError("sampling mismatch between PDE and ODE series")
    err = float(np.max(np.abs(measured.z - ode.z)))
    return CheckResult("pde_ode_closure", err <= tol, err, 0.0, tol, "max |z_pde - z_ode|")


def _check_two_exact(ctx: VerifyContext, tol: float) -> CheckResult:
    regime = ctx.regime()
    errs = []
    if ctx.scenario.solver is not None:
        series = ctx.gram_series
        z = series.z[:, 0, 1]
        errs.append(float(np.max(np.abs(z - z_exact(z[0], series.times, regime)))))
    if ctx.scenario.ode is not None:
        series = ctx.ode_series
        z = series.z if series.z.ndim == 1 else series.z[:, 0, 1]
        errs.append(float(np.max(np.abs(z - z_exact(z[0], series.times, regime)))))
    if not errs:
        raise ConfigurationError("two_exact needs a [solver] or [ode] section")
    err = max(errs)
    return CheckResult("two_exact", err <= tol, err, 0.0, tol, "max |z - closed form|")


def _check_sync_rate(ctx: VerifyContext, tol: float) -> CheckResult:
    regime = ctx.regime()
    if regime.regime != "underdamped_sync":
        raise ConfigurationError("sync_rate applies below the critical coupling ratio")
    times, z = ctx.pair_z_series(prefer="ode")
    y = 2.0 * (1.0 - (np.exp(-1j * regime.phi) * z).real)
    fit = fit_rate(times, np.maximum(y, 1e-300))
    rel = abs(fit.rate - regime.rate) / regime.rate
    return CheckResult(
        "sync_rate",
        rel <= tol,
        fit.rate,
        regime.rate,
        tol,
        f"relative error {rel:.3e}, r^2 = {fit.r_squared:.6f}",
    )


def _check_distance_limit(ctx: VerifyContext, tol: float) -> CheckResult:
    regime = ctx.regime()
    limits = sync_limits_two(regime)
    times, z = ctx.pair_z_series()
    dist = np.sqrt(np.maximum(0.0, 2.0 * (1.0 - z.real)))
    if regime.regime == "critical":
        fitted = fit_algebraic_limit(times, dist)
        measured = fitted.limit
        how = "1/t extrapolation of the tail"
    else:
        tail = max(2, len(dist) // 4)
        measured = float(dist[-tail:].mean())
        how = "final-quarter mean"
    err = abs(measured - limits.distance_limit)
    return CheckResult(
        "distance_limit", err <= tol, measured, limits.distance_limit, tol, how
    )


def _check_periodicity(ctx: VerifyContext, tol: float) -> CheckResult:
    regime = ctx.regime()
    if regime.regime != "periodic":
        raise ConfigurationError("periodicity applies to the lam > 1 regime")
    times, z = ctx.pair_z_series()
    period = detect_period(times, np.abs(z - z[0]))
    rel = abs(period - regime.period) / regime.period
    return CheckResult(
        "periodicity",
        rel <= tol,
        period,
        regime.period,
        tol,
        f"relative error {rel:.3e}",
    )


def _check_stationary(ctx: VerifyContext, tol: float) -> CheckResult:
    series = ctx.ode_series
    z = series.z
    drift = float(np.max(np.abs(z - z[0] if z.ndim == 1 else z - z[0][None])))
    return CheckResult("stationary", drift <= tol, drift, 0.0, tol, "max |z(t) - z(0)|")


def _check_lyapunov_monotone(ctx: VerifyContext, tol: float) -> CheckResult:
    if ctx.scenario.ode is not None:
        from .emit import as_correlation_series

        lyap = as_correlation_series(ctx.ode_series).lyapunov
    else:
        lyap = ctx.gram_series.lyapunov
    worst = float(np.max(np.diff(lyap))) if len(lyap) > 1 else 0.0
    return CheckResult(
        "lyapunov_monotone", worst <= tol, worst, 0.0, tol, "largest uphill step"
    )


def _classification_of(ctx: VerifyContext, tol: float):
    if ctx.scenario.solver is not None:
        return classify_sync(ctx.trajectory.diagnostics_stream, tol)
    from .emit import as_correlation_series

    return classify_correlation_sync(as_correlation_series(ctx.ode_series), tol)


def _check_classified(ctx: VerifyContext, tol: float, expected: str, name: str) -> CheckResult:
    result = _classification_of(ctx, tol)
    return CheckResult(
        name,
        result.kind == expected,
        result.kind,
        expected,
        tol,
        f"tail from t = {result.evidence['tail_start_time']:g}",
    )


def _check_scattering(ctx: VerifyContext, tol: float) -> CheckResult:
    result = scattering_state(ctx.trajectory, ctx.config, 0, tail_tol=tol)
    profile = result.field.values
    times = ctx.trajectory.times
    # probing ~16 samples is enough to certify monotone approach
    stride = max(1, (len(times) - 1) // 16)
    idx = list(range(0, len(times), stride))
    if idx[-1] != len(times) - 1:
        idx.append(len(times) - 1)
    errs = []
    for i in idx:
        state = ctx.trajectory.states[i]
        pulled = propagate_linear(ctx.grid, ctx.config.potential, state.psi[0], -float(times[i]))
        errs.append(float(np.sqrt(ctx.grid.dv * np.sum(np.abs(pulled - profile) ** 2))))
    errs_arr = np.array(errs)
    decreasing = bool(np.all(np.diff(errs_arr) <= 1e-10))
    final_ok = errs_arr[-1] <= tol
    return CheckResult(
        "scattering",
        decreasing and final_ok,
        float(errs_arr[-1]),
        0.0,
        tol,
        f"monotone: {decreasing}; tail bound {result.tail_bound:.3e}",
    )


_CHECKS = {
    "mass": _check_mass,
    "order_identity": _check_order_identity,
    "energy_decomposition": _check_energy_decomposition,
    "pde_ode_closure": _check_pde_ode_closure,
    "two_exact": _check_two_exact,
    "sync_rate": _check_sync_rate,
    "distance_limit": _check_distance_limit,
    "periodicity": _check_periodicity,
    "stationary": _check_stationary,
    "lyapunov_monotone": _check_lyapunov_monotone,
    "phase_sync": lambda ctx, tol: _check_classified(ctx, tol, "phase_sync", "phase_sync"),
    "frequency_sync": lambda ctx, tol: _check_classified(
        ctx, tol, "frequency_sync", "frequency_sync"
    ),
    "no_sync": lambda ctx, tol: _check_classified(ctx, tol, "none", "no_sync"),
    "scattering": _check_scattering,
}

CHECK_NAMES = tuple(sorted(_CHECKS))


def run_checks(scenario: Scenario) -> list[CheckResult]:
    """Evaluate every check the scenario requests, in the order written."""
    if not scenario.checks:
        raise ConfigurationError("scenario has no [verify] checks")
    ctx = VerifyContext(scenario)
    results = []
    for name, tol in scenario.checks:
        fn = _CHECKS.get(name)
        if fn is None:
            raise ConfigurationError(f"unknown check {name!r}; known: {', '.join(CHECK_NAMES)}")
        try:
            results.append(fn(ctx, tol))
        except LoheSyncError as exc:
            results.append(
                CheckResult(name, False, None, None, tol, f"check could not run: {exc}")
            )
    return results
