"""Batch command-line front door.

Subcommands:

  simulate   run the coupled PDE system from a scenario; writes diagnostics
             (ndjson/csv), an optional final snapshot, and a summary JSON
  ode        integrate a correlation-level system (full / two / fg)
  oracle     evaluate the closed-form two-oscillator layer for the scenario's
             parameters: regime record, limits, and an exact series when z0
             and a time window are given
  verify     run the scenario's [verify] checks and write a report; exits 1
             if any check fails
  sweep      grid over (coupling, omega, n, seed); one aggregated CSV row
             per run, sorted by the parameter tuple

Artifacts land under --out if given, otherwise under
$LOHE_SYNC_OUT (or ./runs) in a directory named <scenario>-<timestamp>.
File contents are byte-deterministic for a fixed scenario and seed; the
timestamp lives only in the default directory name. Every run writes
manifest.cfg, the resolved scenario, which can be fed back to --scenario to
reproduce the other artifacts byte for byte.

Exit codes: 0 success, 1 verification failure, 2 usage or configuration
error, 3 numerical divergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from .core import GridSpec, ModelConfig
from .correlations import TwoOscillatorSeries, integrate, random_correlation_matrix
from .diagnostics import (
    classify_correlation_sync,
    classify_sync,
    detect_period,
    fit_rate,
)
from .emit import (
    as_correlation_series,
    dump_json,
    write_diagnostics_csv,
    write_diagnostics_ndjson,
    write_ode_csv,
    write_ode_ndjson,
    write_sweep_csv,
)
from .errors import (
    ConfigurationError,
    ContractViolationError,
    DivergenceError,
    LoheSyncError,
)
from .initial_data import perturbed_gaussians
from .oracles import classify_two, sync_limits_two, z_exact
from .scenario import (
    Scenario,
    build_ensemble,
    build_grid,
    build_model,
    build_ode_initial,
    load_scenario,
    render_scenario,
    resolved_frequencies,
)
from .snapshots import write_snapshot
from .solver import SolverParams, evolve
from .verification import run_checks

__all__ = ["main"]

# classification tolerance for summary reporting; verify checks carry their own
CLASSIFY_TOL = 1e-3
CLASSIFY_MIN_SAMPLES = 50


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lohe-sync",
        description="Coupled Schrodinger oscillator simulator and verification harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("simulate", "run the PDE system from a scenario"),
        ("ode", "integrate a correlation-level system"),
        ("oracle", "evaluate the closed-form two-oscillator layer"),
        ("verify", "run the scenario's checks and report pass/fail"),
        ("sweep", "grid over parameters, one CSV row per run"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--scenario", required=True, help="scenario config file")
        cmd.add_argument("--out", help="output directory (default: per-run timestamped dir)")
        cmd.add_argument("--seed", type=int, help="override the scenario seed")
        cmd.add_argument("--dt", type=float, help="override the time step")
        cmd.add_argument("--t-end", type=float, dest="t_end", help="override the end time")
        cmd.add_argument(
            "--format",
            choices=("ndjson", "csv"),
            help="emit only this format, overriding [outputs]",
        )
        cmd.add_argument(
            "--threads",
            type=int,
            default=1,
            help="parallel workers (sweep only; single runs are sequential)",
        )
    return parser


def _apply_overrides(sc: Scenario, args) -> Scenario:
    if args.seed is not None:
        sc = replace(sc, seed=args.seed)
    if args.dt is not None or args.t_end is not None:
        if sc.solver is not None:
            solver = sc.solver
            sc = replace(
                sc,
                solver=replace(
                    solver,
                    dt=args.dt if args.dt is not None else solver.dt,
                    t_end=args.t_end if args.t_end is not None else solver.t_end,
                ),
            )
        if sc.ode is not None:
            ode = sc.ode
            sc = replace(
                sc,
                ode=replace(
                    ode,
                    dt=args.dt if args.dt is not None else ode.dt,
                    t_end=args.t_end if args.t_end is not None else ode.t_end,
                ),
            )
        if sc.sweep is not None:
            sweep = sc.sweep
            sc = replace(
                sc,
                sweep=replace(
                    sweep,
                    dt=args.dt if args.dt is not None else sweep.dt,
                    t_end=args.t_end if args.t_end is not None else sweep.t_end,
                ),
            )
    if args.format is not None:
        sc = replace(sc, outputs=replace(sc.outputs, formats=(args.format,)))
    return sc


def _run_dir(args, name: str) -> str:
    if args.out:
        path = args.out
    else:
        root = os.environ.get("LOHE_SYNC_OUT", "runs")
        path = os.path.join(root, f"{name}-{time.strftime('%Y%m%d-%H%M%S')}")
    os.makedirs(path, exist_ok=True)
    return path


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _write_manifest(run_dir: str, sc: Scenario) -> None:
    _write(os.path.join(run_dir, "manifest.cfg"), render_scenario(sc))


def _instant_classification(pair_max: float, zeta_norm: float) -> dict:
    kind = "phase_sync" if pair_max <= CLASSIFY_TOL and abs(zeta_norm - 1.0) <= CLASSIFY_TOL else "none"
    return {
        "kind": kind,
        "evidence": {
            "instantaneous": True,
            "pair_distance_max": pair_max,
            "zeta_norm": zeta_norm,
        },
    }


def _two_oscillator_block(config: ModelConfig, times, pair_z) -> dict | None:
    """Regime record plus measured tail quantities for N = 2 runs."""
    if config.n_oscillators != 2 or config.coupling <= 0:
        return None
    w1, w2 = config.frequencies
    omega = 0.5 * (w1 - w2)
    if omega < 0 or abs(w1 + w2) > 1e-12 * max(abs(w1), abs(w2), 1.0):
        return None
    regime = classify_two(config.coupling, omega)
    block: dict = {
        "lam": regime.lam,
        "regime": regime.regime,
        "phi": regime.phi,
        "rate": regime.rate,
        "period": regime.period,
    }
    if regime.regime != "periodic":
        limits = sync_limits_two(regime)
        block["distance_limit"] = limits.distance_limit
        dist = np.sqrt(np.maximum(0.0, 2.0 * (1.0 - np.asarray(pair_z).real)))
        tail = max(2, len(dist) // 4)
        block["distance_tail_measured"] = float(dist[-tail:].mean())
        if regime.regime == "underdamped_sync" and len(times) >= 8:
            y = 2.0 * (1.0 - (np.exp(-1j * regime.phi) * np.asarray(pair_z)).real)
            try:
                fit = fit_rate(times, np.maximum(y, 1e-300))
                block["sync_rate_fitted"] = fit.rate
                block["sync_rate_r_squared"] = fit.r_squared
            except LoheSyncError:
                block["sync_rate_fitted"] = None
    else:
        try:
            z = np.asarray(pair_z)
            block["period_detected"] = detect_period(np.asarray(times), np.abs(z - z[0]))
        except LoheSyncError:
            block["period_detected"] = None
    return block


def cmd_simulate(sc: Scenario, args) -> int:
    if sc.solver is None:
        raise ConfigurationError("simulate needs a [solver] section")
    grid = build_grid(sc)
    config = build_model(sc, grid)
    initial = build_ensemble(sc, grid)
    trajectory = evolve(initial, config, sc.solver, collect_diagnostics=sc.outputs.diagnostics)

    run_dir = _run_dir(args, sc.name)
    _write_manifest(run_dir, sc)

    records = trajectory.diagnostics_stream
    if sc.outputs.diagnostics:
        if "ndjson" in sc.outputs.formats:
            with open(
                os.path.join(run_dir, "diagnostics.ndjson"), "w", encoding="utf-8", newline=""
            ) as fh:
                write_diagnostics_ndjson(fh, records)
        if "csv" in sc.outputs.formats:
            with open(
                os.path.join(run_dir, "diagnostics.csv"), "w", encoding="utf-8", newline=""
            ) as fh:
                write_diagnostics_csv(fh, records)
    if sc.outputs.final_snapshot:
        write_snapshot(os.path.join(run_dir, "final.slw"), trajectory.final)

    summary: dict = {
        "scenario": sc.name,
        "seed": sc.seed,
        "kind": "pde",
        "scheme": sc.solver.scheme,
        "grid": {"dim": grid.dim, "points": grid.points, "length": grid.length},
        "model": {
            "n": config.n_oscillators,
            "coupling": config.coupling,
            "frequencies": list(config.frequencies),
            "potential": sc.potential_kind,
        },
        "dt": sc.solver.dt,
        "t_end": sc.solver.t_end,
        "samples": trajectory.n_samples,
    }
    if records:
        final = records[-1]
        if len(records) >= CLASSIFY_MIN_SAMPLES:
            result = classify_sync(records, CLASSIFY_TOL)
            summary["classification"] = {"kind": result.kind, "evidence": result.evidence}
        else:
            summary["classification"] = _instant_classification(
                float(final.pair_l2.max()), final.zeta_norm
            )
        summary["final"] = {
            "t": final.time,
            "zeta_norm": final.zeta_norm,
            "pair_l2_max": float(final.pair_l2.max()),
            "mass_drift_max": float(np.max(np.abs(final.mass_drift))),
            "energy_total": final.energies.total,
            "energy_relative": final.energies.relative,
        }
        gram = trajectory.gram_series()
        two = _two_oscillator_block(config, gram.times, gram.z[:, 0, 1])
        if two is not None:
            summary["two_oscillator"] = two
    _write(os.path.join(run_dir, "summary.json"), dump_json(summary))
    kind = summary.get("classification", {}).get("kind", "n/a")
    print(f"simulate: {sc.name} -> {run_dir} (classification: {kind})")
    return 0


def cmd_ode(sc: Scenario, args) -> int:
    if sc.ode is None:
        raise ConfigurationError("ode needs an [ode] section")
    grid_free_config = ModelConfig(
        coupling=sc.coupling,
        frequencies=resolved_frequencies(sc),
    )
    initial = build_ode_initial(sc, grid_free_config)
    series = integrate(
        sc.ode.system,
        initial,
        grid_free_config,
        sc.ode.dt,
        sc.ode.t_end,
        sample_stride=sc.ode.sample_stride,
        self_check=sc.ode.self_check,
    )

    run_dir = _run_dir(args, sc.name)
    _write_manifest(run_dir, sc)
    if "ndjson" in sc.outputs.formats:
        with open(
            os.path.join(run_dir, "correlations.ndjson"), "w", encoding="utf-8", newline=""
        ) as fh:
            write_ode_ndjson(fh, series)
    if "csv" in sc.outputs.formats:
        with open(
            os.path.join(run_dir, "correlations.csv"), "w", encoding="utf-8", newline=""
        ) as fh:
            write_ode_csv(fh, series)

    lifted = as_correlation_series(series)
    summary: dict = {
        "scenario": sc.name,
        "seed": sc.seed,
        "kind": "ode",
        "system": sc.ode.system,
        "model": {
            "n": lifted.n_oscillators,
            "coupling": sc.coupling,
            "frequencies": list(grid_free_config.frequencies),
        },
        "dt": sc.ode.dt,
        "t_end": sc.ode.t_end,
        "samples": len(lifted.times),
    }
    if series.richardson_error is not None:
        summary["richardson_error"] = series.richardson_error
    if len(lifted.times) >= CLASSIFY_MIN_SAMPLES:
        result = classify_correlation_sync(lifted, CLASSIFY_TOL)
        summary["classification"] = {"kind": result.kind, "evidence": result.evidence}
    else:
        n = lifted.n_oscillators
        iu = np.triu_indices(n, k=1)
        dist = np.sqrt(np.maximum(0.0, 2.0 * (1.0 - lifted.z[-1].real)))
        summary["classification"] = _instant_classification(
            float(dist[iu].max()) if iu[0].size else 0.0,
            float(np.sqrt(max(0.0, lifted.zeta_norm_sq[-1]))),
        )
    summary["lyapunov_final"] = float(lifted.lyapunov[-1])
    summary["lyapunov_monotone"] = bool(np.all(np.diff(lifted.lyapunov) <= 1e-12))
    two = _two_oscillator_block(grid_free_config, lifted.times, lifted.z[:, 0, 1])
    if two is not None:
        summary["two_oscillator"] = two
    _write(os.path.join(run_dir, "summary.json"), dump_json(summary))
    kind = summary["classification"]["kind"]
    print(f"ode: {sc.name} ({sc.ode.system}) -> {run_dir} (classification: {kind})")
    return 0


def cmd_oracle(sc: Scenario, args) -> int:
    freqs = resolved_frequencies(sc)
    if len(freqs) != 2:
        raise ConfigurationError("oracle evaluation is defined for n = 2")
    omega = 0.5 * (freqs[0] - freqs[1])
    regime = classify_two(sc.coupling, omega)
    doc: dict = {
        "scenario": sc.name,
        "coupling": sc.coupling,
        "omega": omega,
        "regime": {
            "lam": regime.lam,
            "regime": regime.regime,
            "phi": regime.phi,
            "rate": regime.rate,
            "period": regime.period,
            "stable_point": regime.stable_point,
            "unstable_point": regime.unstable_point,
        },
    }
    if regime.regime != "periodic":
        limits = sync_limits_two(regime)
        doc["limits"] = {
            "phase_offset": limits.phase_offset,
            "distance_limit": limits.distance_limit,
            "rate": limits.rate,
        }
    else:
        doc["limits"] = None

    run_dir = _run_dir(args, sc.name)
    _write_manifest(run_dir, sc)

    wrote_series = False
    if (
        sc.ode is not None
        and isinstance(sc.ode.z0, complex)
        and regime.regime != "periodic"
    ):
        times = np.arange(0, int(round(sc.ode.t_end / sc.ode.dt)) + 1) * sc.ode.dt
        times = times[:: sc.ode.sample_stride]
        if times[-1] != sc.ode.t_end:
            times = np.append(times, sc.ode.t_end)
        series = TwoOscillatorSeries(times=times, z=np.asarray(z_exact(sc.ode.z0, times, regime)))
        if "ndjson" in sc.outputs.formats:
            with open(
                os.path.join(run_dir, "z_exact.ndjson"), "w", encoding="utf-8", newline=""
            ) as fh:
                write_ode_ndjson(fh, series)
        if "csv" in sc.outputs.formats:
            with open(
                os.path.join(run_dir, "z_exact.csv"), "w", encoding="utf-8", newline=""
            ) as fh:
                write_ode_csv(fh, series)
        wrote_series = True
    doc["series_written"] = wrote_series
    _write(os.path.join(run_dir, "oracle.json"), dump_json(doc))
    print(f"oracle: {sc.name} -> {run_dir} (regime: {regime.regime})")
    return 0


def cmd_verify(sc: Scenario, args) -> int:
    results = run_checks(sc)
    run_dir = _run_dir(args, sc.name)
    _write_manifest(run_dir, sc)
    report = {
        "scenario": sc.name,
        "passed": all(r.passed for r in results),
        "checks": [
            {
                "name": r.name,
                "passed": r.passed,
                "measured": r.measured,
                "expected": r.expected,
                "tol": r.tol,
                "detail": r.detail,
            }
            for r in results
        ],
    }
    _write(os.path.join(run_dir, "report.json"), dump_json(report))
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name}: measured={r.measured} expected={r.expected} tol={r.tol:g}")
    print(f"verify: {sc.name} -> {run_dir} ({'ok' if report['passed'] else 'FAILED'})")
    return 0 if report["passed"] else 1


def _sweep_point(task: tuple) -> dict:
    (coupling, omega, n, seed, mode, dt, t_end) = task
    row: dict = {
        "coupling": coupling,
        "omega": omega,
        "n": n,
        "seed": seed,
        "status": "ok",
        "detail": "",
    }
    try:
        if n == 2:
            frequencies = (omega, -omega)
        elif omega == 0.0:
            frequencies = (0.0,) * n
        else:
            raise ConfigurationError("omega sweeps with n > 2 need omega = 0")
        config = ModelConfig(coupling=coupling, frequencies=frequencies)
        n_steps = int(round(t_end / dt))
        stride = max(1, n_steps // 200)
        if mode == "pde":
            grid = GridSpec(dim=1, points=256, length=20.0)
            initial = perturbed_gaussians(grid, n, seed)
            trajectory = evolve(
                initial, config, SolverParams(dt=dt, t_end=t_end, snapshot_stride=stride)
            )
            series = trajectory.gram_series()
            result = classify_sync(trajectory.diagnostics_stream, CLASSIFY_TOL)
        else:
            z0 = random_correlation_matrix(n, seed, coherence=0.5)
            series = integrate("full", z0, config, dt, t_end, sample_stride=stride)
            result = classify_correlation_sync(series, CLASSIFY_TOL)
        row["classification"] = result.kind

        zeta_sq = series.zeta_norm_sq
        row["zeta_norm_final"] = float(np.sqrt(max(0.0, zeta_sq[-1])))
        iu = np.triu_indices(n, k=1)
        dist = np.sqrt(np.maximum(0.0, 2.0 * (1.0 - series.r)))
        tail = max(2, len(series.times) // 4)
        row["distance_tail"] = float(dist[-tail:, iu[0], iu[1]].max(axis=0).mean())

        if coupling > 0 and n == 2 and omega >= 0:
            regime = classify_two(coupling, omega)
            row["lam"] = regime.lam
            row["regime"] = regime.regime
            if regime.regime != "periodic":
                row["distance_limit"] = sync_limits_two(regime).distance_limit
        if result.kind == "phase_sync":
            # slowest pair sets the reported rate; expected >= coupling for
            # identical oscillators
            rates = []
            for j, k in zip(iu[0], iu[1]):
                y = np.maximum(1.0 - series.r[:, j, k], 1e-300)
                rates.append(fit_rate(series.times, y).rate)
            row["rate_fitted"] = float(min(rates)) if rates else None
        elif n == 2 and row.get("regime") == "underdamped_sync":
            regime = classify_two(coupling, omega)
            y = np.maximum(
                2.0 * (1.0 - (np.exp(-1j * regime.phi) * series.z[:, 0, 1]).real), 1e-300
            )
            row["rate_fitted"] = fit_rate(series.times, y).rate
    except DivergenceError as exc:
        row["status"] = "divergence"
        row["detail"] = str(exc)
    except LoheSyncError as exc:
        row["status"] = "config_error"
        row["detail"] = str(exc)
    return row


def cmd_sweep(sc: Scenario, args) -> int:
    if sc.sweep is None:
        raise ConfigurationError("sweep needs a [sweep] section")
    spec = sc.sweep
    tasks = [
        (k, w, n, seed, spec.mode, spec.dt, spec.t_end)
        for k in sorted(spec.coupling)
        for w in sorted(spec.omega)
        for n in sorted(spec.n)
        for seed in sorted(spec.seeds)
    ]
    threads = max(1, args.threads)
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_sweep_point, tasks))
    else:
        rows = [_sweep_point(t) for t in tasks]
    rows.sort(key=lambda r: (r["coupling"], r["omega"], r["n"], r["seed"]))

    run_dir = _run_dir(args, sc.name)
    _write_manifest(run_dir, sc)
    with open(os.path.join(run_dir, "sweep.csv"), "w", encoding="utf-8", newline="") as fh:
        write_sweep_csv(fh, rows)
    failures = sum(1 for r in rows if r["status"] != "ok")
    print(f"sweep: {sc.name} -> {run_dir} ({len(rows)} runs, {failures} failed)")
    return 0


_COMMANDS = {
    "simulate": cmd_simulate,
    "ode": cmd_ode,
    "oracle": cmd_oracle,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        sc = _apply_overrides(load_scenario(args.scenario), args)
        return _COMMANDS[args.command](sc, args)
    except (ConfigurationError, ContractViolationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DivergenceError as exc:
        print(f"numerical divergence: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
