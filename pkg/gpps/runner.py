from __future__ import annotations

import importlib.metadata as importlib_metadata
import os
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime, timezone
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from gpps.config import (
    ENERGY_FILE_NAME,
    FIELD_FILE_NAME,
    ITERATIONS_FILE_NAME,
    ITERATIONS_HEADER,
    KERNEL_CHECK_FILE_NAME,
    KERNEL_CHECK_HEADER,
    MANIFEST_FILE_NAME,
    OBSERVABLES_FILE_NAME,
    OBSERVABLES_HEADER,
    RATE_FIT_FILE_NAME,
    REDUCTION_HEADER,
    REGIME_FILE_NAME,
    SUMMARY_FILE_NAME,
)
from gpps.dynamics.blowup import blowup_criterion
from gpps.dynamics.core import evolve
from gpps.grid.core import Grid, Wavefunction
from gpps.ground_state.gagliardo_nirenberg import shooting_estimate
from gpps.ground_state.gradient_flow import minimize_gradient_flow
from gpps.ground_state.regime import classify_regime
from gpps.kernels.core import kernel_check_table
from gpps.models.core import ModelParams, energy_summary
from gpps.reduction.rate import reduction_study
from gpps.reduction.transverse import TransverseCase, transverse_mode
from gpps.run_config import RunConfig, Task
from gpps.tools.csv_sink import CSVSink
from gpps.tools.json_sink import JSONSink
from gpps.tools.snapshot import write_snapshot
from gpps.utils.file import save_json_file, save_json_file_atomic
from gpps.utils.internal import NumericalAlarm


def code_version() -> str:
    try:
        return importlib_metadata.version("gpps")
    except importlib_metadata.PackageNotFoundError:
        return "development"


class RunStatus:
    OK = "ok"
    ALARM = "alarm"
    FAILED = "failed"


@dataclass
class RunManifest:
    """
    Record of one run, written atomically next to its outputs.

    Attributes:
        task (str): Task that ran.
        status (str): `ok`, `alarm` (numerical alarm raised or recorded) or
            `failed`.
        config (Dict[str, Any]): Full configuration echo, defaults included;
            `parse_config` accepts it unchanged.
        version (str): Installed `gpps` version.
        started (str): UTC start time in ISO 8601.
        elapsed (float): Wall-clock seconds.
        summary (Dict[str, Any]): Task result summary.
        files (List[str]): Output files, relative to the output directory;
            only files that exist are listed.
        error (Optional[str]): `<ExceptionType>: <message>` of a failed or
            alarmed run.
    """

    task: str
    status: str
    config: Dict[str, Any]
    version: str
    started: str
    elapsed: float
    summary: Dict[str, Any] = field(default_factory=dict)
    files: List[str] = field(default_factory=list)
    error: Optional[str] = None

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


class _Outputs:
    """Output file names of one run, in writing order."""

    def __init__(self, directory: str):
        self.directory = directory
        self.names: List[str] = []

    def path(self, name: str) -> str:
        self.names.append(name)
        return os.path.join(self.directory, name)

    def existing(self) -> List[str]:
        return [
            name
            for name in dict.fromkeys(self.names)
            if os.path.isfile(os.path.join(self.directory, name))
        ]


def _time_label(t: float) -> str:
    return f"{t:.6g}".replace(".", "p")


def _alarm_summary(alarm: Optional[NumericalAlarm]) -> Optional[str]:
    if alarm is None:
        return None
    return f"{type(alarm).__name__}: {alarm}"


def _gaussian(
    grid: Grid,
    width: float,
    center=None,
    momentum=None,
    chirp: float = 0.0,
) -> Wavefunction:
    psi = Wavefunction.gaussian(grid, width=width, center=center, momentum=momentum)
    if chirp == 0.0:
        return psi
    values = psi.values * np.exp(-0.5j * chirp * grid.radius_squared)
    return Wavefunction(grid=grid, values=values).normalized()


def run_groundstate(config: RunConfig, outputs: _Outputs) -> Dict[str, Any]:
    options = config.options
    params = config.params
    grid = config.spatial_grid()
    init = Wavefunction.gaussian(grid, width=options.init_width)
    if options.noise > 0:
        rng = np.random.default_rng(config.seed)
        noise = 1.0 + options.noise * rng.uniform(-1.0, 1.0, size=grid.shape)
        init = Wavefunction(grid=grid, values=init.values * noise).normalized()
    result = minimize_gradient_flow(
        params,
        init,
        tau=options.tau,
        tol=options.tol,
        max_iterations=options.max_iterations,
        c_b=options.c_b,
    )

    with CSVSink(outputs.path(ITERATIONS_FILE_NAME), ITERATIONS_HEADER) as sink:
        sink.append(result.log)
    write_snapshot(outputs.path(FIELD_FILE_NAME), result.state.values)
    summary = energy_summary(params, result.state)
    summary.update(
        {
            "outcome": result.outcome.value,
            "iterations": result.iterations,
            "tau": result.tau,
            "residual": result.residual,
            "halvings": result.halvings,
        }
    )
    save_json_file(summary, outputs.path(ENERGY_FILE_NAME))
    return {
        "outcome": result.outcome.value,
        "E_total": summary["total"],
        "iterations": result.iterations,
    }


def run_evolve(config: RunConfig, outputs: _Outputs) -> Dict[str, Any]:
    options = config.options
    params = config.params
    psi0 = _gaussian(
        config.spatial_grid(),
        options.init_width,
        center=options.init_center,
        momentum=options.init_momentum,
        chirp=options.chirp,
    )
    summary: Dict[str, Any] = {}
    if options.c_b is not None:
        verdict = blowup_criterion(params, psi0, options.c_b)
        summary["blowup"] = {
            "verdict": verdict.verdict.value,
            "coefficients": list(verdict.coefficients),
            "assumption": verdict.assumption,
            "reason": verdict.reason,
            "time_bound": verdict.time_bound,
        }
    result = evolve(
        params,
        psi0,
        options.T,
        options.dt,
        record_every=options.record_every,
        snapshot_times=options.snapshot_times,
    )

    with CSVSink(outputs.path(OBSERVABLES_FILE_NAME), OBSERVABLES_HEADER) as sink:
        sink.append(result.series.rows())
    write_snapshot(outputs.path(FIELD_FILE_NAME), result.state.values)
    for t, psi in sorted(result.snapshots.items()):
        write_snapshot(outputs.path(f"snapshot_t{_time_label(t)}.snap"), psi.values)
    summary.update(
        {
            "completed": result.completed,
            "steps": result.steps,
            "time": result.time,
            "mass_drift": result.series.mass_drift(),
            "energy_drift": result.series.energy_drift(),
            "alarm": _alarm_summary(result.alarm),
        }
    )
    save_json_file(summary, outputs.path(SUMMARY_FILE_NAME))
    return summary


def _regime_row(
    params: ModelParams, c_b: float, mass: float, grid: Optional[Grid]
) -> Dict[str, Any]:
    verdict = classify_regime(params, c_b, mass=mass)
    row: Dict[str, Any] = {
        "beta": params.beta,
        "lambda": params.lam,
        "verdict": verdict.verdict.value,
        "condition": verdict.matched_condition,
        "margin": verdict.margin,
    }
    if grid is None:
        return row
    try:
        result = minimize_gradient_flow(params, Wavefunction.gaussian(grid))
        row.update({"outcome": result.outcome.value, "E_total": result.energy.total})
    except NumericalAlarm as alarm:
        row.update({"outcome": _alarm_summary(alarm), "E_total": None})
    return row


def run_regime(config: RunConfig, outputs: _Outputs) -> Dict[str, Any]:
    options = config.options
    params = config.params
    c_b = options.c_b if options.c_b is not None else shooting_estimate()
    betas = options.beta_values or (params.beta,)
    lambdas = options.lambda_values or (params.lam,)
    grid = config.spatial_grid() if options.minimize else None
    candidates = [replace(params, beta=b, lam=lam) for b in betas for lam in lambdas]

    rows: List[Optional[Dict[str, Any]]] = [None] * len(candidates)
    with ThreadPoolExecutor(max_workers=options.thread_workers) as executor:
        futures = {
            executor.submit(_regime_row, p, c_b, options.mass, grid): i
            for i, p in enumerate(candidates)
        }
        for future in as_completed(futures):
            rows[futures[future]] = future.result()

    with JSONSink(outputs.path(REGIME_FILE_NAME)) as sink:
        sink.append(rows, custom_data={"c_b": c_b, "mass": options.mass})
    counts = Counter(row["verdict"] for row in rows)
    return {"c_b": c_b, "count": len(rows), "verdicts": dict(sorted(counts.items()))}


def run_reduce(config: RunConfig, outputs: _Outputs) -> Dict[str, Any]:
    options = config.options
    params = config.params
    case = TransverseCase.from_dim(params.dim)
    mode = transverse_mode(
        case, config.grid.transverse_extent, config.grid.transverse_points
    )
    phi0 = Wavefunction.gaussian(config.spatial_grid(), width=options.init_width)
    study = reduction_study(
        params,
        phi0,
        options.eps_values,
        options.T,
        options.dt,
        sample_times=options.sample_times,
        thread_workers=options.thread_workers,
        mode=mode,
    )

    for eps, errors in study.errors.items():
        name = f"reduction_eps{_time_label(eps)}.csv"
        with CSVSink(outputs.path(name), REDUCTION_HEADER) as sink:
            sink.append(errors.rows())
    transverse_fit = study.transverse_fit
    fits = {
        "case": case.value,
        "total": study.fit.as_dict(),
        "transverse": None if transverse_fit is None else transverse_fit.as_dict(),
    }
    save_json_file(fits, outputs.path(RATE_FIT_FILE_NAME))
    return {"case": case.value, "slopes": study.fit.slopes.tolist()}


def run_kernel_check(config: RunConfig, outputs: _Outputs) -> Dict[str, Any]:
    options = config.options
    rows = kernel_check_table(options.abs_xi, options.eps_values)
    with CSVSink(outputs.path(KERNEL_CHECK_FILE_NAME), KERNEL_CHECK_HEADER) as sink:
        sink.append(rows)
    return {
        "rows": len(rows),
        "max_rel_err": max(row["rel_err"] for row in rows),
    }


TASK_RUNNERS: Dict[Task, Callable[[RunConfig, _Outputs], Dict[str, Any]]] = {
    Task.GROUNDSTATE: run_groundstate,
    Task.EVOLVE: run_evolve,
    Task.REGIME: run_regime,
    Task.REDUCE: run_reduce,
    Task.KERNEL_CHECK: run_kernel_check,
}


def run(config: RunConfig) -> RunManifest:
    """
    Run the task of a validated configuration and write its manifest.

    The manifest is written even when the task raises; it then carries the
    status `alarm` (`NumericalAlarm`) or `failed` (anything else), lists the
    partial outputs that exist, and the exception is re-raised. A numerical
    alarm recorded in a returned result also yields the status `alarm`.

    Args:
        config (RunConfig): Output of `parse_config`.

    Returns:
        RunManifest: Manifest of a run that did not raise.

    Example:
        ```python
        from gpps.run_config import parse_config
        from gpps.runner import run

        config = parse_config(open("groundstate.yaml").read(), task="groundstate")
        manifest = run(config)
        manifest.files
        # ['iterations.csv', 'field.snap', 'energy.json']
        ```
    """
    directory = config.output.directory
    os.makedirs(directory, exist_ok=True)
    outputs = _Outputs(directory)
    started = datetime.now(timezone.utc).isoformat()
    clock = time.perf_counter()

    failure: Optional[Exception] = None
    summary: Dict[str, Any] = {}
    try:
        summary = TASK_RUNNERS[config.task](config, outputs)
    except Exception as exception:
        failure = exception

    if isinstance(failure, NumericalAlarm) or summary.get("alarm"):
        status = RunStatus.ALARM
    elif failure is not None:
        status = RunStatus.FAILED
    else:
        status = RunStatus.OK
    error = None
    if failure is not None:
        error = f"{type(failure).__name__}: {failure}"
    elif summary.get("alarm"):
        error = summary["alarm"]

    manifest = RunManifest(
        task=config.task.value,
        status=status,
        config=config.as_dict(),
        version=code_version(),
        started=started,
        elapsed=time.perf_counter() - clock,
        summary=summary,
        files=outputs.existing(),
        error=error,
    )
    save_json_file_atomic(
        manifest.as_dict(), os.path.join(directory, MANIFEST_FILE_NAME)
    )
    if failure is not None:
        raise failure
    return manifest
