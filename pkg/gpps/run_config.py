from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from enum import Enum
from functools import cached_property
from typing import Any, Dict, List, Optional, Sequence, Tuple, Type, Union

import numpy as np
import yaml

from gpps.config import (
    DEFAULT_EPS_LADDER,
    DEFAULT_FINAL_TIME,
    DEFAULT_GRID_EXTENT,
    DEFAULT_GRID_POINTS,
    DEFAULT_OUTPUT_DIRECTORY,
    DEFAULT_RECORD_EVERY,
    DEFAULT_TIME_STEP,
    GRADIENT_FLOW_MAX_ITERATIONS,
    GRADIENT_FLOW_TOLERANCE,
    KERNEL_CHECK_POINTS,
    KERNEL_CHECK_RANGE,
    TRANSVERSE_EXTENT,
    TRANSVERSE_POINTS,
)
from gpps.grid.core import Grid, make_grid
from gpps.kernels.symbols import DipoleAxis
from gpps.models.core import ModelKind, ModelParams
from gpps.models.potentials import PotentialForm, PotentialSpec


class Task(Enum):
    GROUNDSTATE = "groundstate"
    EVOLVE = "evolve"
    REGIME = "regime"
    REDUCE = "reduce"
    KERNEL_CHECK = "kernel_check"

    @classmethod
    def list(cls):
        return list(map(lambda c: c.value, cls))

    @classmethod
    def from_command(cls, command: str) -> Task:
        """Task of a CLI command; `kernel-check` maps to `kernel_check`."""
        value = command.replace("-", "_")
        if value not in cls.list():
            raise ValueError(f"Task must be one of {cls.list()}, {command!r} given.")
        return cls(value)


def _number(value: Any, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"{name} must be a number, {value!r} given.")
    if not np.isfinite(value):
        raise ValueError(f"{name} must be finite, {value!r} given.")
    return float(value)


def _optional_number(value: Any, name: str) -> Optional[float]:
    return None if value is None else _number(value, name)


def _positive(value: Any, name: str) -> float:
    value = _number(value, name)
    if value <= 0:
        raise ValueError(f"{name} must be positive, {value} given.")
    return value


def _integer(value: Any, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"{name} must be an integer, {value!r} given.")
    if value < minimum:
        raise ValueError(f"{name} must be at least {minimum}, {value} given.")
    return value


def _numbers(value: Any, name: str) -> Tuple[float, ...]:
    if isinstance(value, (list, tuple)):
        return tuple(_number(v, name) for v in value)
    return (_number(value, name),)


def _optional_numbers(value: Any, name: str) -> Optional[Tuple[float, ...]]:
    return None if value is None else _numbers(value, name)


def _from_mapping(cls: Type, data: Any, section: str, aliases=None):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ValueError(f"Section '{section}' must be a mapping, {data!r} given.")
    aliases = aliases or {}
    names = {f.name for f in fields(cls)}
    allowed = sorted((names - set(aliases.values())) | set(aliases))
    unknown = sorted(set(map(str, data)) - set(allowed))
    if unknown:
        raise ValueError(
            f"Unknown key(s) {unknown} in section '{section}'; allowed: {allowed}."
        )
    return cls(**{aliases.get(key, key): value for key, value in data.items()})


@dataclass
class PotentialSection:
    form: str = PotentialForm.HARMONIC.value
    gamma: Union[float, Sequence[float]] = 1.0
    amplitude: float = 0.0
    wavevector: Union[float, Sequence[float]] = 0.0

    def __post_init__(self):
        if self.form not in PotentialForm.list() or self.form == "tabulated":
            allowed = [f for f in PotentialForm.list() if f != "tabulated"]
            raise ValueError(
                f"potential.form must be one of {allowed}, {self.form!r} given."
            )
        self.gamma = _numbers(self.gamma, "potential.gamma")
        self.amplitude = _number(self.amplitude, "potential.amplitude")
        self.wavevector = _numbers(self.wavevector, "potential.wavevector")

    def build(self) -> PotentialSpec:
        return PotentialSpec(
            form=PotentialForm(self.form),
            gamma=self.gamma,
            amplitude=self.amplitude,
            wavevector=self.wavevector,
        )


@dataclass
class ModelSection:
    kind: Optional[str] = None
    beta: float = 0.0
    lam: float = 0.0
    eps: Optional[float] = None
    axis: Sequence[float] = (0.0, 0.0, 1.0)
    potential: PotentialSection = field(default_factory=PotentialSection)

    def __post_init__(self):
        if self.kind not in ModelKind.list():
            raise ValueError(
                f"model.kind must be one of {ModelKind.list()}, {self.kind!r} given."
            )
        self.beta = _number(self.beta, "model.beta")
        self.lam = _number(self.lam, "model.lambda")
        self.eps = _optional_number(self.eps, "model.eps")
        axis = DipoleAxis.from_vector(_numbers(self.axis, "model.axis"))
        self.axis = (axis.n1, axis.n2, axis.n3)
        if not isinstance(self.potential, PotentialSection):
            self.potential = _from_mapping(
                PotentialSection, self.potential, "model.potential"
            )

    def build(self) -> ModelParams:
        return ModelParams(
            kind=ModelKind(self.kind),
            beta=self.beta,
            lam=self.lam,
            eps=self.eps,
            axis=DipoleAxis(*self.axis),
            potential=self.potential.build(),
        )

    def as_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["lambda"] = data.pop("lam")
        return data


def _listed(value: Any) -> List[Any]:
    return list(value) if isinstance(value, (list, tuple)) else [value]


@dataclass
class GridSection:
    extents: Union[float, Sequence[float]] = DEFAULT_GRID_EXTENT
    points: Union[int, Sequence[int]] = DEFAULT_GRID_POINTS
    transverse_extent: float = TRANSVERSE_EXTENT
    transverse_points: int = TRANSVERSE_POINTS

    def __post_init__(self):
        self.extents = tuple(
            _positive(e, "grid.extents") for e in _listed(self.extents)
        )
        self.points = tuple(_integer(n, "grid.points") for n in _listed(self.points))
        self.transverse_extent = _positive(
            self.transverse_extent, "grid.transverse_extent"
        )
        self.transverse_points = _integer(
            self.transverse_points, "grid.transverse_points"
        )

    def build(self, dim: int) -> Grid:
        extents = self.extents[0] if len(self.extents) == 1 else self.extents
        points = self.points[0] if len(self.points) == 1 else self.points
        return make_grid(dim=dim, extents=extents, points=points)


@dataclass
class OutputSection:
    directory: str = DEFAULT_OUTPUT_DIRECTORY

    def __post_init__(self):
        if not isinstance(self.directory, str) or not self.directory:
            raise ValueError(
                f"output.directory must be a non-empty string, "
                f"{self.directory!r} given."
            )


@dataclass
class GroundStateOptions:
    tau: Optional[float] = None
    tol: float = GRADIENT_FLOW_TOLERANCE
    max_iterations: int = GRADIENT_FLOW_MAX_ITERATIONS
    init_width: float = 1.0
    noise: float = 0.0
    c_b: Optional[float] = None

    def __post_init__(self):
        if self.tau is not None:
            self.tau = _positive(self.tau, "groundstate.tau")
        self.tol = _positive(self.tol, "groundstate.tol")
        self.max_iterations = _integer(
            self.max_iterations, "groundstate.max_iterations"
        )
        self.init_width = _positive(self.init_width, "groundstate.init_width")
        self.noise = _number(self.noise, "groundstate.noise")
        if not 0 <= self.noise < 1:
            raise ValueError(
                f"groundstate.noise must lie in [0, 1), {self.noise} given."
            )
        if self.c_b is not None:
            self.c_b = _positive(self.c_b, "groundstate.c_b")


@dataclass
class EvolveOptions:
    T: float = DEFAULT_FINAL_TIME
    dt: float = DEFAULT_TIME_STEP
    record_every: int = DEFAULT_RECORD_EVERY
    init_width: float = 1.0
    init_center: Optional[Sequence[float]] = None
    init_momentum: Optional[Sequence[float]] = None
    chirp: float = 0.0
    snapshot_times: Sequence[float] = ()
    c_b: Optional[float] = None

    def __post_init__(self):
        self.T = _positive(self.T, "evolve.T")
        self.dt = _positive(self.dt, "evolve.dt")
        if self.dt > self.T:
            raise ValueError(f"evolve.dt = {self.dt} exceeds evolve.T = {self.T}.")
        self.record_every = _integer(self.record_every, "evolve.record_every")
        self.init_width = _positive(self.init_width, "evolve.init_width")
        self.init_center = _optional_numbers(self.init_center, "evolve.init_center")
        self.init_momentum = _optional_numbers(
            self.init_momentum, "evolve.init_momentum"
        )
        self.chirp = _number(self.chirp, "evolve.chirp")
        self.snapshot_times = tuple(
            _number(t, "evolve.snapshot_times") for t in _listed(self.snapshot_times)
        )
        if any(t < 0 or t > self.T for t in self.snapshot_times):
            raise ValueError(
                f"evolve.snapshot_times must lie in [0, T], "
                f"{list(self.snapshot_times)} given."
            )
        if self.c_b is not None:
            self.c_b = _positive(self.c_b, "evolve.c_b")


@dataclass
class RegimeOptions:
    c_b: Optional[float] = None
    mass: float = 1.0
    beta_values: Optional[Sequence[float]] = None
    lambda_values: Optional[Sequence[float]] = None
    minimize: bool = False
    thread_workers: int = 1

    def __post_init__(self):
        if self.c_b is not None:
            self.c_b = _positive(self.c_b, "regime.c_b")
        self.mass = _positive(self.mass, "regime.mass")
        self.beta_values = _optional_numbers(self.beta_values, "regime.beta_values")
        self.lambda_values = _optional_numbers(
            self.lambda_values, "regime.lambda_values"
        )
        if not isinstance(self.minimize, bool):
            raise ValueError(
                f"regime.minimize must be true or false, {self.minimize!r} given."
            )
        self.thread_workers = _integer(self.thread_workers, "regime.thread_workers")


@dataclass
class ReduceOptions:
    eps_values: Sequence[float] = field(default_factory=lambda: DEFAULT_EPS_LADDER)
    T: float = DEFAULT_FINAL_TIME
    dt: float = DEFAULT_TIME_STEP
    sample_times: Optional[Sequence[float]] = None
    init_width: float = 1.0
    thread_workers: int = 1

    def __post_init__(self):
        self.eps_values = tuple(
            _positive(e, "reduce.eps_values") for e in _listed(self.eps_values)
        )
        self.T = _positive(self.T, "reduce.T")
        self.dt = _positive(self.dt, "reduce.dt")
        if self.sample_times is None:
            self.sample_times = (0.25 * self.T, 0.5 * self.T, self.T)
        self.sample_times = tuple(
            _positive(t, "reduce.sample_times") for t in _listed(self.sample_times)
        )
        if any(t > self.T for t in self.sample_times):
            raise ValueError(
                f"reduce.sample_times must lie in (0, T], "
                f"{list(self.sample_times)} given."
            )
        self.init_width = _positive(self.init_width, "reduce.init_width")
        self.thread_workers = _integer(self.thread_workers, "reduce.thread_workers")


@dataclass
class KernelCheckOptions:
    abs_xi: Optional[Sequence[float]] = None
    eps_values: Optional[Sequence[float]] = None

    def __post_init__(self):
        lattice = np.geomspace(*KERNEL_CHECK_RANGE, KERNEL_CHECK_POINTS).tolist()
        for name in ("abs_xi", "eps_values"):
            value = getattr(self, name)
            value = lattice if value is None else _listed(value)
            checked = tuple(_positive(v, f"kernel_check.{name}") for v in value)
            setattr(self, name, checked)


TASK_OPTIONS: Dict[Task, Type] = {
    Task.GROUNDSTATE: GroundStateOptions,
    Task.EVOLVE: EvolveOptions,
    Task.REGIME: RegimeOptions,
    Task.REDUCE: ReduceOptions,
    Task.KERNEL_CHECK: KernelCheckOptions,
}
TOP_LEVEL_KEYS = ["task", "seed", "model", "grid", "output"] + Task.list()


@dataclass
class RunConfig:
    """
    Validated run configuration.

    Attributes:
        task (Task): What to run.
        seed (int): Seed of every random initializer.
        model (Optional[ModelSection]): Model parameters; optional only for
            `kernel_check`.
        grid (GridSection): Spatial grid.
        output (OutputSection): Output location.
        options (Any): Options of `task`, one of the `*Options` classes.
    """

    task: Task
    seed: int
    model: Optional[ModelSection]
    grid: GridSection
    output: OutputSection
    options: Any

    @cached_property
    def params(self) -> ModelParams:
        if self.model is None:
            raise ValueError(f"Task '{self.task.value}' needs a 'model' section.")
        return self.model.build()

    def spatial_grid(self) -> Grid:
        return self.grid.build(self.params.dim)

    def as_dict(self) -> Dict[str, Any]:
        """Config echo with every default filled, accepted by `parse_config`."""
        data: Dict[str, Any] = {"task": self.task.value, "seed": self.seed}
        if self.model is not None:
            data["model"] = self.model.as_dict()
        data["grid"] = asdict(self.grid)
        data["output"] = asdict(self.output)
        data[self.task.value] = asdict(self.options)
        return _plain(data)


def _plain(value: Any) -> Any:
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def _validate(config: RunConfig) -> None:
    if config.model is None:
        if config.task != Task.KERNEL_CHECK:
            raise ValueError(f"Task '{config.task.value}' needs a 'model' section.")
        return
    params = config.params
    if config.task == Task.REDUCE and params.kind not in (
        ModelKind.LIMIT_2D,
        ModelKind.LIMIT_1D,
    ):
        raise ValueError(
            f"reduce compares against Limit2D or Limit1D, "
            f"model.kind = {params.kind.value} given."
        )
    if config.task in (Task.GROUNDSTATE, Task.EVOLVE, Task.REDUCE):
        config.spatial_grid()
    if config.task == Task.EVOLVE:
        for name in ("init_center", "init_momentum"):
            value = getattr(config.options, name)
            if value is not None and len(value) != params.dim:
                raise ValueError(
                    f"evolve.{name} needs {params.dim} entries, {len(value)} given."
                )


def _choose_task(declared: Any, task: Optional[Union[Task, str]]) -> Task:
    if task is None:
        if declared is None:
            raise ValueError("The configuration does not name a task.")
        return Task.from_command(str(declared))
    chosen = task if isinstance(task, Task) else Task.from_command(task)
    if declared is not None and Task.from_command(str(declared)) != chosen:
        raise ValueError(
            f"Command '{chosen.value}' does not match task '{declared}' of the "
            f"configuration."
        )
    return chosen


def parse_config(
    text: str,
    task: Optional[Union[Task, str]] = None,
    output_directory: Optional[str] = None,
    seed: Optional[int] = None,
) -> RunConfig:
    """
    Parse and validate a YAML run configuration.

    Top-level keys are `task`, `seed`, `model`, `grid`, `output` and one
    options section per task (`groundstate`, `evolve`, `regime`, `reduce`,
    `kernel_check`). Unknown keys at any level are errors; missing optional
    keys take their defaults, which `RunConfig.as_dict` echoes.

    Args:
        text (str): YAML document.
        task (Optional[Union[Task, str]]): Task chosen on the command line;
            must agree with a `task` key in the document.
        output_directory (Optional[str]): Overrides `output.directory`.
        seed (Optional[int]): Overrides `seed`.

    Returns:
        RunConfig: Fully validated configuration.

    Raises:
        ValueError: On invalid YAML, unknown keys, type mismatches, missing
            sections and parameter combinations the model or task rejects.

    Example:
        ```python
        from gpps.run_config import parse_config

        config = parse_config(
            "task: groundstate\\n"
            "model: {kind: Limit2D, beta: 1.0}\\n"
            "grid: {extents: 8.0, points: 64}\\n"
        )
        config.options.tol
        # 1e-08
        ```
    """
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as error:
        raise ValueError(f"Run configuration is not valid YAML: {error}") from error
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ValueError(
            f"Run configuration must be a mapping, {type(data).__name__} given."
        )
    unknown = sorted(set(map(str, data)) - set(TOP_LEVEL_KEYS))
    if unknown:
        raise ValueError(
            f"Unknown top-level key(s) {unknown}; allowed: {TOP_LEVEL_KEYS}."
        )
    chosen = _choose_task(data.get("task"), task)
    for other in Task:
        if other != chosen and data.get(other.value) is not None:
            raise ValueError(
                f"Section '{other.value}' does not apply to task '{chosen.value}'."
            )

    seed = _integer(data.get("seed", 0) if seed is None else seed, "seed", minimum=0)
    model = None
    if "model" in data:
        model = _from_mapping(
            ModelSection, data["model"], "model", aliases={"lambda": "lam"}
        )
    output = _from_mapping(OutputSection, data.get("output"), "output")
    if output_directory is not None:
        output = OutputSection(directory=output_directory)

    config = RunConfig(
        task=chosen,
        seed=seed,
        model=model,
        grid=_from_mapping(GridSection, data.get("grid"), "grid"),
        output=output,
        options=_from_mapping(
            TASK_OPTIONS[chosen], data.get(chosen.value), chosen.value
        ),
    )
    _validate(config)
    return config
