"""Run configuration: a single nested key-value file, validated into a
frozen RunConfig with field-addressed diagnostics, plus dotted-path
overrides so command-line flags can patch file values.

Config files only accept the uniform density and the Haar direction law;
custom callables are a library-level feature (build the model in Python).
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field, fields

import yaml

from .bodies import body_from_spec
from .harness import ExperimentPlan
from .models import MODEL_NAMES, build_model

_PROCESSES = ("poisson", "binomial")
_VARIANTS = ("inradius", "gilbert-edge")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


def _fail(path, msg):
    raise ConfigError(f"{path}: {msg}")


@dataclass(frozen=True)
class RunConfig:
    """Validated experiment configuration.

    ``geometry`` holds the model-specific scalars plus the observation
    window under ``body`` (a name like ``unit-square`` or a mapping).
    ``output`` holds the report path and optional table/figure directories.
    """

    model: str
    process: str = "poisson"
    variant: str = "inradius"
    geometry: dict = field(default_factory=lambda: {"body": "unit-square"})
    grid: tuple = (500,)
    replications: int = 200
    m_list: tuple = (1,)
    y_grid: tuple = (0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0)
    seed: int = 0
    threads: int = 1
    max_tuples: int = 50_000_000
    limit_samples: int = 1_000_000
    limit_seed: int = 0
    y_max: float = 8.0
    bounds_y: float | None = None
    bounds_samples: int | None = None
    output: dict = field(default_factory=lambda: {"report": "report.yaml"})


def _as_number_tuple(value, path, *, integer=False):
    if not isinstance(value, (list, tuple)) or len(value) == 0:
        _fail(path, "expected a nonempty list of numbers")
    out = []
    for i, v in enumerate(value):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            _fail(f"{path}[{i}]", f"expected a number, got {v!r}")
        if integer and v != int(v):
            _fail(f"{path}[{i}]", f"expected an integer, got {v!r}")
        out.append(int(v) if integer else float(v))
    return tuple(out)


def _as_int(value, path, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(path, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        _fail(path, f"must be at least {minimum}, got {value}")
    return value


def _as_float(value, path, *, positive=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(path, f"expected a number, got {value!r}")
    if positive and value <= 0:
        _fail(path, f"must be positive, got {value}")
    return float(value)


def _check_keys(mapping, allowed, path):
    for key in mapping:
        if key not in allowed:
            _fail(f"{path}{key}" if path else key, "unknown key")


_GEOMETRY_KEYS = ("body", "d", "k", "a", "r", "density", "direction_law")
_OUTPUT_KEYS = ("report", "tables_dir", "figures_dir")
_TOP_KEYS = tuple(f.name for f in fields(RunConfig))


def _validate_geometry(model, geometry):
    if not isinstance(geometry, dict):
        _fail("geometry", "expected a mapping")
    _check_keys(geometry, _GEOMETRY_KEYS, "geometry.")
    geo = dict(geometry)
    geo.setdefault("body", "unit-square")
    try:
        body = body_from_spec(geo["body"])
    except (ValueError, TypeError, KeyError) as exc:
        _fail("geometry.body", str(exc))

    if "d" in geo:
        d = _as_int(geo["d"], "geometry.d", minimum=1)
        if d != body.dimension:
            _fail(
                "geometry.d",
                f"value {d} does not match the body dimension {body.dimension}",
            )

    if model == "kflat_distance":
        if "k" not in geo:
            _fail("geometry.k", "kflat_distance requires k")
        k = _as_int(geo["k"], "geometry.k", minimum=1)
        d = body.dimension
        if 2 * k >= d:
            _fail(
                "geometry.k",
                f"kflat_distance requires 2k < d, got k={k}, d={d}",
            )
        _as_float(geo.get("a", 1.0), "geometry.a", positive=True)
        law = geo.get("direction_law", "haar")
        if law != "haar":
            _fail(
                "geometry.direction_law",
                f"config files support only 'haar', got {law!r}; custom "
                "direction densities are available through the library API",
            )
    else:
        for key in ("k", "a", "direction_law"):
            if key in geo:
                _fail(f"geometry.{key}", f"not a {model} parameter")

    if model == "hyperplane_simplices":
        r = _as_float(geo.get("r", 1.0), "geometry.r", positive=True)
        if r < 1:
            _fail("geometry.r", f"requires r >= 1, got {r}")
        if body.dimension != 2:
            _fail("geometry.body", "hyperplane_simplices requires dimension 2")
    elif "r" in geo:
        _fail("geometry.r", f"not a {model} parameter")

    if model == "flat_triangles":
        density = geo.get("density", "uniform")
        if density != "uniform":
            _fail(
                "geometry.density",
                f"config files support only 'uniform', got {density!r}; "
                "custom densities are available through the library API",
            )
        if body.dimension != 2:
            _fail("geometry.body", "flat_triangles requires dimension 2")
    elif "density" in geo:
        _fail("geometry.density", f"not a {model} parameter")

    return geo, body


def parse_config(data) -> RunConfig:
    """Validate a plain mapping into a RunConfig.

    Raises ConfigError naming the offending field in dotted-path form.
    """
    if not isinstance(data, dict):
        raise ConfigError("top level: expected a mapping of settings")
    _check_keys(data, _TOP_KEYS, "")

    model = data.get("model")
    if model not in MODEL_NAMES:
        _fail("model", f"expected one of {list(MODEL_NAMES)}, got {model!r}")

    process = data.get("process", "poisson")
    if process not in _PROCESSES:
        _fail("process", f"expected one of {list(_PROCESSES)}, got {process!r}")
    if process == "binomial" and model in (
        "hyperplane_simplices",
        "kflat_distance",
    ):
        _fail("process", f"{model} supports only the poisson process")

    variant = data.get("variant", "inradius")
    if variant not in _VARIANTS:
        _fail("variant", f"expected one of {list(_VARIANTS)}, got {variant!r}")
    if variant != "inradius" and model != "gilbert_voronoi":
        _fail("variant", f"not a {model} parameter")

    geometry, _ = _validate_geometry(model, data.get("geometry", {}))

    grid = _as_number_tuple(data.get("grid", (500,)), "grid")
    if any(v <= 0 for v in grid):
        _fail("grid", "values must be positive")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        _fail("grid", "values must be strictly increasing")
    if process == "binomial":
        if any(v != int(v) for v in grid):
            _fail("grid", "binomial sample sizes must be integers")
        grid = tuple(int(v) for v in grid)

    replications = _as_int(data.get("replications", 200), "replications", 1)
    m_list = _as_number_tuple(data.get("m_list", (1,)), "m_list", integer=True)
    if any(m < 1 for m in m_list):
        _fail("m_list", "orders must be at least 1")
    y_grid = _as_number_tuple(
        data.get("y_grid", RunConfig.y_grid), "y_grid"
    )
    if any(v < 0 for v in y_grid):
        _fail("y_grid", "thresholds must be nonnegative")
    if any(b <= a for a, b in zip(y_grid, y_grid[1:])):
        _fail("y_grid", "thresholds must be strictly increasing")

    seed = _as_int(data.get("seed", 0), "seed", minimum=0)
    threads = _as_int(data.get("threads", 1), "threads", minimum=1)
    max_tuples = _as_int(data.get("max_tuples", 50_000_000), "max_tuples", 1)
    limit_samples = _as_int(
        data.get("limit_samples", 1_000_000), "limit_samples", minimum=1
    )
    limit_seed = _as_int(data.get("limit_seed", 0), "limit_seed", minimum=0)
    y_max = _as_float(data.get("y_max", 8.0), "y_max", positive=True)

    bounds_y = data.get("bounds_y")
    if bounds_y is not None:
        bounds_y = _as_float(bounds_y, "bounds_y", positive=True)
    bounds_samples = data.get("bounds_samples")
    if bounds_samples is not None:
        bounds_samples = _as_int(bounds_samples, "bounds_samples", minimum=1)

    output = data.get("output", {"report": "report.yaml"})
    if not isinstance(output, dict):
        _fail("output", "expected a mapping")
    _check_keys(output, _OUTPUT_KEYS, "output.")
    output = dict(output)
    output.setdefault("report", "report.yaml")
    for key, val in output.items():
        if val is not None and (not isinstance(val, str) or not val):
            _fail(f"output.{key}", f"expected a path string, got {val!r}")

    return RunConfig(
        model=model,
        process=process,
        variant=variant,
        geometry=geometry,
        grid=grid,
        replications=replications,
        m_list=m_list,
        y_grid=y_grid,
        seed=seed,
        threads=threads,
        max_tuples=max_tuples,
        limit_samples=limit_samples,
        limit_seed=limit_seed,
        y_max=y_max,
        bounds_y=bounds_y,
        bounds_samples=bounds_samples,
        output=output,
    )


def render_config(config: RunConfig) -> str:
    """Serialize the effective config; parse(render(c)) == c."""
    data = {
        "model": config.model,
        "process": config.process,
        "variant": config.variant,
        "geometry": dict(config.geometry),
        "grid": list(config.grid),
        "replications": config.replications,
        "m_list": list(config.m_list),
        "y_grid": list(config.y_grid),
        "seed": config.seed,
        "threads": config.threads,
        "max_tuples": config.max_tuples,
        "limit_samples": config.limit_samples,
        "limit_seed": config.limit_seed,
        "y_max": config.y_max,
        "bounds_y": config.bounds_y,
        "bounds_samples": config.bounds_samples,
        "output": dict(config.output),
    }
    return yaml.safe_dump(data, sort_keys=True, default_flow_style=None)


def load_config_text(text: str, *, source: str = "<config>") -> dict:
    """Parse config text into a raw mapping; YAML syntax errors are
    reported as ConfigError with the source name and line number."""
    try:
        data = yaml.safe_load(io.StringIO(text))
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{source}, line {mark.line + 1}" if mark else source
        raise ConfigError(f"{where}: invalid syntax: {exc}") from exc
    if data is None:
        data = {}
    return data


def load_config(path) -> RunConfig:
    """Read and validate a config file."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc}") from exc
    try:
        return parse_config(load_config_text(text, source=str(path)))
    except ConfigError as exc:
        msg = str(exc)
        if not msg.startswith(str(path)):
            raise ConfigError(f"{path}: {msg}") from exc
        raise


def apply_overrides(data: dict, assignments) -> dict:
    """Apply ``key.path=value`` overrides onto a raw config mapping.

    Values are parsed with the same syntax as the file, so ``grid=[1,2]``
    and ``threads=4`` get their natural types.
    """
    out = dict(data)
    for item in assignments:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise ConfigError(
                f"override {item!r}: expected key.path=value"
            )
        try:
            value = yaml.safe_load(raw) if raw else None
        except yaml.YAMLError as exc:
            raise ConfigError(f"override {key}: invalid value {raw!r}") from exc
        node = out
        parts = key.split(".")
        for part in parts[:-1]:
            child = node.get(part)
            child = dict(child) if isinstance(child, dict) else {}
            node[part] = child
            node = child
        node[parts[-1]] = value
    return out


def model_from_config(config: RunConfig):
    """Build the wired model a RunConfig describes."""
    geo = config.geometry
    body = body_from_spec(geo.get("body", "unit-square"))
    kwargs = {
        "limit_samples": config.limit_samples,
        "limit_seed": config.limit_seed,
    }
    if config.model == "gilbert_voronoi":
        kwargs["variant"] = config.variant
    elif config.model == "hyperplane_simplices":
        kwargs["r"] = float(geo.get("r", 1.0))
    elif config.model == "kflat_distance":
        kwargs.update(
            d=body.dimension,
            k=int(geo["k"]),
            a=float(geo.get("a", 1.0)),
            y_max=config.y_max,
        )
    return build_model(config.model, body, config.process, **kwargs)


def plan_from_config(config: RunConfig, model=None) -> ExperimentPlan:
    """Build the ExperimentPlan a RunConfig describes."""
    return ExperimentPlan(
        model=model if model is not None else model_from_config(config),
        grid=config.grid,
        replications=config.replications,
        m_list=config.m_list,
        y_grid=config.y_grid,
        master_seed=config.seed,
        threads=config.threads,
        max_tuples=config.max_tuples,
        bounds_y=config.bounds_y,
        bounds_samples=config.bounds_samples,
    )
