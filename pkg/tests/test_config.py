"""Config parsing: round-trips, field-addressed diagnostics, dotted-path
overrides and the config-to-model/plan wiring."""

import dataclasses

import numpy as np
import pytest

from geomextremes import (
    ConfigError,
    apply_overrides,
    load_config,
    load_config_text,
    model_from_config,
    parse_config,
    plan_from_config,
    render_config,
)


def _minimal(**kw):
    return {"model": "gilbert_voronoi", **kw}


_ROUND_TRIP_CASES = (
    _minimal(),
    _minimal(process="binomial", grid=[100, 200], variant="gilbert-edge"),
    {
        "model": "flat_triangles",
        "geometry": {"body": {"kind": "ball", "center": [0.0, 0.0], "radius": 2.0}},
        "replications": 50,
        "m_list": [1, 2, 3],
    },
    {
        "model": "hyperplane_simplices",
        "geometry": {"body": "unit-square", "r": 2.0},
        "bounds_y": 0.5,
        "bounds_samples": 1000,
    },
    {
        "model": "kflat_distance",
        "geometry": {"body": {"kind": "unit-cube", "d": 5}, "k": 2, "a": 2.0},
        "y_max": 4.0,
        "threads": 4,
        "output": {"report": "r.yaml", "tables_dir": "tables"},
    },
)


@pytest.mark.parametrize("raw", _ROUND_TRIP_CASES)
def test_parse_render_round_trip(raw):
    cfg = parse_config(raw)
    assert parse_config(load_config_text(render_config(cfg))) == cfg


def test_defaults_fill_in():
    cfg = parse_config(_minimal())
    assert cfg.process == "poisson"
    assert cfg.grid == (500.0,)
    assert cfg.replications == 200
    assert cfg.geometry["body"] == "unit-square"
    assert cfg.output == {"report": "report.yaml"}


@pytest.mark.parametrize(
    "raw,needle",
    [
        ({"mdoel": "gilbert_voronoi"}, "mdoel: unknown key"),
        (_minimal(geometry={"blah": 1}), "geometry.blah: unknown key"),
        (_minimal(output={"plots": "x"}), "output.plots: unknown key"),
        ({"model": "gilbert_delaunay"}, "model: expected one of"),
        (_minimal(process="bernoulli"), "process: expected one of"),
        (
            {"model": "hyperplane_simplices", "process": "binomial"},
            "process: hyperplane_simplices supports only the poisson",
        ),
        (
            {"model": "flat_triangles", "variant": "gilbert-edge"},
            "variant: not a flat_triangles parameter",
        ),
        (_minimal(grid=[100, "x"]), "grid[1]: expected a number"),
        (_minimal(grid=[200, 100]), "grid: values must be strictly increasing"),
        (_minimal(grid=[0]), "grid: values must be positive"),
        (
            _minimal(process="binomial", grid=[100.5]),
            "grid: binomial sample sizes must be integers",
        ),
        (_minimal(replications=0), "replications: must be at least 1"),
        (_minimal(m_list=[0]), "m_list: orders must be at least 1"),
        (_minimal(m_list=[1.5]), "m_list[0]: expected an integer"),
        (_minimal(y_grid=[1.0, 1.0]), "y_grid: thresholds must be strictly"),
        (_minimal(y_grid=[-1.0, 1.0]), "y_grid: thresholds must be nonnegative"),
        (_minimal(seed=-1), "seed: must be at least 0"),
        (_minimal(threads=True), "threads: expected an integer"),
        (_minimal(bounds_y=0.0), "bounds_y: must be positive"),
        (_minimal(y_max=-1.0), "y_max: must be positive"),
        (_minimal(output={"report": ""}), "output.report: expected a path string"),
        (
            {"model": "kflat_distance", "geometry": {"body": "unit-square"}},
            "geometry.k: kflat_distance requires k",
        ),
        (
            {
                "model": "kflat_distance",
                "geometry": {"body": {"kind": "unit-cube", "d": 3}, "k": 2},
            },
            "geometry.k: kflat_distance requires 2k < d, got k=2, d=3",
        ),
        (
            {
                "model": "kflat_distance",
                "geometry": {"body": {"kind": "unit-cube", "d": 5}, "k": 2,
                             "direction_law": "vmf"},
            },
            "geometry.direction_law: config files support only 'haar'",
        ),
        (
            {"model": "flat_triangles", "geometry": {"density": "gaussian"}},
            "geometry.density: config files support only 'uniform'",
        ),
        (
            {"model": "flat_triangles", "geometry": {"body": "unit-cube"}},
            "geometry.body: flat_triangles requires dimension 2",
        ),
        (_minimal(geometry={"r": 2.0}), "geometry.r: not a gilbert_voronoi"),
        (_minimal(geometry={"body": "dodecahedron"}), "geometry.body: "),
        (
            _minimal(geometry={"body": "unit-square", "d": 3}),
            "geometry.d: value 3 does not match the body dimension 2",
        ),
        ("just a string", "top level: expected a mapping"),
    ],
)
def test_field_addressed_diagnostics(raw, needle):
    with pytest.raises(ConfigError) as err:
        parse_config(raw)
    assert needle in str(err.value)


def test_apply_overrides_types_and_nesting():
    base = {"model": "gilbert_voronoi", "geometry": {"body": "unit-square"}}
    out = apply_overrides(
        base,
        [
            "grid=[100, 200]",
            "threads=4",
            "output.report=out.yaml",
            "geometry.d=2",
            "bounds_y=0.5",
        ],
    )
    assert out["grid"] == [100, 200]
    assert out["threads"] == 4
    assert out["output"] == {"report": "out.yaml"}
    assert out["geometry"] == {"body": "unit-square", "d": 2}
    assert out["bounds_y"] == 0.5
    # the input mapping is left untouched
    assert base == {"model": "gilbert_voronoi", "geometry": {"body": "unit-square"}}
    parse_config(out)


def test_apply_overrides_rejects_malformed_items():
    with pytest.raises(ConfigError):
        apply_overrides({}, ["no_equals_sign"])
    with pytest.raises(ConfigError):
        apply_overrides({}, ["grid=[unclosed"])


def test_load_config_text_reports_syntax_errors_with_line():
    with pytest.raises(ConfigError) as err:
        load_config_text("model: gilbert_voronoi\ngrid: [100,\n  oops: {", source="run.yaml")
    msg = str(err.value)
    assert "run.yaml" in msg and "line" in msg
    assert load_config_text("") == {}


def test_load_config_from_file(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("model: gilbert_voronoi\ngrid: [125, 250]\nseed: 3\n")
    cfg = load_config(path)
    assert cfg.grid == (125.0, 250.0) and cfg.seed == 3

    with pytest.raises(ConfigError, match="cannot read config"):
        load_config(tmp_path / "missing.yaml")

    bad = tmp_path / "bad.yaml"
    bad.write_text("model: gilbert_voronoi\nreplications: 0\n")
    with pytest.raises(ConfigError) as err:
        load_config(bad)
    assert str(bad) in str(err.value)


def test_model_and_plan_wiring():
    cfg = parse_config(
        {
            "model": "gilbert_voronoi",
            "variant": "gilbert-edge",
            "grid": [50, 100],
            "replications": 7,
            "m_list": [1, 2],
            "seed": 13,
            "threads": 2,
            "bounds_y": 1.0,
        }
    )
    model = model_from_config(cfg)
    assert model.limit.beta == pytest.approx(np.pi / 2.0)
    plan = plan_from_config(cfg, model)
    assert plan.model is model
    assert plan.grid == (50.0, 100.0)
    assert plan.replications == 7
    assert plan.m_list == (1, 2)
    assert plan.master_seed == 13
    assert plan.threads == 2
    assert plan.bounds_y == 1.0


def test_kflat_wiring_reads_dimension_from_body():
    cfg = parse_config(
        {
            "model": "kflat_distance",
            "geometry": {"body": {"kind": "unit-cube", "d": 5}, "k": 2},
            "y_max": 4.0,
        }
    )
    model = model_from_config(cfg)
    assert (model.d, model.k, model.a) == (5, 2, 1.0)
    assert model.y_max == 4.0
    assert model.limit.beta == pytest.approx(0.5)


def test_run_config_is_frozen():
    cfg = parse_config(_minimal())
    with pytest.raises(dataclasses.FrozenInstanceError):
        cfg.seed = 5
