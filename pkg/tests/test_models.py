"""Wired models: batch and generic evaluator agreement, process plumbing,
atom-interface values and constructor validation."""

import dataclasses

import numpy as np
import pytest
import yaml

from geomextremes import (
    AffineFlat,
    Hyperplane,
    MODEL_NAMES,
    PointConfiguration,
    axis_box,
    build_model,
    hyperplane_total_mass,
    scan_tuples,
    unit_cube,
    unit_square,
)


def _voronoi(**kw):
    return build_model("gilbert_voronoi", unit_square(), **kw)


def _triangles(**kw):
    kw.setdefault("limit_samples", 100_000)
    return build_model("flat_triangles", unit_square(), **kw)


def _simplices(**kw):
    kw.setdefault("limit_samples", 200_000)
    return build_model("hyperplane_simplices", unit_square(), **kw)


def _kflats(**kw):
    kw.setdefault("d", 3)
    kw.setdefault("k", 1)
    kw.setdefault("a", 1.0)
    return build_model("kflat_distance", unit_cube(3), **kw)


_CASES = (
    (_voronoi, 40.0),
    (_triangles, 25.0),
    (_simplices, 12.0),
    (_kflats, 15.0),
)


@pytest.mark.parametrize("factory,t", _CASES, ids=[n for n in MODEL_NAMES])
def test_batch_evaluator_matches_generic_scan(factory, t):
    model = factory()
    config = model.sample(t, seed=101)
    spec = model.functional(t)
    assert spec.batch_evaluator is not None
    stripped = dataclasses.replace(spec, batch_evaluator=None)
    kwargs = dict(scale=model.scale(t), gamma=model.limit.gamma)
    fast = scan_tuples(config, spec, 6, **kwargs)
    slow = scan_tuples(config, stripped, 6, **kwargs)
    assert np.array_equal(fast.raw, slow.raw)
    assert np.array_equal(fast.scaled, slow.scaled)
    assert fast.degenerate_count == slow.degenerate_count


def test_voronoi_grid_override_matches_generic_scan():
    model = _voronoi()
    config = model.sample(300.0, seed=7)
    got = model.order_statistics(config, 5, 300.0)
    spec = dataclasses.replace(model.functional(300.0), batch_evaluator=None)
    want = scan_tuples(config, spec, 5, scale=model.scale(300.0), gamma=1.0)
    assert np.array_equal(got.raw, want.raw)
    assert np.array_equal(got.scaled, want.scaled)
    assert got.scale == 300.0  # t^gamma with gamma = 1


def test_describe_is_yaml_safe_plain_data():
    for factory, _ in _CASES:
        desc = factory().describe()
        assert yaml.safe_load(yaml.safe_dump(desc)) == desc


def test_sample_types_and_binomial_count():
    assert isinstance(_voronoi().sample(30.0, seed=0), PointConfiguration)
    binom = build_model("gilbert_voronoi", unit_square(), "binomial")
    assert len(binom.sample(25, seed=0).points) == 25
    planes = _simplices().sample(10.0, seed=0)
    assert all(isinstance(p, Hyperplane) for p in planes)
    flats = _kflats().sample(10.0, seed=0)
    assert all(isinstance(f, AffineFlat) for f in flats)


def test_binomial_beta_divides_by_volume_power():
    box = axis_box([0.0, 0.0], [2.0, 2.0])
    poisson = build_model("gilbert_voronoi", box)
    binom = build_model("gilbert_voronoi", box, "binomial")
    assert poisson.limit.beta == pytest.approx(8.0 * np.pi)
    assert binom.limit.beta == pytest.approx(8.0 * np.pi / 16.0)
    assert binom.limit.tau == poisson.limit.tau


def test_triangle_poisson_beta_multiplies_by_volume_power():
    box = axis_box([0.0, 0.0], [2.0, 2.0])
    model = build_model("flat_triangles", box, limit_samples=200_000)
    # probability-normalized beta is scale invariant (1/18 for any square),
    # so the Lebesgue version is vol^3 times that
    assert abs(model.limit.beta - 64.0 / 18.0) < 4.0 * model.limit.se
    assert model.limit.se > 0


def test_hyperplane_tuple_value_conventions():
    model = _simplices()
    s = 1.0 / np.sqrt(2.0)
    # rows: proper triangle near the centre; a parallel pair; one with a
    # vertex outside the window
    c1 = np.array([[1.0, 0.0, 0.1], [1.0, 0.0, 0.1], [1.0, 0.0, 0.45]])
    c2 = np.array([[0.0, 1.0, 0.1], [1.0, 0.0, 0.2], [0.0, 1.0, 0.45]])
    c3 = np.array([[s, s, 0.3 * s], [0.0, 1.0, 0.1], [s, s, 1.0 * s]])
    vals = model.tuple_values(c1, c2, c3)
    assert vals[0] == pytest.approx((0.3 - 0.2) ** 2 / 2.0)
    assert np.isnan(vals[1])
    assert np.isinf(vals[2])


def test_kflat_tuple_value_conventions():
    model = _kflats()
    line = lambda base, direction: np.array(base + direction, dtype=float)
    c1 = np.stack([
        line([0.0, 0.0, 0.0], [1.0, 0.0, 0.0]),
        line([0.0, 0.0, 0.0], [1.0, 0.0, 0.0]),
        line([0.8, 0.0, 0.0], [0.0, 1.0, 0.0]),
    ])
    c2 = np.stack([
        line([0.0, 0.0, 0.2], [0.0, 1.0, 0.0]),
        line([0.0, 0.3, 0.0], [1.0, 0.0, 0.0]),
        line([0.8, 0.0, 0.0], [0.0, 0.0, 1.0]),
    ])
    vals = model.tuple_values(c1, c2)
    assert vals[0] == pytest.approx(0.2)  # skew pair, midpoint inside
    assert np.isnan(vals[1])  # parallel
    assert np.isinf(vals[2])  # midpoint outside the window


def test_triangle_tuple_values_flag_coincident_points():
    model = _triangles()
    c1 = np.array([[0.0, 0.0], [0.1, 0.1]])
    c2 = np.array([[1.0, 0.0], [0.1, 0.1]])
    c3 = np.array([[0.0, 1.0], [0.9, 0.2]])
    vals = model.tuple_values(c1, c2, c3)
    assert vals[0] == pytest.approx(np.pi - np.pi / 2.0)
    assert np.isnan(vals[1])


def test_atom_masses():
    assert _voronoi().atom_mass(7.0) == pytest.approx(7.0)

    simp = _simplices()
    assert simp.atom_mass(5.0) == pytest.approx(5.0 * 2.0 / np.pi, rel=1e-6)
    assert simp._mass == pytest.approx(
        hyperplane_total_mass(unit_square().centered(), 1.0)
    )

    kf = _kflats()
    t = 10.0
    rho = np.sqrt(3.0) / 2.0 + 8.0 / t**2
    assert kf.rho(t) == pytest.approx(rho)
    assert kf.atom_mass(t) == pytest.approx(t * np.pi * rho**2)


def test_scaled_statistics_use_gamma_power():
    model = _kflats()  # gamma = 2
    config = model.sample(12.0, seed=3)
    stats = model.order_statistics(config, 3, 12.0)
    assert stats.scale == pytest.approx(144.0)
    finite = np.isfinite(stats.raw)
    assert np.array_equal(stats.scaled[finite], stats.raw[finite] * 144.0)


def test_build_model_validation():
    with pytest.raises(ValueError):
        build_model("gilbert_delaunay", unit_square())
    with pytest.raises(ValueError):
        build_model("kflat_distance", unit_cube(3))  # d, k missing
    with pytest.raises(ValueError):
        build_model("flat_triangles", unit_cube(3))
    with pytest.raises(ValueError):
        build_model("hyperplane_simplices", unit_cube(3))
    with pytest.raises(ValueError):
        build_model("hyperplane_simplices", unit_square(), "binomial")
    with pytest.raises(ValueError):
        build_model("kflat_distance", unit_cube(3), "binomial", d=3, k=1)
    with pytest.raises(ValueError):
        build_model("gilbert_voronoi", unit_square(), variant="midpoint")
    with pytest.raises(ValueError):
        build_model("flat_triangles", unit_square(), density=lambda x: 1.0)
    with pytest.raises(ValueError):
        build_model("kflat_distance", unit_cube(4), d=4, k=2)
