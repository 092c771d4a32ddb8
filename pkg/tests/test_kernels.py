import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geomextremes.bodies import unit_square
from geomextremes.kernels import (
    flat_distance,
    flatness_values,
    largest_angle,
    line_pair_geometry,
    line_triple_areas,
    pair_distance,
    simplex_from_hyperplanes,
    subspace_bracket,
    subspace_bracket_batch,
    triangle_flatness,
)
from geomextremes.sampling import AffineFlat, Hyperplane

coord = st.floats(-100.0, 100.0, allow_nan=False, width=64)


def point2(draw, sep=0.0):
    return np.array([draw(coord), draw(coord)])


# -- pair distance -----------------------------------------------------------


def test_pair_distance_known_values():
    assert pair_distance([0, 0], [3, 4]) == 5.0
    assert pair_distance([2, 7], [2, 7]) == 0.0
    assert pair_distance([0, 0], [0, 1]) == 1.0


@given(st.lists(coord, min_size=2, max_size=2), st.lists(coord, min_size=2, max_size=2))
def test_pair_distance_symmetric(a, b):
    assert pair_distance(a, b) == pair_distance(b, a)


# -- triangle angles ---------------------------------------------------------


def test_largest_angle_known_triangles():
    equilateral = largest_angle([0, 0], [1, 0], [0.5, np.sqrt(3) / 2])
    assert equilateral == pytest.approx(np.pi / 3, abs=1e-12)
    assert triangle_flatness([0, 0], [1, 0], [0.5, np.sqrt(3) / 2]) == pytest.approx(
        2 * np.pi / 3, abs=1e-12
    )
    right = largest_angle([0, 0], [1, 0], [0, 1])
    assert right == pytest.approx(np.pi / 2, abs=1e-12)


def test_collinear_gives_pi():
    assert largest_angle([0, 0], [1, 0], [2, 0]) == pytest.approx(np.pi)
    assert triangle_flatness([0, 0], [1, 0], [2, 0]) == pytest.approx(0.0, abs=1e-15)


def test_coincident_points_raise():
    with pytest.raises(ValueError):
        largest_angle([0, 0], [0, 0], [1, 1])


def _angles_by_atan2(p1, p2, p3):
    # atan2 form stays well-conditioned for needle triangles
    pts = [np.asarray(p, dtype=float) for p in (p1, p2, p3)]
    out = []
    for i in range(3):
        u = pts[(i + 1) % 3] - pts[i]
        v = pts[(i + 2) % 3] - pts[i]
        cross = u[0] * v[1] - u[1] * v[0]
        out.append(np.arctan2(abs(cross), np.dot(u, v)))
    return out


@settings(max_examples=300, deadline=None)
@given(st.lists(coord, min_size=6, max_size=6))
def test_angle_properties(flat):
    p1, p2, p3 = np.array(flat[:2]), np.array(flat[2:4]), np.array(flat[4:])
    if min(
        pair_distance(p1, p2), pair_distance(p1, p3), pair_distance(p2, p3)
    ) < 1e-6:
        return
    theta = largest_angle(p1, p2, p3)
    angles = _angles_by_atan2(p1, p2, p3)
    # the largest angle matches the arccos oracle and angles sum to pi
    assert theta == pytest.approx(max(angles), abs=1e-9)
    assert np.sum(angles) == pytest.approx(np.pi, abs=1e-9)
    # permutation invariance
    assert largest_angle(p3, p1, p2) == pytest.approx(theta, abs=1e-12)
    assert largest_angle(p2, p3, p1) == pytest.approx(theta, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(
    st.lists(coord, min_size=6, max_size=6),
    st.floats(0.0, 2 * np.pi, allow_nan=False),
    st.lists(st.floats(-10, 10, allow_nan=False), min_size=2, max_size=2),
)
def test_angle_rigid_motion_invariance(flat, phi, shift):
    p1, p2, p3 = np.array(flat[:2]), np.array(flat[2:4]), np.array(flat[4:])
    if min(
        pair_distance(p1, p2), pair_distance(p1, p3), pair_distance(p2, p3)
    ) < 1e-6:
        return
    rot = np.array([[np.cos(phi), -np.sin(phi)], [np.sin(phi), np.cos(phi)]])
    moved = [rot @ p + np.asarray(shift) for p in (p1, p2, p3)]
    assert largest_angle(*moved) == pytest.approx(
        largest_angle(p1, p2, p3), abs=1e-9
    )


def test_flatness_values_batch_matches_scalar():
    rng = np.random.default_rng(0)
    pts = rng.random((40, 2))
    triples = np.array([[i, i + 1, i + 2] for i in range(38)])
    batch = flatness_values(pts, triples)
    for row, (i, j, k) in zip(batch, triples):
        assert row == triangle_flatness(pts[i], pts[j], pts[k])


# -- simplices from hyperplanes ----------------------------------------------


def _line(nx, ny, off):
    n = np.array([nx, ny], dtype=float)
    n /= np.linalg.norm(n)
    if off < 0:
        n, off = -n, -off
    return Hyperplane(normal=tuple(n), offset=float(off))


def test_simplex_known_triangle():
    # x = 0, y = 0, x + y = 1 cut out the unit right triangle
    planes = [
        _line(1, 0, 0),
        _line(0, 1, 0),
        _line(1 / np.sqrt(2), 1 / np.sqrt(2), 1 / np.sqrt(2)),
    ]
    res = simplex_from_hyperplanes(planes, unit_square())
    assert not res.degenerate
    assert res.volume == pytest.approx(0.5, abs=1e-12)
    got = {tuple(np.round(v, 9)) for v in res.vertices}
    assert got == {(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)}
    assert res.contained_in_K


def test_simplex_parallel_lines_degenerate():
    planes = [_line(1, 0, 0), _line(1, 0, 0.5), _line(0, 1, 0.3)]
    res = simplex_from_hyperplanes(planes, unit_square())
    assert res.degenerate


def test_simplex_area_consistent_with_vertices():
    rng = np.random.default_rng(4)
    for _ in range(100):
        planes = [_line(*rng.normal(size=2), rng.uniform(-1, 1)) for _ in range(3)]
        res = simplex_from_hyperplanes(planes, unit_square())
        if res.degenerate:
            continue
        a, b, c = res.vertices
        u, v = b - a, c - a
        shoelace = 0.5 * abs(u[0] * v[1] - u[1] * v[0])
        assert res.volume == pytest.approx(shoelace, abs=1e-10)


def test_line_triple_areas_matches_simplex_kernel():
    rng = np.random.default_rng(11)
    n = 30
    normals = rng.normal(size=(n, 2))
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    offsets = rng.uniform(0.0, 0.7, size=n)
    triples = np.array(
        [sorted(rng.choice(n, size=3, replace=False)) for _ in range(200)]
    )
    body = unit_square().centered()
    areas, contained, degenerate = line_triple_areas(normals, offsets, triples, body)
    for (i, j, k), area, cont, deg in zip(triples, areas, contained, degenerate):
        planes = [
            Hyperplane(normal=tuple(normals[q]), offset=float(offsets[q]))
            for q in (i, j, k)
        ]
        res = simplex_from_hyperplanes(planes, body)
        if deg or res.degenerate:
            continue
        assert area == pytest.approx(res.volume, abs=1e-10)
        assert cont == res.contained_in_K


# -- flat distances ----------------------------------------------------------


def _flat(base, dirs):
    # canonicalize: unit directions, base projected onto their complement
    basis = np.asarray(dirs, dtype=float)
    basis = np.linalg.qr(basis.T)[0].T
    x = np.asarray(base, dtype=float)
    x = x - basis.T @ (basis @ x)
    return AffineFlat(base=tuple(x), basis=tuple(map(tuple, basis)))


def test_flat_distance_known_lines():
    e = _flat([0, 0, 0], [[1, 0, 0]])
    f = _flat([0, 0, 1], [[0, 1, 0]])
    res = flat_distance(e, f)
    assert not res.degenerate
    assert res.distance == pytest.approx(1.0, abs=1e-12)
    assert res.midpoint == pytest.approx(np.array([0, 0, 0.5]), abs=1e-12)


def test_flat_distance_parallel_degenerate():
    e = _flat([0, 0, 0], [[1, 0, 0]])
    f = _flat([0, 1, 0], [[1, 0, 0]])
    assert flat_distance(e, f).degenerate


def test_flat_distance_bounded_by_base_gap():
    rng = np.random.default_rng(7)
    for _ in range(200):
        b1, b2 = rng.normal(size=(2, 3))
        d1, d2 = rng.normal(size=(2, 3))
        e = _flat(b1, [d1 / np.linalg.norm(d1)])
        f = _flat(b2, [d2 / np.linalg.norm(d2)])
        res = flat_distance(e, f)
        if res.degenerate:
            continue
        assert res.distance <= np.linalg.norm(b1 - b2) + 1e-9


def test_flat_distance_symmetry_and_rigid_invariance():
    rng = np.random.default_rng(13)
    for _ in range(100):
        b1, b2 = rng.normal(size=(2, 3))
        d1, d2 = rng.normal(size=(2, 3))
        e = _flat(b1, [d1 / np.linalg.norm(d1)])
        f = _flat(b2, [d2 / np.linalg.norm(d2)])
        res = flat_distance(e, f)
        if res.degenerate:
            continue
        assert flat_distance(f, e).distance == pytest.approx(res.distance, abs=1e-9)
        # rotate both flats by a random orthogonal map and translate
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        shift = rng.normal(size=3)
        em = _flat(q @ b1 + shift, [q @ d1 / np.linalg.norm(d1)])
        fm = _flat(q @ b2 + shift, [q @ d2 / np.linalg.norm(d2)])
        moved = flat_distance(em, fm)
        assert moved.distance == pytest.approx(res.distance, abs=1e-9)
        # midpoint is equivariant
        assert moved.midpoint == pytest.approx(q @ res.midpoint + shift, abs=1e-7)


def test_line_pair_geometry_matches_flat_distance():
    rng = np.random.default_rng(19)
    n = 50
    bases = rng.normal(size=(n, 3))
    dirs = rng.normal(size=(n, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    # canonical form: project base onto the orthogonal complement
    bases -= np.einsum("ij,ij->i", bases, dirs)[:, None] * dirs
    pairs = np.array([(i, j) for i in range(n) for j in range(i + 1, n)])
    dist, mid, degen = line_pair_geometry(bases, dirs, pairs)
    for (i, j), dv, mv, dg in zip(pairs, dist, mid, degen):
        e = _flat(bases[i], [dirs[i]])
        f = _flat(bases[j], [dirs[j]])
        res = flat_distance(e, f)
        if dg or res.degenerate:
            continue
        assert dv == pytest.approx(res.distance, abs=1e-9)
        assert mv == pytest.approx(res.midpoint, abs=1e-7)


# -- subspace bracket ---------------------------------------------------------


def test_bracket_known_values():
    e1 = np.array([[1.0], [0.0], [0.0]])
    e2 = np.array([[0.0], [1.0], [0.0]])
    assert subspace_bracket(e1, e2) == pytest.approx(1.0)
    assert subspace_bracket(e1, e1) == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=300, deadline=None)
@given(st.floats(1e-4, np.pi - 1e-4, allow_nan=False))
def test_bracket_planar_angle(theta):
    # Gram determinant 1 - cos^2 cancels below ~1e-8, hence the theta floor
    l = np.array([[1.0], [0.0], [0.0]])
    m = np.array([[np.cos(theta)], [np.sin(theta)], [0.0]])
    assert subspace_bracket(l, m) == pytest.approx(abs(np.sin(theta)), abs=1e-9)


def test_bracket_range_symmetry_and_rotation_invariance():
    rng = np.random.default_rng(23)
    for _ in range(300):
        q1, _ = np.linalg.qr(rng.normal(size=(5, 2)))
        q2, _ = np.linalg.qr(rng.normal(size=(5, 2)))
        br = subspace_bracket(q1, q2)
        assert 0.0 <= br <= 1.0 + 1e-12
        assert subspace_bracket(q2, q1) == pytest.approx(br, abs=1e-10)
        rot, _ = np.linalg.qr(rng.normal(size=(5, 5)))
        assert subspace_bracket(rot @ q1, rot @ q2) == pytest.approx(br, abs=1e-9)


def test_bracket_batch_matches_scalar():
    rng = np.random.default_rng(29)
    ls = np.linalg.qr(rng.normal(size=(40, 4, 1)))[0]
    ms = np.linalg.qr(rng.normal(size=(40, 4, 1)))[0]
    batch = subspace_bracket_batch(ls, ms)
    for lb, mb, val in zip(ls, ms, batch):
        assert val == pytest.approx(subspace_bracket(lb, mb), abs=1e-12)
