"""Convex observation windows: axis boxes, balls, convex polygons in the plane.

A ConvexBody carries the handful of geometric quantities the samplers and
limit constants need: volume, diameter, an enclosing radius measured from the
centroid, membership tests and the support function. Everything is exact for
the three supported kinds; no general convex-geometry machinery is attempted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_INTERIOR_EPS = 1e-12


@dataclass(frozen=True)
class ConvexBody:
    """A convex window in R^d.

    Fields are precomputed by the factory functions below; construct through
    those rather than directly.

    Attributes:
        kind: One of "axis-box", "ball", "convex-polygon-2d".
        dimension: Ambient dimension d.
        volume: d-dimensional Lebesgue measure of the body.
        diameter: Largest distance between two points of the body.
        circumradius: Radius of the smallest ball centred at the centroid
            that contains the body. Always at least diameter/2.
        lo, hi: Corner vectors (axis-box only).
        center, radius: Ball data (ball only).
        vertices: Counter-clockwise vertex array, shape (n, 2) (polygon only).
    """

    kind: str
    dimension: int
    volume: float
    diameter: float
    circumradius: float
    centroid: tuple = ()
    lo: tuple = ()
    hi: tuple = ()
    center: tuple = ()
    radius: float = 0.0
    vertices: tuple = ()
    # Inward edge normals and offsets for the polygon half-plane tests.
    _edge_normals: tuple = field(default=(), repr=False)
    _edge_offsets: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if self.volume <= 0:
            raise ValueError("convex body must have positive volume")
        if self.diameter <= 0:
            raise ValueError("convex body must have positive diameter")
        if self.circumradius < self.diameter / 2 - 1e-12:
            raise ValueError("circumradius below diameter/2 is impossible")

    # -- membership ---------------------------------------------------------

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Vectorized membership test.

        Args:
            points: Array of shape (d,) or (n, d).

        Returns:
            Boolean scalar or (n,) array.
        """
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        if self.kind == "axis-box":
            lo = np.asarray(self.lo)
            hi = np.asarray(self.hi)
            ok = np.all((pts >= lo) & (pts <= hi), axis=1)
        elif self.kind == "ball":
            c = np.asarray(self.center)
            ok = np.einsum("ij,ij->i", pts - c, pts - c) <= self.radius**2
        else:
            normals = np.asarray(self._edge_normals)
            offsets = np.asarray(self._edge_offsets)
            ok = np.all(pts @ normals.T >= offsets - 1e-12, axis=1)
        return bool(ok[0]) if single else ok

    def contains_origin_interior(self) -> bool:
        """True when the origin lies strictly inside the body."""
        if self.kind == "axis-box":
            return bool(
                np.all(np.asarray(self.lo) < -_INTERIOR_EPS)
                and np.all(np.asarray(self.hi) > _INTERIOR_EPS)
            )
        if self.kind == "ball":
            return float(np.linalg.norm(self.center)) < self.radius - _INTERIOR_EPS
        normals = np.asarray(self._edge_normals)
        offsets = np.asarray(self._edge_offsets)
        # origin satisfies n.x >= o strictly for every inward normal
        return bool(np.all(offsets < -_INTERIOR_EPS))

    # -- support function ----------------------------------------------------

    def support(self, directions: np.ndarray) -> np.ndarray:
        """Support function h(u) = sup over x in K of <x, u>.

        Args:
            directions: Array of shape (d,) or (n, d); need not be unit.

        Returns:
            Scalar or (n,) array of support values.
        """
        u = np.asarray(directions, dtype=float)
        single = u.ndim == 1
        u = np.atleast_2d(u)
        if self.kind == "axis-box":
            lo = np.asarray(self.lo)
            hi = np.asarray(self.hi)
            h = np.sum(np.maximum(u * lo, u * hi), axis=1)
        elif self.kind == "ball":
            h = u @ np.asarray(self.center) + self.radius * np.linalg.norm(u, axis=1)
        else:
            h = np.max(u @ np.asarray(self.vertices).T, axis=1)
        return float(h[0]) if single else h

    # -- geometry helpers ----------------------------------------------------

    def bounding_box(self) -> tuple:
        """(lo, hi) corner arrays of an axis-aligned bounding box."""
        if self.kind == "axis-box":
            return np.asarray(self.lo), np.asarray(self.hi)
        if self.kind == "ball":
            c = np.asarray(self.center)
            return c - self.radius, c + self.radius
        v = np.asarray(self.vertices)
        return v.min(axis=0), v.max(axis=0)

    def translated(self, shift: np.ndarray) -> "ConvexBody":
        """The same body translated by ``shift``."""
        s = np.asarray(shift, dtype=float)
        if self.kind == "axis-box":
            return axis_box(np.asarray(self.lo) + s, np.asarray(self.hi) + s)
        if self.kind == "ball":
            return ball(np.asarray(self.center) + s, self.radius, self.dimension)
        return convex_polygon(np.asarray(self.vertices) + s)

    def centered(self) -> "ConvexBody":
        """The body translated so its centroid sits at the origin."""
        return self.translated(-np.asarray(self.centroid))

    def describe(self) -> dict:
        """Plain-data description, round-trippable through body_from_spec."""
        if self.kind == "axis-box":
            return {
                "kind": "box",
                "lo": [float(v) for v in self.lo],
                "hi": [float(v) for v in self.hi],
            }
        if self.kind == "ball":
            return {
                "kind": "ball",
                "center": [float(v) for v in self.center],
                "radius": float(self.radius),
            }
        return {
            "kind": "polygon",
            "vertices": [[float(c) for c in v] for v in self.vertices],
        }


def axis_box(lo, hi) -> ConvexBody:
    """Axis-aligned box with corners lo <= hi componentwise."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if lo.shape != hi.shape or lo.ndim != 1:
        raise ValueError("box corners must be two equal-length vectors")
    if np.any(hi <= lo):
        raise ValueError("box corners must satisfy lo < hi componentwise")
    side = hi - lo
    centroid = (lo + hi) / 2
    diam = float(np.linalg.norm(side))
    return ConvexBody(
        kind="axis-box",
        dimension=lo.size,
        volume=float(np.prod(side)),
        diameter=diam,
        circumradius=diam / 2,
        centroid=tuple(centroid),
        lo=tuple(lo),
        hi=tuple(hi),
    )


def unit_cube(d: int) -> ConvexBody:
    """The cube [0, 1]^d."""
    return axis_box(np.zeros(d), np.ones(d))


def unit_square() -> ConvexBody:
    """The square [0, 1]^2."""
    return unit_cube(2)


def ball(center, radius: float, dimension: int | None = None) -> ConvexBody:
    """Euclidean ball."""
    center = np.asarray(center, dtype=float)
    if dimension is None:
        dimension = center.size
    if center.size != dimension:
        raise ValueError("center dimension mismatch")
    if radius <= 0:
        raise ValueError("ball radius must be positive")
    return ConvexBody(
        kind="ball",
        dimension=dimension,
        volume=float(unit_ball_volume(dimension) * radius**dimension),
        diameter=2.0 * radius,
        circumradius=float(radius),
        centroid=tuple(center),
        center=tuple(center),
        radius=float(radius),
    )


def convex_polygon(vertices) -> ConvexBody:
    """Convex polygon in the plane from its vertex list (any orientation)."""
    v = np.asarray(vertices, dtype=float)
    if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
        raise ValueError("polygon needs at least three 2d vertices")
    # shoelace signed area; flip to counter-clockwise
    x, y = v[:, 0], v[:, 1]
    cross = x * np.roll(y, -1) - np.roll(x, -1) * y
    signed_area = 0.5 * float(np.sum(cross))
    if signed_area < 0:
        v = v[::-1]
        x, y = v[:, 0], v[:, 1]
        cross = x * np.roll(y, -1) - np.roll(x, -1) * y
        signed_area = -signed_area
    if signed_area <= 0:
        raise ValueError("polygon is degenerate")
    # convexity check: all edge turns counter-clockwise
    edges = np.roll(v, -1, axis=0) - v
    turns = edges[:, 0] * np.roll(edges, -1, axis=0)[:, 1] - edges[:, 1] * np.roll(
        edges, -1, axis=0
    )[:, 0]
    if np.any(turns < -1e-12):
        raise ValueError("polygon vertices are not convex")
    cx = float(np.sum((x + np.roll(x, -1)) * cross) / (6 * signed_area))
    cy = float(np.sum((y + np.roll(y, -1)) * cross) / (6 * signed_area))
    centroid = np.array([cx, cy])
    diffs = v[:, None, :] - v[None, :, :]
    diam = float(np.sqrt(np.max(np.einsum("ijk,ijk->ij", diffs, diffs))))
    circum = float(np.max(np.linalg.norm(v - centroid, axis=1)))
    # inward normal of edge (v_i -> v_{i+1}) for a ccw polygon is the left normal
    normals = np.stack([-edges[:, 1], edges[:, 0]], axis=1)
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    offsets = np.einsum("ij,ij->i", normals, v)
    return ConvexBody(
        kind="convex-polygon-2d",
        dimension=2,
        volume=signed_area,
        diameter=diam,
        circumradius=circum,
        centroid=tuple(centroid),
        vertices=tuple(map(tuple, v)),
        _edge_normals=tuple(map(tuple, normals)),
        _edge_offsets=tuple(offsets),
    )


def body_from_spec(spec) -> ConvexBody:
    """Build a body from a plain-data description (config files, reports).

    Accepts the shorthand strings "unit-square" and "unit-cube" (the latter
    needs {"kind": "unit-cube", "d": ...} to fix the dimension) or a dict
    with kind "box" (lo, hi), "ball" (center, radius) or "polygon"
    (vertices).
    """
    if isinstance(spec, str):
        spec = {"kind": spec}
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValueError("body spec must be a kind string or a dict with 'kind'")
    kind = spec["kind"]
    if kind == "unit-square":
        return unit_square()
    if kind == "unit-cube":
        return unit_cube(int(spec.get("d", 3)))
    if kind == "box":
        return axis_box(spec["lo"], spec["hi"])
    if kind == "ball":
        return ball(spec["center"], float(spec["radius"]))
    if kind == "polygon":
        return convex_polygon(spec["vertices"])
    raise ValueError(f"unknown body kind {kind!r}")


def unit_ball_volume(d: int) -> float:
    """Volume of the d-dimensional unit ball."""
    from scipy.special import gammaln

    return float(np.exp(d / 2 * np.log(np.pi) - gammaln(d / 2 + 1)))
