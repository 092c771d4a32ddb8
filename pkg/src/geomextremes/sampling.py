"""Samplers for the four random inputs: Poisson/binomial point sets in a
convex window, hyperplane processes with a distance-power measure, and
translation invariant k-flat processes restricted to a ball window.

All samplers are pure functions of (parameters, seed): no module state, safe
to call from any number of threads. The ``*_atoms`` variants return plain
arrays of i.i.d. draws from the normalized single-object law; the process
samplers wrap them with Poisson counts and typed objects.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bodies import ConvexBody, unit_ball_volume
from .rng import as_generator

_REJECTION_FLOOR = 1e-6


@dataclass
class PointConfiguration:
    """A sampled point set in a convex window.

    Attributes:
        points: (n, d) array.
        dimension: Ambient dimension d.
        provenance: "poisson(t)" or "binomial(n)" tag string.
        seed_info: Repr of the seed used, for report metadata.
    """

    points: np.ndarray
    dimension: int
    provenance: str
    seed_info: str = ""

    def __len__(self) -> int:
        return int(self.points.shape[0])


@dataclass(frozen=True)
class Hyperplane:
    """Hyperplane u^perp + p*u with unit normal u and offset p >= 0."""

    normal: tuple
    offset: float

    def __post_init__(self):
        u = np.asarray(self.normal, dtype=float)
        if abs(float(u @ u) - 1.0) > 1e-12:
            raise ValueError("hyperplane normal must be unit length")
        if self.offset < 0:
            raise ValueError("hyperplane offset must be nonnegative")


@dataclass(frozen=True)
class AffineFlat:
    """k-flat L + x with orthonormal direction basis and base point x in L^perp.

    Attributes:
        base: Canonical base point, the point of the flat closest to the origin.
        basis: Tuple of k direction tuples, each of length d, orthonormal.
    """

    base: tuple
    basis: tuple

    def __post_init__(self):
        b = self.basis_matrix()
        gram = b.T @ b
        if not np.allclose(gram, np.eye(b.shape[1]), atol=1e-10):
            raise ValueError("flat basis must be orthonormal")
        x = np.asarray(self.base, dtype=float)
        if np.any(np.abs(x @ b) > 1e-10):
            raise ValueError("flat base point must be orthogonal to the directions")

    def basis_matrix(self) -> np.ndarray:
        return np.asarray(self.basis, dtype=float).T  # (d, k)


@dataclass(frozen=True)
class DirectionLaw:
    """Law of the direction subspace of a k-flat process.

    kind "haar" is the rotation invariant law. kind "density-with-rejection"
    reweights Haar by ``density`` (w.r.t. Haar, evaluated on a (d, k)
    orthonormal basis) bounded above by ``sup_bound``.
    """

    kind: str = "haar"
    density: object = None
    sup_bound: float = 1.0

    def __post_init__(self):
        if self.kind not in ("haar", "density-with-rejection"):
            raise ValueError("unknown direction law kind")
        if self.kind == "density-with-rejection":
            if self.density is None or self.sup_bound <= 0:
                raise ValueError("density law needs a density and a positive sup bound")


# ---------------------------------------------------------------------------
# point processes
# ---------------------------------------------------------------------------


def uniform_in_body(body: ConvexBody, n: int, rng) -> np.ndarray:
    """n i.i.d. uniform points in the body, by rejection from its bounding box."""
    rng = as_generator(rng)
    if n == 0:
        return np.empty((0, body.dimension))
    lo, hi = body.bounding_box()
    if body.kind == "axis-box":
        return lo + (hi - lo) * rng.random((n, body.dimension))
    out = np.empty((n, body.dimension))
    got = 0
    rate = body.volume / float(np.prod(hi - lo))
    while got < n:
        m = max(64, int((n - got) / rate * 1.2))
        cand = lo + (hi - lo) * rng.random((m, body.dimension))
        keep = cand[body.contains(cand)]
        take = min(n - got, keep.shape[0])
        out[got : got + take] = keep[:take]
        got += take
    return out


# Backwards-name used inside the engine's survey kernel.
_uniform_in_body = uniform_in_body


def sample_poisson_points(body: ConvexBody, t: float, seed) -> PointConfiguration:
    """Poisson process with intensity t * Lebesgue restricted to the body.

    Args:
        body: Convex window K.
        t: Intensity multiplier, t > 0.
        seed: Int, SeedSequence or Generator.

    Returns:
        PointConfiguration with count ~ Poisson(t * volume) and uniform points.
    """
    if t <= 0:
        raise ValueError("intensity t must be positive")
    rng = as_generator(seed)
    n = int(rng.poisson(t * body.volume))
    pts = uniform_in_body(body, n, rng)
    return PointConfiguration(pts, body.dimension, f"poisson({t})", repr(seed))


def sample_binomial_points(
    body: ConvexBody, n: int, seed, density=None, density_sup: float | None = None
) -> PointConfiguration:
    """Exactly n i.i.d. points, uniform or with a density against Lebesgue.

    Args:
        body: Convex window K.
        n: Number of points, n >= 1.
        seed: Int, SeedSequence or Generator.
        density: Optional density on K (vectorized (m, d) -> (m,)); points
            follow density/its integral via rejection against ``density_sup``.
        density_sup: Upper bound of the density over K; required with density.

    Raises:
        RuntimeError: If rejection acceptance falls below 1e-6 (sup bound far
            too loose for the given density).
    """
    if n < 1:
        raise ValueError("binomial point count must be at least 1")
    rng = as_generator(seed)
    if density is None:
        pts = uniform_in_body(body, n, rng)
        return PointConfiguration(pts, body.dimension, f"binomial({n})", repr(seed))
    if density_sup is None or density_sup <= 0:
        raise ValueError("density sampling needs a positive sup bound")
    out = np.empty((n, body.dimension))
    got = 0
    proposed = 0
    while got < n:
        m = max(256, 2 * (n - got))
        cand = uniform_in_body(body, m, rng)
        vals = np.asarray(density(cand), dtype=float)
        if np.any(~np.isfinite(vals)) or np.any(vals < 0):
            raise ValueError("density returned negative or non-finite values")
        if np.any(vals > density_sup * (1 + 1e-9)):
            raise ValueError("density exceeds its declared sup bound")
        keep = cand[rng.random(m) * density_sup < vals]
        proposed += m
        take = min(n - got, keep.shape[0])
        out[got : got + take] = keep[:take]
        got += take
        if proposed >= 4096 and got / proposed < _REJECTION_FLOOR:
            raise RuntimeError(
                "density rejection acceptance below 1e-6; sup bound far too loose"
            )
    return PointConfiguration(out, body.dimension, f"binomial({n})", repr(seed))


# ---------------------------------------------------------------------------
# hyperplane process
# ---------------------------------------------------------------------------


def _uniform_sphere(d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((n, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g


def hyperplane_total_mass(body: ConvexBody, r: float, n_nodes: int = 1 << 14) -> float:
    """Total measure of hyperplanes hitting the body: the mean over the unit
    sphere (normalized) of h(u)^r / r.

    Exact-to-quadrature for d = 2 (periodic trapezoid rule); a spiral-grid
    average for d = 3.
    """
    d = body.dimension
    if d == 2:
        theta = np.arange(n_nodes) * (2 * np.pi / n_nodes)
        u = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        return float(np.mean(body.support(u) ** r) / r)
    if d == 3:
        n = max(n_nodes, 1 << 14)
        i = np.arange(n) + 0.5
        phi = np.arccos(1 - 2 * i / n)
        th = np.pi * (1 + np.sqrt(5.0)) * i
        u = np.stack(
            [np.sin(phi) * np.cos(th), np.sin(phi) * np.sin(th), np.cos(phi)], axis=1
        )
        return float(np.mean(body.support(u) ** r) / r)
    raise ValueError("hyperplane measure supported for d in {2, 3}")


def sample_hyperplane_atoms(body: ConvexBody, r: float, n: int, seed) -> tuple:
    """n i.i.d. hyperplanes from the normalized hitting measure, as arrays.

    Direction u carries weight proportional to h(u)^r on the sphere
    (rejection against the sup); offset p = h(u) * U^{1/r}.

    Returns:
        (normals, offsets): (n, d) and (n,) arrays.
    """
    if not body.contains_origin_interior():
        raise ValueError("window must contain origin")
    if r < 1:
        raise ValueError("distance exponent r must be at least 1")
    rng = as_generator(seed)
    d = body.dimension
    normals = np.empty((n, d))
    h_sup = body.circumradius + float(np.linalg.norm(body.centroid))
    got = 0
    while got < n:
        m = max(64, 2 * (n - got))
        u = _uniform_sphere(d, m, rng)
        h = body.support(u)
        keep = u[rng.random(m) * h_sup**r < h**r]
        take = min(n - got, keep.shape[0])
        normals[got : got + take] = keep[:take]
        got += take
    offsets = body.support(normals) * rng.random(n) ** (1.0 / r)
    return normals, offsets


def sample_hyperplane_process(
    body: ConvexBody, r: float, t: float, seed
) -> list[Hyperplane]:
    """Poisson hyperplane process hitting the window.

    The measure on hyperplanes u^perp + p*u integrates p^{r-1} dp against the
    normalized sphere measure in u; a plane hits the window iff p <= h(u),
    which requires the origin strictly inside the window. Total mass is
    t * mean_u[h(u)^r / r].

    Args:
        body: Window with the origin strictly inside.
        r: Distance exponent, r >= 1.
        t: Intensity multiplier, t > 0.
        seed: Int, SeedSequence or Generator.

    Returns:
        List of Hyperplane, all hitting the window.
    """
    if t <= 0:
        raise ValueError("intensity t must be positive")
    rng = as_generator(seed)
    mass = hyperplane_total_mass(body, r)
    n = int(rng.poisson(t * mass))
    if n == 0:
        return []
    normals, offsets = sample_hyperplane_atoms(body, r, n, rng)
    return [
        Hyperplane(tuple(normals[i]), float(offsets[i])) for i in range(n)
    ]


# ---------------------------------------------------------------------------
# k-flat process
# ---------------------------------------------------------------------------


def haar_direction_basis(d: int, k: int, rng) -> np.ndarray:
    """Orthonormal d x k basis with rotation invariant column span."""
    rng = as_generator(rng)
    q, _ = np.linalg.qr(rng.standard_normal((d, k)))
    return q[:, :k]


def _haar_bases_batch(d: int, k: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """(n, d, k) stack of independent Haar direction bases."""
    if k == 1:
        g = rng.standard_normal((n, d))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        return g[:, :, None]
    g = rng.standard_normal((n, d, k))
    q, _ = np.linalg.qr(g)
    return q[:, :, :k]


def _complement_batch(spans: np.ndarray) -> np.ndarray:
    """(n, d, d-k) orthonormal complements of (n, d, k) spans."""
    n, d, k = spans.shape
    if d == 3 and k == 1:
        u = spans[:, :, 0]
        # seed vector least aligned with u, then two cross products
        pick = np.abs(u[:, 0]) < 0.9
        e = np.where(pick[:, None], [[1.0, 0.0, 0.0]], [[0.0, 1.0, 0.0]])
        v1 = np.cross(u, e)
        v1 /= np.linalg.norm(v1, axis=1, keepdims=True)
        v2 = np.cross(u, v1)
        return np.stack([v1, v2], axis=2)
    eye = np.broadcast_to(np.eye(d), (n, d, d))
    q, _ = np.linalg.qr(np.concatenate([spans, eye], axis=2))
    return q[:, :, k:d]


def _directions_batch(
    law: DirectionLaw, d: int, k: int, n: int, rng: np.random.Generator
) -> np.ndarray:
    if law.kind == "haar":
        return _haar_bases_batch(d, k, n, rng)
    out = np.empty((n, d, k))
    got = 0
    while got < n:
        m = max(64, 2 * (n - got))
        cand = _haar_bases_batch(d, k, m, rng)
        vals = np.array([float(law.density(cand[i])) for i in range(m)])
        if np.any(vals < 0) or np.any(vals > law.sup_bound * (1 + 1e-9)):
            raise ValueError("direction density out of declared bounds")
        keep = cand[rng.random(m) * law.sup_bound < vals]
        take = min(n - got, keep.shape[0])
        out[got : got + take] = keep[:take]
        got += take
    return out


def sample_kflat_atoms(
    d: int, k: int, rho: float, law: DirectionLaw, n: int, seed
) -> tuple:
    """n i.i.d. flats from the normalized window law, as arrays.

    Direction span from ``law``; base point uniform in the radius-rho ball of
    the span's orthogonal complement (the canonical representative).

    Returns:
        (bases, spans): (n, d) base points and (n, d, k) direction stacks.
    """
    if 2 * k >= d:
        raise ValueError("non-intersecting regime requires 2k < d")
    if rho <= 0:
        raise ValueError("window radius must be positive")
    rng = as_generator(seed)
    spans = _directions_batch(law, d, k, n, rng)
    comps = _complement_batch(spans)
    z = rng.standard_normal((n, d - k))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    radius = rho * rng.random(n) ** (1.0 / (d - k))
    bases = np.einsum("nij,nj->ni", comps, z * radius[:, None])
    # project out numerical leakage into the span
    coeff = np.einsum("nij,ni->nj", spans, bases)
    bases = bases - np.einsum("nij,nj->ni", spans, coeff)
    return bases, spans


def sample_kflat_process(
    d: int,
    k: int,
    rho: float,
    law: DirectionLaw,
    t: float,
    seed,
) -> list[AffineFlat]:
    """Translation invariant k-flat process restricted to flats passing
    within distance rho of the origin.

    Count ~ Poisson(t * kappa_{d-k} * rho^{d-k}); the caller inflates the
    window radius by the largest flat-to-flat distance of interest so that
    every contributing pair is captured.

    Args:
        d: Ambient dimension.
        k: Flat dimension with 2k < d.
        rho: Window radius.
        law: DirectionLaw for the span.
        t: Intensity multiplier, t > 0.
        seed: Int, SeedSequence or Generator.
    """
    if t <= 0:
        raise ValueError("intensity t must be positive")
    if 2 * k >= d:
        raise ValueError("non-intersecting regime requires 2k < d")
    rng = as_generator(seed)
    mass = unit_ball_volume(d - k) * rho ** (d - k)
    n = int(rng.poisson(t * mass))
    if n == 0:
        return []
    bases, spans = sample_kflat_atoms(d, k, rho, law, n, rng)
    return [
        AffineFlat(tuple(bases[i]), tuple(map(tuple, spans[i].T))) for i in range(n)
    ]


def flats_as_arrays(flats: list[AffineFlat]) -> tuple:
    """(bases, spans) arrays for batch kernels: (n, d) and (n, d, k)."""
    if not flats:
        return np.empty((0, 0)), np.empty((0, 0, 0))
    bases = np.array([f.base for f in flats], dtype=float)
    spans = np.array([f.basis_matrix() for f in flats], dtype=float)
    return bases, spans


def planes_as_arrays(planes: list[Hyperplane]) -> tuple:
    """(normals, offsets) arrays for batch kernels: (n, d) and (n,)."""
    if not planes:
        return np.empty((0, 0)), np.empty((0,))
    normals = np.array([p.normal for p in planes], dtype=float)
    offsets = np.array([p.offset for p in planes], dtype=float)
    return normals, offsets
