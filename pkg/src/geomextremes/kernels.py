"""Deterministic geometric evaluations used as the symmetric functionals:
pairwise distance, largest triangle angle, simplex from hyperplanes, distance
and midpoint of two affine flats, and the subspace bracket.

Scalar operations share their arithmetic with the vectorized batch helpers so
the fast paths are bit-compatible with the reference ones. Degenerate inputs
(near-parallel hyperplanes, rank-deficient flat pairs) are flagged, never
silently propagated as NaN.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .bodies import ConvexBody
from .sampling import AffineFlat, Hyperplane

CONDITION_LIMIT = 1e12
RANK_TOL = 1e-10


@dataclass
class SimplexResult:
    """Simplex cut out by d+1 hyperplanes in R^d.

    Attributes:
        vertices: (d+1, d) array; row i solves the system omitting plane i.
        volume: d-dimensional volume, 0 when degenerate.
        contained_in_K: All vertices inside the window (convexity makes the
            vertex test exact).
        degenerate: Some d-subset was numerically singular (condition number
            above 1e12); such tuples are excluded from statistics.
    """

    vertices: np.ndarray
    volume: float
    contained_in_K: bool
    degenerate: bool = False


@dataclass
class FlatDistanceResult:
    """Distance between two affine flats and the midpoint of the realizing
    segment.

    degenerate marks rank-deficient direction spans (distance still reported
    from the minimum-norm solution, but the tuple is excluded upstream).
    """

    distance: float
    midpoint: np.ndarray
    degenerate: bool = False


def pair_distance(x1, x2) -> float:
    """Euclidean distance between two points.

    Computed as sqrt of the einsum square sum so the scalar path rounds
    identically to the vectorized pair scans (BLAS norm may fuse
    multiply-adds and drift by one ulp, breaking exact-equality contracts).
    """
    a = np.asarray(x1, dtype=float)
    b = np.asarray(x2, dtype=float)
    if a.shape != b.shape:
        raise ValueError("points must share a dimension")
    diff = a - b
    return float(np.sqrt(np.einsum("i,i->", diff, diff)))


# ---------------------------------------------------------------------------
# triangle angles
# ---------------------------------------------------------------------------


def _flatness_batch(p1: np.ndarray, p2: np.ndarray, p3: np.ndarray) -> np.ndarray:
    """pi minus the largest interior angle, vectorized over leading axes.

    Computed as the sum of the two angles adjacent to the longest side, each
    via atan2, which stays accurate for near-collinear triples where the
    arccos route loses half the digits.
    """
    d12 = np.einsum("...i,...i->...", p1 - p2, p1 - p2)
    d13 = np.einsum("...i,...i->...", p1 - p3, p1 - p3)
    d23 = np.einsum("...i,...i->...", p2 - p3, p2 - p3)
    if np.any(d12 == 0) or np.any(d13 == 0) or np.any(d23 == 0):
        raise ValueError("degenerate triangle")

    def angle(at, b, c):
        u = b - at
        v = c - at
        cross = u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]
        dot = np.einsum("...i,...i->...", u, v)
        return np.arctan2(np.abs(cross), dot)

    # the largest angle sits opposite the longest side; pi - it equals the
    # sum of the two angles at that side's endpoints
    longest = np.argmax(np.stack([d23, d13, d12]), axis=0)
    a1 = angle(p2, p3, p1)  # at vertex 2
    a2 = angle(p3, p1, p2)  # at vertex 3
    b1 = angle(p1, p3, p2)  # at vertex 1
    s23 = a1 + a2  # longest side is (2,3): angles at 2 and 3
    s13 = b1 + a2  # longest side is (1,3): angles at 1 and 3
    s12 = b1 + a1  # longest side is (1,2): angles at 1 and 2
    return np.choose(longest, [s23, s13, s12])


def largest_angle(x1, x2, x3) -> float:
    """Largest interior angle of a planar triangle, in (0, pi].

    Collinear (but distinct) points return pi. Coincident points raise.
    """
    p1 = np.asarray(x1, dtype=float)
    p2 = np.asarray(x2, dtype=float)
    p3 = np.asarray(x3, dtype=float)
    flat = _flatness_batch(p1[None, :], p2[None, :], p3[None, :])
    return float(np.pi - flat[0])


def triangle_flatness(x1, x2, x3) -> float:
    """pi minus the largest interior angle; 0 for collinear points."""
    p1 = np.asarray(x1, dtype=float)
    p2 = np.asarray(x2, dtype=float)
    p3 = np.asarray(x3, dtype=float)
    return float(_flatness_batch(p1[None, :], p2[None, :], p3[None, :])[0])


def flatness_values(points: np.ndarray, triples: np.ndarray) -> np.ndarray:
    """Batch flatness for index triples into a point array."""
    p = points[triples]
    return _flatness_batch(p[:, 0, :], p[:, 1, :], p[:, 2, :])


# ---------------------------------------------------------------------------
# simplices from hyperplanes
# ---------------------------------------------------------------------------


def simplex_from_hyperplanes(
    planes: list[Hyperplane], body: ConvexBody
) -> SimplexResult:
    """Simplex whose facets lie on d+1 hyperplanes in R^d.

    Vertex i solves the d x d system omitting plane i; the simplex volume is
    |det(v_1 - v_0, ..., v_d - v_0)| / d!. Near-parallel subsets (condition
    number above 1e12) flag the tuple degenerate.
    """
    d = len(planes) - 1
    if d < 1:
        raise ValueError("need d+1 hyperplanes in R^d")
    normals = np.array([p.normal for p in planes], dtype=float)
    offsets = np.array([p.offset for p in planes], dtype=float)
    if normals.shape[1] != d:
        raise ValueError("need exactly d+1 hyperplanes in R^d")
    vertices = np.empty((d + 1, d))
    for i in range(d + 1):
        rows = [j for j in range(d + 1) if j != i]
        a = normals[rows]
        if np.linalg.cond(a) > CONDITION_LIMIT:
            return SimplexResult(
                vertices=np.full((d + 1, d), np.nan),
                volume=0.0,
                contained_in_K=False,
                degenerate=True,
            )
        vertices[i] = np.linalg.solve(a, offsets[rows])
    edges = vertices[1:] - vertices[0]
    volume = abs(float(np.linalg.det(edges))) / factorial(d)
    contained = bool(np.all(body.contains(vertices)))
    return SimplexResult(vertices, volume, contained, False)


def line_triple_areas(
    normals: np.ndarray,
    offsets: np.ndarray,
    triples: np.ndarray,
    body: ConvexBody,
) -> tuple:
    """Areas of triangles formed by line triples in the plane (batch).

    Args:
        normals: (n, 2) unit normals.
        offsets: (n,) offsets.
        triples: (m, 3) integer index triples.
        body: Containment window.

    Returns:
        (areas, contained, degenerate): (m,) float areas, (m,) bool containment
        flags, (m,) bool degeneracy flags (any pairwise intersection with
        |cross of normals| <= 1/1e12).
    """
    i, j, k = triples[:, 0], triples[:, 1], triples[:, 2]

    def intersect(a, b):
        ua, ub = normals[a], normals[b]
        det = ua[:, 0] * ub[:, 1] - ua[:, 1] * ub[:, 0]
        bad = np.abs(det) <= 1.0 / CONDITION_LIMIT
        safe = np.where(bad, 1.0, det)
        x = (offsets[a] * ub[:, 1] - offsets[b] * ua[:, 1]) / safe
        y = (offsets[b] * ua[:, 0] - offsets[a] * ub[:, 0]) / safe
        return np.stack([x, y], axis=1), bad

    v1, bad1 = intersect(j, k)
    v2, bad2 = intersect(i, k)
    v3, bad3 = intersect(i, j)
    degenerate = bad1 | bad2 | bad3
    e1 = v2 - v1
    e2 = v3 - v1
    areas = 0.5 * np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    contained = body.contains(v1) & body.contains(v2) & body.contains(v3)
    contained &= ~degenerate
    return areas, contained, degenerate


# ---------------------------------------------------------------------------
# affine flats
# ---------------------------------------------------------------------------


def flat_distance(e: AffineFlat, f: AffineFlat) -> FlatDistanceResult:
    """Distance between two k-flats and the midpoint of the realizing segment.

    Solves the joint least-squares problem min ||(x_E + U a) - (x_F + V b)||
    over the coefficient vectors. A combined direction span of rank below 2k
    (smallest singular value <= 1e-10) flags the pair degenerate; the
    minimum-norm solution still yields the reported distance.
    """
    u = e.basis_matrix()
    v = f.basis_matrix()
    if u.shape != v.shape:
        raise ValueError("flats must share (d, k)")
    xe = np.asarray(e.base, dtype=float)
    xf = np.asarray(f.base, dtype=float)
    a = np.hstack([u, -v])
    rhs = xf - xe
    coef, _, rank, sv = np.linalg.lstsq(a, rhs, rcond=None)
    degenerate = bool(sv.size and sv[-1] <= RANK_TOL) or rank < a.shape[1]
    k = u.shape[1]
    pe = xe + u @ coef[:k]
    pf = xf + v @ coef[k:]
    dist = float(np.linalg.norm(pe - pf))
    return FlatDistanceResult(dist, (pe + pf) / 2.0, degenerate)


def line_pair_geometry(
    bases: np.ndarray, dirs: np.ndarray, pairs: np.ndarray
) -> tuple:
    """Distance and midpoint for pairs of lines (k = 1), vectorized.

    Args:
        bases: (n, d) base points.
        dirs: (n, d) unit direction vectors.
        pairs: (m, 2) integer index pairs.

    Returns:
        (distances, midpoints, degenerate): (m,), (m, d), (m,) arrays. Pairs
        with |<u_i, u_j>| = 1 within 1e-20 of exactly parallel are flagged
        degenerate with distance 0 placeholder.
    """
    i, j = pairs[:, 0], pairs[:, 1]
    ui, uj = dirs[i], dirs[j]
    b = bases[j] - bases[i]
    g = np.einsum("ij,ij->i", ui, uj)
    denom = 1.0 - g * g
    # smallest singular value of [u_i, -u_j] is sqrt(1 - |g|)
    degenerate = (1.0 - np.abs(g)) <= RANK_TOL**2
    safe = np.where(degenerate, 1.0, denom)
    bi = np.einsum("ij,ij->i", ui, b)
    bj = np.einsum("ij,ij->i", uj, b)
    s = (bi - g * bj) / safe
    r = (g * bi - bj) / safe
    pe = bases[i] + s[:, None] * ui
    pf = bases[j] + r[:, None] * uj
    diff = pe - pf
    dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    mid = (pe + pf) / 2.0
    dist = np.where(degenerate, 0.0, dist)
    return dist, mid, degenerate


def subspace_bracket(l_basis: np.ndarray, m_basis: np.ndarray) -> float:
    """2k-volume of the parallelepiped spanned by two orthonormal k-bases.

    1 when the spans are orthogonal, 0 when they intersect nontrivially.
    """
    a = np.hstack([np.asarray(l_basis, dtype=float), np.asarray(m_basis, dtype=float)])
    gram = a.T @ a
    det = float(np.linalg.det(gram))
    return float(np.sqrt(max(det, 0.0)))


def subspace_bracket_batch(l_bases: np.ndarray, m_bases: np.ndarray) -> np.ndarray:
    """Batch subspace bracket over (n, d, k) stacks of bases."""
    a = np.concatenate([l_bases, m_bases], axis=2)
    gram = np.einsum("nij,nik->njk", a, a)
    det = np.linalg.det(gram)
    return np.sqrt(np.clip(det, 0.0, None))
