"""Limit laws for the smallest values of geometric functionals: the scaling
exponent gamma, the Weibull parameters (beta, tau), and the order-m limit
survival function, per model.

beta comes in closed form where one exists and by seeded Monte Carlo
integration with a reported standard error otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .bodies import ConvexBody, unit_ball_volume
from .kernels import subspace_bracket_batch
from .rng import as_generator
from .sampling import (
    DirectionLaw,
    _haar_bases_batch,
    _uniform_sphere,
    hyperplane_total_mass,
    sample_binomial_points,
    sample_hyperplane_atoms,
    uniform_in_body,
)

_PARALLEL_TOL = 1e-12


@dataclass(frozen=True)
class WeibullLimit:
    """Limit of the scaled order statistics: P(scaled M^(m) > y) tends to
    exp(-beta y^tau) times the order-m Poisson partial sum.

    Attributes:
        beta: Scale constant of the limit intensity.
        tau: Power of the limit intensity.
        gamma: Scaling exponent applied to the raw statistics (t^gamma).
        provenance: "closed-form", "quadrature" or "monte-carlo".
        se: Standard error of beta when estimated, else 0.
    """

    beta: float
    tau: float
    gamma: float
    provenance: str = "closed-form"
    se: float = 0.0

    def __post_init__(self):
        for name in ("beta", "tau", "gamma", "se"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.beta <= 0 or self.tau <= 0:
            raise ValueError("beta and tau must be positive")


def weibull_survival(lim: WeibullLimit, y, m: int = 1):
    """Limit survival of the m-th order statistic at y >= 0.

    exp(-beta y^tau) * sum_{i<m} (beta y^tau)^i / i!, evaluated with running
    partial products so large m stays overflow-free. Vectorized over y.

    Args:
        lim: The limit law.
        y: Scalar or array of nonnegative thresholds.
        m: Order of the statistic, m >= 1.
    """
    if m < 1:
        raise ValueError("order m must be at least 1")
    arr = np.asarray(y, dtype=float)
    if np.any(arr < 0):
        raise ValueError("thresholds must be nonnegative")
    lam = lim.beta * arr**lim.tau
    term = np.ones_like(lam)
    total = np.ones_like(lam)
    for i in range(1, m):
        term = term * lam / i
        total = total + term
    out = np.exp(-lam) * total
    return float(out) if np.isscalar(y) or arr.ndim == 0 else out


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------


def limit_gilbert_voronoi(
    body: ConvexBody, d: int | None = None, variant: str = "inradius"
) -> WeibullLimit:
    """Limit for the smallest nucleus-centred cell inradii (or shortest
    edge lengths) of a Poisson or binomial mosaic.

    variant "inradius": functional is half the pairwise distance;
    beta = 2^{d-1} kappa_d vol(K). variant "gilbert-edge": functional is the
    pairwise distance itself; beta = kappa_d vol(K) / 2. Both share
    tau = d, gamma = 2/d.
    """
    d = body.dimension if d is None else d
    if d != body.dimension:
        raise ValueError("dimension disagrees with the window")
    if d < 1:
        raise ValueError("dimension must be at least 1")
    kd = unit_ball_volume(d)
    if variant == "inradius":
        beta = 2 ** (d - 1) * kd * body.volume
    elif variant == "gilbert-edge":
        beta = kd * body.volume / 2.0
    else:
        raise ValueError("variant must be 'inradius' or 'gilbert-edge'")
    return WeibullLimit(beta=beta, tau=float(d), gamma=2.0 / d)


def limit_flat_triangles(
    body: ConvexBody,
    density=None,
    density_sup: float | None = None,
    n_samples: int = 1_000_000,
    gauss_order: int = 32,
    seed=0,
) -> WeibullLimit:
    """Limit for the flattest triangles (pi minus the largest angle).

    beta integrates s(1-s) * phi(s x1 + (1-s) x2) * ||x1 - x2||^2 over the
    chord parameter s in [0,1] and the pair (x1, x2) from the point law:
    fixed-order Gauss-Legendre in s, Monte Carlo over the pairs.
    tau = 1, gamma = 3.

    Args:
        body: Window K.
        density: Probability density of the point law w.r.t. Lebesgue on K;
            None means uniform (constant 1/vol).
        density_sup: Sup bound of the density (required with density).
        n_samples: Monte Carlo pair count.
        gauss_order: Gauss-Legendre order for the s-integral.
        seed: Int, SeedSequence or Generator.
    """
    rng = as_generator(seed)
    nodes, weights = np.polynomial.legendre.leggauss(gauss_order)
    s = (nodes + 1.0) / 2.0
    w = weights / 2.0
    if density is None:
        phi_val = 1.0 / body.volume
        x1 = uniform_in_body(body, n_samples, rng)
        x2 = uniform_in_body(body, n_samples, rng)
        inner = float(np.sum(w * s * (1 - s))) * phi_val
        diff = x1 - x2
        vals = inner * np.einsum("ij,ij->i", diff, diff)
    else:
        x1 = sample_binomial_points(
            body, n_samples, rng, density=density, density_sup=density_sup
        ).points
        x2 = sample_binomial_points(
            body, n_samples, rng, density=density, density_sup=density_sup
        ).points
        chord = (
            s[None, :, None] * x1[:, None, :] + (1 - s)[None, :, None] * x2[:, None, :]
        )
        phi_on_chord = np.asarray(
            density(chord.reshape(-1, body.dimension)), dtype=float
        ).reshape(n_samples, gauss_order)
        if np.any(~np.isfinite(phi_on_chord)):
            raise ValueError("density returned non-finite values on chords")
        inner = phi_on_chord @ (w * s * (1 - s))
        diff = x1 - x2
        vals = inner * np.einsum("ij,ij->i", diff, diff)
    beta = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / np.sqrt(n_samples))
    return WeibullLimit(beta=beta, tau=1.0, gamma=3.0, provenance="monte-carlo", se=se)


def haar_bracket_mean(d: int, k: int) -> float:
    """Closed-form mean of the subspace bracket of two independent Haar
    k-spans in R^d: C(d-k,k) kappa_{d-k}^2 / (C(d,k) kappa_d kappa_{d-2k})."""
    if 2 * k > d:
        raise ValueError("bracket mean needs 2k <= d")
    num = comb(d - k, k) * unit_ball_volume(d - k) ** 2
    den = comb(d, k) * unit_ball_volume(d) * unit_ball_volume(d - 2 * k)
    return float(num / den)


def bracket_mean_mc(
    d: int, k: int, law: DirectionLaw | None = None, n_samples: int = 1_000_000, seed=0
) -> tuple:
    """Monte Carlo mean of the subspace bracket over an independent pair of
    direction spans. Returns (mean, standard error)."""
    law = law or DirectionLaw()
    rng = as_generator(seed)
    from .sampling import _directions_batch

    l_spans = _directions_batch(law, d, k, n_samples, rng)
    m_spans = _directions_batch(law, d, k, n_samples, rng)
    vals = subspace_bracket_batch(l_spans, m_spans)
    return float(np.mean(vals)), float(np.std(vals, ddof=1) / np.sqrt(n_samples))


def limit_kflats(
    d: int,
    k: int,
    a: float,
    body: ConvexBody,
    law: DirectionLaw | None = None,
    n_samples: int = 1_000_000,
    seed=0,
) -> WeibullLimit:
    """Limit for the smallest a-th-power distances between k-flat pairs whose
    midpoint falls in the window.

    beta = (vol(K)/2) kappa_{d-2k} E[bracket]; the bracket expectation is
    closed-form for Haar directions, Monte Carlo otherwise.
    tau = (d-2k)/a, gamma = 2a/(d-2k).
    """
    if 2 * k >= d:
        raise ValueError("non-intersecting regime requires 2k < d")
    if a <= 0:
        raise ValueError("distance power a must be positive")
    law = law or DirectionLaw()
    tau = (d - 2 * k) / a
    gamma = 2.0 * a / (d - 2 * k)
    front = body.volume / 2.0 * unit_ball_volume(d - 2 * k)
    if law.kind == "haar":
        return WeibullLimit(
            beta=front * haar_bracket_mean(d, k), tau=tau, gamma=gamma
        )
    mean, se = bracket_mean_mc(d, k, law, n_samples, seed)
    return WeibullLimit(
        beta=front * mean,
        tau=tau,
        gamma=gamma,
        provenance="monte-carlo",
        se=front * se,
    )


# ---------------------------------------------------------------------------
# hyperplane simplices (Monte Carlo beta)
# ---------------------------------------------------------------------------


def hyperplane_simplex_integrand(
    normals1: np.ndarray,
    offsets1: np.ndarray,
    normals2: np.ndarray,
    offsets2: np.ndarray,
    sphere_u: np.ndarray,
    body: ConvexBody,
    r: float,
) -> tuple:
    """Vectorized integrand for the d=2 smallest-simplex limit constant.

    For each sample: z is the intersection of the two lines; the third line
    sits at unit distance from z in direction u; the triangle (z and the two
    cuts) has area sin(phi) / (2 |u.w1| |u.w2|) with w_i the line directions.
    Contribution: 1{z in K} |u.z|^{r-1} area^{-1/2}.

    Returns:
        (values, degenerate_mask): parallel line pairs are flagged, not valued.
    """
    det = normals1[:, 0] * normals2[:, 1] - normals1[:, 1] * normals2[:, 0]
    degenerate = np.abs(det) <= _PARALLEL_TOL
    safe = np.where(degenerate, 1.0, det)
    zx = (offsets1 * normals2[:, 1] - offsets2 * normals1[:, 1]) / safe
    zy = (offsets2 * normals1[:, 0] - offsets1 * normals2[:, 0]) / safe
    z = np.stack([zx, zy], axis=1)
    inside = body.contains(z) & ~degenerate
    # line directions are the rotated normals; |det of normals| = sin(phi)
    w1 = np.stack([-normals1[:, 1], normals1[:, 0]], axis=1)
    w2 = np.stack([-normals2[:, 1], normals2[:, 0]], axis=1)
    uw1 = np.abs(np.einsum("ij,ij->i", sphere_u, w1))
    uw2 = np.abs(np.einsum("ij,ij->i", sphere_u, w2))
    sin_phi = np.abs(det)
    # area^{-1/2} = sqrt(2 uw1 uw2 / sin_phi); 0 when the third line is
    # parallel to either (unbounded triangle)
    inv_root_area = np.sqrt(2.0 * uw1 * uw2 / np.where(degenerate, 1.0, sin_phi))
    uz = np.abs(np.einsum("ij,ij->i", sphere_u, z))
    if r == 1.0:
        weight = 1.0
    else:
        weight = uz ** (r - 1.0)
    vals = np.where(inside, weight * inv_root_area, 0.0)
    return vals, degenerate


def limit_hyperplane_simplices(
    body: ConvexBody,
    r: float = 1.0,
    n_samples: int = 1_000_000,
    seed=0,
) -> WeibullLimit:
    """Limit for the smallest simplices cut out by (d+1)-tuples of a
    hyperplane process, d = 2 only.

    beta = mu(H)^d / (d+1)! times the Monte Carlo mean of the integrand over
    i.i.d. line pairs from the normalized hitting measure and a uniform
    sphere direction. tau = 1/d, gamma = d(d+1). Degenerate (parallel) pairs
    are skipped and counted. No convergence rate is reported for this model:
    the expected-count asymptotics depend delicately on the window boundary.

    Raises:
        ValueError: For d >= 3 windows (combinatorics out of scope) or r < 1.
    """
    d = body.dimension
    if d != 2:
        raise ValueError("smallest-simplex limit supported for d = 2 only")
    if r < 1:
        raise ValueError("distance exponent r must be at least 1")
    work = body if body.contains_origin_interior() else body.centered()
    rng = as_generator(seed)
    mass = hyperplane_total_mass(work, r)
    n1, o1 = sample_hyperplane_atoms(work, r, n_samples, rng)
    n2, o2 = sample_hyperplane_atoms(work, r, n_samples, rng)
    u = _uniform_sphere(d, n_samples, rng)
    vals, degenerate = hyperplane_simplex_integrand(n1, o1, n2, o2, u, work, r)
    good = vals[~degenerate]
    if good.size == 0:
        raise ValueError("all samples degenerate; cannot estimate beta")
    front = mass**d / 6.0
    beta = front * float(np.mean(good))
    se = front * float(np.std(good, ddof=1) / np.sqrt(good.size))
    return WeibullLimit(
        beta=beta,
        tau=1.0 / d,
        gamma=float(d * (d + 1)),
        provenance="monte-carlo",
        se=se,
    )
