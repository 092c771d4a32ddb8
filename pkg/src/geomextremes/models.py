"""Model wiring: each supported functional model bundles its process
sampler, its tuple functional, its limit law, and an i.i.d.-atom interface
for the bound integrals.

Atom batches are plain (n, width) float arrays so the bound estimators can
repeat and stack them uniformly: a point is its coordinate row, a line in
the plane is [normal_x, normal_y, offset], a k-flat is [base | direction
columns, column-major]. Batch tuple values use the conventions of the
engine: +inf for rejected tuples, NaN for degenerate ones.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache, partial

import numpy as np

from .bodies import ConvexBody, unit_ball_volume
from .engine import (
    FunctionalSpec,
    ScaledOrderStatistics,
    min_pair_distance_grid,
    scan_tuples,
)
from .kernels import (
    _flatness_batch,
    flat_distance,
    line_pair_geometry,
    line_triple_areas,
)
from .limits import (
    WeibullLimit,
    limit_flat_triangles,
    limit_gilbert_voronoi,
    limit_hyperplane_simplices,
    limit_kflats,
)
from .rng import as_generator
from .sampling import (
    DirectionLaw,
    flats_as_arrays,
    hyperplane_total_mass,
    planes_as_arrays,
    sample_binomial_points,
    sample_hyperplane_atoms,
    sample_hyperplane_process,
    sample_kflat_atoms,
    sample_kflat_process,
    sample_poisson_points,
    uniform_in_body,
)

MODEL_NAMES = (
    "gilbert_voronoi",
    "flat_triangles",
    "hyperplane_simplices",
    "kflat_distance",
)


@lru_cache(maxsize=256)
def _combination_indices(n: int, k: int) -> np.ndarray:
    """All k-subsets of range(n) as an (C(n,k), k) int array, cached."""
    if n < k:
        return np.empty((0, k), dtype=np.int64)
    count = math.comb(n, k) * k
    flat = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations(range(n), k)),
        dtype=np.int64,
        count=count,
    )
    return flat.reshape(-1, k)


class ModelSpec:
    """One functional model, fully wired.

    Subclasses fix the tuple arity k, the window, the process sampler, the
    functional (generic evaluator plus a vectorized batch path where one
    exists) and the limit law. ``process`` selects Poisson intensity t or a
    binomial sample of fixed size n; the scale parameter passed around is t
    or n accordingly, and scaled statistics use (t or n)^gamma.

    The atom interface serves the bound estimators: ``draw_atoms`` yields
    i.i.d. draws from the normalized driving measure, ``atom_mass`` its total
    (Poisson) mass, and ``tuple_values`` evaluates the functional row-wise
    across k independent atom columns.
    """

    name: str
    arity: int
    process: str
    body: ConvexBody
    limit: WeibullLimit

    def scale(self, scale_param: float) -> float:
        """t^gamma (or n^gamma) for scaled order statistics."""
        return float(scale_param) ** self.limit.gamma

    def config_size(self, config) -> int:
        return len(config)

    def sample(self, scale_param: float, seed):
        raise NotImplementedError

    def functional(self, scale_param: float) -> FunctionalSpec:
        raise NotImplementedError

    def order_statistics(
        self, config, m_max: int, scale_param: float, seed_info: str = ""
    ) -> ScaledOrderStatistics:
        """Smallest m_max functional values of one sampled configuration."""
        return scan_tuples(
            config,
            self.functional(scale_param),
            m_max,
            scale=self.scale(scale_param),
            gamma=self.limit.gamma,
            seed_info=seed_info,
        )

    def atom_mass(self, scale_param: float) -> float:
        raise NotImplementedError

    def draw_atoms(self, n: int, rng, scale_param: float) -> np.ndarray:
        raise NotImplementedError

    def tuple_values(self, *cols: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def describe(self) -> dict:
        """Plain-data model description embedded in reports."""
        return {
            "model": self.name,
            "process": self.process,
            "body": self.body.describe(),
        }


def _check_process(process: str, allowed=("poisson", "binomial")) -> str:
    if process not in allowed:
        raise ValueError(f"process must be one of {allowed}, got {process!r}")
    return process


class GilbertVoronoiModel(ModelSpec):
    """Pairwise-distance model: nucleus-centred cell inradii (f = |x-y| / 2)
    or Gilbert shortest edges (f = |x-y|)."""

    arity = 2

    def __init__(self, body: ConvexBody, process: str = "poisson",
                 variant: str = "inradius"):
        self.name = "gilbert_voronoi"
        self.process = _check_process(process)
        self.body = body
        self.variant = variant
        lim = limit_gilbert_voronoi(body, variant=variant)
        if process == "binomial":
            # beta in the binomial normalization: the driving measure is a
            # probability measure, dividing the Lebesgue beta by vol^k
            lim = WeibullLimit(
                beta=lim.beta / body.volume**self.arity,
                tau=lim.tau,
                gamma=lim.gamma,
            )
        self.limit = lim
        self._factor = 0.5 if variant == "inradius" else 1.0

    def sample(self, scale_param, seed):
        if self.process == "poisson":
            return sample_poisson_points(self.body, scale_param, seed)
        return sample_binomial_points(self.body, int(scale_param), seed)

    def _pair_value(self, x1, x2) -> float:
        diff = np.asarray(x1, dtype=float) - np.asarray(x2, dtype=float)
        return float(np.sqrt(np.sum(diff * diff))) * self._factor

    def _batch(self, config) -> tuple:
        pts = np.asarray(config.points, dtype=float)
        n = pts.shape[0]
        if n < 2:
            return np.empty(0), 0
        i, j = np.triu_indices(n, k=1)
        diff = pts[i] - pts[j]
        dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        return dist * self._factor, 0

    def functional(self, scale_param):
        return FunctionalSpec(
            arity=2,
            evaluator=self._pair_value,
            model_tag=self.name,
            batch_evaluator=self._batch,
        )

    def order_statistics(self, config, m_max, scale_param, seed_info=""):
        # grid-accelerated path; multiplying by the variant factor afterwards
        # is exact (0.5 and 1.0 are powers of two)
        stats = min_pair_distance_grid(config.points, m_max)
        raw = stats.raw * self._factor
        s = self.scale(scale_param)
        return ScaledOrderStatistics(
            self.name, self.limit.gamma, s, raw, raw * s, seed_info, 0
        )

    def atom_mass(self, scale_param):
        return scale_param * self.body.volume

    def draw_atoms(self, n, rng, scale_param):
        return uniform_in_body(self.body, n, as_generator(rng))

    def tuple_values(self, c1, c2):
        diff = c1 - c2
        return np.sqrt(np.einsum("ij,ij->i", diff, diff)) * self._factor

    def describe(self):
        return {**super().describe(), "variant": self.variant}


class FlatTrianglesModel(ModelSpec):
    """Triple model on planar point sets: f = pi minus the largest interior
    angle (small values = nearly collinear triples)."""

    arity = 3

    def __init__(self, body: ConvexBody, process: str = "poisson",
                 density=None, density_sup: float | None = None,
                 limit_samples: int = 1_000_000, limit_seed=0):
        if body.dimension != 2:
            raise ValueError("flat-triangle model requires d = 2")
        self.name = "flat_triangles"
        self.process = _check_process(process)
        if density is not None and process != "binomial":
            raise ValueError("a point density requires the binomial process")
        self.body = body
        self.density = density
        self.density_sup = density_sup
        lim = limit_flat_triangles(
            body, density, density_sup, n_samples=limit_samples, seed=limit_seed
        )
        if process == "poisson":
            # probability-measure beta -> Lebesgue-measure beta
            lim = WeibullLimit(
                beta=lim.beta * body.volume**self.arity,
                tau=lim.tau,
                gamma=lim.gamma,
                provenance=lim.provenance,
                se=lim.se * body.volume**self.arity,
            )
        self.limit = lim

    def sample(self, scale_param, seed):
        if self.process == "poisson":
            return sample_poisson_points(self.body, scale_param, seed)
        return sample_binomial_points(
            self.body, int(scale_param), seed, self.density, self.density_sup
        )

    @staticmethod
    def _flatness_masked(p1, p2, p3) -> np.ndarray:
        """Row-wise flatness with coincident points mapped to NaN instead of
        the scalar kernels' raise, so degenerate tuples are counted."""
        d12 = np.einsum("ij,ij->i", p1 - p2, p1 - p2)
        d13 = np.einsum("ij,ij->i", p1 - p3, p1 - p3)
        d23 = np.einsum("ij,ij->i", p2 - p3, p2 - p3)
        bad = (d12 == 0) | (d13 == 0) | (d23 == 0)
        if not bad.any():
            return _flatness_batch(p1, p2, p3)
        out = np.full(p1.shape[0], np.nan)
        good = ~bad
        if good.any():
            out[good] = _flatness_batch(p1[good], p2[good], p3[good])
        return out

    def _triple_value(self, x1, x2, x3):
        p = np.array([x1, x2, x3], dtype=float)
        v = self._flatness_masked(p[0:1], p[1:2], p[2:3])
        return float(v[0])

    def _batch(self, config) -> tuple:
        pts = np.asarray(config.points, dtype=float)
        triples = _combination_indices(pts.shape[0], 3)
        if triples.shape[0] == 0:
            return np.empty(0), 0
        p = pts[triples]
        vals = self._flatness_masked(p[:, 0, :], p[:, 1, :], p[:, 2, :])
        bad = np.isnan(vals)
        return vals[~bad], int(np.count_nonzero(bad))

    def functional(self, scale_param):
        return FunctionalSpec(
            arity=3,
            evaluator=self._triple_value,
            model_tag=self.name,
            batch_evaluator=self._batch,
        )

    def atom_mass(self, scale_param):
        return scale_param * self.body.volume

    def draw_atoms(self, n, rng, scale_param):
        rng = as_generator(rng)
        if self.density is None:
            return uniform_in_body(self.body, n, rng)
        return sample_binomial_points(
            self.body, n, rng, self.density, self.density_sup
        ).points

    def tuple_values(self, c1, c2, c3):
        return self._flatness_masked(c1, c2, c3)

    def describe(self):
        out = super().describe()
        out["density"] = "uniform" if self.density is None else "custom-callable"
        return out


class HyperplaneSimplicesModel(ModelSpec):
    """Smallest simplices cut out by (d+1)-subsets of a hyperplane process,
    supported for d = 2 (triangles from line triples)."""

    def __init__(self, body: ConvexBody, r: float = 1.0,
                 process: str = "poisson", limit_samples: int = 1_000_000,
                 limit_seed=0):
        if body.dimension != 2:
            raise ValueError("hyperplane-simplex model supported for d = 2 only")
        self.name = "hyperplane_simplices"
        self.process = _check_process(process, allowed=("poisson",))
        self.arity = body.dimension + 1
        self.body = body
        self.window = body if body.contains_origin_interior() else body.centered()
        self.r = float(r)
        self._mass = hyperplane_total_mass(self.window, self.r)
        self.limit = limit_hyperplane_simplices(
            self.window, self.r, n_samples=limit_samples, seed=limit_seed
        )

    def sample(self, scale_param, seed):
        return sample_hyperplane_process(self.window, self.r, scale_param, seed)

    def _triple_value(self, h1, h2, h3):
        normals = np.array([h1.normal, h2.normal, h3.normal], dtype=float)
        offsets = np.array([h1.offset, h2.offset, h3.offset], dtype=float)
        triple = np.array([[0, 1, 2]], dtype=np.int64)
        areas, contained, degenerate = line_triple_areas(
            normals, offsets, triple, self.window
        )
        if degenerate[0]:
            return float("nan")
        if not contained[0]:
            return None
        return float(areas[0])

    def _batch(self, config) -> tuple:
        normals, offsets = planes_as_arrays(config)
        n = offsets.shape[0]
        triples = _combination_indices(n, 3)
        if triples.shape[0] == 0:
            return np.empty(0), 0
        areas, contained, degenerate = line_triple_areas(
            normals, offsets, triples, self.window
        )
        return areas[contained], int(np.count_nonzero(degenerate))

    def functional(self, scale_param):
        return FunctionalSpec(
            arity=self.arity,
            evaluator=self._triple_value,
            model_tag=self.name,
            batch_evaluator=self._batch,
        )

    def atom_mass(self, scale_param):
        return scale_param * self._mass

    def draw_atoms(self, n, rng, scale_param):
        normals, offsets = sample_hyperplane_atoms(
            self.window, self.r, n, as_generator(rng)
        )
        return np.concatenate([normals, offsets[:, None]], axis=1)

    def tuple_values(self, c1, c2, c3):
        n = c1.shape[0]
        normals = np.concatenate([c[:, :2] for c in (c1, c2, c3)])
        offsets = np.concatenate([c[:, 2] for c in (c1, c2, c3)])
        idx = np.arange(n, dtype=np.int64)
        triples = np.stack([idx, idx + n, idx + 2 * n], axis=1)
        areas, contained, degenerate = line_triple_areas(
            normals, offsets, triples, self.window
        )
        out = np.where(contained, areas, np.inf)
        out[degenerate] = np.nan
        return out

    def describe(self):
        return {**super().describe(), "r": self.r}


class KFlatModel(ModelSpec):
    """Pair model on k-flats: f = d(E, F)^a for pairs whose midpoint falls in
    the window, in the non-intersecting regime 2k < d.

    The sampled window of flats (radius rho around the origin) and the
    conservative base-distance prefilter both depend on the largest scaled
    value of interest y_max: every pair with scaled value <= y_max is
    captured exactly; order statistics beyond y_max are window-truncated.
    """

    arity = 2

    def __init__(self, d: int, k: int, a: float, body: ConvexBody,
                 law: DirectionLaw | None = None, process: str = "poisson",
                 y_max: float = 8.0, limit_samples: int = 1_000_000,
                 limit_seed=0):
        if body.dimension != d:
            raise ValueError("window dimension disagrees with d")
        if 2 * k >= d:
            raise ValueError("non-intersecting regime requires 2k < d")
        self.name = "kflat_distance"
        self.process = _check_process(process, allowed=("poisson",))
        self.d = d
        self.k = k
        self.a = float(a)
        self.body = body
        self.window = body if body.contains_origin_interior() else body.centered()
        self.law = law or DirectionLaw()
        self.y_max = float(y_max)
        self.maxnorm = self.window.circumradius
        self.limit = limit_kflats(
            d, k, a, body, self.law, n_samples=limit_samples, seed=limit_seed
        )

    def delta_max(self, scale_param: float) -> float:
        """Largest flat-to-flat distance of interest at intensity t."""
        return (self.y_max * float(scale_param) ** -self.limit.gamma) ** (
            1.0 / self.a
        )

    def rho(self, scale_param: float) -> float:
        """Sampling window radius: any pair with distance <= delta_max and
        midpoint in the window has both canonical base points within rho."""
        return self.maxnorm + self.delta_max(scale_param)

    def _cut(self, scale_param: float) -> float:
        # triangle inequality through the realizing segment: base-to-base
        # distance of a contributing pair is at most 2 maxnorm + 2 delta
        return 2.0 * self.maxnorm + 2.0 * self.delta_max(scale_param)

    def sample(self, scale_param, seed):
        return sample_kflat_process(
            self.d, self.k, self.rho(scale_param), self.law, scale_param, seed
        )

    def _pair_value(self, e, f):
        if self.k == 1:
            bases = np.array([e.base, f.base], dtype=float)
            dirs = np.array(
                [e.basis_matrix()[:, 0], f.basis_matrix()[:, 0]], dtype=float
            )
            dist, mid, deg = line_pair_geometry(
                bases, dirs, np.array([[0, 1]], dtype=np.int64)
            )
            if deg[0]:
                return float("nan")
            if not self.window.contains(mid)[0]:
                return None
            return float(dist[0]) ** self.a
        res = flat_distance(e, f)
        if res.degenerate:
            return float("nan")
        if not self.window.contains(res.midpoint[None, :])[0]:
            return None
        return res.distance**self.a

    def _prefilter(self, scale_param):
        cut2 = self._cut(scale_param) ** 2

        def keep(e, f):
            diff = np.asarray(e.base, dtype=float) - np.asarray(f.base, dtype=float)
            return float(diff @ diff) <= cut2

        return keep

    def _batch(self, config, scale_param) -> tuple:
        bases, spans = flats_as_arrays(config)
        n = bases.shape[0]
        pairs = _combination_indices(n, 2)
        if pairs.shape[0] == 0:
            return np.empty(0), 0
        bd = bases[pairs[:, 0]] - bases[pairs[:, 1]]
        within = np.einsum("ij,ij->i", bd, bd) <= self._cut(scale_param) ** 2
        pairs = pairs[within]
        if pairs.shape[0] == 0:
            return np.empty(0), 0
        dist, mid, degenerate = line_pair_geometry(bases, spans[:, :, 0], pairs)
        ok = self.window.contains(mid) & ~degenerate
        return dist[ok] ** self.a, int(np.count_nonzero(degenerate))

    def functional(self, scale_param):
        batch = None
        if self.k == 1:
            batch = partial(self._batch, scale_param=scale_param)
        return FunctionalSpec(
            arity=2,
            evaluator=self._pair_value,
            model_tag=self.name,
            prefilter=self._prefilter(scale_param),
            batch_evaluator=batch,
        )

    def atom_mass(self, scale_param):
        rho = self.rho(scale_param)
        return scale_param * unit_ball_volume(self.d - self.k) * rho ** (
            self.d - self.k
        )

    def draw_atoms(self, n, rng, scale_param):
        bases, spans = sample_kflat_atoms(
            self.d, self.k, self.rho(scale_param), self.law, n, as_generator(rng)
        )
        return np.concatenate([bases, spans.reshape(n, self.d * self.k)], axis=1)

    def _unpack(self, col: np.ndarray) -> tuple:
        d, k = self.d, self.k
        return col[:, :d], col[:, d:].reshape(-1, d, k)

    def tuple_values(self, c1, c2):
        b1, s1 = self._unpack(c1)
        b2, s2 = self._unpack(c2)
        n = b1.shape[0]
        if self.k == 1:
            bases = np.concatenate([b1, b2])
            dirs = np.concatenate([s1[:, :, 0], s2[:, :, 0]])
            idx = np.arange(n, dtype=np.int64)
            pairs = np.stack([idx, idx + n], axis=1)
            dist, mid, degenerate = line_pair_geometry(bases, dirs, pairs)
            out = np.where(self.window.contains(mid), dist**self.a, np.inf)
            out[degenerate] = np.nan
            return out
        out = np.empty(n)
        for i in range(n):
            e = _RawFlat(b1[i], s1[i])
            f = _RawFlat(b2[i], s2[i])
            res = flat_distance(e, f)
            if res.degenerate:
                out[i] = np.nan
            elif not self.window.contains(res.midpoint[None, :])[0]:
                out[i] = np.inf
            else:
                out[i] = res.distance**self.a
        return out

    def describe(self):
        return {
            **super().describe(),
            "d": self.d,
            "k": self.k,
            "a": self.a,
            "direction_law": self.law.kind,
            "y_max": self.y_max,
        }


class _RawFlat:
    """Array-backed stand-in accepted by flat_distance (skips the dataclass
    validation cost in hot loops)."""

    def __init__(self, base: np.ndarray, span: np.ndarray):
        self.base = base
        self._span = span

    def basis_matrix(self) -> np.ndarray:
        return self._span


def build_model(
    name: str,
    body: ConvexBody,
    process: str = "poisson",
    *,
    variant: str = "inradius",
    density=None,
    density_sup: float | None = None,
    r: float = 1.0,
    d: int | None = None,
    k: int | None = None,
    a: float = 1.0,
    law: DirectionLaw | None = None,
    y_max: float = 8.0,
    limit_samples: int = 1_000_000,
    limit_seed=0,
) -> ModelSpec:
    """Construct a wired ModelSpec by registry name.

    Raises:
        ValueError: Unknown name or parameters inconsistent with the model.
    """
    if name == "gilbert_voronoi":
        return GilbertVoronoiModel(body, process, variant)
    if name == "flat_triangles":
        return FlatTrianglesModel(
            body, process, density, density_sup, limit_samples, limit_seed
        )
    if name == "hyperplane_simplices":
        return HyperplaneSimplicesModel(body, r, process, limit_samples, limit_seed)
    if name == "kflat_distance":
        if d is None or k is None:
            raise ValueError("kflat model needs d and k")
        return KFlatModel(
            d, k, a, body, law, process, y_max, limit_samples, limit_seed
        )
    raise ValueError(f"unknown model {name!r}; expected one of {MODEL_NAMES}")
