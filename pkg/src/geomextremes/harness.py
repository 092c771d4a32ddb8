"""Experiment orchestration: seeded replications across an intensity grid,
scaled order-statistic samples against the limit survival, KS distances,
survival-gap rate regression and optional bound-shape estimates.

Determinism contract: the report content is a pure function of the plan.
Every replication draws from its own seed substream keyed by
(master_seed, grid_index, replication_index) and aggregation walks
replications in index order, so the thread budget never changes a single
bit of the results.
"""

from __future__ import annotations

import math
import platform
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bounds import estimate_alpha, estimate_r, theorem_bound_shape
from .limits import weibull_survival
from .rng import substream

# seed-key namespaces that cannot collide with (grid_index, rep) pairs
_ALPHA_STREAM = 1_000_003
_R_STREAM = 1_000_033

_REPORT_SCHEMA = "geomextremes/report/v1"


@dataclass(frozen=True)
class ExperimentPlan:
    """Everything run_experiment needs, seeds included.

    Attributes:
        model: A wired ModelSpec.
        grid: Sorted intensities t (Poisson) or sample sizes n (binomial).
        replications: Independent process draws per grid value.
        m_list: Which order statistics to record.
        y_grid: Thresholds for survival tables and rate deviations.
        master_seed: Root of every seed substream.
        threads: Worker threads across replications (never affects results).
        max_tuples: Resource cap on k-subsets per replication.
        bounds_y: When set, also estimate alpha/r at this threshold per grid
            value and record the constant-free bound shape.
        bounds_samples: Fixed sample count for those estimates (None adapts).
    """

    model: object
    grid: tuple
    replications: int
    m_list: tuple = (1,)
    y_grid: tuple = (0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0)
    master_seed: int = 0
    threads: int = 1
    max_tuples: int = 50_000_000
    bounds_y: float | None = None
    bounds_samples: int | None = None

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        for name in ("grid", "y_grid"):
            vals = getattr(self, name)
            if len(vals) == 0:
                raise ValueError(f"{name} must be nonempty")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise ValueError(f"{name} must be strictly increasing")
        if len(self.m_list) == 0 or any(
            m < 1 or m != int(m) for m in self.m_list
        ):
            raise ValueError("m_list must hold positive integers")
        if self.threads < 1:
            raise ValueError("thread budget must be at least 1")


@dataclass
class ExperimentReport:
    """Results of one experiment, in plain data for serialization.

    The ``metadata`` dict carries volatile execution details (wall time,
    thread budget, library versions) and is excluded from equality: two runs
    of the same plan compare equal whatever hardware produced them.
    """

    schema: str
    config: dict
    model: str
    process: str
    beta: float
    tau: float
    gamma: float
    limit_provenance: str
    limit_se: float
    grid: list
    replications: int
    m_list: list
    y_grid: list
    master_seed: int
    results: list
    degenerate_counts: list
    bound_shapes: list
    rate: dict | None
    metadata: dict = field(compare=False, default_factory=dict)


def ks_distance(sample, survival) -> float:
    """Supremum gap between the sample's ECDF and the reference distribution
    function 1 - survival, evaluated at both one-sided limits of every
    sample point (which is where the supremum of a step function lives).

    Args:
        sample: Sorted ascending, finite values only.
        survival: Vectorized y -> P(limit value > y).
    """
    x = np.asarray(sample, dtype=float)
    if x.size == 0:
        raise ValueError("ks_distance needs a nonempty sample")
    if not np.all(np.isfinite(x)):
        raise ValueError("ks_distance needs finite values only")
    if np.any(np.diff(x) < 0):
        raise ValueError("sample must be sorted ascending")
    n = x.size
    ref = 1.0 - np.asarray(survival(x), dtype=float)
    steps = np.arange(n + 1) / n
    upper = np.abs(steps[1:] - ref)
    lower = np.abs(ref - steps[:-1])
    return float(np.max(np.maximum(upper, lower)))


def two_sample_ks(sample_a, sample_b) -> float:
    """Supremum gap between two ECDFs. Values of +inf are allowed and count
    as mass never passed (the order-statistic convention for tuple-less
    replications)."""
    a = np.sort(np.asarray(sample_a, dtype=float))
    b = np.sort(np.asarray(sample_b, dtype=float))
    pts = np.concatenate([a[np.isfinite(a)], b[np.isfinite(b)]])
    if pts.size == 0:
        return 0.0
    fa = np.searchsorted(a, pts, side="right") / a.size
    fb = np.searchsorted(b, pts, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def rate_regression(grid_values, deviations) -> tuple:
    """Least-squares slope of log deviation against log t.

    Non-positive deviations (Monte Carlo noise floor) are dropped with a
    warning. Returns (slope, intercept, r_squared).
    """
    t = np.asarray(grid_values, dtype=float)
    dev = np.asarray(deviations, dtype=float)
    if t.size != dev.size:
        raise ValueError("grid and deviations must align")
    if t.size < 3:
        raise ValueError("rate regression needs at least 3 grid values")
    keep = dev > 0
    if not np.all(keep):
        warnings.warn(
            "dropping non-positive deviations from the rate regression",
            stacklevel=2,
        )
    if np.count_nonzero(keep) < 2:
        raise ValueError("too few positive deviations for a slope")
    x = np.log(t[keep])
    z = np.log(dev[keep])
    slope, intercept = np.polyfit(x, z, 1)
    fitted = slope * x + intercept
    ss_res = float(np.sum((z - fitted) ** 2))
    ss_tot = float(np.sum((z - np.mean(z)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), float(r2)


def empirical_survival(sorted_finite, infinite_count, total, y):
    """Fraction of replications whose scaled statistic exceeds y, counting
    the +inf (tuple-less) replications. Vectorized over y."""
    arr = np.asarray(sorted_finite, dtype=float)
    idx = np.searchsorted(arr, np.asarray(y, dtype=float), side="right")
    return (arr.size - idx + infinite_count) / total


def _one_replication(model, scale_param, m_max, max_tuples, master_seed, ti, rep):
    rng = substream(master_seed, ti, rep)
    config = model.sample(scale_param, rng)
    n_atoms = model.config_size(config)
    if math.comb(n_atoms, model.arity) > max_tuples:
        raise RuntimeError(
            f"resource cap exceeded: C({n_atoms}, {model.arity}) tuples "
            f"in one replication (cap {max_tuples})"
        )
    return model.order_statistics(
        config, m_max, scale_param, seed_info=f"({master_seed},{ti},{rep})"
    )


def run_experiment(plan: ExperimentPlan) -> ExperimentReport:
    """Run the full grid of seeded replications and aggregate.

    For each grid value: sample the process, scan for the smallest order
    statistics, scale by (t or n)^gamma; then per requested m build the
    finite-sample ECDF, its KS distance to the limit survival, and the
    infinite-value count. Deviations for the rate regression average the
    signed survival gap over the y-grid at the smallest requested m.
    """
    model = plan.model
    lim = model.limit
    m_max = max(plan.m_list)
    started = time.perf_counter()

    results = []
    degenerate_counts = []
    bound_shapes = []
    deviations = []
    m_rate = min(plan.m_list)
    for ti, sp in enumerate(plan.grid):
        with ThreadPoolExecutor(max_workers=plan.threads) as pool:
            futures = [
                pool.submit(
                    _one_replication,
                    model,
                    sp,
                    m_max,
                    plan.max_tuples,
                    plan.master_seed,
                    ti,
                    rep,
                )
                for rep in range(plan.replications)
            ]
            reps = [f.result() for f in futures]
        scaled = np.array([r.scaled for r in reps])
        degenerate_counts.append(
            {"t": float(sp), "count": int(sum(r.degenerate_count for r in reps))}
        )
        for m in plan.m_list:
            col = scaled[:, m - 1]
            finite = np.sort(col[np.isfinite(col)])
            entry = {
                "t": float(sp),
                "m": int(m),
                "infinite_count": int(col.size - finite.size),
                "ks": ks_distance(finite, lambda y: weibull_survival(lim, y, m))
                if finite.size
                else 1.0,
                "sample": [float(v) for v in finite],
            }
            results.append(entry)
            if m == m_rate:
                emp = empirical_survival(
                    finite,
                    entry["infinite_count"],
                    plan.replications,
                    np.asarray(plan.y_grid),
                )
                ref = weibull_survival(lim, np.asarray(plan.y_grid), m)
                deviations.append(abs(float(np.mean(emp - ref))))
        if plan.bounds_y is not None:
            a_est = estimate_alpha(
                model,
                sp,
                0.0,
                plan.bounds_y,
                samples=plan.bounds_samples,
                seed=substream(plan.master_seed, _ALPHA_STREAM, ti),
            )
            r_est = estimate_r(
                model,
                sp,
                plan.bounds_y,
                seed=substream(plan.master_seed, _R_STREAM, ti),
            )
            nu = lim.beta * plan.bounds_y**lim.tau
            bound_shapes.append(
                {
                    "t": float(sp),
                    "y": float(plan.bounds_y),
                    "alpha": a_est.alpha,
                    "alpha_se": a_est.alpha_se,
                    "r": r_est.r,
                    "r_se": r_est.r_se,
                    "nu": nu,
                    "shape": theorem_bound_shape(a_est, r_est, nu),
                }
            )

    rate = None
    if len(plan.grid) >= 3:
        try:
            slope, intercept, r2 = rate_regression(plan.grid, deviations)
            rate = {
                "slope": slope,
                "intercept": intercept,
                "r_squared": r2,
                "m": int(m_rate),
            }
        except ValueError:
            warnings.warn("rate regression skipped: deviations at noise floor")

    from . import __version__

    return ExperimentReport(
        schema=_REPORT_SCHEMA,
        config={
            **model.describe(),
            "grid": [float(v) for v in plan.grid],
            "replications": plan.replications,
            "m_list": [int(m) for m in plan.m_list],
            "y_grid": [float(y) for y in plan.y_grid],
            "master_seed": plan.master_seed,
            "max_tuples": plan.max_tuples,
            "bounds_y": plan.bounds_y,
            "bounds_samples": plan.bounds_samples,
        },
        model=model.name,
        process=model.process,
        beta=lim.beta,
        tau=lim.tau,
        gamma=lim.gamma,
        limit_provenance=lim.provenance,
        limit_se=lim.se,
        grid=[float(v) for v in plan.grid],
        replications=plan.replications,
        m_list=[int(m) for m in plan.m_list],
        y_grid=[float(y) for y in plan.y_grid],
        master_seed=plan.master_seed,
        results=results,
        degenerate_counts=degenerate_counts,
        bound_shapes=bound_shapes,
        rate=rate,
        metadata={
            "wall_time_seconds": time.perf_counter() - started,
            "threads": plan.threads,
            "package_version": __version__,
            "numpy_version": np.__version__,
            "python_version": platform.python_version(),
        },
    )
