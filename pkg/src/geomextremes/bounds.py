"""Monte Carlo estimators for the two ingredients of the limit-approximation
bound: the expected tuple count alpha in a scaled window and the squared
inner-integral remainder r, plus the constant-free bound shape built from
them.

Both estimators integrate against a model's i.i.d.-atom interface: k columns
of independent atoms, the functional evaluated row-wise, indicators averaged
and multiplied by the tuple-count normalizer ((t mass)^k / k! for Poisson
input, (n)_k / k! for binomial). Rare-event handling is by sample-count
adaptation only, never importance sampling: counts grow to roughly 100
expected hits, with a hard cap and an explicit no-hit flag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import as_generator

_CHUNK_ROWS = 1 << 18
_PILOT_SAMPLES = 100_000
_TARGET_HITS = 100.0
_INNER_TARGET_HITS = 2.0


@dataclass(frozen=True)
class BoundEstimate:
    """One Monte Carlo bound-term estimate.

    Attributes:
        model_tag: Model name.
        process: "poisson" or "binomial".
        scale_parameter: Intensity t or sample size n.
        window: (y1, y2] in scaled units; r estimates use (0, y).
        alpha: Window tuple-count estimate, or None when not estimated.
        alpha_se: Its standard error.
        r: Remainder estimate (max over ell), or None when not estimated.
        r_se: Its standard error.
        ell: The ell attaining the maximum, when r was estimated.
        samples: Total functional evaluations spent.
        degenerate: Degenerate tuples encountered (counted as non-hits).
        no_hits: True when no indicator fired within the sample cap.
        seed_info: Repr of the seed.
    """

    model_tag: str
    process: str
    scale_parameter: float
    window: tuple
    alpha: float | None = None
    alpha_se: float | None = None
    r: float | None = None
    r_se: float | None = None
    ell: int | None = None
    samples: int = 0
    degenerate: int = 0
    no_hits: bool = False
    seed_info: str = ""

    def __post_init__(self):
        for name in ("alpha", "alpha_se", "r", "r_se"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, float(value))
        for label, value, se in (
            ("alpha", self.alpha, self.alpha_se),
            ("r", self.r, self.r_se),
        ):
            if value is None:
                continue
            if value < 0:
                raise ValueError(f"{label} estimate must be nonnegative")
            if se is None or not math.isfinite(se):
                raise ValueError(f"{label} estimate needs a finite SE")


def _tuple_normalizer(model, scale_param: float, order: int) -> float:
    """Expected ordered-tuple count over order atoms, divided by order!."""
    if model.process == "binomial":
        n = int(scale_param)
        return math.perm(n, order) / math.factorial(order)
    return model.atom_mass(scale_param) ** order / math.factorial(order)


def _draw_columns(model, n: int, rng, scale_param: float, k: int) -> list:
    return [model.draw_atoms(n, rng, scale_param) for _ in range(k)]


def estimate_alpha(
    model,
    scale_param: float,
    y1: float,
    y2: float,
    samples: int | None = None,
    seed=0,
    max_samples: int = 50_000_000,
) -> BoundEstimate:
    """Expected number of tuples with scaled functional value in (y1, y2].

    Draws k i.i.d. atoms per row from the model's normalized driving measure,
    averages the indicator of the t^-gamma-scaled window, and multiplies by
    the tuple-count normalizer. With samples=None the count adapts to the
    indicator rate (about 100 expected hits, at least 10^5 rows, capped).

    Args:
        model: ModelSpec-like object with the atom interface.
        scale_param: Intensity t (Poisson) or point count n (binomial).
        y1, y2: Scaled window, y1 < y2.
        samples: Fixed row count; None for rate-adaptive.
        seed: Int, SeedSequence or Generator.
        max_samples: Hard cap on total rows.
    """
    if not y1 < y2:
        raise ValueError("window needs y1 < y2")
    rng = as_generator(seed)
    k = model.arity
    gamma = model.limit.gamma
    lo = float(scale_param) ** -gamma * y1
    hi = float(scale_param) ** -gamma * y2
    mult = _tuple_normalizer(model, scale_param, k)

    target = samples if samples is not None else _PILOT_SAMPLES
    target = min(int(target), max_samples)
    hits = 0
    used = 0
    degenerate = 0
    while True:
        while used < target:
            m = min(_CHUNK_ROWS, target - used)
            cols = _draw_columns(model, m, rng, scale_param, k)
            vals = model.tuple_values(*cols)
            degenerate += int(np.count_nonzero(np.isnan(vals)))
            hits += int(np.count_nonzero((vals > lo) & (vals <= hi)))
            used += m
        if samples is not None or used >= max_samples:
            break
        rate = hits / used
        if rate > 0:
            want = min(max_samples, int(max(_PILOT_SAMPLES, _TARGET_HITS / rate)))
            if want <= used:
                break
            target = want
        else:
            target = min(max_samples, 2 * used)
    p = hits / used
    alpha = mult * p
    se = mult * math.sqrt(p * (1.0 - p) / used)
    return BoundEstimate(
        model_tag=model.name,
        process=model.process,
        scale_parameter=float(scale_param),
        window=(float(y1), float(y2)),
        alpha=alpha,
        alpha_se=se,
        samples=used,
        degenerate=degenerate,
        no_hits=hits == 0,
        seed_info=repr(seed),
    )


def _indicator_means(
    model, fixed_cols: list, n_inner: int, rng, scale_param: float, threshold: float
) -> tuple:
    """Per-row inner indicator means: for each fixed atom row, the fraction
    of n_inner fresh completions with functional value <= threshold."""
    k = model.arity
    ell = len(fixed_cols)
    n_outer = fixed_cols[0].shape[0]
    rows = n_outer * n_inner
    rep_cols = [np.repeat(c, n_inner, axis=0) for c in fixed_cols]
    free_cols = _draw_columns(model, rows, rng, scale_param, k - ell)
    vals = model.tuple_values(*rep_cols, *free_cols)
    degenerate = int(np.count_nonzero(np.isnan(vals)))
    hit = (vals <= threshold).reshape(n_outer, n_inner)
    return hit.mean(axis=1), degenerate


def estimate_r(
    model,
    scale_param: float,
    y: float,
    ell_range=None,
    n_outer: int = 2000,
    inner_samples: int | None = None,
    seed=0,
    inner_cap: int = 200_000,
) -> BoundEstimate:
    """The squared-inner-integral remainder, maximized over ell.

    For each ell in {1, ..., k-1}: fix ell atoms (outer Monte Carlo), estimate
    the inner integral over the remaining k-ell atoms TWICE with independent
    draws, and average the product of the two replicas, an unbiased estimate
    of the squared inner integral. The normalizer is (t mass)^{2k-ell}
    (Poisson) or (n)_{2k-ell} (binomial). k = 1 returns the exact zero of the
    convention.

    With inner_samples=None a pilot adapts the inner count to about 2
    expected hits per replica (capped by inner_cap), keeping the product
    estimator informative without importance sampling.
    """
    if y <= 0:
        raise ValueError("threshold y must be positive")
    rng = as_generator(seed)
    k = model.arity
    window = (0.0, float(y))
    if k == 1:
        return BoundEstimate(
            model_tag=model.name,
            process=model.process,
            scale_parameter=float(scale_param),
            window=window,
            r=0.0,
            r_se=0.0,
            seed_info=repr(seed),
        )
    ells = tuple(ell_range) if ell_range is not None else tuple(range(1, k))
    if any(ell < 1 or ell >= k for ell in ells) or not ells:
        raise ValueError("ell values must lie in {1, ..., k-1}")
    gamma = model.limit.gamma
    threshold = float(scale_param) ** -gamma * float(y)
    used = 0
    degenerate = 0

    if inner_samples is None:
        cols = _draw_columns(model, _PILOT_SAMPLES, rng, scale_param, k)
        vals = model.tuple_values(*cols)
        degenerate += int(np.count_nonzero(np.isnan(vals)))
        used += _PILOT_SAMPLES
        rate = float(np.count_nonzero(vals <= threshold)) / _PILOT_SAMPLES
        if rate > 0:
            inner_samples = int(min(inner_cap, max(64, _INNER_TARGET_HITS / rate)))
        else:
            inner_samples = inner_cap

    best = None
    for ell in ells:
        mult = _tuple_normalizer(model, scale_param, 2 * k - ell) * math.factorial(
            2 * k - ell
        )
        products = np.empty(n_outer)
        chunk = max(1, _CHUNK_ROWS // inner_samples)
        done = 0
        while done < n_outer:
            m = min(chunk, n_outer - done)
            fixed = _draw_columns(model, m, rng, scale_param, ell)
            p1, d1 = _indicator_means(
                model, fixed, inner_samples, rng, scale_param, threshold
            )
            p2, d2 = _indicator_means(
                model, fixed, inner_samples, rng, scale_param, threshold
            )
            degenerate += d1 + d2
            products[done : done + m] = p1 * p2
            used += m * (ell + 2 * inner_samples * (k - ell))
            done += m
        est = mult * float(np.mean(products))
        se = mult * float(np.std(products, ddof=1) / np.sqrt(n_outer))
        if best is None or est > best[0]:
            best = (est, se, ell, bool(np.all(products == 0.0)))
    r_est, r_se, r_ell, no_hits = best
    return BoundEstimate(
        model_tag=model.name,
        process=model.process,
        scale_parameter=float(scale_param),
        window=window,
        r=r_est,
        r_se=r_se,
        ell=r_ell,
        samples=used,
        degenerate=degenerate,
        no_hits=no_hits,
        seed_info=repr(seed),
    )


def theorem_bound_shape(alpha_est, r_est, nu: float) -> float:
    """Constant-free shape of the limit-approximation bound: |nu - alpha| + r,
    plus alpha/n for binomial input. A rate diagnostic, not a certified bound
    (the theorems' constants are unknown).

    Args:
        alpha_est: BoundEstimate from estimate_alpha, or a plain alpha value.
        r_est: BoundEstimate from estimate_r, a plain r value, or None.
        nu: The limit measure of the window, beta y^tau.
    """
    binomial_n = None
    if isinstance(alpha_est, BoundEstimate):
        if alpha_est.process == "binomial":
            binomial_n = alpha_est.scale_parameter
        alpha = alpha_est.alpha
    else:
        alpha = float(alpha_est)
    if alpha is None:
        raise ValueError("alpha estimate missing")
    if r_est is None:
        r = 0.0
    elif isinstance(r_est, BoundEstimate):
        r = r_est.r if r_est.r is not None else 0.0
    else:
        r = float(r_est)
    shape = abs(float(nu) - alpha) + r
    if binomial_n is not None:
        shape += alpha / binomial_n
    return shape
