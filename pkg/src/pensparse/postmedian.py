"""Spike-and-slab posterior-median thresholding for normal means.

The marginal posterior of each coefficient is a mixture of an atom at zero
(mass ``atom_prob``) and a continuous component F_c. The posterior median is
exactly zero whenever the posterior odds for zero reach the threshold
|1 - 2 F_c(0)|; below the threshold it equals a quantile of F_c pulled
toward zero by the odds, which on symmetric location-scale families takes a
double-shrinkage form. A bisection search on the raw median definition
serves as the independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .exceptions import NumericalError

BRANCH_ZERO_BY_ODDS = "zero-by-odds"
BRANCH_POSITIVE = "positive"
BRANCH_NEGATIVE = "negative"
BRANCH_ZERO_CENTERED_SLAB = "zero-by-centered-slab"


@dataclass(frozen=True)
class Normal:
    """Normal distribution with cdf/quantile, strictly increasing everywhere."""

    mean: float
    sd: float

    def __post_init__(self):
        if not self.sd > 0:
            raise ValueError("sd must be positive")

    def cdf(self, x: float) -> float:
        return float(norm.cdf(x, loc=self.mean, scale=self.sd))

    def quantile(self, q: float) -> float:
        return float(norm.ppf(q, loc=self.mean, scale=self.sd))


class GridCdf:
    """Continuous distribution tabulated as (points, cdf values).

    Values must be strictly increasing inside (0, 1): flat regions would make
    the median non-unique and are rejected at construction. cdf saturates
    outside the grid; quantile interpolates monotonically and only accepts
    probabilities covered by the grid.
    """

    def __init__(self, points, values):
        points = np.asarray(points, dtype=float)
        values = np.asarray(values, dtype=float)
        if points.ndim != 1 or points.size < 2 or values.shape != points.shape:
            raise ValueError("points and values must be matching 1-d arrays")
        if np.any(np.diff(points) <= 0):
            raise ValueError("points must be strictly increasing")
        if np.any(np.diff(values) <= 0):
            raise ValueError("cdf values must be strictly increasing (no flat regions)")
        if values[0] <= 0.0 or values[-1] >= 1.0:
            raise ValueError("cdf values must lie strictly inside (0, 1)")
        self.points = points
        self.values = values

    def cdf(self, x: float) -> float:
        return float(np.interp(x, self.points, self.values))

    def quantile(self, q: float) -> float:
        if q < self.values[0] or q > self.values[-1]:
            raise ValueError(f"quantile {q} outside the tabulated range "
                             f"[{self.values[0]}, {self.values[-1]}]")
        return float(np.interp(q, self.values, self.points))


@dataclass(frozen=True)
class SpikeSlabPrior:
    """Prior mass ``atom_prob`` at zero plus a continuous slab (may be a
    per-coordinate array of atom probabilities for vector thresholding)."""

    atom_prob: object
    slab: object

    def __post_init__(self):
        pi = np.asarray(self.atom_prob, dtype=float)
        if np.any(pi < 0) or np.any(pi > 1):
            raise ValueError("atom_prob must lie in [0, 1]")


@dataclass
class PosteriorMixture:
    """Posterior atom mass plus the continuous component F_c."""

    atom_prob: float
    continuous: object
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.atom_prob <= 1.0:
            raise ValueError("atom_prob must lie in [0, 1]")


@dataclass
class MedianResult:
    median: float
    odds: float
    delta: float  # the odds threshold |1 - 2 F_c(0)|
    branch: str
    sign: int


def marginal_posterior(prior: SpikeSlabPrior, y: float, sigma: float) -> PosteriorMixture:
    """Posterior mixture for y | beta ~ Normal(beta, sigma^2) under a Normal
    slab. The atom mass is computed in log space to survive large |y|."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    slab = prior.slab
    if not isinstance(slab, Normal):
        raise ValueError("marginal_posterior requires a Normal slab")
    pi = float(np.asarray(prior.atom_prob, dtype=float))
    tau = slab.sd
    post_var = sigma * sigma * tau * tau / (sigma * sigma + tau * tau)
    post_mean = (y * tau * tau + slab.mean * sigma * sigma) / (sigma * sigma + tau * tau)
    continuous = Normal(post_mean, math.sqrt(post_var))
    if pi == 0.0:
        atom = 0.0
    elif pi == 1.0:
        atom = 1.0
    else:
        lp_atom = math.log(pi) + norm.logpdf(y, loc=0.0, scale=sigma)
        lp_slab = (math.log1p(-pi)
                   + norm.logpdf(y, loc=slab.mean,
                                 scale=math.sqrt(sigma * sigma + tau * tau)))
        atom = float(np.exp(lp_atom - np.logaddexp(lp_atom, lp_slab)))
    return PosteriorMixture(atom_prob=atom, continuous=continuous,
                            meta={"y": y, "sigma": sigma, "prior_atom": pi,
                                  "slab_mean": slab.mean, "slab_sd": tau})


def posterior_odds(mix: PosteriorMixture) -> float:
    """Odds that the coefficient is exactly zero; +inf at atom mass 1."""
    if mix.atom_prob >= 1.0:
        return math.inf
    return mix.atom_prob / (1.0 - mix.atom_prob)


def zero_odds_threshold(mix: PosteriorMixture) -> float:
    """|1 - 2 F_c(0)|: the odds level at which the median snaps to zero.
    Vanishes iff the continuous median is itself zero."""
    return abs(1.0 - 2.0 * mix.continuous.cdf(0.0))


def analytic_median(mix: PosteriorMixture) -> MedianResult:
    """Closed-form posterior median via the exact case split.

    Zero whenever odds >= threshold (boundary inclusive); otherwise the
    (1 - S * odds) / 2 quantile of F_c, where S is the sign of the
    continuous median.
    """
    if mix.atom_prob >= 1.0:
        # zero branch holds trivially; F_c is never evaluated
        return MedianResult(median=0.0, odds=math.inf, delta=0.0,
                            branch=BRANCH_ZERO_BY_ODDS, sign=0)
    odds = posterior_odds(mix)
    delta = zero_odds_threshold(mix)
    med_c = mix.continuous.quantile(0.5)
    sign = 0 if med_c == 0.0 else (1 if med_c > 0 else -1)
    if delta == 0.0:
        return MedianResult(median=0.0, odds=odds, delta=delta,
                            branch=BRANCH_ZERO_CENTERED_SLAB, sign=sign)
    if odds >= delta:
        return MedianResult(median=0.0, odds=odds, delta=delta,
                            branch=BRANCH_ZERO_BY_ODDS, sign=sign)
    q = (1.0 - sign * odds) / 2.0
    median = mix.continuous.quantile(q)
    branch = BRANCH_POSITIVE if sign > 0 else BRANCH_NEGATIVE
    return MedianResult(median=median, odds=odds, delta=delta,
                        branch=branch, sign=sign)


def double_shrinkage_median(med_c: float, sigma_c: float, g_quantile,
                            odds: float, delta: float) -> float:
    """Location-scale form of the nonzero branch: shrink the continuous
    median toward zero by sigma_c * G^{-1}((1 + odds) / 2).

    Callers must take the zero branch when odds >= delta.
    """
    if odds >= delta:
        raise ValueError("double_shrinkage_median requires odds < delta; "
                         "the median is exactly zero otherwise")
    if med_c == 0.0:
        raise ValueError("med_c must be nonzero (zero branch applies)")
    if not sigma_c > 0:
        raise ValueError("sigma_c must be positive")
    shift = sigma_c * g_quantile((1.0 + odds) / 2.0)
    return med_c - shift if med_c > 0 else med_c + shift


def _mixture_cdf(mix, x: float) -> float:
    c = (1.0 - mix.atom_prob) * mix.continuous.cdf(x)
    return c + mix.atom_prob if x >= 0 else c


def bisection_median(mix: PosteriorMixture, tol: float = 1e-10) -> float:
    """Median straight from the definition: the point M with F(M) >= 1/2 and
    F(M-) <= 1/2 for the full mixture CDF, located by bracketed bisection.
    Returns exactly 0.0 when the jump at the origin straddles 1/2."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    if mix.atom_prob >= 1.0:
        return 0.0
    f0_minus = (1.0 - mix.atom_prob) * mix.continuous.cdf(0.0)
    f0 = f0_minus + mix.atom_prob
    if f0_minus <= 0.5 <= f0:
        return 0.0
    if f0 < 0.5:
        lo, hi = 0.0, 1.0
        while _mixture_cdf(mix, hi) < 0.5:
            hi *= 2.0
            if hi > 1e18:
                raise NumericalError("bisection bracket expansion failed (upper)")
    else:
        lo, hi = -1.0, 0.0
        while _mixture_cdf(mix, lo) > 0.5:
            lo *= 2.0
            if lo < -1e18:
                raise NumericalError("bisection bracket expansion failed (lower)")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _mixture_cdf(mix, mid) < 0.5:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def threshold_vector(prior: SpikeSlabPrior, y, sigma):
    """Coordinatewise posterior-median thresholding (strictly marginal; no
    block rules). Returns (medians, support of exact nonzeros).

    ``sigma`` may be a scalar or per-coordinate array, as may the prior's
    atom_prob.
    """
    y = np.asarray(y, dtype=float).ravel()
    pi = np.broadcast_to(np.asarray(prior.atom_prob, dtype=float), y.shape)
    sig = np.broadcast_to(np.asarray(sigma, dtype=float), y.shape)
    medians = np.empty_like(y)
    for j in range(y.size):
        coord_prior = SpikeSlabPrior(atom_prob=float(pi[j]), slab=prior.slab)
        mix = marginal_posterior(coord_prior, float(y[j]), float(sig[j]))
        medians[j] = analytic_median(mix).median
    support = tuple(int(j) for j in np.flatnonzero(medians))
    return medians, support
