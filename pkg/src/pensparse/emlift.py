"""Latent-variable lifting of the linear penalty surrogate.

If exp(-g(u)) is the moment generating function of a latent density h, the
penalized likelihood augments to a missing-data problem whose E-step
surrogate is exactly the linear minorization of the penalty block, with the
identities E(Z|u) = -g'(u) and g''(u) = -Var(Z|u); the second forces g to be
concave for any such lift to exist. This module does not decide existence:
it verifies supplied candidate (penalty, latent density) pairs and runs the
concavity necessary-condition screen.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .exceptions import NumericalError
from .solver import Decomposition


@dataclass(frozen=True)
class PointMass:
    """Degenerate latent density: all mass at ``location``."""

    location: float


class GridDensity:
    """Latent density tabulated on a strictly increasing grid.

    ``density`` holds density values; normalization (trapezoid integral = 1
    within 1e-10) matches the module-wide trapezoid quadrature convention.
    """

    def __init__(self, z, density):
        z = np.asarray(z, dtype=float)
        density = np.asarray(density, dtype=float)
        if z.ndim != 1 or z.size < 2 or density.shape != z.shape:
            raise ValueError("z and density must be matching 1-d arrays")
        if np.any(np.diff(z) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any(density < 0):
            raise ValueError("density values must be nonnegative")
        total = float(np.trapezoid(density, z))
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"density must integrate to 1 (got {total!r})")
        self.z = z
        self.density = density


@dataclass(frozen=True)
class NegExponential:
    """Z = -W with W ~ Exponential(rate); MGF rate / (rate + u) for u > -rate."""

    rate: float

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("rate must be positive")


LatentDensity = Union[PointMass, GridDensity, NegExponential]


@dataclass
class EquivalenceReport:
    max_constant_deviation: float
    mgf_max_rel_error: float
    concavity_ok: bool
    mean_identity_max_error: float
    verdict: str  # "equivalent-up-to-constant" | "not-equivalent" | "mgf-invalid"


@dataclass
class ConcavityReport:
    ok: bool
    worst_curvature: float
    var_mismatch: float | None = None  # max relative |g'' + Var| when h given


def mgf(h: LatentDensity, u: float) -> float:
    """E[exp(u Z)] under h; PointMass exact, GridDensity by trapezoid,
    NegExponential in closed form."""
    if isinstance(h, PointMass):
        return math.exp(u * h.location)
    if isinstance(h, NegExponential):
        if u <= -h.rate:
            raise ValueError(f"u={u} outside the MGF convergence region "
                             f"(need u > {-h.rate})")
        return h.rate / (h.rate + u)
    return float(np.trapezoid(np.exp(u * h.z) * h.density, h.z))


def tilted_mean(h: LatentDensity, u: float) -> float:
    """Mean of Z under the tilted density proportional to exp(u z) h(z)."""
    if isinstance(h, PointMass):
        return h.location
    if isinstance(h, NegExponential):
        if u <= -h.rate:
            raise ValueError("u outside the MGF convergence region")
        return -1.0 / (h.rate + u)
    t = np.exp(u * h.z) * h.density
    total = float(np.trapezoid(t, h.z))
    return float(np.trapezoid(h.z * t, h.z)) / total


def tilted_variance(h: LatentDensity, u: float) -> float:
    if isinstance(h, PointMass):
        return 0.0
    if isinstance(h, NegExponential):
        if u <= -h.rate:
            raise ValueError("u outside the MGF convergence region")
        return 1.0 / (h.rate + u) ** 2
    t = np.exp(u * h.z) * h.density
    total = float(np.trapezoid(t, h.z))
    m = float(np.trapezoid(h.z * t, h.z)) / total
    m2 = float(np.trapezoid(h.z * h.z * t, h.z)) / total
    return m2 - m * m


def tilted_log_density_mean(h: LatentDensity, u: float) -> float:
    """E[log h(Z)] under the tilted density; the theta-free term of the
    E-step surrogate. An atom contributes 0 by convention (only differences
    in theta matter for the equivalence check)."""
    if isinstance(h, PointMass):
        return 0.0
    if isinstance(h, NegExponential):
        return math.log(h.rate) + h.rate * tilted_mean(h, u)
    t = np.exp(u * h.z) * h.density
    total = float(np.trapezoid(t, h.z))
    logterm = np.where(h.density > 0, np.log(np.where(h.density > 0, h.density, 1.0)), 0.0)
    out = float(np.trapezoid(logterm * t, h.z)) / total
    if not np.isfinite(out):
        raise NumericalError("non-finite entropy-like term for grid density")
    return out


def _as_density_list(h, p: int):
    if isinstance(h, (PointMass, GridDensity, NegExponential)):
        return [h] * p
    h = list(h)
    if len(h) != p:
        raise ValueError(f"need one latent density per coordinate ({p})")
    return h


def mgf_relative_error(decomp: Decomposition, h: LatentDensity, u_grid,
                       coord: int = 0) -> float:
    """max over u_grid of |MGF_h(u) - exp(-g(u))| / exp(-g(u)) for the given
    coordinate's penalty block."""
    errs = []
    for u in np.asarray(u_grid, dtype=float):
        if u < 0:
            raise ValueError("u_grid must be nonnegative")
        target = math.exp(-decomp.coord_penalty(coord, u))
        errs.append(abs(mgf(h, float(u)) - target) / target)
    return float(max(errs))


def latent_mean(decomp: Decomposition, u: float, coord: int = 0) -> float:
    """The identity value -g'(u), via the penalty derivative oracle
    (right limit at u = 0)."""
    if u < 0:
        raise ValueError("u must be nonnegative")
    return -decomp.slope(coord, u)


def em_surrogate(decomp: Decomposition, h, theta, theta_t) -> float:
    """E-step surrogate: f(theta) + sum_j |theta_j| E(Z_j | |theta_t_j|)
    + theta-free term, with the expectations taken under the tilted latent
    densities (not the derivative oracle -- the equivalence check below is
    what certifies the two agree)."""
    theta = np.asarray(theta, dtype=float)
    theta_t = np.asarray(theta_t, dtype=float)
    hs = _as_density_list(h, theta.size)
    lin = 0.0
    const = 0.0
    for j in range(theta.size):
        u = abs(theta_t[j])
        lin += abs(theta[j]) * tilted_mean(hs[j], u)
        const += tilted_log_density_mean(hs[j], u)
    return decomp.f(theta) + lin + const


def _linear_surrogate_value(decomp, theta, theta_t):
    # f(theta) - sum_j g'_j(|theta_t_j|) (|theta_j| - |theta_t_j|)
    theta = np.asarray(theta, dtype=float)
    theta_t = np.asarray(theta_t, dtype=float)
    pen = sum(decomp.slope(j, abs(theta_t[j])) * (abs(theta[j]) - abs(theta_t[j]))
              for j in range(theta.size))
    return decomp.f(theta) - pen


def concavity_certificate(decomp: Decomposition, u_grid, h=None,
                          coord: int = 0, tol: float = 1e-9,
                          var_rel_tol: float = 1e-4) -> ConcavityReport:
    """Necessary-condition screen: numerically estimated g'' must be <= tol
    on the grid. When h is given, additionally checks g''(u) = -Var(Z|u)
    under the tilted density at the interior grid points."""
    u_grid = np.asarray(u_grid, dtype=float)
    if u_grid.ndim != 1 or u_grid.size < 3:
        raise ValueError("u_grid must be one-dimensional with at least 3 points")
    if np.any(np.diff(u_grid) <= 0) or np.any(u_grid < 0):
        raise ValueError("u_grid must be strictly increasing and nonnegative")
    v = np.array([decomp.coord_penalty(coord, u) for u in u_grid])
    h1 = np.diff(u_grid)[:-1]
    h2 = np.diff(u_grid)[1:]
    slopes = np.diff(v) / np.diff(u_grid)
    second = 2.0 * (slopes[1:] - slopes[:-1]) / (h1 + h2)
    worst = float(np.max(second))
    ok = worst <= tol
    var_mismatch = None
    if h is not None:
        mism = 0.0
        for i, u in enumerate(u_grid[1:-1]):
            var = tilted_variance(h, float(u))
            # the floor keeps rounding noise in the curvature estimate from
            # dominating when the variance is (near) zero, e.g. point masses
            mism = max(mism, abs(second[i] + var) / max(abs(var), 1e-4))
        var_mismatch = mism
        ok = ok and mism <= var_rel_tol
    return ConcavityReport(ok=ok, worst_curvature=worst, var_mismatch=var_mismatch)


def check_equivalence(decomp: Decomposition, h, theta_t, theta_grid,
                      tol: float = 1e-8, mgf_tol: float = 1e-8,
                      mgf_u_grid=None) -> EquivalenceReport:
    """Certify that the E-step surrogate and the linear minorization differ
    by a theta-free constant, for the supplied candidate lift.

    Failures never raise; they are encoded in the verdict. The MGF identity
    is screened first (an invalid representation voids the rest), then the
    spread of D(theta) = em_surrogate - linear surrogate over theta_grid.
    """
    theta_t = np.atleast_1d(np.asarray(theta_t, dtype=float))
    theta_grid = np.asarray(theta_grid, dtype=float)
    if theta_grid.ndim == 1:
        theta_grid = theta_grid[:, None]
    if theta_grid.size == 0 or not np.all(np.isfinite(theta_grid)):
        raise ValueError("theta_grid must be nonempty and finite")
    p = theta_t.size
    hs = _as_density_list(h, p)

    u_max = max(1.0, float(np.max(np.abs(theta_grid))), float(np.max(np.abs(theta_t))))
    if mgf_u_grid is None:
        mgf_u_grid = np.linspace(0.0, u_max, 64)

    try:
        mgf_err = max(mgf_relative_error(decomp, hs[j], mgf_u_grid, coord=j)
                      for j in range(p))
    except ValueError:
        mgf_err = math.inf

    mean_err = 0.0
    for j in range(p):
        u = abs(theta_t[j])
        try:
            mean_err = max(mean_err,
                           abs(tilted_mean(hs[j], u) + decomp.slope(j, u)))
        except ValueError:
            mean_err = math.inf

    conc = concavity_certificate(decomp, np.linspace(0.0, u_max, 201))

    d_vals = np.array([em_surrogate(decomp, hs, th, theta_t)
                       - _linear_surrogate_value(decomp, th, theta_t)
                       for th in theta_grid])
    spread = float(np.max(d_vals) - np.min(d_vals))

    if mgf_err > mgf_tol:
        verdict = "mgf-invalid"
    elif spread <= tol:
        verdict = "equivalent-up-to-constant"
    else:
        verdict = "not-equivalent"
    return EquivalenceReport(max_constant_deviation=spread,
                             mgf_max_rel_error=float(mgf_err),
                             concavity_ok=conc.ok,
                             mean_identity_max_error=float(mean_err),
                             verdict=verdict)


def fit_grid_candidate(decomp: Decomposition, z, u_grid,
                       coord: int = 0) -> GridDensity:
    """Least-squares candidate latent density on a grid: fit nonnegative
    density values so that the trapezoid MGF matches exp(-g(u)) on u_grid,
    then renormalize. Used as the generic candidate when no closed-form lift
    is shipped (for concave g it can fit well; for convex g it cannot)."""
    from scipy.optimize import nnls

    z = np.asarray(z, dtype=float)
    u_grid = np.asarray(u_grid, dtype=float)
    trap = np.zeros(z.size)
    dz = np.diff(z)
    trap[:-1] += 0.5 * dz
    trap[1:] += 0.5 * dz
    A = np.exp(np.outer(u_grid, z)) * trap
    b = np.array([math.exp(-decomp.coord_penalty(coord, u)) for u in u_grid])
    w, _ = nnls(A, b)
    total = float(np.trapezoid(w, z))
    if total <= 0:
        w = np.ones_like(z)
        total = float(np.trapezoid(w, z))
    return GridDensity(z, w / total)
