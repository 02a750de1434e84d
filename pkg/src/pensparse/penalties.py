"""Penalty families p(t) on the nonnegative axis, as value/derivative pairs.

Shipped families: "l1" (lasso), "scad", "log", plus a convex "quadratic"
family kept as a negative control for the concavity screens (it is not
selectable from the CLI). Every family satisfies p(0) = 0 and is
nondecreasing; all but "quadratic" are concave on [0, inf).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

FAMILIES = ("l1", "scad", "log", "quadratic")

#: penalties selectable by name from CLI configs
PUBLIC_FAMILIES = ("l1", "scad", "log")


@dataclass(frozen=True)
class PenaltySpec:
    """One coordinate's penalty.

    ``lam`` is the regularization scale, ``a`` the SCAD shape (> 2),
    ``n`` the sample-size multiplier entering the penalty block of the
    objective (the solver penalizes n * p(|beta_j|) per coordinate), and
    ``log_scale`` the second scale of the log family, defaulting to ``lam``:
    p(t) = lam * log(1 + t / log_scale).
    """

    family: str
    lam: float
    a: float = 3.7
    n: int = 1
    log_scale: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown penalty family {self.family!r}")
        if not np.isfinite(self.lam) or self.lam < 0:
            raise ValueError("lam must be finite and >= 0")
        if self.family == "scad" and not self.a > 2:
            raise ValueError("scad shape a must exceed 2")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("n must be a positive integer")
        if self.log_scale is not None and not self.log_scale > 0:
            raise ValueError("log_scale must be positive")

    @property
    def second_scale(self) -> float:
        return self.lam if self.log_scale is None else self.log_scale


def penalty_value(spec: PenaltySpec, t):
    """p(t) for t >= 0. Accepts scalars or arrays; continuous, p(0) = 0."""
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t)) or np.any(t < 0):
        raise ValueError("penalty_value requires finite t >= 0")
    lam = spec.lam
    if lam == 0.0:
        out = np.zeros_like(t)
    elif spec.family == "l1":
        out = lam * t
    elif spec.family == "scad":
        a = spec.a
        mid = (2.0 * a * lam * t - t * t - lam * lam) / (2.0 * (a - 1.0))
        out = np.where(t <= lam, lam * t,
                       np.where(t <= a * lam, mid, 0.5 * (a + 1.0) * lam * lam))
    elif spec.family == "log":
        out = lam * np.log1p(t / spec.second_scale)
    else:  # quadratic control
        out = 0.5 * lam * t * t
    return float(out) if out.ndim == 0 else out


def penalty_derivative(spec: PenaltySpec, t):
    """p'(t) for t > 0; the origin is excluded (kink), see derivative_at_zero."""
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t)) or np.any(t <= 0):
        raise ValueError("penalty_derivative requires finite t > 0; "
                         "treat the origin via derivative_at_zero")
    lam = spec.lam
    if lam == 0.0:
        out = np.zeros_like(t)
    elif spec.family == "l1":
        out = np.full_like(t, lam)
    elif spec.family == "scad":
        a = spec.a
        out = np.where(t <= lam, lam, np.maximum(a * lam - t, 0.0) / (a - 1.0))
    elif spec.family == "log":
        out = lam / (spec.second_scale + t)
    else:
        out = lam * t
    return float(out) if out.ndim == 0 else out


def derivative_at_zero(spec: PenaltySpec) -> float:
    """Right limit p'(0+); keeps zero coordinates penalized at full strength."""
    if spec.lam == 0.0:
        return 0.0
    if spec.family in ("l1", "scad"):
        return spec.lam
    if spec.family == "log":
        return spec.lam / spec.second_scale
    return 0.0  # quadratic: p'(t) = lam * t -> 0


class ConcavityCheck(NamedTuple):
    ok: bool
    worst: float  # largest second divided difference seen on the grid


def is_concave_on_grid(spec: PenaltySpec, grid, tol: float = 1e-9) -> ConcavityCheck:
    """Scan second divided differences of p on a strictly increasing grid.

    Concave iff every second divided difference is <= tol (the slack absorbs
    floating-point noise on linear segments).
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 3:
        raise ValueError("grid must be one-dimensional with at least 3 points")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    v = penalty_value(spec, grid)
    h1 = np.diff(grid)[:-1]
    h2 = np.diff(grid)[1:]
    slopes = np.diff(v) / np.diff(grid)
    second = 2.0 * (slopes[1:] - slopes[:-1]) / (h1 + h2)
    worst = float(np.max(second))
    return ConcavityCheck(ok=worst <= tol, worst=worst)
