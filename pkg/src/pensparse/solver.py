"""MM solvers for penalized Gaussian least squares.

The maximized objective is

    obj(beta) = -0.5 * ||y - X beta||^2 - sum_j n_j p_j(|beta_j|),

split into a smooth concave part f(beta) = -0.5 ||y - X beta||^2 and a
penalty block g(u) = sum_j n_j p_j(u_j) evaluated at u = |beta|. Each outer
step replaces g by a linear (weighted L1) or quadratic (weighted ridge)
surrogate anchored at the current iterate and maximizes the surrogate
exactly, which yields the monotone ascent of MM.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import NumericalError
from .penalties import PenaltySpec, derivative_at_zero, penalty_derivative, penalty_value

_MAX_CD_SWEEPS = 100_000
# inner subproblems are always solved at least this tightly, whatever the
# outer loop's stopping tolerance is (a surrogate must be maximized, not
# merely swept once, for the ascent argument to mean anything)
_INNER_TOL = 1e-10


@dataclass
class RegressionModel:
    """Design matrix, response, and the (Gaussian least squares) loss."""

    X: np.ndarray
    y: np.ndarray
    loss: str = "gaussian-ls"

    def __post_init__(self):
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        self.y = np.asarray(self.y, dtype=float).ravel()
        if self.loss != "gaussian-ls":
            raise ValueError(f"unsupported loss {self.loss!r}")
        if self.X.ndim != 2 or self.X.shape[0] != self.y.shape[0]:
            raise ValueError("X must be (n_obs, p) with len(y) == n_obs")
        if self.X.shape[0] < 1 or self.X.shape[1] < 1:
            raise ValueError("need at least one observation and one predictor")
        if not (np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.y))):
            raise ValueError("X and y must be finite")

    @property
    def n_obs(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


class Decomposition:
    """The f - g split of the penalized objective, with derivative oracles.

    g is normalized so that g(0) = 0 (inherited from p(0) = 0 for every
    penalty family), and is concave coordinatewise on the positive axis for
    the concave families.
    """

    def __init__(self, model: RegressionModel, penalties):
        penalties = list(penalties)
        if len(penalties) != model.p:
            raise ValueError(f"need one PenaltySpec per coordinate "
                             f"({model.p}), got {len(penalties)}")
        self.model = model
        self.penalties = penalties

    def f(self, beta) -> float:
        r = self.model.y - self.model.X @ np.asarray(beta, dtype=float)
        return -0.5 * float(r @ r)

    def f_grad(self, beta) -> np.ndarray:
        beta = np.asarray(beta, dtype=float)
        return self.model.X.T @ (self.model.y - self.model.X @ beta)

    def coord_penalty(self, j: int, u: float) -> float:
        spec = self.penalties[j]
        return spec.n * penalty_value(spec, u)

    def slope(self, j: int, u: float) -> float:
        """Per-coordinate derivative n_j p'_j(u); right limit at u = 0."""
        if u < 0:
            raise ValueError("slope is defined on u >= 0")
        spec = self.penalties[j]
        if u == 0.0:
            return spec.n * derivative_at_zero(spec)
        return spec.n * penalty_derivative(spec, u)

    def g(self, u) -> float:
        u = np.asarray(u, dtype=float)
        if np.any(u < 0):
            raise ValueError("g is defined on the nonnegative orthant")
        return float(sum(self.coord_penalty(j, u[j]) for j in range(u.size)))

    def objective(self, beta) -> float:
        beta = np.asarray(beta, dtype=float)
        return self.f(beta) - self.g(np.abs(beta))


@dataclass
class SurrogateProblem:
    """A weighted-L1 or weighted-ridge minorant of the penalized objective.

    value() evaluates the surrogate in its anchored form; it sits exactly
    constant_shift = g(|anchor|) above the objective at the anchor, and
    value(theta) - constant_shift minorizes the objective for concave
    penalties.
    """

    kind: str  # "weighted-l1" | "weighted-ridge"
    decomp: Decomposition
    weights: np.ndarray
    anchor: np.ndarray
    constant_shift: float
    dropped: np.ndarray | None = None  # optional LQA drop mask

    def value(self, theta) -> float:
        theta = np.asarray(theta, dtype=float)
        if self.kind == "weighted-l1":
            pen = float(self.weights @ (np.abs(theta) - np.abs(self.anchor)))
        else:
            pen = float(self.weights @ (theta * theta - self.anchor * self.anchor))
        return self.decomp.f(theta) - pen


@dataclass
class FitResult:
    beta_hat: np.ndarray
    support: tuple
    objective_trace: list
    steps_taken: int
    converged: bool


def _support(beta: np.ndarray) -> tuple:
    return tuple(int(j) for j in np.flatnonzero(beta))


def decompose(model: RegressionModel, penalty) -> Decomposition:
    """Build the f - g decomposition; a single PenaltySpec is broadcast."""
    if isinstance(penalty, PenaltySpec):
        penalty = [penalty] * model.p
    return Decomposition(model, penalty)


def lla_surrogate(decomp: Decomposition, theta_t) -> SurrogateProblem:
    """Linearize the penalty block at |theta_t| -> weighted-L1 subproblem.

    Weight j is n_j p'_j(|theta_t_j|); at exactly zero the right-derivative
    limit applies, so zero coordinates stay penalized at full strength.
    """
    theta_t = np.asarray(theta_t, dtype=float)
    if not np.all(np.isfinite(theta_t)):
        raise ValueError("anchor must be finite")
    anchor_abs = np.abs(theta_t)
    w = np.array([decomp.slope(j, anchor_abs[j]) for j in range(theta_t.size)])
    return SurrogateProblem(kind="weighted-l1", decomp=decomp, weights=w,
                            anchor=theta_t.copy(),
                            constant_shift=decomp.g(anchor_abs))


def lqa_surrogate(decomp: Decomposition, theta_t, floor: float = 1e-8,
                  drop_below_floor: bool = False) -> SurrogateProblem:
    """Quadratic penalty surrogate: coefficient n_j p'_j(m) / (2 m) with
    m = max(|theta_t_j|, floor).

    Coordinates under the floor are kept in the model by default; the
    classical delete rule is available via drop_below_floor.
    """
    if not floor > 0:
        raise ValueError("floor must be positive")
    theta_t = np.asarray(theta_t, dtype=float)
    if not np.all(np.isfinite(theta_t)):
        raise ValueError("anchor must be finite")
    anchor_abs = np.abs(theta_t)
    m = np.maximum(anchor_abs, floor)
    c = np.array([decomp.slope(j, m[j]) / (2.0 * m[j]) for j in range(theta_t.size)])
    dropped = anchor_abs < floor if drop_below_floor else None
    return SurrogateProblem(kind="weighted-ridge", decomp=decomp, weights=c,
                            anchor=theta_t.copy(),
                            constant_shift=decomp.g(anchor_abs),
                            dropped=dropped)


def _soft(z: float, w: float) -> float:
    # |z| == w resolves to exactly 0 (favor sparsity on the tie)
    if z > w:
        return z - w
    if z < -w:
        return z + w
    return 0.0


def _solve_weighted_l1(problem, model, tol):
    """Cyclic coordinate descent with soft thresholding, started at the anchor.

    Starting at the anchor makes every sweep a surrogate ascent, which is what
    the outer MM loop relies on. Sweep order is fixed ascending for
    reproducibility; zeros are exact.
    """
    X, y, w = model.X, model.y, problem.weights
    p = X.shape[1]
    col_sq = np.einsum("ij,ij->j", X, X)
    beta = np.asarray(problem.anchor, dtype=float).copy()
    r = y - X @ beta
    for _ in range(_MAX_CD_SWEEPS):
        max_change = 0.0
        for j in range(p):
            old = beta[j]
            if col_sq[j] == 0.0:
                new = 0.0
            else:
                zj = X[:, j] @ r + col_sq[j] * old
                new = _soft(zj, w[j]) / col_sq[j]
            if new != old:
                r += X[:, j] * (old - new)
                beta[j] = new
                max_change = max(max_change, abs(new - old))
        if max_change < tol:
            return beta
    raise NumericalError("coordinate descent failed to converge "
                         f"within {_MAX_CD_SWEEPS} sweeps (tol={tol})")


def _solve_weighted_ridge(problem, model):
    X, y, c = model.X, model.y, problem.weights
    p = X.shape[1]
    active = np.ones(p, dtype=bool)
    if problem.dropped is not None:
        active = ~problem.dropped
    beta = np.zeros(p)
    if not np.any(active):
        return beta
    Xa = X[:, active]
    A = Xa.T @ Xa + 2.0 * np.diag(c[active])
    b = Xa.T @ y
    try:
        sol = np.linalg.solve(A, b)
    except np.linalg.LinAlgError:
        raise NumericalError("singular ridge system "
                             f"(cond={np.linalg.cond(A):.3e})") from None
    if not np.all(np.isfinite(sol)):
        raise NumericalError("non-finite ridge solution "
                             f"(cond={np.linalg.cond(A):.3e})")
    beta[active] = sol
    return beta


def solve_surrogate(problem: SurrogateProblem, model: RegressionModel,
                    tol: float = 1e-10) -> np.ndarray:
    """Maximize the surrogate exactly (ridge) or to coordinatewise
    optimality within tol (weighted L1)."""
    if problem.kind == "weighted-l1":
        return _solve_weighted_l1(problem, model, tol)
    if problem.kind == "weighted-ridge":
        return _solve_weighted_ridge(problem, model)
    raise ValueError(f"unknown surrogate kind {problem.kind!r}")


def default_start(model: RegressionModel) -> np.ndarray:
    """OLS when n_obs > p, otherwise ridge with a tiny (1e-6) penalty."""
    if model.n_obs > model.p:
        beta, *_ = np.linalg.lstsq(model.X, model.y, rcond=None)
        return beta
    A = model.X.T @ model.X + 1e-6 * np.eye(model.p)
    return np.linalg.solve(A, model.X.T @ model.y)


def _one_step(decomp, model, theta, tol, surrogate, lqa_floor, lqa_drop):
    if surrogate == "lla":
        prob = lla_surrogate(decomp, theta)
    elif surrogate == "lqa":
        prob = lqa_surrogate(decomp, theta, floor=lqa_floor,
                             drop_below_floor=lqa_drop)
    else:
        raise ValueError(f"unknown surrogate driver {surrogate!r}")
    new = solve_surrogate(prob, model, min(tol, _INNER_TOL))
    change = float(np.max(np.abs(new - theta))) if theta.size else 0.0
    return new, change


def k_step(model: RegressionModel, penalty, theta0=None, k: int = 1,
           tol: float = 1e-8, *, surrogate: str = "lla",
           lqa_floor: float = 1e-8, lqa_drop: bool = False) -> FitResult:
    """Run exactly k surrogate steps from theta0 (default: OLS start)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    decomp = decompose(model, penalty)
    theta = default_start(model) if theta0 is None else np.asarray(theta0, dtype=float).copy()
    if not np.all(np.isfinite(theta)):
        raise ValueError("theta0 must be finite")
    trace = [decomp.objective(theta)]
    change = np.inf
    for _ in range(k):
        theta, change = _one_step(decomp, model, theta, tol, surrogate,
                                  lqa_floor, lqa_drop)
        trace.append(decomp.objective(theta))
    return FitResult(beta_hat=theta, support=_support(theta),
                     objective_trace=trace, steps_taken=k,
                     converged=change < tol)


def iterate(model: RegressionModel, penalty, theta0=None, tol: float = 1e-8,
            max_iter: int = 100, *, surrogate: str = "lla",
            lqa_floor: float = 1e-8, lqa_drop: bool = False) -> FitResult:
    """Repeat surrogate steps until the max coordinate change drops below tol
    (support stability is what the benchmark measures) or max_iter is hit."""
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    decomp = decompose(model, penalty)
    theta = default_start(model) if theta0 is None else np.asarray(theta0, dtype=float).copy()
    if not np.all(np.isfinite(theta)):
        raise ValueError("theta0 must be finite")
    trace = [decomp.objective(theta)]
    converged = False
    steps = 0
    for _ in range(max_iter):
        theta, change = _one_step(decomp, model, theta, tol, surrogate,
                                  lqa_floor, lqa_drop)
        steps += 1
        trace.append(decomp.objective(theta))
        if change < tol:
            converged = True
            break
    return FitResult(beta_hat=theta, support=_support(theta),
                     objective_trace=trace, steps_taken=steps,
                     converged=converged)
