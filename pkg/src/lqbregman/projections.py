"""Bregman and metric projections onto linear subspaces of l^n_q.

Both projections are computed by a damped Newton method on the coefficient
vector ``c`` of the point ``B c``, where ``B`` holds a basis of the subspace
as columns.  The solver is batched: every ``*_batch`` function accepts an
``(m, n)`` array of points and solves all ``m`` problems together, which is
what makes sampling experiments affordable.

``brute_force_project_oracle`` is an independent derivative-free minimizer
used to check the Newton solver in tests.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, OracleRankTooHigh, SolverDivergence
from .space import (
    SpaceConfig,
    bregman_distance,
    duality_map,
    HESSIAN_CLAMP,
    gauge_hessian,
    gauge_value,
    norm,
)
from .subspaces import Subspace, annihilator

__all__ = [
    "SolverOptions",
    "ProjectionResult",
    "bregman_project",
    "bregman_project_batch",
    "bregman_distance_to",
    "metric_project_direct",
    "metric_project_batch",
    "metric_distance",
    "metric_project_via_duality",
    "metric_project_via_duality_batch",
    "brute_force_project_oracle",
]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class SolverOptions:
    """Settings of the damped Newton solver."""

    tol: float = 1e-11
    max_iter: int = 200
    backtrack: float = 0.5
    armijo: float = 1e-4
    curvature: float = 0.9
    hessian_floor: float = 1e-12
    max_halvings: int = 60

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


DEFAULT_OPTIONS = SolverOptions()


@dataclass(frozen=True)
class ProjectionResult:
    """Outcome of a projection.

    For the batch solvers every field is an array with one entry (or row)
    per input point.
    """

    point: np.ndarray
    objective: float
    iterations: int
    residual: float
    converged: bool


def _as_batch(x, n):
    x = np.asarray(x, dtype=float)
    if x.ndim not in (1, 2) or x.shape[-1] != n:
        raise DimensionMismatch(f"expected points in R^{n}, got shape {x.shape}")
    return np.atleast_2d(x), x.ndim == 1


def _check_subspace(M, cfg):
    if M.ambient_dim != cfg.n:
        raise DimensionMismatch(
            f"subspace lives in R^{M.ambient_dim}, space has n={cfg.n}")


def _newton(value, grad, hess, C, tol, opts, polish=2):
    """Batched damped Newton with backtracking.

    ``value(C, idx)``, ``grad(C, idx)`` and ``hess(C, idx)`` evaluate the
    objective on the rows ``idx`` of the batch.  Rows that reach ``tol`` get
    up to ``polish`` further steps, kept only when they lower the residual.
    Returns the final coefficients, iteration counts and residual norms.
    """
    m, r = C.shape
    iters = np.zeros(m, dtype=int)
    g = grad(C, np.arange(m))
    res = np.linalg.norm(g, axis=1)
    eye = np.eye(r)

    def step(active, max_halvings):
        Ca, ga = C[active], g[active]
        H = hess(Ca, active)
        shift = opts.hessian_floor * (1.0 + np.abs(np.trace(H, axis1=1, axis2=2)))
        d = -np.linalg.solve(H + shift[:, None, None] * eye, ga[:, :, None])[..., 0]
        slope = np.einsum("ij,ij->i", ga, d)
        not_descent = ~(slope < 0)
        d[not_descent] = -ga[not_descent]
        slope[not_descent] = -np.einsum("ij,ij->i", ga[not_descent],
                                        ga[not_descent])
        f0 = value(Ca, active)
        t = np.ones(active.size)
        pending = np.ones(active.size, dtype=bool)
        for _ in range(max_halvings):
            idx = np.flatnonzero(pending)
            if idx.size == 0:
                break
            trial = Ca[idx] + t[idx, None] * d[idx]
            rows = active[idx]
            # strong Wolfe test; when the predicted decrease is below the
            # rounding level of f, judge the step by the gradient norm instead.
            # The curvature half stops Newton from bouncing between c and -c
            # on |c|**q with q < 2
            resolvable = (-opts.armijo * t[idx] * slope[idx]
                          > 64 * _EPS * (1.0 + np.abs(f0[idx])))
            g_trial = grad(trial, rows)
            r_trial = np.linalg.norm(g_trial, axis=1)
            ok = r_trial < res[rows]
            if np.any(resolvable):
                f1 = value(trial, rows)
                wolfe_ok = ((f1 <= f0[idx] + opts.armijo * t[idx] * slope[idx])
                            & (np.abs(np.einsum("ij,ij->i", g_trial, d[idx]))
                               <= opts.curvature * np.abs(slope[idx])))
                ok = np.where(resolvable, wolfe_ok, ok)
            acc = rows[ok]
            C[acc] = trial[ok]
            g[acc] = g_trial[ok]
            res[acc] = r_trial[ok]
            pending[idx[ok]] = False
            t[idx[~ok]] *= opts.backtrack
        iters[active] += 1

    for _ in range(opts.max_iter):
        active = np.flatnonzero(res > tol)
        if active.size == 0:
            break
        step(active, opts.max_halvings)
    for _ in range(polish):
        active = np.flatnonzero((res <= tol) & (res > 0))
        if active.size == 0:
            break
        step(active, 1)
    return C, iters, res


def _ls_coefficients(B, X):
    return np.linalg.lstsq(B, X.T, rcond=None)[0].T


def _finish(points, objective, iters, res, tol, squeeze, what):
    converged = res <= tol
    if squeeze:
        result = ProjectionResult(points[0], float(objective[0]), int(iters[0]),
                                  float(res[0]), bool(converged[0]))
    else:
        result = ProjectionResult(points, objective, iters, res, converged)
    if not np.all(converged):
        raise SolverDivergence(
            f"{what}: {int(np.sum(~converged))} problem(s) above tolerance "
            f"after max_iter (worst residual {np.max(res):.3e})", result)
    return result


def bregman_project_batch(X, M: Subspace, cfg: SpaceConfig, opts=None):
    """Bregman projections of the rows of ``X`` onto ``M``.

    Minimizes ``c -> D_p(B c, x)``.  The stopping residual is
    ``||B^T (j_p(B c) - j_p(x))||_2 <= tol * (1 + ||j_p(x)||_{q*})``.
    """
    opts = opts or DEFAULT_OPTIONS
    _check_subspace(M, cfg)
    X, squeeze = _as_batch(X, cfg.n)
    m = X.shape[0]
    JX = duality_map(X, cfg)
    tol = opts.tol * (1.0 + norm(JX, cfg.dual()))
    if M.rank == 0:
        points = np.zeros_like(X)
        iters, res = np.zeros(m, dtype=int), np.zeros(m)
    elif M.rank == cfg.n:
        points = X.copy()
        iters, res = np.zeros(m, dtype=int), np.zeros(m)
    else:
        B = M.matrix

        def value(C, idx):
            Y = C @ B.T
            return gauge_value(Y, cfg) - np.einsum("ij,ij->i", JX[idx], Y)

        def grad(C, idx):
            return (duality_map(C @ B.T, cfg) - JX[idx]) @ B

        def hess(C, idx):
            return np.einsum("ki,mkl,lj->mij", B, gauge_hessian(C @ B.T, cfg), B)

        C, iters, res = _newton(value, grad, hess, _ls_coefficients(B, X), tol,
                                opts)
        points = C @ B.T
    objective = np.atleast_1d(bregman_distance(points, X, cfg))
    return _finish(points, objective, iters, res, tol, squeeze,
                   "Bregman projection")


def _bregman_single(x, B, cfg, opts, polish=2):
    """Newton on one point without the batch bookkeeping.

    Returns ``None`` when the inputs are outside the range where the
    unscaled formulas are safe, so the caller can use the batch solver.
    """
    p, q = cfg.p, cfg.q
    ax = np.abs(x)
    sx = np.sum(ax ** q)
    if not (np.isfinite(sx) and 1e-200 < sx < 1e200):
        return None
    jx = sx ** ((p - q) / q) * np.sign(x) * ax ** (q - 1.0)
    tol = opts.tol * (1.0 + np.sum(np.abs(jx) ** cfg.q_star) ** (1.0 / cfg.q_star))
    c = np.linalg.solve(B.T @ B, B.T @ x)

    def evaluate(c):
        y = B @ c
        a = np.abs(y)
        s = np.sum(a ** q)
        if s == 0:
            return None
        phi = np.sign(y) * a ** (q - 1.0)
        f1 = s ** ((p - q) / q)
        g = B.T @ (f1 * phi - jx)
        return y, a, s, phi, f1, g, float(np.sqrt(g @ g))

    def value(y, s):
        return s ** (p / q) / p - jx @ y

    state = evaluate(c)
    if state is None:
        return None
    iters = 0
    extra = 0
    while True:
        y, a, s, phi, f1, g, res = state
        if res <= tol:
            if extra >= polish or res == 0:
                break
            extra += 1
            halvings = 1
        elif iters >= opts.max_iter:
            break
        else:
            halvings = opts.max_halvings
        if q < 2:
            a = np.maximum(a, HESSIAN_CLAMP)
        f2 = (p - q) * s ** ((p - 2.0 * q) / q)
        Bphi = B.T @ phi
        H = (B.T * (f1 * (q - 1.0) * a ** (q - 2.0))) @ B + f2 * np.outer(Bphi, Bphi)
        H = H + opts.hessian_floor * (1.0 + abs(np.trace(H))) * np.eye(len(c))
        d = -np.linalg.solve(H, g)
        slope = g @ d
        if not slope < 0:
            d, slope = -g, -(g @ g)
        f0 = value(y, s)
        t = 1.0
        for _ in range(halvings):
            trial = evaluate(c + t * d)
            if trial is not None:
                if -opts.armijo * t * slope > 64 * _EPS * (1.0 + abs(f0)):
                    ok = (value(trial[0], trial[2]) <= f0 + opts.armijo * t * slope
                          and abs(trial[5] @ d) <= opts.curvature * abs(slope))
                else:
                    ok = trial[6] < res
                if ok:
                    c, state = c + t * d, trial
                    break
            t *= opts.backtrack
        else:
            if res <= tol:
                break
        iters += 1
    return B @ c, iters, state[6], tol


def bregman_project(x, M: Subspace, cfg: SpaceConfig, opts=None):
    """Bregman projection ``argmin_{m in M} D_p(m, x)`` of a single point.

    Returns a :class:`ProjectionResult` whose ``objective`` is D_p(M, x).
    Raises :class:`SolverDivergence` if the residual stays above tolerance.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionMismatch("bregman_project takes a single vector")
    _check_subspace(M, cfg)
    if 0 < M.rank < cfg.n and np.any(x):
        out = _bregman_single(x, M.matrix, cfg, opts or DEFAULT_OPTIONS)
        if out is not None:
            point, iters, res, tol = out
            objective = np.atleast_1d(bregman_distance(point, x, cfg))
            return _finish(point[None, :], objective, np.array([iters]),
                           np.array([res]), tol, True, "Bregman projection")
    return bregman_project_batch(x, M, cfg, opts)


def bregman_distance_to(M: Subspace, x, cfg: SpaceConfig, opts=None):
    """D_p(M, x) = D_p(Pi_M x, x); accepts one point or a batch."""
    return bregman_project_batch(x, M, cfg, opts).objective


def metric_project_batch(X, M: Subspace, cfg: SpaceConfig, opts=None):
    """Nearest points of ``M`` in the l_q norm, for the rows of ``X``.

    Minimizes ``c -> (1/q) ||x - B c||_q**q``; the residual is the
    Euclidean norm of its gradient, scaled by ``1 + ||x||_q**(q-1)``.
    """
    opts = opts or DEFAULT_OPTIONS
    _check_subspace(M, cfg)
    X, squeeze = _as_batch(X, cfg.n)
    m = X.shape[0]
    q = cfg.q
    tol = opts.tol * (1.0 + norm(X, cfg) ** (q - 1.0))
    if M.rank == 0:
        points = np.zeros_like(X)
        iters, res = np.zeros(m, dtype=int), np.zeros(m)
    elif M.rank == cfg.n:
        points = X.copy()
        iters, res = np.zeros(m, dtype=int), np.zeros(m)
    else:
        B = M.matrix

        def value(C, idx):
            return np.sum(np.abs(X[idx] - C @ B.T) ** q, axis=1) / q

        def grad(C, idx):
            R = X[idx] - C @ B.T
            return -(np.sign(R) * np.abs(R) ** (q - 1.0)) @ B

        def hess(C, idx):
            R = np.abs(X[idx] - C @ B.T)
            if q < 2:
                R = np.maximum(R, 1e-30)
            w = (q - 1.0) * R ** (q - 2.0)
            return np.einsum("ki,mk,kj->mij", B, w, B)

        C, iters, res = _newton(value, grad, hess, _ls_coefficients(B, X), tol,
                                opts)
        points = C @ B.T
    objective = norm(X - points, cfg)
    return _finish(points, objective, iters, res, tol, squeeze,
                   "metric projection")


def metric_project_direct(x, M: Subspace, cfg: SpaceConfig, opts=None):
    """Metric projection P_M x of a single point by direct minimization."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionMismatch("metric_project_direct takes a single vector")
    return metric_project_batch(x, M, cfg, opts)


def metric_distance(M: Subspace, x, cfg: SpaceConfig, opts=None):
    """dist(x, M) in the l_q norm; one point or a batch."""
    return metric_project_batch(x, M, cfg, opts).objective


def metric_project_via_duality_batch(X, M: Subspace, cfg: SpaceConfig,
                                     opts=None):
    """Metric projections computed as ``x - j_{p*}(Pi^{p*}_{M^perp} j_p(x))``.

    The inner projection is a Bregman projection in X* = l_{q*} with gauge
    p*, onto the annihilator of M.
    """
    _check_subspace(M, cfg)
    X, squeeze = _as_batch(X, cfg.n)
    dual = cfg.dual()
    Y = bregman_project_batch(duality_map(X, cfg), annihilator(M), dual,
                              opts).point
    P = X - duality_map(Y, dual)
    return P[0] if squeeze else P


def metric_project_via_duality(x, M: Subspace, cfg: SpaceConfig, opts=None):
    """Single-point version of :func:`metric_project_via_duality_batch`."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionMismatch("expected a single vector")
    return metric_project_via_duality_batch(x, M, cfg, opts)


def brute_force_project_oracle(x, M: Subspace, cfg: SpaceConfig,
                               mode="bregman", grid=21, step_tol=1e-9):
    """Derivative-free projection for rank(M) <= 3, used as a test oracle.

    A coarse grid over coefficients in an orthonormal basis of ``M`` is
    followed by compass search, halving the step until it drops below
    ``step_tol``.
    """
    if mode not in ("bregman", "metric"):
        raise ValueError(f"unknown mode {mode!r}")
    _check_subspace(M, cfg)
    x = np.asarray(x, dtype=float)
    if x.shape != (cfg.n,):
        raise DimensionMismatch(f"expected a vector in R^{cfg.n}")
    r = M.rank
    if r > 3:
        raise OracleRankTooHigh(f"oracle supports rank <= 3, got {r}")
    if r == 0:
        return np.zeros(cfg.n)
    Q = M.orthonormal_basis
    q = cfg.q
    if mode == "bregman":
        jx = duality_map(x, cfg)

        def f(A):
            Y = A @ Q
            return gauge_value(Y, cfg) - Y @ jx
    else:
        def f(A):
            return np.sum(np.abs(x - A @ Q) ** q, axis=-1) / q

    radius = 2.0 * np.sqrt(cfg.n) * max(norm(x, cfg), np.linalg.norm(x), 1e-300)
    axis = np.linspace(-radius, radius, grid)
    pts = np.stack(np.meshgrid(*([axis] * r), indexing="ij"), -1).reshape(-1, r)
    a = pts[np.argmin(f(pts))].copy()
    fa = f(a)
    h = axis[1] - axis[0]
    moves = np.vstack([np.eye(r), -np.eye(r)])
    while h >= step_tol:
        cand = a + h * moves
        fc = f(cand)
        k = np.argmin(fc)
        if fc[k] < fa:
            a, fa = cand[k], fc[k]
        else:
            h *= 0.5
    return a @ Q
