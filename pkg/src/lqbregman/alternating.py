"""Alternating projection drivers, monotonicity checks and rate fits.

Three iterations are provided:

* alternating Bregman projections ``x <- Pi_M x``, ``x <- Pi_N x``, whose
  limit is the Bregman projection of ``x0`` onto ``M & N``;
* the alternating residual method ``x <- (I - P_M) x``, ``x <- (I - P_N) x``
  with metric projections, either directly in X or through Bregman
  projections onto the annihilators in X* (``engine="dual"``); its limit is
  ``(I - P_{M+N}) x0``;
* the cyclic residual method over any number of subspaces.

The limit is computed up front by a direct projection, so every trace
carries true errors rather than step sizes.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientDecay, NonConvergence
from .projections import bregman_project, metric_project_direct
from .space import SpaceConfig, bregman_distance, duality_map, norm
from .subspaces import Subspace, annihilator, intersect, subspace_sum

__all__ = [
    "StopRule",
    "IterationTrace",
    "RateEstimate",
    "alternate_bregman",
    "alternate_residual_metric",
    "alternate_residual_cyclic",
    "check_bregman_monotone",
    "estimate_linear_rate",
]

# gap above which hitting max_iter is reported as an error
_NONCONVERGENCE_GAP = 1e-6
_STALL_WINDOW = 50


@dataclass(frozen=True)
class StopRule:
    """Stop once consecutive steps all move less than ``tol_step``.

    A step is measured by the Bregman distance between consecutive iterates
    and the run stops after one small step per subspace in the cycle.
    """

    tol_step: float = 1e-12
    max_iter: int = 500

    def __post_init__(self):
        if not self.tol_step > 0:
            raise ValueError("tol_step must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass
class IterationTrace:
    """Iterates of one run with per-iterate diagnostics.

    ``d_breg_to_limit`` is the Bregman distance in which the method is
    monotone: ``D_p(x*, x_n)`` for alternating Bregman projections and
    ``D_p(x_n, x*) = D_{p*}(j_p x*, j_p x_n)`` for the residual methods.
    ``step_gap[n]`` is the step that produced iterate ``n`` (NaN for n = 0).
    """

    iterates: np.ndarray
    d_breg_to_limit: np.ndarray
    dist_to_limit: np.ndarray
    norms: np.ndarray
    step_gap: np.ndarray
    limit: np.ndarray
    limit_kind: str
    stop_reason: str
    dual_iterates: np.ndarray = field(default=None, repr=False)

    def __len__(self):
        return len(self.iterates)

    @property
    def final(self):
        return self.iterates[-1]


@dataclass(frozen=True)
class RateEstimate:
    """Least-squares fit ``D_n ~ C_hat * q_hat**n`` over ``window``."""

    q_hat: float
    C_hat: float
    r_squared: float
    window: tuple


def _iterate(x0, steps, stop):
    """Apply ``steps`` cyclically from ``x0``.

    Each step returns the new state and its step gap.  Iterates whose gap
    is exactly zero are not recorded; the run stops after ``len(steps)``
    consecutive gaps below ``stop.tol_step``.
    """
    x = np.asarray(x0, dtype=float)
    states = [x]
    gaps = [np.nan]
    small = 0
    best, since_best = np.inf, 0
    reason = "max_iter"
    for k in range(stop.max_iter):
        x_new, gap = steps[k % len(steps)](x)
        if gap > 0:
            states.append(x_new)
            gaps.append(gap)
            x = x_new
        small = small + 1 if gap <= stop.tol_step else 0
        if small >= len(steps):
            reason = "tol_reached"
            break
        if k < len(steps) or gap < best:
            best, since_best = gap, 0
        else:
            since_best += 1
            if since_best >= _STALL_WINDOW:
                reason = "stalled"
                break
    return np.array(states), np.array(gaps), reason, gap


def _finish_trace(primal, gaps, limit, kind, reason, last_gap, cfg,
                  d_to_limit, dual_states=None):
    trace = IterationTrace(
        iterates=primal,
        d_breg_to_limit=np.atleast_1d(d_to_limit),
        dist_to_limit=np.atleast_1d(norm(primal - limit, cfg)),
        norms=np.atleast_1d(norm(primal, cfg)),
        step_gap=gaps,
        limit=limit,
        limit_kind=kind,
        stop_reason=reason,
        dual_iterates=dual_states,
    )
    if reason == "max_iter" and last_gap > _NONCONVERGENCE_GAP:
        raise NonConvergence(
            f"max_iter reached with step gap {last_gap:.3e}", trace)
    return trace


def _bregman_step(x, S, cfg, opts):
    # the projection's objective D(Pi x, x) is exactly the step gap
    r = bregman_project(x, S, cfg, opts)
    return r.point, r.objective


def alternate_bregman(x0, M: Subspace, N: Subspace, cfg: SpaceConfig,
                      stop=None, opts=None):
    """Alternating Bregman projections ``x_{2n+1} = Pi_M x_{2n}``,
    ``x_{2n+2} = Pi_N x_{2n+1}``.

    The limit field holds ``Pi_{M & N} x0`` computed by a direct projection.
    """
    stop = stop or StopRule()
    x0 = np.asarray(x0, dtype=float)
    limit = bregman_project(x0, intersect(M, N), cfg, opts).point
    steps = [lambda x, S=S: _bregman_step(x, S, cfg, opts) for S in (M, N)]
    states, gaps, reason, last = _iterate(x0, steps, stop)
    return _finish_trace(states, gaps, limit,
                         "bregman_projection_of_x0", reason, last, cfg,
                         bregman_distance(limit, states, cfg))


def _residual_trace(x0, subspaces, cfg, stop, opts, engine):
    x0 = np.asarray(x0, dtype=float)
    total = subspaces[0]
    for S in subspaces[1:]:
        total = subspace_sum(total, S)
    limit = x0 - metric_project_direct(x0, total, cfg, opts).point
    if engine == "direct":
        def residual_step(x, S):
            x_new = x - metric_project_direct(x, S, cfg, opts).point
            return x_new, bregman_distance(x, x_new, cfg)

        steps = [lambda x, S=S: residual_step(x, S) for S in subspaces]
        states, gaps, reason, last = _iterate(x0, steps, stop)
        primal, dual_states = states, None
    elif engine == "dual":
        dual = cfg.dual()
        steps = [lambda y, A=annihilator(S): _bregman_step(y, A, dual, opts)
                 for S in subspaces]
        dual_states, gaps, reason, last = _iterate(
            duality_map(x0, cfg), steps, stop)
        primal = duality_map(dual_states, dual)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    return _finish_trace(primal, gaps, limit,
                         "residual_projection_of_x0", reason, last, cfg,
                         bregman_distance(primal, limit, cfg), dual_states)


def alternate_residual_metric(x0, M: Subspace, N: Subspace, cfg: SpaceConfig,
                              stop=None, engine="direct", opts=None):
    """Alternating residual method ``x <- (I - P_M) x``, ``x <- (I - P_N) x``.

    ``engine="direct"`` subtracts metric projections; ``engine="dual"`` runs
    alternating Bregman projections onto ``M^perp``, ``N^perp`` in X* from
    ``y0 = j_p(x0)`` and records ``x_n = j_{p*}(y_n)``.  Both converge to
    ``(I - P_{M+N}) x0``, which is stored as the limit.
    """
    return _residual_trace(x0, [M, N], cfg, stop or StopRule(), opts, engine)


def alternate_residual_cyclic(x0, subspaces, cfg: SpaceConfig, stop=None,
                              opts=None):
    """Cyclic residual method ``(I - P_{M_k}) ... (I - P_{M_1})`` repeated."""
    subspaces = list(subspaces)
    if len(subspaces) < 2:
        raise ValueError("need at least two subspaces")
    return _residual_trace(x0, subspaces, cfg, stop or StopRule(), opts,
                           "direct")


def check_bregman_monotone(trace, C: Subspace, cfg: SpaceConfig, points=None,
                           n_samples=32, seed=0):
    """Largest increase ``D_p(z, x_k) - D_p(z, x_l)`` over ``k >= l``.

    ``z`` ranges over the origin, the optional ``points`` and ``n_samples``
    seeded random elements of ``C``.  ``trace`` is an :class:`IterationTrace`
    or an array of iterates.  A Bregman monotone sequence gives a value of
    zero up to rounding.
    """
    xs = np.asarray(getattr(trace, "iterates", trace), dtype=float)
    zs = [np.zeros(cfg.n)]
    if points is not None:
        zs.extend(np.atleast_2d(points))
    if C.rank and n_samples:
        rng = np.random.default_rng(seed)
        scale = np.max(norm(xs, cfg))
        coef = rng.standard_normal((n_samples, C.rank))
        zs.extend(scale * coef @ C.orthonormal_basis)
    worst = 0.0
    for z in zs:
        d = bregman_distance(z, xs, cfg)
        worst = max(worst, float(np.max(d - np.minimum.accumulate(d))))
    return worst


def estimate_linear_rate(trace, skip=3, floor=1e-13, min_points=5):
    """Fit ``log D_n = log C + n log q`` to a distance sequence.

    ``trace`` is an :class:`IterationTrace` (its ``d_breg_to_limit`` is used)
    or a 1-D array.  The first ``skip`` entries and everything from the first
    value at or below ``floor`` onward are excluded.
    """
    d = np.asarray(getattr(trace, "d_breg_to_limit", trace), dtype=float)
    below = np.flatnonzero(~(d[skip:] > floor))
    stop = skip + (below[0] if below.size else d.size - skip)
    n = np.arange(skip, stop)
    if n.size < min_points:
        raise InsufficientDecay(
            f"only {n.size} usable points in window [{skip}, {stop})")
    y = np.log(d[skip:stop])
    slope, intercept = np.polyfit(n, y, 1)
    resid = y - (slope * n + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / ss_tot if ss_tot > 0 else 1.0
    return RateEstimate(float(np.exp(slope)), float(np.exp(intercept)),
                        float(r2), (int(skip), int(stop)))
