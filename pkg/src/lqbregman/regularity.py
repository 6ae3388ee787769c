"""Sampled regularity constants for pairs of subspaces.

The linear Bregman regularity constant of ``(M, N)`` is the supremum over
x of::

    D_p(M & N, x) / max(D_p(M, x), D_p(N, x))

Every term is p-homogeneous, so the ratio only depends on the direction of
x and sampling one sphere (or ball) is enough.  A sample supremum can only
bound kappa from below; :class:`RegularityReport` keeps the worst point so
that a surprising value can be reproduced.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import PointInIntersection
from .projections import bregman_distance_to, metric_distance
from .space import SpaceConfig, duality_map, norm
from .subspaces import Subspace, annihilator, intersect, subspace_sum

__all__ = [
    "RegularityReport",
    "regularity_ratio",
    "regularity_ratios",
    "estimate_kappa",
    "metric_regularity_ratio",
    "dual_regularity_check",
    "dual_distance_identity_gap",
    "minimal_dual_kappa",
    "MIN_DENOMINATOR",
]

# below this the point is treated as lying in the intersection
MIN_DENOMINATOR = 1e-14
# running supremum growth between sample-size doublings flagged as divergence
GROWTH_FACTOR = 10.0
_FIRST_DOUBLING = 16
_HIST_BINS = 20


@dataclass
class RegularityReport:
    """Outcome of :func:`estimate_kappa`.

    ``diverging`` comes from a heuristic (supremum growth across doublings
    of the sample size, or a refinement probe whose ratios keep climbing);
    it is a warning sign rather than a proof.
    """

    kappa_hat: float
    worst_point: np.ndarray
    samples: int
    ratio_histogram: list
    diverging: bool
    rejected: int = 0
    running_sup: list = field(default_factory=list)
    probe_ratios: list = field(default_factory=list)

    def __post_init__(self):
        if not self.kappa_hat >= 1.0:
            raise ValueError(f"kappa_hat must be >= 1, got {self.kappa_hat}")

    def to_dict(self):
        return {
            "kappa_hat": float(self.kappa_hat),
            "samples": int(self.samples),
            "diverging": bool(self.diverging),
            "diverging_is_heuristic": True,
            "worst_point": [float(v) for v in self.worst_point],
            "histogram": [[float(r), int(c)] for r, c in self.ratio_histogram],
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def _distances(X, M, N, cfg, opts):
    inter = intersect(M, N)
    d_m = np.atleast_1d(bregman_distance_to(M, X, cfg, opts))
    d_n = np.atleast_1d(bregman_distance_to(N, X, cfg, opts))
    d_i = np.atleast_1d(bregman_distance_to(inter, X, cfg, opts))
    return d_i, np.maximum(d_m, d_n)


def regularity_ratios(X, M: Subspace, N: Subspace, cfg: SpaceConfig,
                      opts=None, min_denominator=MIN_DENOMINATOR):
    """Batched regularity ratios; NaN where the denominator is too small."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    num, den = _distances(X, M, N, cfg, opts)
    ok = den >= min_denominator
    return np.where(ok, num / np.where(ok, den, 1.0), np.nan)


def regularity_ratio(x, M: Subspace, N: Subspace, cfg: SpaceConfig,
                     opts=None, min_denominator=MIN_DENOMINATOR):
    """``D_p(M & N, x) / max(D_p(M, x), D_p(N, x))`` at one point.

    Raises :class:`PointInIntersection` when the denominator is below
    ``min_denominator``.
    """
    x = np.asarray(x, dtype=float)
    num, den = _distances(x[None, :], M, N, cfg, opts)
    if not den[0] >= min_denominator:
        raise PointInIntersection(
            f"max(D_p(M,x), D_p(N,x)) = {den[0]:.3e} is below "
            f"{min_denominator:.0e}")
    return float(num[0] / den[0])


def _draw(rng, sampler, n_samples, cfg):
    g = rng.standard_normal((n_samples, cfg.n))
    nrm = norm(g, cfg)
    nrm = np.where(nrm > 0, nrm, 1.0)
    u = g / nrm[:, None]
    if sampler == "sphere_uniform":
        return u
    if sampler == "bregman_ball":
        # D_p(x, 0) = ||x||^p / p <= 1, radius uniform in volume
        radius = cfg.p ** (1.0 / cfg.p) * rng.random(n_samples) ** (1.0 / cfg.n)
        return u * radius[:, None]
    raise ValueError(f"unknown sampler {sampler!r}")


def _histogram(ratios):
    if ratios.size == 0:
        return []
    lo, hi = np.min(ratios), np.max(ratios)
    if hi <= lo * (1 + 1e-12):
        return [(float(lo), int(ratios.size))]
    edges = np.geomspace(lo, hi, _HIST_BINS + 1)
    counts, _ = np.histogram(ratios, bins=edges)
    return [(float(e), int(c)) for e, c in zip(edges[:-1], counts)]


def _running_sup(ratios):
    """Supremum over the first 16, 32, 64, ... samples (and all of them)."""
    sizes = []
    k = _FIRST_DOUBLING
    while k < ratios.size:
        sizes.append(k)
        k *= 2
    sizes.append(ratios.size)
    sups = []
    for k in sizes:
        head = ratios[:k]
        head = head[np.isfinite(head)]
        sups.append(float(np.max(head)) if head.size else 1.0)
    return sizes, sups


def _probe_diverges(ratios):
    r = np.asarray(ratios, dtype=float)
    return bool(r.size >= 2 and np.all(np.diff(r) > 0)
                and r[-1] > GROWTH_FACTOR * r[0])


def estimate_kappa(M: Subspace, N: Subspace, cfg: SpaceConfig,
                   sampler="sphere_uniform", n_samples=10_000, seed=0,
                   probe_points=None, opts=None):
    """Sample the regularity ratio and report its supremum.

    ``sampler`` is ``"sphere_uniform"`` (directions normalized to the unit
    l_q sphere) or ``"bregman_ball"`` (points of ``{x : D_p(x, 0) <= 1}``).
    ``probe_points`` is an optional refinement sequence, ordered so that the
    ratio is expected to grow along it; it is evaluated on top of the random
    samples.  ``diverging`` is set when the running supremum grows more than
    tenfold between two sample-size doublings or when the probe ratios are
    strictly increasing with a total growth above tenfold.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    rng = np.random.default_rng(seed)
    X = _draw(rng, sampler, int(n_samples), cfg)
    ratios = regularity_ratios(X, M, N, cfg, opts)
    valid = np.isfinite(ratios)
    sizes, sups = _running_sup(ratios)
    diverging = any(b > GROWTH_FACTOR * a for a, b in zip(sups, sups[1:]))

    probe = []
    worst, kappa = None, 1.0
    if np.any(valid):
        i = int(np.nanargmax(ratios))
        worst, kappa = X[i], float(ratios[i])
    if probe_points is not None:
        P = np.atleast_2d(np.asarray(probe_points, dtype=float))
        pr = regularity_ratios(P, M, N, cfg, opts)
        probe = [float(r) for r in pr[np.isfinite(pr)]]
        diverging = diverging or _probe_diverges(probe)
        if probe and max(probe) > kappa:
            j = int(np.nanargmax(pr))
            worst, kappa = P[j], float(pr[j])
    if worst is None:
        worst = np.zeros(cfg.n)
    return RegularityReport(
        kappa_hat=max(kappa, 1.0),
        worst_point=np.array(worst),
        samples=int(n_samples),
        ratio_histogram=_histogram(ratios[valid]),
        diverging=bool(diverging),
        rejected=int(np.sum(~valid)),
        running_sup=list(zip(sizes, sups)),
        probe_ratios=probe,
    )


def metric_regularity_ratio(x, M: Subspace, N: Subspace, cfg: SpaceConfig,
                            opts=None, min_denominator=MIN_DENOMINATOR):
    """``dist(x, M & N) / max(dist(x, M), dist(x, N))`` in the l_q norm."""
    x = np.asarray(x, dtype=float)
    den = max(metric_distance(M, x, cfg, opts), metric_distance(N, x, cfg, opts))
    if not den >= min_denominator:
        raise PointInIntersection(
            f"max(dist(x,M), dist(x,N)) = {den:.3e} is below "
            f"{min_denominator:.0e}")
    return float(metric_distance(intersect(M, N), x, cfg, opts) / den)


def dual_regularity_check(x, M: Subspace, N: Subspace, cfg: SpaceConfig,
                          kappa, opts=None):
    """Slack of ``min(d(x,M)^p, d(x,N)^p) <= (k-1)/k ||x||^p + d(x,M+N)^p / k``.

    Returns right side minus left side, so a nonnegative value means the
    condition holds at x.  Accepts one point or a batch.
    """
    if not kappa >= 1:
        raise ValueError("kappa must be >= 1")
    p = cfg.p
    xp = norm(x, cfg) ** p
    dm = metric_distance(M, x, cfg, opts) ** p
    dn = metric_distance(N, x, cfg, opts) ** p
    ds = metric_distance(subspace_sum(M, N), x, cfg, opts) ** p
    slack = (kappa - 1.0) / kappa * xp + ds / kappa - np.minimum(dm, dn)
    return slack if np.ndim(slack) else float(slack)


def minimal_dual_kappa(x, M: Subspace, N: Subspace, cfg: SpaceConfig,
                       opts=None):
    """Smallest kappa for which :func:`dual_regularity_check` is >= 0 at x.

    Solves ``(||x||^p - d(x,M+N)^p) / (||x||^p - min(d(x,M)^p, d(x,N)^p))``;
    returns 1 where both sides vanish and inf where only the bottom does.
    """
    p = cfg.p
    xp = norm(x, cfg) ** p
    dm = metric_distance(M, x, cfg, opts) ** p
    dn = metric_distance(N, x, cfg, opts) ** p
    ds = metric_distance(subspace_sum(M, N), x, cfg, opts) ** p
    top = np.maximum(xp - ds, 0.0)
    bottom = np.maximum(xp - np.minimum(dm, dn), 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        k = np.where(bottom > 0, top / np.where(bottom > 0, bottom, 1.0),
                     np.where(top > 0, np.inf, 1.0))
    k = np.maximum(k, 1.0)
    return k if np.ndim(k) else float(k)


def dual_distance_identity_gap(x, M: Subspace, cfg: SpaceConfig, opts=None):
    """``D_{p*}(M^perp, j_p x) - (||x||^p - d(x,M)^p) / p``; zero in theory."""
    p = cfg.p
    lhs = bregman_distance_to(annihilator(M), duality_map(x, cfg), cfg.dual(),
                              opts)
    rhs = (norm(x, cfg) ** p - metric_distance(M, x, cfg, opts) ** p) / p
    gap = lhs - rhs
    return gap if np.ndim(gap) else float(gap)
