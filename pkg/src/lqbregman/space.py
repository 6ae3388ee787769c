"""Geometry of the finite-dimensional space l^n_q.

Vectors are plain float arrays whose last axis has length ``n``; leading
axes are treated as a batch.  Primal vectors live in l_q, dual vectors in
l_{q*}; which space a vector belongs to is carried by the :class:`SpaceConfig`
passed alongside it (``cfg`` for X, ``cfg.dual()`` for X*).

The Bregman distance is evaluated through a rearrangement that avoids the
catastrophic cancellation of the textbook formula, so that distances many
orders of magnitude below ``(1/p) * ||y||**p`` keep their relative accuracy.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NumericalConsistencyError

__all__ = [
    "SpaceConfig",
    "norm",
    "duality_map",
    "duality_map_inverse",
    "bregman_distance",
    "bregman_distance_naive",
    "three_point_gap",
    "gauge_value",
    "gauge_hessian",
]

# below this |t| the q - 2 power is frozen (only matters for q < 2)
HESSIAN_CLAMP = 1e-30
_NEG_SLACK = 1e-12
_SERIES_RADIUS = 0.125
_SERIES_TERMS = 40


@dataclass(frozen=True)
class SpaceConfig:
    """Ambient dimension ``n``, norm exponent ``q`` and gauge exponent ``p``.

    ``p`` defaults to ``q``.  ``rho = max(2, q)`` and ``sigma = min(2, q)``
    are the power types of uniform convexity and smoothness of l_q.
    """

    n: int
    q: float
    p: float = None
    p_star: float = field(init=False)
    q_star: float = field(init=False)
    rho: float = field(init=False)
    sigma: float = field(init=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not self.q > 1:
            raise ValueError(f"q must exceed 1, got {self.q!r}")
        p = self.q if self.p is None else self.p
        if not p > 1:
            raise ValueError(f"p must exceed 1, got {p!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "q", float(self.q))
        object.__setattr__(self, "p", float(p))
        object.__setattr__(self, "p_star", p / (p - 1.0))
        object.__setattr__(self, "q_star", self.q / (self.q - 1.0))
        object.__setattr__(self, "rho", max(2.0, self.q))
        object.__setattr__(self, "sigma", min(2.0, self.q))

    def dual(self) -> "SpaceConfig":
        """Configuration of X* = l_{q*} with gauge p*."""
        return SpaceConfig(self.n, self.q_star, self.p_star)

    @property
    def gauge_in_power_range(self) -> bool:
        """True when sigma <= p <= rho."""
        return self.sigma <= self.p <= self.rho


def _check(cfg, *arrays):
    out = []
    for a in arrays:
        a = np.asarray(a, dtype=float)
        if a.ndim == 0 or a.shape[-1] != cfg.n:
            raise DimensionMismatch(
                f"expected last axis of length {cfg.n}, got shape {a.shape}")
        out.append(a)
    return out if len(out) > 1 else out[0]


def _qsum(x, q):
    return np.sum(np.abs(x) ** q, axis=-1)


def norm(x, cfg: SpaceConfig):
    """The l_q norm ``(sum |x_i|**q)**(1/q)`` along the last axis."""
    x = _check(cfg, x)
    scale = np.max(np.abs(x), axis=-1)
    safe = np.where(scale > 0, scale, 1.0)
    return scale * _qsum(x / safe[..., None], cfg.q) ** (1.0 / cfg.q)


def gauge_value(x, cfg: SpaceConfig):
    """``(1/p) * ||x||_q**p``."""
    return norm(x, cfg) ** cfg.p / cfg.p


def _signed_pow(x, e):
    return np.sign(x) * np.abs(x) ** e


def duality_map(x, cfg: SpaceConfig):
    """j_p(x): gradient of ``(1/p) ||.||_q**p``; maps l_q into l_{q*}.

    ``j_p(x)_i = ||x||**(p - q) * |x_i|**(q - 1) * sign(x_i)`` and j_p(0) = 0.
    """
    x = _check(cfg, x)
    nx = norm(x, cfg)
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = np.where(nx > 0, nx ** (cfg.p - cfg.q), 0.0)
    return factor[..., None] * _signed_pow(x, cfg.q - 1.0)


def duality_map_inverse(xs, cfg: SpaceConfig):
    """j_{p*}: X* -> X, the inverse of :func:`duality_map` for ``cfg``."""
    return duality_map(xs, cfg.dual())


def gauge_hessian(x, cfg: SpaceConfig, floor=HESSIAN_CLAMP):
    """Hessian of ``(1/p) ||.||_q**p`` at ``x``; shape ``(..., n, n)``.

    For q < 2 the diagonal factor ``|x_i|**(q - 2)`` is evaluated at
    ``max(|x_i|, floor)``.
    """
    x = _check(cfg, x)
    p, q = cfg.p, cfg.q
    nx = norm(x, cfg)
    ax = np.abs(x)
    if q < 2:
        ax = np.maximum(ax, floor)
    diag = (q - 1.0) * ax ** (q - 2.0)
    g = _signed_pow(x, q - 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        f1 = np.where(nx > 0, nx ** (p - q), 0.0)
        f2 = np.where(nx > 0, (p - q) * nx ** (p - 2.0 * q), 0.0)
    hess = f1[..., None, None] * (diag[..., :, None] * np.eye(cfg.n))
    return hess + f2[..., None, None] * g[..., :, None] * g[..., None, :]


def _excess(u, r):
    """``(1 + u)**r - 1 - r*u`` for u >= -1, accurate for small |u|."""
    u = np.asarray(u, dtype=float)
    au = np.abs(u)
    small = au < _SERIES_RADIUS
    us = np.where(small, u, 0.0)
    # enough terms for |u|**(k - 2) to drop below double precision
    umax = np.max(au, where=small, initial=0.0)
    terms = _SERIES_TERMS
    if umax > 0:
        terms = min(terms, 3 + int(np.ceil(-37.0 / np.log(umax))))
    coef = r * (r - 1.0) / 2.0
    term = us * us
    acc = coef * term
    for k in range(3, terms):
        coef *= (r - k + 1.0) / k
        term = term * us
        acc = acc + coef * term
    if np.all(small):
        return acc
    with np.errstate(invalid="ignore", divide="ignore"):
        mid = np.expm1(r * np.log1p(u)) - r * u
        low = np.maximum(1.0 + u, 0.0) ** r - 1.0 - r * u
    return np.where(small, acc, np.where(u > -0.5, mid, low))


def _ratio(x, y):
    """``(x - y) / y`` where x lies between 0 and 2y (y != 0), else 0.

    Outside that range the direct formulas lose nothing to cancellation.
    """
    same = (np.sign(x) == np.sign(y)) & (np.abs(x - y) <= np.abs(y)) & (y != 0)
    return same, np.where(same, (x - y) / np.where(same, y, 1.0), 0.0)


def _pow_diff(x, y, r):
    """Elementwise ``|x|**r - |y|**r``."""
    same, u = _ratio(x, y)
    ay = np.abs(y)
    with np.errstate(divide="ignore", invalid="ignore"):
        near = ay ** r * np.expm1(r * np.log1p(u))
    return np.where(same, near, np.abs(x) ** r - ay ** r)


def _scalar_bregman(x, y, r):
    """Elementwise ``|x|**r - |y|**r - r |y|**(r-1) sign(y) (x - y)``."""
    same, u = _ratio(x, y)
    ay = np.abs(y)
    series = ay ** r * _excess(u, r)
    if np.all(same):
        return series
    direct = np.abs(x) ** r - ay ** r - r * _signed_pow(y, r - 1.0) * (x - y)
    return np.where(same, series, direct)


def _bregman_raw(x, y, cfg):
    p, q = cfg.p, cfg.q
    # common power-of-two scale keeps sum |.|**q away from under/overflow
    # without perturbing x - y
    s = np.maximum(np.max(np.abs(x), axis=-1), np.max(np.abs(y), axis=-1))
    s = np.ldexp(1.0, np.frexp(np.where(s > 0, s, 1.0))[1])
    x = x / s[..., None]
    y = y / s[..., None]
    sep = np.sum(_scalar_bregman(x, y, q), axis=-1) / q
    a, b = _qsum(x, q), _qsum(y, q)
    if p == q:
        d = sep
    else:
        # with a = sum|x|^q, b = sum|y|^q, r = p/q and u = (a - b)/b:
        #   D = b^r W(u, r) / p + b^(r-1) sep,   W(u, r) = (1+u)^r - 1 - r u
        # The two parts have opposite signs when r < 1, so this split is
        # only used for |u| <= 1/2, where it removes the cancellation of the
        # plain formula; farther out the plain formula is accurate.
        r = p / q
        amb = np.sum(_pow_diff(x, y, q), axis=-1)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            bpos = b > 0
            u = np.where(bpos, amb / np.where(bpos, b, 1.0), 0.0)
            near = bpos & (np.abs(u) <= 0.5)
            split = (b ** r * _excess(np.where(near, u, 0.0), r) / p
                     + b ** (r - 1.0) * sep)
            inner = np.sum(_signed_pow(y, q - 1.0) * (x - y), axis=-1)
            plain = (a ** r - b ** r) / p - np.where(bpos, b ** (r - 1.0), 0.0) * inner
            d = np.where(near, split, plain)
    scale = (a ** (p / q) + b ** (p / q)) / p
    return d * s ** p, scale * s ** p


def bregman_distance(x, y, cfg: SpaceConfig):
    """D_p(x, y) = (1/p)||x||^p - (1/p)||y||^p - <j_p(y), x - y>.

    Results in ``[-1e-12 * (1 + scale), 0)`` are clamped to zero, where
    ``scale`` is the size of the gauge terms; anything more negative raises
    :class:`NumericalConsistencyError`.
    """
    x, y = _check(cfg, x, y)
    d, scale = _bregman_raw(x, y, cfg)
    bad = d < -_NEG_SLACK * (1.0 + scale)
    if np.any(bad):
        raise NumericalConsistencyError(
            f"Bregman distance {np.min(d):.3e} is negative beyond rounding")
    d = np.maximum(d, 0.0)
    return d if d.ndim else float(d)


def bregman_distance_naive(x, y, cfg: SpaceConfig):
    """Literal three-term formula, without clamping. Kept as a reference."""
    x, y = _check(cfg, x, y)
    jy = duality_map(y, cfg)
    d = gauge_value(x, cfg) - gauge_value(y, cfg) - np.sum(jy * (x - y), axis=-1)
    return d if np.ndim(d) else float(d)


def three_point_gap(x, y, z, cfg: SpaceConfig):
    """Residual of the three-point identity.

    ``D(x,y) - D(x,z) - D(z,y) - <j_p(z) - j_p(y), x - z>``; zero up to
    rounding for every x, y, z.
    """
    x, y, z = _check(cfg, x, y, z)
    jz = duality_map(z, cfg)
    jy = duality_map(y, cfg)
    cross = np.sum((jz - jy) * (x - z), axis=-1)
    gap = (bregman_distance(x, y, cfg) - bregman_distance(x, z, cfg)
           - bregman_distance(z, y, cfg) - cross)
    return gap if np.ndim(gap) else float(gap)
