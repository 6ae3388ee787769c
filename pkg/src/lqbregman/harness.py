"""Experiment drivers: the two worked examples, config-driven runs, probes.

Configurations are JSON objects::

    {
      "space": {"n": 3, "q": 3, "p": 3},
      "subspaces": {"M1": [[1, 0, 0], [0, 1, 0]], "M2": [[1, 0, 0], [0, 0, 1]]},
      "use": ["M1", "M2"],
      "x0": [1, 2, 3],
      "algorithm": "alternate_bregman",
      "engine": "direct",
      "stop": {"tol_step": 1e-12, "max_iter": 500},
      "seed": 0,
      "output": "runs/example1"
    }

``subspaces`` may also be a list of ``{"name": ..., "basis": ...}`` objects.
``use`` names the subspaces to iterate over, in order; by default all of
them.  ``x0`` is drawn from the seeded generator when absent.
"""

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .alternating import (
    StopRule,
    alternate_bregman,
    alternate_residual_cyclic,
    alternate_residual_metric,
    estimate_linear_rate,
)
from .errors import (
    ConfigParseError,
    DegenerateBasis,
    DimensionMismatch,
    InsufficientDecay,
    NonConvergence,
)
from .projections import bregman_project, bregman_project_batch
from .regularity import estimate_kappa, regularity_ratio
from .space import SpaceConfig, bregman_distance, norm
from .subspaces import Subspace, annihilator, intersect

__all__ = [
    "ExperimentConfig",
    "ExampleReport",
    "Check",
    "parse_config",
    "load_config",
    "run_example1",
    "run_example2",
    "run_experiment",
    "power_type_probe",
    "example1_pair",
    "example2_pair",
    "example2_point",
    "example2_lower_bound",
    "example2_intersection_distance",
    "to_json",
    "TRACE_HEADER",
]

ALGORITHMS = ("alternate_bregman", "alternate_residual", "cyclic_residual")
ENGINES = ("direct", "dual")
TRACE_HEADER = ["iter", "d_breg_to_limit", "dist_to_limit", "norm", "step_gap"]
KAPPA_SAMPLES = 2000


# ---------------------------------------------------------------------------
# serialization

def _fmt(v):
    """17 significant digits, so every double survives a round trip."""
    v = float(v)
    if math.isnan(v) or math.isinf(v):
        return "null"
    return format(v, ".17g")


def _to_json(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_to_json(v, indent, level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float, np.number)) and not isinstance(v, bool)
               for v in seq):
            return "[" + ", ".join(_to_json(v, indent, level) for v in seq) + "]"
        items = [pad + _to_json(v, indent, level + 1) for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt(obj)
    return json.dumps(str(obj))


def to_json(obj, indent=2):
    """JSON text with floats written to 17 significant digits."""
    return _to_json(obj, indent, 0) + "\n"


def _trace_csv(trace):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    for k in range(len(trace)):
        w.writerow([k, _fmt(trace.d_breg_to_limit[k]),
                    _fmt(trace.dist_to_limit[k]), _fmt(trace.norms[k]),
                    _fmt(trace.step_gap[k]).replace("null", "nan")])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# configuration

@dataclass
class ExperimentConfig:
    space: SpaceConfig
    subspaces: dict
    use: list
    x0: np.ndarray = None
    algorithm: str = "alternate_bregman"
    engine: str = "direct"
    stop: StopRule = field(default_factory=StopRule)
    seed: int = 0
    output: str = "experiment"
    kappa_samples: int = KAPPA_SAMPLES

    def selected(self):
        return [self.subspaces[name] for name in self.use]

    def initial_point(self):
        if self.x0 is not None:
            return np.array(self.x0, dtype=float)
        return np.random.default_rng(self.seed).standard_normal(self.space.n)


def _require(obj, key, kind, where="config"):
    if key not in obj:
        raise ConfigParseError(f"{where}: missing key {key!r}")
    value = obj[key]
    if kind is not None and not isinstance(value, kind):
        raise ConfigParseError(f"{where}: {key!r} has the wrong type")
    return value


def parse_config(obj) -> ExperimentConfig:
    """Validate a decoded JSON object and build an :class:`ExperimentConfig`."""
    if not isinstance(obj, dict):
        raise ConfigParseError("config must be a JSON object")
    sp = _require(obj, "space", dict)
    try:
        space = SpaceConfig(_require(sp, "n", int, "space"),
                            float(_require(sp, "q", (int, float), "space")),
                            None if sp.get("p") is None else float(sp["p"]))
    except (TypeError, ValueError) as exc:
        raise ConfigParseError(f"space: {exc}") from None

    raw = _require(obj, "subspaces", (dict, list))
    if isinstance(raw, list):
        try:
            raw = {item["name"]: item["basis"] for item in raw}
        except (TypeError, KeyError):
            raise ConfigParseError(
                "subspaces list entries need 'name' and 'basis'") from None
    subspaces = {}
    for name, rows in raw.items():
        try:
            subspaces[name] = Subspace(np.asarray(rows, dtype=float)
                                       .reshape(-1, space.n), space.n)
        except (ValueError, TypeError, DegenerateBasis, DimensionMismatch) as exc:
            raise ConfigParseError(f"subspace {name!r}: {exc}") from None

    use = obj.get("use", list(subspaces))
    if not isinstance(use, list) or not use:
        raise ConfigParseError("'use' must be a non-empty list of names")
    for name in use:
        if name not in subspaces:
            raise ConfigParseError(f"unknown subspace name {name!r}")

    algorithm = obj.get("algorithm", "alternate_bregman")
    if algorithm not in ALGORITHMS:
        raise ConfigParseError(f"unknown algorithm {algorithm!r}")
    engine = obj.get("engine", "direct")
    if engine not in ENGINES:
        raise ConfigParseError(f"unknown engine {engine!r}")
    if algorithm in ("alternate_bregman", "alternate_residual") and len(use) != 2:
        raise ConfigParseError(f"{algorithm} needs exactly two subspaces")
    if algorithm == "cyclic_residual" and len(use) < 2:
        raise ConfigParseError("cyclic_residual needs at least two subspaces")

    x0 = obj.get("x0")
    if x0 is not None:
        try:
            x0 = np.asarray(x0, dtype=float)
        except (TypeError, ValueError):
            raise ConfigParseError("x0 must be a list of numbers") from None
        if x0.shape != (space.n,):
            raise ConfigParseError(f"x0 must have length {space.n}")

    st = obj.get("stop", {})
    try:
        stop = StopRule(float(st.get("tol_step", 1e-12)),
                        int(st.get("max_iter", 500)))
    except (TypeError, ValueError, AttributeError) as exc:
        raise ConfigParseError(f"stop: {exc}") from None

    seed = obj.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigParseError("seed must be an integer")
    output = obj.get("output", "experiment")
    if not isinstance(output, str):
        raise ConfigParseError("output must be a path prefix string")
    kappa_samples = obj.get("kappa_samples", KAPPA_SAMPLES)
    if not isinstance(kappa_samples, int) or kappa_samples < 0:
        raise ConfigParseError("kappa_samples must be a non-negative integer")
    return ExperimentConfig(space, subspaces, list(use), x0, algorithm, engine,
                            stop, seed, output, kappa_samples)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ConfigParseError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"{path}: invalid JSON ({exc})") from None
    return parse_config(obj)


# ---------------------------------------------------------------------------
# experiments

def _run_trace(config):
    cfg = config.space
    x0 = config.initial_point()
    subs = config.selected()
    if config.algorithm == "alternate_bregman":
        return alternate_bregman(x0, subs[0], subs[1], cfg, config.stop)
    if config.algorithm == "alternate_residual":
        return alternate_residual_metric(x0, subs[0], subs[1], cfg, config.stop,
                                         engine=config.engine)
    return alternate_residual_cyclic(x0, subs, cfg, config.stop)


def _kappa(config):
    """Sampled constant for the pair that governs the run's rate."""
    if config.algorithm == "cyclic_residual" or config.kappa_samples == 0:
        return None
    M, N = config.selected()
    if config.algorithm == "alternate_bregman":
        rep = estimate_kappa(M, N, config.space, n_samples=config.kappa_samples,
                             seed=config.seed)
    else:
        # the residual method is alternating Bregman projection in X*
        rep = estimate_kappa(annihilator(M), annihilator(N), config.space.dual(),
                             n_samples=config.kappa_samples, seed=config.seed)
    return rep.kappa_hat


def run_experiment(config: ExperimentConfig, out=None):
    """Run one configured experiment and write its trace and summary.

    Files go to ``<prefix>_trace.csv`` and ``<prefix>_summary.json`` where
    the prefix is ``out`` or ``config.output``.  Returns ``(status, summary)``
    with status 0 when the iteration converged and 1 otherwise.
    """
    try:
        trace = _run_trace(config)
    except NonConvergence as exc:
        trace = exc.trace
    if trace is None:
        raise RuntimeError("iteration produced no trace")
    try:
        r = estimate_linear_rate(trace)
        rate = {"q_hat": r.q_hat, "C_hat": r.C_hat, "r_squared": r.r_squared}
    except InsufficientDecay:
        rate = {"q_hat": None, "C_hat": None, "r_squared": None}
    summary = {
        "limit": list(trace.limit),
        "rate": rate,
        "kappa_hat": _kappa(config),
        "iterations": len(trace) - 1,
        "stop_reason": trace.stop_reason,
    }
    prefix = out or config.output
    folder = os.path.dirname(prefix)
    if folder:
        os.makedirs(folder, exist_ok=True)
    with open(prefix + "_trace.csv", "w", newline="") as fh:
        fh.write(_trace_csv(trace))
    with open(prefix + "_summary.json", "w") as fh:
        fh.write(to_json(summary))
    status = 0 if trace.stop_reason == "tol_reached" else 1
    return status, summary


# ---------------------------------------------------------------------------
# worked examples

@dataclass(frozen=True)
class Check:
    name: str
    expected: float
    computed: float
    abs_err: float
    passed: bool


@dataclass
class ExampleReport:
    checks: list = field(default_factory=list)

    @property
    def overall_pass(self):
        return all(c.passed for c in self.checks)

    def add(self, name, expected, computed, tol, relative=False, kind="close"):
        """Record a comparison.

        ``kind`` is ``"close"`` (|computed - expected| <= tol, scaled by
        |expected| when ``relative``), ``"le"`` (computed <= expected + tol),
        ``"ge"`` (computed >= expected - tol) or ``"gt"`` (strictly above).
        """
        expected, computed = float(expected), float(computed)
        err = abs(computed - expected)
        if kind == "close":
            ok = err <= tol * (abs(expected) if relative else 1.0)
        elif kind == "le":
            ok = computed <= expected + tol
        elif kind == "ge":
            ok = computed >= expected - tol
        elif kind == "gt":
            ok = computed > expected + tol
        else:
            raise ValueError(kind)
        self.checks.append(Check(name, expected, computed, err, bool(ok)))

    def to_dict(self):
        return {"overall_pass": self.overall_pass,
                "checks": [{"name": c.name, "expected": c.expected,
                            "computed": c.computed, "abs_err": c.abs_err,
                            "pass": c.passed} for c in self.checks]}


def example1_pair():
    """span{e1, e2} and span{e1, e3} in R^3."""
    return Subspace.coordinate([0, 1], 3), Subspace.coordinate([0, 2], 3)


def run_example1(q=3.0, samples=1000, seed=0, v=None):
    """Coordinate-plane pair: solver output against the closed forms.

    Checks the golden point (1, 2, 3) (or ``v``) and then ``samples`` seeded
    random points: projections equal dropping one coordinate, the three
    distances equal ``(1 - 1/q)`` times the dropped ``|.|**q`` terms and the
    ratio stays below 2.
    """
    cfg = SpaceConfig(3, q)
    M1, M2 = example1_pair()
    inter = intersect(M1, M2)
    c = 1.0 - 1.0 / q
    rep = ExampleReport()

    v = np.array([1.0, 2.0, 3.0] if v is None else v, dtype=float)
    d1 = bregman_project(v, M1, cfg).objective
    d2 = bregman_project(v, M2, cfg).objective
    di = bregman_project(v, inter, cfg).objective
    rep.add("D(M1,v)", c * abs(v[2]) ** q, d1, 1e-8, relative=True)
    rep.add("D(M2,v)", c * abs(v[1]) ** q, d2, 1e-8, relative=True)
    rep.add("D(M1&M2,v)", c * (abs(v[1]) ** q + abs(v[2]) ** q), di, 1e-8,
            relative=True)
    if max(d1, d2) > 0:
        rep.add("ratio(v)", 2.0, regularity_ratio(v, M1, M2, cfg), 1e-10,
                kind="le")

    if samples:
        V = np.random.default_rng(seed).standard_normal((samples, 3))
        P1 = bregman_project_batch(V, M1, cfg)
        P2 = bregman_project_batch(V, M2, cfg)
        Pi = bregman_project_batch(V, inter, cfg)
        drop_z, drop_y, keep_x = V.copy(), V.copy(), np.zeros_like(V)
        drop_z[:, 2] = 0.0
        drop_y[:, 1] = 0.0
        keep_x[:, 0] = V[:, 0]
        for name, P, ref in (("Pi_M1", P1, drop_z), ("Pi_M2", P2, drop_y),
                             ("Pi_M1&M2", Pi, keep_x)):
            rep.add(f"max |{name} v - formula|", 0.0,
                    np.max(np.abs(P.point - ref)), 1e-8)
        ay, az = np.abs(V[:, 1]) ** q, np.abs(V[:, 2]) ** q
        for name, P, ref in (("D(M1,v)", P1, c * az), ("D(M2,v)", P2, c * ay),
                             ("D(M1&M2,v)", Pi, c * (ay + az))):
            rel = np.max(np.abs(P.objective - ref) / np.maximum(ref, 1e-300))
            rep.add(f"max rel err {name}", 0.0, rel, 1e-8)
        den = np.maximum(P1.objective, P2.objective)
        slack = 2.0 * den - Pi.objective
        rep.add("min slack of D(M1&M2,v) <= 2 max", 0.0,
                np.min(slack[den > 0]) if np.any(den > 0) else 0.0, 1e-10,
                kind="ge")
    return rep


_V0 = np.array([1.0, 0.0, 0.5])


def example2_pair():
    """The two nearly parallel planes through (1, 0, 1/2)."""
    return (Subspace([[1.0, 0.0, 0.5], [1.0, 1.0, 0.99]]),
            Subspace([[1.0, 0.0, 0.5], [1.0, 1.0, 1.01]]))


def example2_point(lam):
    """v_lambda = (1 - lambda) (1, 0, 1/2) + lambda (1, 1, 1)."""
    return (1.0 - lam) * _V0 + lam * np.ones(3)


def example2_objective(t, lam):
    """Closed form of t -> D_3(t v, v_lambda) for t >= 0."""
    h = lam / 2.0 + 0.5
    return (2.0 * lam ** 3 / 3.0 + 3.0 * t ** 3 / 8.0 - t - h ** 3 / 3.0
            - h ** 2 * (-lam / 2.0 + t / 2.0 - 0.5) + 2.0 / 3.0)


def example2_t(lam):
    return math.sqrt(lam * lam + 2.0 * lam + 9.0) / 3.0


def example2_intersection_distance(lam):
    """D_3 from v_lambda to the intersection line, in closed form.

    Written as ``(A - w**1.5) / 36`` with ``A = 27l^3 + 9l^2 + 9l + 27`` and
    ``w = l^2 + 2l + 9``, and evaluated through
    ``A^2 - w^3 = 8 l^2 (91 l^4 + 60 l^3 + 66 l^2 + 188 l + 27)`` to avoid
    cancellation for small lambda.
    """
    lam = float(lam)
    a = 27 * lam ** 3 + 9 * lam ** 2 + 9 * lam + 27
    w = lam * lam + 2 * lam + 9
    top = 8 * lam ** 2 * (91 * lam ** 4 + 60 * lam ** 3 + 66 * lam ** 2
                          + 188 * lam + 27)
    return top / (a + w ** 1.5) / 36.0


def example2_lower_bound(lam):
    """Closed-form lower bound on the regularity ratio at v_lambda."""
    return 117649.0 * 36.0 * example2_intersection_distance(lam) / (1776.0 * lam ** 3)


def run_example2(lambda_grid=(0.1, 0.01, 0.001)):
    """Near-parallel planes in l^3_3: closed forms and a growing ratio."""
    cfg = SpaceConfig(3, 3)
    M1, M2 = example2_pair()
    inter = intersect(M1, M2)
    rep = ExampleReport()
    ratios = []
    for lam in lambda_grid:
        lam = float(lam)
        if not 0 < lam <= 1:
            raise ValueError(f"lambda must lie in (0, 1], got {lam}")
        v = example2_point(lam)
        t_star = example2_t(lam)
        for t in (0.5, 1.0, t_star, 1.5):
            rep.add(f"D(tv, v) at lambda={lam:g}, t={t:.6g}",
                    example2_objective(t, lam),
                    bregman_distance(t * _V0, v, cfg), 1e-10)
        pi = bregman_project(v, inter, cfg)
        # coefficient of the projection along (1, 0, 1/2)
        t_hat = float(pi.point @ _V0 / (_V0 @ _V0))
        rep.add(f"t at lambda={lam:g}", t_star, t_hat, 1e-8)
        rep.add(f"D(M1&M2, v) at lambda={lam:g}",
                example2_intersection_distance(lam), pi.objective, 1e-8)
        d1 = bregman_project(v, M1, cfg).objective
        d2 = bregman_project(v, M2, cfg).objective
        rep.add(f"D(M1, v) bound at lambda={lam:g}", 148 * lam ** 3 / 352947,
                d1, 1e-12, kind="le")
        rep.add(f"D(M2, v) bound at lambda={lam:g}", 152 * lam ** 3 / 397953,
                d2, 1e-12, kind="le")
        ratio = regularity_ratio(v, M1, M2, cfg)
        ratios.append(ratio)
        rep.add(f"ratio lower bound at lambda={lam:g}",
                example2_lower_bound(lam), ratio, 0.0, kind="ge")
    for (l0, r0), (l1, r1) in zip(zip(lambda_grid, ratios),
                                  zip(lambda_grid[1:], ratios[1:])):
        # increasing as lambda decreases along the grid
        if l1 < l0:
            rep.add(f"ratio({l1:g}) > ratio({l0:g})", r0, r1, 0.0, kind="gt")
    return rep


# ---------------------------------------------------------------------------
# power-type probe

def power_type_probe(q, R=2.0, n_pairs=10_000, seed=0, p=None,
                     separations=(1e-4, 1e-1)):
    """Fit the exponent of ``D_p(x, y) ~ ||x - y||**s`` at small separations.

    Pairs have ``||x||, ||y|| <= R`` and ``||x - y||`` log-uniform in
    ``separations``.  The fitted slope is compared with
    ``[sigma - 0.15, rho + 0.15]``.  For q = p = 2 the identity
    ``D_2(x, y) = ||x - y||**2 / 2`` is also checked on pairs with norms up
    to 1e6, i.e. without a radius restriction.
    """
    cfg = SpaceConfig(3, q, p)
    rng = np.random.default_rng(seed)
    lo, hi = separations
    if not (R > 0 and 0 < lo < hi):
        raise ValueError("need R > 0 and 0 < lo < hi")

    def unit(k):
        g = rng.standard_normal((k, cfg.n))
        return g / norm(g, cfg)[:, None]

    hi = min(hi, R / 2)
    radius = (R - hi) * rng.random(n_pairs) ** (1.0 / cfg.n)
    X = unit(n_pairs) * radius[:, None]
    sep = np.exp(rng.uniform(np.log(lo), np.log(hi), n_pairs))
    Y = X + unit(n_pairs) * sep[:, None]
    D = bregman_distance(X, Y, cfg)
    keep = D > 0
    slope, intercept = np.polyfit(np.log(sep[keep]), np.log(D[keep]), 1)
    band = (cfg.sigma - 0.15, cfg.rho + 0.15)
    report = {
        "q": cfg.q,
        "p": cfg.p,
        "R": float(R),
        "pairs": int(n_pairs),
        "slope": float(slope),
        "intercept": float(intercept),
        "band": list(band),
        "slope_in_band": bool(band[0] <= slope <= band[1]),
    }
    if cfg.q == 2 and cfg.p == 2:
        scale = 10.0 ** rng.uniform(-6, 6, (n_pairs, 1))
        A = rng.standard_normal((n_pairs, cfg.n)) * scale
        B = rng.standard_normal((n_pairs, cfg.n)) * scale
        exact = 0.5 * np.sum((A - B) ** 2, axis=1)
        err = np.abs(bregman_distance(A, B, cfg) - exact) / np.maximum(exact, 1e-300)
        report["hilbert_identity_max_rel_err"] = float(np.max(err))
        report["hilbert_identity_ok"] = bool(np.max(err) <= 1e-12)
    report["passed"] = report["slope_in_band"] and report.get(
        "hilbert_identity_ok", True)
    return report
