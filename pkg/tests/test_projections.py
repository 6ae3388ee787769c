import numpy as np
import pytest

from lqbregman.errors import DimensionMismatch, OracleRankTooHigh, SolverDivergence
from lqbregman.projections import (
    SolverOptions,
    bregman_distance_to,
    bregman_project,
    bregman_project_batch,
    brute_force_project_oracle,
    metric_distance,
    metric_project_batch,
    metric_project_direct,
    metric_project_via_duality,
    metric_project_via_duality_batch,
)
from lqbregman.space import SpaceConfig, bregman_distance, duality_map, norm
from lqbregman.subspaces import Subspace, contains, intersect


def golden_section(f, a, b, tol=1e-12):
    g = (np.sqrt(5) - 1) / 2
    c, d = b - g * (b - a), a + g * (b - a)
    while b - a > tol:
        if f(c) < f(d):
            b, d = d, c
            c = b - g * (b - a)
        else:
            a, c = c, d
            d = a + g * (b - a)
    return (a + b) / 2


def random_instance(rng, n, r):
    return Subspace(rng.normal(size=(r, n))), rng.normal(size=n) * 2


# ---- Bregman projection

def test_whole_and_zero_subspace():
    c = SpaceConfig(3, 3)
    x = np.array([0.5, -2.0, 1.0])
    r = bregman_project(x, Subspace.whole(3), c)
    np.testing.assert_array_equal(r.point, x)
    assert r.objective == 0
    r0 = bregman_project(x, Subspace.zero(3), c)
    np.testing.assert_array_equal(r0.point, 0)
    assert r0.objective == pytest.approx((1 - 1 / 3) * norm(x, c) ** 3)


def test_example1_coordinate_projection():
    c = SpaceConfig(3, 3)
    M1 = Subspace.coordinate([0, 1], 3)
    r = bregman_project([1, 2, 3], M1, c)
    np.testing.assert_allclose(r.point, [1, 2, 0], atol=1e-12)
    assert r.converged and r.residual <= 1e-11 * (1 + norm(duality_map([1, 2, 3], c), c.dual()))


def test_line_projection_against_golden_section():
    c = SpaceConfig(3, 3)
    v = np.array([1.0, 1.0, 1.0])
    x = np.array([1.0, 0.0, 0.0])
    t = golden_section(lambda t: bregman_distance(t * v, x, c), -2, 2)
    r = bregman_project(x, Subspace([v]), c)
    np.testing.assert_allclose(r.point, t * v, atol=1e-7)
    # first-order condition has the closed form 3 t^2 = 1
    np.testing.assert_allclose(r.point, v / np.sqrt(3), atol=1e-12)


def test_distance_to_examples():
    c = SpaceConfig(3, 3)
    M1, M2 = Subspace.coordinate([0, 1], 3), Subspace.coordinate([0, 2], 3)
    v = np.array([1.0, 2.0, 3.0])
    assert bregman_distance_to(M1, v, c) == pytest.approx(18, rel=1e-8)
    assert bregman_distance_to(intersect(M1, M2), v, c) == pytest.approx(70 / 3, rel=1e-8)
    assert bregman_distance_to(M1, [3.0, -1.0, 0.0], c) == 0


@pytest.mark.parametrize("q,p", [(1.5, 1.5), (2, 2), (3, 3), (4, 1.7), (1.3, 2.5)])
def test_bregman_postconditions(q, p):
    c = SpaceConfig(4, q, p)
    rng = np.random.default_rng(0)
    for _ in range(40):
        M, x = random_instance(rng, 4, int(rng.integers(1, 4)))
        r = bregman_project(x, M, c)
        y = r.point
        assert contains(M, y, 1e-8)
        jx = duality_map(x, c)
        orth = (duality_map(y, c) - jx) @ M.matrix
        assert np.linalg.norm(orth) <= 1e-9 * (1 + norm(jx, c.dual()))
        assert norm(y, c) <= norm(x, c) + 1e-10
        for lam in (0.5, 2.0, 10.0):
            np.testing.assert_allclose(bregman_project(lam * x, M, c).point,
                                       lam * y, atol=1e-8 * lam * (1 + np.max(np.abs(y))))


@pytest.mark.parametrize("q", [1.5, 2.0, 3.0])
@pytest.mark.parametrize("n", [3, 4])
def test_bregman_matches_oracle(q, n):
    c = SpaceConfig(n, q)
    rng = np.random.default_rng(int(10 * q) + n)
    for _ in range(17):
        M, x = random_instance(rng, n, int(rng.integers(1, 3)))
        ref = brute_force_project_oracle(x, M, c, "bregman")
        np.testing.assert_allclose(bregman_project(x, M, c).point, ref, atol=1e-6)


def test_single_and_batch_paths_agree():
    rng = np.random.default_rng(1)
    for q, p in [(3, 3), (1.5, 1.5), (4, 1.7), (1.3, 2.5), (3, 2)]:
        c = SpaceConfig(5, q, p)
        for _ in range(30):
            M = Subspace(rng.normal(size=(int(rng.integers(1, 5)), 5)))
            X = rng.normal(size=(3, 5)) * 10.0 ** rng.uniform(-3, 3)
            batch = bregman_project_batch(X, M, c)
            for k in range(3):
                single = bregman_project(X[k], M, c)
                assert np.max(np.abs(single.point - batch.point[k])) <= \
                    1e-12 * np.max(np.abs(X[k]))


def test_small_q_does_not_bounce():
    # Newton on |c|^1.5 with a full step lands on -c; the line search must stop it
    c = SpaceConfig(5, 1.5)
    M = Subspace([[-0.08827071, 1.54222441, 0.77805738, -0.44132116, -0.23279039]])
    x = np.array([-0.00135598, 0.00021467, -0.00186602, -0.00105655, 0.00116463])
    r = bregman_project(x, M, c)
    ref = brute_force_project_oracle(x, M, c, "bregman")
    np.testing.assert_allclose(r.point, ref, atol=1e-9)


def test_sqne_equality():
    c = SpaceConfig(4, 3, 2.5)
    rng = np.random.default_rng(2)
    for _ in range(100):
        M, x = random_instance(rng, 4, 2)
        z = rng.normal(size=2) @ M.basis
        pi = bregman_project(x, M, c)
        lhs = bregman_distance(z, pi.point, c)
        rhs = bregman_distance(z, x, c) - pi.objective
        assert abs(lhs - rhs) <= 1e-9 * (1 + bregman_distance(z, x, c))


def test_solver_divergence_reports_result():
    c = SpaceConfig(3, 3)
    M = Subspace([[1, 1, 0], [0, 1, 1]])
    with pytest.raises(SolverDivergence) as err:
        bregman_project([1.0, -2.0, 5.0], M, c, SolverOptions(tol=1e-30, max_iter=1))
    assert err.value.result is not None
    assert not err.value.result.converged


def test_dimension_errors():
    c = SpaceConfig(3, 3)
    with pytest.raises(DimensionMismatch):
        bregman_project([1, 2], Subspace.whole(3), c)
    with pytest.raises(DimensionMismatch):
        bregman_project([1, 2, 3], Subspace.whole(2), c)
    with pytest.raises(DimensionMismatch):
        metric_project_direct([[1, 2, 3]], Subspace.whole(3), c)


# ---- metric projection

def test_metric_examples():
    c = SpaceConfig(3, 3)
    M = Subspace.coordinate([0, 1], 3)
    np.testing.assert_allclose(metric_project_direct([1, 2, 3], M, c).point,
                               [1, 2, 0], atol=1e-10)
    x = np.array([2.0, -1.0, 0.0])
    np.testing.assert_allclose(metric_project_direct(x, M, c).point, x)
    # the residual (0, 0, 3) is where the objective is flattest (cubic in the
    # first two coordinates), so the derivative-free oracle is coarser here
    np.testing.assert_allclose(
        brute_force_project_oracle(np.array([1.0, 2, 3]), M, c, "metric"),
        [1, 2, 0], atol=1e-5)


def test_metric_is_least_squares_for_q2():
    c = SpaceConfig(5, 2)
    rng = np.random.default_rng(3)
    for _ in range(30):
        M, x = random_instance(rng, 5, int(rng.integers(1, 5)))
        B = M.matrix
        ls = B @ np.linalg.lstsq(B, x, rcond=None)[0]
        np.testing.assert_allclose(metric_project_direct(x, M, c).point, ls, atol=1e-10)
        if M.rank <= 3:
            np.testing.assert_allclose(
                brute_force_project_oracle(x, M, c, "metric"), ls, atol=1e-6)


@pytest.mark.parametrize("q", [1.5, 2.0, 3.0])
@pytest.mark.parametrize("n", [3, 4])
def test_metric_matches_oracle(q, n):
    c = SpaceConfig(n, q)
    rng = np.random.default_rng(100 + int(10 * q) + n)
    for _ in range(17):
        M, x = random_instance(rng, n, int(rng.integers(1, 3)))
        ref = brute_force_project_oracle(x, M, c, "metric")
        np.testing.assert_allclose(metric_project_direct(x, M, c).point, ref, atol=1e-6)


def test_metric_projection_is_global_minimum():
    c = SpaceConfig(4, 3)
    rng = np.random.default_rng(4)
    M, x = random_instance(rng, 4, 2)
    d = metric_project_direct(x, M, c).objective
    others = rng.normal(size=(100, 2)) @ M.basis
    assert np.all(d <= norm(x - others, c) + 1e-12)
    assert metric_distance(M, x, c) == pytest.approx(d)


@pytest.mark.parametrize("q", [1.5, 2.0, 3.0, 4.0])
def test_alber_decomposition(q):
    c = SpaceConfig(4, q)
    rng = np.random.default_rng(5)
    for _ in range(40):
        M, x = random_instance(rng, 4, int(rng.integers(1, 4)))
        direct = metric_project_direct(x, M, c).point
        dual = metric_project_via_duality(x, M, c)
        assert np.linalg.norm(dual - direct) <= 1e-7 * (1 + np.linalg.norm(x))


def test_alber_trivial_subspaces():
    c = SpaceConfig(3, 3, 2)
    x = np.array([1.0, -0.5, 2.0])
    np.testing.assert_allclose(metric_project_via_duality(x, Subspace.zero(3), c), 0,
                               atol=1e-12)
    np.testing.assert_allclose(metric_project_via_duality(x, Subspace.whole(3), c), x)
    X = np.random.default_rng(6).normal(size=(5, 3))
    M = Subspace([[1, 2, 3]])
    np.testing.assert_allclose(metric_project_via_duality_batch(X, M, c),
                               metric_project_batch(X, M, c).point, atol=1e-9)


def test_distance_comparison_power_bounds():
    # dist(x, M) / D_p(M, x)^(1/rho) bounded above, dist / D^(1/sigma) below
    for q in (1.5, 3.0):
        c = SpaceConfig(3, q)
        rng = np.random.default_rng(7)
        M = Subspace([[1.0, 0.5, -0.2]])
        X = rng.normal(size=(2000, 3))
        X = X / norm(X, c)[:, None] * rng.uniform(1e-3, 2, (2000, 1))
        dist = metric_distance(M, X, c)
        D = bregman_distance_to(M, X, c)
        upper = dist / D ** (1 / c.rho)
        lower = dist / D ** (1 / c.sigma)
        assert np.all(np.isfinite(upper)) and np.max(upper) < 1e3
        assert np.min(lower) > 1e-3


# ---- oracle

def test_oracle_rank_limit():
    c = SpaceConfig(5, 3)
    M = Subspace(np.eye(5)[:4])
    with pytest.raises(OracleRankTooHigh):
        brute_force_project_oracle(np.ones(5), M, c)


def test_oracle_whole_space_returns_x():
    c = SpaceConfig(3, 3)
    x = np.array([0.3, -0.7, 1.1])
    np.testing.assert_allclose(
        brute_force_project_oracle(x, Subspace.whole(3), c, "bregman"), x, atol=1e-8)
