import itertools
import math

import numpy as np
import pytest
from numpy.random import SeedSequence
from hypothesis import given, settings
from hypothesis import strategies as st

from hullmle.expfam import (
    Graph,
    ObservationMask,
    SampleKind,
    StatDef,
    demonstrate_unbounded,
    dyad_pairs,
    exact_log_kappa,
    exact_loglik,
    exact_moments,
    loglik_ratio_grad,
    loglik_ratio_hat,
    mcmc_sample,
    statistics,
)

from conftest import masked_k4_instance


EDGES = StatDef.from_names(["edges"])
ET = StatDef.from_names(["edges", "triangles"])
EST = StatDef.from_names(["edges", "two-stars", "triangles"])


# ---------------------------------------------------------------------------
# statistics

def brute_statistics(graph, stats):
    """O(n^3) recount straight from the adjacency matrix."""
    adj = graph.adjacency()
    n = graph.n
    edges = adj.sum() / 2.0
    stars = 0.0
    for i in range(n):
        deg = adj[i].sum()
        stars += deg * (deg - 1) / 2.0
    tris = 0.0
    for i, j, k in itertools.combinations(range(n), 3):
        if adj[i, j] and adj[j, k] and adj[i, k]:
            tris += 1.0
    values = {"edges": edges, "two-stars": stars, "triangles": tris}
    return np.array([values[t.value] for t in stats.terms])


def test_statistics_on_known_graphs():
    k3 = Graph.complete(3)
    assert np.array_equal(statistics(k3, EST), [3.0, 3.0, 1.0])
    k4 = Graph.complete(4)
    assert np.array_equal(statistics(k4, EST), [6.0, 12.0, 4.0])
    empty = Graph.empty(5)
    assert np.array_equal(statistics(empty, EST), [0.0, 0.0, 0.0])


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=100_000))
def test_statistics_match_brute_force(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 13))
    m = n * (n - 1) // 2
    graph = Graph(n=n, edges=rng.random(m) < rng.uniform(0.1, 0.9))
    assert np.array_equal(statistics(graph, EST), brute_statistics(graph, EST))


def test_dyad_pairs_order_is_combinations():
    assert [tuple(p) for p in dyad_pairs(4)] == list(itertools.combinations(range(4), 2))


# ---------------------------------------------------------------------------
# exact enumeration

def test_log_kappa_at_zero_counts_graphs():
    assert exact_log_kappa(EDGES, np.zeros(1), 3) == pytest.approx(math.log(8), abs=1e-12)
    assert exact_log_kappa(ET, np.zeros(2), 4) == pytest.approx(math.log(64), abs=1e-12)


def test_edges_only_kappa_matches_bernoulli_form():
    for n in (3, 4, 5):
        m = n * (n - 1) // 2
        for t in (-1.0, -0.25, 0.0, 0.7, 2.0):
            expected = m * math.log1p(math.exp(t))
            got = exact_log_kappa(EDGES, np.array([t]), n)
            assert got == pytest.approx(expected, abs=1e-10)


def test_exact_moments_mean_matches_gradient():
    theta = np.array([0.3, -0.2])
    _, mean, _ = exact_moments(ET, theta, 5)
    h = 1e-6
    for k in range(2):
        up = theta.copy(); up[k] += h
        dn = theta.copy(); dn[k] -= h
        fd = (exact_log_kappa(ET, up, 5) - exact_log_kappa(ET, dn, 5)) / (2 * h)
        assert mean[k] == pytest.approx(fd, abs=1e-6)


def test_exact_moments_covariance_is_psd():
    theta = np.array([0.1, 0.4])
    _, _, cov = exact_moments(ET, theta, 5)
    eigs = np.linalg.eigvalsh(cov)
    assert np.all(eigs >= -1e-10)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_log_kappa_is_convex_along_segments(seed):
    rng = np.random.default_rng(seed)
    t1 = rng.standard_normal(2)
    t2 = rng.standard_normal(2)
    lam = float(rng.uniform(0.05, 0.95))
    mid = lam * t1 + (1 - lam) * t2
    lhs = exact_log_kappa(ET, mid, 4)
    rhs = lam * exact_log_kappa(ET, t1, 4) + (1 - lam) * exact_log_kappa(ET, t2, 4)
    assert lhs <= rhs + 1e-10


def test_masked_kappa_counts_completions():
    graph, mask = masked_k4_instance()
    # two free dyads -> four completions
    got = exact_log_kappa(ET, np.zeros(2), 5, mask=mask)
    assert got == pytest.approx(math.log(4), abs=1e-12)


def test_masked_loglik_at_zero_is_count_ratio():
    graph, mask = masked_k4_instance()
    # log(#completions) - log(#all graphs) = log 4 - log 1024
    got = exact_loglik(ET, np.zeros(2), graph, mask=mask)
    assert got == pytest.approx(math.log(4) - math.log(1024), abs=1e-12)


def test_fully_observed_loglik_is_exponential_family_form():
    graph = Graph.from_pairs(4, [(0, 1), (1, 2), (2, 3)])
    theta = np.array([0.4, -0.3])
    g = statistics(graph, ET)
    expected = float(theta @ g) - exact_log_kappa(ET, theta, 4)
    got = exact_loglik(ET, theta, graph)
    assert got == pytest.approx(expected, abs=1e-12)


def test_moments_n_cap_enforced():
    with pytest.raises(ValueError):
        exact_log_kappa(EDGES, np.zeros(1), 26)


# ---------------------------------------------------------------------------
# sampler

def test_sampler_uniform_edge_mean():
    sample = mcmc_sample(EDGES, np.zeros(1), 7, 2000, seed=SeedSequence(7))
    assert sample.kind is SampleKind.UNCONSTRAINED
    mean = sample.rows.mean()
    se = sample.rows.std() / math.sqrt(2000)
    assert abs(mean - 10.5) <= 3 * se + 0.2


def test_sampler_mean_matches_exact_moments():
    theta = np.array([-0.4, 0.25])
    _, exact_mean, _ = exact_moments(ET, theta, 5)
    sample = mcmc_sample(ET, theta, 5, 6000, seed=SeedSequence(11))
    err = np.abs(sample.rows.mean(axis=0) - exact_mean)
    se = 3 * sample.rows.std(axis=0) / math.sqrt(6000)
    assert np.all(err <= se + 0.05)


def test_constrained_sampler_visits_all_completions():
    # At theta = 0 the four completions are equally likely; their
    # statistics multiset is {(6,4): 1, (7,4): 2, (8,5): 1}.
    graph, mask = masked_k4_instance()
    sample = mcmc_sample(ET, np.zeros(2), 5, 4000, mask=mask, seed=SeedSequence(123))
    assert sample.kind is SampleKind.CONSTRAINED
    uniq, counts = np.unique(sample.rows, axis=0, return_counts=True)
    assert [tuple(u) for u in uniq] == [(6.0, 4.0), (7.0, 4.0), (8.0, 5.0)]
    freq = counts / counts.sum()
    assert freq == pytest.approx([0.25, 0.5, 0.25], abs=0.04)


def test_masked_chain_never_touches_observed_dyads():
    graph, mask = masked_k4_instance()
    sample = mcmc_sample(
        ET, np.array([0.3, -0.2]), 5, 60, mask=mask,
        seed=SeedSequence(5), keep_graphs=True,
    )
    observed = mask.observed_dyads
    for g in sample.graphs:
        assert np.array_equal(g.edges[observed], mask.observed_values[observed])


def test_sampler_is_bit_deterministic():
    a = mcmc_sample(ET, np.array([0.2, 0.1]), 6, 100, seed=SeedSequence(42))
    b = mcmc_sample(ET, np.array([0.2, 0.1]), 6, 100, seed=SeedSequence(42))
    assert np.array_equal(a.rows, b.rows)


def test_fully_masked_space_returns_observed_stats():
    graph = Graph.from_pairs(4, [(0, 1), (2, 3)])
    mask = ObservationMask.all_observed(graph)
    sample = mcmc_sample(ET, np.array([0.5, 0.5]), 4, 9, mask=mask)
    assert np.all(sample.rows == statistics(graph, ET))


def test_sampler_validates_count_and_interval():
    with pytest.raises(ValueError):
        mcmc_sample(EDGES, np.zeros(1), 4, 0)
    with pytest.raises(ValueError):
        mcmc_sample(EDGES, np.zeros(1), 4, 5, interval=0)


# ---------------------------------------------------------------------------
# likelihood-ratio estimate

def test_ratio_hat_zero_cases():
    rng = np.random.default_rng(31)
    rows = rng.standard_normal((20, 2))
    assert loglik_ratio_hat(np.zeros(2), rows, rows) == 0.0
    other = rng.standard_normal((15, 2))
    assert loglik_ratio_hat(np.zeros(2), rows, other) == 0.0


def test_ratio_hat_antisymmetric_under_sample_swap():
    # Swapping the two samples at the same dtheta negates the value
    # exactly: both terms are computed once each and subtracted.
    rng = np.random.default_rng(32)
    ys = rng.standard_normal((25, 3))
    zs = rng.standard_normal((18, 3))
    for _ in range(20):
        dt = rng.standard_normal(3)
        assert loglik_ratio_hat(dt, ys, zs) == -loglik_ratio_hat(dt, zs, ys)


def test_ratio_hat_scale_must_be_positive():
    rows = np.zeros((3, 2))
    with pytest.raises(ValueError):
        loglik_ratio_hat(np.zeros(2), rows, rows, scale=0.0)


def test_ratio_grad_matches_finite_differences():
    rng = np.random.default_rng(33)
    ys = rng.standard_normal((40, 2))
    zs = rng.standard_normal((30, 2)) * 0.8
    for _ in range(20):
        dt = rng.standard_normal(2) * 0.5
        scale = float(rng.uniform(0.5, 1.0))
        grad = loglik_ratio_grad(dt, ys, zs, scale=scale)
        h = 1e-6
        for k in range(2):
            up = dt.copy(); up[k] += h
            dn = dt.copy(); dn[k] -= h
            fd = (
                loglik_ratio_hat(up, ys, zs, scale=scale)
                - loglik_ratio_hat(dn, ys, zs, scale=scale)
            ) / (2 * h)
            denom = max(1.0, abs(fd))
            assert abs(grad[k] - fd) / denom <= 1e-5


def test_demonstrate_unbounded_grows_along_separating_ray():
    # gZ max exceeds gY max along the ray, so every alpha step pushes
    # the estimate up without bound.
    ys = np.array([[0.0, 0.0], [1.0, 0.5], [0.5, 1.0]])
    zs = np.array([[2.0, 2.0], [1.5, 1.8]])
    direction = np.array([1.0, 1.0])
    values = demonstrate_unbounded(ys, zs, direction, [1.0, 2.0, 4.0, 8.0, 16.0])
    assert all(b > a for a, b in zip(values, values[1:]))


def test_demonstrate_unbounded_rejects_non_separating_direction():
    ys = np.array([[2.0, 0.0], [0.0, 2.0]])
    zs = np.array([[1.0, 1.0]])
    with pytest.raises(ValueError):
        demonstrate_unbounded(ys, zs, np.array([1.0, 0.0]), [1.0, 2.0])
