import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spreadtree.graph import Graph, Tree, gen_bounded_tree, is_valid_embedding
from spreadtree.pipeline import derive_constants
from spreadtree.spread import (
    BoundViolation,
    ConstantSampler,
    EnumerationBudgetError,
    PipelineSampler,
    QueryFormatError,
    SamplerFailureError,
    SpreadQuery,
    UniformInjection,
    bound,
    brute_force_embeddings,
    chernoff,
    chi_square_uniform,
    degree_into_random_set,
    doubling_diagnostic,
    estimate_spread,
    format_queries,
    mcdiarmid_perm,
    parse_queries,
    perm_spread_bound,
    perm_spread_estimate,
    perm_spread_exact,
    wilson_interval,
)

import oracles
from desk import DESK, desk_instance


def complete(n):
    return Graph(n, itertools.combinations(range(n), 2))


def test_uniform_injection_calibration():
    n = 10
    queries = [SpreadQuery(((0, 3),)), SpreadQuery(((1, 4), (2, 5)))]
    rep = estimate_spread(UniformInjection(n), queries, trials=20_000, seed=1, q=0.5)
    p = rep.probabilities()
    lo, hi = wilson_interval(rep.counts, rep.trials)
    inside = ((lo <= 1 / n) & (1 / n <= hi)).mean()
    assert inside >= 0.95
    rows = rep.query_rows()
    assert rows[0]["ci_low"] <= 1 / n <= rows[0]["ci_high"]
    assert rows[1]["ci_low"] <= 1 / (n * (n - 1)) <= rows[1]["ci_high"]
    assert not rep.flagged()
    assert np.allclose(p.sum(axis=1), 1)
    assert rep.c_hat_ci()[0] <= rep.c_hat <= rep.c_hat_ci()[1]


def test_constant_sampler_is_flagged():
    phi = {0: 2, 1: 0, 2: 1}
    rep = estimate_spread(ConstantSampler(phi, 3), [SpreadQuery(((0, 2),))], trials=1000, q=0.9)
    assert rep.max_prob == 1.0
    assert rep.flagged() == [SpreadQuery(((0, 2),))]
    assert (0, 2) in rep.coordinate_flags()


def test_results_do_not_depend_on_workers():
    a = estimate_spread(UniformInjection(6), trials=2500, seed=3)
    b = estimate_spread(UniformInjection(6), trials=2500, seed=3, workers=2)
    assert (a.counts == b.counts).all() and a.chunks == 3


def test_minimum_trials_and_failure_threshold():
    with pytest.raises(ValueError):
        estimate_spread(UniformInjection(5), trials=999)

    def flaky(rng):
        if rng.random() < 0.2:
            raise RuntimeError("boom")
        return {0: 0}
    flaky.shape = (1, 1)
    with pytest.raises(SamplerFailureError):
        estimate_spread(flaky, trials=1000, seed=0)
    rep = estimate_spread(flaky, trials=1000, seed=0, max_failure_rate=0.5)
    assert rep.failures + rep.successes == 1000 and rep.failures > 0


def test_query_validation():
    with pytest.raises(ValueError):
        SpreadQuery(((0, 1), (0, 2)))
    with pytest.raises(ValueError):
        SpreadQuery(((0, 1), (2, 1)))
    assert SpreadQuery(((0, 1), (2, 3))).s == 2


def test_query_file_round_trip_and_errors():
    text = "# two queries\n1\n0 3\n\n2\n1 4\n2 5\n"
    qs = parse_queries(text)
    assert [q.s for q in qs] == [1, 2]
    assert parse_queries(format_queries(qs)) == qs
    with pytest.raises(QueryFormatError, match="line 3"):
        parse_queries("1\n0 3\n1 x\n")
    with pytest.raises(QueryFormatError, match="line 2"):
        parse_queries("1\n0 3 4\n")
    with pytest.raises(QueryFormatError, match="line 1"):
        parse_queries("2\n0 3\n")


def test_report_serialisation():
    rep = estimate_spread(UniformInjection(5), [((0, 1),)], trials=1000, seed=0, q=0.5, exclude=[0])
    rec = rep.to_record()
    for key in ("trials", "c_hat", "max_prob", "ci_method", "seed"):
        assert key in rec
    assert rep.argmax[0] != 0
    assert rep.format_record().count("\n") == len(rec)
    table = rep.format_query_table().splitlines()
    assert len(table) == 2 and "\t" in table[0]
    assert len(rep.format_counts_table().splitlines()) == 1 + 5 * 5


def test_doubling_diagnostic_on_uniform_samplers():
    small = estimate_spread(UniformInjection(20), trials=20_000, seed=0)
    large = estimate_spread(UniformInjection(40), trials=20_000, seed=1)
    d = doubling_diagnostic(small, large)
    assert 0.5 <= d["c_hat_ratio"] <= 2
    assert d["n_small"] == 20 and d["n_large"] == 40


def test_wilson_interval_examples():
    lo, hi = wilson_interval(0, 100)
    assert lo == 0 and 0 < hi < 0.1
    lo, hi = wilson_interval(50, 100)
    assert lo < 0.5 < hi and hi - 0.5 == pytest.approx(0.5 - lo)


def test_chi_square_examples():
    assert chi_square_uniform([10, 10, 10])[1] == pytest.approx(1.0)
    assert chi_square_uniform([100, 0, 0])[1] < 1e-10


def test_brute_force_counts():
    t3 = Tree([-1, 0, 1])
    assert len(brute_force_embeddings(complete(3), t3)) == 6
    for n in range(1, 7):
        t = gen_bounded_tree(n, 3, seed=n)
        assert len(brute_force_embeddings(complete(n), t)) == math.factorial(n)
    k4e = Graph(4, [e for e in itertools.combinations(range(4), 2) if e != (0, 1)])
    star = Tree([-1, 0, 0, 0])
    found = brute_force_embeddings(k4e, star)
    # the centre must be 2 or 3, then the three leaves in any order
    assert len(found) == 2 * 6 == oracles.count_embeddings(k4e, star)
    keys = {tuple(sorted(phi.items())) for phi in found}
    assert len(keys) == len(found)
    assert all(is_valid_embedding(star, k4e, phi) for phi in found)
    with pytest.raises(EnumerationBudgetError):
        brute_force_embeddings(complete(6), gen_bounded_tree(6, 3, seed=0), budget=10)


@given(st.integers(0, 2 ** 32 - 1))
def test_brute_force_matches_vf2(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 7))
    upper = np.triu(rng.random((n, n)) < 0.6, 1)
    g = Graph.from_adjacency(upper | upper.T)
    t = gen_bounded_tree(n, 3, seed=rng)
    assert len(brute_force_embeddings(g, t)) == oracles.count_embeddings(g, t)


def test_perm_spread_examples():
    assert perm_spread_exact(5, [0], [{1, 3}]) == Fraction(2, 5)
    # two positions both sent into {1, 2}: 2 * 1 * 4! / 6!
    p = perm_spread_exact(6, [0, 1], [{1, 2}, {1, 2}])
    assert p == Fraction(1, 15) == oracles.perm_probability(6, [0, 1], [{1, 2}, {1, 2}])
    assert perm_spread_bound(6, [{1, 2}, {1, 2}]) == pytest.approx((2 * math.e / 6) ** 2)
    n = 7
    xs = [0, 3, 5]
    want = math.prod(Fraction(1, n - i) for i in range(3))
    assert perm_spread_exact(n, xs, [{2}, {4}, {6}]) == want


@given(st.integers(0, 2 ** 32 - 1))
def test_perm_spread_matches_enumeration_and_bound(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 7))
    s = int(rng.integers(1, n + 1))
    xs = rng.choice(n, size=s, replace=False).tolist()
    Ls = [set(rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False).tolist()) for _ in xs]
    p = perm_spread_exact(n, xs, Ls)
    assert p == oracles.perm_probability(n, xs, Ls)
    assert p <= perm_spread_bound(n, Ls)


def test_perm_spread_estimate_and_errors():
    est = perm_spread_estimate(12, [0, 1], [{1, 2, 3}, {4, 5}], trials=200_000, seed=0)
    exact = 3 / 12 * 2 / 11
    assert abs(est - exact) <= 4 * math.sqrt(exact * (1 - exact) / 200_000)
    with pytest.raises(ValueError):
        perm_spread_exact(9, [0], [{1}])
    with pytest.raises(ValueError):
        perm_spread_exact(5, [0, 0], [{1}, {2}])
    with pytest.raises(ValueError):
        perm_spread_exact(5, [0], [{7}])


def test_bound_violation_is_an_assertion():
    assert issubclass(BoundViolation, AssertionError)


def test_bound_calculators():
    assert chernoff(300, 0.1) == pytest.approx(2 * math.exp(-1), rel=1e-12)
    assert chernoff(300, 0.1) == pytest.approx(0.7358, abs=1e-4)
    assert degree_into_random_set(200, 0.75, 0.625) == pytest.approx(0.419, abs=1e-3)
    assert mcdiarmid_perm(10, 1, 2, 50) == pytest.approx(4 * math.exp(-100 / 800))
    assert bound("chernoff", mu=300, gamma=0.1) == chernoff(300, 0.1)
    for bad in (lambda: chernoff(10, 1.5), lambda: degree_into_random_set(10, 0.5, 0.6),
                lambda: mcdiarmid_perm(60, 1, 1, 50), lambda: bound("nope")):
        with pytest.raises(ValueError):
            bad()


@given(st.integers(1, 500), st.floats(0.01, 0.99))
def test_chernoff_dominates_binomial_tail(mu_int, gamma):
    # exact two-sided binomial tail with mean mu, via n = 4 mu trials at p = 1/4
    from scipy.stats import binom
    n, p = 4 * mu_int, 0.25
    mu = n * p
    tail = binom.cdf(math.floor(mu * (1 - gamma) + 1e-9), n, p) + binom.sf(math.ceil(mu * (1 + gamma) - 1e-9) - 1, n, p)
    assert tail <= chernoff(mu, gamma) + 1e-12


def test_degree_bound_dominates_hypergeometric_tail():
    from scipy.stats import hypergeom
    n, d = 200, 150
    for ell in (5, 20, 60):
        for dp in (0.5, 0.6, 0.7):
            tail = hypergeom.cdf(math.ceil(dp * ell) - 1, n, d, ell)
            assert tail <= degree_into_random_set(ell, d / n, dp)


def test_pipeline_marginals_on_clique_are_uniform():
    # every host automorphism fixing the root image preserves the sampler's law
    n = 20
    g = complete(n)
    _, t = desk_instance(n, 0)
    sampler = PipelineSampler(g, t, DESK, v=0)
    rep = estimate_spread(sampler, trials=5000, seed=2, exclude=[t.root])
    assert rep.failures == 0
    for x in range(1, n):
        row = rep.counts[x][1:]
        assert chi_square_uniform(row)[1] >= 1e-3
    assert rep.max_prob <= rep.max_prob_ci()[1]


def test_pipeline_sampler_unrooted_mode():
    g, t = desk_instance(40, 1)
    plan = derive_constants(t, DESK)
    sampler = PipelineSampler(g, t, DESK, plan=plan)
    rep = estimate_spread(sampler, trials=1000, seed=0)
    assert rep.successes == 1000
    assert rep.counts[t.root].sum() == 1000 and (rep.counts[t.root] > 0).sum() > 30
