import itertools
import math

import numpy as np
import pytest

from loopcalc import fixtures
from loopcalc.bethe import fb_functional
from loopcalc.bp import (BpOptions, beliefs, bp_residual, bp_solve, check_no_loose_ends,
                         complete_bp_gauge, fixed_point_from_ground, z0)
from loopcalc.exact import exact_marginals, exact_partition, graphic_trace, trace_term
from loopcalc.gauge import (ExcitedBasisScheme, GaugeError, check_duality, identity_gauge,
                            random_dual_gauge)

J = 0.3


def diameter(model):
    adj = {a: model.neighbors(a) for a in model.vertices}
    best = 0
    for s in adj:
        dist, frontier = {s: 0}, [s]
        while frontier:
            nxt = []
            for a in frontier:
                for b in adj[a]:
                    if b not in dist:
                        dist[b] = dist[a] + 1
                        nxt.append(b)
            frontier = nxt
        best = max(best, max(dist.values()))
    return best


def loose(sigma_edges):
    deg = {}
    for u, v in sigma_edges:
        deg[u] = deg.get(u, 0) + 1
        deg[v] = deg.get(v, 0) + 1
    return any(d == 1 for d in deg.values())


@pytest.mark.parametrize("name", fixtures.TREES)
def test_tree_exact(name, load):
    m = load(name)
    fp = bp_solve(m, BpOptions(damping=0.0))
    assert fp.converged
    assert fp.iterations <= diameter(m) + 1
    assert bp_residual(m, fp) < 1e-10
    assert z0(m, fp) == pytest.approx(exact_partition(m), rel=1e-10)
    ex = exact_marginals(m)
    bel = beliefs(m, fp)
    for e in m.edges:
        np.testing.assert_allclose(bel.edge[e], ex.per_edge_marginals[e], atol=1e-10)
    for a in m.vertices:
        np.testing.assert_allclose(bel.vertex[a], ex.per_vertex_marginals[a], atol=1e-10)


def test_triangle_uniform(load):
    m = load("triangle")
    fp = bp_solve(m)
    assert fp.converged
    for v in fp.ground.values():
        np.testing.assert_allclose(v, [1 / math.sqrt(2)] * 2, rtol=1e-14)
    assert fp.z0 == pytest.approx(8.0, rel=1e-14)
    bel = beliefs(m, fp)
    for v in bel.edge.values():
        np.testing.assert_allclose(v, [0.5, 0.5], rtol=1e-14)
    for v in bel.vertex.values():
        np.testing.assert_allclose(v, [0.25] * 4, rtol=1e-14)


def test_ising_triangle_analytic(load):
    m = load("ising_triangle")
    fp = bp_solve(m)
    assert fp.converged
    assert fp.z0 == pytest.approx((2 * math.cosh(J)) ** 3, rel=1e-8)
    assert fp.f0 == pytest.approx(-math.log(fp.z0), rel=1e-15)
    assert fp.z0 == pytest.approx(math.prod(fp.rho.values()), rel=1e-12)
    bel = beliefs(m, fp)
    pair = [math.exp(J * (2 * s - 1) * (2 * t - 1)) / (4 * math.cosh(J))
            for s in (0, 1) for t in (0, 1)]
    for a in m.vertices:
        np.testing.assert_allclose(bel.vertex[a], pair, atol=1e-10)


def test_edge_normalisation(load):
    for name in fixtures.names():
        m = load(name)
        fp = bp_solve(m)
        for u, v in m.edges:
            assert float(fp.ground[(u, v)] @ fp.ground[(v, u)]) == pytest.approx(1.0, abs=1e-10)
            if fp.messages is not None:
                s = np.exp(fp.messages[(u, v)] + fp.messages[(v, u)]).sum()
                assert s == pytest.approx(1.0, abs=1e-10)


def test_residual_at_initialisation(load):
    m = load("ising_triangle")
    uniform = fixed_point_from_ground(m, {k: np.full(2, 2 ** -0.5)
                                          for k in bp_solve(m).ground})
    # zero field: the uniform start already solves the fixed-point equations
    assert bp_residual(m, uniform) < 1e-15
    # one heavily damped sweep stays next to the seeded-random start
    near_start = bp_solve(m, BpOptions(init="seeded-random", seed=1, max_iter=1, damping=0.99))
    assert bp_residual(m, near_start) > 1e-3


@pytest.mark.parametrize("name", fixtures.names())
def test_converged_residual_below_tol(name, load):
    m = load(name)
    fp = bp_solve(m)
    assert fp.converged and not fp.failed
    assert bp_residual(m, fp) < 1e-10


def test_seeded_random_init_reaches_same_point(load):
    m = load("k4_seed42")
    a = bp_solve(m)
    b = bp_solve(m, BpOptions(init="seeded-random", seed=7))
    assert b.converged
    assert b.z0 == pytest.approx(a.z0, rel=1e-9)


def test_determinism(load):
    m = load("k4_q3_seed7")
    opts = BpOptions(init="seeded-random", seed=3)
    a, b = bp_solve(m, opts), bp_solve(m, opts)
    assert a.iterations == b.iterations and a.z0 == b.z0
    for k in a.ground:
        assert np.array_equal(a.ground[k], b.ground[k])


def test_max_iter_reported_not_raised(load):
    fp = bp_solve(load("k4_seed42"), BpOptions(max_iter=2))
    assert not fp.converged and fp.iterations == 2


def test_signed_model_uses_epsilon_form(load):
    m = load("triangle_q3_seed11")
    signed = m.with_tables({a: m.tables[a] - 0.8 for a in m.vertices},
                           positivity_required=False)
    fp = bp_solve(signed)
    assert fp.form == "epsilon" and fp.messages is None
    assert fp.converged
    assert bp_residual(signed, fp) < 1e-10


def test_tree_trace_reduces_to_ground(load):
    m = load("tree5_seed3")
    fp = bp_solve(m)
    g = complete_bp_gauge(m, fp, ExcitedBasisScheme("binary-paper"))
    for letters in itertools.product((0, 1), repeat=len(m.edges)):
        sigma = dict(zip(m.edges, letters))
        t = trace_term(m, g, sigma)
        if any(letters):
            assert abs(t) < 1e-10 * fp.z0
        else:
            assert t == pytest.approx(fp.z0, rel=1e-12)


def test_ising_triangle_two_nonzero_terms(load):
    m = load("ising_triangle")
    fp = bp_solve(m)
    g = complete_bp_gauge(m, fp, ExcitedBasisScheme("binary-paper"))
    nonzero = [letters for letters in itertools.product((0, 1), repeat=3)
               if abs(trace_term(m, g, dict(zip(m.edges, letters)))) > 1e-10 * fp.z0]
    assert nonzero == [(0, 0, 0), (1, 1, 1)]


@pytest.mark.parametrize("variant", ["gram-schmidt-dual", None])
def test_q3_triangle_loose_terms_vanish(variant, load):
    m = load("triangle_q3_seed11")
    fp = bp_solve(m)
    scheme = ExcitedBasisScheme() if variant else ExcitedBasisScheme(seed=4)
    g = complete_bp_gauge(m, fp, scheme)
    assert check_duality(g) < 1e-10
    assert check_no_loose_ends(m, g) < 1e-8
    for letters in itertools.product(range(3), repeat=3):
        sigma = dict(zip(m.edges, letters))
        if loose([e for e in m.edges if sigma[e]]):
            assert abs(trace_term(m, g, sigma)) < 1e-8 * fp.z0
    assert trace_term(m, g, {e: 0 for e in m.edges}) == pytest.approx(fp.z0, rel=1e-12)
    assert graphic_trace(m, g) == pytest.approx(exact_partition(m), rel=1e-10)


def test_loose_end_check_on_other_gauges(load):
    m = load("ising_triangle")
    assert check_no_loose_ends(m, identity_gauge(m)) > 1e-2
    assert check_no_loose_ends(m, random_dual_gauge(m, 0)) > 1e-8


def test_completion_rejects_degenerate_ground(load):
    m = load("single_edge")
    fp = fixed_point_from_ground(m, {("a", "b"): np.zeros(2), ("b", "a"): np.ones(2)})
    with pytest.raises(GaugeError, match="edge a-b"):
        complete_bp_gauge(m, fp)


@pytest.mark.parametrize("name", ["k4_seed42", "triangle_q3_seed11", "tree5_seed3"])
def test_fixed_point_is_stationary(name, load):
    m = load(name)
    fp = bp_solve(m)
    base = fb_functional(m, fp.ground)
    assert base == pytest.approx(fp.f0, abs=1e-10)
    h = 1e-6
    for (a, b) in fp.ground:
        for s in range(m.q):
            for sign in (1, -1):
                eps = {k: v.copy() for k, v in fp.ground.items()}
                eps[(a, b)][s] += sign * h
                # restore the edge normalisation on the reverse direction
                eps[(b, a)] /= float(eps[(a, b)] @ eps[(b, a)])
                assert abs(fb_functional(m, eps) - base) < 1e-10
