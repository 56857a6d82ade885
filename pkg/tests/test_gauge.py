import json

import numpy as np
import pytest

from loopcalc import fixtures
from loopcalc.exact import exact_partition, graphic_trace
from loopcalc.gauge import (GaugeError, GaugeSet, apply_gauge, check_duality, compose,
                            identity_gauge, random_dual_gauge, require_dual)


def test_identity_gauge(load):
    m = load("single_edge")
    g = identity_gauge(m)
    assert np.array_equal(g[("a", "b")], np.eye(2))
    assert np.array_equal(g[("b", "a")], np.eye(2))
    assert check_duality(g) == 0.0
    k4 = load("k4_seed42")
    assert graphic_trace(k4, identity_gauge(k4)) == exact_partition(k4)
    out = apply_gauge(k4, identity_gauge(k4))
    for a in k4.vertices:
        np.testing.assert_array_equal(out.tables[a], k4.tables[a])
    assert not out.positivity_required


def test_random_gauge_deterministic_and_dual(load):
    m = load("k4_q3_seed7")
    g1, g2 = random_dual_gauge(m, 0), random_dual_gauge(m, 0)
    for k in g1.matrices:
        assert np.array_equal(g1[k], g2[k])
    assert not np.array_equal(random_dual_gauge(m, 1)[("a", "b")], g1[("a", "b")])
    for seed in range(20):
        g = random_dual_gauge(m, seed)
        assert check_duality(g) < 1e-12
        assert all(abs(np.linalg.det(g[e])) > 0.1 for e in g.edges())


def test_check_duality_scaled_identity(load):
    m = load("single_edge")
    g = GaugeSet(2, {("a", "b"): 2 * np.eye(2), ("b", "a"): 2 * np.eye(2)})
    assert check_duality(g) == 3.0
    with pytest.raises(GaugeError, match="duality"):
        require_dual(g)
    with pytest.raises(GaugeError):
        apply_gauge(m, g)


def test_swap_gauge_swaps_table():
    m = fixtures.from_edges(2, [("a", "b")], {"a": [2.0, 5.0], "b": [1.0, 1.0]})
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])
    g = GaugeSet(2, {("a", "b"): swap, ("b", "a"): np.linalg.inv(swap).T})
    assert check_duality(g) == 0.0
    out = apply_gauge(m, g)
    np.testing.assert_array_equal(out.tables["a"], [5.0, 2.0])


@pytest.mark.parametrize("name", ["triangle_q3_seed11", "k4_seed42", "tree5_q3_seed3"])
def test_apply_gauge_preserves_z(name, load):
    m = load(name)
    z = exact_partition(m)
    for seed in range(10):
        assert exact_partition(apply_gauge(m, random_dual_gauge(m, seed))) == \
            pytest.approx(z, rel=1e-10)


def test_two_routes_agree(load):
    m = load("k4_q3_seed7")
    for seed in range(10):
        g = random_dual_gauge(m, seed)
        a = exact_partition(apply_gauge(m, g))
        b = graphic_trace(m, g)
        assert abs(a - b) / abs(b) < 1e-10


def test_group_closure(load):
    m = load("triangle_q4_seed13")
    g, h = random_dual_gauge(m, 3), random_dual_gauge(m, 4)
    twice = apply_gauge(apply_gauge(m, g), h)
    once = apply_gauge(m, compose(h, g))
    for a in m.vertices:
        np.testing.assert_allclose(twice.tables[a], once.tables[a], atol=1e-12, rtol=0)
    assert check_duality(compose(h, g)) < 1e-12


@pytest.mark.parametrize("kappa", [0.5, 2.0])
def test_residual_scaling_freedom(kappa, load):
    m = load("k4_seed42")
    g = random_dual_gauge(m, 9)
    upd = {}
    for u, v in m.edges:
        gu, gv = g[(u, v)].copy(), g[(v, u)].copy()
        gu[0] *= kappa
        gv[0] /= kappa
        upd[(u, v)], upd[(v, u)] = gu, gv
    scaled = g.replace(upd)
    assert check_duality(scaled) < 1e-12
    assert graphic_trace(m, scaled) == pytest.approx(graphic_trace(m, g), rel=1e-10)


def test_json_round_trip(load):
    m = load("triangle_q3_seed11")
    g = random_dual_gauge(m, 5)
    back = GaugeSet.from_json(g.to_json())
    assert set(json.loads(g.to_json())) == {f"{a}->{b}" for a, b in g.matrices}
    for k in g.matrices:
        assert np.array_equal(back[k], g[k])
