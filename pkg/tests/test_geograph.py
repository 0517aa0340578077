import numpy as np
import pytest

from rgclab import geograph as gg
from rgclab import pointproc as pp
from rgclab.errors import MarginError

import oracles


def _config(points, n=100.0, margin=0.0, d=2):
    return pp.PointConfiguration(np.asarray(points, dtype=float),
                                 pp.Window(d, n), margin, pp.poisson(), 0)


COLLINEAR = [[0.0, 0.0], [0.6, 0.0], [1.2, 0.0]]


def test_build_graph_collinear():
    g = gg.build_graph(_config(COLLINEAR), 1.0)
    assert sorted(g.edges()) == [(0, 1), (1, 2)]


def test_build_graph_single_point():
    g = gg.build_graph(_config([[0.0, 0.0]]), 1.0)
    assert g.n == 1 and g.edge_count() == 0


def test_closed_adjacency_at_exact_distance():
    g = gg.build_graph(_config([[0.0, 0.0], [1.0, 0.0]]), 1.0)
    assert list(g.edges()) == [(0, 1)]


def test_ambient_margin_guard():
    cfg = _config([[0.0, 0.0]], margin=0.5)
    with pytest.raises(MarginError):
        gg.build_graph(cfg, 1.0, use_ambient=True)


def test_pattern_validation():
    with pytest.raises(ValueError):
        gg.GraphPattern(3, frozenset({(0, 1)}))  # disconnected
    with pytest.raises(ValueError):
        gg.GraphPattern(2, frozenset({(0, 0)}))  # loop


def test_pattern_indicator_examples():
    edge = gg.edge_pattern()
    tri = gg.clique_pattern(3)
    p3 = gg.path_pattern(3)
    assert gg.pattern_indicator([[0, 0], [0, 0.5]], 1.0, edge) == 1
    assert gg.pattern_indicator(COLLINEAR, 1.0, tri) == 0
    assert gg.pattern_indicator(COLLINEAR, 1.0, p3) == 1


def test_pattern_indicator_scale_invariance():
    rng = np.random.default_rng(2)
    p3 = gg.path_pattern(3)
    for _ in range(25):
        pts = rng.uniform(0, 2, size=(3, 2))
        r = rng.uniform(0.3, 1.5)
        base = gg.pattern_indicator(pts, r, p3)
        for c in (0.1, 3.7):
            assert gg.pattern_indicator(c * pts, c * r, p3) == base


def test_count_examples():
    cfg = _config(COLLINEAR)
    assert gg.count_subgraphs(cfg, 1.0, gg.edge_pattern()) == 2
    assert gg.count_subgraphs(cfg, 1.0, gg.path_pattern(3)) == 1
    assert gg.count_components(cfg, 1.0, gg.path_pattern(3)) == 1
    assert gg.count_components(cfg, 1.0, gg.edge_pattern()) == 0


def test_isolated_vertices():
    cfg = _config([[0.0, 0.0], [3.0, 0.0]])
    assert gg.count_components(cfg, 1.0, gg.single_vertex_pattern()) == 2


def test_connected_components_examples():
    assert len(gg.connected_components(gg.GeometricGraph(
        np.array([[0., 0.], [10., 0.], [0., 10.], [10., 10.], [5., 5.]]),
        1.0))) == 5
    path = gg.GeometricGraph(np.array([[0., 0.], [1., 0.], [2., 0.], [3., 0.]]),
                             1.0)
    assert len(gg.connected_components(path)) == 1


@pytest.mark.parametrize("seed", range(8))
def test_subgraph_count_oracle(seed):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0, 3.5, size=(10, 2))
    cfg = _config(pts, n=49.0)
    r = rng.uniform(0.5, 1.2)
    for pattern in (gg.edge_pattern(), gg.path_pattern(3),
                    gg.clique_pattern(3), gg.path_pattern(4)):
        assert gg.count_subgraphs(cfg, r, pattern) == \
            oracles.brute_count_subgraphs(pts, r, pattern)


@pytest.mark.parametrize("seed", range(8))
def test_component_count_oracle(seed):
    rng = np.random.default_rng(100 + seed)
    pts = rng.uniform(-3, 3, size=(12, 2))
    cfg = _config(pts, n=64.0)
    r = rng.uniform(0.4, 1.0)
    for pattern in (gg.single_vertex_pattern(), gg.edge_pattern(),
                    gg.path_pattern(3), gg.clique_pattern(3)):
        assert gg.count_components(cfg, r, pattern) == \
            oracles.brute_count_components(pts, r, pattern)


def test_component_count_ambient_oracle():
    rng = np.random.default_rng(77)
    w = pp.Window(2, 36.0)
    r = 0.8
    for seed in range(6):
        cfg = pp.sample(pp.poisson(), w, (2 + 1) * r, seed)
        window_pts = cfg.window_points()
        expected = oracles.brute_count_components(
            window_pts, r, gg.edge_pattern(), all_points=cfg.points)
        assert gg.count_components(cfg, r, gg.edge_pattern(), "ambient") == \
            expected


def test_edge_count_monotone_in_r():
    rng = np.random.default_rng(3)
    pts = rng.uniform(-2.5, 2.5, size=(30, 2))
    cfg = _config(pts, n=25.0)
    edge = gg.edge_pattern()
    counts = [gg.count_subgraphs(cfg, r, edge)
              for r in (0.2, 0.5, 0.8, 1.2, 2.0)]
    assert counts == sorted(counts)


def test_sandwich_j_le_g():
    rng = np.random.default_rng(4)
    for seed in range(5):
        pts = np.random.default_rng(seed).uniform(0, 4, size=(15, 2))
        cfg = _config(pts, n=64.0)
        r = rng.uniform(0.4, 1.0)
        for pattern in (gg.edge_pattern(), gg.clique_pattern(3)):
            assert gg.count_components(cfg, r, pattern) <= \
                gg.count_subgraphs(cfg, r, pattern)


def test_interior_vs_ambient_band():
    # J_tilde <= J + components meeting the boundary band of width (k+1) r
    w = pp.Window(2, 36.0)
    r = 0.7
    edge = gg.edge_pattern()
    for seed in range(10):
        cfg = pp.sample(pp.poisson(), w, 3 * r, seed)
        jt = gg.count_components(cfg, r, edge, "ambient")
        j = gg.count_components(cfg, r, edge, "interior")
        assert jt <= j


def test_count_subgraph_copies_trees():
    # non-induced copies: a 4-star contains 4 paths on 3 vertices
    pts = np.array([[0., 0.], [1., 0.], [-1., 0.], [0., 1.], [0., -1.]])
    g = gg.GeometricGraph(pts, 1.0)
    p3 = gg.path_pattern(3)
    assert gg.count_subgraph_copies(g, p3) == 6
    star = gg.GraphPattern(5, frozenset({(0, 1), (0, 2), (0, 3), (0, 4)}))
    assert gg.count_subgraph_copies(g, star) == 1


def test_automorphism_counts():
    assert gg.automorphism_count(gg.path_pattern(5)) == 2
    assert gg.automorphism_count(gg.clique_pattern(4)) == 24
    ok = gg.GraphPattern(4, frozenset({(0, 2), (0, 3), (1, 2), (1, 3)}))
    assert gg.automorphism_count(ok) == 8  # 4-cycle


def test_pattern_catalog():
    catalog = gg.load_pattern_catalog()
    assert catalog["edge"].k == 2
    assert catalog["cross_polytope_1"].degree_sequence() == (2, 2, 2, 2)
    assert catalog["cross_polytope_2"].k == 6
    assert len(catalog["cross_polytope_2"].edges) == 12
    assert catalog["empty_simplex_3"].k == 3
