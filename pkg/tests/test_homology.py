import math

import numpy as np
import pytest

from rgclab import complexes as cx
from rgclab import geograph as gg
from rgclab import homology as hm
from rgclab import pointproc as pp

import oracles


def _config(points, n=100.0, margin=0.0):
    return pp.PointConfiguration(np.asarray(points, dtype=float),
                                 pp.Window(2, n), margin, pp.poisson(), 0)


FOUR_CYCLE = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]


def _four_cycle_complex():
    return cx.build_rips(_config(FOUR_CYCLE), 1.5, 2)


def test_betti_four_cycle():
    bv = hm.betti_numbers(_four_cycle_complex())
    assert bv[0] == 1 and bv[1] == 1


def test_betti_tetrahedron_boundary():
    faces = [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]
    comp = cx.SimplicialComplex.from_faces(
        [f for tri in faces for f in
         [tri, tri[:2], tri[1:], (tri[0], tri[2]), (tri[0],), (tri[1],),
          (tri[2],)]], 4)
    bv = hm.betti_numbers(comp)
    assert bv.betti == (1, 0, 1)


def test_betti_rejects_malformed():
    broken = cx.SimplicialComplex({0: [(0,), (1,)], 1: [(0, 2)]}, 3)
    with pytest.raises(ValueError):
        hm.betti_numbers(broken)


@pytest.mark.parametrize("seed", range(8))
def test_betti_dense_oracle(seed):
    rng = np.random.default_rng(seed)
    cfg = _config(rng.uniform(-2.5, 2.5, size=(15, 2)), n=25.0)
    comp = cx.build_rips(cfg, rng.uniform(0.7, 1.4), 3)
    assert hm.betti_numbers(comp).betti == oracles.dense_betti(comp)


def test_beta0_equals_component_count():
    rng = np.random.default_rng(123)
    cfg = _config(rng.uniform(-3, 3, size=(20, 2)), n=36.0)
    eps = 0.9
    graph = gg.build_graph(cfg, eps)
    comp_count = len(gg.connected_components(graph))
    assert hm.betti_numbers(cx.build_rips(cfg, eps, 1))[0] == comp_count
    assert hm.betti_numbers(cx.build_cech(cfg, eps, 2))[0] == comp_count


def test_euler_characteristic_examples():
    single = cx.SimplicialComplex({0: [(0,)]}, 1)
    assert hm.euler_characteristic(single) == 1
    assert hm.euler_characteristic(_four_cycle_complex()) == 0


def test_euler_equals_alternating_betti():
    rng = np.random.default_rng(5)
    for seed in range(5):
        cfg = _config(np.random.default_rng(seed).uniform(-2, 2, size=(12, 2)),
                      n=16.0)
        eps = rng.uniform(0.5, 1.2)
        comp = cx.build_cech(cfg, eps, 11)  # full dimension: exact identity
        bv = hm.betti_numbers(comp)
        assert hm.euler_characteristic(comp) == bv.alternating_sum()


def test_persistence_two_points():
    filt = cx.rips_filtration(_config([[0.0, 0.0], [0.7, 0.0]]), 2, 2.0)
    barcode = hm.persistence(filt)
    h0 = sorted(barcode.in_dimension(0))
    assert h0 == [(0.0, 0.7), (0.0, math.inf)]


def test_persistence_four_cycle_bar():
    filt = cx.rips_filtration(_config(FOUR_CYCLE), 2, 2.5)
    barcode = hm.persistence(filt)
    h1 = barcode.in_dimension(1)
    assert len(h1) == 1
    birth, death = h1[0]
    assert birth == pytest.approx(math.sqrt(2.0), rel=1e-12)
    assert death == pytest.approx(2.0, rel=1e-12)
    assert barcode.essential_count(0) == 1


def test_persistence_rejects_non_monotone():
    filt = cx.Filtration([(0.0, 0, (0,)), (0.0, 0, (1,)), (0.3, 1, (0, 1))],
                         2, 1.0)
    filt.entries[2] = (0.3, 1, (0, 1))
    bad = cx.Filtration([(0.0, 0, (0,)), (0.5, 0, (1,)), (0.3, 1, (0, 1))],
                        2, 1.0)
    with pytest.raises(ValueError):
        hm.persistence(bad)


def test_betti_from_barcode_convention():
    barcode = hm.Barcode([(0, 0.0, math.inf), (1, 0.5, 1.0)])
    assert hm.betti_from_barcode(barcode, 0.5)[1] == 1  # closed-left
    assert hm.betti_from_barcode(barcode, 1.0)[1] == 0
    assert hm.betti_from_barcode(barcode, -0.1)[0] == 0


@pytest.mark.parametrize("kind", ["rips", "cech"])
@pytest.mark.parametrize("seed", range(4))
def test_barcode_slices_match_direct_betti(kind, seed):
    rng = np.random.default_rng(900 + seed)
    cfg = _config(rng.uniform(-2.5, 2.5, size=(18, 2)), n=25.0)
    eps_max = 1.5
    if kind == "rips":
        filt = cx.rips_filtration(cfg, 2, eps_max)
        build = cx.build_rips
    else:
        filt = cx.cech_filtration(cfg, 2, eps_max)
        build = cx.build_cech
    barcode = hm.persistence(filt)
    for eps in (0.5, 1.0, 1.9):
        eps = min(eps, eps_max - 1e-9)
        sliced = hm.betti_from_barcode(barcode, eps)
        direct = hm.betti_numbers(build(cfg, eps, 2))
        for k in range(3):
            assert sliced[k] == direct[k], (kind, seed, eps, k)


def test_barcode_csv_and_svg(tmp_path):
    filt = cx.rips_filtration(_config(FOUR_CYCLE), 2, 2.5)
    barcode = hm.persistence(filt)
    hm.write_barcode_csv(tmp_path / "b.csv", barcode)
    text = (tmp_path / "b.csv").read_text()
    assert "inf" in text and text.startswith("dim,birth,death")
    hm.barcode_svg(barcode, tmp_path / "b.svg", 2.5, "fixture")
    assert (tmp_path / "b.svg").read_text().startswith("<svg")


# ---------------------------------------------------------------------------
# sandwich inequalities


def test_sandwich_four_cycle_rips():
    rep = hm.check_sandwich(_config(FOUR_CYCLE), 1.5, "rips", 1)
    assert rep.lower == 1 and rep.betti == 1 and rep.passed
    assert rep.upper == 1  # no 5-vertex trees in a 4-point instance


def test_sandwich_triangle_cech():
    side = 0.9
    tri = [[0.0, 0.0], [side, 0.0], [side / 2, side * math.sqrt(3) / 2]]
    rep = hm.check_sandwich(_config(tri), 1.0, "cech", 1)
    assert rep.lower == 1 and rep.betti == 1 and rep.passed


@pytest.mark.parametrize("seed", range(10))
def test_sandwich_random_sparse(seed):
    w = pp.Window(2, 36.0)
    cfg = pp.sample(pp.poisson(), w, 0.0, 1000 + seed)
    eps = 0.45
    for kind in ("rips", "cech"):
        rep = hm.check_sandwich(cfg, eps, kind, 1)
        assert rep.passed, (kind, seed, rep)


def test_sandwich_caps():
    cfg = _config(FOUR_CYCLE)
    with pytest.raises(ValueError):
        hm.check_sandwich(cfg, 1.0, "rips", 2)
    with pytest.raises(ValueError):
        hm.check_sandwich(cfg, 1.0, "cech", 5)
