import math

import numpy as np
import pytest

from rgclab import pointproc as pp
from rgclab.errors import GeometryError, IntensityUnavailableError


def test_window_geometry():
    w = pp.Window(2, 100.0)
    assert w.side == pytest.approx(10.0, rel=1e-12)
    assert w.side ** w.d == pytest.approx(w.n, rel=1e-12)
    assert bool(w.contains([[5.0, -5.0]])[0])
    assert not bool(w.contains([[5.0001, 0.0]])[0])


def test_poisson_count_moments():
    w = pp.Window(2, 100.0)
    counts = [len(pp.sample(pp.poisson(), w, 0.0, s)) for s in range(300)]
    assert np.mean(counts) == pytest.approx(100.0, abs=3.5)
    assert np.var(counts) == pytest.approx(100.0, rel=0.35)


def test_poisson_empty_window():
    cfg = pp.sample(pp.poisson(), pp.Window(2, 0.0), 0.0, 3)
    assert len(cfg) == 0


def test_simple_lattice_exact_count():
    # integer side, margin 0: one point per unit cell
    for seed in (11, 12, 13):
        cfg = pp.sample(pp.perturbed_lattice(), pp.Window(2, 100.0), 0.0, seed)
        assert len(cfg) == 100


def test_determinism_bit_for_bit():
    w = pp.Window(2, 64.0)
    for model in (pp.poisson(), pp.perturbed_lattice("geometric"),
                  pp.ginibre(), pp.cox_cluster(0.5)):
        a = pp.sample(model, w, 0.5, 99)
        b = pp.sample(model, w, 0.5, 99)
        assert np.array_equal(a.points, b.points)


def test_simplicity_no_duplicates():
    w = pp.Window(2, 64.0)
    for seed in range(5):
        cfg = pp.sample(pp.cox_cluster(0.4), w, 0.0, seed)
        pts = cfg.points
        assert len(np.unique(pts, axis=0)) == len(pts)


def test_ginibre_dimension_check():
    with pytest.raises(ValueError):
        pp.sample(pp.ginibre(), pp.Window(3, 27.0), 0.0, 1)


@pytest.mark.slow
def test_ginibre_mean_count():
    # unit-intensity normalisation: mean count within 3% of n over 200 reps
    w = pp.Window(2, 100.0)
    counts = [pp.sample(pp.ginibre(), w, 0.0, s).window_count()
              for s in range(200)]
    assert abs(np.mean(counts) / 100.0 - 1.0) < 0.03


@pytest.mark.parametrize("model", ["poisson", "hypergeometric",
                                   "negative_binomial", "geometric",
                                   "binomial"])
def test_unit_intensity(model):
    spec = pp.poisson() if model == "poisson" else pp.perturbed_lattice(model)
    w = pp.Window(2, 1000.0)
    counts = [pp.sample(spec, w, 0.0, s).window_count() for s in range(200)]
    assert abs(np.mean(counts) / 1000.0 - 1.0) < 0.05


@pytest.mark.slow
def test_unit_intensity_gef():
    # double-precision rooting caps the GEF window size; intensity checked
    # on a smaller window than the other models
    w = pp.Window(2, 100.0)
    counts = [pp.sample(pp.gef_zeros(), w, 0.0, s).window_count()
              for s in range(120)]
    assert abs(np.mean(counts) / 100.0 - 1.0) < 0.05


def test_stationarity_proxy_subboxes():
    # congruent disjoint sub-boxes get equal mean counts within CI
    w = pp.Window(2, 400.0)
    for spec in (pp.poisson(), pp.perturbed_lattice("hypergeometric")):
        left, right = [], []
        for s in range(150):
            pts = pp.sample(spec, w, 0.0, s).points
            left.append(np.count_nonzero((pts[:, 0] < -3) & (np.abs(pts[:, 1]) < 3)))
            right.append(np.count_nonzero((pts[:, 0] > 3) & (np.abs(pts[:, 1]) < 3)))
        diff = np.mean(left) - np.mean(right)
        se = math.sqrt((np.var(left) + np.var(right)) / 150)
        assert abs(diff) < 3.5 * se + 1e-9


def test_joint_intensity_poisson():
    assert pp.joint_intensity(pp.poisson(), [[0, 0], [3, 4], [1, 1]]) == 1.0


def test_joint_intensity_ginibre_pair():
    val = pp.joint_intensity(pp.ginibre(), [[0.0, 0.0], [1.0, 0.0]])
    assert val == pytest.approx(1.0 - math.exp(-math.pi), rel=1e-12)
    assert pp.joint_intensity(pp.ginibre(), [[0.0, 0.0], [0.0, 0.0]]) == 0.0


def test_joint_intensity_symmetry():
    rng = np.random.default_rng(5)
    pts = rng.uniform(-1, 1, size=(3, 2))
    base = pp.joint_intensity(pp.ginibre(), pts)
    assert pp.joint_intensity(pp.ginibre(), pts[[2, 0, 1]]) == pytest.approx(
        base, rel=1e-9)


def test_joint_intensity_unavailable():
    with pytest.raises(IntensityUnavailableError):
        pp.joint_intensity(pp.perturbed_lattice(), [[0, 0]])


def test_pair_correlation_monte_carlo():
    # rho2(0, z) at |z| = 1 cross-checked against empirical pair counts
    w = pp.Window(2, 64.0)
    shell = (0.9, 1.1)
    area = math.pi * (shell[1] ** 2 - shell[0] ** 2)
    hits = []
    for s in range(150):
        pts = pp.sample(pp.ginibre(), w, 0.0, s).points
        core = pts[np.all(np.abs(pts) <= 2.0, axis=1)]
        for p in core:
            d = np.linalg.norm(pts - p, axis=1)
            hits.append(np.count_nonzero((d > shell[0]) & (d <= shell[1])))
    emp = np.mean(hits) / area
    # integral of rho2 over the shell / area
    import scipy.integrate as si
    target = si.quad(lambda s_: (1 - math.exp(-math.pi * s_ ** 2)) * 2 * math.pi * s_,
                     *shell)[0] / area
    assert emp == pytest.approx(target, rel=0.1)


def test_void_poisson_unit_ball():
    w = pp.Window(2, 64.0)
    rec = pp.estimate_void(pp.poisson(), w, (np.zeros(2), 1.0), 800, 21)
    assert abs(rec.mean - math.exp(-math.pi)) < rec.ci_halfwidth + 0.01


def test_void_radius_zero_and_geometry_error():
    w = pp.Window(2, 16.0)
    rec = pp.estimate_void(pp.poisson(), w, (np.zeros(2), 0.0), 50, 4)
    assert rec.mean == 1.0
    with pytest.raises(GeometryError):
        pp.estimate_void(pp.poisson(), w, (np.zeros(2), 5.0), 10, 4)


def test_void_ordering_sub_super_poisson():
    # Ginibre <= Poisson <= negative-binomial lattice, CI separated
    w = pp.Window(2, 64.0)
    radius = 0.8
    recs = {}
    for name, spec in (("gin", pp.ginibre()), ("poi", pp.poisson()),
                       ("nb", pp.perturbed_lattice("negative_binomial"))):
        recs[name] = pp.estimate_void(spec, w, (np.zeros(2), radius), 1500, 17)
    assert recs["gin"].mean + recs["gin"].ci_halfwidth < \
        recs["poi"].mean - recs["poi"].ci_halfwidth
    assert recs["poi"].mean + recs["poi"].ci_halfwidth < \
        recs["nb"].mean - recs["nb"].ci_halfwidth


def test_palm_poisson_slivnyak():
    # Palm = unconditional for Poisson (count in a disjoint annulus)
    w = pp.Window(2, 36.0)
    functional = pp.count_in_annulus(np.zeros(2), 1.0, 2.0)
    palm, uncond = pp.estimate_palm_functional(
        pp.poisson(), w, [np.zeros(2)], 0.4, functional, 1500, 3)
    joint = math.hypot(palm.ci_halfwidth, uncond.ci_halfwidth)
    assert abs(palm.mean - uncond.mean) < joint + 1e-9


def test_palm_region_validation():
    w = pp.Window(2, 36.0)
    overlapping = pp.count_in_ball(np.zeros(2), 1.0)
    with pytest.raises(GeometryError):
        pp.estimate_palm_functional(pp.poisson(), w, [np.zeros(2)], 0.5,
                                    overlapping, 10, 3)


def test_palm_ginibre_increasing_functional():
    # negative association: Palm expectation of an increasing statistic
    # cannot exceed the unconditional one
    w = pp.Window(2, 36.0)
    functional = pp.count_in_annulus(np.zeros(2), 0.8, 1.8)
    palm, uncond = pp.estimate_palm_functional(
        pp.ginibre(), w, [np.zeros(2)], 0.35, functional, 500, 9)
    joint = math.hypot(palm.ci_halfwidth, uncond.ci_halfwidth)
    assert palm.mean <= uncond.mean + joint
