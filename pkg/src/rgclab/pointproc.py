"""Samplers and estimators for stationary point processes on cubical windows.

Models: homogeneous Poisson, perturbed lattices (several replication laws,
uniform perturbation), the planar Ginibre determinantal process, zeros of the
Gaussian entire function, and a Poisson cluster (Cox) process used as a
counterexample model.  All models are normalised to unit intensity per unit
volume, so a window of volume ``n`` holds ``n`` points on average.

Ginibre convention: the process is realised as eigenvalues of an i.i.d.
complex Gaussian matrix, rescaled by ``1/sqrt(pi)`` so the mean density is 1
per unit area.  Under this convention the two-point intensity is
``rho2(0, z) = 1 - exp(-pi |z|^2)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy import special, stats

from .errors import (AcceptanceStarvationError, GeometryError,
                     IntensityUnavailableError, SizingError)
from .records import EstimateRecord

log = logging.getLogger(__name__)

# extra bulk radius (in eigenvalue coordinates) beyond the window corner; the
# finite-matrix edge density profile decays on an O(1) scale, so five widths
# keep the intensity deficit below ~1e-6 inside the window
_GINIBRE_EDGE_WIDTHS = 5.0
_GINIBRE_SINGLE_PREC_SIZE = 600  # above this, eigvals in complex64 (2-4x faster)
_GEF_MAX_DEGREE = 700  # double precision limit for companion-matrix rooting
_DUP_NUDGE = 1e-12

REPLICATION_LAWS = ("constant", "binomial", "hypergeometric",
                    "negative_binomial", "geometric")


def rng_for(*keys) -> np.random.Generator:
    """Deterministic generator derived from a tuple of integer keys."""
    return np.random.default_rng([int(k) & 0x7FFFFFFFFFFFFFFF for k in keys])


@dataclass(frozen=True)
class Window:
    """Origin-centred cube of dimension ``d`` and volume ``n``."""

    d: int
    n: float

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be a positive integer")
        if self.n < 0:
            raise ValueError("volume must be nonnegative")

    @property
    def side(self) -> float:
        return self.n ** (1.0 / self.d)

    def contains(self, x, margin: float = 0.0) -> np.ndarray:
        """Boolean mask: every coordinate within [-side/2 - margin, side/2 + margin]."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        half = self.side / 2.0 + margin
        return np.all(np.abs(x) <= half, axis=1)

    def corner_radius(self, margin: float = 0.0) -> float:
        return (self.side / 2.0 + margin) * math.sqrt(self.d)


@dataclass(frozen=True)
class ModelSpec:
    """Identity and parameters of a point-process model.

    ``kind`` is one of ``poisson``, ``perturbed_lattice``, ``ginibre``,
    ``gef_zeros``, ``cox_cluster``.  Parameters live in ``params`` and are
    echoed in outputs.
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("poisson", "perturbed_lattice", "ginibre",
                             "gef_zeros", "cox_cluster"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.kind == "perturbed_lattice":
            law = self.params.get("replication", "constant")
            if law not in REPLICATION_LAWS:
                raise ValueError(f"unknown replication law {law!r}")

    def label(self) -> str:
        if self.kind == "perturbed_lattice":
            return f"perturbed_lattice[{self.params.get('replication', 'constant')}]"
        if self.kind == "cox_cluster":
            return f"cox_cluster[{self.params.get('cluster_radius', 0.5):g}]"
        return self.kind

    def requires_dimension(self) -> int | None:
        return 2 if self.kind in ("ginibre", "gef_zeros") else None


def poisson() -> ModelSpec:
    return ModelSpec("poisson")


def perturbed_lattice(replication: str = "constant") -> ModelSpec:
    """Lattice with i.i.d. replication law (unit mean) and uniform perturbation.

    Mean-one presets: binomial(2, 1/2); hypergeometric(ngood=2, nbad=2,
    draws=2); negative binomial(size=2, p=2/3); geometric failures p=1/2.
    ``constant`` (N = 1 with uniform perturbation) is the simple perturbed
    lattice.
    """
    params = {"replication": replication}
    if replication == "binomial":
        params.update(m=2, p=0.5)
    elif replication == "hypergeometric":
        params.update(ngood=2, nbad=2, draws=2)
    elif replication == "negative_binomial":
        params.update(size=2, p=2.0 / 3.0)
    elif replication == "geometric":
        params.update(p=0.5)
    return ModelSpec("perturbed_lattice", params)


def ginibre() -> ModelSpec:
    return ModelSpec("ginibre")


def gef_zeros() -> ModelSpec:
    return ModelSpec("gef_zeros")


def cox_cluster(cluster_radius: float) -> ModelSpec:
    """Poisson cluster process: parents with intensity 1/4, four uniform
    children in the closed ball of ``cluster_radius`` around each parent."""
    return ModelSpec("cox_cluster", {"cluster_radius": float(cluster_radius),
                                     "points_per_cluster": 4})


@dataclass(frozen=True)
class PointConfiguration:
    """A sampled configuration on a window inflated by ``ambient_margin``.

    ``points`` holds every retained point (window plus margin band),
    lexicographically sorted.  ``window_mask`` flags the points inside the
    core window; duplicates are nudged apart at construction so the
    configuration is simple.
    """

    points: np.ndarray
    window: Window
    ambient_margin: float
    model: ModelSpec
    seed: int
    window_mask: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.size == 0:
            pts = pts.reshape(0, self.window.d)
        if pts.ndim != 2 or pts.shape[1] != self.window.d:
            raise ValueError("points must be an (m, d) array")
        if not bool(np.all(self.window.contains(pts, self.ambient_margin))) and len(pts):
            raise ValueError("points escape the inflated window")
        pts = _deduplicate(np.array(pts))
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "window_mask", self.window.contains(pts))

    def __len__(self):
        return len(self.points)

    @property
    def d(self) -> int:
        return self.window.d

    def window_points(self) -> np.ndarray:
        return self.points[self.window_mask]

    def ambient_points(self) -> np.ndarray:
        return self.points[~self.window_mask]

    def window_count(self) -> int:
        return int(np.count_nonzero(self.window_mask))


def _deduplicate(pts: np.ndarray) -> np.ndarray:
    if len(pts) < 2:
        return pts
    order = np.lexsort(pts.T[::-1])
    pts = pts[order]
    for _ in range(64):
        dup = np.where(np.all(pts[1:] == pts[:-1], axis=1))[0]
        if dup.size == 0:
            return pts
        log.warning("nudging %d duplicate point(s) by %g", dup.size, _DUP_NUDGE)
        pts[dup + 1, 0] += _DUP_NUDGE
        order = np.lexsort(pts.T[::-1])
        pts = pts[order]
    raise RuntimeError("could not separate duplicate points")


# ---------------------------------------------------------------------------
# samplers


def sample(model: ModelSpec, window: Window, margin: float = 0.0,
           seed: int = 0) -> PointConfiguration:
    """Draw one configuration of ``model`` on ``window`` inflated by ``margin``.

    Deterministic given ``(model, window, margin, seed)``.
    """
    if margin < 0:
        raise ValueError("margin must be nonnegative")
    req = model.requires_dimension()
    if req is not None and window.d != req:
        raise ValueError(f"{model.kind} requires dimension d = {req}")
    rng = rng_for(seed)
    half = window.side / 2.0 + margin
    if model.kind == "poisson":
        pts = _sample_poisson(rng, window.d, half)
    elif model.kind == "perturbed_lattice":
        pts = _sample_perturbed_lattice(rng, window.d, half, model.params)
    elif model.kind == "ginibre":
        pts = _sample_ginibre(rng, half)
    elif model.kind == "gef_zeros":
        pts = _sample_gef_zeros(rng, half)
    elif model.kind == "cox_cluster":
        pts = _sample_cox(rng, window.d, half, model.params)
    else:  # pragma: no cover
        raise AssertionError(model.kind)
    return PointConfiguration(pts, window, margin, model, int(seed))


def _sample_poisson(rng, d, half):
    vol = (2.0 * half) ** d
    count = rng.poisson(vol)
    return rng.uniform(-half, half, size=(count, d))


def _sample_perturbed_lattice(rng, d, half, params):
    # lattice wrapped on a torus covering the inflated window; the uniform
    # origin shift makes the law translation invariant, and an integer-sided
    # window with margin 0 holds exactly one point per cell when N = 1
    m = max(1, int(math.ceil(2.0 * half - 1e-9)))
    shift = rng.uniform(0.0, 1.0, size=d)
    axes = [np.arange(m)] * d
    sites = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    counts = _replication_counts(rng, params, len(sites))
    total = int(counts.sum())
    if total == 0:
        return np.empty((0, d))
    base = np.repeat(sites, counts, axis=0).astype(float)
    pts = np.mod(base + shift + rng.uniform(0.0, 1.0, size=(total, d)), m)
    pts -= m / 2.0
    keep = np.all(np.abs(pts) <= half, axis=1)
    return pts[keep]


def _replication_counts(rng, params, m):
    law = params.get("replication", "constant")
    if law == "constant":
        return np.ones(m, dtype=np.int64)
    if law == "binomial":
        return rng.binomial(params["m"], params["p"], size=m)
    if law == "hypergeometric":
        return rng.hypergeometric(params["ngood"], params["nbad"],
                                  params["draws"], size=m)
    if law == "negative_binomial":
        return rng.negative_binomial(params["size"], params["p"], size=m)
    if law == "geometric":
        return rng.geometric(params["p"], size=m) - 1
    raise AssertionError(law)


def ginibre_matrix_size(window: Window, margin: float) -> int:
    """Matrix order whose eigenvalue bulk covers the inflated window.

    In eigenvalue coordinates the window corner sits at
    ``sqrt(pi) * corner_radius``; the bulk of an m x m Ginibre matrix fills a
    disk of radius ``sqrt(m)`` whose edge profile decays on an O(1) width.
    """
    r_std = math.sqrt(math.pi) * window.corner_radius(margin)
    m = int(math.ceil((r_std + _GINIBRE_EDGE_WIDTHS) ** 2))
    if m < 1:
        raise SizingError("window too small for Ginibre sampling")
    return m


def _sample_ginibre(rng, half):
    corner = half * math.sqrt(2.0)
    r_std = math.sqrt(math.pi) * corner
    m = int(math.ceil((r_std + _GINIBRE_EDGE_WIDTHS) ** 2))
    if m < 1:
        raise SizingError("window too small for Ginibre sampling")
    a = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m)))
    a *= math.sqrt(0.5)
    if m > _GINIBRE_SINGLE_PREC_SIZE:
        ev = scipy.linalg.eigvals(a.astype(np.complex64), check_finite=False)
        ev = ev.astype(np.complex128)
    else:
        ev = np.linalg.eigvals(a)
    pts = np.column_stack([ev.real, ev.imag]) / math.sqrt(math.pi)
    keep = np.all(np.abs(pts) <= half, axis=1)
    return pts[keep]


def gef_truncation_degree(r_std: float) -> int:
    """Series degree with relative L2 tail below 1e-8 on the disk |z| <= r_std."""
    lam = r_std * r_std
    m = int(stats.poisson.isf(1e-17, lam)) + 8 if lam > 0 else 8
    return m


def _sample_gef_zeros(rng, half):
    # f(z) = sum xi_k z^k / sqrt(k!), zeros rescaled by 1/sqrt(pi) to unit
    # intensity.  Root-find the truncated series on the covering disk via the
    # companion matrix, then polish with Newton steps.
    corner = half * math.sqrt(2.0)
    r_std = math.sqrt(math.pi) * corner
    degree = gef_truncation_degree(r_std)
    if degree > _GEF_MAX_DEGREE:
        raise SizingError(
            f"GEF window needs series degree {degree} > {_GEF_MAX_DEGREE}; "
            "use a smaller window (double precision limit)")
    xi = (rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1))
    xi *= math.sqrt(0.5)
    k = np.arange(degree + 1)
    # coefficients of p(w) = f(r_std * w), normalised in log space
    logmag = k * math.log(max(r_std, 1e-300)) - 0.5 * special.gammaln(k + 1)
    coeff = xi * np.exp(logmag - logmag.max())
    roots = np.roots(coeff[::-1])
    roots = roots[np.abs(roots) <= 1.0 + 1e-9]
    roots = _newton_polish(coeff, roots)
    roots = roots[np.abs(roots) <= 1.0]
    z = roots * r_std / math.sqrt(math.pi)
    pts = np.column_stack([z.real, z.imag])
    keep = np.all(np.abs(pts) <= half, axis=1)
    return pts[keep]


def _newton_polish(coeff, w, iters=3):
    dcoeff = coeff[1:] * np.arange(1, len(coeff))
    for _ in range(iters):
        p = np.polyval(coeff[::-1], w)
        dp = np.polyval(dcoeff[::-1], w)
        ok = np.abs(dp) > 0
        w = np.where(ok, w - p / np.where(ok, dp, 1.0), w)
    return w


def _sample_cox(rng, d, half, params):
    radius = float(params["cluster_radius"])
    per = int(params.get("points_per_cluster", 4))
    parent_half = half + radius
    vol = (2.0 * parent_half) ** d
    n_par = rng.poisson(vol / per)  # parent intensity 1/per keeps unit intensity
    parents = rng.uniform(-parent_half, parent_half, size=(n_par, d))
    offs = _uniform_in_ball(rng, n_par * per, d) * radius
    pts = np.repeat(parents, per, axis=0) + offs
    keep = np.all(np.abs(pts) <= half, axis=1)
    return pts[keep]


def _uniform_in_ball(rng, count, d):
    g = rng.standard_normal((count, d))
    norm = np.linalg.norm(g, axis=1, keepdims=True)
    norm[norm == 0] = 1.0
    u = rng.uniform(0.0, 1.0, size=(count, 1)) ** (1.0 / d)
    return g / norm * u


# ---------------------------------------------------------------------------
# joint intensities


def ginibre_kernel(x, y) -> complex:
    """Unit-intensity Ginibre kernel K(x, y) on R^2 (complex valued)."""
    zx = complex(x[0], x[1])
    zy = complex(y[0], y[1])
    return np.exp(math.pi * (zx * zy.conjugate())
                  - 0.5 * math.pi * (abs(zx) ** 2 + abs(zy) ** 2))


def joint_intensity(model: ModelSpec, points) -> float:
    """k-th joint intensity rho^(k)(x_1, ..., x_k) for analytic models.

    Poisson: identically 1.  Ginibre: determinant of the rescaled kernel
    matrix (exactly 0 on repeated points).  Other models raise
    :class:`IntensityUnavailableError`.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    k = len(pts)
    if k < 1:
        raise ValueError("need at least one point")
    if model.kind == "poisson":
        return 1.0
    if model.kind == "ginibre":
        if pts.shape[1] != 2:
            raise ValueError("Ginibre intensities are planar")
        for i in range(k):
            for j in range(i + 1, k):
                if np.all(pts[i] == pts[j]):
                    return 0.0
        mat = np.empty((k, k), dtype=complex)
        for i in range(k):
            for j in range(k):
                mat[i, j] = ginibre_kernel(pts[i], pts[j])
        val = np.linalg.det(mat).real
        return max(val, 0.0)
    raise IntensityUnavailableError(
        f"intensity unavailable for model {model.kind!r}")


# ---------------------------------------------------------------------------
# Monte Carlo estimators


def estimate_void(model: ModelSpec, window: Window, region, replicates: int,
                  seed: int, margin: float = 0.0) -> EstimateRecord:
    """Void probability of a ball ``region = (center, radius)``.

    Mean of the indicator {no sampled point in the closed ball} with a
    binomial (normal-approximation) confidence interval.
    """
    center, radius = region
    center = np.asarray(center, dtype=float)
    if radius < 0:
        raise GeometryError("negative radius")
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    half = window.side / 2.0 + margin
    if np.any(np.abs(center) + radius > half + 1e-12):
        raise GeometryError("void region escapes the sampled domain")
    hits = []
    for rep in range(replicates):
        config = sample(model, window, margin, _derived_seed(seed, rep))
        hits.append(float(_ball_empty(config.points, center, radius)))
    return EstimateRecord.from_values("void", model.label(), window.n, radius,
                                      hits, seed,
                                      {"center": center.tolist()})


def _ball_empty(pts, center, radius) -> bool:
    if len(pts) == 0:
        return True
    d2 = np.sum((pts - center) ** 2, axis=1)
    return bool(np.all(d2 > radius * radius))


def _derived_seed(master, *idx) -> int:
    ss = np.random.SeedSequence([int(master) & 0x7FFFFFFFFFFFFFFF] +
                                [int(i) for i in idx])
    return int(ss.generate_state(1, np.uint64)[0])


class PalmFunctional:
    """Monotone statistic over regions disjoint from the conditioning balls.

    ``regions`` is a list of ``("ball", center, radius)`` or
    ``("annulus", center, r_inner, r_outer)`` descriptors; ``fn`` maps a point
    array to a real value and must only read the declared regions.
    """

    def __init__(self, regions, fn, increasing=True, name="functional"):
        self.regions = regions
        self.fn = fn
        self.increasing = increasing
        self.name = name

    def __call__(self, pts) -> float:
        return float(self.fn(pts))


def count_in_ball(center, radius) -> PalmFunctional:
    center = np.asarray(center, dtype=float)

    def fn(pts):
        if len(pts) == 0:
            return 0.0
        return float(np.count_nonzero(
            np.sum((pts - center) ** 2, axis=1) <= radius * radius))

    return PalmFunctional([("ball", center, radius)], fn, True,
                          f"count_ball[{radius:g}]")


def count_in_annulus(center, r_inner, r_outer) -> PalmFunctional:
    center = np.asarray(center, dtype=float)

    def fn(pts):
        if len(pts) == 0:
            return 0.0
        d2 = np.sum((pts - center) ** 2, axis=1)
        return float(np.count_nonzero(
            (d2 >= r_inner * r_inner) & (d2 <= r_outer * r_outer)))

    return PalmFunctional([("annulus", center, r_inner, r_outer)], fn, True,
                          f"count_annulus[{r_inner:g},{r_outer:g}]")


def void_in_ball(center, radius) -> PalmFunctional:
    center = np.asarray(center, dtype=float)

    def fn(pts):
        return float(_ball_empty(pts, center, radius))

    return PalmFunctional([("ball", center, radius)], fn, False,
                          f"void_ball[{radius:g}]")


def _region_disjoint_from_ball(region, anchor, eps) -> bool:
    kind = region[0]
    center = np.asarray(region[1], dtype=float)
    dist = float(np.linalg.norm(center - anchor))
    if kind == "ball":
        return dist >= eps + region[2]
    if kind == "annulus":
        return dist >= eps + region[3] or dist + eps <= region[2]
    raise ValueError(f"unknown region kind {kind!r}")


def estimate_palm_functional(model: ModelSpec, window: Window, anchors,
                             eps: float, functional: PalmFunctional,
                             replicates: int, seed: int,
                             margin: float = 0.0,
                             check_regions: bool = True):
    """Rejection estimate of the reduced Palm expectation of ``functional``.

    A replicate is accepted when every ball of radius ``eps`` around an
    anchor contains at least one point; the functional is averaged over
    accepted replicates.  Returns ``(palm_record, unconditional_record)``;
    the acceptance count is reported in ``palm_record.extra``.
    """
    anchors = np.atleast_2d(np.asarray(anchors, dtype=float))
    if eps <= 0:
        raise ValueError("eps must be positive")
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    for i in range(len(anchors)):
        for j in range(i + 1, len(anchors)):
            if np.all(anchors[i] == anchors[j]):
                raise ValueError("anchors must be pairwise distinct")
    if check_regions:
        for region in functional.regions:
            for a in anchors:
                if not _region_disjoint_from_ball(region, a, eps):
                    raise GeometryError(
                        "functional region intersects a conditioning ball")
    accepted, all_vals = [], []
    for rep in range(replicates):
        config = sample(model, window, margin, _derived_seed(seed, rep))
        pts = config.points
        value = functional(pts)
        all_vals.append(value)
        ok = True
        for a in anchors:
            if _ball_empty(pts, a, eps):
                ok = False
                break
        if ok:
            accepted.append(value)
    if not accepted:
        raise AcceptanceStarvationError(
            "insufficient conditioning mass: zero accepted replicates "
            f"(acceptance rate 0/{replicates})", 0.0)
    uncond = EstimateRecord.from_values(
        f"mean[{functional.name}]", model.label(), window.n, eps, all_vals,
        seed)
    palm = EstimateRecord.from_values(
        f"palm[{functional.name}]", model.label(), window.n, eps, accepted,
        seed, {"accepted": len(accepted), "replicates": replicates,
               "acceptance_rate": len(accepted) / replicates})
    return palm, uncond
