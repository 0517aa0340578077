"""Numerical evaluation of the limit constants behind the scaling laws.

mu0: sparse-regime constant for subgraph/component counts
mu_beta / gamma_beta: thermodynamic constants (gamma carries a Palm void factor)
nu_k: analogous constants for Morse critical counts
fit_scaling_exponent: weighted log-log fit extracting an empirical exponent

Integrals are Monte Carlo over the bounded support of the indicator, with the
Ginibre intensity-scaling profile evaluated at a small reference radius
(rho^(k)(r y) / r^(k(k-1)) at r = 1e-3); only the Poisson and Ginibre models
supply analytic intensities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import morse
from .errors import DegenerateGeometryError, IntensityUnavailableError
from .geograph import GraphPattern, pattern_indicator
from .complexes import ComplexPattern, induced_cech_faces, simplicial_isomorphic
from .pointproc import (ModelSpec, Window, joint_intensity,
                        estimate_palm_functional, void_in_ball, rng_for)

GINIBRE_PROFILE_R = 1e-3


@dataclass
class LimitConstant:
    identifier: str
    pattern: str
    model: str
    beta: float
    estimate: float
    se: float
    samples: int
    seed: int
    extra: dict = field(default_factory=dict)

    def row(self):
        from .records import fmt
        return [self.identifier, self.pattern, self.model, fmt(self.beta),
                fmt(self.estimate), fmt(self.se), str(self.samples),
                str(self.seed)]


LIMIT_HEADER = ["id", "pattern", "model", "beta", "estimate", "se",
                "samples", "seed"]


def write_limits_csv(path, constants) -> None:
    import csv
    from pathlib import Path

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(LIMIT_HEADER)
        for c in constants:
            w.writerow(c.row())


def ball_volume(d: int, radius: float) -> float:
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0) * radius ** d


def _pattern_hits(pattern, pts_block, r=1.0):
    """Indicator h of the pattern on a block of point tuples at radius r."""
    if isinstance(pattern, GraphPattern):
        return np.array([pattern_indicator(pts, r, pattern)
                         for pts in pts_block], dtype=float)
    if isinstance(pattern, ComplexPattern):
        out = np.empty(len(pts_block))
        for i, pts in enumerate(pts_block):
            faces = induced_cech_faces(np.asarray(pts), r)
            out[i] = float(simplicial_isomorphic(faces, pattern.k,
                                                 pattern.faces, pattern.k))
        return out
    raise TypeError("pattern must be a GraphPattern or ComplexPattern")


def _uniform_in_ball(rng, count, d, radius):
    g = rng.standard_normal((count, d))
    norm = np.linalg.norm(g, axis=1, keepdims=True)
    norm[norm == 0] = 1.0
    u = rng.uniform(0.0, 1.0, size=(count, 1)) ** (1.0 / d)
    return g / norm * u * radius


def _scaling_profile(model: ModelSpec, pts, k: int) -> float:
    """g^k evaluated at a point tuple: limit of rho^(k)(r y)/f^k(r)."""
    if model.kind == "poisson":
        return 1.0
    if model.kind == "ginibre":
        r0 = GINIBRE_PROFILE_R
        val = joint_intensity(model, r0 * np.asarray(pts))
        return val / r0 ** (k * (k - 1))
    raise IntensityUnavailableError(
        f"no scaling profile for model {model.kind!r}")


def mu0(pattern, model: ModelSpec, d: int, samples: int, seed: int,
        profile=None) -> LimitConstant:
    """Sparse limit constant: (1/k!) integral of h_Gamma * g^k over the
    pattern support (first point pinned at the origin).

    ``profile`` overrides the intensity-scaling profile g^k (callable on a
    point block); used for ordering checks with explicitly ordered inputs.
    """
    k = pattern.k
    if k == 1:
        return LimitConstant("mu0", pattern.name, model.label(), 0.0, 1.0,
                             0.0, 0, seed)
    rng = rng_for(seed, 71)
    support = float(k)
    vols = ball_volume(d, support) ** (k - 1)
    ys = _uniform_in_ball(rng, samples * (k - 1), d, support)
    ys = ys.reshape(samples, k - 1, d)
    zero = np.zeros((samples, 1, d))
    blocks = np.concatenate([zero, ys], axis=1)
    h = _pattern_hits(pattern, blocks, 1.0)
    gfun = profile if profile is not None else (
        lambda b: _scaling_profile(model, b, k))
    g = np.array([gfun(b) if h[i] else 0.0 for i, b in enumerate(blocks)])
    vals = h * g * vols / math.factorial(k)
    est = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(samples)) if samples > 1 else math.inf
    return LimitConstant("mu0", pattern.name, model.label(), 0.0, est, se,
                         samples, seed)


def _poisson_union_void(centers, radius, rng, inner=4096) -> float:
    """exp(-|union of balls|) for the Poisson Palm void factor.

    Closed forms for one or two balls; Monte Carlo volume otherwise.
    """
    centers = np.atleast_2d(centers)
    d = centers.shape[1]
    if len(centers) == 1:
        vol = ball_volume(d, radius)
    elif len(centers) == 2 and d == 2:
        vol = 2 * math.pi * radius ** 2 - _lens_area(
            float(np.linalg.norm(centers[0] - centers[1])), radius)
    else:
        lo = centers.min(axis=0) - radius
        hi = centers.max(axis=0) + radius
        box = np.prod(hi - lo)
        u = rng.uniform(lo, hi, size=(inner, d))
        d2 = np.min(np.sum((u[:, None, :] - centers[None, :, :]) ** 2, axis=2),
                    axis=1)
        vol = box * float(np.mean(d2 <= radius * radius))
    return math.exp(-vol)


def _lens_area(dist, radius) -> float:
    if dist >= 2 * radius:
        return 0.0
    if dist <= 0:
        return math.pi * radius ** 2
    x = dist / (2 * radius)
    return 2 * radius ** 2 * math.acos(x) - 0.5 * dist * math.sqrt(
        4 * radius ** 2 - dist ** 2)


def mu_beta(pattern, model: ModelSpec, beta: float, d: int, samples: int,
            seed: int) -> LimitConstant:
    """Thermodynamic subgraph constant (no void factor)."""
    return _thermo(pattern, model, beta, d, samples, seed, void=False,
                   identifier="mu_beta")


def gamma_beta(pattern, model: ModelSpec, beta: float, d: int, samples: int,
               seed: int, palm_replicates: int = 200,
               eps_factor: float = 0.05) -> LimitConstant:
    """Thermodynamic component constant with the Palm void factor.

    Poisson uses the closed-form void; other samplable models use the
    rejection Palm estimator with conditioning radius eps_factor * beta^(1/d)
    (sensitivity at half that radius reported in ``extra``).
    """
    return _thermo(pattern, model, beta, d, samples, seed, void=True,
                   identifier="gamma_beta", palm_replicates=palm_replicates,
                   eps_factor=eps_factor)


def _thermo(pattern, model, beta, d, samples, seed, void, identifier,
            palm_replicates=200, eps_factor=0.05):
    if beta <= 0:
        raise ValueError("beta must be positive")
    k = pattern.k
    rng = rng_for(seed, 72)
    scale = beta ** (1.0 / d)
    if k == 1:
        if not void:
            return LimitConstant(identifier, pattern.name, model.label(),
                                 beta, 1.0, 0.0, 0, seed)
        if model.kind == "poisson":
            est = math.exp(-ball_volume(d, scale))
            return LimitConstant(identifier, pattern.name, model.label(),
                                 beta, est, 0.0, 0, seed)
        origin = np.zeros(d)
        est, se, extra = _palm_void_estimate(model, d, [origin], scale, scale,
                                             eps_factor, palm_replicates,
                                             seed)
        return LimitConstant(identifier, pattern.name, model.label(), beta,
                             est, se, palm_replicates, seed, extra)
    vols = ball_volume(d, float(k)) ** (k - 1)
    ys = _uniform_in_ball(rng, samples * (k - 1), d, float(k))
    ys = ys.reshape(samples, k - 1, d)
    blocks = np.concatenate([np.zeros((samples, 1, d)), ys], axis=1)
    h = _pattern_hits(pattern, blocks, 1.0)
    vals = np.zeros(samples)
    pref = beta ** (k - 1) / math.factorial(k) * vols
    for i in range(samples):
        if not h[i]:
            continue
        scaled = scale * blocks[i]
        try:
            rho = joint_intensity(model, scaled)
        except IntensityUnavailableError:
            rho = 1.0  # samplable non-analytic models enter via the void factor
        if not void:
            vals[i] = rho
            continue
        if model.kind == "poisson":
            vfac = _poisson_union_void(scaled, scale, rng)
        else:
            vfac, _, _ = _palm_void_estimate(
                model, d, scaled, scale, scale, eps_factor,
                palm_replicates, seed + i)
        vals[i] = rho * vfac
    vals *= pref
    est = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(samples)) if samples > 1 else math.inf
    return LimitConstant(identifier, pattern.name, model.label(), beta, est,
                         se, samples, seed)


def _palm_void_estimate(model, d, anchors, ball_radius, scale, eps_factor,
                        replicates, seed):
    """Rejection estimate of the Palm void probability of the union of
    ``ball_radius`` balls around the anchors, conditioning on eps-balls."""
    anchors = np.atleast_2d(np.asarray(anchors, dtype=float))
    eps = eps_factor * scale
    extent = float(np.max(np.abs(anchors))) + ball_radius + 3.0
    window = Window(d, (2 * extent) ** d)

    def make_fn(excl_eps):
        def fn(pts):
            if len(pts) == 0:
                return 1.0
            d2a = np.min(np.sum((pts[:, None, :] - anchors[None, :, :]) ** 2,
                                axis=2), axis=1)
            keep = d2a > excl_eps * excl_eps  # reduced Palm: drop anchor balls
            if not np.any(keep):
                return 1.0
            return float(np.all(d2a[keep] > ball_radius * ball_radius))
        return fn

    from .pointproc import PalmFunctional
    values = {}
    for label, e in (("eps", eps), ("eps_half", eps / 2.0)):
        functional = PalmFunctional([], make_fn(e), increasing=False,
                                    name="palm_void")
        palm, _ = estimate_palm_functional(
            model, window, anchors, e, functional, replicates, seed,
            margin=0.0, check_regions=False)
        values[label] = (palm.mean, palm.ci_halfwidth / 1.959963984540054)
    est, se = values["eps"]
    return est, se, {"eps_half_estimate": values["eps_half"][0]}


def nu_k(model: ModelSpec, beta: float, k: int, d: int, samples: int,
         seed: int) -> LimitConstant:
    """Morse critical-count constant; beta = 0 gives the sparse version."""
    if not (1 <= k <= d):
        raise ValueError("index k must satisfy 1 <= k <= d")
    rng = rng_for(seed, 73)
    vols = ball_volume(d, 2.0) ** k
    ys = _uniform_in_ball(rng, samples * k, d, 2.0)
    ys = ys.reshape(samples, k, d)
    vals = np.zeros(samples)
    scale = beta ** (1.0 / d) if beta > 0 else 1.0
    pref = (beta ** k if beta > 0 else 1.0) / math.factorial(k + 1) * vols
    for i in range(samples):
        block = np.concatenate([np.zeros((1, d)), ys[i]], axis=0)
        try:
            center, radius = morse.circumsphere(block)
        except DegenerateGeometryError:
            continue
        if radius > 1.0:
            continue
        try:
            if not morse.in_open_convex_hull(center, block):
                continue
        except DegenerateGeometryError:
            continue
        if beta == 0:
            vals[i] = _scaling_profile(model, block, k + 1)
            continue
        scaled = scale * block
        try:
            rho = joint_intensity(model, scaled)
        except IntensityUnavailableError:
            rho = 1.0
        if model.kind == "poisson":
            vfac = math.exp(-ball_volume(d, scale * radius))
        else:
            vfac, _, _ = _palm_void_estimate(model, d, scaled, scale * radius,
                                             scale, 0.05, 200, seed + i)
        vals[i] = rho * vfac
    vals *= pref
    est = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(samples)) if samples > 1 else math.inf
    return LimitConstant(f"nu_{k}", f"h1[k={k}]", model.label(), beta, est,
                         se, samples, seed)


def fit_scaling_exponent(series):
    """Weighted least squares on log-log: returns (slope, intercept, slope SE).

    ``series`` is a list of (r, estimate, se); estimates must be positive.
    """
    if len(series) < 4:
        raise ValueError("need at least 4 points")
    r = np.array([s[0] for s in series], dtype=float)
    est = np.array([s[1] for s in series], dtype=float)
    se = np.array([s[2] for s in series], dtype=float)
    if np.any(est <= 0):
        raise ValueError("nonpositive estimates cannot be log-fitted")
    x = np.log(r)
    y = np.log(est)
    sigma = np.where(se > 0, se / est, 1e-9)
    w = 1.0 / sigma ** 2
    sw = w.sum()
    xbar = (w * x).sum() / sw
    ybar = (w * y).sum() / sw
    sxx = (w * (x - xbar) ** 2).sum()
    slope = (w * (x - xbar) * (y - ybar)).sum() / sxx
    intercept = ybar - slope * xbar
    slope_se = math.sqrt(1.0 / sxx)
    return float(slope), float(intercept), float(slope_se)
