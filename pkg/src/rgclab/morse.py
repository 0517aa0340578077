"""Min-type Morse critical points of the distance function, and the
discrete-Morse critical-simplex count for Rips complexes.

An index-k critical point is generated by k+1 points in general position
whose circumcenter lies strictly inside their convex hull and whose open
circumball contains no configuration point.  N_k counts those with
circumradius <= r; the union of radius-r balls is homotopy equivalent to the
Cech complex at parameter 2r, which fixes the radius bookkeeping for every
Morse/Betti comparison in this package.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial import Delaunay, cKDTree

from .errors import DegenerateGeometryError, MarginError
from .geograph import GeometricGraph
from .pointproc import PointConfiguration
from .records import fmt

AFFINE_TOL = 1e-9
HULL_TOL = 1e-9
EMPTY_SLACK = 1e-12
NEAR_THRESHOLD = 1e-6


def circumsphere(points):
    """Center and radius of the sphere through k+1 points (1 <= k <= d).

    Solves the equidistance system within the affine hull; raises
    DegenerateGeometryError when the points are affinely dependent within
    tolerance.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    k = len(pts) - 1
    if k < 1 or k > pts.shape[1]:
        raise ValueError("need k+1 points with 1 <= k <= d")
    p0 = pts[0]
    m = pts[1:] - p0
    svals = np.linalg.svd(m, compute_uv=False)
    if svals[-1] <= AFFINE_TOL * max(1.0, svals[0]):
        raise DegenerateGeometryError("affinely dependent points")
    gram = m @ m.T
    rhs = 0.5 * np.einsum("ij,ij->i", m, m)
    alpha = np.linalg.solve(gram, rhs)
    center = p0 + alpha @ m
    radius = float(np.linalg.norm(center - p0))
    dists = np.linalg.norm(pts - center, axis=1)
    if np.max(np.abs(dists - radius)) > 1e-6 * max(1.0, radius):
        raise DegenerateGeometryError("equidistance residual too large")
    return center, radius


def in_open_convex_hull(center, points) -> bool:
    """Barycentric coordinates of ``center`` w.r.t. ``points`` all positive."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    center = np.asarray(center, dtype=float)
    k = len(pts) - 1
    m = pts[1:] - pts[0]
    svals = np.linalg.svd(m, compute_uv=False) if k >= 1 else np.array([1.0])
    if k >= 1 and svals[-1] <= AFFINE_TOL * max(1.0, svals[0]):
        raise DegenerateGeometryError("affinely dependent points")
    if k == 0:
        return bool(np.allclose(center, pts[0]))
    coeff = np.linalg.lstsq(m.T, center - pts[0], rcond=None)[0]
    bary = np.concatenate([[1.0 - coeff.sum()], coeff])
    return bool(np.all(bary > HULL_TOL))


@dataclass
class CriticalPointRecord:
    index: int
    vertices: tuple
    center: np.ndarray
    radius: float
    near_threshold: bool = False


def write_critical_csv(path, records) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for rec in records:
            row = [rec.index, fmt(rec.radius)]
            row += [fmt(float(c)) for c in rec.center]
            row += [str(v) for v in rec.vertices]
            w.writerow(row)


def critical_points(config: PointConfiguration, r: float, max_index: int,
                    mode: str = "interior"):
    """All critical points with value <= r, plus counts N_0..N_max.

    Returns ``(records, counts, degenerate_count)``.  Generating subsets are
    drawn from the window points; ambient mode checks ball emptiness against
    margin points as well (needs margin >= 2r).
    """
    d = config.window.d
    if r <= 0:
        raise ValueError("r must be positive")
    if not (0 <= max_index <= d):
        raise ValueError("max_index must lie in 0..d")
    if mode not in ("interior", "ambient"):
        raise ValueError("mode must be 'interior' or 'ambient'")
    if mode == "ambient" and config.ambient_margin + 1e-12 < 2 * r:
        raise MarginError("ambient critical points need margin >= 2r")
    window_pts = config.window_points()
    test_pts = config.points if mode == "ambient" else window_pts
    records = []
    counts = [0] * (max_index + 1)
    counts[0] = len(window_pts)
    degenerate = 0
    if max_index == 0 or len(window_pts) == 0:
        return records, counts, degenerate
    graph = GeometricGraph(window_pts, 2.0 * r)
    adj = graph.adjacency_sets()
    r_eff = r

    def consider(subset):
        nonlocal degenerate
        pts = window_pts[list(subset)]
        try:
            center, radius = circumsphere(pts)
        except DegenerateGeometryError:
            degenerate += 1
            return
        if radius > r_eff:
            return
        try:
            if not in_open_convex_hull(center, pts):
                return
        except DegenerateGeometryError:
            degenerate += 1
            return
        d2 = np.sum((test_pts - center) ** 2, axis=1)
        if np.any(d2 < (radius - EMPTY_SLACK) ** 2):
            return
        k = len(subset) - 1
        counts[k] += 1
        records.append(CriticalPointRecord(
            k, tuple(subset), center, radius,
            abs(radius - r) < NEAR_THRESHOLD))

    def expand(face, cands):
        if len(face) > max_index:
            return
        for v in sorted(cands):
            new_face = face + (v,)
            if len(new_face) >= 2:
                consider(new_face)
            expand(new_face, cands & {u for u in adj[v] if u > v})

    for v in range(len(window_pts)):
        expand((v,), {u for u in adj[v] if u > v})
    return records, counts, degenerate


def planar_critical_counts(config: PointConfiguration, r: float,
                           mode: str = "interior"):
    """Fast N_0, N_1, N_2 in the plane via Delaunay candidates.

    Index-1 criticals are Gabriel edges (empty diametral disk), index-2
    criticals are Delaunay triangles with interior circumcenter; both are
    Delaunay faces, so the triangulation enumerates every candidate.
    """
    if config.window.d != 2:
        raise ValueError("planar path needs d = 2")
    if mode == "ambient" and config.ambient_margin + 1e-12 < 2 * r:
        raise MarginError("ambient critical points need margin >= 2r")
    window_pts = config.window_points()
    pts = config.points if mode == "ambient" else window_pts
    n0 = len(window_pts)
    if len(pts) < 3:
        counts = [n0, 0, 0]
        if len(pts) == 2 and n0 == 2:
            try:
                c, rad = circumsphere(pts)
                if rad <= r:
                    counts[1] = 1
            except DegenerateGeometryError:
                pass
        return counts
    if mode == "ambient":
        window_index = set(np.nonzero(config.window_mask)[0].tolist())
    else:
        window_index = set(range(len(pts)))
    tri = Delaunay(pts)
    tree = cKDTree(pts)
    edges = set()
    for simplex in tri.simplices:
        s = sorted(int(v) for v in simplex)
        for a in range(3):
            for b in range(a + 1, 3):
                edges.add((s[a], s[b]))
    n1 = 0
    for u, v in edges:
        if u not in window_index or v not in window_index:
            continue
        mid = 0.5 * (pts[u] + pts[v])
        rad = 0.5 * float(np.linalg.norm(pts[u] - pts[v]))
        if rad > r:
            continue
        hits = tree.query_ball_point(mid, rad - EMPTY_SLACK)
        if all(h in (u, v) for h in hits):
            n1 += 1
    n2 = 0
    for simplex in tri.simplices:
        s = tuple(sorted(int(v) for v in simplex))
        if not all(v in window_index for v in s):
            continue
        tri_pts = pts[list(s)]
        try:
            center, rad = circumsphere(tri_pts)
        except DegenerateGeometryError:
            continue
        if rad > r:
            continue
        try:
            if not in_open_convex_hull(center, tri_pts):
                continue
        except DegenerateGeometryError:
            continue
        hits = tree.query_ball_point(center, rad - EMPTY_SLACK)
        if all(h in s for h in hits):
            n2 += 1
    return [n0, n1, n2]


def morse_euler(config: PointConfiguration, r: float, mode: str = "interior",
                planar_fast: bool | None = None) -> int:
    """Euler characteristic as the alternating sum of critical counts at r."""
    d = config.window.d
    if planar_fast is None:
        planar_fast = d == 2 and config.window_count() > 400
    if planar_fast and d == 2:
        counts = planar_critical_counts(config, r, mode)
    else:
        _, counts, _ = critical_points(config, r, d, mode)
    return int(sum((-1) ** k * c for k, c in enumerate(counts)))


# ---------------------------------------------------------------------------
# discrete Morse theory on Rips complexes


def discrete_morse_critical_simplices(config: PointConfiguration, eps: float,
                                      max_dim: int):
    """Critical-simplex counts C_0..C_max of the norm-ordered pairing.

    Points are ordered by distance to the origin; a simplex is paired with
    its extension by the nearest-to-origin common neighbor closer than all
    its vertices, when consistent.  Unpaired simplices are critical, and
    beta_k <= C_k for the Rips complex at eps.
    """
    pts = config.window_points()
    norms = np.linalg.norm(pts, axis=1)
    order = np.argsort(norms, kind="stable")
    sorted_norms = norms[order]
    if len(pts) > 1 and np.min(np.diff(sorted_norms)) <= 0:
        raise DegenerateGeometryError("norm ties: perturb the configuration")
    pts = pts[order]
    graph = GeometricGraph(pts, eps)
    adj = graph.adjacency_sets()

    def closest_extension(subset):
        """Smallest-index point below min(subset) adjacent to all of subset."""
        it = iter(subset)
        first = next(it)
        cands = {u for u in adj[first] if u < subset[0]}
        for v in it:
            cands &= adj[v]
            if not cands:
                return None
        cands = {u for u in cands if u < subset[0]}
        return min(cands) if cands else None

    counts = [0] * (max_dim + 1)

    def visit(face):
        a_up = closest_extension(face)
        if len(face) == 1:
            paired_down = False
        else:
            rest = face[1:]
            paired_down = closest_extension(rest) == face[0]
        if a_up is None and not paired_down:
            counts[len(face) - 1] += 1
        return True

    from .complexes import _clique_expand
    _clique_expand(graph, max_dim, visit)
    return counts
