"""Independent brute-force oracles the fast paths are tested against.

Everything here evaluates defining sums directly over all subsets, uses dense
GF(2) elimination for homology, and scipy optimisation for enclosing balls,
deliberately avoiding the library's own pruned/sparse code paths.
"""

import itertools
import math

import numpy as np
from scipy import optimize


def adjacency(points, r):
    pts = np.asarray(points, dtype=float)
    diff = pts[:, None, :] - pts[None, :, :]
    d2 = np.sum(diff * diff, axis=2)
    adj = d2 <= r * r
    np.fill_diagonal(adj, False)
    return adj


def graphs_isomorphic(adj_a, adj_b):
    k = len(adj_a)
    if len(adj_b) != k:
        return False
    for perm in itertools.permutations(range(k)):
        if all(adj_a[i][j] == adj_b[perm[i]][perm[j]]
               for i in range(k) for j in range(i + 1, k)):
            return True
    return False


def pattern_adj(pattern):
    adj = np.zeros((pattern.k, pattern.k), dtype=bool)
    for a, b in pattern.edges:
        adj[a, b] = adj[b, a] = True
    return adj


def brute_count_subgraphs(points, r, pattern):
    pts = np.asarray(points, dtype=float)
    adj = adjacency(pts, r)
    padj = pattern_adj(pattern)
    total = 0
    for subset in itertools.combinations(range(len(pts)), pattern.k):
        sub = adj[np.ix_(subset, subset)]
        if graphs_isomorphic(sub, padj):
            total += 1
    return total


def brute_count_components(points, r, pattern, all_points=None):
    """Defining sum for J_n: pattern match plus explicit ball-emptiness."""
    pts = np.asarray(points, dtype=float)
    test = pts if all_points is None else np.asarray(all_points, dtype=float)
    adj = adjacency(pts, r)
    padj = pattern_adj(pattern)
    total = 0
    for subset in itertools.combinations(range(len(pts)), pattern.k):
        sub = adj[np.ix_(subset, subset)]
        if not graphs_isomorphic(sub, padj):
            continue
        subset_pts = pts[list(subset)]
        d2 = np.min(np.sum((test[:, None, :] - subset_pts[None, :, :]) ** 2,
                           axis=2), axis=1)
        inside = np.count_nonzero(d2 <= r * r)
        if inside == pattern.k:  # only the subset members themselves
            total += 1
    return total


def miniball_oracle(points):
    """Smallest enclosing ball radius by exhaustive support-set search.

    The optimal ball is determined by at most d+1 points on its boundary, so
    trying every midpoint and every circumcenter of <= d+1 points and keeping
    the smallest covering candidate is exact.
    """
    pts = np.asarray(points, dtype=float)
    m, d = pts.shape
    if m == 1:
        return 0.0
    best = math.inf
    for size in range(2, min(m, d + 1) + 1):
        for subset in itertools.combinations(range(m), size):
            sub = pts[list(subset)]
            if size == 2:
                center = sub.mean(axis=0)
            else:
                # circumcenter within the subset's affine hull
                mm = sub[1:] - sub[0]
                gram = mm @ mm.T
                if abs(np.linalg.det(gram)) < 1e-12:
                    continue  # affinely degenerate candidate
                alpha = np.linalg.solve(gram, 0.5 * np.diag(gram))
                center = sub[0] + alpha @ mm
            rr = np.linalg.norm(sub - center, axis=1)
            if np.max(np.abs(rr - rr[0])) > 1e-7:
                continue
            radius = float(rr.mean())
            covers = np.max(np.linalg.norm(pts - center, axis=1)) <= radius + 1e-9
            if covers and radius < best:
                best = radius
    return best


def brute_cech_faces(points, eps):
    pts = np.asarray(points, dtype=float)
    faces = set()
    for size in range(1, len(pts) + 1):
        for subset in itertools.combinations(range(len(pts)), size):
            if miniball_oracle(pts[list(subset)]) <= eps / 2.0 + 1e-9:
                faces.add(frozenset(subset))
    return faces


def brute_rips_faces(points, eps, max_dim):
    pts = np.asarray(points, dtype=float)
    adj = adjacency(pts, eps)
    faces = set()
    for size in range(1, max_dim + 2):
        for subset in itertools.combinations(range(len(pts)), size):
            if all(adj[a][b] for a, b in itertools.combinations(subset, 2)):
                faces.add(frozenset(subset))
    return faces


def dense_betti(complex_):
    """Betti numbers by dense GF(2) Gaussian elimination."""
    def rank_gf2(mat):
        m = mat.copy() % 2
        rank = 0
        rows, cols = m.shape
        row = 0
        for col in range(cols):
            piv = None
            for rr in range(row, rows):
                if m[rr, col]:
                    piv = rr
                    break
            if piv is None:
                continue
            m[[row, piv]] = m[[piv, row]]
            for rr in range(rows):
                if rr != row and m[rr, col]:
                    m[rr] ^= m[row]
            rank += 1
            row += 1
        return rank

    top = complex_.max_dim
    ranks = {}
    for d in range(1, top + 1):
        rows = {f: i for i, f in enumerate(complex_.faces.get(d - 1, ()))}
        cols = complex_.faces.get(d, ())
        mat = np.zeros((max(len(rows), 1), max(len(cols), 1)), dtype=np.int64)
        for j, f in enumerate(cols):
            for i in range(len(f)):
                mat[rows[f[:i] + f[i + 1:]], j] ^= 1
        ranks[d] = rank_gf2(mat) if cols else 0
    betti = []
    for k in range(top + 1):
        nk = complex_.face_count(k)
        betti.append(nk - ranks.get(k, 0) - ranks.get(k + 1, 0))
    return tuple(betti)


def circum_center_radius(points):
    """Circumcenter by solving the pairwise bisector system (least squares)."""
    pts = np.asarray(points, dtype=float)
    a = 2.0 * (pts[1:] - pts[0])
    b = np.sum(pts[1:] ** 2, axis=1) - np.sum(pts[0] ** 2)
    center, *_ = np.linalg.lstsq(a, b, rcond=None)
    res = np.linalg.norm(pts - center, axis=1)
    return center, float(res.mean()), float(res.max() - res.min())


def brute_critical_counts(points, r, max_index, test_points=None):
    """Exhaustive N_k: all subsets, explicit hull/emptiness scans."""
    from rgclab.errors import DegenerateGeometryError
    from rgclab.morse import circumsphere, in_open_convex_hull

    pts = np.asarray(points, dtype=float)
    test = pts if test_points is None else np.asarray(test_points, dtype=float)
    counts = [0] * (max_index + 1)
    counts[0] = len(pts)
    for k in range(1, max_index + 1):
        for subset in itertools.combinations(range(len(pts)), k + 1):
            sub = pts[list(subset)]
            try:
                center, radius = circumsphere(sub)
                if radius > r:
                    continue
                if not in_open_convex_hull(center, sub):
                    continue
            except DegenerateGeometryError:
                continue
            d2 = np.sum((test - center) ** 2, axis=1)
            if np.any(d2 < (radius - 1e-12) ** 2):
                continue
            counts[k] += 1
    return counts
