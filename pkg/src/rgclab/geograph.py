"""Geometric graphs and pattern counting (subgraphs G_n, components J_n).

Adjacency is the closed condition ||x - y|| <= r.  Patterns are small
connected graphs (k <= 8); counting is exact, with candidate generation
restricted by grid buckets and connected-subset enumeration.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import MarginError
from .pointproc import PointConfiguration

MAX_PATTERN_VERTICES = 8


@dataclass(frozen=True)
class GraphPattern:
    k: int
    edges: frozenset
    name: str = ""

    def __post_init__(self):
        if not (1 <= self.k <= MAX_PATTERN_VERTICES):
            raise ValueError(f"pattern size {self.k} outside 1..{MAX_PATTERN_VERTICES}")
        edges = frozenset((min(a, b), max(a, b)) for a, b in self.edges)
        object.__setattr__(self, "edges", edges)
        for a, b in edges:
            if a == b:
                raise ValueError("self-loop in pattern")
            if not (0 <= a < self.k and 0 <= b < self.k):
                raise ValueError("edge endpoint out of range")
        if not _connected(self.k, edges):
            raise ValueError("pattern must be connected")

    def degree_sequence(self) -> tuple:
        deg = [0] * self.k
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return tuple(sorted(deg))

    def adjacency_sets(self) -> list:
        adj = [set() for _ in range(self.k)]
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return adj


def _connected(k, edges) -> bool:
    if k == 1:
        return True
    adj = [[] for _ in range(k)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == k


def edge_pattern() -> GraphPattern:
    return GraphPattern(2, frozenset({(0, 1)}), "edge")


def path_pattern(k: int) -> GraphPattern:
    return GraphPattern(k, frozenset((i, i + 1) for i in range(k - 1)), f"path_{k}")


def clique_pattern(k: int) -> GraphPattern:
    edges = frozenset((i, j) for i in range(k) for j in range(i + 1, k))
    name = "triangle" if k == 3 else f"clique_{k}"
    return GraphPattern(k, edges, name)


def single_vertex_pattern() -> GraphPattern:
    return GraphPattern(1, frozenset(), "vertex")


# ---------------------------------------------------------------------------
# grid-bucketed geometric graph


class GeometricGraph:
    """Graph on a point array with closed-ball adjacency at radius r."""

    def __init__(self, points: np.ndarray, r: float):
        self.points = np.asarray(points, dtype=float)
        self.r = float(r)
        self.n = len(self.points)
        self.neighbors = _neighbor_lists(self.points, self.r)

    def degree(self, i) -> int:
        return len(self.neighbors[i])

    def edge_count(self) -> int:
        return sum(len(nb) for nb in self.neighbors) // 2

    def edges(self):
        for i, nb in enumerate(self.neighbors):
            for j in nb:
                if j > i:
                    yield (i, int(j))

    def adjacency_sets(self) -> list:
        return [set(map(int, nb)) for nb in self.neighbors]


def _grid_cells(points, cell):
    keys = np.floor(points / cell).astype(np.int64)
    buckets = {}
    for idx, key in enumerate(map(tuple, keys)):
        buckets.setdefault(key, []).append(idx)
    return buckets


def _neighbor_lists(points, r):
    n = len(points)
    nbrs = [[] for _ in range(n)]
    if n == 0 or r <= 0:
        return [np.array(nb, dtype=np.int64) for nb in nbrs]
    d = points.shape[1]
    buckets = _grid_cells(points, r)
    r2 = r * r
    offsets = list(itertools.product((-1, 0, 1), repeat=d))
    for key, members in buckets.items():
        members_arr = np.array(members)
        for off in offsets:
            other = buckets.get(tuple(k + o for k, o in zip(key, off)))
            if other is None:
                continue
            if other is members and off == (0,) * d:
                pts = points[members_arr]
                for a_pos in range(len(members_arr)):
                    i = members_arr[a_pos]
                    d2 = np.sum((pts[a_pos + 1:] - pts[a_pos]) ** 2, axis=1)
                    for b_pos in np.nonzero(d2 <= r2)[0]:
                        j = members_arr[a_pos + 1 + b_pos]
                        nbrs[i].append(j)
                        nbrs[j].append(i)
            elif tuple(off) > (0,) * d:
                other_arr = np.array(other)
                diff = points[members_arr][:, None, :] - points[other_arr][None, :, :]
                d2 = np.sum(diff * diff, axis=2)
                ii, jj = np.nonzero(d2 <= r2)
                for a_pos, b_pos in zip(ii, jj):
                    i, j = members_arr[a_pos], other_arr[b_pos]
                    nbrs[i].append(j)
                    nbrs[j].append(i)
    return [np.array(sorted(nb), dtype=np.int64) for nb in nbrs]


def build_graph(config: PointConfiguration, r: float,
                use_ambient: bool = False) -> GeometricGraph:
    """Geometric graph of a configuration at radius ``r``.

    Vertices are the window points unless ``use_ambient``; ambient use
    requires ``ambient_margin >= r``.
    """
    if r <= 0:
        raise ValueError("radius must be positive")
    if use_ambient:
        if config.ambient_margin + 1e-12 < r:
            raise MarginError(
                f"ambient graph needs margin >= r, got {config.ambient_margin} < {r}")
        pts = config.points
    else:
        pts = config.window_points()
    return GeometricGraph(pts, r)


# ---------------------------------------------------------------------------
# isomorphism and counting


def _adjacency_from_points(points, r):
    pts = np.asarray(points, dtype=float)
    k = len(pts)
    diff = pts[:, None, :] - pts[None, :, :]
    d2 = np.sum(diff * diff, axis=2)
    adj = d2 <= r * r
    np.fill_diagonal(adj, False)
    return [set(np.nonzero(adj[i])[0].tolist()) for i in range(k)]


def _iso_adjacency(adj_a, adj_b) -> bool:
    """Induced isomorphism test between two small graphs given as adjacency sets."""
    k = len(adj_a)
    if len(adj_b) != k:
        return False
    deg_a = sorted(len(s) for s in adj_a)
    deg_b = sorted(len(s) for s in adj_b)
    if deg_a != deg_b:
        return False
    mapping = [-1] * k
    used = [False] * k

    def backtrack(i):
        if i == k:
            return True
        for cand in range(k):
            if used[cand] or len(adj_b[cand]) != len(adj_a[i]):
                continue
            ok = True
            for j in range(i):
                if (j in adj_a[i]) != (mapping[j] in adj_b[cand]):
                    ok = False
                    break
            if ok:
                mapping[i] = cand
                used[cand] = True
                if backtrack(i + 1):
                    return True
                used[cand] = False
                mapping[i] = -1
        return False

    return backtrack(0)


def pattern_indicator(points, r: float, pattern: GraphPattern) -> int:
    """1 iff the geometric graph on ``points`` at radius ``r`` is isomorphic
    to ``pattern`` (induced sense)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if len(pts) != pattern.k:
        raise ValueError(f"need exactly {pattern.k} points")
    if pattern.k == 1:
        return 1
    return int(_iso_adjacency(_adjacency_from_points(pts, r),
                              pattern.adjacency_sets()))


def _induced_adjacency(graph_adj, subset):
    local = {v: i for i, v in enumerate(subset)}
    return [set(local[w] for w in graph_adj[v] if w in local) for v in subset]


def connected_subsets(graph: GeometricGraph, k: int):
    """Enumerate each connected induced k-subset of the graph exactly once (ESU)."""
    adj = graph.adjacency_sets()
    n = graph.n
    if k == 1:
        for v in range(n):
            yield (v,)
        return

    def extend(sub, extension, v):
        if len(sub) == k:
            yield tuple(sorted(sub))
            return
        ext = list(extension)
        while ext:
            w = ext.pop()
            new_ext = set(ext)
            exclusive = adj[w] - sub - _neighborhood(adj, sub)
            new_ext.update(u for u in exclusive if u > v)
            yield from extend(sub | {w}, new_ext, v)

    for v in range(n):
        yield from extend({v}, {u for u in adj[v] if u > v}, v)


def _neighborhood(adj, sub):
    out = set()
    for s in sub:
        out |= adj[s]
    return out


def count_subgraphs(config: PointConfiguration, r: float,
                    pattern: GraphPattern, use_ambient: bool = False) -> int:
    """Number of (unordered) k-subsets whose induced geometric graph is
    isomorphic to ``pattern``: the statistic G_n."""
    graph = build_graph(config, r, use_ambient)
    return count_subgraphs_in_graph(graph, pattern)


def count_subgraphs_in_graph(graph: GeometricGraph, pattern: GraphPattern) -> int:
    if pattern.k == 1:
        return graph.n
    adj = graph.adjacency_sets()
    padj = pattern.adjacency_sets()
    total = 0
    for subset in connected_subsets(graph, pattern.k):
        if _iso_adjacency(_induced_adjacency(adj, subset), padj):
            total += 1
    return total


def connected_components(graph: GeometricGraph) -> list:
    """Partition of the vertex set into components (union-find)."""
    parent = list(range(graph.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, nb in enumerate(graph.neighbors):
        for j in nb:
            ri, rj = find(i), find(int(j))
            if ri != rj:
                parent[ri] = rj
    comps = {}
    for v in range(graph.n):
        comps.setdefault(find(v), []).append(v)
    return sorted(comps.values())


def count_components(config: PointConfiguration, r: float,
                     pattern: GraphPattern, mode: str = "interior") -> int:
    """Number of pattern-components: J_n (interior mode) or its
    boundary-corrected version (ambient mode).

    A counted k-subset matches ``pattern`` and has no other point (of the
    window in interior mode, of the full ambient configuration in ambient
    mode) within distance r of any member.
    """
    if mode not in ("interior", "ambient"):
        raise ValueError("mode must be 'interior' or 'ambient'")
    if mode == "ambient" and config.ambient_margin + 1e-12 < r:
        raise MarginError(
            f"ambient counting needs margin >= r, got {config.ambient_margin}")
    graph = build_graph(config, r, use_ambient=(mode == "ambient"))
    in_window = (config.window_mask if mode == "ambient"
                 else np.ones(graph.n, dtype=bool))
    padj = pattern.adjacency_sets()
    adj = graph.adjacency_sets()
    total = 0
    for comp in connected_components(graph):
        if len(comp) != pattern.k:
            continue
        if not all(in_window[v] for v in comp):
            continue
        if _iso_adjacency(_induced_adjacency(adj, comp), padj):
            total += 1
    return total


# ---------------------------------------------------------------------------
# non-induced subgraph copies (used by the Betti sandwich upper bound)


def automorphism_count(pattern: GraphPattern) -> int:
    # an edge-preserving bijection maps the edge set onto itself, so it is an
    # automorphism; k <= 8 keeps brute force cheap
    count = 0
    for perm in itertools.permutations(range(pattern.k)):
        if all((min(perm[a], perm[b]), max(perm[a], perm[b])) in pattern.edges
               for a, b in pattern.edges):
            count += 1
    return count


def count_subgraph_copies(graph: GeometricGraph, pattern: GraphPattern) -> int:
    """Number of (not necessarily induced) subgraphs of ``graph`` isomorphic
    to ``pattern``: injective edge-preserving embeddings over Aut(pattern)."""
    padj = pattern.adjacency_sets()
    order = _connect_order(pattern)
    adj = graph.adjacency_sets()
    total = 0
    mapping = {}

    def backtrack(pos):
        nonlocal total
        if pos == len(order):
            total += 1
            return
        v = order[pos]
        prev = [u for u in padj[v] if u in mapping]
        if prev:
            cands = set(adj[mapping[prev[0]]])
            for u in prev[1:]:
                cands &= adj[mapping[u]]
        else:
            cands = set(range(graph.n))
        used = set(mapping.values())
        for c in cands:
            if c in used or len(adj[c]) < len(padj[v]):
                continue
            mapping[v] = c
            backtrack(pos + 1)
            del mapping[v]

    backtrack(0)
    aut = automorphism_count(pattern)
    assert total % aut == 0
    return total // aut


def _connect_order(pattern: GraphPattern) -> list:
    adj = pattern.adjacency_sets()
    order = [0]
    seen = {0}
    while len(order) < pattern.k:
        nxt = next(v for v in range(pattern.k)
                   if v not in seen and adj[v] & seen)
        order.append(nxt)
        seen.add(nxt)
    return order


# ---------------------------------------------------------------------------
# pattern catalog (structured text file)


def load_pattern_catalog():
    """Named patterns from the packaged catalog file.

    One entry per line: ``name;kind;k;edge-list``; complex entries are built
    by the generators in :mod:`rgclab.complexes`.
    """
    from . import complexes

    text = resources.files("rgclab").joinpath("data/patterns.txt").read_text()
    catalog = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        name, kind, k, edge_text = [part.strip() for part in line.split(";")]
        k = int(k)
        edges = frozenset()
        if edge_text:
            edges = frozenset(tuple(sorted(map(int, e.split("-"))))
                              for e in edge_text.split(","))
        if kind == "graph":
            catalog[name] = GraphPattern(k, edges, name)
        elif kind == "empty_simplex":
            catalog[name] = complexes.pattern_generators("empty_simplex", k)
        else:
            raise ValueError(f"unknown catalog kind {kind!r}")
    return catalog
