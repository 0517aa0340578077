"""Cech and Vietoris-Rips complexes, filtrations, and subcomplex counting.

Conventions: the complex parameter eps is a ball *diameter* — Rips joins
points at distance <= eps, a Cech face needs its smallest enclosing ball to
have radius <= eps/2.  Vertices are indices into the configuration's window
points.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import MarginError
from .geograph import GeometricGraph, GraphPattern, connected_subsets
from .pointproc import PointConfiguration
from .records import fmt

MINIBALL_TOL = 1e-9


# ---------------------------------------------------------------------------
# smallest enclosing ball (Welzl)


def _ball_of_boundary(boundary):
    if not boundary:
        return None, -1.0
    pts = np.asarray(boundary, dtype=float)
    if len(pts) == 1:
        return pts[0], 0.0
    p0 = pts[0]
    m = pts[1:] - p0
    gram = m @ m.T
    rhs = 0.5 * np.einsum("ij,ij->i", m, m)
    try:
        alpha = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        alpha = np.linalg.lstsq(gram, rhs, rcond=None)[0]
    center = p0 + alpha @ m
    radius = float(np.linalg.norm(center - p0))
    return center, radius


def miniball(points, tol: float = MINIBALL_TOL):
    """Smallest enclosing ball of a small point set: (center, radius).

    Welzl recursion with a deterministic shuffle; handles degenerate
    (collinear, duplicated) inputs.
    """
    pts = [np.asarray(p, dtype=float) for p in np.atleast_2d(points)]
    if not pts:
        raise ValueError("miniball of empty set")
    order = list(np.random.default_rng(12345).permutation(len(pts)))

    def welzl(idx, boundary):
        if not idx or len(boundary) == len(pts[0]) + 1:
            return _ball_of_boundary(boundary)
        head, rest = idx[0], idx[1:]
        center, radius = welzl(rest, boundary)
        if center is not None:
            d = float(np.linalg.norm(pts[head] - center))
            if d <= radius + tol:
                return center, radius
        return welzl(rest, boundary + [pts[head]])

    center, radius = welzl(order, [])
    return center, radius


def cech_birth(points) -> float:
    """Birth parameter of a face in the Cech filtration: twice the miniball radius."""
    if len(points) == 1:
        return 0.0
    return 2.0 * miniball(points)[1]


# ---------------------------------------------------------------------------
# complexes


@dataclass
class SimplicialComplex:
    """Faces per dimension; each face a strictly increasing vertex tuple."""

    faces: dict
    n_vertices: int

    @classmethod
    def from_faces(cls, faces, n_vertices) -> "SimplicialComplex":
        by_dim = {}
        for f in faces:
            f = tuple(sorted(f))
            by_dim.setdefault(len(f) - 1, set()).add(f)
        return cls({d: sorted(s) for d, s in sorted(by_dim.items())},
                   n_vertices)

    @property
    def max_dim(self) -> int:
        return max(self.faces) if self.faces else -1

    def face_count(self, dim: int) -> int:
        return len(self.faces.get(dim, ()))

    def all_faces(self):
        for d in sorted(self.faces):
            yield from self.faces[d]

    def face_set(self) -> frozenset:
        return frozenset(frozenset(f) for f in self.all_faces())

    def validate(self) -> None:
        """Raise if a face is malformed or downward closure fails."""
        seen = set()
        for d in self.faces:
            for f in self.faces[d]:
                if len(f) != d + 1 or list(f) != sorted(set(f)):
                    raise ValueError(f"malformed face {f} in dimension {d}")
                seen.add(f)
        for d in self.faces:
            if d == 0:
                continue
            for f in self.faces[d]:
                for i in range(len(f)):
                    sub = f[:i] + f[i + 1:]
                    if sub not in seen:
                        raise ValueError(f"closure violation: {f} lacks {sub}")

    def write(self, path, birth: float = 0.0) -> None:
        rows = [(birth, d, f) for d in sorted(self.faces) for f in self.faces[d]]
        _write_face_rows(path, rows)


def _write_face_rows(path, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        for birth, d, f in sorted(rows, key=lambda r: (r[0], r[1], r[2])):
            fh.write(f"{d};{','.join(map(str, f))};{fmt(float(birth))}\n")


@dataclass
class Filtration:
    """Simplices with birth values, sortable into a valid filtration order."""

    entries: list  # (birth, dim, vertex tuple)
    n_vertices: int
    eps_max: float
    kind: str = "rips"

    def __post_init__(self):
        self.entries = sorted(self.entries, key=lambda e: (e[0], e[1], e[2]))

    def ordered(self):
        return self.entries

    def validate_monotone(self) -> None:
        births = {e[2]: e[0] for e in self.entries}
        for birth, dim, f in self.entries:
            if dim == 0:
                continue
            for i in range(len(f)):
                sub = f[:i] + f[i + 1:]
                if sub not in births:
                    raise ValueError(f"face {f} present without facet {sub}")
                if births[sub] > birth + 1e-12:
                    raise ValueError(
                        f"non-monotone filtration: {sub} born {births[sub]} "
                        f"after coface {f} born {birth}")

    def slice_at(self, eps: float) -> SimplicialComplex:
        """Complex of all simplices with birth <= eps (closed convention)."""
        return SimplicialComplex.from_faces(
            (f for birth, _, f in self.entries if birth <= eps),
            self.n_vertices)

    def write(self, path) -> None:
        _write_face_rows(path, self.entries)


def read_filtration(path) -> Filtration:
    entries = []
    n_vertices = 0
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        dim_s, verts_s, birth_s = line.split(";")
        f = tuple(int(v) for v in verts_s.split(","))
        entries.append((float(birth_s), int(dim_s), f))
        n_vertices = max(n_vertices, max(f) + 1)
    return Filtration(entries, n_vertices, max((e[0] for e in entries),
                                               default=0.0))


# ---------------------------------------------------------------------------
# construction


def _clique_expand(graph: GeometricGraph, max_dim: int, face_cb):
    """DFS clique expansion over sorted neighbor lists.

    ``face_cb(face) -> bool`` records the face and decides whether to expand
    further (pruning is sound whenever the face predicate is monotone).
    """
    adj = [set(map(int, nb)) for nb in graph.neighbors]

    def expand(face, cands):
        if len(face) > max_dim:
            return
        for v in sorted(cands):
            new_face = face + (v,)
            if face_cb(new_face):
                expand(new_face, cands & {u for u in adj[v] if u > v})

    for v in range(graph.n):
        if face_cb((v,)):
            expand((v,), {u for u in adj[v] if u > v})


def build_rips(config: PointConfiguration, eps: float,
               max_dim: int) -> SimplicialComplex:
    """Vietoris-Rips complex: clique complex of the eps-graph, truncated."""
    graph = GeometricGraph(config.window_points(), eps)
    return rips_from_graph(graph, max_dim)


def rips_from_graph(graph: GeometricGraph, max_dim: int) -> SimplicialComplex:
    faces = []
    _clique_expand(graph, max_dim, lambda f: faces.append(f) or True)
    return SimplicialComplex.from_faces(faces, graph.n)


def build_cech(config: PointConfiguration, eps: float,
               max_dim: int) -> SimplicialComplex:
    """Cech complex: faces are subsets with miniball radius <= eps/2."""
    pts = config.window_points()
    return cech_on_points(pts, eps, max_dim)


def cech_on_points(pts, eps: float, max_dim: int) -> SimplicialComplex:
    graph = GeometricGraph(np.asarray(pts, dtype=float), eps)
    faces = []
    threshold = eps / 2.0 + MINIBALL_TOL

    def cb(face):
        if len(face) <= 2:
            faces.append(face)
            return True
        if miniball(graph.points[list(face)])[1] <= threshold:
            faces.append(face)
            return True
        return False

    _clique_expand(graph, max_dim, cb)
    return SimplicialComplex.from_faces(faces, graph.n)


def rips_filtration(config: PointConfiguration, max_dim: int,
                    eps_max: float) -> Filtration:
    """Rips filtration up to eps_max; birth of a face is its diameter."""
    if eps_max <= 0:
        raise ValueError("eps_max must be positive")
    pts = config.window_points()
    graph = GeometricGraph(pts, eps_max)
    entries = []
    birth_of = {}

    def cb(face):
        if len(face) == 1:
            birth = 0.0
        else:
            v = face[-1]
            prev = face[:-1]
            step = max(float(np.linalg.norm(pts[u] - pts[v])) for u in prev)
            birth = max(birth_of[prev], step)
        birth_of[face] = birth
        entries.append((birth, len(face) - 1, face))
        return True

    _clique_expand(graph, max_dim, cb)
    return Filtration(entries, graph.n, eps_max, "rips")


def cech_filtration(config: PointConfiguration, max_dim: int,
                    eps_max: float) -> Filtration:
    """Cech filtration up to eps_max; birth = 2 x miniball radius."""
    if eps_max <= 0:
        raise ValueError("eps_max must be positive")
    pts = config.window_points()
    graph = GeometricGraph(pts, eps_max)
    entries = []
    birth_of = {}

    def cb(face):
        if len(face) == 1:
            birth = 0.0
        elif len(face) == 2:
            birth = float(np.linalg.norm(pts[face[0]] - pts[face[1]]))
        else:
            birth = cech_birth(pts[list(face)])
        if len(face) > 1:
            # clamp tiny solver wiggles so the filtration stays monotone
            for i in range(len(face)):
                sub = face[:i] + face[i + 1:]
                birth = max(birth, birth_of.get(sub, 0.0))
        if birth > eps_max:
            return False
        birth_of[face] = birth
        entries.append((birth, len(face) - 1, face))
        return True

    _clique_expand(graph, max_dim, cb)
    return Filtration(entries, graph.n, eps_max, "cech")


# ---------------------------------------------------------------------------
# complex patterns and counting


@dataclass(frozen=True)
class ComplexPattern:
    """Small abstract complex used as a counting template (connected 1-skeleton)."""

    k: int
    faces: frozenset  # frozenset of frozensets, downward closed, incl. vertices
    name: str = ""

    @classmethod
    def from_faces(cls, k, faces, name="") -> "ComplexPattern":
        closed = set()
        for f in faces:
            f = frozenset(f)
            closed.add(f)
        for v in range(k):
            closed.add(frozenset([v]))
        # downward closure
        stack = list(closed)
        while stack:
            f = stack.pop()
            if len(f) <= 1:
                continue
            for v in f:
                sub = f - {v}
                if sub not in closed:
                    closed.add(sub)
                    stack.append(sub)
        return cls(k, frozenset(closed), name)

    def __post_init__(self):
        for f in self.faces:
            if not f or not all(0 <= v < self.k for v in f):
                raise ValueError("face vertex out of range")
        edges = frozenset(tuple(sorted(f)) for f in self.faces if len(f) == 2)
        from .geograph import _connected
        if not _connected(self.k, edges):
            raise ValueError("pattern 1-skeleton must be connected")

    def skeleton(self) -> GraphPattern:
        edges = frozenset(tuple(sorted(f)) for f in self.faces if len(f) == 2)
        return GraphPattern(self.k, edges, self.name + ":skel")

    def dim_counts(self) -> tuple:
        counts = {}
        for f in self.faces:
            counts[len(f) - 1] = counts.get(len(f) - 1, 0) + 1
        return tuple(counts.get(d, 0) for d in range(self.k))


def simplicial_isomorphic(faces_a, k_a, faces_b, k_b) -> bool:
    """Simplicial isomorphism between two complexes given as face sets."""
    if k_a != k_b:
        return False
    ca = sorted(len(f) for f in faces_a)
    cb = sorted(len(f) for f in faces_b)
    if ca != cb:
        return False
    adj_a = [set() for _ in range(k_a)]
    adj_b = [set() for _ in range(k_a)]
    for faces, adj in ((faces_a, adj_a), (faces_b, adj_b)):
        for f in faces:
            if len(f) == 2:
                u, v = tuple(f)
                adj[u].add(v)
                adj[v].add(u)
    mapping = [-1] * k_a
    used = [False] * k_a

    def full_check():
        return all(frozenset(mapping[v] for v in f) in faces_b for f in faces_a)

    def backtrack(i):
        if i == k_a:
            return full_check()
        for cand in range(k_a):
            if used[cand] or len(adj_b[cand]) != len(adj_a[i]):
                continue
            if any((j in adj_a[i]) != (mapping[j] in adj_b[cand])
                   for j in range(i)):
                continue
            mapping[i] = cand
            used[cand] = True
            if backtrack(i + 1):
                return True
            used[cand] = False
            mapping[i] = -1
        return False

    return backtrack(0)


def induced_cech_faces(pts, eps: float) -> frozenset:
    """Face set of the Cech complex on a small point set (all dimensions)."""
    comp = cech_on_points(pts, eps, max_dim=len(pts) - 1)
    return comp.face_set()


def count_subcomplexes(config: PointConfiguration, eps: float,
                       pattern: ComplexPattern, isolated: bool = False,
                       mode: str = "interior") -> int:
    """Induced-subcomplex count of the Cech complex at eps.

    Counts k-subsets of window points whose induced Cech complex is
    simplicially isomorphic to ``pattern``; with ``isolated`` additionally no
    other point within eps of the subset (window points in interior mode, the
    full ambient configuration in ambient mode).
    """
    if pattern.k > 8:
        raise ValueError("pattern cap: k <= 8")
    if mode not in ("interior", "ambient"):
        raise ValueError("mode must be 'interior' or 'ambient'")
    if mode == "ambient" and config.ambient_margin + 1e-12 < eps:
        raise MarginError("ambient subcomplex counting needs margin >= eps")
    pts = config.window_points()
    graph = GeometricGraph(pts, eps)
    adj = graph.adjacency_sets()
    ambient = config.ambient_points() if mode == "ambient" else None
    target = pattern.faces
    total = 0
    for subset in connected_subsets(graph, pattern.k):
        if isolated:
            closure = set(subset)
            for v in subset:
                closure |= adj[v]
            if closure != set(subset):
                continue
            if ambient is not None and len(ambient) and _ambient_hit(
                    ambient, pts[list(subset)], eps):
                continue
        faces = induced_cech_faces(pts[list(subset)], eps)
        if simplicial_isomorphic(faces, pattern.k, target, pattern.k):
            total += 1
    return total


def _ambient_hit(ambient_pts, subset_pts, eps) -> bool:
    d2 = np.sum((ambient_pts[:, None, :] - subset_pts[None, :, :]) ** 2, axis=2)
    return bool(np.any(d2 <= eps * eps))


# ---------------------------------------------------------------------------
# pattern generators


def pattern_generators(kind: str, k: int):
    """Exact combinatorial templates used by the Betti sandwich bounds.

    - ``cross_polytope_skeleton``: O_k, the complete graph on 2k+2 vertices
      minus a perfect matching of antipodal pairs.
    - ``empty_simplex``: all (k-1)-subsets of k vertices are faces, the full
      set is not.
    - ``empty_simplex_edge`` / ``empty_simplex_path``: an empty simplex with
      one extra vertex attached by a single edge, respectively by a length-2
      path through the new vertex.
    """
    if kind == "cross_polytope_skeleton":
        nv = 2 * k + 2
        if not (1 <= k and nv <= 8):
            raise ValueError("cross-polytope cap: 2k+2 <= 8")
        anti = {(2 * i, 2 * i + 1) for i in range(k + 1)}
        edges = frozenset((i, j) for i in range(nv) for j in range(i + 1, nv)
                          if (i, j) not in anti)
        return GraphPattern(nv, edges, f"cross_polytope_{k}")
    if kind == "empty_simplex":
        if not (3 <= k <= 8):
            raise ValueError("empty simplex needs 3 <= k <= 8")
        faces = [frozenset(c) for c in _proper_subsets(range(k), k - 1)]
        return ComplexPattern.from_faces(k, faces, f"empty_simplex_{k}")
    if kind in ("empty_simplex_edge", "empty_simplex_path"):
        if not (3 <= k <= 7):
            raise ValueError("attachment cap: k <= 7")
        base = [frozenset(c) for c in _proper_subsets(range(k), k - 1)]
        if kind == "empty_simplex_edge":
            base.append(frozenset([0, k]))
            name = f"empty_simplex_edge_{k}"
        else:
            base.append(frozenset([0, k]))
            base.append(frozenset([1, k]))
            name = f"empty_simplex_path_{k}"
        return ComplexPattern.from_faces(k + 1, base, name)
    raise ValueError(f"unknown generator kind {kind!r}")


def _proper_subsets(vertices, max_size):
    import itertools
    verts = list(vertices)
    for size in range(1, max_size + 1):
        yield from itertools.combinations(verts, size)
