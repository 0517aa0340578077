"""Betti numbers, Euler characteristic, persistence over Z2, and the
component/subcomplex sandwich bounds on Betti numbers.

Columns of boundary matrices are Python integers used as bitsets; XOR is the
Z2 column operation.  Correctness is defined by the dense elimination oracle
in the test suite; the sparse/clearing path here is a performance choice.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import complexes as cx
from . import geograph as gg
from .pointproc import PointConfiguration
from .records import fmt

INF = math.inf


@dataclass
class BettiVector:
    betti: tuple
    eps: float | None = None
    kind: str | None = None

    def __getitem__(self, k: int) -> int:
        return self.betti[k] if k < len(self.betti) else 0

    def alternating_sum(self) -> int:
        return sum((-1) ** k * b for k, b in enumerate(self.betti))


@dataclass
class Barcode:
    """Persistence intervals (dimension, birth, death), death in (birth, inf]."""

    bars: list
    provenance: str = ""

    def in_dimension(self, dim: int):
        return [(b, d) for (dd, b, d) in self.bars if dd == dim]

    def essential_count(self, dim: int) -> int:
        return sum(1 for (dd, _, d) in self.bars if dd == dim and d == INF)


def _rank_z2(columns) -> int:
    pivots = {}
    rank = 0
    for col in columns:
        while col:
            p = col.bit_length() - 1
            other = pivots.get(p)
            if other is None:
                pivots[p] = col
                rank += 1
                break
            col ^= other
    return rank


def _boundary_columns(complex_: cx.SimplicialComplex, dim: int):
    rows = {f: i for i, f in enumerate(complex_.faces.get(dim - 1, ()))}
    cols = []
    for f in complex_.faces.get(dim, ()):
        col = 0
        for i in range(len(f)):
            col ^= 1 << rows[f[:i] + f[i + 1:]]
        cols.append(col)
    return cols


def betti_numbers(complex_: cx.SimplicialComplex, eps: float | None = None,
                  kind: str | None = None) -> BettiVector:
    """Betti vector over Z2: beta_k = dim ker d_k - rank d_{k+1}."""
    complex_.validate()
    top = complex_.max_dim
    ranks = {d: _rank_z2(_boundary_columns(complex_, d))
             for d in range(1, top + 1)}
    betti = []
    for k in range(top + 1):
        nk = complex_.face_count(k)
        betti.append(nk - ranks.get(k, 0) - ranks.get(k + 1, 0))
    if not betti:
        betti = [0]
    return BettiVector(tuple(betti), eps, kind)


def euler_characteristic(complex_: cx.SimplicialComplex) -> int:
    """Alternating sum of face counts (equals the alternating Betti sum)."""
    return sum((-1) ** d * complex_.face_count(d) for d in complex_.faces)


def persistence(filtration: cx.Filtration) -> Barcode:
    """Barcode of a monotone filtration by boundary-matrix column reduction.

    Processes dimensions top-down with clearing: a simplex used as a pivot
    row never starts a bar, so its column is skipped.
    """
    filtration.validate_monotone()
    entries = filtration.ordered()
    index = {f: i for i, (_, _, f) in enumerate(entries)}
    births = [e[0] for e in entries]
    dims = [e[1] for e in entries]
    max_dim = max(dims, default=0)
    by_dim = {}
    for i, (_, d, f) in enumerate(entries):
        by_dim.setdefault(d, []).append((i, f))
    bars = []
    paired = set()
    cleared = set()
    for d in range(max_dim, 0, -1):
        pivots = {}
        for i, f in by_dim.get(d, ()):
            if i in cleared:
                continue
            col = 0
            for j in range(len(f)):
                col ^= 1 << index[f[:j] + f[j + 1:]]
            while col:
                p = col.bit_length() - 1
                other = pivots.get(p)
                if other is None:
                    pivots[p] = col
                    paired.add(p)
                    paired.add(i)
                    cleared.add(p)
                    if births[i] > births[p]:
                        bars.append((d - 1, births[p], births[i]))
                    break
                col ^= other
    for i, (_, d, f) in enumerate(entries):
        if i not in paired:
            bars.append((d, births[i], INF))
    bars.sort(key=lambda b: (b[0], b[1], b[2]))
    return Barcode(bars, provenance=filtration.kind)


def betti_from_barcode(barcode: Barcode, eps: float) -> BettiVector:
    """Count bars active at eps: birth <= eps < death (closed-left)."""
    top = max((d for d, _, _ in barcode.bars), default=0)
    counts = [0] * (top + 1)
    for d, birth, death in barcode.bars:
        if birth <= eps < death:
            counts[d] += 1
    return BettiVector(tuple(counts), eps, barcode.provenance)


def write_barcode_csv(path, barcode: Barcode) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["dim", "birth", "death"])
        for d, birth, death in barcode.bars:
            w.writerow([d, fmt(float(birth)),
                        "inf" if death == INF else fmt(float(death))])


def barcode_svg(barcode: Barcode, path, eps_max: float | None = None,
                title: str = "") -> None:
    """Horizontal bars grouped by dimension, birth-sorted."""
    finite = [d for _, _, d in barcode.bars if d != INF]
    if eps_max is None:
        eps_max = max(finite, default=1.0) * 1.05 or 1.0
    width, row_h, left, top = 640.0, 6.0, 60.0, 28.0
    groups = sorted({d for d, _, _ in barcode.bars})
    lines = []
    y = top
    sx = (width - left - 20.0) / eps_max

    def esc(s):
        return s.replace("&", "&amp;").replace("<", "&lt;")

    lines.append(f'<text x="8" y="16" font-size="13">{esc(title)}</text>')
    for dim in groups:
        lines.append(f'<text x="8" y="{y + 10:.1f}" font-size="11">H{dim}</text>')
        for birth, death in sorted(barcode.in_dimension(dim)):
            x0 = left + birth * sx
            x1 = left + min(death, eps_max) * sx
            color = "#d62728" if death == INF else "#1f77b4"
            lines.append(f'<line x1="{x0:.2f}" y1="{y:.1f}" x2="{x1:.2f}" '
                         f'y2="{y:.1f}" stroke="{color}" stroke-width="3"/>')
            y += row_h
        y += 2 * row_h
    height = y + 10
    svg = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
           f'height="{height:.0f}">\n' + "\n".join(lines) + "\n</svg>\n")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(svg)


# ---------------------------------------------------------------------------
# sandwich bounds


# minimal connected graphs on 5 vertices extending an edge: the three trees
_VR_TREES_K1 = (
    gg.path_pattern(5),
    gg.GraphPattern(5, frozenset({(0, 1), (0, 2), (0, 3), (0, 4)}), "star_5"),
    gg.GraphPattern(5, frozenset({(0, 1), (1, 2), (1, 3), (3, 4)}), "chair_5"),
)


@dataclass
class SandwichReport:
    kind: str
    k: int
    lower: int
    betti: int
    upper: int
    terms: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.lower <= self.betti <= self.upper


def check_sandwich(config: PointConfiguration, eps: float, kind: str,
                   k: int = 1) -> SandwichReport:
    """Evaluate the Betti sandwich at parameter eps.

    Rips (k = 1 only): components isomorphic to the cross-polytope skeleton
    bound beta_k below; adding non-induced copies of the minimal 5-vertex
    trees bounds it above.  Cech (k in 0..d-1): isolated empty simplices
    below; empty simplices with an attached vertex above.
    """
    if kind == "rips":
        if k != 1:
            raise ValueError("Rips sandwich implemented for k = 1 (O_1 cap)")
        ok = cx.pattern_generators("cross_polytope_skeleton", k)
        j = gg.count_components(config, eps, ok, mode="interior")
        comp = cx.build_rips(config, eps, max_dim=k + 1)
        beta = betti_numbers(comp, eps, "rips")[k]
        graph = gg.GeometricGraph(config.window_points(), eps)
        slack = sum(gg.count_subgraph_copies(graph, t) for t in _VR_TREES_K1)
        return SandwichReport("rips", k, j, beta, j + slack,
                              {"J(O_k)": j, "tree_copies": slack})
    if kind == "cech":
        d = config.window.d
        if not (0 <= k <= d - 1 and k + 3 <= 8):
            raise ValueError("Cech sandwich cap exceeded")
        empty = cx.pattern_generators("empty_simplex", k + 2)
        lower = cx.count_subcomplexes(config, eps, empty, isolated=True)
        comp = cx.build_cech(config, eps, max_dim=k + 1)
        beta = betti_numbers(comp, eps, "cech")[k]
        att_edge = cx.pattern_generators("empty_simplex_edge", k + 2)
        att_path = cx.pattern_generators("empty_simplex_path", k + 2)
        c1 = cx.count_subcomplexes(config, eps, att_edge)
        c2 = cx.count_subcomplexes(config, eps, att_path)
        return SandwichReport("cech", k, lower, beta, lower + c1 + c2,
                              {"C*(empty)": lower, "C(edge)": c1,
                               "C(path)": c2})
    raise ValueError("kind must be 'rips' or 'cech'")
