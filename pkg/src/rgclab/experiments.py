"""Monte Carlo harness: drives samplers and statistics across radius regimes
and writes the estimate records (CSV) and diagnostic SVGs.

A plan pins model, regime, radius rule, n grid, statistics, replicate budget
and master seed; identical plans with identical seeds produce bit-identical
outputs regardless of the thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import complexes as cx
from . import geograph as gg
from . import homology as hm
from . import morse
from .errors import (AcceptanceStarvationError, DegenerateGeometryError,
                     MarginError)
from .pointproc import ModelSpec, Window, sample, _derived_seed
from .records import EstimateRecord, write_estimates_csv, fmt

EXCLUDED_REPLICATE_CAP = 0.05


@dataclass(frozen=True)
class StatSpec:
    """One statistic to evaluate per replicate.

    kind: G | J | Jt | C | Cstar | betti_rips | betti_cech | N | chi | coverage
    """

    kind: str
    pattern: object | None = None
    k: int = 0
    max_dim: int = 2

    def label(self) -> str:
        if self.pattern is not None:
            return f"{self.kind}[{self.pattern.name}]"
        if self.kind in ("betti_rips", "betti_cech", "N"):
            return f"{self.kind}[{self.k}]"
        return self.kind

    def needs_ambient(self) -> bool:
        return self.kind in ("Jt",)

    def margin_factor(self) -> float:
        if self.kind == "Jt":
            return float(self.pattern.k + 1)
        return 0.0


@dataclass
class ExperimentPlan:
    model: ModelSpec
    regime: str  # sparse | thermodynamic | connectivity
    radius_rule: dict
    n_grid: list
    statistics: list
    replicates: int
    seed: int
    d: int = 2
    out_dir: str | None = None
    threads: int = 1

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.regime not in ("sparse", "thermodynamic", "connectivity"):
            raise ValueError(f"unknown regime {self.regime!r}")
        kind = self.radius_rule.get("kind")
        compatible = {"sparse": ("power", "explicit"),
                      "thermodynamic": ("beta", "explicit"),
                      "connectivity": ("log", "explicit")}
        if kind not in compatible[self.regime]:
            raise ValueError(
                f"radius rule {kind!r} inconsistent with regime {self.regime!r}")
        for stat in self.statistics:
            if stat.pattern is not None and stat.pattern.k > 8:
                raise ValueError("pattern cap exceeded")

    def radius_for(self, n: float, index: int) -> float:
        rule = self.radius_rule
        kind = rule["kind"]
        if kind == "explicit":
            return float(rule["values"][index])
        if kind == "power":
            return float(rule["c"]) * float(n) ** (-float(rule["a"]))
        if kind == "beta":
            return float(rule["beta"]) ** (1.0 / self.d)
        if kind == "log":
            return float(rule["c"]) * math.log(float(n)) ** float(rule["p"])
        raise ValueError(f"unknown radius rule {kind!r}")


def _evaluate(stat: StatSpec, config, r: float) -> float:
    if stat.kind == "G":
        return float(gg.count_subgraphs(config, r, stat.pattern))
    if stat.kind == "J":
        return float(gg.count_components(config, r, stat.pattern, "interior"))
    if stat.kind == "Jt":
        return float(gg.count_components(config, r, stat.pattern, "ambient"))
    if stat.kind == "C":
        return float(cx.count_subcomplexes(config, r, stat.pattern))
    if stat.kind == "Cstar":
        return float(cx.count_subcomplexes(config, r, stat.pattern,
                                           isolated=True))
    if stat.kind == "betti_rips":
        comp = cx.build_rips(config, r, max_dim=stat.k + 1)
        return float(hm.betti_numbers(comp, r, "rips")[stat.k])
    if stat.kind == "betti_cech":
        comp = cx.build_cech(config, r, max_dim=stat.k + 1)
        return float(hm.betti_numbers(comp, r, "cech")[stat.k])
    if stat.kind == "N":
        d = config.window.d
        if d == 2 and config.window_count() > 400:
            counts = morse.planar_critical_counts(config, r)
        else:
            _, counts, _ = morse.critical_points(config, r, d)
        return float(counts[stat.k])
    if stat.kind == "chi":
        return float(morse.morse_euler(config, r))
    if stat.kind == "coverage":
        return float(cube_coverage(config, r))
    raise ValueError(f"unknown statistic kind {stat.kind!r}")


def run(plan: ExperimentPlan) -> list:
    """Execute the plan: per (n, statistic) an EstimateRecord, CSV on request.

    Replicates failing on degenerate geometry or Palm starvation are excluded
    and counted; more than 5% exclusions abort the run.
    """
    records = []
    for idx, n in enumerate(plan.n_grid):
        r = plan.radius_for(n, idx)
        margin = max((s.margin_factor() for s in plan.statistics),
                     default=0.0) * r
        window = Window(plan.d, float(n))
        values = {s.label(): [] for s in plan.statistics}
        excluded = 0

        def one(rep):
            seed = _derived_seed(plan.seed, idx, rep)
            config = sample(plan.model, window, margin, seed)
            out = {}
            for stat in plan.statistics:
                out[stat.label()] = _evaluate(stat, config, r)
            return out

        results = []
        if plan.threads > 1:
            with ThreadPoolExecutor(max_workers=plan.threads) as pool:
                futures = [pool.submit(_safe, one, rep)
                           for rep in range(plan.replicates)]
                results = [f.result() for f in futures]
        else:
            results = [_safe(one, rep) for rep in range(plan.replicates)]
        for res in results:
            if res is None:
                excluded += 1
                continue
            for key, val in res.items():
                values[key].append(val)
        if excluded > EXCLUDED_REPLICATE_CAP * plan.replicates:
            raise RuntimeError(
                f"{excluded}/{plan.replicates} replicates excluded at n={n}")
        for stat in plan.statistics:
            rec = EstimateRecord.from_values(
                stat.label(), plan.model.label(), n, r,
                values[stat.label()], plan.seed,
                {"excluded": excluded, "regime": plan.regime})
            records.append(rec)
    if plan.out_dir:
        write_estimates_csv(Path(plan.out_dir) / "estimates.csv", records)
    return records


def _safe(fn, rep):
    try:
        return fn(rep)
    except (DegenerateGeometryError, AcceptanceStarvationError):
        return None


def replicate_values(plan: ExperimentPlan, stat: StatSpec) -> dict:
    """Raw per-replicate values of one statistic, keyed by n."""
    out = {}
    for idx, n in enumerate(plan.n_grid):
        r = plan.radius_for(n, idx)
        margin = stat.margin_factor() * r
        window = Window(plan.d, float(n))
        vals = []
        for rep in range(plan.replicates):
            seed = _derived_seed(plan.seed, idx, rep)
            config = sample(plan.model, window, margin, seed)
            vals.append(_evaluate(stat, config, r))
        out[n] = (r, vals)
    return out


# ---------------------------------------------------------------------------
# variance-vs-mean diagnostics


def theil_sen_slope(x, y) -> float:
    slopes = [(y[j] - y[i]) / (x[j] - x[i])
              for i in range(len(x)) for j in range(i + 1, len(x))
              if x[j] != x[i]]
    return float(np.median(slopes))


def variance_ratio(plan: ExperimentPlan, stat: StatSpec,
                   bootstrap: int = 500) -> dict:
    """Var/Mean series of an isolation-type statistic with bootstrap CIs.

    Returns the per-n ratios, bootstrap CIs, and the Theil-Sen slope of
    ratio against n with a bootstrap confidence interval.
    """
    if stat.kind not in ("Jt", "J", "N"):
        raise ValueError("variance_ratio expects a Jt, J or N statistic")
    data = replicate_values(plan, stat)
    ns = sorted(data)
    ratios, cis = [], []
    rng = np.random.default_rng(_derived_seed(plan.seed, 991))
    boot_slopes = np.empty(bootstrap)
    samples = {n: np.array(data[n][1]) for n in ns}
    for n in ns:
        vals = samples[n]
        ratios.append(_ratio(vals))
        boots = [_ratio(rng.choice(vals, size=len(vals), replace=True))
                 for _ in range(bootstrap)]
        boots = [b for b in boots if b is not None]
        cis.append((float(np.percentile(boots, 2.5)),
                    float(np.percentile(boots, 97.5))) if boots else (math.nan,) * 2)
    for b in range(bootstrap):
        ys = []
        for n in ns:
            vals = rng.choice(samples[n], size=len(samples[n]), replace=True)
            ys.append(_ratio(vals))
        if any(y is None for y in ys):
            boot_slopes[b] = math.nan
        else:
            boot_slopes[b] = theil_sen_slope(ns, ys)
    finite = boot_slopes[np.isfinite(boot_slopes)]
    point = (theil_sen_slope(ns, ratios)
             if all(rr is not None for rr in ratios) else math.nan)
    slope_ci = ((float(np.percentile(finite, 2.5)),
                 float(np.percentile(finite, 97.5)))
                if len(finite) else (math.nan, math.nan))
    return {"n": ns, "r": [data[n][0] for n in ns], "ratio": ratios,
            "ratio_ci": cis, "slope": point, "slope_ci": slope_ci}


def _ratio(vals):
    m = float(np.mean(vals))
    if m == 0:
        return None  # undefined for mean-zero statistics
    return float(np.var(vals, ddof=1) / m)


# ---------------------------------------------------------------------------
# coverage / contractibility


def cube_coverage(config, r: float) -> bool:
    """Sufficient condition: every grid cube of side r/(4 sqrt d) inside the
    window holds a point."""
    d = config.window.d
    side = config.window.side
    s = r / (4.0 * math.sqrt(d))
    cells = int(math.floor(side / s))
    if cells <= 0:
        return True
    pts = config.window_points()
    if len(pts) == 0:
        return False
    # cubes fully inside the window, anchored at the window's lower corner
    idx = np.floor((pts + side / 2.0) / s).astype(np.int64)
    inside = np.all((idx >= 0) & (idx < cells), axis=1)
    occupied = {tuple(row) for row in idx[inside]}
    return len(occupied) == cells ** d


def coverage_experiment(model: ModelSpec, n: float, r: float,
                        replicates: int, seed: int, d: int = 2) -> dict:
    """Coverage frequency and the contractibility consequence frequencies.

    Consequences are checked on the Cech complex at parameter r (distance
    threshold r/2): beta_0 = 1 via graph components, chi via Morse critical
    counts, beta_1 = beta_0 - chi (Cech homology vanishes above d-1).
    """
    window = Window(d, float(n))
    cover_hits, consequence_hits = 0, 0
    details = []
    for rep in range(replicates):
        config = sample(model, window, 0.0, _derived_seed(seed, rep))
        covered = cube_coverage(config, r)
        beta0 = _component_count(config, r)
        chi = morse.morse_euler(config, r / 2.0)
        beta1 = beta0 - chi
        ok = beta0 == 1 and beta1 == 0 and chi == 1
        cover_hits += covered
        consequence_hits += (covered and ok)
        details.append((covered, beta0, beta1, chi))
    return {"model": model.label(), "n": n, "r": r, "replicates": replicates,
            "coverage_frequency": cover_hits / replicates,
            "consequence_frequency": consequence_hits / replicates,
            "details": details}


def _component_count(config, eps: float) -> int:
    pts = config.window_points()
    if len(pts) == 0:
        return 0
    from scipy.spatial import cKDTree

    tree = cKDTree(pts)
    parent = list(range(len(pts)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in tree.query_pairs(eps):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
    return len({find(v) for v in range(len(pts))})


# ---------------------------------------------------------------------------
# barcode comparison and Euler convergence


def barcode_comparison(models, n: float, max_dim: int, replicates: int,
                       seed: int, eps_max: float = 2.5,
                       out_dir: str | None = None) -> list:
    """H1 bar summaries (mean birth/death, count) per model, plus one SVG
    barcode per model; d = 2 Rips filtrations."""
    out = []
    for mi, model in enumerate(models):
        births, deaths, counts = [], [], []
        svg_done = False
        for rep in range(replicates):
            config = sample(model, Window(2, float(n)), 0.0,
                            _derived_seed(seed, mi, rep))
            filt = cx.rips_filtration(config, max_dim, eps_max)
            barcode = hm.persistence(filt)
            bars = [(b, d_) for b, d_ in barcode.in_dimension(1)]
            if bars:
                births.append(float(np.mean([b for b, _ in bars])))
                finite = [d_ for _, d_ in bars if d_ != math.inf]
                if finite:
                    deaths.append(float(np.mean(finite)))
                counts.append(len(bars))
            else:
                counts.append(0)
            if out_dir and not svg_done:
                hm.barcode_svg(barcode,
                               Path(out_dir) / f"barcode_{model.label()}.svg",
                               eps_max, f"{model.label()} n={n:g}")
                svg_done = True
        summary = {
            "model": model.label(), "n": n, "replicates": replicates,
            "mean_birth": float(np.mean(births)) if births else math.nan,
            "birth_ci": _ci(births), "mean_death": float(np.mean(deaths))
            if deaths else math.nan, "death_ci": _ci(deaths),
            "mean_count": float(np.mean(counts)) if counts else 0.0,
        }
        out.append(summary)
    return out


def _ci(vals):
    if len(vals) < 2:
        return math.inf
    return 1.959963984540054 * float(np.std(vals, ddof=1)) / math.sqrt(len(vals))


def euler_convergence(model: ModelSpec, n_grid, radius_fn, replicates: int,
                      seed: int, d: int = 2) -> list:
    """chi(C(Phi_n, .))/n along an n grid; radius_fn(n) gives the distance
    threshold handed to the Morse counter (Cech parameter 2r)."""
    series = []
    for idx, n in enumerate(n_grid):
        r = radius_fn(float(n))
        vals = []
        for rep in range(replicates):
            config = sample(model, Window(d, float(n)), 0.0,
                            _derived_seed(seed, idx, rep))
            vals.append(morse.morse_euler(config, r) / float(n))
        series.append(EstimateRecord.from_values(
            "chi_over_n", model.label(), n, r, vals, seed))
    return series


# ---------------------------------------------------------------------------
# SVG scaling plot


def scaling_plot_svg(series, fit, path, title="") -> None:
    """log-log scatter with the fitted power law annotated."""
    slope, intercept, slope_se = fit
    xs = [math.log(s[0]) for s in series]
    ys = [math.log(s[1]) for s in series]
    w, h, pad = 480.0, 360.0, 48.0
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    x1 += (x1 - x0) * 0.05 + 1e-9
    x0 -= (x1 - x0) * 0.05
    y1 += (y1 - y0) * 0.05 + 1e-9
    y0 -= (y1 - y0) * 0.05

    def sx(x):
        return pad + (x - x0) / (x1 - x0) * (w - 2 * pad)

    def sy(y):
        return h - pad - (y - y0) / (y1 - y0) * (h - 2 * pad)

    parts = [f'<text x="10" y="18" font-size="13">{title}</text>',
             f'<text x="10" y="34" font-size="12">slope = {slope:.3f} '
             f'&#177; {slope_se:.3f}</text>']
    for x, y in zip(xs, ys):
        parts.append(f'<circle cx="{sx(x):.1f}" cy="{sy(y):.1f}" r="3" '
                     'fill="#1f77b4"/>')
    ya, yb = intercept + slope * x0, intercept + slope * x1
    parts.append(f'<line x1="{sx(x0):.1f}" y1="{sy(ya):.1f}" '
                 f'x2="{sx(x1):.1f}" y2="{sy(yb):.1f}" stroke="#d62728"/>')
    svg = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0f}" '
           f'height="{h:.0f}">\n' + "\n".join(parts) + "\n</svg>\n")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(svg)
