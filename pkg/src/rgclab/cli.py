"""Command-line front end: ``rgc SUBCOMMAND --config FILE [overrides]``.

Configs are JSON; flags override file keys; a fully resolved copy of the
config is echoed into the output directory so any run can be reproduced
bit-for-bit from its artifacts.  Seeds are mandatory.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from dataclasses import dataclass, field
from pathlib import Path

from . import complexes as cx
from . import experiments as ex
from . import geograph as gg
from . import homology as hm
from . import limits as lm
from . import morse
from .pointproc import ModelSpec, Window, sample
from .records import fmt, write_points_csv

SUBCOMMANDS = ("sample", "complex", "betti", "persist", "morse", "limits",
               "experiment")

_ALLOWED_KEYS = {
    "model", "d", "n", "r", "margin", "max_dim", "eps_max", "pattern",
    "mode", "isolated", "kind", "max_index", "constant", "beta", "k",
    "samples", "seed", "threads", "out", "experiment",
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    subcommand: str
    values: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, default=None):
        return self.values.get(key, default)


def _model_from_block(block) -> ModelSpec:
    if isinstance(block, str):
        block = {"kind": block}
    if not isinstance(block, dict) or "kind" not in block:
        raise ConfigError("model block needs a 'kind'")
    kind = block["kind"]
    if kind == "poisson":
        return ModelSpec("poisson")
    if kind == "ginibre":
        return ModelSpec("ginibre")
    if kind == "gef_zeros":
        return ModelSpec("gef_zeros")
    if kind == "perturbed_lattice":
        from .pointproc import perturbed_lattice
        return perturbed_lattice(block.get("replication", "constant"))
    if kind == "cox_cluster":
        from .pointproc import cox_cluster
        if "cluster_radius" not in block:
            raise ConfigError("cox_cluster needs 'cluster_radius'")
        return cox_cluster(block["cluster_radius"])
    raise ConfigError(f"unknown model kind {kind!r}")


def _pattern_by_name(name):
    catalog = gg.load_pattern_catalog()
    if name not in catalog:
        raise ConfigError(f"pattern {name!r} not in the catalog "
                          f"({', '.join(sorted(catalog))})")
    return catalog[name]


def parse_config(subcommand: str, path: str | None,
                 overrides: dict) -> RunConfig:
    """Merge config file and flag overrides into a validated RunConfig."""
    if subcommand not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    values = {}
    if path:
        try:
            values = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except json.JSONDecodeError as err:
            raise ConfigError(f"config parse error at line {err.lineno}: "
                              f"{err.msg}")
    if not isinstance(values, dict):
        raise ConfigError("config root must be an object")
    for key in values:
        if key not in _ALLOWED_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
    for key, val in overrides.items():
        if val is not None:
            values[key] = val
    if "seed" not in values:
        raise ConfigError("seed required (no wall-clock default)")
    values.setdefault("threads", 1)
    values.setdefault("d", 2)
    values.setdefault("margin", 0.0)
    values.setdefault("out", f"run-{subcommand}")
    if subcommand != "experiment":
        values.setdefault("model", {"kind": "poisson"})
        _model_from_block(values["model"])  # validate early
    if "pattern" in values:
        _pattern_by_name(values["pattern"])
    return RunConfig(subcommand, values)


class _OutputTracker:
    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.written = []

    def path(self, name) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        p = self.out_dir / name
        self.written.append(p)
        return p

    def cleanup(self):
        for p in self.written:
            try:
                p.unlink()
            except OSError:
                pass


def dispatch(config: RunConfig) -> int:
    """Run the configured subcommand; returns the process exit status."""
    out = _OutputTracker(Path(config["out"]))
    try:
        resolved = out.path("resolved-config.json")
        resolved.write_text(json.dumps(
            {"subcommand": config.subcommand, **config.values},
            indent=2, sort_keys=True) + "\n")
        _run_subcommand(config, out)
        return 0
    except Exception as err:  # noqa: BLE001 - single CLI boundary
        record = {"error": type(err).__name__, "message": str(err)}
        out.cleanup()
        out.out_dir.mkdir(parents=True, exist_ok=True)
        (out.out_dir / "error.json").write_text(json.dumps(record, indent=2))
        print(f"error: {err}", file=sys.stderr)
        if not isinstance(err, (ConfigError, ValueError)):
            traceback.print_exc()
        return 1


def _config_objects(config):
    model = _model_from_block(config["model"])
    window = Window(int(config["d"]), float(config["n"]))
    return model, window


def _run_subcommand(config: RunConfig, out: _OutputTracker) -> None:
    sub = config.subcommand
    seed = int(config["seed"])
    if sub == "sample":
        model, window = _config_objects(config)
        cfg = sample(model, window, float(config["margin"]), seed)
        write_points_csv(out.path("points.csv"), cfg.points)
        return
    if sub == "complex":
        model, window = _config_objects(config)
        cfg = sample(model, window, float(config["margin"]), seed)
        builder = cx.build_cech if config.get("kind") == "cech" else cx.build_rips
        comp = builder(cfg, float(config["r"]), int(config.get("max_dim", 2)))
        comp.write(out.path("complex.txt"))
        return
    if sub == "betti":
        model, window = _config_objects(config)
        cfg = sample(model, window, float(config["margin"]), seed)
        builder = cx.build_cech if config.get("kind") == "cech" else cx.build_rips
        comp = builder(cfg, float(config["r"]), int(config.get("max_dim", 2)))
        bv = hm.betti_numbers(comp, float(config["r"]), config.get("kind", "rips"))
        with open(out.path("betti.csv"), "w") as fh:
            fh.write("k,betti\n")
            for k, b in enumerate(bv.betti):
                fh.write(f"{k},{b}\n")
        return
    if sub == "persist":
        model, window = _config_objects(config)
        cfg = sample(model, window, float(config["margin"]), seed)
        maker = (cx.cech_filtration if config.get("kind") == "cech"
                 else cx.rips_filtration)
        filt = maker(cfg, int(config.get("max_dim", 2)),
                     float(config["eps_max"]))
        barcode = hm.persistence(filt)
        filt.write(out.path("filtration.txt"))
        hm.write_barcode_csv(out.path("barcode.csv"), barcode)
        hm.barcode_svg(barcode, out.path("barcode.svg"),
                       float(config["eps_max"]))
        return
    if sub == "morse":
        model, window = _config_objects(config)
        cfg = sample(model, window, float(config["margin"]), seed)
        records, counts, degenerate = morse.critical_points(
            cfg, float(config["r"]), int(config.get("max_index", window.d)),
            config.get("mode", "interior"))
        morse.write_critical_csv(out.path("critical.csv"), records)
        with open(out.path("critical-counts.csv"), "w") as fh:
            fh.write("index,count\n")
            for k, c in enumerate(counts):
                fh.write(f"{k},{c}\n")
            fh.write(f"degenerate,{degenerate}\n")
        return
    if sub == "limits":
        model = _model_from_block(config["model"])
        constant = config.get("constant", "mu0")
        d = int(config["d"])
        samples = int(config.get("samples", 20000))
        if constant == "mu0":
            pat = _pattern_by_name(config["pattern"])
            res = lm.mu0(pat, model, d, samples, seed)
        elif constant == "mu_beta":
            pat = _pattern_by_name(config["pattern"])
            res = lm.mu_beta(pat, model, float(config["beta"]), d, samples, seed)
        elif constant == "gamma_beta":
            pat = _pattern_by_name(config["pattern"])
            res = lm.gamma_beta(pat, model, float(config["beta"]), d, samples,
                                seed)
        elif constant == "nu_k":
            res = lm.nu_k(model, float(config.get("beta", 0.0)),
                          int(config["k"]), d, samples, seed)
        else:
            raise ConfigError(f"unknown limit constant {constant!r}")
        lm.write_limits_csv(out.path("limits.csv"), [res])
        return
    if sub == "experiment":
        block = config.get("experiment")
        if not isinstance(block, dict):
            raise ConfigError("experiment subcommand needs an "
                              "'experiment' block")
        plan = _plan_from_block(block, config)
        plan.out_dir = str(out.out_dir)
        out.path("estimates.csv")
        ex.run(plan)
        return
    raise ConfigError(f"unknown subcommand {sub!r}")


def _plan_from_block(block, config) -> ex.ExperimentPlan:
    stats = []
    for sb in block.get("statistics", []):
        pattern = (_pattern_by_name(sb["pattern"])
                   if "pattern" in sb else None)
        stats.append(ex.StatSpec(sb["kind"], pattern, int(sb.get("k", 0)),
                                 int(sb.get("max_dim", 2))))
    if not stats:
        raise ConfigError("experiment needs at least one statistic")
    return ex.ExperimentPlan(
        model=_model_from_block(block.get("model", config.get("model",
                                                              "poisson"))),
        regime=block.get("regime", "sparse"),
        radius_rule=block["radius_rule"],
        n_grid=block["n_grid"],
        statistics=stats,
        replicates=int(block.get("replicates", 50)),
        seed=int(config["seed"]),
        d=int(config["d"]),
        threads=int(config.get("threads", 1)),
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="rgc",
        description="random geometric complex laboratory")
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--threads", type=int)
    parser.add_argument("--out")
    parser.add_argument("--r", type=float)
    parser.add_argument("--n", type=float)
    args = parser.parse_args(argv)
    overrides = {"seed": args.seed, "threads": args.threads, "out": args.out,
                 "r": args.r, "n": args.n}
    try:
        config = parse_config(args.subcommand, args.config, overrides)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    return dispatch(config)


if __name__ == "__main__":
    sys.exit(main())
