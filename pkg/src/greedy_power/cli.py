"""Command line interface: ``greedy-power {solve,simulate,oracle-check,split-prob}``.

Settings resolve in three layers: built-in defaults, then a JSON ``--config``
file (keys are the long option names, e.g. ``"rows"``, ``"remove"``), then
explicit flags. A simulate JSON report can be passed back as ``--config``.
"""

from __future__ import annotations

import argparse
import json
import secrets
import sys
from math import comb, sqrt

import numpy as np

from .core import ScoreMatrix
from .oracle import OracleBudget, compare_to_exact
from .power import PowerParams, greedy_power, split_frequency, split_probability
from .sim import PRESETS, ExperimentConfig, preset, run_experiment

SETTING_KEYS = (
    "matrix", "preset", "rows", "cols", "select", "remove", "branches", "power",
    "trajectories", "repeats", "seed", "workers", "output", "format", "draws",
)


CONFIG_KEYS = ("rows", "cols", "select", "remove", "branches", "power",
               "trajectories", "repeats", "seed", "distribution")


class UsageError(Exception):
    pass


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with default settings (flags win)")
    p.add_argument("--seed", type=int, help="random seed; a fresh one is drawn and printed if omitted")
    p.add_argument("--output", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("csv", "json"), help="report format")


def _add_power(p: argparse.ArgumentParser) -> None:
    p.add_argument("--remove", type=int, help="r: creatives removed per candidate (default 1)")
    p.add_argument("--branches", type=int, help="f: removal subsets per round (default M)")
    p.add_argument("--power", type=int, help="n: greedy rounds incl. baseline, 0 = until no gain (default 2)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="greedy-power", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="select M creatives from a CSV score matrix")
    p.add_argument("--matrix", help="headerless CSV, one keyword per row")
    p.add_argument("--select", type=int, help="M: creatives to select")
    _add_power(p)
    _add_common(p)

    p = sub.add_parser("simulate", help="Monte Carlo comparison against the greedy baseline")
    p.add_argument("--preset", choices=sorted(PRESETS), help="published table configuration")
    p.add_argument("--rows", type=int, help="W: keywords")
    p.add_argument("--cols", type=int, help="N: creatives")
    p.add_argument("--select", type=int, help="M: creatives to select")
    _add_power(p)
    p.add_argument("--trajectories", type=int, help="T per repeat (default 500)")
    p.add_argument("--repeats", type=int, help="independent repeats (default 3)")
    p.add_argument("--workers", type=int, help="worker processes (default 1); output does not depend on it")
    _add_common(p)

    p = sub.add_parser("oracle-check", help="greedy and Greedy-Power vs exhaustive optimum")
    p.add_argument("--rows", type=int, help="W (default 10)")
    p.add_argument("--cols", type=int, help="N (default 14)")
    p.add_argument("--select", type=int, help="M (default 4)")
    p.add_argument("--trajectories", type=int, help="random instances (default 200)")
    p.add_argument("--remove", type=int, help="r for Greedy-Power (default M-1)")
    p.add_argument("--branches", type=int, help="f for Greedy-Power (default C(M, r))")
    _add_common(p)

    p = sub.add_parser("split-prob", help="pair split probability, analytic and sampled")
    p.add_argument("--select", type=int, help="M (default 6)")
    p.add_argument("--remove", type=int, help="r (default M/2)")
    p.add_argument("--draws", type=int, help="Monte Carlo draws (default 100000)")
    _add_common(p)
    return parser


def resolve_settings(args: argparse.Namespace) -> dict:
    settings: dict = {}
    if args.config:
        with open(args.config) as fh:
            doc = json.load(fh)
        if not isinstance(doc, dict):
            raise UsageError(f"{args.config}: expected a JSON object")
        if isinstance(doc.get("config"), dict):
            # a saved report: its resolved config already carries the dimensions
            doc = doc["config"]
        unknown = set(doc) - set(SETTING_KEYS) - {"command", "distribution"}
        if unknown:
            raise UsageError(f"{args.config}: unknown keys {sorted(unknown)}")
        settings.update({k: v for k, v in doc.items() if v is not None})
    for key in SETTING_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    if "seed" not in settings:
        settings["seed"] = secrets.randbits(32)
    return settings


def _emit(text: str, settings: dict) -> None:
    out = settings.get("output")
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _params(settings: dict) -> PowerParams:
    power = int(settings.get("power", 2))
    branches = settings.get("branches")
    return PowerParams(
        r=int(settings.get("remove", 1)),
        f=None if branches is None else int(branches),
        n=None if power == 0 else power,
    )


def cmd_solve(settings: dict) -> int:
    if "matrix" not in settings:
        raise UsageError("solve needs --matrix")
    if "select" not in settings:
        raise UsageError("solve needs --select")
    matrix = ScoreMatrix.from_csv(settings["matrix"])
    size = int(settings["select"])
    params = _params(settings)
    res = greedy_power(matrix, size, params, settings["seed"])
    report = {
        "selected": sorted(res.selection),
        "baseline_goal": res.baseline_goal,
        "final_goal": res.goal,
        "matched": res.matched,
        "improvement_ratio": res.improvement_ratio,
        "iterations": res.rounds,
        "seed": settings["seed"],
    }
    if settings.get("format") == "json":
        _emit(json.dumps(report, indent=2) + "\n", settings)
    else:
        lines = [
            f"selected: {','.join(map(str, report['selected']))}",
            f"baseline_goal: {res.baseline_goal!r}",
            f"final_goal: {res.goal!r}",
            f"matched: {str(res.matched).lower()}",
            f"improvement_ratio: {res.improvement_ratio!r}",
            f"iterations: {res.rounds}",
            f"seed: {settings['seed']}",
        ]
        _emit("\n".join(lines) + "\n", settings)
    return 0


def simulation_config(settings: dict) -> tuple[ExperimentConfig, str | None]:
    dims = [k for k in ("rows", "cols", "select") if k in settings]
    name = settings.get("preset")
    if name is not None:
        if dims:
            raise UsageError(f"--preset cannot be combined with explicit dimensions ({', '.join(dims)})")
        base = preset(name).to_dict()
    else:
        missing = [k for k in ("rows", "cols", "select") if k not in settings]
        if missing:
            raise UsageError(f"simulate needs --preset or all of --rows/--cols/--select (missing {', '.join(missing)})")
        base = {}
    merged = {**base, **{k: v for k, v in settings.items() if k in CONFIG_KEYS}}
    return ExperimentConfig.from_dict(merged), name


def cmd_simulate(settings: dict) -> int:
    config, name = simulation_config(settings)
    workers = int(settings.get("workers", 1))
    report = run_experiment(config, workers=workers, preset_name=name)
    fmt = settings.get("format", "csv")
    text = report.to_json() if fmt == "json" else report.to_csv()
    print(f"# seed: {config.base_seed}", file=sys.stderr)
    print(f"# config: {json.dumps(config.to_dict(), sort_keys=True)}", file=sys.stderr)
    _emit(text, settings)
    # timing is the one field not reproduced by re-running with the same seed
    print(f"# runtime: {report.runtime_seconds:.2f}s", file=sys.stderr)
    return 0


def cmd_oracle_check(settings: dict) -> int:
    rows = int(settings.get("rows", 10))
    cols = int(settings.get("cols", 14))
    size = int(settings.get("select", 4))
    trials = int(settings.get("trajectories", 200))
    if size < 1:
        raise UsageError("oracle-check needs --select >= 1")
    r = int(settings.get("remove", max(1, size - 1)))
    f = int(settings.get("branches", comb(size, r) if r <= size else 1))
    cmp = compare_to_exact(rows, cols, size, trials, settings["seed"], PowerParams(r=r, f=f, n=None), OracleBudget())
    report = {
        "rows": rows, "cols": cols, "select": size, "trajectories": trials,
        "remove": r, "branches": f, "seed": settings["seed"],
        "greedy_optimality_rate": cmp.greedy_rate,
        "power_optimality_rate": cmp.power_rate,
        "power_improved_rate": cmp.power_improved_rate,
        "mean_exact_goal": cmp.mean_exact_goal,
        "mean_greedy_goal": cmp.mean_greedy_goal,
        "mean_power_goal": cmp.mean_power_goal,
        "chain_violations": cmp.chain_violations,
    }
    if settings.get("format") == "json":
        _emit(json.dumps(report, indent=2) + "\n", settings)
    else:
        _emit("".join(f"{k}: {v}\n" for k, v in report.items()), settings)
    return 0


def cmd_split_prob(settings: dict) -> int:
    size = int(settings.get("select", 6))
    r = int(settings.get("remove", size // 2))
    draws = int(settings.get("draws", 100_000))
    exact = split_probability(size, r)
    rng = np.random.Generator(np.random.PCG64(settings["seed"]))
    freq, n = split_frequency(size, r, draws, rng)
    sigma = sqrt(exact * (1 - exact) / n) if n else float("nan")
    report = {
        "select": size, "remove": r, "draws": draws, "seed": settings["seed"],
        "analytic": exact, "sampled": freq, "conditioning_draws": n,
        "z_score": (freq - exact) / sigma if sigma > 0 else 0.0,
    }
    if settings.get("format") == "json":
        _emit(json.dumps(report, indent=2) + "\n", settings)
    else:
        _emit("".join(f"{k}: {v}\n" for k, v in report.items()), settings)
    return 0


COMMANDS = {
    "solve": cmd_solve,
    "simulate": cmd_simulate,
    "oracle-check": cmd_oracle_check,
    "split-prob": cmd_split_prob,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = resolve_settings(args)
        return COMMANDS[args.command](settings)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"greedy-power {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"greedy-power {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
