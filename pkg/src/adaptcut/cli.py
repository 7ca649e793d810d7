"""Command-line front end for seeded batch experiments.

Single global seed policy: instance i of a batch is generated with
derive_seed(seed, i) and solved with derive_seed(seed, i, 1), so any
subset of a batch can be recomputed independently of the rest.

Config files are flat ``key=value`` lines using the long flag names
(without dashes); command-line flags override file values.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

from . import __version__
from .adapt import AdaptConfig, RunRecord, run_adapt
from .bench import (
    DEFAULT_NOISE_GRID,
    NOISE_ANCHORS,
    build_noise_curve,
    critical_error_probability,
    gamma_histogram,
    mitigated_curve,
    noisy_growth,
    variant_comparison,
    write_convergence_csv,
    write_critical_csv,
    write_histogram_csv,
    write_variant_csv,
)
from .estimators import GoemansWilliamsonSolver
from .exceptions import AdaptcutError, ResourceLimitError
from .instances import generate_instance, save_instance
from .seeding import derive_seed

ALGOS = ("standard", "dynamic", "dynamic-nocost", "dynamic-noreselect", "gw")
QUICK_INSTANCES = 20


# ── config plumbing ───────────────────────────────────────────────────────


def _read_config_file(path: str) -> dict:
    values = {}
    for line_no, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{line_no}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


_LIST_KEYS = {"pgate"}


def _coerce(key: str, value: str):
    if key in _LIST_KEYS:
        return [float(v) for v in value.split(",") if v.strip()]
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            continue
    if value.lower() in ("true", "false"):
        return value.lower() == "true"
    return value


def _resolved_config(args: argparse.Namespace) -> dict:
    doc = {k: v for k, v in sorted(vars(args).items()) if not k.startswith("_")}
    doc.pop("func", None)
    doc["version"] = __version__
    return doc


def _adapt_config(args, seed: int) -> AdaptConfig:
    return AdaptConfig(
        max_layers=args.P,
        gamma_offset=args.gamma_offset,
        gamma_init=args.gamma_init,
        delta1=args.delta1,
        delta2=args.delta2,
        variant=args.algo if args.algo != "gw" else "dynamic",
        optimizer_restarts=args.restarts,
        seed=seed,
    )


def _batch_instances(args):
    count = min(args.instances, QUICK_INSTANCES) if args.quick else args.instances
    return [
        generate_instance(args.n, seed=derive_seed(args.seed, i)) for i in range(count)
    ]


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_records(path: str) -> list[RunRecord]:
    records_dir = Path(path)
    if not records_dir.is_dir():
        raise FileNotFoundError(f"records directory not found: {path}")
    files = sorted(records_dir.glob("record_*.json"))
    if not files:
        raise FileNotFoundError(f"no record_*.json files in {path}")
    return [RunRecord.load(f) for f in files]


# ── commands ──────────────────────────────────────────────────────────────


def cmd_run(args) -> int:
    out = _out_dir(args)
    instances = _batch_instances(args)
    for i, inst in enumerate(instances):
        save_instance(inst, out / f"instance_n{args.n}_i{i:03d}.json")
        sub_seed = derive_seed(args.seed, i, 1)
        if args.algo == "gw":
            solver = GoemansWilliamsonSolver(rounds=args.rounds, seed=sub_seed)
            solver.fit(inst.weights)
            doc = {
                "version": __version__,
                "config": _resolved_config(args),
                "instance_seed": inst.seed,
                "relaxation_objective": solver.relaxation_objective_,
                "mean_cut_value": solver.mean_cut_value_,
                "stderr": solver.stderr_,
                "best_cut_value": solver.cut_value_,
                "best_bits": [int(b) for b in solver.labels_],
                "alpha": solver.alpha_,
            }
            path = out / f"record_gw_n{args.n}_i{i:03d}.json"
            path.write_text(json.dumps(doc, indent=1))
            print(f"{path} alpha={solver.alpha_:.4f}")
        else:
            config = _adapt_config(args, sub_seed)
            p_gate = args.pgate[0] if args.pgate else 0.0
            record = run_adapt(inst, config, p_gate=p_gate)
            path = out / f"record_{args.algo}_n{args.n}_i{i:03d}.json"
            record.save(path)
            final_alpha = record.alpha(len(record.iterations))
            print(f"{path} alpha={final_alpha:.4f} cnots={record.iterations[-1].cnots}")
    return 0


def cmd_convergence(args) -> int:
    records = _load_records(args.records)
    grid = args.pgate if args.pgate else [0.0, *NOISE_ANCHORS]
    curves = [build_noise_curve(records, p, jobs=args.jobs) for p in grid]
    out = _out_dir(args)
    path = out / "convergence.csv"
    write_convergence_csv(path, curves, _resolved_config(args))
    for curve in curves:
        print(
            f"p_gate={curve.p_gate:g} alpha*={curve.alpha_star:.4f} "
            f"at {curve.cnot_at_star:.1f} CNOTs"
        )
    print(path)
    return 0


def cmd_critical(args) -> int:
    if args.records:
        records = _load_records(args.records)
        instances = [rec.instance for rec in records]
        config = _adapt_config(args, args.seed)
    else:
        records = None
        instances = _batch_instances(args)
        config = _adapt_config(args, args.seed)
        records = [
            run_adapt(inst, dataclasses.replace(config, seed=derive_seed(args.seed, i, 1)))
            for i, inst in enumerate(instances)
        ]
    grid = args.pgate if args.pgate else None
    result = critical_error_probability(
        instances,
        config,
        p_grid=grid,
        records=records,
        gw_rounds=args.rounds,
        gw_seed=args.seed,
        jobs=args.jobs,
    )
    out = _out_dir(args)
    path = out / "critical.csv"
    write_critical_csv(path, [result], _resolved_config(args))
    flag = " (at search boundary)" if result.at_boundary else ""
    print(
        f"n={result.n} {result.algorithm}: p*={result.p_star:.4g} "
        f"+/- {result.stderr:.2g}{flag}"
    )
    print(path)
    return 0


def cmd_histogram(args) -> int:
    records = _load_records(args.records)
    hist = gamma_histogram(records)
    out = _out_dir(args)
    path = out / "histogram.csv"
    write_histogram_csv(path, hist, _resolved_config(args))
    print(f"{hist.n_values} angles, near-zero fraction {hist.near_zero_fraction:.3f}")
    print(path)
    return 0


def cmd_variants(args) -> int:
    instances = _batch_instances(args)
    config = _adapt_config(args, args.seed)
    table = variant_comparison(instances, config, jobs=args.jobs)
    out = _out_dir(args)
    path = out / "variants.csv"
    write_variant_csv(path, table, _resolved_config(args))
    for variant, row in sorted(table.items()):
        print(f"{variant}: final mean 1-alpha = {row[-1]:.4f}")
    print(path)
    return 0


def cmd_mitigate(args) -> int:
    records = _load_records(args.records)
    p = args.pgate[0] if args.pgate else NOISE_ANCHORS[0]
    base = build_noise_curve(records, p, jobs=args.jobs)
    scaled = build_noise_curve(records, args.scale * p, jobs=args.jobs)
    curve = mitigated_curve(base, scaled, args.scale)
    out = _out_dir(args)
    path = out / "mitigated.csv"
    write_convergence_csv(path, [base, scaled, curve], _resolved_config(args))
    print(
        f"raw alpha*={base.alpha_star:.4f} at p={p:g}; "
        f"mitigated alpha*={curve.alpha_star:.4f}"
    )
    print(path)
    return 0


def cmd_noisy_growth(args) -> int:
    out = _out_dir(args)
    p = args.pgate[0] if args.pgate else NOISE_ANCHORS[0]
    instances = _batch_instances(args)
    for i, inst in enumerate(instances):
        config = _adapt_config(args, derive_seed(args.seed, i, 1))
        record = noisy_growth(inst, config, p)
        path = out / f"record_{args.algo}_noisy_n{args.n}_i{i:03d}.json"
        record.save(path)
        final_alpha = record.alpha(len(record.iterations))
        print(f"{path} alpha={final_alpha:.4f}")
    return 0


# ── parser ────────────────────────────────────────────────────────────────


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--algo", choices=ALGOS, default="dynamic")
    parser.add_argument("--n", type=int, default=6, help="vertex count")
    parser.add_argument("--instances", type=int, default=100, help="batch size")
    parser.add_argument("--P", type=int, default=12, help="max ansatz layers")
    parser.add_argument("--gamma-offset", dest="gamma_offset", type=float, default=0.1)
    parser.add_argument("--gamma-init", dest="gamma_init", type=float, default=0.01)
    parser.add_argument("--delta1", type=float, default=1e-9)
    parser.add_argument("--delta2", type=float, default=1e-5)
    parser.add_argument(
        "--pgate", type=float, action="append", help="error rate; repeatable"
    )
    parser.add_argument("--rounds", type=int, default=1000, help="rounding samples")
    parser.add_argument("--restarts", type=int, default=1, help="optimizer restarts")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--quick", action="store_true", help="shrink batch sizes")
    parser.add_argument("--records", help="directory of stored run records")
    parser.add_argument("--scale", type=float, default=2.0, help="extrapolation factor")


def build_parser(defaults: dict | None = None) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adaptcut", description="Seeded Max-Cut experiment runner"
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="grow circuits or round embeddings")
    _add_common(run_p)
    run_p.set_defaults(func=cmd_run)

    bench_p = sub.add_parser("bench", help="experiment pipelines")
    bench_sub = bench_p.add_subparsers(dest="bench_command", required=True)
    for name, func in (
        ("convergence", cmd_convergence),
        ("critical", cmd_critical),
        ("histogram", cmd_histogram),
        ("variants", cmd_variants),
        ("mitigate", cmd_mitigate),
        ("noisy-growth", cmd_noisy_growth),
    ):
        p = bench_sub.add_parser(name)
        _add_common(p)
        p.set_defaults(func=func)

    if defaults:
        known = set()
        for sp in [run_p, *bench_sub.choices.values()]:
            known.update(a.dest for a in sp._actions)
        bad = set(defaults) - known
        if bad:
            parser.error(f"unknown config keys: {', '.join(sorted(bad))}")
        for sp in [run_p, *bench_sub.choices.values()]:
            sp.set_defaults(**{k: v for k, v in defaults.items() if k in known})
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)

    # peel --config off first so file values become parser defaults
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    ns, rest = pre.parse_known_args(argv)
    defaults = None
    if ns.config:
        try:
            raw = _read_config_file(ns.config)
        except (OSError, ValueError) as exc:
            print(f"adaptcut: {exc}", file=sys.stderr)
            return 2
        defaults = {k: _coerce(k, v) for k, v in raw.items()}

    parser = build_parser(defaults)
    args = parser.parse_args(rest)
    if getattr(args, "n", 2) < 2:
        parser.error("--n must be at least 2")

    try:
        return args.func(args)
    except (ResourceLimitError, FileNotFoundError) as exc:
        print(f"adaptcut: {exc}", file=sys.stderr)
        return 3
    except AdaptcutError as exc:
        print(f"adaptcut: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
