"""Command-line interface.

Subcommands: train, spectrum, verify, depth-sweep, param-grid.  Every
command is seeded and bit-reproducible: identical flags produce identical
output files.  JSON reports carry schema_version; CSVs are RFC-4180 with a
header row.  Exit codes: 0 success, 1 failed check or failed training,
2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np

from .data import SBM_PRESETS, generate_sbm, load_bundle
from .errors import (
    BundleError,
    ConfigError,
    DatasetError,
    InvalidEdge,
    NotPositiveDefinite,
    ShapeError,
    SolverError,
    TrainingDiverged,
)
from .graphs import build_graph, normalize
from .linalg import child_seeds, seeded_rng
from .nn import TrainConfig, train
from .propagation import (
    Mode,
    Model,
    PropagationConfig,
    contraction_ratio,
    objective_gradient,
    objective_value,
    propagate,
    verify_convergence,
)
from .spectral import (
    closed_coefficients,
    geometric_truncation,
    polynomial_response,
    rational_response,
    to_laplacian_basis,
)

__all__ = [
    "main",
    "cmd_train",
    "cmd_spectrum",
    "cmd_verify",
    "cmd_depth_sweep",
    "cmd_param_grid",
]

SCHEMA_VERSION = 1
DEFAULT_DEPTHS = "1,2,5,10,20,50"


def _enum(enum_cls, value, what):
    if isinstance(value, enum_cls):
        return value
    try:
        return enum_cls(value)
    except ValueError:
        valid = ", ".join(m.value for m in enum_cls)
        raise ConfigError(
            f"unknown {what} {value!r}; expected one of: {valid}"
        ) from None


def _workers(n: int) -> int:
    cap = os.environ.get("GNN_UNIFY_THREADS")
    limit = int(cap) if cap else (os.cpu_count() or 1)
    return max(1, min(n, limit))


def _prop_config(args) -> PropagationConfig:
    return PropagationConfig(
        model=_enum(Model, args.model, "model"),
        mode=_enum(Mode, args.mode, "mode"),
        alpha=args.alpha,
        mu=args.mu,
        beta=args.beta,
        xi=args.xi,
        depth=args.depth,
    )


def _dataset(args):
    if getattr(args, "bundle", None):
        label = f"bundle:{args.bundle}"
        return load_bundle(args.bundle, args.normalize_features), label
    name = getattr(args, "sbm_preset", None) or "easy"
    if name not in SBM_PRESETS:
        raise ConfigError(
            f"unknown preset {name!r}; expected one of: {', '.join(sorted(SBM_PRESETS))}"
        )
    return generate_sbm(SBM_PRESETS[name]), f"sbm:{name}"


def _train_config(args, prop, seed) -> TrainConfig:
    return TrainConfig(
        hidden=args.hidden,
        lr=args.lr,
        weight_decay_first_layer=args.weight_decay,
        dropout=args.dropout,
        patience=args.patience,
        max_epochs=args.max_epochs,
        seed=seed,
        propagation=prop,
    )


def _run_trials(args, ds, prop, seeds):
    def one(seed):
        _, metrics = train(ds, _train_config(args, prop, seed))
        return {
            "seed": seed,
            "test_accuracy": metrics.test_accuracy,
            "val_accuracy": metrics.val_accuracy,
            "best_epoch": metrics.best_epoch,
        }

    if args.parallel and len(seeds) > 1:
        with ThreadPoolExecutor(max_workers=_workers(len(seeds))) as pool:
            return list(pool.map(one, seeds))
    return [one(s) for s in seeds]


def _mean_std(values):
    mean = float(np.mean(values))
    std = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
    return mean, std


def _write_json(path, payload):
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def cmd_train(args) -> int:
    prop = _prop_config(args)
    ds, source = _dataset(args)
    seeds = child_seeds(args.seed, args.runs)
    runs = _run_trials(args, ds, prop, seeds)
    mean, std = _mean_std([r["test_accuracy"] for r in runs])
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "train",
        "dataset": source,
        "model": prop.model.value,
        "mode": prop.mode.value,
        "alpha": prop.alpha,
        "mu": prop.mu,
        "beta": prop.beta,
        "xi": prop.xi,
        "depth": prop.depth,
        "runs": runs,
        "mean_test_accuracy": mean,
        "std_test_accuracy": std,
    }
    _write_json(args.out, report)
    print(
        f"{prop.model.value} {prop.mode.value} on {source}: "
        f"test accuracy {mean:.4f} +/- {std:.4f} over {len(runs)} runs"
    )
    return 0


def cmd_spectrum(args) -> int:
    cfg = _spectrum_config(args)
    if args.response == "polynomial":
        coeffs = closed_coefficients(cfg, args.depth)
        value = lambda lam: polynomial_response(coeffs, lam)
    else:
        value = lambda lam: rational_response(cfg, lam)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lambda", "response"])
        for k in range(0, 201):
            lam = Fraction(k, 100)
            writer.writerow([f"{float(lam):.2f}", f"{value(lam):.6f}"])
    print(f"wrote {args.out}")
    return 0


def _spectrum_config(args) -> PropagationConfig:
    model = _enum(Model, args.model, "model")
    mode = Mode.CLOSED if model is Model.PPNP else Mode.ITER
    return PropagationConfig(
        model=model, mode=mode, alpha=args.alpha, mu=args.mu, beta=args.beta
    )


def _parse_depths(text) -> list[int]:
    try:
        depths = [int(part) for part in str(text).split(",") if part.strip() != ""]
    except ValueError:
        raise ConfigError(f"bad depth list {text!r}") from None
    if not depths or any(d < 1 for d in depths):
        raise ConfigError(f"depths must be positive integers, got {text!r}")
    return depths


def _verify_graph(args):
    if getattr(args, "bundle", None):
        ds = load_bundle(args.bundle, False)
        graph = ds.graph
    else:
        rng = seeded_rng(args.seed)
        n = args.nodes
        want = max(n, int(2.5 * n))
        pairs = rng.integers(0, n, size=(want, 2))
        edges = [(int(u), int(v)) for u, v in pairs if u != v]
        graph = build_graph(n, edges)
    ops = normalize(graph)
    rng = seeded_rng(args.seed + 1)
    h = rng.standard_normal((graph.num_nodes, args.features))
    return ops, h


def _check_stationarity(ops, h, rng):
    configs = [
        ("ppnp", PropagationConfig(Model.PPNP, Mode.CLOSED, alpha=0.2)),
        ("jknet", PropagationConfig(Model.JKNET_FIXED, Mode.CLOSED, xi=1.0)),
        ("dagnn", PropagationConfig(Model.DAGNN_FIXED, Mode.CLOSED, xi=1.5)),
        ("gnn-lf", PropagationConfig(Model.GNN_LF, Mode.CLOSED, alpha=0.2, mu=0.7)),
        ("gnn-hf", PropagationConfig(Model.GNN_HF, Mode.CLOSED, alpha=0.2, beta=1.0)),
    ]
    checks = []
    for name, cfg in configs:
        z = propagate(cfg, ops, h)
        grad = objective_gradient(cfg, ops, z, h)
        ref = objective_gradient(cfg, ops, h, h)
        rel = float(np.linalg.norm(grad) / np.linalg.norm(ref))
        value = objective_value(cfg, ops, z, h)[2]
        minimal = True
        for eps in (1e-3, 1e-1):
            for _ in range(10):
                other = objective_value(
                    cfg, ops, z + eps * rng.standard_normal(z.shape), h
                )[2]
                minimal = minimal and value <= other
        checks.append(
            {
                "name": f"stationarity:{name}",
                "passed": bool(rel <= 1e-8 and minimal),
                "relative_gradient_norm": rel,
                "perturbations_above_optimum": bool(minimal),
            }
        )
    return checks


def _check_convergence(ops, h, depths):
    configs = [
        ("appnp", PropagationConfig(Model.APPNP, Mode.ITER, alpha=0.1)),
        ("gnn-lf", PropagationConfig(Model.GNN_LF, Mode.ITER, alpha=0.1, mu=0.7)),
        ("gnn-hf", PropagationConfig(Model.GNN_HF, Mode.ITER, alpha=0.1, beta=1.0)),
    ]
    checks = []
    for name, cfg in configs:
        reports = verify_convergence(cfg, ops, h, depths)
        ratio = reports[0].contraction_ratio
        base = reports[0].relative_error / (ratio ** reports[0].depth_checked)
        points, passed = [], True
        for rep in reports:
            bound = 10.0 * base * ratio ** rep.depth_checked
            ok = rep.relative_error <= bound
            passed = passed and ok
            points.append(
                {
                    "depth": rep.depth_checked,
                    "relative_error": rep.relative_error,
                    "envelope": bound,
                }
            )
        checks.append(
            {
                "name": f"convergence:{name}",
                "passed": bool(passed),
                "contraction_ratio": ratio,
                "points": points,
            }
        )
    return checks


def _check_coefficients(inject_error: bool):
    configs = [
        ("sgc", PropagationConfig(Model.SGC, Mode.ITER)),
        ("ppnp", PropagationConfig(Model.PPNP, Mode.CLOSED, alpha=0.3)),
        ("gnn-lf", PropagationConfig(Model.GNN_LF, Mode.ITER, alpha=0.3, mu=0.6)),
        ("gnn-hf", PropagationConfig(Model.GNN_HF, Mode.ITER, alpha=0.3, beta=1.2)),
    ]
    checks = []
    for name, cfg in configs:
        worst = 0.0
        for depth in range(1, 9):
            got = list(closed_coefficients(cfg, depth).theta)
            if inject_error:
                got[0] += 1e-3
            want = to_laplacian_basis(geometric_truncation(cfg, depth)).theta
            worst = max(worst, max(abs(g - w) for g, w in zip(got, want)))
        checks.append(
            {
                "name": f"coefficients:{name}",
                "passed": bool(worst <= 1e-9),
                "max_abs_diff": worst,
            }
        )
    return checks


def _check_reductions(ops, h):
    checks = []
    worst = {}
    # the boundary configs below warn on purpose; keep that out of verify output
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        cases = []
        for i, alpha in enumerate((0.1, 0.2, 0.3, 0.4, 0.5)):
            cases.append((f"gnn-lf-to-ppnp-{i}", PropagationConfig(
                Model.GNN_LF, Mode.CLOSED, alpha=alpha, mu=1.0, allow_boundary=True
            ), alpha))
            cases.append((f"gnn-hf-to-ppnp-{i}", PropagationConfig(
                Model.GNN_HF, Mode.CLOSED, alpha=alpha, beta=0.0, allow_boundary=True
            ), alpha))
            cases.append((f"dagnn-to-ppnp-{i}", PropagationConfig(
                Model.DAGNN_FIXED, Mode.CLOSED, xi=1.0 / alpha - 1.0
            ), alpha))
        for name, cfg, alpha in cases:
            ref = propagate(
                PropagationConfig(Model.PPNP, Mode.CLOSED, alpha=alpha), ops, h
            )
            got = propagate(cfg, ops, h)
            rel = float(np.linalg.norm(got - ref) / np.linalg.norm(ref))
            family = name.rsplit("-", 1)[0]
            worst[family] = max(worst.get(family, 0.0), rel)
    for family, rel in sorted(worst.items()):
        checks.append(
            {
                "name": f"reduction:{family}",
                "passed": bool(rel <= 1e-10),
                "max_relative_error": rel,
            }
        )
    return checks


def cmd_verify(args) -> int:
    depths = _parse_depths(args.depths)
    ops, h = _verify_graph(args)
    rng = seeded_rng(args.seed + 2)
    checks = []
    checks += _check_stationarity(ops, h, rng)
    checks += _check_convergence(ops, h, depths)
    checks += _check_coefficients(args.inject_coefficient_error)
    checks += _check_reductions(ops, h)
    all_passed = all(c["passed"] for c in checks)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "verify",
        "seed": args.seed,
        "depths": depths,
        "checks": checks,
        "all_passed": all_passed,
    }
    _write_json(args.out, payload)
    for c in checks:
        print(("PASS " if c["passed"] else "FAIL ") + c["name"])
    return 0 if all_passed else 1


def cmd_depth_sweep(args) -> int:
    depths = _parse_depths(args.depths)
    ds, _ = _dataset(args)
    seeds = child_seeds(args.seed, args.runs)
    rows = []
    for depth in depths:
        sweep_args = argparse.Namespace(**vars(args))
        sweep_args.depth = depth
        prop = _prop_config(sweep_args)
        runs = _run_trials(args, ds, prop, seeds)
        mean, std = _mean_std([r["test_accuracy"] for r in runs])
        rows.append((depth, mean, std))
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["depth", "mean_accuracy", "std_accuracy"])
        for depth, mean, std in rows:
            writer.writerow([depth, f"{mean:.4f}", f"{std:.4f}"])
    print(f"wrote {args.out}")
    return 0


def cmd_param_grid(args) -> int:
    model = _enum(Model, args.model, "model")
    if model not in (Model.GNN_LF, Model.GNN_HF):
        raise ConfigError("param-grid supports gnn-lf and gnn-hf")
    try:
        alphas = [float(a) for a in args.alphas.split(",") if a.strip()]
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        raise ConfigError("alpha/value lists must be comma-separated floats") from None
    if not alphas or not values:
        raise ConfigError("alpha and value lists must be non-empty")
    ds, _ = _dataset(args)
    seeds = child_seeds(args.seed, args.runs)
    seen = set()
    rows = []
    for alpha in alphas:
        for value in values:
            point = (alpha, value)
            if point in seen:
                continue
            seen.add(point)
            kwargs = {"mu": value} if model is Model.GNN_LF else {"beta": value}
            prop = PropagationConfig(
                model=model,
                mode=_enum(Mode, args.mode, "mode"),
                alpha=alpha,
                depth=args.depth,
                **kwargs,
            )
            runs = _run_trials(args, ds, prop, seeds)
            mean, _ = _mean_std([r["test_accuracy"] for r in runs])
            rows.append((alpha, value, mean))
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["alpha", "mu_or_beta", "mean_accuracy"])
        for alpha, value, mean in rows:
            writer.writerow([f"{alpha:g}", f"{value:g}", f"{mean:.4f}"])
    print(f"wrote {args.out}")
    return 0


def _add_data_flags(p):
    p.add_argument("--bundle", help="bundle directory to load")
    p.add_argument(
        "--normalize-features", action="store_true",
        help="row-L1 normalize features at load",
    )
    p.add_argument(
        "--sbm-preset", choices=sorted(SBM_PRESETS),
        help="synthetic dataset preset (default: easy)",
    )


def _add_prop_flags(p):
    p.add_argument("--model", default="gnn-lf",
                   choices=[m.value for m in Model])
    p.add_argument("--mode", default="iter", choices=[m.value for m in Mode])
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--mu", type=float, default=0.5)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--xi", type=float, default=None)
    p.add_argument("--depth", type=int, default=10)


def _add_train_flags(p):
    p.add_argument("--hidden", type=int, default=64)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--weight-decay", type=float, default=5e-3)
    p.add_argument("--dropout", type=float, default=0.5)
    p.add_argument("--patience", type=int, default=100)
    p.add_argument("--max-epochs", type=int, default=1500)
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--parallel", action="store_true",
                   help="run seeded trials in a thread pool")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gnn-unify",
        description="Unified propagation operators: train, verify, inspect.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a node classifier over seeded runs")
    _add_data_flags(p)
    _add_prop_flags(p)
    _add_train_flags(p)
    p.add_argument("--out", default="report.json")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("spectrum", help="emit frequency-response CSV")
    p.add_argument("--model", default="ppnp", choices=[m.value for m in Model])
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--mu", type=float, default=0.5)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--response", choices=["rational", "polynomial"],
                   default="rational")
    p.add_argument("--depth", type=int, default=10,
                   help="polynomial truncation order")
    p.add_argument("--out", default="spectrum.csv")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("verify", help="run the verification battery")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--nodes", type=int, default=60)
    p.add_argument("--features", type=int, default=8)
    p.add_argument("--depths", default=DEFAULT_DEPTHS)
    p.add_argument("--bundle", help="verify on a bundle's graph instead")
    p.add_argument("--inject-coefficient-error", action="store_true",
                   help=argparse.SUPPRESS)
    p.add_argument("--out", default="verify.json")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("depth-sweep", help="accuracy across propagation depths")
    _add_data_flags(p)
    _add_prop_flags(p)
    _add_train_flags(p)
    p.add_argument("--depths", default=DEFAULT_DEPTHS)
    p.add_argument("--out", default="depth.csv")
    p.set_defaults(func=cmd_depth_sweep)

    p = sub.add_parser("param-grid", help="accuracy over a hyperparameter grid")
    _add_data_flags(p)
    _add_train_flags(p)
    p.add_argument("--model", default="gnn-lf", choices=["gnn-lf", "gnn-hf"])
    p.add_argument("--mode", default="iter", choices=[m.value for m in Mode])
    p.add_argument("--depth", type=int, default=10)
    p.add_argument("--alphas", default="0.01,0.05,0.1,0.2,0.5")
    p.add_argument("--values", default="0.5,0.7,0.9",
                   help="mu values for gnn-lf, beta values for gnn-hf")
    p.add_argument("--out", default="grid.csv")
    p.set_defaults(func=cmd_param_grid)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except (ConfigError, BundleError, DatasetError, InvalidEdge, ShapeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SolverError, NotPositiveDefinite, TrainingDiverged) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
