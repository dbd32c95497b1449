"""Command-line surface.

Subcommands: fit, predict, optimize, compare-reference, synth, sample,
fit-linear. Every command is deterministic given its inputs and --seed; all
randomness flows through one counter-based generator (Philox). Exit codes:
0 success, 1 usage/parse error, 2 infeasible-everywhere, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from . import __version__
from . import analytic, bayesopt, linmod, polyreg, reference, synth
from .netgraph import LayerKind, NetworkParseError, ShapeMismatchError, parse_network
from .objectives import build_objective

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_NUMERICAL = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; the exit-code contract
    # reserves 2 for infeasible-everywhere
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


class UsageError(ValueError):
    pass


def _fmt(value: float) -> str:
    return f"{value:.6g}"


def _print_table(header: list[str], rows: list[list[str]], fmt: str) -> None:
    if fmt == "csv":
        print(",".join(header))
        for row in rows:
            print(",".join(row))
        return
    widths = [max(len(header[i]), *(len(r[i]) for r in rows)) if rows else len(header[i])
              for i in range(len(header))]
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip())
    for row in rows:
        print("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())


def _digest(parts: list[str], files: list[Path]) -> str:
    sha = hashlib.sha256()
    for part in parts:
        sha.update(part.encode())
        sha.update(b"\0")
    for path in files:
        sha.update(path.read_bytes())
        sha.update(b"\0")
    return sha.hexdigest()


def _write_manifest(out_dir: Path, subcommand: str, args_repr: list[str],
                    inputs: list[Path], outputs: list[Path], seed: int) -> None:
    manifest = {
        "subcommand": subcommand,
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p.name) for p in outputs],
        "seed": seed,
        "config_digest": _digest(args_repr + [str(seed), __version__], inputs),
        "version": __version__,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


# --- subcommands -------------------------------------------------------------

def _cmd_synth(args) -> int:
    if args.config:
        config = synth.load_config(Path(args.config).read_text())
    else:
        config = synth.SynthConfig()
    if args.count is not None:
        config = synth.SynthConfig(count=args.count, noise=config.noise,
                                   kinds=config.kinds, generators=config.generators)
    if args.noise is not None:
        config = synth.SynthConfig(count=config.count, noise=args.noise,
                                   kinds=config.kinds, generators=config.generators)
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / "synthetic_profile.csv"
    out_path.write_text(synth.generate_csv(config, args.seed))
    inputs = [Path(args.config)] if args.config else []
    _write_manifest(out_dir, "synth", [f"count={config.count}", f"noise={config.noise}"],
                    inputs, [out_path], args.seed)
    print(f"wrote {out_path}")
    return EXIT_OK


def _models_by_kind(samples):
    by_kind: dict[LayerKind, list] = {}
    for sample in samples:
        by_kind.setdefault(sample.layer.kind, []).append(sample)
    return by_kind


def _cmd_fit(args) -> int:
    csv_path = Path(args.profile)
    samples = polyreg.read_profile_csv(csv_path.read_text())
    if not samples:
        raise UsageError("profile CSV contains no samples")
    config = polyreg.FitConfig(degree=args.degree, l1_strength=args.l1,
                               cv_folds=args.folds, seed=args.seed)
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    outputs = []
    for kind, kind_samples in sorted(_models_by_kind(samples).items(), key=lambda kv: kv[0].value):
        for target in (polyreg.Target.RUNTIME_MS, polyreg.Target.POWER_W):
            pairs = [(s.layer, getattr(s, target.value)) for s in kind_samples
                     if getattr(s, target.value) is not None]
            if not pairs:
                continue
            if len(pairs) < 2 * config.cv_folds:
                print(f"warning: skipping {kind.value}/{target.value}: "
                      f"only {len(pairs)} samples", file=sys.stderr)
                continue
            model, metrics = polyreg.fit_with_metrics(pairs, config, kind, target)
            path = out_dir / f"model_{kind.value}_{target.value}.json"
            path.write_text(polyreg.model_to_json(model))
            outputs.append(path)
            rows.append([kind.value, target.value, str(model.size),
                         _fmt(metrics.rmspe), _fmt(metrics.rmse)])
    if not outputs:
        raise UsageError("no (kind, target) had enough samples to fit")
    _print_table(["kind", "target", "size", "cv_rmspe_pct", "cv_rmse"], rows, args.format)
    _write_manifest(out_dir, "fit", [f"degree={args.degree}", f"l1={args.l1}",
                                     f"folds={args.folds}"],
                    [csv_path], outputs, args.seed)
    return EXIT_OK


def _load_poly_models(models_dir: Path, target: polyreg.Target):
    models = {}
    for kind in LayerKind:
        path = models_dir / f"model_{kind.value}_{target.value}.json"
        if path.exists():
            models[kind] = polyreg.model_from_json(path.read_text())
    return models


def _cmd_predict(args) -> int:
    net_path = Path(args.network)
    net = parse_network(net_path.read_text(), name=net_path.stem)
    if args.family == "poly":
        if not args.models_dir:
            raise UsageError("--family poly requires --models-dir")
        runtime = _load_poly_models(Path(args.models_dir), polyreg.Target.RUNTIME_MS)
        power = _load_poly_models(Path(args.models_dir), polyreg.Target.POWER_W)
        pred = polyreg.predict_network(runtime, power, net)
        rows = [[lp.name, lp.kind.value, _fmt(lp.runtime_ms), _fmt(lp.power_w),
                 _fmt(lp.energy_mj)] for lp in pred.layers]
        rows.append(["total", "", _fmt(pred.total_runtime_ms), _fmt(pred.average_power_w),
                     _fmt(pred.total_energy_mj)])
        _print_table(["layer", "kind", "t_ms", "p_w", "e_mj"], rows, args.format)
    elif args.family == "paleo":
        if not args.device:
            raise UsageError("--family paleo requires --device")
        device = analytic.parse_device_spec(Path(args.device).read_text())
        result = analytic.paleo_network_runtime(net, device)
        rows = [[name, _fmt(rt.read_ms), _fmt(rt.compute_ms), _fmt(rt.write_ms),
                 _fmt(rt.total_ms)] for name, rt in result.layers]
        rows.append(["total", "", "", "", _fmt(result.total_ms)])
        _print_table(["layer", "r_ms", "c_ms", "w_ms", "t_ms"], rows, args.format)
    elif args.family == "energy":
        if not args.energy:
            raise UsageError("--family energy requires --energy")
        spec = analytic.parse_energy_spec(Path(args.energy).read_text())
        accesses = _load_accesses(Path(args.accesses).read_text()) if args.accesses else None
        sparsity = analytic.SparsityInfo(args.sparsity) if args.sparsity is not None else None
        result = analytic.eyeriss_network_energy(net, spec, accesses, sparsity, args.bitwidth)
        rows = [[name, _fmt(e.compute_pj), _fmt(e.data_pj), _fmt(e.total_pj)]
                for name, e in result.layers]
        rows.append(["total", "", "", _fmt(result.total_pj)])
        _print_table(["layer", "e_comp_pj", "e_data_pj", "e_pj"], rows, args.format)
    else:
        raise UsageError(f"unknown family {args.family!r}")
    return EXIT_OK


def _load_accesses(text: str) -> dict[str, analytic.AccessProfile]:
    """Per-layer access overrides: lines `layer_name level count`."""
    counts: dict[str, dict[str, int]] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"accesses line {line_no}: expected 'layer level count'")
        counts.setdefault(parts[0], {})[parts[1]] = int(parts[2])
    return {layer: analytic.AccessProfile(tuple(levels.items()))
            for layer, levels in counts.items()}


def _cmd_compare_reference(args) -> int:
    rows = [[row.network, _fmt(row.paleo_ms), _fmt(row.neuralpower_ms), _fmt(row.actual_ms),
             f"{row.paleo_error_pct:+.2f}", f"{row.neuralpower_error_pct:+.2f}"]
            for row in reference.relative_errors()]
    _print_table(["network", "paleo_ms", "neuralpower_ms", "actual_ms",
                  "paleo_err_pct", "neuralpower_err_pct"], rows, args.format)
    print()
    rows = [[kind, str(size), _fmt(np_rmspe), _fmt(np_rmse), _fmt(p_rmspe), _fmt(p_rmse)]
            for kind, size, np_rmspe, np_rmse, p_rmspe, p_rmse in reference.LAYER_MODELS]
    _print_table(["layer", "np_model_size", "np_rmspe_pct", "np_rmse_ms",
                  "paleo_rmspe_pct", "paleo_rmse_ms"], rows, args.format)
    return EXIT_OK


def _cmd_sample(args) -> int:
    schema = _load_schema(Path(args.schema).read_text())
    points = linmod.offline_sample(schema, args.count, args.seed)
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / "samples.csv"
    lines = [",".join(schema.names)]
    lines += [",".join(str(v) for v in point.z) for point in points]
    out_path.write_text("\n".join(lines) + "\n")
    _write_manifest(out_dir, "sample", [f"count={args.count}"], [Path(args.schema)],
                    [out_path], args.seed)
    print(f"wrote {out_path}")
    return EXIT_OK


def _load_schema(text: str) -> linmod.StructuralSchema:
    doc = json.loads(text)
    dims = doc["dimensions"]
    return linmod.StructuralSchema(tuple(d["name"] for d in dims),
                                   tuple(int(d["lo"]) for d in dims),
                                   tuple(int(d["hi"]) for d in dims))


def _cmd_fit_linear(args) -> int:
    points = linmod.read_profiled_csv(Path(args.profile).read_text())
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    outputs = []
    for target, filename in ((linmod.LinTarget.POWER_W, "linear_power.json"),
                             (linmod.LinTarget.MEMORY_MB, "linear_memory.json")):
        model = linmod.fit_linear(points, target, folds=args.folds, seed=args.seed,
                                  include_bias=args.bias)
        path = out_dir / filename
        path.write_text(linmod.model_to_json(model))
        outputs.append(path)
        mean_cv = sum(model.cv_report) / len(model.cv_report)
        rows.append([target.value,
                     " ".join(_fmt(w) for w in model.weights),
                     _fmt(mean_cv)])
    _print_table(["target", "weights", "mean_cv_rmspe_pct"], rows, args.format)
    _write_manifest(out_dir, "fit-linear", [f"folds={args.folds}", f"bias={args.bias}"],
                    [Path(args.profile)], outputs, args.seed)
    return EXIT_OK


def _load_space(text: str) -> bayesopt.SearchSpace:
    doc = json.loads(text)
    dims = tuple(bayesopt.Dimension(d["name"], d.get("kind", "continuous"),
                                    float(d["lo"]), float(d["hi"]))
                 for d in doc["dimensions"])
    return bayesopt.SearchSpace(dims, tuple(doc.get("structural", ())))


def _cmd_optimize(args) -> int:
    space_path = Path(args.space)
    space = _load_space(space_path.read_text())
    inputs = [space_path]

    constraints = None
    constraint_flags = [args.power_model, args.memory_model, args.power_budget,
                        args.memory_budget]
    if any(flag is not None for flag in constraint_flags):
        if any(flag is None for flag in constraint_flags):
            raise UsageError("constrained runs need --power-model, --memory-model, "
                             "--power-budget and --memory-budget together")
        power_model = linmod.model_from_json(Path(args.power_model).read_text())
        memory_model = linmod.model_from_json(Path(args.memory_model).read_text())
        constraints = bayesopt.ConstraintSpec(args.power_budget, args.memory_budget,
                                              power_model, memory_model)
        inputs += [Path(args.power_model), Path(args.memory_model)]

    center = 0.3
    if args.center:
        values = [float(v) for v in args.center.split(",")]
        center = values[0] if len(values) == 1 else tuple(values)
    objective = build_objective(args.objective, center=center, noise=args.noise,
                                seed=args.seed, command=args.command)

    best, trace = bayesopt.bo_run(objective, space, constraints, args.budget, args.seed,
                                  candidate_count=args.candidates)

    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    trace_path = out_dir / "trace.csv"
    trace_path.write_text(trace.csv_text())
    outputs = [trace_path]

    config_repr = [f"budget={args.budget}", f"objective={args.objective}",
                   f"center={args.center}", f"noise={args.noise}",
                   f"candidates={args.candidates}",
                   f"power_budget={args.power_budget}",
                   f"memory_budget={args.memory_budget}",
                   f"command={args.command}"]
    if best is None:
        summary = {"status": "infeasible", "best_y": None, "best_x": None,
                   "iterations_to_best": None, "budget": args.budget, "seed": args.seed}
        (out_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
        _write_manifest(out_dir, "optimize", config_repr, inputs,
                        outputs + [out_dir / "summary.json"], args.seed)
        print("no feasible point found; full trace written")
        return EXIT_INFEASIBLE

    iterations_to_best = next(r.iteration for r in trace.records
                              if r.best_y is not None and r.best_y == best.y)
    summary = {"status": "ok", "best_y": best.y, "best_x": list(best.x),
               "iterations_to_best": iterations_to_best, "budget": args.budget,
               "seed": args.seed}
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    _write_manifest(out_dir, "optimize", config_repr, inputs,
                    outputs + [out_dir / "summary.json"], args.seed)
    print(f"best y {_fmt(best.y)} at ({', '.join(_fmt(v) for v in best.x)}) "
          f"after {iterations_to_best} evaluations")
    return EXIT_OK


def _build_parser() -> _Parser:
    parser = _Parser(prog="hwcost", description=__doc__)
    parser.add_argument("--version", action="version", version=f"hwcost {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--output-dir", default=".")
        p.add_argument("--format", choices=("table", "csv"), default="table")

    p = sub.add_parser("synth", help="generate a synthetic profiling CSV")
    common(p)
    p.add_argument("--config", help="JSON generator config (defaults built in)")
    p.add_argument("--count", type=int, help="samples per layer kind")
    p.add_argument("--noise", type=float, help="multiplicative noise sigma")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("fit", help="fit polynomial runtime/power models from a profile CSV")
    common(p)
    p.add_argument("profile")
    p.add_argument("--degree", type=int, default=None)
    p.add_argument("--l1", type=float, default=None, help="fixed L1 strength (default: CV)")
    p.add_argument("--folds", type=int, default=10)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("predict", help="predict per-layer and total costs for a network")
    common(p)
    p.add_argument("network")
    p.add_argument("--family", choices=("poly", "paleo", "energy"), required=True)
    p.add_argument("--models-dir")
    p.add_argument("--device")
    p.add_argument("--energy")
    p.add_argument("--accesses", help="per-layer access overrides: 'layer level count' lines")
    p.add_argument("--sparsity", type=float, default=None)
    p.add_argument("--bitwidth", type=int, default=None)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("compare-reference", help="print embedded published comparison tables")
    common(p)
    p.set_defaults(func=_cmd_compare_reference)

    p = sub.add_parser("sample", help="offline-sample structural points from a schema")
    common(p)
    p.add_argument("schema", help="JSON schema: dimensions with name/lo/hi")
    p.add_argument("--count", type=int, default=100)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("fit-linear", help="fit linear power/memory models from a profiled CSV")
    common(p)
    p.add_argument("profile")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--bias", action="store_true", help="append a constant-1 feature")
    p.set_defaults(func=_cmd_fit_linear)

    p = sub.add_parser("optimize", help="run the search loop on an objective")
    common(p)
    p.add_argument("space", help="JSON search space")
    p.add_argument("--objective", choices=("quadratic", "branin", "command"),
                   default="quadratic")
    p.add_argument("--center", help="quadratic center, scalar or comma list")
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--command", nargs=argparse.REMAINDER,
                   help="external objective command (reads x CSV line on stdin)")
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--candidates", type=int, default=bayesopt.DEFAULT_CANDIDATES)
    p.add_argument("--power-model")
    p.add_argument("--memory-model")
    p.add_argument("--power-budget", type=float)
    p.add_argument("--memory-budget", type=float)
    p.set_defaults(func=_cmd_optimize)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except bayesopt.NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (NetworkParseError, ShapeMismatchError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
