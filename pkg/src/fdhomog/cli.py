"""Command-line interface: ``fdhomog <subcommand> ...``.

Exit status is 0 whenever the requested computation completes, whatever
the test verdict; 1 on invalid input or failed computation; 2 on bad
usage.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from importlib import resources
from pathlib import Path

from . import __version__
from .curves import ModelSpec, load_sample_csv, make_grid, simulate_sample, split_by_label, write_sample_csv
from .ddplot import DEFAULT_NULL_SCHEME, NULL_SCHEMES, DDPlotTest, build_ddplot
from .depth import make_depth
from .flores import FloresTest
from .plot import ddplot_svg
from .sim import builtin_model, load_experiment_file, parse_experiment, run_experiments

BUILTIN_SPECS = ("table1",)


class CliError(Exception):
    pass


def _depth_from_args(args):
    if args.method == "rp":
        return make_depth("rp", n_projections=args.projections, direction_seed=args.direction_seed)
    if args.method == "fd2":
        budget = args.pair_budget
        if budget is not None and budget != "all":
            budget = int(budget)
        return make_depth("fd2", pair_budget=budget, pair_seed=args.pair_seed)
    return make_depth("fm")


def _load_pair(args):
    a = load_sample_csv(args.file_a)
    if args.label is not None:
        if args.file_b is not None:
            raise CliError("give either a second file or --label, not both")
        return split_by_label(a, args.label)
    if args.file_b is None:
        raise CliError("a second file (or --label to split the first) is required")
    return a, load_sample_csv(args.file_b)


def cmd_simulate(args):
    if args.model is not None:
        try:
            spec = builtin_model(args.model)
        except ValueError:
            raise CliError(f"unknown model {args.model}; built-in models are 0-5") from None
    else:
        spec = ModelSpec(args.mean, args.delta, args.amp, args.rate)
    grid = make_grid(args.a, args.b, args.grid)
    sample = simulate_sample(spec, args.n, grid, args.seed)
    write_sample_csv(sample, args.out)
    return 0


def cmd_depth(args):
    ev = load_sample_csv(args.eval_file)
    ref = load_sample_csv(args.reference_file)
    depth = _depth_from_args(args).fit(ref)
    values = depth.score_samples(ev)
    out = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        if args.format == "json":
            json.dump({"method": depth.method, "reference_size": ref.n, "values": values.tolist()}, out)
            out.write("\n")
        else:
            writer = csv.writer(out, lineterminator="\n")
            writer.writerow(["index", "label", "depth"])
            for i, v in enumerate(values):
                label = ev.labels[i] if ev.labels is not None else ""
                writer.writerow([i, label, format(float(v), ".17g")])
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_test(args):
    f, g = _load_pair(args)
    if args.method == "flores":
        test = FloresTest("fm", args.alpha, args.num_boot, args.seed)
    else:
        test = DDPlotTest(_depth_from_args(args), args.alpha, args.num_boot, args.null_scheme, args.seed)
    result = test.fit(f, g).result_
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            if args.format == "csv":
                data = result.to_dict()
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(list(data))
                writer.writerow(["" if v is None else v for v in data.values()])
            else:
                fh.write(result.to_json(indent=2) + "\n")
    print(result.verdict)
    return 0


def cmd_ddplot(args):
    f, g = _load_pair(args)
    dd = build_ddplot(f, g, _depth_from_args(args))
    name_f = args.name_a or (args.label if args.label is not None else Path(args.file_a).stem)
    name_g = args.name_b or (f"not {args.label}" if args.label is not None else Path(args.file_b).stem)
    Path(args.out).write_text(ddplot_svg(dd, name_f, name_g), encoding="utf-8")
    return 0


def _load_specs(path_or_name, replications):
    if path_or_name in BUILTIN_SPECS:
        text = resources.files("fdhomog").joinpath("data", f"{path_or_name}.json").read_text("utf-8")
        obj = json.loads(text)
        if replications is not None:
            obj["replications"] = replications
        return parse_experiment(obj)
    if replications is None:
        return load_experiment_file(path_or_name)
    with open(path_or_name, encoding="utf-8") as fh:
        obj = json.load(fh)
    obj["replications"] = replications
    return parse_experiment(obj)


def cmd_experiment(args):
    specs = _load_specs(args.spec, args.replications)
    table = run_experiments(specs, n_jobs=args.threads)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.format == "json":
        (out / "power_table.json").write_text(table.to_json() + "\n", encoding="utf-8")
    else:
        (out / "power_table.csv").write_text(table.to_csv(), encoding="utf-8")
    (out / "summary.json").write_text(json.dumps(table.summary(), indent=2) + "\n", encoding="utf-8")
    for test, entry in table.summary().items():
        parts = [f"{k}={v:.3f}" if isinstance(v, float) else f"{k}={v}" for k, v in entry.items()]
        print(f"{test}: " + " ".join(parts))
    return 0


def _add_depth_flags(p, methods=("fm", "rp", "fd2")):
    p.add_argument("--method", choices=methods, default="fd2")
    p.add_argument("--projections", type=int, default=50, help="RP depth: number of directions")
    p.add_argument("--direction-seed", type=int, default=0, help="RP depth: direction seed")
    p.add_argument("--pair-budget", default=None, help="FD2 depth: 'all' or a number of grid pairs")
    p.add_argument("--pair-seed", type=int, default=0, help="FD2 depth: pair subset seed")


def _add_pair_inputs(p):
    p.add_argument("file_a", help="curve CSV for the first sample (F)")
    p.add_argument("file_b", nargs="?", help="curve CSV for the second sample (G)")
    p.add_argument("--label", help="split file_a on this label instead of reading file_b")


def build_parser():
    parser = argparse.ArgumentParser(prog="fdhomog", description="Depth-based homogeneity tests for functional data.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate curves from a Gaussian-process model")
    p.add_argument("--model", type=int, help="built-in model id (0-5)")
    p.add_argument("--mean", choices=("peak32", "peak12"), default="peak32")
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--amp", type=float, default=0.3)
    p.add_argument("--rate", type=float, default=3.33)
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--grid", type=int, default=30, help="number of grid points")
    p.add_argument("--a", type=float, default=0.0, help="grid start")
    p.add_argument("--b", type=float, default=1.0, help="grid end")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("depth", help="depth of each curve of one file in another")
    p.add_argument("eval_file")
    p.add_argument("reference_file")
    _add_depth_flags(p)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_depth)

    p = sub.add_parser("test", help="homogeneity test of two curve files")
    _add_pair_inputs(p)
    _add_depth_flags(p, ("fm", "rp", "fd2", "flores"))
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--B", "--num-boot", dest="num_boot", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--null-scheme", choices=NULL_SCHEMES, default=DEFAULT_NULL_SCHEME)
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--out")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("ddplot", help="render a DD-plot to SVG")
    _add_pair_inputs(p)
    _add_depth_flags(p)
    p.add_argument("--name-a")
    p.add_argument("--name-b")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ddplot)

    p = sub.add_parser("experiment", help="run a size/power experiment from a JSON spec")
    p.add_argument("spec", help="spec file, or the name of a shipped spec (table1)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--replications", type=int, help="override the replication count in the spec file")
    p.add_argument("--threads", type=int, help="worker threads (default: FDHOMOG_THREADS or all cores)")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (CliError, ValueError, OSError) as exc:
        print(f"fdhomog {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
