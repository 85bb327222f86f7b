"""Command-line experiment runner.

Subcommands map one-to-one onto the studied scenarios: qubit | coherent |
prior-sweep | unequal | dicke | bench.  Each run writes CSV data, a JSON
angle library where one is built, and a PNG figure (suppressed by
--no-plot) into the output directory.  Exit codes: 0 success, 1 bad
configuration, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import classical, plots, protocol, storage


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; configuration errors must be 1
    def error(self, message):
        raise ConfigError(message)


def _add_common(sub):
    sub.add_argument("--out", default="out", help="output directory (created if missing)")
    sub.add_argument("--n-theta", type=int, default=40,
                     help="polar rows of the sampling grid (200 = paper density)")
    sub.add_argument("--jobs", type=int, default=None, help="worker processes")
    sub.add_argument("--no-plot", action="store_true", help="skip PNG rendering")
    sub.add_argument("--config", default=None, help="TOML file with flag defaults")
    sub.add_argument("--prob-weighted-averaging", action="store_true",
                     help="weight circular averages by outcome probability too")
    sub.add_argument("--seed", type=int, default=None,
                     help="reserved; all defaults are deterministic")


def build_parser() -> _Parser:
    parser = _Parser(prog="telespin", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("qubit", help="single-qubit Bell-basis teleportation")
    p.add_argument("--case", default=None, choices=("I", "II", "III"),
                   help="optimization case (required here or in the config file)")
    _add_common(p)

    p = subs.add_parser("coherent", help="N-particle coherent-state teleportation")
    p.add_argument("--scheme", default="su11", choices=("su11", "su2", "not"))
    p.add_argument("--n", type=int, default=10, help="particles per species")
    p.add_argument("--beta", type=float, default=None, help="vMF prior beta (default uniform)")
    p.add_argument("--parameterization", default="two_axis", choices=("euler", "two_axis"))
    _add_common(p)

    p = subs.add_parser("prior-sweep", help="mean fidelity vs prior occupation")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--mean-n", default="0.05,0.1,0.2,0.35,0.5,0.75,1.0,1.5,2.5,4.0",
                   help="comma list of target mean occupations (each < N/2)")
    p.add_argument("--schemes", default="su11,su2,not",
                   help="comma subset of su11,su2,not")
    _add_common(p)

    p = subs.add_parser("unequal", help="unequal particle numbers")
    p.add_argument("--vary", default="a", choices=("a", "b"))
    p.add_argument("--values", default="9,10,11", help="comma list of varied N")
    p.add_argument("--n", type=int, default=10, help="particles in the fixed species")
    _add_common(p)

    p = subs.add_parser("dicke", help="rotated Dicke states through the coherent library")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--levels", default="0,1,2", help="comma list of excitation levels")
    p.add_argument("--library", default=None, help="reuse a saved su11 library")
    _add_common(p)

    p = subs.add_parser("bench", help="classical benchmark curves")
    p.add_argument("--curve", default=None, choices=("fcl", "dicke"),
                   help="which bound to tabulate (required here or in the config file)")
    p.add_argument("--n", type=int, default=10, help="particles (dicke curve)")
    p.add_argument("--mean-n-max", type=float, default=5.0)
    p.add_argument("--points", type=int, default=51)
    _add_common(p)
    return parser


def _apply_config(parser, argv):
    """Two-phase parse: values from --config become defaults, flags override."""
    probe = _Parser(add_help=False)
    probe.add_argument("--config", default=None)
    known, _ = probe.parse_known_args(argv[1:] if argv else None)
    args = parser.parse_args(argv)
    if known.config is None:
        return args
    try:
        with open(known.config, "rb") as fh:
            table = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as err:
        raise ConfigError(f"cannot read config {known.config}: {err}") from err
    valid = set(vars(args))
    explicit = _explicit_dests(argv)
    for key, value in table.items():
        dest = key.replace("-", "_")
        if dest not in valid:
            raise ConfigError(f"unknown config key {key!r}")
        if dest not in explicit:
            setattr(args, dest, value)
    return args


def _explicit_dests(argv):
    toks = argv if argv is not None else sys.argv[1:]
    return {t.lstrip("-").split("=")[0].replace("-", "_") for t in toks if t.startswith("--")}


def _parse_list(text, cast, name):
    try:
        values = [cast(tok) for tok in str(text).split(",") if tok.strip() != ""]
    except ValueError as err:
        raise ConfigError(f"cannot parse {name} list {text!r}: {err}") from err
    if not values:
        raise ConfigError(f"{name} list is empty")
    return values


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _make_scenario(**kwargs) -> protocol.Scenario:
    # scenario invariants are validated before any computation starts
    try:
        return protocol.Scenario(**kwargs)
    except ValueError as err:
        raise ConfigError(str(err)) from err


def _summary_row(scenario, build, report):
    return {
        "scheme": scenario.scheme,
        "case": scenario.case or "",
        "n_a": scenario.n_a,
        "n_b": scenario.n_b,
        "n_c": scenario.n_c,
        "n_theta": scenario.grid.n_theta,
        "grid_points": len(build.inputs),
        "grand_mean": report.grand_mean,
        "benchmark": report.benchmark,
        "fraction_above_benchmark": report.fraction_above_benchmark,
        "unconverged": build.unconverged,
        "missing_entries": report.missing_entries,
    }


def _run_build(scenario, args, stem, out):
    build = protocol.build_library(scenario, jobs=args.jobs)
    report = protocol.evaluate_teleportation(build.library, scenario, inputs=build.inputs)
    storage.emit_csv(report, out / f"{stem}_raw.csv", optimized=storage.optimized_fidelity_map(build))
    storage.write_summary_csv(out / f"{stem}_summary.csv", [_summary_row(scenario, build, report)])
    storage.save_library(build.library, out / f"{stem}_library.json")
    if not args.no_plot:
        plots.render_fidelity_figure(build, report, out / f"{stem}_fidelity.png", title=stem)
    return build, report


def cmd_qubit(args):
    scenario = _make_scenario(
        scheme="qubit", case=args.case, n_a=1, n_b=1, n_c=1,
        grid=protocol.SamplingGrid(args.n_theta),
        prob_weighted_averaging=args.prob_weighted_averaging,
    )
    out = _outdir(args)
    _, report = _run_build(scenario, args, f"qubit_case_{args.case}", out)
    print(f"qubit case {args.case}: grand mean {report.grand_mean:.6f} "
          f"(classical {report.benchmark:.4f})")


def cmd_coherent(args):
    try:
        prior = protocol.Prior.uniform() if args.beta is None else protocol.Prior.vmf(args.beta)
    except ValueError as err:
        raise ConfigError(str(err)) from err
    scenario = _make_scenario(
        scheme=args.scheme, n_a=args.n, n_b=args.n, n_c=args.n,
        parameterization=args.parameterization, prior=prior,
        grid=protocol.SamplingGrid(args.n_theta),
        prob_weighted_averaging=args.prob_weighted_averaging,
    )
    out = _outdir(args)
    stem = f"coherent_{args.scheme}_n{args.n}"
    build, report = _run_build(scenario, args, stem, out)
    print(f"{args.scheme} n={args.n}: {len(build.library)} library entries, "
          f"grand mean {report.grand_mean:.6f} (classical {report.benchmark:.4f})")


def cmd_prior_sweep(args):
    targets = _parse_list(args.mean_n, float, "mean-n")
    schemes = _parse_list(args.schemes, str, "schemes")
    for scheme in schemes:
        if scheme not in ("su11", "su2", "not"):
            raise ConfigError(f"unknown scheme {scheme!r} in --schemes")
    try:
        betas = [classical.vmf_beta_for_mean_occupation(args.n, t) for t in targets]
    except ValueError as err:
        raise ConfigError(str(err)) from err
    out = _outdir(args)
    rows_by_scheme = {}
    for scheme in schemes:
        scenario = _make_scenario(
            scheme=scheme, n_a=args.n, n_b=args.n, n_c=args.n,
            grid=protocol.SamplingGrid(args.n_theta),
            prob_weighted_averaging=args.prob_weighted_averaging,
        )
        build = protocol.build_library(scenario, jobs=args.jobs)
        storage.save_library(build.library, out / f"prior_sweep_{scheme}_library.json")
        rows_by_scheme[scheme] = protocol.sweep_prior(build, betas)
    header = ["beta", "mean_n"] + [f"fidelity_{s}" for s in schemes] + ["f_cl"]
    lines = []
    for k in range(len(betas)):
        any_rows = rows_by_scheme[schemes[0]]
        row = {"beta": any_rows[k]["beta"], "mean_n": any_rows[k]["mean_n"]}
        for s in schemes:
            row[f"fidelity_{s}"] = rows_by_scheme[s][k]["grand_mean"]
        row["f_cl"] = any_rows[k]["f_cl"]
        lines.append({h: row[h] for h in header})
    storage.write_summary_csv(out / "prior_sweep.csv", lines)
    if not args.no_plot:
        plots.render_prior_sweep_figure(rows_by_scheme, out / "prior_sweep.png")
    for s in schemes:
        best = max(r["grand_mean"] for r in rows_by_scheme[s])
        print(f"{s}: best grand mean {best:.6f} over {len(betas)} priors")


def cmd_unequal(args):
    values = _parse_list(args.values, int, "values")
    out = _outdir(args)
    rows = []
    grand = []
    for value in values:
        n_a = value if args.vary == "a" else args.n
        n_b = value if args.vary == "b" else args.n
        scenario = _make_scenario(
            scheme="su11", n_a=n_a, n_b=n_b, n_c=args.n,
            grid=protocol.SamplingGrid(args.n_theta),
            prob_weighted_averaging=args.prob_weighted_averaging,
        )
        build, report = _run_build(
            scenario, args, f"unequal_{args.vary}{value}", out
        )
        rows.append(_summary_row(scenario, build, report))
        grand.append(report.grand_mean)
        print(f"N_{args.vary} = {value}: grand mean {report.grand_mean:.6f}")
    storage.write_summary_csv(out / f"unequal_vary_{args.vary}.csv", rows)
    if not args.no_plot:
        plots.render_unequal_figure(args.vary, values, grand, out / f"unequal_vary_{args.vary}.png")


def cmd_dicke(args):
    levels = _parse_list(args.levels, int, "levels")
    out = _outdir(args)
    scenario = _make_scenario(
        scheme="su11", n_a=args.n, n_b=args.n, n_c=args.n,
        grid=protocol.SamplingGrid(args.n_theta),
        prob_weighted_averaging=args.prob_weighted_averaging,
    )
    if args.library:
        library = storage.load_library(args.library)
        scenario = library.scenario
    else:
        build = protocol.build_library(scenario, jobs=args.jobs)
        library = build.library
        storage.save_library(library, out / "dicke_su11_library.json")
    rows = []
    profiles = []
    benchmarks = {}
    for level in levels:
        benchmark = classical.dicke_classical_fidelity(scenario.n_c, level)
        inputs = protocol.dicke_inputs(scenario, level)
        report = protocol.evaluate_teleportation(library, scenario, inputs=inputs, benchmark=benchmark)
        rows.append({
            "n_excitations": level,
            "grand_mean": report.grand_mean,
            "benchmark": benchmark,
            "fraction_above_classical": report.fraction_above_benchmark,
        })
        thetas = [pt.theta for pt in report.points]
        profiles.append((level, thetas, list(report.per_input_mean)))
        benchmarks[level] = benchmark
        print(f"dicke n={level}: fraction above classical "
              f"{report.fraction_above_benchmark:.3f} (bound {benchmark:.4f})")
    storage.write_summary_csv(out / "dicke_summary.csv", rows)
    if not args.no_plot:
        plots.render_dicke_figure(profiles, benchmarks, out / "dicke_profiles.png")


def cmd_bench(args):
    if args.curve not in ("fcl", "dicke"):
        raise ConfigError(f"bench needs --curve fcl|dicke, got {args.curve!r}")
    out = _outdir(args)
    if args.curve == "fcl":
        if args.points < 2 or args.mean_n_max <= 0:
            raise ConfigError("fcl curve needs points >= 2 and mean-n-max > 0")
        xs = [args.mean_n_max * k / (args.points - 1) for k in range(args.points)]
        curve = classical.fcl_curve(xs)
    else:
        curve = classical.dicke_curve(args.n)
    path = out / f"bench_{args.curve}.csv"
    storage.emit_csv(curve, path)
    if not args.no_plot:
        plots.render_benchmark_figure(curve, out / f"bench_{args.curve}.png")
    print(f"wrote {path}")


_COMMANDS = {
    "qubit": cmd_qubit,
    "coherent": cmd_coherent,
    "prior-sweep": cmd_prior_sweep,
    "unequal": cmd_unequal,
    "dicke": cmd_dicke,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        _COMMANDS[args.command](args)
    except ConfigError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return 1
    except Exception as err:  # noqa: BLE001 - runtime failures map to exit 2
        print(f"error: {err}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
