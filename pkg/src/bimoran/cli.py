"""Command-line interface.

Subcommands: simulate | exact | limit | verify | sweep.  Flags override
values from an optional key=value config file.  Exit codes: 0 success,
1 parameter error, 2 numeric/solver error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import experiments
from .errors import NumericError, ParameterError

_FLAG_HELP = {
    "--n": "population size N",
    "--s": "selection strength (disadvantaged death weight is 1+s)",
    "--a": "initial advantaged fraction",
    "--b": "upper passage fraction in (0, 1]; 1 means fixation",
    "--replicas": "number of Monte-Carlo replicas",
    "--seed": "base seed for all replica streams",
    "--grid": "comma-separated N values for the sweep",
    "--out": "output file path (defaults to stdout)",
    "--format": "output format",
    "--config": "key=value config file; flags override it",
    "--timing": "record wall time in the output rows (breaks byte reproducibility)",
    "--max-steps": "safety cap on simulation steps per replica",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bimoran",
        description="Biparental Moran model with selection: simulation, "
                    "exact absorbing-chain values, and large-N limits.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    descriptions = {
        "simulate": "Monte-Carlo estimate of the fixed-founder weight at fixation",
        "exact": "exact absorbed expectations from the tridiagonal solver",
        "limit": "closed-form large-N limit values",
        "verify": "run the identity suite and report each check",
        "sweep": "exact values over an N grid against the shared limit",
    }
    for name, text in descriptions.items():
        sub = subparsers.add_parser(name, help=text)
        sub.add_argument("--n", type=int, default=None, help=_FLAG_HELP["--n"])
        sub.add_argument("--s", type=float, default=None, help=_FLAG_HELP["--s"])
        sub.add_argument("--a", type=float, default=None, help=_FLAG_HELP["--a"])
        sub.add_argument("--b", type=float, default=None, help=_FLAG_HELP["--b"])
        sub.add_argument("--replicas", type=int, default=None, help=_FLAG_HELP["--replicas"])
        sub.add_argument("--seed", type=int, default=None, help=_FLAG_HELP["--seed"])
        sub.add_argument("--grid", type=str, default=None, help=_FLAG_HELP["--grid"])
        sub.add_argument("--out", type=str, default=None, help=_FLAG_HELP["--out"])
        sub.add_argument("--format", type=str, choices=("csv", "json"), default=None,
                         help=_FLAG_HELP["--format"])
        sub.add_argument("--config", type=str, default=None, help=_FLAG_HELP["--config"])
        sub.add_argument("--timing", action="store_const", const=True, default=None,
                         help=_FLAG_HELP["--timing"])
        sub.add_argument("--max-steps", type=int, default=None, help=_FLAG_HELP["--max-steps"])
    return parser


_TRUE_WORDS = {"1", "true", "yes", "on"}


def _make_config(args: argparse.Namespace) -> experiments.RunConfig:
    file_values: dict[str, str] = {}
    if args.config is not None:
        file_values = experiments.load_config_file(args.config)

    def pick(flag_value, file_key, convert, default):
        if flag_value is not None:
            return flag_value
        if file_key in file_values:
            return convert(file_values[file_key])
        return default

    grid_flag = experiments.parse_grid(args.grid) if args.grid is not None else None
    return experiments.RunConfig(
        command=args.command,
        N=pick(args.n, "n", int, 100),
        s=pick(args.s, "s", float, 1.0),
        a=pick(args.a, "a", float, 0.5),
        b=pick(args.b, "b", float, None),
        replicas=pick(args.replicas, "replicas", int, None),
        base_seed=pick(args.seed, "seed", int, 0),
        grid=pick(grid_flag, "grid", experiments.parse_grid, None),
        out=pick(args.out, "out", str, None),
        fmt=pick(args.format, "format", str, "csv"),
        timing=bool(pick(args.timing, "timing", lambda v: v.lower() in _TRUE_WORDS, False)),
        max_steps=pick(args.max_steps, "max_steps", int, None),
    )


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s",
                        stream=sys.stderr)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _make_config(args)
        if cfg.command == "verify":
            checks, passed = experiments.run_verify(cfg)
            report = "".join(f"{check}\n" for check in checks)
            _emit(report, cfg.out)
            return 0 if passed else 3
        runners = {
            "simulate": experiments.run_simulate,
            "exact": experiments.run_exact,
            "limit": experiments.run_limit,
            "sweep": experiments.run_sweep,
        }
        records = runners[cfg.command](cfg)
        text = (experiments.render_csv(records) if cfg.fmt == "csv"
                else experiments.render_json(records))
        _emit(text, cfg.out)
        return 0
    except ParameterError as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return 1
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
