"""Command-line front end.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .errors import ConfigError, DataError, ScenvalError
from .ingest import save_scenario_csv
from .report import VALIDATORS, ValidationConfig, ValidatorError, run_validation
from .synthetic import GeneratorSpec, Kind, as_scenario_set, generate

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3

logger = logging.getLogger("scenval")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_common(p):
    p.add_argument("--reference", help="reference scenario CSV (one scenario per row)")
    p.add_argument("--candidate", help="candidate scenario CSV")
    p.add_argument("--dt-hours", type=float, help="sampling interval in hours")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int, help="seed for the ACF example selection")
    p.add_argument("--config", help="JSON configuration file; flags override it")
    p.add_argument("--no-plots", action="store_true", help="write CSV and JSON only")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="scenval", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"scenval {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("validate", help="run all (or selected) validators")
    _add_common(v)
    v.add_argument("--validators", help=f"comma-separated subset of {','.join(VALIDATORS)}")
    for name in VALIDATORS:
        _add_common(sub.add_parser(name, help=f"run only the {name} validator"))

    s = sub.add_parser("synthesize", help="write a synthetic scenario CSV")
    s.add_argument("--kind", required=True, choices=[k.value for k in Kind
                                                     if k is not Kind.QUANTIZED_COPY])
    s.add_argument("--n", type=int, required=True, help="total number of samples")
    s.add_argument("--scenario-len", type=int, default=96)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--dt-hours", type=float, default=0.25)
    s.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                   help="generator parameter, e.g. phi=0.8 (repeatable)")
    s.add_argument("--decimals", type=int, help="round the output to this many decimals")
    s.add_argument("--out", required=True, help="output CSV path")
    s.add_argument("-v", "--verbose", action="store_true")
    return parser


def _config_from_args(args) -> ValidationConfig:
    data = {}
    base = None
    if args.config:
        path = Path(args.config)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must contain a JSON object")
        base = path.parent
        for key in ("reference_csv", "candidate_csv", "output_dir"):
            if key in data and not Path(data[key]).is_absolute():
                data[key] = str(base / data[key])
    overrides = {
        "reference_csv": args.reference, "candidate_csv": args.candidate,
        "dt_hours": args.dt_hours, "output_dir": args.out, "seed": args.seed,
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    if args.no_plots:
        data["emit_plots"] = False
    if args.command in VALIDATORS:
        data["validators"] = [args.command]
    elif getattr(args, "validators", None):
        data["validators"] = [v.strip() for v in args.validators.split(",") if v.strip()]
    for key in ("reference_csv", "candidate_csv"):
        if not data.get(key):
            raise ConfigError(f"--{key.split('_')[0]} is required")
    return ValidationConfig.from_dict(data)


def _parse_params(items):
    params = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--param expects KEY=VALUE, got {item!r}")
        try:
            params[key.strip()] = float(value)
        except ValueError as exc:
            raise ConfigError(f"parameter {key!r} must be numeric") from exc
    return params


def _synthesize(args):
    spec = GeneratorSpec(args.kind, args.n, args.seed, _parse_params(args.param), args.dt_hours)
    if args.decimals is not None:
        spec = GeneratorSpec(Kind.QUANTIZED_COPY, args.n, args.seed,
                             {"decimals": args.decimals, "source": spec}, args.dt_hours)
    scenarios, truncated = as_scenario_set(generate(spec), args.scenario_len, args.kind)
    if truncated:
        logger.warning("dropped %d trailing samples that do not fill a scenario", truncated)
    save_scenario_csv(scenarios, args.out)
    print(f"wrote {scenarios.n_scenarios} x {scenarios.scenario_len} scenarios to {args.out}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "synthesize":
            _synthesize(args)
            return EXIT_OK
        cfg = _config_from_args(args)
        bundle = run_validation(cfg)
    except ConfigError as exc:
        print(f"scenval: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValidatorError as exc:
        code = EXIT_USAGE if isinstance(exc.cause, ConfigError) else EXIT_DATA
        print(f"scenval: {exc}", file=sys.stderr)
        return code
    except (DataError, OSError) as exc:
        print(f"scenval: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ScenvalError as exc:
        print(f"scenval: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001 - mapped to the internal-error exit code
        logger.exception("internal error")
        print(f"scenval: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    for w in bundle.warnings:
        print(f"warning [{w['source']}] {w['message']}", file=sys.stderr)
    print(f"results written to {cfg.output_dir}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
