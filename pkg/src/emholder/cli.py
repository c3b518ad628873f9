"""Command-line experiment runner.

Subcommands: figure1, rates, holder-sweep, bounds-table, mc-euler,
check-coeffs, gronwall-demo.  Configuration comes from an optional JSON
file (--config) overridden by flags; the seed is always explicit (no
wall-clock seeding).  Exit codes: 0 success, 1 acceptance failure,
2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import re
import sys

from . import experiments
from .exceptions import ConfigError, EmHolderError
from .models import CoefficientModel, builtin, model_from_json

EXPERIMENTS = ("figure1", "rates", "holder-sweep", "bounds-table", "mc-euler",
               "check-coeffs", "gronwall-demo")

_MODEL_SHORTHAND = re.compile(r"^(?P<name>[a-z_]+)(?:\((?P<args>[^)]*)\))?$")


def parse_model_flag(text: str) -> CoefficientModel:
    """Model from shorthand: arctan_tan, gbm(0.05,0.2), constant(0.3,0.7)."""
    match = _MODEL_SHORTHAND.match(text.strip())
    if not match:
        raise ConfigError(f"cannot parse model {text!r}", field="model")
    name = match.group("name")
    args = [a for a in (match.group("args") or "").split(",") if a.strip()]
    try:
        if name == "arctan_tan":
            return builtin("arctan_tan")
        if name == "gbm":
            lam, xi = (float(a) for a in args)
            return builtin("gbm", lam=lam, xi=xi)
        if name == "constant":
            mu0, sigma0 = (float(a) for a in args)
            return builtin("constant", mu0=mu0, sigma0=sigma0)
    except (ValueError, TypeError) as err:
        raise ConfigError(f"bad parameters in model {text!r}: {err}", field="model") from err
    raise ConfigError(f"unknown model {name!r}", field="model")


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as handle:
            data = json.load(handle)
    except OSError as err:
        raise ConfigError(f"cannot read config file: {err}", field="config") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"config is not valid JSON: {err}", field="config") from err
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object", field="config")
    return data


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emholder",
        description="Coupled Euler-Maruyama error experiments with Holder-norm statistics")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="JSON config file")
        p.add_argument("--seed", type=int, default=None, help="master seed")
        p.add_argument("--samples", type=int, default=None, help="Monte Carlo samples")
        p.add_argument("--out", default=None, help="CSV output path")
        p.add_argument("--threads", type=int, default=None, help="worker threads")
        p.add_argument("--model", default=None,
                       help="model shorthand, e.g. gbm(0.05,0.2)")
    return parser


_ALLOWED_KEYS = {
    "figure1": {"samples", "seed", "threads", "levels", "p", "x"},
    "rates": {"samples", "seed", "threads", "levels", "p", "x"},
    "holder-sweep": {"samples", "seed", "threads", "p", "s_values", "t_values",
                     "x_values", "n_values"},
    "bounds-table": {"samples", "seed", "threads"},
    "mc-euler": {"samples", "seed", "threads", "p", "levels", "x", "y"},
    "check-coeffs": {"trials", "seed"},
    "gronwall-demo": {"step", "seed"},
}


def _assemble_kwargs(name: str, config: dict, args) -> tuple[CoefficientModel | None, dict]:
    merged = dict(config)
    merged.pop("experiment", None)
    model_spec = merged.pop("model", None)
    out = merged.pop("out", None)  # handled by the caller
    del out
    if args.seed is not None:
        merged["seed"] = args.seed
    if args.samples is not None:
        merged["samples" if name != "check-coeffs" else "trials"] = args.samples

    if args.threads is not None:
        merged["threads"] = args.threads

    model: CoefficientModel | None = None
    if args.model is not None:
        model = parse_model_flag(args.model)
    elif model_spec is not None:
        try:
            model = (parse_model_flag(model_spec) if isinstance(model_spec, str)
                     else model_from_json(model_spec))
        except EmHolderError:
            raise
        except Exception as err:
            raise ConfigError(f"bad model config: {err}", field="model") from err

    allowed = _ALLOWED_KEYS[name]
    unknown = set(merged) - allowed
    if unknown:
        raise ConfigError(f"unknown option(s) for {name}: {sorted(unknown)}",
                          field="config")
    if "levels" in merged:
        merged["levels"] = [int(v) for v in merged["levels"]]
    return model, merged


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    name = args.experiment
    try:
        config = load_config(args.config)
        model, kwargs = _assemble_kwargs(name, config, args)
        result = experiments.run_named(name, model, **kwargs)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except TypeError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except EmHolderError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2

    out_path = args.out or (args.config and load_config(args.config).get("out")) \
        or f"{name}.csv"
    experiments.write_csv(out_path, result.rows)
    print(f"wrote {len(result.rows)} row(s) to {out_path}")
    for line in result.summary:
        print(line)
    return 0 if result.passed else 1


if __name__ == "__main__":
    sys.exit(main())
