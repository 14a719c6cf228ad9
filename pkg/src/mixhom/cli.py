"""Command-line entry point: run single experiments, validate configs, and
run assertion suites.

Configs are flat TOML files; suites are TOML files whose [[runs]] tables
name a config plus per-scalar assertions.  Exit codes: 0 pass, 1 assertion
failure, 2 config error.
"""

from __future__ import annotations

import argparse
import operator
import os
import sys

import tomli

from .experiments import EXPERIMENTS, ConfigError, resolve_config, run_experiment
from .report import emit_report

_OPS = {
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
}


def _out_root(override: str | None) -> str:
    return override or os.environ.get("MIXHOM_OUT", "mixhom-out")


def _load_toml(path: str) -> dict:
    with open(path, "rb") as fh:
        return tomli.load(fh)


def _cmd_run(args) -> int:
    try:
        raw = _load_toml(args.config)
        cfg = resolve_config(raw)
    except (OSError, tomli.TOMLDecodeError, ConfigError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    rep = run_experiment(cfg)
    out_dir = os.path.join(_out_root(args.out), rep.name)
    paths = emit_report(rep, out_dir)
    for key in sorted(rep.scalars):
        print(f"{key} = {rep.scalars[key]!r}")
    for p in paths:
        print(f"wrote {p}")
    return 0


def _cmd_validate(args) -> int:
    try:
        cfg = resolve_config(_load_toml(args.config))
    except (OSError, tomli.TOMLDecodeError, ConfigError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    print(f"ok: experiment {cfg['experiment']!r}")
    return 0


def _cmd_list(_args) -> int:
    for name in sorted(EXPERIMENTS):
        print(name)
    return 0


def _cmd_suite(args) -> int:
    try:
        suite = _load_toml(args.file)
    except (OSError, tomli.TOMLDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    runs = suite.get("runs", [])
    base = os.path.dirname(os.path.abspath(args.file))
    failures = 0
    total = 0
    for entry in runs:
        try:
            cfg_path = entry["config"]
            if not os.path.isabs(cfg_path):
                cfg_path = os.path.join(base, cfg_path)
            raw = _load_toml(cfg_path)
            cfg = resolve_config(raw)
        except (KeyError, OSError, tomli.TOMLDecodeError, ConfigError) as exc:
            print(f"config error in suite entry: {exc}", file=sys.stderr)
            return 2
        rep = run_experiment(cfg)
        out_dir = os.path.join(_out_root(args.out), rep.name)
        emit_report(rep, out_dir)
        for assertion in entry.get("asserts", []):
            try:
                name, op, threshold = assertion
                comparator = _OPS[op]
            except (ValueError, KeyError):
                print(f"config error: malformed assertion {assertion!r}",
                      file=sys.stderr)
                return 2
            if name not in rep.scalars:
                print(f"config error: no scalar {name!r} in {rep.name}",
                      file=sys.stderr)
                return 2
            total += 1
            value = rep.scalars[name]
            ok = comparator(value, float(threshold))
            status = "PASS" if ok else "FAIL"
            print(f"[{status}] {rep.name}: {name} = {value!r} {op} {threshold}")
            if not ok:
                failures += 1
    print(f"{total - failures}/{total} assertions passed")
    return 1 if failures else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mixhom",
        description="Numerical experiments for singular integrals with "
        "mixed isotropic/parabolic homogeneity.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment from a config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None, help="output root directory")
    p_run.set_defaults(fn=_cmd_run)

    p_suite = sub.add_parser("suite", help="run a suite file with assertions")
    p_suite.add_argument("--file", required=True)
    p_suite.add_argument("--jobs", type=int, default=1,
                         help="reserved; experiments run sequentially")
    p_suite.add_argument("--out", default=None)
    p_suite.set_defaults(fn=_cmd_suite)

    p_list = sub.add_parser("list-experiments", help="list experiment names")
    p_list.set_defaults(fn=_cmd_list)

    p_val = sub.add_parser("validate", help="validate a config file")
    p_val.add_argument("--config", required=True)
    p_val.set_defaults(fn=_cmd_validate)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
