"""Command-line front end.

Verbs:

* ``simulate``   run a replicated Monte Carlo study from a config file.
* ``estimate``   estimate gamma and the outcome mean on a CSV dataset.
* ``impose``     mask a complete CSV with an artificial-missingness model.
* ``bandwidth``  cross-validated kernel bandwidth for a CSV regression.

Exit codes: 0 success, 1 usage/config error, 2 data validation error,
3 numerical failure.  All randomness flows from --seed; ``simulate`` and
``impose`` refuse to run without one.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import configio
from .configio import get_float, get_int, get_list, get_str
from .data import load_csv, validate, write_csv
from .errors import ConfigError, EstimationError
from .gamma import DEFAULT_BRACKET
from .inference import estimate_reports
from .outcome import DesignSpec
from .simulation import (DgpSpec, ImposeModel, StudyConfig, impose_missingness,
                         run_study)
from .smoothing import select_bandwidth_cv

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="semiresp", description=__doc__,
                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp, csv=False, out_required=False):
        sp.add_argument("--config", required=True, help="config file path")
        if csv:
            sp.add_argument("--csv", required=True, help="input CSV path")
        sp.add_argument("--out", required=out_required, default=None,
                        help="output path")
        sp.add_argument("--seed", type=int, default=None, help="RNG seed")
        sp.add_argument("overrides", nargs="*", metavar="key=value",
                        help="config overrides (section.key=value)")

    sp = sub.add_parser("simulate", help="run a Monte Carlo study")
    common(sp)
    sp.add_argument("--workers", type=int, default=None,
                    help="parallel replication workers")

    common(sub.add_parser("estimate", help="estimate on CSV data"), csv=True)
    common(sub.add_parser("impose", help="impose artificial missingness"),
           csv=True, out_required=True)
    common(sub.add_parser("bandwidth", help="select a CV bandwidth"), csv=True)
    return p


def _bracket(cp, section):
    lo = get_float(cp, section, "bracket_lo", DEFAULT_BRACKET[0])
    hi = get_float(cp, section, "bracket_hi", DEFAULT_BRACKET[1])
    return (lo, hi)


def cmd_simulate(args) -> int:
    if args.seed is None:
        raise ConfigError("simulate requires --seed (no silent nondeterminism)")
    cp = configio.read_config(args.config, args.overrides)
    sec = "study"
    dgp = DgpSpec(family=get_str(cp, sec, "family"),
                  model=get_str(cp, sec, "model", "M1"),
                  n=get_int(cp, sec, "n"))
    design = get_list(cp, sec, "design", ())
    config = StudyConfig(
        dgp=dgp,
        estimators=tuple(get_list(cp, sec, "estimators")),
        mu_estimators=tuple(get_list(cp, sec, "mu", ("mu-ipw", "mu-mp", "mu-db"))),
        reps=get_int(cp, sec, "reps"),
        seed=args.seed,
        workers=args.workers if args.workers is not None
        else get_int(cp, sec, "workers", 1),
        compute_ci=get_str(cp, sec, "ci", "true").lower() in ("1", "true", "yes"),
        alpha=get_float(cp, sec, "alpha", 0.05),
        bracket=_bracket(cp, sec),
        design=tuple(design) if design else None,
        s=get_int(cp, sec, "s", 500),
    )
    report = run_study(config)
    table = report.to_table()
    print(table)
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "report.txt").write_text(table + "\n")
        (outdir / "report.jsonl").write_text(report.to_json_lines() + "\n")
    return EXIT_OK


def _load_validated(args, colmap):
    data = load_csv(args.csv, colmap)
    problems = validate(data)
    if problems:
        for v in problems:
            print(str(v), file=sys.stderr)
        return None
    return data


def cmd_estimate(args) -> int:
    cp = configio.read_config(args.config, args.overrides)
    colmap = configio.column_map(cp, require_delta=False)
    data = _load_validated(args, colmap)
    if data is None:
        return EXIT_VALIDATION
    sec = "estimate"
    estimators = get_list(cp, sec, "estimators", ("p-ca1",)) if cp.has_section(sec) \
        else ["p-ca1"]
    mu_ids = get_list(cp, sec, "mu", ("mu-db",)) if cp.has_section(sec) else ["mu-db"]
    design_terms = get_list(cp, sec, "design", ()) if cp.has_section(sec) else ()
    bandwidth = None
    if cp.has_option(sec, "bandwidth"):
        raw = get_str(cp, sec, "bandwidth")
        if raw == "cv":
            cont = [j for j, k in enumerate(colmap.x1_kinds) if not k.is_discrete]
            if not cont:
                raise ConfigError("bandwidth=cv needs a continuous x1 coordinate")
            bandwidth = select_bandwidth_cv(data.x1_mat[:, cont],
                                            data.delta.astype(float)).h
        else:
            bandwidth = float(raw)
    alpha = get_float(cp, sec, "alpha", 0.05) if cp.has_section(sec) else 0.05
    s = get_int(cp, sec, "s", 500) if cp.has_section(sec) else 500
    rng = np.random.default_rng(0 if args.seed is None else args.seed)
    reports = estimate_reports(
        data, estimators, mu_ids, alpha=alpha,
        bracket=_bracket(cp, sec) if cp.has_section(sec) else DEFAULT_BRACKET,
        design=DesignSpec.parse(design_terms) if design_terms else None,
        s=s, rng=rng, bandwidth=bandwidth)
    payload = json.dumps([r.to_json_dict() for r in reports], indent=2)
    if args.out:
        Path(args.out).write_text(payload + "\n")
    else:
        print(payload)
    return EXIT_OK


def cmd_impose(args) -> int:
    if args.seed is None:
        raise ConfigError("impose requires --seed (no silent nondeterminism)")
    cp = configio.read_config(args.config, args.overrides)
    colmap = configio.column_map(cp)
    if not colmap.delta:
        colmap.delta = "delta"
    data = _load_validated(args, colmap)
    if data is None:
        return EXIT_VALIDATION
    sec = "impose"
    name = get_str(cp, sec, "model", "M1")
    gamma = get_float(cp, sec, "gamma", -1.0)
    model = ImposeModel.named(name, None if gamma == -1.0 else gamma)
    rng = np.random.default_rng(args.seed)
    masked = impose_missingness(data, model, rng)
    write_csv(args.out, masked, colmap)
    kept = int(masked.resp_mask.sum())
    print(f"wrote {args.out}: {kept}/{masked.n} respondents "
          f"({1 - kept / masked.n:.1%} missing)")
    return EXIT_OK


def cmd_bandwidth(args) -> int:
    cp = configio.read_config(args.config, args.overrides)
    colmap = configio.column_map(cp)
    data = _load_validated(args, colmap)
    if data is None:
        return EXIT_VALIDATION
    target = get_str(cp, "bandwidth", "target", "delta") \
        if cp.has_section("bandwidth") else "delta"
    cont = [j for j, k in enumerate(colmap.x1_kinds) if not k.is_discrete]
    if not cont:
        raise ConfigError("bandwidth selection needs a continuous x1 coordinate")
    x = data.x1_mat[:, cont]
    if target == "delta":
        z = data.delta.astype(float)
    elif target == "y":
        x = x[data.resp_mask]
        z = data.y_resp
    else:
        raise ConfigError(f"unknown bandwidth target {target!r} (delta or y)")
    bw = select_bandwidth_cv(x, z)
    payload = json.dumps({"bandwidth": bw.h, "target": target})
    if args.out:
        Path(args.out).write_text(payload + "\n")
    else:
        print(payload)
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "estimate": cmd_estimate,
            "impose": cmd_impose, "bandwidth": cmd_bandwidth}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.verb](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EstimationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
