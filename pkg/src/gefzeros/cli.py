"""Command line entry point: ``gefzeros <subcommand> [flags]``.

Settings come from defaults, then an optional JSON ``--config`` file, then
explicit flags.  Exit codes: 0 ok, 2 failed precondition, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .experiments import (CampaignConfig, Experiment, PreconditionError, run_campaign,
                          run_experiment)
from .gaussian_core import SeedLineage, VarianceProfile, sample_coefficients
from .series import truncation_order

EXIT_OK, EXIT_PRECONDITION, EXIT_NUMERIC = 0, 2, 3

_SUBCOMMANDS = {
    "count": Experiment.COUNT,
    "mean-check": Experiment.MEAN_CHECK,
    "variance-scan": Experiment.VARIANCE_SCAN,
    "clt-check": Experiment.CLT_CHECK,
    "tail-scan": Experiment.TAIL_SCAN,
    "jlm-fit": Experiment.JLM_FIT,
    "bounds-suite": Experiment.BOUNDS_SUITE,
    "lemma-suite": Experiment.LEMMA_SUITE,
    "ai-demo": Experiment.DEMO_SUITE,
    "lattice": Experiment.LATTICE,
}


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with CampaignConfig fields")
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--R", type=float, nargs="+")
    p.add_argument("--alpha", type=float, nargs="+")
    p.add_argument("--out", help="output base path; writes .csv, .json and .manifest.json")
    p.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="stdout format when --out is not given")
    p.add_argument("--threads", type=int)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gefzeros", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("sample", help="print one coefficient sample as JSON")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--index", type=int, default=0)
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--R", type=float, help="radius to certify (planner picks K)")
    g.add_argument("--K", type=int)
    sp.add_argument("--profile", help="profile JSON, default constant_one")
    sp.add_argument("--out")

    for name in _SUBCOMMANDS:
        p = sub.add_parser(name)
        _common(p)
        if name == "tail-scan":
            p.add_argument("--method", choices=("mc", "is"))
            p.add_argument("--c", type=float, help="deficit constant for --method is")
            p.add_argument("--defensive", type=float,
                           help="fraction of untilted samples for --method is")
        if name == "jlm-fit":
            p.add_argument("--table", help="tail-scan CSV or JSON")
            p.add_argument("--sign", choices=("excess", "deficit", "both"))
        if name == "ai-demo":
            p.add_argument("--centers", help='JSON list of [x, y] pairs')
            p.add_argument("--r", type=float)
            p.add_argument("--rho", type=float)
            p.add_argument("--A", type=float)
        if name == "lattice":
            p.add_argument("--nu", type=float)
        if name == "lemma-suite":
            p.add_argument("--instances", type=int)
            p.add_argument("--matrices", type=int)
        if name == "count":
            p.add_argument("--profile", help="profile JSON, default constant_one")
    return ap


def _config_from_args(args) -> CampaignConfig:
    d = {}
    if args.config:
        with open(args.config) as fh:
            d.update(json.load(fh))
    d["experiment"] = _SUBCOMMANDS[args.command].value
    flags = {"master_seed": args.seed, "n_samples": args.samples, "R_list": args.R,
             "alpha_list": args.alpha, "output_path": args.out, "threads": args.threads}
    d.update({k: v for k, v in flags.items() if v is not None})
    opts = dict(d.get("options") or {})
    extra = {
        "method": getattr(args, "method", None), "c": getattr(args, "c", None),
        "defensive": getattr(args, "defensive", None), "table": getattr(args, "table", None),
        "sign": getattr(args, "sign", None), "r": getattr(args, "r", None),
        "rho": getattr(args, "rho", None), "A": getattr(args, "A", None),
        "nu": getattr(args, "nu", None), "n_instances": getattr(args, "instances", None),
        "n_matrices": getattr(args, "matrices", None),
    }
    if getattr(args, "centers", None):
        extra["centers"] = json.loads(args.centers)
    if getattr(args, "profile", None):
        extra["profile"] = json.loads(args.profile)
    opts.update({k: v for k, v in extra.items() if v is not None})
    d["options"] = opts
    return CampaignConfig.from_dict(d)


def _sample(args) -> int:
    prof = VarianceProfile.from_json(args.profile) if args.profile else VarianceProfile.constant()
    if args.K is not None:
        if args.K < 0:
            print("error: K must be non-negative", file=sys.stderr)
            return EXIT_PRECONDITION
        K = args.K
    else:
        R = 1.0 if args.R is None else args.R
        if not R > 0:
            print("error: R must be positive", file=sys.stderr)
            return EXIT_PRECONDITION
        K = truncation_order(max(R, 1.0))
    try:
        s = sample_coefficients(prof, K, SeedLineage(args.seed).child(args.index))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    text = s.to_json() + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "sample":
        return _sample(args)
    try:
        config = _config_from_args(args)
    except (ValueError, TypeError, OSError) as exc:
        print(f"error: bad configuration: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    if config.output_path:
        status, manifest = run_campaign(config)
        if status:
            print(f"error: {manifest.get('error')}", file=sys.stderr)
        else:
            print(f"wrote {manifest['rows']} rows to {config.output_path}.csv/.json")
        return status
    try:
        table = run_experiment(config)
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (ArithmeticError, FloatingPointError, AssertionError) as exc:
        print(f"error: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    sys.stdout.write(table.to_json() if args.format == "json" else table.to_csv())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
