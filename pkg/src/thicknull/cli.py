"""Command line front end: ``thicknull {run, alpha-sweep, fit-prior, verify}``.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from . import analytics, report
from .numerics import DomainError
from .priors import DegenerateDataError, InsufficientDataError
from .simulation import run_study

log = logging.getLogger("thicknull")

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_IO = 3


def _resolve(args) -> report.RunConfig:
    cfg = report.load_config(args.config) if args.config else report.RunConfig()
    scenario = cfg.scenario
    if args.seed is not None:
        scenario = dataclasses.replace(scenario, seed=args.seed)
    if args.cases is not None:
        scenario = dataclasses.replace(scenario, cases=args.cases)
    cfg.scenario = scenario
    if args.output is not None:
        cfg.output_dir = Path(args.output)
    return cfg


def _outdir(path: Path) -> Path:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {path}: {exc.strerror}") from exc
    return path


def _study(cfg: report.RunConfig):
    log.info("simulating %d cases (seed %d, %s)", cfg.scenario.cases, cfg.scenario.seed, cfg.scenario.mu_law)
    return run_study(cfg.scenario, cfg.methods, cfg.thick_priors, cfg.decision, cfg.quadrature,
                     workers=cfg.workers)


def cmd_run(args) -> int:
    cfg = _resolve(args)
    out = _outdir(cfg.output_dir)
    results = _study(cfg)
    files = report.write_tables(results, out, cfg.jitter_seed)
    if cfg.emit_raw_cases:
        files.append(report.write_raw_cases(results, out / "raw_cases.csv"))
    report.write_manifest(cfg, out, files, "run")
    print((out / "table3_error_rates.txt").read_text(), end="")
    log.info("wrote %d files to %s", len(files) + 1, out)
    return EXIT_OK


def cmd_alpha_sweep(args) -> int:
    cfg = _resolve(args)
    out = _outdir(cfg.output_dir)
    results = _study(cfg)
    sweep = analytics.alpha_sweep(results, cfg.alphas())
    path = report.write_alpha_sweep(sweep, out / "alpha_sweep.csv")
    report.write_manifest(cfg, out, [path], "alpha-sweep")
    log.info("wrote %s", path)
    return EXIT_OK


def cmd_fit_prior(args) -> int:
    effects = report.read_effect_sizes(args.effects)
    desc = report.prior_description(effects, tuple(args.bounds), inclusive=args.inclusive, source=str(args.effects))
    out = Path(args.output) if args.output else Path("prior.json")
    if out.parent != Path(""):
        _outdir(out.parent)
    try:
        out.write_text(json.dumps(desc, indent=2) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {out}: {exc.strerror}") from exc
    tn = desc["truncated_normal"]
    print(f"kept {desc['n_used']} of {desc['n_total']} effect sizes in {desc['bounds']}")
    print(f"truncated normal: location={tn['location']:.6g} scale={tn['scale']:.6g}")
    print(f"kde bandwidth: {desc['kde']['bandwidth']:.6g}")
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = _resolve(args)
    reference = report.load_reference(args.reference)
    results = _study(cfg)
    scenario = "main" if cfg.scenario.mu_law == "integer-uniform" else "normal"
    checks = report.compare_reference(results, reference, scenario, cfg.scenario.cases, cfg.jitter_seed)
    for c in checks:
        print(c.line())
    passed = sum(c.status == "pass" for c in checks)
    failed = sum(c.status == "fail" for c in checks)
    skipped = sum(c.status == "skip" for c in checks)
    print(f"{passed} passed, {failed} failed, {skipped} skipped")
    if failed or not passed:
        return EXIT_VERIFY_FAILED
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thicknull", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=Path, help="YAML run configuration")
        p.add_argument("--seed", type=int, help="override the scenario seed")
        p.add_argument("--cases", type=int, help="override the number of cases")
        p.add_argument("--output", type=Path, help="output directory")

    p = sub.add_parser("run", help="simulate and write tables 1-4")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("alpha-sweep", help="false/true positive rates over an alpha grid")
    common(p)
    p.set_defaults(func=cmd_alpha_sweep)

    p = sub.add_parser("fit-prior", help="fit truncated-normal and KDE priors to effect sizes")
    p.add_argument("effects", type=Path, help="single-column CSV of effect sizes")
    p.add_argument("--bounds", type=float, nargs=2, default=(-0.2, 0.2), metavar=("LO", "HI"))
    p.add_argument("--inclusive", action="store_true", help="keep effects equal to a bound")
    p.add_argument("--output", type=Path, help="prior description file (default prior.json)")
    p.set_defaults(func=cmd_fit_prior)

    p = sub.add_parser("verify", help="compare a run against reference table values")
    common(p)
    p.add_argument("--reference", type=Path, help="reference CSV (default: shipped published table values)")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (report.ConfigError, DomainError, InsufficientDataError, DegenerateDataError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
