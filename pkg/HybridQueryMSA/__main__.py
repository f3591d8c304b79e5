"""
Command line: python -m HybridQueryMSA {run,study,oracle,timing} ...
"""
import argparse
import json
import sys
from typing import List

from .MSAErrors import MSAConfigError, MSASafeEnvError
from .Runner import ExperimentRunner
from .Scenario import FORMATS, STAND_IN_INSTANCES, ScenarioConfig
from .Study import global_studies, run_study
from .Utils import VERSION, configure_logging

TIMING_INSTANCES = ["q4", "q8", "q12", "q16"]

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="HybridQueryMSA",
                                     description="Hybrid query encoded multiple sequence alignment.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    common = argparse.ArgumentParser(add_help=False)
    source = common.add_mutually_exclusive_group()
    source.add_argument("--config", help="scenario YAML file")
    source.add_argument("--instance", choices=sorted(STAND_IN_INSTANCES), help="built-in instance")
    common.add_argument("--seed", type=int, help="run this single seed")
    common.add_argument("--out-dir", help="output directory")
    common.add_argument("--shots", type=int, help="shots per evaluation")
    common.add_argument("--format", choices=FORMATS, help="only write this output format")
    common.add_argument("--workers", type=int, help="parallel seeds")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")

    verbs = parser.add_subparsers(dest="verb", required=True)
    verbs.add_parser("run", parents=[common], help="run a scenario")
    study = verbs.add_parser("study", parents=[common], help="run a named study protocol")
    study.add_argument("--kind", required=True, choices=sorted(global_studies))
    oracle = verbs.add_parser("oracle", parents=[common], help="brute-force minimum and landscape")
    oracle.add_argument("--local", action="store_true", help="also list local minima")
    oracle.add_argument("--feasible-only", action="store_true")
    oracle.add_argument("--landscape", action="store_true", help="write the landscape graph")
    oracle.add_argument("--table", choices=["csv", "npy"], help="write the energy table")
    timing = verbs.add_parser("timing", parents=[common], help="seconds per iteration against qubit count")
    timing.add_argument("--instances", nargs="+", default=TIMING_INSTANCES, choices=sorted(STAND_IN_INSTANCES))
    timing.add_argument("--iterations", type=int, default=5)
    return parser

def overrides_from(args) -> dict:
    overrides = {}
    if args.seed is not None:
        overrides["seeds"] = [args.seed]
    if args.shots is not None:
        overrides["optimizer"] = {"shots": args.shots}
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.out_dir is not None or args.format is not None:
        overrides["outputs"] = {}
        if args.out_dir is not None:
            overrides["outputs"]["dir"] = args.out_dir
        if args.format is not None:
            overrides["outputs"]["formats"] = [args.format]
    return overrides

def load_config(args) -> ScenarioConfig:
    if args.config:
        base = ScenarioConfig.from_file(args.config)
    elif args.instance:
        base = ScenarioConfig({"name": args.instance, "instance": args.instance})
    else:
        raise MSAConfigError(["--config/--instance: a scenario is required"])
    return base.with_overrides(overrides_from(args))

def execute(args, runner: ExperimentRunner):
    if args.verb == "timing":
        configs = [
            ScenarioConfig({"name": f"timing-{name}", "instance": name,
                            "optimizer": {"iterations": args.iterations}}).with_overrides(overrides_from(args))
            for name in args.instances
        ]
        return runner.timing_report(configs)
    config = load_config(args)
    if args.verb == "run":
        return runner.run_scenario(config)
    if args.verb == "study":
        return run_study(args.kind, config, runner)
    return runner.run_oracle(config, local=args.local, feasible_only=args.feasible_only,
                             landscape=args.landscape, table_format=args.table)

def main(argv: List[str]=None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    runner = ExperimentRunner(out_dir=args.out_dir,
                              formats=[args.format] if args.format else None)
    result = runner.safe_env(lambda: execute(args, runner))
    if isinstance(result, MSASafeEnvError):
        exc = result.info
        print(json.dumps(runner.error_record(exc), default=str), file=sys.stderr)
        return 2 if isinstance(exc, MSAConfigError) else 1
    return 0

if __name__ == "__main__":
    sys.exit(main())
