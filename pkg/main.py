from dotenv import load_dotenv
load_dotenv()

import argparse
import sys
from typing import List, Optional

from services.errors import CfgwcError
from services.export_service import comparison_table
from services.logger_service import log_error, log_info
from services import pipeline_service

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_DOMAIN_ERROR = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cfgwc",
        description="Context-constrained fuzzy geographically weighted clustering",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="Run the full pipeline for a config file")
    run_p.add_argument("config", help="Path to the JSON run configuration")

    cmp_p = sub.add_parser("compare", help="Compare context methods over paired seeds")
    cmp_p.add_argument("config", help="Path to the JSON run configuration")
    cmp_p.add_argument("--seeds", type=int, default=None, help="Number of seeds (default: config compare.seeds)")

    syn_p = sub.add_parser("synth", help="Generate a synthetic geo-demographic dataset")
    syn_p.add_argument("--n-areas", type=int, required=True)
    syn_p.add_argument("--n-clusters", type=int, required=True)
    syn_p.add_argument("--n-features", type=int, default=3)
    syn_p.add_argument("--separation", type=float, default=10.0)
    syn_p.add_argument("--seed", type=int, default=0)
    syn_p.add_argument("-o", "--output", required=True, help="Output CSV path")
    return parser


def _dispatch(args: argparse.Namespace) -> None:
    if args.command == "run":
        summary = pipeline_service.run(args.config)
        log_info("MAIN", f"IFV={summary.ifv.ifv:.6f} iterations={summary.iterations} converged={summary.converged}")
    elif args.command == "compare":
        report = pipeline_service.compare(args.config, seeds=args.seeds)
        print(comparison_table([s.model_dump() for s in report.methods]))
        if report.pairwise_wins:
            for a, row in report.pairwise_wins.items():
                for b, count in row.items():
                    print(f"{a} > {b}: {count}/{len(report.seeds)}")
    elif args.command == "synth":
        pipeline_service.synth(
            args.n_areas, args.n_clusters, args.output,
            n_features=args.n_features, separation=args.separation, seed=args.seed,
        )


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _dispatch(args)
    except CfgwcError as e:
        log_error("MAIN", f"{args.command} failed", e)
        return EXIT_DOMAIN_ERROR
    except Exception as e:
        log_error("UNHANDLED", f"Unexpected failure in {args.command}", e)
        return EXIT_UNEXPECTED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
