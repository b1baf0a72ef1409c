"""Command-line application for sinkhorn-lab"""
import argparse
import logging
import sys

from experiments.config import ExperimentConfig
from experiments.runner import ExperimentRunner
from theory.rates import CERTIFICATE_COLUMNS, SETTING_PARAMS, SETTINGS, default_catalog_sweep, rate_catalog
from utils.errors import ConfigError, SinkhornLabError
from utils.io import render_csv, write_csv
from utils.logger import setup_logger

logger = logging.getLogger(__name__)

__version__ = "0.1.0"

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

PARAM_HELP = {
    "sigma_norm": "operator norm of the cost matrix Σ",
    "alpha": "strong log-concavity constant",
    "beta": "upper Hessian bound of U_ν",
    "L": "weak log-concavity / curvature defect",
    "R": "radius of the support (compact) or of the inner ball (light tails)",
    "g": "gradient bound of the cost (alias of R for compact)",
    "H": "upper cost Hessian bound",
    "h": "lower cost Hessian bound",
    "G": "gradient bound of the cost",
    "lip": "Lipschitz constant of the cost",
    "C_rho": "log-Sobolev constant of ρ",
    "delta": "δ of the sphere cost or the tail exponent",
    "C": "tail constant",
    "K": "user-supplied semiconcavity constant (heavy tails)",
}


class SinkhornLab:
    """Dispatches the run, predict, catalog and version subcommands"""

    def __init__(self):
        self.parser = self.build_parser()

    def build_parser(self):
        parser = argparse.ArgumentParser(prog="sinkhorn-lab",
                                         description="Entropic OT verification campaigns and rate certificates")
        parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
        sub = parser.add_subparsers(dest="command", required=True)

        run = sub.add_parser("run", help="run a verification campaign from a JSON config")
        run.add_argument("--config", required=True, help="path to the experiment config")
        run.add_argument("--out", help="output directory (overrides output_dir)")
        run.add_argument("--seed", type=int, help="master seed (overrides seed)")
        run.add_argument("--jobs", type=int, default=1, help="cells run concurrently")
        run.add_argument("--plots", action="store_true", help="write KL-vs-iteration SVG plots")

        predict = sub.add_parser("predict", help="print the rate certificate of one setting")
        predict.add_argument("--setting", required=True, choices=sorted(SETTINGS))
        predict.add_argument("--tau", type=float, required=True, help="transport-inequality constant τ")
        predict.add_argument("--eps", type=float, required=True, help="regularization ε")
        for name, text in PARAM_HELP.items():
            predict.add_argument(f"--{name}", type=float, dest=name, help=text)

        catalog = sub.add_parser("catalog", help="certificates for every setting over a default (τ, ε) sweep")
        catalog.add_argument("--out", help="CSV path; printed to stdout when omitted")

        sub.add_parser("version", help="print the version")
        return parser

    def run(self, args):
        print("\n" + "=" * 50)
        print("Sinkhorn-Lab verification run")
        print("=" * 50)
        config = ExperimentConfig.from_file(args.config)
        if args.seed is not None:
            config.seed = args.seed
        if args.plots:
            config.plots = True
        print(f"Config: {config.name} ({args.config})")
        print(f"Checks: {', '.join(config.checks) or '(none)'}")
        print("=" * 50 + "\n")

        outcome = ExperimentRunner(config, args.out, args.jobs).run()
        print(f"\n{len(outcome.results)} checks, {len(outcome.hard_failures)} hard failures "
              f"({outcome.elapsed:.1f} s); artifacts in {outcome.out_dir}")
        for failure in outcome.hard_failures:
            print(f"  FAIL {failure.check} {failure.instance}: {failure.message}")
        return outcome.exit_code

    def predict(self, args):
        params = {name: getattr(args, name) for name in SETTING_PARAMS[args.setting]
                  if getattr(args, name) is not None}
        if args.setting == "compact" and args.g is not None:
            params["g"] = args.g
        # light-tail settings read L and R with a default of 0
        if args.setting.startswith("light-tails"):
            params.setdefault("L", 0.0)
            params.setdefault("R", 0.0)
        try:
            certificate = rate_catalog(args.setting, args.tau, args.eps, **params)
        except ValueError as e:
            self.parser.error(f"predict --setting {args.setting}: {e}")
        print(certificate.describe())
        print(render_csv(CERTIFICATE_COLUMNS, [certificate.as_row()], stamp=False), end="")
        return EXIT_OK

    def catalog(self, args):
        rows = [c.as_row() for c in default_catalog_sweep()]
        if args.out:
            write_csv(args.out, CERTIFICATE_COLUMNS, rows)
            print(f"Catalog saved: {args.out} ({len(rows)} certificates)")
        else:
            print(render_csv(CERTIFICATE_COLUMNS, rows, stamp=False), end="")
        return EXIT_OK

    def version(self, args):
        print(f"sinkhorn-lab {__version__}")
        return EXIT_OK

    def dispatch(self, argv=None):
        args = self.parser.parse_args(argv)
        level = logging.DEBUG if args.verbose else logging.INFO
        if args.command == "run":
            setup_logger(level=level)
        else:
            setup_logger(level=logging.DEBUG if args.verbose else logging.WARNING, to_file=False)
        handler = getattr(self, args.command)
        try:
            return handler(args)
        except ConfigError as e:
            print("Invalid config:", file=sys.stderr)
            for line in e.diagnostics:
                print(f"  - {line}", file=sys.stderr)
            return EXIT_USAGE
        except SinkhornLabError as e:
            logger.error(f"{args.command} failed: {e}")
            return EXIT_FAILED


def main(argv=None):
    """Main entry point"""
    return SinkhornLab().dispatch(argv)


if __name__ == "__main__":
    sys.exit(main())
