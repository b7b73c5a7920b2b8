"""
Command-line runner: one subcommand per experiment.

    python -m chiralwalk switch --theta pi/2 --out results/switch
    python -m chiralwalk ws --p 0.1 0.2 --realizations 20 --workers 4

Every run validates its flags into the experiment's config model before
computing anything, writes its files plus summary.json and manifest.json,
and prints the summary to stdout. Exit codes: 0 success, 1 unexpected
failure, 2 bad configuration or argument, 3 numerical failure.

argparse reads '-pi/2' as a flag, so negative multiples of pi go in the
'--theta=-pi/2' form or as plain numbers.
"""

import argparse
import math
import re
import sys
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from chiralwalk import __version__
from chiralwalk.config import settings
from chiralwalk.errors import ConfigurationError, InvalidArgumentError, NumericalError
from chiralwalk.experiments import EXPERIMENTS
from chiralwalk.utils.logger import configure as configure_logging
from chiralwalk.utils.logger import logger

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

_PHASE = re.compile(r"^\s*(?P<sign>[+-]?)\s*(?P<coef>\d*\.?\d*)\s*\*?\s*pi\s*(?:/\s*(?P<den>\d*\.?\d+))?\s*$")


def parse_phase(text: str) -> float:
    """Read a phase as a plain number or as a multiple of pi such as 'pi/2', '-pi/2' or '0.304pi'."""
    try:
        return float(text)
    except ValueError:
        pass
    match = _PHASE.match(text.lower())
    if not match:
        raise argparse.ArgumentTypeError(f"Not a phase: '{text}'")
    try:
        value = math.pi * float(match["coef"] or 1.0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"Not a phase: '{text}'")
    if match["den"]:
        value /= float(match["den"])
    return -value if match["sign"] == "-" else value


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help=f"Output directory (default: {settings.OUTPUT_DIR}/<experiment>)")
    common.add_argument("--format", choices=["csv", "json"], help="Curve file format (default: csv)")
    common.add_argument("--grid-points", type=int, help=f"Time grid points (default: {settings.GRID_POINTS})")
    common.add_argument("--horizon", type=float, help="Time horizon, overriding the experiment default")
    common.add_argument("--seed", type=int, help="Master seed (default: 0)")
    common.add_argument("--workers", type=int, help=f"Worker threads (default: {settings.WORKERS})")
    common.add_argument("--log-level", help=f"Log level (default: {settings.LOG_LEVEL})")
    return common


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chiralwalk", description="Chiral quantum walk experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="experiment", required=True)
    common = [_common_flags()]

    p = sub.add_parser("switch", parents=common, help="Quantum switch routing and trapped efficiency")
    p.add_argument("--theta", type=parse_phase, help="Control phase (default: pi/2)")
    p.add_argument("--trap-rate", type=float, help=f"Trap rate at E and F (default: {settings.SWITCH_TRAP_RATE})")
    p.add_argument("--arm-length", type=int, help="Sites per wire (default: 2)")
    p.add_argument("--no-trap", dest="trap", action="store_false", default=None, help="Skip the trapped runs")
    p.add_argument("--sensitivity-rates", type=float, nargs="+", help="Trap rates for the efficiency scan")

    p = sub.add_parser("chain", parents=common, help="Half-arrival times along the triangle chain")
    p.add_argument("--sites", dest="n", type=int, help="Number of triangles (default: 8)")
    p.add_argument("--theta", dest="thetas", type=parse_phase, nargs="+", help="Control phases (default: 0 -pi/2)")
    p.add_argument("--trap-rate", type=float, help=f"Trap rate at E (default: {settings.CHAIN_TRAP_RATE})")
    p.add_argument("--dephasing", type=float, help=f"Site dephasing with the trap (default: {settings.CHAIN_DEPHASING})")
    p.add_argument("--no-trap", dest="trap", action="store_false", default=None, help="Read site E directly")
    p.add_argument("--sweep-points", type=int, help="Resolution of the phase sweep (default: off)")
    p.add_argument("--scaling-sizes", type=int, nargs="+", help="Chain lengths for the linear scaling fit")

    p = sub.add_parser("polygon", parents=common, help="Polygon closed form against the propagator")
    p.add_argument("--sites", dest="N", type=int, help="Number of sites (default: 4)")
    p.add_argument("--phi", type=parse_phase, help="Per-edge phase (default: pi/4)")
    p.add_argument("--start", dest="S", type=int, help="Start site (default: 0)")
    p.add_argument("--end", dest="E", type=int, help="End site (default: 2)")

    p = sub.add_parser("fmo", parents=common, help="FMO sink arrival with a phase set")
    p.add_argument("--phases", choices=["A1", "A2", "none"], help="Phase table (default: A1)")
    p.add_argument("--optimize", action="store_true", default=None, help="Optimize tau_1/2 from the table")
    p.add_argument("--restarts", type=int, help="Optimizer restarts (default: 8)")

    for name, help_text in (("ws", "Watts-Strogatz ensemble"), ("ba", "Barabasi-Albert ensemble")):
        p = sub.add_parser(name, parents=common, help=help_text)
        p.add_argument("--sites", dest="N", type=int, help="Network size (default: 32)")
        p.add_argument("--realizations", type=int, help="Realizations per setting (default: 20)")
        p.add_argument("--full-scale", action="store_true", default=None, help="Run 200 realizations")
        p.add_argument("--restarts", type=int, help="Optimizer restarts per realization (default: 8)")
        p.add_argument("--sink-rate", type=float, help="Sink absorption rate (default: 1.0)")
        if name == "ws":
            p.add_argument("--k", type=int, help="Ring neighbours (default: 4)")
            p.add_argument("--p", dest="p_values", type=float, nargs="+", help="Rewiring probabilities (default: 0.2)")
        else:
            p.add_argument("--m", type=int, help="Edges per new node (default: 2)")

    p = sub.add_parser("ion", parents=common, help="Trapped-ion encoded walks")
    p.add_argument("--rows", nargs="+", help="Parameter rows (default: CQW1 CQW2 QW)")

    p = sub.add_parser("triangle", parents=common, help="Inhomogeneous triangle versus loop phase")
    p.add_argument("--theta", dest="thetas", type=parse_phase, nargs="+", help="Loop phases (default: 0 pi/2 -pi/2)")
    p.add_argument("--j12", dest="J12", type=float)
    p.add_argument("--j23", dest="J23", type=float)
    p.add_argument("--j13", dest="J13", type=float)

    p = sub.add_parser("verify", parents=common, help="Even-cycle suppression and polygon oracle checks")
    p.add_argument("--sizes", dest="even_sizes", type=int, nargs="+", help="Even cycle sizes (default: 4 6 8 10)")
    p.add_argument("--random-cases", type=int, help="Random polygon cases (default: 500)")

    return parser


def config_fields(args: argparse.Namespace) -> Dict[str, Any]:
    """Flags that were actually given, keyed by config field name."""
    fields = {
        key: value
        for key, value in vars(args).items()
        if key not in ("experiment", "log_level") and value is not None
    }
    fields.setdefault("out", settings.OUTPUT_DIR / args.experiment)
    return fields


def main(argv: Optional[List[str]] = None) -> int:
    args = build_arg_parser().parse_args(argv)
    configure_logging(args.log_level)

    config_cls, runner = EXPERIMENTS[args.experiment]
    try:
        config = config_cls.model_validate(config_fields(args))
        report = runner.run(config)
    except (ValidationError, ConfigurationError, InvalidArgumentError) as e:
        logger.error(f"{args.experiment}: invalid configuration - {e}")
        return EXIT_CONFIG
    except NumericalError as e:
        logger.error(f"{args.experiment}: numerical failure - {e}")
        return EXIT_NUMERICAL
    except Exception:
        logger.exception(f"{args.experiment}: unexpected failure")
        return EXIT_FAILURE

    print(report.model_dump_json(indent=2))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
