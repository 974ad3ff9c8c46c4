"""
Command-line front end.

Every command writes CSV to stdout or ``--output``; summaries and log
messages go to stderr. Exit status is 0 on success, 1 for bad input and 2
when a numerical procedure fails.
"""

import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any, Literal, TextIO

from dotenv import load_dotenv
from pydantic import BaseModel, FilePath, ValidationError

from .casm import elastic_moduli, rigidity_index, simulate_undrained_triaxial
from .cavity import CavityGeometry, total_limit_pressure
from .config import InterpretConfig, RuntimeConfig, TriaxialConfig
from .exceptions import (
    DomainError,
    InputError,
    IntegrityError,
    NumericalError,
)
from .figures import FIGURES, compare_methods, figure_data
from .fixtures import fixtures_frame
from .inversion import estimate_beta, interpret_profile
from .io import cavity_frame, path_frame, profile_frame, read_sounding, write_csv
from .material import csl_slope_M, initial_state, state_parameter
from .models import CasmMaterial, K0Policy, Method, StartMode

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERICAL = 2


class CliConfig(BaseModel):
    """Parsed command line; referenced input files must exist."""

    command: Literal["invert", "triaxial", "cavity", "fixtures", "figures", "compare"]
    sounding: FilePath | None = None
    material: FilePath | None = None
    config: FilePath | None = None
    output: Path | None = None


def _add_output(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "-o", "--output", type=Path, help="Output CSV path (default: stdout)"
    )


def build_parser() -> argparse.ArgumentParser:
    """Create the argument parser with all subcommands."""
    parser = argparse.ArgumentParser(
        prog="cptu-state",
        description="Estimate the state parameter of contractive soils from CPTu",
    )
    parser.add_argument(
        "--log-level",
        help="Logging level (default: CPTU_STATE_LOG_LEVEL or WARNING)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    invert = sub.add_parser("invert", help="Invert psi down a sounding")
    invert.add_argument("sounding", help="Sounding CSV")
    invert.add_argument("--material", help="Material JSON supplying lambda and M")
    invert.add_argument("--config", help="Interpretation config JSON")
    invert.add_argument("--lambda", dest="lambda_", type=float, help="CSL slope lambda")
    invert.add_argument("--M", dest="M", type=float, help="Triaxial CSL slope")
    invert.add_argument("--phi", type=float, help="Critical state friction angle")
    invert.add_argument("--rho", type=float, help="Principal stress angle, degrees")
    invert.add_argument("--cq", dest="c_q", type=float, help="Geometric factor c_q")
    invert.add_argument("--beta", type=float, help="u1/u2 excess pressure ratio")
    invert.add_argument(
        "--calibrate-beta",
        action="store_true",
        help="Take beta as the median u1/u2 excess ratio of the sounding",
    )
    invert.add_argument(
        "--k0-policy", choices=[p.value for p in K0Policy], help="Missing K0 handling"
    )
    invert.add_argument(
        "--method",
        action="append",
        choices=[m.value for m in Method],
        help="Inversion method (repeatable; default: all)",
    )
    _add_output(invert)

    triaxial = sub.add_parser("triaxial", help="Undrained triaxial element test")
    triaxial.add_argument("material", help="Material JSON")
    triaxial.add_argument("--sigma-v0-eff", type=float, default=100.0)
    triaxial.add_argument(
        "--start-mode",
        choices=[m.value for m in StartMode],
        default=StartMode.IN_SITU_ANISOTROPIC.value,
    )
    triaxial.add_argument("--max-strain", type=float, default=0.5)
    triaxial.add_argument("--step", type=float, default=1e-4)
    _add_output(triaxial)

    cavity = sub.add_parser("cavity", help="Undrained cavity limit pressures")
    cavity.add_argument("material", help="Material JSON")
    cavity.add_argument(
        "--geom",
        choices=["spherical", "cylindrical", "both"],
        default="both",
    )
    cavity.add_argument(
        "--psi0", type=float, help="Initial state parameter (default: from state)"
    )
    cavity.add_argument("--sigma-v0-eff", type=float, default=100.0)
    cavity.add_argument("--r0", type=float, help="p_c0 / p'_0 (default: OCR)")
    cavity.add_argument("--u0", type=float, default=0.0)
    _add_output(cavity)

    fixtures = sub.add_parser("fixtures", help="Dump a bundled reference table")
    fixtures.add_argument("table", choices=["materials", "cptu"])
    _add_output(fixtures)

    figures = sub.add_parser("figures", help="Curve data as CSV")
    figures.add_argument("which", choices=list(FIGURES))
    _add_output(figures)

    compare = sub.add_parser("compare", help="Method errors over the fixtures")
    compare.add_argument("--series", help="Restrict to one fixture series")
    compare.add_argument(
        "--shoulder-only",
        action="store_true",
        help="Ignore u1 and use beta times u2 for this_work",
    )
    _add_output(compare)

    return parser


def _interpret_config(args: argparse.Namespace) -> InterpretConfig:
    overrides: dict[str, Any] = {
        "rho": args.rho,
        "c_q": args.c_q,
        "beta": args.beta,
        "k0_policy": args.k0_policy,
    }
    if args.lambda_ is not None:
        overrides["lambda"] = args.lambda_
    if args.M is not None:
        overrides["M"] = args.M
    elif args.phi is not None:
        overrides["M"] = csl_slope_M(args.phi)

    if args.config:
        return InterpretConfig.from_json(args.config, **overrides)
    if args.material:
        return InterpretConfig.from_material(
            CasmMaterial.from_json(args.material), **overrides
        )
    if "lambda" in overrides and "M" in overrides:
        data = {k: v for k, v in overrides.items() if v is not None}
        return InterpretConfig.model_validate(data)
    raise InputError("Give --config, --material, or --lambda with --M or --phi")


def _cmd_invert(args: argparse.Namespace, out: TextIO | Path) -> None:
    records = read_sounding(args.sounding)
    cfg = _interpret_config(args)
    if args.calibrate_beta:
        cfg = cfg.model_copy(update={"beta": estimate_beta(records)})
        logger.info("Calibrated beta = %.4g", cfg.beta)

    methods = [m for m in Method if args.method is None or m.value in args.method]
    rows = interpret_profile(records, cfg, methods)
    write_csv(profile_frame(rows, methods), out)

    flagged = sum(1 for row in rows if row.flags)
    print(f"{len(rows)} records, {flagged} flagged", file=sys.stderr)


def _cmd_triaxial(args: argparse.Namespace, out: TextIO | Path) -> None:
    material = CasmMaterial.from_json(args.material)
    config = TriaxialConfig(
        max_dev_strain=args.max_strain,
        step_dev_strain=args.step,
        start_mode=StartMode(args.start_mode),
    )
    state = initial_state(material, args.sigma_v0_eff, config.start_mode)
    result = simulate_undrained_triaxial(material, state, config)
    write_csv(path_frame(result), out)

    summary = (
        f"su_peak={result.su_peak:.6g} su_res={result.su_res:.6g} "
        f"I_b={result.brittleness:.6g} G={result.g_modulus:.6g}"
    )
    if result.su_peak > 0:
        summary += f" I_r={rigidity_index(result.g_modulus, result.su_peak):.6g}"
    print(summary, file=sys.stderr)


def _cmd_cavity(args: argparse.Namespace, out: TextIO | Path) -> None:
    material = CasmMaterial.from_json(args.material)
    state = initial_state(material, args.sigma_v0_eff, StartMode.ISOTROPIC)
    psi_0 = state_parameter(state, material) if args.psi0 is None else args.psi0
    _, g0 = elastic_moduli(state.p_eff, material, material.e_ref)

    kinds = ["spherical", "cylindrical"] if args.geom == "both" else [args.geom]
    results = {
        kind: total_limit_pressure(
            state.p_eff,
            material,
            CavityGeometry(kind=kind),
            psi_0=psi_0,
            g0=g0,
            r0=args.r0,
            u0=args.u0,
        )
        for kind in kinds
    }
    write_csv(cavity_frame(results), out)


def _cmd_fixtures(args: argparse.Namespace, out: TextIO | Path) -> None:
    write_csv(fixtures_frame(args.table), out)


def _cmd_figures(args: argparse.Namespace, out: TextIO | Path) -> None:
    write_csv(figure_data(args.which), out)


def _cmd_compare(args: argparse.Namespace, out: TextIO | Path) -> None:
    summary = compare_methods(args.series, face_pressure=not args.shoulder_only)
    write_csv(summary, out)


COMMANDS = {
    "invert": _cmd_invert,
    "triaxial": _cmd_triaxial,
    "cavity": _cmd_cavity,
    "fixtures": _cmd_fixtures,
    "figures": _cmd_figures,
    "compare": _cmd_compare,
}


def _configure_logging(level: str | None) -> None:
    runtime = RuntimeConfig.from_env()
    if level:
        runtime = RuntimeConfig(log_level=level)
    logging.basicConfig(
        stream=sys.stderr,
        level=runtime.log_level,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )


def main(argv: Sequence[str] | None = None) -> int:
    """Run the command line and return the exit status."""
    load_dotenv(override=True)
    args = build_parser().parse_args(argv)

    try:
        _configure_logging(args.log_level)
        cli = CliConfig.model_validate(
            {
                "command": args.command,
                "sounding": getattr(args, "sounding", None),
                "material": getattr(args, "material", None),
                "config": getattr(args, "config", None),
                "output": args.output,
            }
        )
        out: TextIO | Path = cli.output if cli.output is not None else sys.stdout
        COMMANDS[cli.command](args, out)
    except NumericalError as e:
        print(f"Numerical error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (InputError, DomainError, IntegrityError, ValidationError, OSError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_INPUT

    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
