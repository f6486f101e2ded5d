"""
Argument parser for CLI commands.
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path
from typing import Optional

import yaml

try:
    from rich.table import Table
    from rich.console import Console
    from rich.panel import Panel

    _console = Console()
except Exception:
    Table = None
    Panel = None
    _console = None

from spikedpca import settings
from spikedpca.errors import InvalidParameter, IoFailure
from spikedpca.model import LatentLaw

from .commands import (
    cmd_arrowhead_solve,
    cmd_bounds,
    cmd_coverage,
    cmd_lawley,
    cmd_moments,
    cmd_noise_norm,
    cmd_phase,
    cmd_sweep_n,
    cmd_sweep_sigma,
    cmd_wishart_bound,
    HAS_RICH,
)


COMMAND_GROUPS = {
    "Monte Carlo": ("sweep-sigma", "sweep-n", "coverage", "moments", "wishart-bound"),
    "Calculators": ("bounds", "phase", "lawley", "noise-norm", "arrowhead-solve"),
}

# Global options whose value falls back to a setting
_SETTING_FALLBACKS = {
    "log_level": lambda: settings.LOG_LEVEL,
    "log_file": lambda: settings.LOG_FILE or "-",
}


def _subcommand_help(parser: argparse.ArgumentParser) -> dict:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return {choice.dest: choice.help or "" for choice in action._choices_actions}
    return {}


def print_overview(parser: argparse.ArgumentParser) -> None:
    """Print the subcommands grouped by kind, and the global options with their current values."""
    if not HAS_RICH:
        parser.print_help()
        return

    summaries = _subcommand_help(parser)
    commands = Table(title=f"[bold cyan]{parser.prog}[/] - {parser.description}")
    commands.add_column("[bold]Group[/]", style="bold magenta")
    commands.add_column("[bold]Command[/]", style="bold yellow")
    commands.add_column("[bold]Description[/]", style="white")
    for group, names in COMMAND_GROUPS.items():
        for i, name in enumerate(names):
            commands.add_row(group if i == 0 else "", name, summaries.get(name, ""))

    options = Table(title="[bold magenta]Global options[/]")
    options.add_column("[bold]Option[/]", style="bold cyan")
    options.add_column("[bold]Current value[/]", style="green")
    options.add_column("[bold]Description[/]", style="white")
    for action in parser._actions:
        if not action.option_strings or action.dest == "help":
            continue
        fallback = _SETTING_FALLBACKS.get(action.dest)
        current = fallback() if fallback else action.default
        options.add_row(", ".join(action.option_strings), str(current or "-"), action.help or "")

    _console.print(Panel.fit(commands, title="[bold green]spca commands[/]"))
    _console.print(Panel.fit(options))
    _console.print("Run [bold]spca <command> --help[/] for the options of a command.")


def _add_dimensions(p: argparse.ArgumentParser, n: bool = True) -> None:
    p.add_argument("--p", type=int, default=200, help="Dimension p (default: 200)")
    if n:
        p.add_argument("--n", type=int, default=50, help="Number of samples n (default: 50)")


def _add_model(p: argparse.ArgumentParser, sigma: bool = True) -> None:
    p.add_argument(
        "--signal-norm",
        type=float,
        default=2.8,
        help="Norm of the signal vector |v| (default: 2.8)",
    )
    if sigma:
        p.add_argument("--sigma", type=float, default=0.3, help="Noise level sigma (default: 0.3)")
    p.add_argument(
        "--latent-law",
        default=LatentLaw.GAUSSIAN.value,
        choices=[law.value for law in LatentLaw],
        help="Law of the latent variable u (default: gaussian)",
    )


def _add_monte_carlo(p: argparse.ArgumentParser, trials: int = 1) -> None:
    p.add_argument(
        "--trials",
        type=int,
        default=trials,
        help=f"Number of Monte Carlo trials (default: {trials})",
    )
    p.add_argument(
        "--seed",
        type=int,
        default=settings.DEFAULT_SEED,
        help=f"64-bit unsigned seed (default: {settings.DEFAULT_SEED})",
    )
    p.add_argument(
        "--workers",
        type=int,
        default=None,
        help="Worker threads for trials (default: SPIKEDPCA_WORKERS or CPU count)",
    )


def _add_output(p: argparse.ArgumentParser, formats: bool = False) -> None:
    p.add_argument(
        "--out",
        "-o",
        help=f"Output directory (sweeps default to {settings.OUTPUT_DIR}; reports are only printed without it)",
    )
    if formats:
        p.add_argument(
            "--format",
            default="csv",
            help="Comma-separated output formats among csv, json, svg (default: csv)",
        )


def _add_bound_parameters(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--kappa",
        type=float,
        default=None,
        help="Realized signal strength kappa (default: the signal norm)",
    )
    for name in ("s1", "s2", "s3"):
        p.add_argument(
            f"--{name}",
            type=float,
            default=None,
            help=f"Deviation parameter {name} (default: chosen from --level)",
        )
    p.add_argument(
        "--level",
        type=float,
        default=None,
        help=f"Per-term failure probability for default deviations (default: {settings.TAIL_LEVEL})",
    )


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with all subcommands."""
    p = argparse.ArgumentParser(
        prog="spca",
        description="spikedpca CLI - PCA theory under a spiked covariance model",
    )
    p.add_argument(
        "--config",
        help="JSON or YAML file of option values; command-line flags override it",
    )
    p.add_argument("--log-level", help="Console log level (default: SPIKEDPCA_LOG_LEVEL)")
    p.add_argument("--log-file", help="Detailed log file (default: SPIKEDPCA_LOG_FILE)")
    sub = p.add_subparsers(dest="command")
    try:
        sub.required = False
    except Exception:
        pass

    # sweep-sigma
    p_ss = sub.add_parser(
        "sweep-sigma",
        help="Track the top eigenpair over noise levels",
        description="Sweep sigma at fixed n and record eigenvalues, overlap and crossovers",
    )
    _add_dimensions(p_ss)
    _add_model(p_ss, sigma=False)
    p_ss.add_argument(
        "--grid",
        default="0:3:31",
        help="Noise levels as 'a,b,c' or 'start:stop:count' (default: 0:3:31)",
    )
    _add_monte_carlo(p_ss)
    _add_output(p_ss, formats=True)
    p_ss.add_argument("--no-overlays", action="store_true", help="Skip theoretical overlays")
    p_ss.set_defaults(func=cmd_sweep_sigma)

    # sweep-n
    p_sn = sub.add_parser(
        "sweep-n",
        help="Track the top eigenpair over sample sizes",
        description="Sweep n at fixed sigma and record eigenvalues, overlap and crossovers",
    )
    _add_dimensions(p_sn, n=False)
    _add_model(p_sn)
    p_sn.add_argument(
        "--grid",
        default="10:600:60",
        help="Sample sizes as 'a,b,c' or 'start:stop:count' (default: 10:600:60)",
    )
    p_sn.add_argument(
        "--onset-level",
        type=float,
        default=0.2,
        help="Mean overlap level reported as the onset (default: 0.2)",
    )
    _add_monte_carlo(p_sn)
    _add_output(p_sn, formats=True)
    p_sn.add_argument("--no-overlays", action="store_true", help="Skip theoretical overlays")
    p_sn.set_defaults(func=cmd_sweep_n)

    # bounds
    p_b = sub.add_parser(
        "bounds",
        help="Evaluate the finite-sample bounds",
        description="Evaluate the eigenvalue, sin theta and eigengap bounds with their failure budget",
    )
    _add_dimensions(p_b)
    _add_model(p_b)
    _add_bound_parameters(p_b)
    _add_output(p_b)
    p_b.set_defaults(func=cmd_bounds)

    # coverage
    p_cov = sub.add_parser(
        "coverage",
        help="Monte Carlo coverage of the finite-sample bounds",
        description="Count violations of the finite-sample bounds over Monte Carlo trials",
    )
    _add_dimensions(p_cov)
    _add_model(p_cov)
    _add_bound_parameters(p_cov)
    _add_monte_carlo(p_cov, trials=1000)
    _add_output(p_cov)
    p_cov.set_defaults(func=cmd_coverage)

    # moments
    p_mom = sub.add_parser(
        "moments",
        help="Empirical moments against small-noise formulas",
        description="Compare empirical moments of lambda and sin theta with the small-noise expansions",
    )
    _add_dimensions(p_mom)
    _add_model(p_mom)
    p_mom.add_argument(
        "--sigmas",
        default=None,
        help="Comma-separated noise levels (default: --sigma)",
    )
    _add_monte_carlo(p_mom, trials=1000)
    _add_output(p_mom)
    p_mom.set_defaults(func=cmd_moments)

    # phase
    p_ph = sub.add_parser(
        "phase",
        help="Large-system eigenvalue and overlap limits",
        description="Predict the top eigenvalue and squared overlap as p, n grow with p/n = c",
    )
    _add_dimensions(p_ph)
    _add_model(p_ph)
    p_ph.add_argument("--c", type=float, default=None, help="Aspect ratio p/n (default: --p / --n)")
    _add_output(p_ph)
    p_ph.set_defaults(func=cmd_phase)

    # arrowhead-solve
    p_ar = sub.add_parser(
        "arrowhead-solve",
        help="Solve an arrowhead eigenproblem",
        description="Eigenvalues of an arrowhead matrix through its secular equation",
    )
    p_ar.add_argument("--input", "-i", help="JSON file with head, shaft and tail")
    p_ar.add_argument("--size", type=int, default=None, help="Size of a random arrowhead matrix")
    p_ar.add_argument(
        "--seed",
        type=int,
        default=settings.DEFAULT_SEED,
        help="Seed for the random matrix",
    )
    p_ar.add_argument("--show", type=int, default=10, help="Number of eigenvalues to print (default: 10)")
    _add_output(p_ar)
    p_ar.set_defaults(func=cmd_arrowhead_solve)

    # wishart-bound
    p_w = sub.add_parser(
        "wishart-bound",
        help="Wishart spectral norm bounds",
        description="Norm bounds for X^T X / n with Gaussian X, n <= p, and their large-deviation tail",
    )
    _add_dimensions(p_w)
    p_w.add_argument("--alpha", type=float, default=None, help="Excess for the tail bound")
    _add_monte_carlo(p_w, trials=0)
    _add_output(p_w)
    p_w.set_defaults(func=cmd_wishart_bound)

    # lawley
    p_law = sub.add_parser(
        "lawley",
        help="Lawley's bias of sample eigenvalues",
        description="Expected sample eigenvalues to first order in 1/n",
    )
    p_law.add_argument(
        "--alphas",
        default="3,1,1,1,1",
        help="Comma-separated population eigenvalues (default: 3,1,1,1,1)",
    )
    p_law.add_argument("--n", type=int, default=2000, help="Number of samples (default: 2000)")
    _add_monte_carlo(p_law, trials=0)
    _add_output(p_law)
    p_law.set_defaults(func=cmd_lawley)

    # noise-norm
    p_nn = sub.add_parser(
        "noise-norm",
        help="Spectral norm limit of heteroscedastic noise",
        description="Critical spike and limiting spectral norm for a noise variance density",
    )
    _add_dimensions(p_nn)
    p_nn.add_argument(
        "--density",
        default="point:1",
        help="Noise variance density: point:LOC, uniform:LO:HI or csv:PATH (default: point:1)",
    )
    p_nn.add_argument("--c", type=float, default=None, help="Aspect ratio p/n (default: --p / --n)")
    _add_monte_carlo(p_nn, trials=0)
    _add_output(p_nn)
    p_nn.set_defaults(func=cmd_noise_norm)

    return p


def _expand_abbreviations(
    argv: list[str], parser: argparse.ArgumentParser
) -> list[str]:
    """Expand unique-prefix abbreviations for subcommands (e.g., sweep-s -> sweep-sigma)."""
    if not argv:
        return argv

    sub_actions = [
        a for a in parser._actions if isinstance(a, argparse._SubParsersAction)
    ]
    if not sub_actions:
        return argv
    choices = sub_actions[0].choices
    for i, token in enumerate(argv):
        if token.startswith("-"):
            continue
        if i > 0 and argv[i - 1] in ("--config", "--log-level", "--log-file"):
            continue
        if token not in choices:
            matches = [name for name in choices if name.startswith(token)]
            if len(matches) == 1:
                argv = argv[:i] + [matches[0]] + argv[i + 1 :]
        break

    return argv


def load_config(path: str) -> dict:
    """Read option values from a JSON or YAML file.

    Keys are option names with dashes or underscores (``signal-norm`` or
    ``signal_norm``).
    """
    file_path = Path(path)
    try:
        text = file_path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot read config {path}: {exc}") from exc
    try:
        if file_path.suffix.lower() == ".json":
            data = json.loads(text)
        else:
            data = yaml.safe_load(text)
    except (ValueError, yaml.YAMLError) as exc:
        raise InvalidParameter(f"cannot parse config {path}: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise InvalidParameter(f"config {path} must hold a mapping of option values")
    return {str(key).replace("-", "_"): value for key, value in data.items()}


def apply_config(
    parser: argparse.ArgumentParser, command: Optional[str], values: dict
) -> None:
    """Install config values as defaults of ``command`` so that flags still win."""
    if not command or not values:
        return
    sub_actions = [
        a for a in parser._actions if isinstance(a, argparse._SubParsersAction)
    ]
    sub = sub_actions[0].choices[command]
    known = {action.dest for action in sub._actions}
    unknown = sorted(set(values) - known)
    if unknown:
        raise InvalidParameter(f"config has options unknown to {command}: {', '.join(unknown)}")
    sub.set_defaults(**values)
