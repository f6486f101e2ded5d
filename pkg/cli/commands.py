"""
CLI command implementations.

Every command returns a process exit code. Library errors are left to
propagate; ``main`` maps them to exit codes.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import numpy as np
from tabulate import tabulate

try:
    from rich.console import Console
    from rich.table import Table
    from rich.panel import Panel
    from rich.markup import escape

    HAS_RICH = True
    _console = Console()
except Exception:  # pragma: no cover
    HAS_RICH = False
    _console = None

from spikedpca import settings
from spikedpca.arrowhead import ArrowheadMatrix, arrowhead_eig
from spikedpca.asymptotics import (
    heuristic_threshold,
    large_ratio_approx,
    lawley_shift,
    noise_norm_limit,
    phase_prediction,
)
from spikedpca.bounds import BoundConfig, compare_lower_forms, evaluate_bounds, szarek_tail, wishart_norm_bound
from spikedpca.density import NoiseDensity
from spikedpca.errors import InvalidParameter
from spikedpca.export import export, read_arrowhead, write_payload
from spikedpca.harness import (
    SweepSpec,
    coverage_experiment,
    crossover_points,
    lawley_experiment,
    moment_experiment,
    noise_norm_experiment,
    overlap_onset,
    summarize,
    sweep_n,
    sweep_sigma,
    wishart_experiment,
)
from spikedpca.model import LatentLaw, SpikedModel
from spikedpca.rng import stream


def parse_grid(value, integer: bool = False) -> List[float]:
    """Parse ``a,b,c``, ``start:stop:count`` (inclusive, evenly spaced) or a list."""
    if value is None:
        raise InvalidParameter("a grid is required (--grid)")
    if isinstance(value, (list, tuple)):
        points = [float(v) for v in value]
    else:
        text = str(value).strip()
        try:
            if ":" in text:
                start, stop, count = text.split(":")
                points = np.linspace(float(start), float(stop), int(count)).tolist()
            else:
                points = [float(v) for v in text.split(",") if v.strip()]
        except ValueError as exc:
            raise InvalidParameter(f"cannot parse grid {value!r}") from exc
    if integer:
        return sorted({int(round(v)) for v in points})
    return points


def parse_floats(value) -> List[float]:
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value]
    try:
        return [float(v) for v in str(value).split(",") if v.strip()]
    except ValueError as exc:
        raise InvalidParameter(f"cannot parse list of numbers {value!r}") from exc


def _formats(args: argparse.Namespace) -> List[str]:
    value = getattr(args, "format", None) or "csv"
    if isinstance(value, (list, tuple)):
        return list(value)
    return [v.strip() for v in str(value).split(",") if v.strip()]


def _out_dir(args: argparse.Namespace) -> Path:
    return Path(getattr(args, "out", None) or settings.OUTPUT_DIR)


def _model(args: argparse.Namespace, sigma: Optional[float] = None) -> SpikedModel:
    return SpikedModel(
        signal_norm=args.signal_norm,
        noise_level=args.sigma if sigma is None else sigma,
        dimension=args.p,
        latent_law=LatentLaw(args.latent_law),
    )


def _fmt(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        if math.isnan(value):
            return "-"
        return f"{value:.6g}"
    return str(value)


def print_table(title: str, headers: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Render a table with rich when available, otherwise with tabulate."""
    rows = [[_fmt(v) for v in row] for row in rows]
    if not HAS_RICH:
        print(title)
        print(tabulate(rows, headers=list(headers), tablefmt="heavy_outline"))
        return
    table = Table(title=f"[bold cyan]{title}[/]")
    for i, header in enumerate(headers):
        table.add_column(
            f"[bold]{header}[/]",
            style="bold yellow" if i == 0 else "white",
            justify="left" if i == 0 else "right",
        )
    for row in rows:
        table.add_row(*(escape(cell) for cell in row))
    _console.print(Panel.fit(table))


def print_mapping(title: str, data: dict) -> None:
    print_table(title, ["Quantity", "Value"], data.items())


def _report_written(paths: Sequence[Path]) -> None:
    for path in paths:
        print(f"Wrote {path}")


def _maybe_write(args: argparse.Namespace, payload, stem: str) -> None:
    if getattr(args, "out", None):
        _report_written([write_payload(payload, _out_dir(args) / f"{stem}.json")])


def _sweep_output(args, spec: SweepSpec, records, stem: str) -> None:
    summary = summarize(records)
    print_table(
        f"{stem}: {spec.trials} trial(s), seed {spec.seed}",
        ["grid", "mean R", "mean R^2", "limit R^2", "mean l1", "mean l2", "limit l1", "crossovers"],
        summary[
            [
                "grid_value",
                "mean_overlap",
                "mean_overlap_sq",
                "predicted_overlap_sq",
                "mean_lambda1",
                "mean_lambda2",
                "predicted_lambda",
                "crossovers",
            ]
        ].itertuples(index=False),
    )
    _report_written(export(records, spec.outputs, _out_dir(args), stem=stem, spec=spec))


def cmd_sweep_sigma(args: argparse.Namespace) -> int:
    """Sweep the noise level at fixed sample size."""
    spec = SweepSpec(
        model=_model(args, sigma=0.0),
        n=args.n,
        sigma_grid=tuple(parse_grid(args.grid)),
        trials=args.trials,
        seed=args.seed,
        outputs=tuple(_formats(args)),
        overlays=not args.no_overlays,
    )
    records = sweep_sigma(spec, workers=args.workers)
    _sweep_output(args, spec, records, "sweep_sigma")
    points = crossover_points(records)
    if points:
        print(
            f"Crossover detected in {len(points)}/{spec.trials} trial(s); "
            f"median sigma {float(np.median(list(points.values()))):.4g}"
        )
    else:
        print("No crossover detected.")
    return 0


def cmd_sweep_n(args: argparse.Namespace) -> int:
    """Sweep the sample size at fixed noise level."""
    spec = SweepSpec(
        model=_model(args),
        n_grid=tuple(parse_grid(args.grid, integer=True)),
        trials=args.trials,
        seed=args.seed,
        outputs=tuple(_formats(args)),
        overlays=not args.no_overlays,
    )
    records = sweep_n(spec, workers=args.workers)
    _sweep_output(args, spec, records, "sweep_n")
    onset = overlap_onset(records, level=args.onset_level)
    if onset is None:
        print(f"Mean overlap never exceeds {args.onset_level}.")
    else:
        print(f"Mean overlap first exceeds {args.onset_level} at n = {onset:g}")
    return 0


def _bound_config(args: argparse.Namespace) -> BoundConfig:
    kappa = args.kappa if args.kappa is not None else args.signal_norm
    cfg = BoundConfig.with_defaults(args.p, args.n, args.sigma, kappa, level=args.level)
    changes = {k: getattr(args, k) for k in ("s1", "s2", "s3") if getattr(args, k) is not None}
    return cfg.replace(**changes) if changes else cfg


def cmd_bounds(args: argparse.Namespace) -> int:
    """Evaluate the finite-sample bounds for one configuration."""
    cfg = _bound_config(args)
    report = evaluate_bounds(cfg)
    data = report.to_dict()
    config = data.pop("config")
    print_mapping("Configuration", config)
    print_mapping("Finite-sample bounds", data)
    if report.lambda_lower is not None:
        print_mapping("Lower-bound groupings", compare_lower_forms(cfg))
    _maybe_write(args, data | {"config": config}, "bounds")
    return 0


def cmd_coverage(args: argparse.Namespace) -> int:
    """Monte Carlo violation frequencies of the finite-sample bounds."""
    cfg = _bound_config(args)
    model = _model(args)
    report = coverage_experiment(cfg, model, args.trials, args.seed, workers=args.workers)
    rows = [
        (key, report.counts[key], report.frequencies[key], report.standard_errors[key])
        for key in report.counts
    ]
    print_table(
        f"Coverage: {report.trials} trials, {report.claimed} claimed",
        ["bound", "violations", "frequency", "std. error"],
        rows,
    )
    print_mapping(
        "Budget",
        {
            "budget": report.budget,
            "tolerance": report.tolerance,
            "within budget": report.within_budget,
            "eps": report.eps,
            "wishart within eps": report.wishart_within_eps,
        },
    )
    _maybe_write(args, report.to_dict(), "coverage")
    return 0


def cmd_moments(args: argparse.Namespace) -> int:
    """Empirical moments against the small-noise formulas."""
    model = _model(args, sigma=0.0)
    sigmas = parse_floats(args.sigmas if args.sigmas is not None else [args.sigma])
    frame = moment_experiment(model, args.n, sigmas, args.trials, args.seed, workers=args.workers)
    columns = [
        "sigma",
        "lambda_mean",
        "lambda_mean_predicted",
        "lambda_mean_z",
        "lambda_var",
        "lambda_var_printed_z",
        "lambda_var_girshick_z",
        "sintheta_mean",
        "sintheta_mean_predicted",
        "sintheta_mean_z",
    ]
    print_table("Moments", columns, frame[columns].itertuples(index=False))
    _maybe_write(args, frame.to_dict(orient="records"), "moments")
    return 0


def cmd_phase(args: argparse.Namespace) -> int:
    """Large-system limits of the top eigenvalue and overlap."""
    c = args.c if args.c is not None else args.p / args.n
    pred = phase_prediction(args.signal_norm, args.sigma, c)
    data = pred.to_dict()
    if args.sigma > 0:
        data["heuristic_threshold"] = heuristic_threshold(args.signal_norm, args.sigma)
    print_mapping(f"Phase prediction at c = {c:g}", data)
    _maybe_write(args, data, "phase")
    return 0


def cmd_arrowhead_solve(args: argparse.Namespace) -> int:
    """Eigenvalues of an arrowhead matrix read from JSON or drawn at random."""
    if args.input:
        a = read_arrowhead(args.input)
    else:
        if args.size is None or args.size < 2:
            raise InvalidParameter("give --input or --size >= 2")
        rng = stream(args.seed, (0,))
        a = ArrowheadMatrix(
            head=float(rng.standard_normal()),
            shaft=rng.standard_normal(args.size - 1),
            tail=np.sort(rng.standard_normal(args.size - 1))[::-1],
        )
    values, vectors = arrowhead_eig(a)
    residual = float(np.max(np.abs(a.dense() @ vectors - vectors * values)))
    shown = values[: args.show]
    print_table(
        f"Arrowhead eigenvalues (p = {a.size}, max residual {residual:.3g})",
        ["index", "eigenvalue"],
        enumerate(shown.tolist()),
    )
    _maybe_write(args, {"matrix": a.to_dict(), "eigenvalues": values.tolist()}, "arrowhead")
    return 0


def cmd_wishart_bound(args: argparse.Namespace) -> int:
    """Wishart norm bounds, the large-deviation tail and optionally a Monte Carlo check."""
    norm_bound, centered_bound, eps = wishart_norm_bound(args.p, args.n)
    data = {"norm bound": norm_bound, "centered bound": centered_bound, "eps": eps}
    if args.alpha is not None:
        data["tail"] = szarek_tail(args.p, args.n, args.alpha)
        data["tail (relaxed)"] = szarek_tail(args.p, args.n, args.alpha, relaxed=True)
    if args.trials:
        data.update(wishart_experiment(args.p, args.n, args.trials, args.seed, workers=args.workers))
    print_mapping(f"Wishart bounds, p = {args.p}, n = {args.n}", data)
    _maybe_write(args, data, "wishart")
    return 0


def cmd_lawley(args: argparse.Namespace) -> int:
    """Lawley's bias of sample eigenvalues, optionally against Monte Carlo."""
    alphas = sorted(parse_floats(args.alphas), reverse=True)
    if args.trials:
        frame = lawley_experiment(alphas, args.n, args.trials, args.seed)
        print_table(
            f"Lawley shift, n = {args.n}", list(frame.columns), frame.itertuples(index=False)
        )
        _maybe_write(args, frame.to_dict(orient="records"), "lawley")
        return 0
    rows = []
    for k, alpha in enumerate(alphas, start=1):
        if alphas.count(alpha) > 1:
            rows.append((k, alpha, None))
        else:
            rows.append((k, alpha, lawley_shift(alphas, args.n, k)))
    print_table(f"Lawley shift, n = {args.n}", ["k", "alpha", "expected l_k"], rows)
    _maybe_write(args, [dict(zip(("k", "alpha", "expected"), r)) for r in rows], "lawley")
    return 0


def cmd_noise_norm(args: argparse.Namespace) -> int:
    """Limiting spectral norm of heteroscedastic noise."""
    h = NoiseDensity.parse(args.density)
    if args.trials:
        data = noise_norm_experiment(args.p, args.n, h, args.trials, args.seed, workers=args.workers)
    else:
        c = args.c if args.c is not None else args.p / args.n
        alpha_star, norm = noise_norm_limit(c, h)
        approx_alpha, approx_norm = large_ratio_approx(c, h)
        data = {
            "c": c,
            "density": h.describe(),
            "alpha_star": alpha_star,
            "limit_norm": norm,
            "approx_alpha_star": approx_alpha,
            "approx_norm": approx_norm,
        }
    print_mapping("Noise norm limit", data)
    _maybe_write(args, data, "noise_norm")
    return 0


def report_error(exc: Exception) -> None:
    """Print a library error to stderr."""
    if HAS_RICH:
        Console(stderr=True).print(f"[bold red]Error:[/] {escape(str(exc))}")
    else:
        print(f"Error: {exc}", file=sys.stderr)
