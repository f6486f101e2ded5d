"""Monte Carlo experiment drivers.

Each trial draws from its own seeded stream ``(seed, trial)``, so results do
not depend on scheduling. Trials run on a thread pool (the heavy lifting is
in LAPACK) and records are merged in ``(grid_index, trial)`` order.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import asdict, dataclass, fields
from logging import Logger
from typing import Callable, Dict, List, Optional, Sequence, Tuple, TypeVar

import numpy as np
import pandas as pd
from tqdm import tqdm

from spikedpca import settings
from spikedpca.asymptotics import (
    large_ratio_approx,
    lawley_shift,
    noise_norm_limit,
    phase_prediction,
)
from spikedpca.bounds import (
    BoundConfig,
    evaluate_bounds,
    signal_condition,
    wishart_norm_bound,
)
from spikedpca.density import NoiseDensity
from spikedpca.errors import ConditionViolated, DegenerateSpectrum, InvalidParameter
from spikedpca.linalg import top_pairs_from_samples
from spikedpca.log import get_logger
from spikedpca.model import SampleRealization, SpikedModel, sample_model
from spikedpca.perturbation import chi_mean, lambda_moments
from spikedpca.rng import stream, validate_seed

LOGGER = get_logger(__name__)

T = TypeVar("T")

OUTPUT_FORMATS = ("csv", "json", "svg")
# relative slack when comparing realized values to a bound
BOUND_SLACK = 1e-12


@dataclass(frozen=True)
class SweepSpec:
    """A sweep over noise levels (at fixed ``n``) or over sample sizes (at fixed ``sigma``)."""

    model: SpikedModel
    n: Optional[int] = None
    sigma_grid: Optional[Tuple[float, ...]] = None
    n_grid: Optional[Tuple[int, ...]] = None
    trials: int = 1
    seed: int = settings.DEFAULT_SEED
    outputs: Tuple[str, ...] = ("csv",)
    overlays: bool = True

    def __post_init__(self) -> None:
        if (self.sigma_grid is None) == (self.n_grid is None):
            raise InvalidParameter("exactly one of sigma_grid and n_grid must be given")
        grid = self.sigma_grid if self.sigma_grid is not None else self.n_grid
        grid = tuple(grid)
        if not grid:
            raise InvalidParameter("grid is empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise InvalidParameter("grid must be strictly ascending")
        if self.sigma_grid is not None:
            if self.n is None or int(self.n) != self.n or self.n < 1:
                raise InvalidParameter("a sigma sweep needs a positive integer n")
            if grid[0] < 0:
                raise InvalidParameter("noise levels must be >= 0")
            object.__setattr__(self, "sigma_grid", tuple(float(s) for s in grid))
        else:
            if any(int(v) != v or v < 1 for v in grid):
                raise InvalidParameter("n grid must hold positive integers")
            object.__setattr__(self, "n_grid", tuple(int(v) for v in grid))
        if int(self.trials) != self.trials or self.trials < 1:
            raise InvalidParameter(f"trials must be >= 1, got {self.trials}")
        validate_seed(self.seed)
        unknown = set(self.outputs) - set(OUTPUT_FORMATS)
        if unknown:
            raise InvalidParameter(f"unknown output formats {sorted(unknown)}")

    @property
    def grid(self) -> Tuple[float, ...]:
        return self.sigma_grid if self.sigma_grid is not None else self.n_grid


@dataclass(frozen=True)
class SweepRecord:
    """One trial at one grid point."""

    grid_index: int
    grid_value: float
    trial: int
    lambda1: float
    lambda2: float
    overlap: float
    sin_theta: float
    crossover_flag: bool
    signal_rank: int
    predicted_lambda: Optional[float] = None
    predicted_overlap_sq: Optional[float] = None
    lambda_lower: Optional[float] = None
    lambda_upper: Optional[float] = None
    sintheta_upper: Optional[float] = None


RECORD_FIELDS = tuple(f.name for f in fields(SweepRecord))


def run_trials(
    func: Callable[[int], T],
    trials: int,
    workers: Optional[int] = None,
    desc: str = "trials",
) -> List[T]:
    """Run ``func(trial)`` for every trial on a thread pool; results come back in trial order."""
    workers = settings.WORKERS if workers is None else workers
    results: Dict[int, T] = {}
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        futures = {pool.submit(func, t): t for t in range(trials)}
        for future in tqdm(
            as_completed(futures),
            total=trials,
            desc=desc,
            disable=not settings.PROGRESS,
            leave=False,
        ):
            results[futures[future]] = future.result()
    return [results[t] for t in range(trials)]


def _trial_records(
    realizations: Sequence[Tuple[float, SampleRealization]],
    trial: int,
    overlays: Sequence[Tuple[Optional[float], Optional[float]]],
    with_bounds: bool,
) -> List[SweepRecord]:
    """Measure a sequence of realizations of one trial along the grid.

    The signal-tracking eigenvector is followed by continuation: at each grid
    point it is the one of the top two eigenvectors with the largest overlap
    with the previous signal vector (``e1`` before the first point). A
    crossover is flagged when it moves from rank one to rank two.
    """
    records = []
    previous = None
    previous_rank = 0
    for index, (value, real) in enumerate(realizations):
        values, vectors = top_pairs_from_samples(real.samples, k=min(2, real.dimension))
        p = real.dimension
        reference = previous
        if reference is None:
            reference = np.zeros(p)
            reference[0] = 1.0
        alignment = np.abs(vectors.T @ reference)
        rank = int(np.argmax(alignment))
        previous = vectors[:, rank]
        flag = index > 0 and previous_rank == 0 and rank == 1
        previous_rank = rank

        overlap, sin_theta = _angle(vectors[:, 0])
        lower = upper = sintheta = None
        if with_bounds:
            lower, upper, sintheta = _bound_overlay(real)
        predicted_lambda, predicted_overlap_sq = overlays[index]
        records.append(
            SweepRecord(
                grid_index=index,
                grid_value=float(value),
                trial=trial,
                lambda1=float(values[0]),
                lambda2=float(values[1]) if values.size > 1 else -math.inf,
                overlap=overlap,
                sin_theta=sin_theta,
                crossover_flag=bool(flag),
                signal_rank=rank,
                predicted_lambda=predicted_lambda,
                predicted_overlap_sq=predicted_overlap_sq,
                lambda_lower=lower,
                lambda_upper=upper,
                sintheta_upper=sintheta,
            )
        )
    return records


def _angle(vector: np.ndarray) -> Tuple[float, float]:
    """``(|cos theta|, sin theta)`` of a unit vector against ``e1``."""
    overlap = min(1.0, abs(float(vector[0])))
    return overlap, min(1.0, float(np.linalg.norm(vector[1:])))


def _realized_kappa(real: SampleRealization) -> float:
    return real.model.signal_norm * float(np.sqrt(np.mean(real.latents_u**2)))


def _bound_overlay(real: SampleRealization):
    kappa = _realized_kappa(real)
    if kappa <= 0 or real.dimension < 2:
        return None, None, None
    cfg = BoundConfig.with_defaults(real.dimension, real.n, real.model.noise_level, kappa)
    report = evaluate_bounds(cfg, logger=_QUIET)
    return report.lambda_lower, report.lambda_upper, report.sintheta_upper


_QUIET = get_logger(__name__ + ".bounds")
_QUIET.setLevel(logging.ERROR)


def _phase_overlays(model: SpikedModel, points: Sequence[Tuple[float, int]]):
    overlays = []
    for sigma, n in points:
        pred = phase_prediction(model.signal_norm, sigma, model.dimension / n)
        overlays.append((pred.lambda_limit, pred.overlap_sq))
    return overlays


def _merge(per_trial: List[List[SweepRecord]]) -> List[SweepRecord]:
    merged = [record for records in per_trial for record in records]
    merged.sort(key=lambda r: (r.grid_index, r.trial))
    return merged


def sweep_sigma(
    spec: SweepSpec, workers: Optional[int] = None, logger: Logger = LOGGER
) -> List[SweepRecord]:
    """Track the top eigenpair over a grid of noise levels.

    Each trial draws one set of latents and reuses it along the grid, so the
    noise level is the only thing that changes between adjacent points.
    """
    if spec.sigma_grid is None:
        raise InvalidParameter("sweep_sigma needs a sigma grid")
    model, n = spec.model, spec.n
    logger.info(
        "sigma sweep: |v|=%g p=%d n=%d grid=%d points trials=%d seed=%d",
        model.signal_norm,
        model.dimension,
        n,
        len(spec.sigma_grid),
        spec.trials,
        spec.seed,
    )
    overlays = (
        _phase_overlays(model, [(s, n) for s in spec.sigma_grid])
        if spec.overlays
        else [(None, None)] * len(spec.sigma_grid)
    )

    def one_trial(trial: int) -> List[SweepRecord]:
        base = sample_model(model, n, spec.seed, stream_key=(trial,))
        points = [(s, base.with_noise_level(s)) for s in spec.sigma_grid]
        return _trial_records(points, trial, overlays, spec.overlays)

    records = _merge(run_trials(one_trial, spec.trials, workers, desc="sigma sweep"))
    logger.info("sigma sweep done: %d records", len(records))
    return records


def sweep_n(
    spec: SweepSpec, workers: Optional[int] = None, logger: Logger = LOGGER
) -> List[SweepRecord]:
    """Track the top eigenpair over a grid of sample sizes.

    Each trial draws ``max(n_grid)`` samples once; smaller sample sizes use
    the leading rows, so the grid points of a trial are nested data sets.
    """
    if spec.n_grid is None:
        raise InvalidParameter("sweep_n needs an n grid")
    model = spec.model
    sigma = model.noise_level
    n_max = spec.n_grid[-1]
    logger.info(
        "n sweep: |v|=%g sigma=%g p=%d grid=%d points trials=%d seed=%d",
        model.signal_norm,
        sigma,
        model.dimension,
        len(spec.n_grid),
        spec.trials,
        spec.seed,
    )
    overlays = (
        _phase_overlays(model, [(sigma, n) for n in spec.n_grid])
        if spec.overlays
        else [(None, None)] * len(spec.n_grid)
    )

    def one_trial(trial: int) -> List[SweepRecord]:
        full = sample_model(model, n_max, spec.seed, stream_key=(trial,))
        points = [(n, full.head(n)) for n in spec.n_grid]
        return _trial_records(points, trial, overlays, spec.overlays)

    records = _merge(run_trials(one_trial, spec.trials, workers, desc="n sweep"))
    logger.info("n sweep done: %d records", len(records))
    return records


def summarize(records: Sequence[SweepRecord]) -> pd.DataFrame:
    """Per-grid-point statistics of a sweep."""
    if not records:
        raise InvalidParameter("no records to summarize")
    frame = pd.DataFrame([asdict(r) for r in records])
    frame["overlap_sq"] = frame["overlap"] ** 2
    grouped = frame.groupby(["grid_index", "grid_value"], sort=True)
    summary = grouped.agg(
        trials=("trial", "count"),
        mean_lambda1=("lambda1", "mean"),
        std_lambda1=("lambda1", "std"),
        mean_lambda2=("lambda2", "mean"),
        mean_overlap=("overlap", "mean"),
        std_overlap=("overlap", "std"),
        mean_overlap_sq=("overlap_sq", "mean"),
        mean_sin_theta=("sin_theta", "mean"),
        crossovers=("crossover_flag", "sum"),
        predicted_lambda=("predicted_lambda", "first"),
        predicted_overlap_sq=("predicted_overlap_sq", "first"),
        mean_lambda_lower=("lambda_lower", "mean"),
        mean_lambda_upper=("lambda_upper", "mean"),
        mean_sintheta_upper=("sintheta_upper", "mean"),
    )
    return summary.reset_index()


def crossover_points(records: Sequence[SweepRecord]) -> Dict[int, float]:
    """Grid value of the first flagged crossover of each trial that has one."""
    first: Dict[int, float] = {}
    for record in sorted(records, key=lambda r: (r.trial, r.grid_index)):
        if record.crossover_flag and record.trial not in first:
            first[record.trial] = record.grid_value
    return first


def overlap_onset(records: Sequence[SweepRecord], level: float = 0.2) -> Optional[float]:
    """First grid value whose mean overlap exceeds ``level``."""
    summary = summarize(records)
    above = summary[summary["mean_overlap"] > level]
    if above.empty:
        return None
    return float(above["grid_value"].iloc[0])


# Bound coverage


@dataclass(frozen=True)
class CoverageReport:
    """Empirical violation frequencies of the finite-sample bounds."""

    config: BoundConfig
    trials: int
    claimed: int
    budget: float
    tolerance: float
    eps: float
    frequencies: Dict[str, float]
    standard_errors: Dict[str, float]
    counts: Dict[str, int]
    wishart_tolerance: Optional[float] = None

    @property
    def within_budget(self) -> bool:
        return self.frequencies["joint"] <= self.tolerance

    @property
    def wishart_within_eps(self) -> Optional[bool]:
        if self.wishart_tolerance is None:
            return None
        return (
            self.frequencies["wishart_norm"] <= self.wishart_tolerance
            and self.frequencies["wishart_centered"] <= self.wishart_tolerance
        )

    def to_dict(self) -> dict:
        data = asdict(self)
        data["within_budget"] = self.within_budget
        data["wishart_within_eps"] = self.wishart_within_eps
        return data


def _exceeds(value: float, bound: Optional[float]) -> bool:
    return bound is not None and value > bound + BOUND_SLACK * max(1.0, abs(bound))


def _below(value: float, bound: Optional[float]) -> bool:
    return bound is not None and value < bound - BOUND_SLACK * max(1.0, abs(bound))


def _wishart_norms(xi: np.ndarray) -> Tuple[float, float]:
    n, p = xi.shape
    top = float(top_pairs_from_samples(xi, k=1)[0][0])
    if n < p:
        bottom = 0.0
    else:
        w = xi.T @ xi / n
        bottom = float(np.linalg.eigvalsh(0.5 * (w + w.T))[0])
    return top, max(top - 1.0, 1.0 - bottom)


def coverage_experiment(
    cfg: BoundConfig,
    model: SpikedModel,
    trials: int,
    seed: int,
    workers: Optional[int] = None,
    logger: Logger = LOGGER,
) -> CoverageReport:
    """Count how often the eigenvalue, angle and Wishart bounds fail.

    Each trial evaluates the bounds at its realized ``kappa = |v| s_u``.
    Trials whose realized ``kappa`` violates the signal condition are not
    claimed by the bounds and are left out of the eigenpair frequencies.

    Raises:
        ConditionViolated: when ``cfg`` itself violates the signal condition.
    """
    if not signal_condition(cfg):
        raise ConditionViolated("coverage needs a configuration satisfying the signal condition")
    if cfg.p != model.dimension:
        raise InvalidParameter(f"cfg.p={cfg.p} differs from model dimension {model.dimension}")
    model = model.with_noise_level(cfg.sigma)
    wishart = None
    if cfg.n <= cfg.p:
        wishart = wishart_norm_bound(cfg.p, cfg.n)
    logger.info("coverage: %s, %d trials, seed=%d", cfg, trials, seed)

    def one_trial(trial: int) -> Dict[str, Optional[bool]]:
        real = sample_model(model, cfg.n, seed, stream_key=(trial,))
        values, vectors = top_pairs_from_samples(real.samples, k=1)
        lam = float(values[0])
        _, sin_theta = _angle(vectors[:, 0])
        kappa = _realized_kappa(real)
        outcome: Dict[str, Optional[bool]] = {"claimed": False}
        if kappa > 0:
            trial_cfg = cfg.replace(kappa=kappa)
            report = evaluate_bounds(trial_cfg, logger=_QUIET)
            if report.lambda_lower is not None:
                outcome["claimed"] = True
                outcome["lower"] = _below(lam, report.lambda_lower)
                outcome["upper"] = _exceeds(lam, report.lambda_upper)
                outcome["sintheta"] = _exceeds(sin_theta, report.sintheta_upper)
        if wishart is not None:
            top, centered = _wishart_norms(real.latents_xi)
            outcome["wishart_norm"] = _exceeds(top, wishart[0])
            outcome["wishart_centered"] = _exceeds(centered, wishart[1])
        return outcome

    outcomes = run_trials(one_trial, trials, workers, desc="coverage")
    claimed = [o for o in outcomes if o["claimed"]]
    counts = {
        "lower": sum(bool(o["lower"]) for o in claimed),
        "upper": sum(bool(o["upper"]) for o in claimed),
        "sintheta": sum(bool(o["sintheta"]) for o in claimed),
        "joint": sum(bool(o["lower"] or o["upper"] or o["sintheta"]) for o in claimed),
    }
    denominators = {key: max(1, len(claimed)) for key in counts}
    if wishart is not None:
        counts["wishart_norm"] = sum(bool(o["wishart_norm"]) for o in outcomes)
        counts["wishart_centered"] = sum(bool(o["wishart_centered"]) for o in outcomes)
        denominators["wishart_norm"] = denominators["wishart_centered"] = trials
    frequencies = {key: counts[key] / denominators[key] for key in counts}
    errors = {
        key: math.sqrt(f * (1.0 - f) / denominators[key]) for key, f in frequencies.items()
    }
    nominal = evaluate_bounds(cfg, logger=_QUIET)
    budget = nominal.budget
    report = CoverageReport(
        config=cfg,
        trials=trials,
        claimed=len(claimed),
        budget=budget,
        tolerance=budget + 3.0 * math.sqrt(budget / max(1, len(claimed))),
        eps=nominal.eps,
        frequencies=frequencies,
        standard_errors=errors,
        counts=counts,
        wishart_tolerance=(nominal.eps + 3.0 * math.sqrt(nominal.eps / trials)) if wishart else None,
    )
    if not report.within_budget:
        logger.warning(
            "joint violation frequency %.4g exceeds tolerance %.4g",
            frequencies["joint"],
            report.tolerance,
        )
    return report


def wishart_experiment(
    p: int, n: int, trials: int, seed: int, workers: Optional[int] = None
) -> dict:
    """Empirical exceedance of the Wishart norm bounds by ``X^T X / n`` with Gaussian ``X``."""
    norm_bound, centered_bound, eps = wishart_norm_bound(p, n)

    def one_trial(trial: int) -> Tuple[bool, bool, float]:
        xi = stream(seed, (trial, 1)).standard_normal((n, p))
        top, centered = _wishart_norms(xi)
        return _exceeds(top, norm_bound), _exceeds(centered, centered_bound), top

    outcomes = run_trials(one_trial, trials, workers, desc="wishart")
    norm_freq = sum(o[0] for o in outcomes) / trials
    centered_freq = sum(o[1] for o in outcomes) / trials
    tops = np.array([o[2] for o in outcomes])
    return {
        "p": p,
        "n": n,
        "trials": trials,
        "norm_bound": norm_bound,
        "centered_bound": centered_bound,
        "eps": eps,
        "norm_exceedance": norm_freq,
        "centered_exceedance": centered_freq,
        "mean_norm": float(tops.mean()),
        "max_norm": float(tops.max()),
    }


# Moments


def _z(observed: float, predicted: float, stderr: float) -> float:
    if stderr == 0:
        return 0.0 if observed == predicted else math.copysign(math.inf, observed - predicted)
    return (observed - predicted) / stderr


def moment_experiment(
    model: SpikedModel,
    n: int,
    sigma_list: Sequence[float],
    trials: int,
    seed: int,
    workers: Optional[int] = None,
    logger: Logger = LOGGER,
) -> pd.DataFrame:
    """Empirical moments of the top eigenvalue and of ``sin theta`` against the small-noise formulas.

    Returns one row per noise level with the empirical mean and variance of
    the top eigenvalue, both variance predictions with their z-scores, and
    the empirical mean of ``sin theta`` against the prediction averaged over
    the realized ``kappa`` of each trial.
    """
    if trials < 2:
        raise InvalidParameter("moment_experiment needs at least two trials")
    logger.info("moments: %s n=%d sigmas=%s trials=%d", model, n, list(sigma_list), trials)

    def one_trial(trial: int) -> List[Tuple[float, float, float]]:
        base = sample_model(model, n, seed, stream_key=(trial,))
        kappa = _realized_kappa(base)
        rows = []
        for sigma in sigma_list:
            real = base.with_noise_level(sigma)
            values, vectors = top_pairs_from_samples(real.samples, k=1)
            rows.append((float(values[0]), _angle(vectors[:, 0])[1], kappa))
        return rows

    per_trial = run_trials(one_trial, trials, workers, desc="moments")
    rows = []
    p = model.dimension
    for j, sigma in enumerate(sigma_list):
        lam = np.array([t[j][0] for t in per_trial])
        sin_theta = np.array([t[j][1] for t in per_trial])
        kappas = np.array([t[j][2] for t in per_trial])
        predicted = lambda_moments(model.with_noise_level(sigma), n)
        mean = float(lam.mean())
        var = float(lam.var(ddof=1))
        mean_se = math.sqrt(var / trials)
        centered = lam - mean
        var_se = math.sqrt(max(0.0, float(np.mean(centered**4)) - var**2) / trials)
        if p >= 2 and np.all(kappas > 0):
            sin_pred = float(np.mean(sigma / (kappas * math.sqrt(n)) * chi_mean(p - 1)))
        else:
            sin_pred = math.nan
        sin_mean = float(sin_theta.mean())
        sin_se = float(sin_theta.std(ddof=1)) / math.sqrt(trials)
        rows.append(
            {
                "sigma": sigma,
                "trials": trials,
                "lambda_mean": mean,
                "lambda_mean_se": mean_se,
                "lambda_mean_predicted": predicted.mean,
                "lambda_mean_z": _z(mean, predicted.mean, mean_se),
                "lambda_var": var,
                "lambda_var_se": var_se,
                "lambda_var_printed": predicted.variance_printed,
                "lambda_var_printed_z": _z(var, predicted.variance_printed, var_se),
                "lambda_var_girshick": predicted.variance_girshick,
                "lambda_var_girshick_z": _z(var, predicted.variance_girshick, var_se),
                "sintheta_mean": sin_mean,
                "sintheta_mean_se": sin_se,
                "sintheta_mean_predicted": sin_pred,
                "sintheta_mean_z": _z(sin_mean, sin_pred, sin_se),
            }
        )
    return pd.DataFrame(rows)


# Joint-limit checks


def lawley_experiment(
    alphas: Sequence[float],
    n: int,
    trials: int,
    seed: int,
    chunk: int = 5000,
    logger: Logger = LOGGER,
) -> pd.DataFrame:
    """Empirical means of the sample eigenvalues of ``N(0, diag(alphas))`` data.

    Compared with Lawley's shift for every simple population eigenvalue.
    """
    alphas = np.asarray(alphas, dtype=float)
    p = alphas.size
    scale = np.sqrt(alphas)
    totals = np.zeros(p)
    squares = np.zeros(p)
    logger.info("lawley: alphas=%s n=%d trials=%d", alphas.tolist(), n, trials)
    for start in tqdm(
        range(0, trials, chunk), desc="lawley", disable=not settings.PROGRESS, leave=False
    ):
        stop = min(trials, start + chunk)
        covs = np.empty((stop - start, p, p))
        for i, trial in enumerate(range(start, stop)):
            x = stream(seed, (trial,)).standard_normal((n, p)) * scale
            covs[i] = x.T @ x / n
        eig = np.linalg.eigvalsh(covs)[:, ::-1]
        totals += eig.sum(axis=0)
        squares += (eig**2).sum(axis=0)
    means = totals / trials
    variances = (squares - trials * means**2) / (trials - 1) if trials > 1 else np.zeros(p)
    rows = []
    for k in range(1, p + 1):
        try:
            predicted = lawley_shift(alphas, n, k)
        except DegenerateSpectrum:
            predicted = math.nan
        mean = float(means[k - 1])
        se = math.sqrt(max(0.0, variances[k - 1]) / trials)
        rows.append(
            {
                "k": k,
                "alpha": float(alphas[k - 1]),
                "mean": mean,
                "se": se,
                "predicted": predicted,
                "z": _z(mean, predicted, se) if not math.isnan(predicted) else math.nan,
            }
        )
    return pd.DataFrame(rows)


def noise_norm_experiment(
    p: int,
    n: int,
    h: NoiseDensity,
    trials: int,
    seed: int,
    workers: Optional[int] = None,
) -> dict:
    """Spectral norm of heteroscedastic pure-noise covariances against its joint limit.

    Each coordinate gets a variance drawn from ``h``; the norm of the sample
    covariance is compared with ``T(alpha*)`` at ``c = p / n`` and with its
    large-``c`` approximation.
    """

    def one_trial(trial: int) -> float:
        variances = h.sample(p, stream(seed, (trial, 0)))
        x = stream(seed, (trial, 1)).standard_normal((n, p)) * np.sqrt(variances)
        return float(top_pairs_from_samples(x, k=1)[0][0])

    norms = np.array(run_trials(one_trial, trials, workers, desc="noise norm"))
    c = p / n
    alpha_star, limit = noise_norm_limit(c, h)
    approx_alpha, approx_norm = large_ratio_approx(c, h, logger=_QUIET)
    mean = float(norms.mean())
    return {
        "p": p,
        "n": n,
        "c": c,
        "density": h.describe(),
        "trials": trials,
        "mean_norm": mean,
        "std_norm": float(norms.std(ddof=1)) if trials > 1 else 0.0,
        "alpha_star": alpha_star,
        "limit_norm": limit,
        "relative_error": abs(mean - limit) / limit,
        "approx_alpha_star": approx_alpha,
        "approx_norm": approx_norm,
    }
