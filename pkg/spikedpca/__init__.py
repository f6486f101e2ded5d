"""Finite-sample and asymptotic theory of PCA under a single-spike covariance model."""

from spikedpca.arrowhead import ArrowheadMatrix, arrowhead_eig, arrowhead_reduce
from spikedpca.asymptotics import (
    AsymptoticPrediction,
    heuristic_threshold,
    large_ratio_approx,
    lawley_shift,
    mp_density,
    mp_lambda_functional,
    noise_norm_limit,
    overlap_functional,
    phase_prediction,
    spike_transform,
    stieltjes_solve,
)
from spikedpca.bounds import (
    BoundConfig,
    BoundReport,
    epsilon_budget,
    evaluate_bounds,
    lambda_bounds,
    signal_condition,
    sintheta_bound,
    szarek_tail,
    wishart_norm_bound,
)
from spikedpca.density import NoiseDensity
from spikedpca.errors import IoFailure, NumericalError, PreconditionError, SpikedPcaError
from spikedpca.linalg import rank2_pair, sym_eig, top_pair
from spikedpca.model import (
    CovarianceDecomposition,
    LatentLaw,
    SampleRealization,
    SpikedModel,
    decompose_covariance,
    sample_covariance,
    sample_model,
)
from spikedpca.perturbation import lambda_moments, sintheta_moments, taylor_expand
from spikedpca.tails import TailKind, tail_probability

__version__ = "0.1.0"

__all__ = [
    "ArrowheadMatrix",
    "AsymptoticPrediction",
    "BoundConfig",
    "BoundReport",
    "CovarianceDecomposition",
    "IoFailure",
    "LatentLaw",
    "NoiseDensity",
    "NumericalError",
    "PreconditionError",
    "SampleRealization",
    "SpikedModel",
    "SpikedPcaError",
    "TailKind",
    "arrowhead_eig",
    "arrowhead_reduce",
    "decompose_covariance",
    "epsilon_budget",
    "evaluate_bounds",
    "heuristic_threshold",
    "lambda_bounds",
    "lambda_moments",
    "large_ratio_approx",
    "lawley_shift",
    "mp_density",
    "mp_lambda_functional",
    "noise_norm_limit",
    "overlap_functional",
    "phase_prediction",
    "rank2_pair",
    "sample_covariance",
    "sample_model",
    "signal_condition",
    "sintheta_bound",
    "sintheta_moments",
    "spike_transform",
    "stieltjes_solve",
    "sym_eig",
    "szarek_tail",
    "tail_probability",
    "taylor_expand",
    "top_pair",
    "wishart_norm_bound",
]
