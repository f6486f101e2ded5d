"""Small-noise expansions of the top eigenpair and the resulting moments."""

from __future__ import annotations

import math
from dataclasses import dataclass
from logging import Logger
from typing import NamedTuple, Optional, Tuple

import numpy as np
from scipy.special import gammaln

from spikedpca.errors import DegenerateSignal, InvalidParameter
from spikedpca.log import get_logger
from spikedpca.model import CovarianceDecomposition, SpikedModel

LOGGER = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class TaylorEigenpair:
    """Coefficients of ``sigma^0, sigma^1, sigma^2`` for the top eigenpair.

    Attributes:
        lambda_terms: ``(kappa^2, 2 kappa rho_1, sum_{j>=2} rho_j^2 + beta_11)``.
        vector_terms: ``(e1, v1, v2)``; ``v1`` and ``v2`` have a zero first entry.
        radius_note: Set when the quadratic term is large enough that the
            expansion has likely left its convergence region at ``sigma``.
        sigma: Noise level the note refers to.
    """

    lambda_terms: Tuple[float, float, float]
    vector_terms: Tuple[np.ndarray, np.ndarray, np.ndarray]
    radius_note: Optional[str] = None
    sigma: float = 0.0

    def eigenvalue(self, sigma: float) -> float:
        l0, l1, l2 = self.lambda_terms
        return l0 + sigma * l1 + sigma**2 * l2

    def eigenvector(self, sigma: float, order: int = 1) -> np.ndarray:
        """Normalized eigenvector expansion truncated after ``sigma^order``."""
        if order not in (0, 1, 2):
            raise InvalidParameter(f"order must be 0, 1 or 2, got {order}")
        v = np.zeros_like(self.vector_terms[0])
        for k in range(order + 1):
            v = v + sigma**k * self.vector_terms[k]
        return v / np.linalg.norm(v)


def taylor_expand(
    decomp: CovarianceDecomposition,
    sigma: Optional[float] = None,
    logger: Logger = LOGGER,
) -> TaylorEigenpair:
    """Expand the top eigenpair of ``L0 + sigma L1 + sigma^2 L2`` around ``sigma = 0``.

    Args:
        decomp: Covariance decomposition of a realization.
        sigma: Noise level used for the convergence diagnostic; defaults to the
            realization's own noise level.
        logger: Logger receiving the diagnostic.

    Returns:
        The expansion coefficients.

    Raises:
        DegenerateSignal: when ``kappa = 0``.
    """
    kappa = decomp.kappa
    if not kappa > 0:
        raise DegenerateSignal("expansion needs kappa > 0")
    sigma = decomp.sigma if sigma is None else sigma
    rho = np.asarray(decomp.rho)
    beta = np.asarray(decomp.beta)
    p = rho.size

    lambda_terms = (
        kappa**2,
        2.0 * kappa * float(rho[0]),
        decomp.rho_tail_sq + float(beta[0, 0]),
    )
    v0 = np.zeros(p)
    v0[0] = 1.0
    v1 = np.zeros(p)
    v1[1:] = rho[1:] / kappa
    v2 = np.zeros(p)
    v2[1:] = (beta[0, 1:] - 2.0 * rho[0] * rho[1:]) / kappa**2

    note = None
    quadratic = abs(sigma**2 * lambda_terms[2])
    if quadratic > 0.5 * lambda_terms[0]:
        note = (
            f"sigma^2 term {quadratic:.4g} exceeds half of kappa^2={lambda_terms[0]:.4g}; "
            "a crossover with a noise eigenvalue is likely"
        )
        logger.warning("taylor_expand: %s", note)
    return TaylorEigenpair(
        lambda_terms=lambda_terms,
        vector_terms=(v0, v1, v2),
        radius_note=note,
        sigma=sigma,
    )


def _positive_int(name: str, value) -> int:
    if int(value) != value or value < 1:
        raise InvalidParameter(f"{name} must be a positive integer, got {value}")
    return int(value)


class LambdaMoments(NamedTuple):
    mean: float
    variance_printed: float
    variance_girshick: float


class SinThetaMoments(NamedTuple):
    mean: float
    variance: float


def lambda_moments(model: SpikedModel, n: int) -> LambdaMoments:
    """Small-sigma mean and variance of the top eigenvalue.

    Valid up to ``O(sigma^4)`` and transcendentally small terms. Two variances
    are given: the first uses ``E{u^4}`` as written in the classical statement,
    the second uses ``E{u^4} - 1``, which reproduces Girshick's ``2/n`` factor
    for Gaussian latents.
    """
    n = _positive_int("n", n)
    v2 = model.signal_norm**2
    s2 = model.noise_level**2
    p = model.dimension
    m2 = model.latent_law.second_moment
    m4 = model.latent_law.fourth_moment
    mean = v2 + s2 * (1.0 + (p - 1) / n)
    cross = 4.0 * s2 * v2 * m2 / n
    return LambdaMoments(
        mean=mean,
        variance_printed=v2**2 * m4 / n + cross,
        variance_girshick=v2**2 * (m4 - m2**2) / n + cross,
    )


def chi_mean(dof: int) -> float:
    """``E sqrt(chi2_dof) = sqrt(2) Gamma((dof+1)/2) / Gamma(dof/2)``."""
    return math.sqrt(2.0) * math.exp(gammaln((dof + 1) / 2.0) - gammaln(dof / 2.0))


def sintheta_moments(kappa: float, n: int, p: int, sigma: float) -> SinThetaMoments:
    """Small-sigma mean and variance of ``sin theta``, conditional on the latents.

    The variance is the large-``p`` value ``sigma^2 / (2 kappa^2 n)``; its
    relative error is ``O(1/p)``.
    """
    n = _positive_int("n", n)
    if _positive_int("p", p) < 2:
        raise InvalidParameter("sintheta_moments needs p >= 2")
    if not kappa > 0:
        raise InvalidParameter(f"kappa must be > 0, got {kappa}")
    scale = sigma / (kappa * math.sqrt(n))
    return SinThetaMoments(
        mean=scale * chi_mean(p - 1),
        variance=sigma**2 / (2.0 * kappa**2 * n),
    )


def sintheta_mean_large_p(kappa: float, n: int, p: int, sigma: float) -> float:
    """Large-``p`` approximation of the ``sin theta`` mean."""
    n = _positive_int("n", n)
    if _positive_int("p", p) < 2:
        raise InvalidParameter("sintheta_mean_large_p needs p >= 2")
    return sigma * math.sqrt(p) / (kappa * math.sqrt(n)) * (1.0 - 1.0 / (4.0 * (p - 1)))
