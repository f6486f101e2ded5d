"""Spiked covariance model: sampling and covariance decomposition.

Observations follow ``x = u * |v| * e1 + sigma * xi`` where ``u`` is a scalar
latent variable with zero mean and unit variance and ``xi`` is standard
Gaussian noise in ``p`` dimensions. The signal direction is the first axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from logging import Logger
from typing import Optional, Sequence

import numpy as np

from spikedpca.errors import DegenerateSignal, InvalidParameter
from spikedpca.log import get_logger
from spikedpca.rng import stream, validate_seed

LOGGER = get_logger(__name__)


class LatentLaw(str, Enum):
    """Law of the latent variable ``u`` (zero mean, unit variance)."""

    GAUSSIAN = "gaussian"
    RADEMACHER = "rademacher"
    UNIFORM = "uniform"

    @property
    def second_moment(self) -> float:
        return 1.0

    @property
    def fourth_moment(self) -> float:
        """E{u^4} for the law."""
        return {
            LatentLaw.GAUSSIAN: 3.0,
            LatentLaw.RADEMACHER: 1.0,
            LatentLaw.UNIFORM: 9.0 / 5.0,
        }[self]

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw ``size`` latents from ``rng``.

        Gaussian draws use numpy's ziggurat sampler; uniform draws are scaled
        to ``[-sqrt(3), sqrt(3)]`` so the variance is one.
        """
        if self is LatentLaw.GAUSSIAN:
            return rng.standard_normal(size)
        if self is LatentLaw.RADEMACHER:
            return np.where(rng.random(size) < 0.5, -1.0, 1.0)
        half_width = np.sqrt(3.0)
        return rng.uniform(-half_width, half_width, size)


@dataclass(frozen=True)
class SpikedModel:
    """Population parameters of a single-spike model.

    Attributes:
        signal_norm: Norm of the signal vector ``v``.
        noise_level: Noise standard deviation ``sigma``.
        dimension: Ambient dimension ``p``.
        latent_law: Law of the latent variable ``u``.
    """

    signal_norm: float
    noise_level: float
    dimension: int
    latent_law: LatentLaw = LatentLaw.GAUSSIAN

    def __post_init__(self) -> None:
        if not np.isfinite(self.signal_norm) or self.signal_norm < 0:
            raise InvalidParameter(f"signal_norm must be >= 0, got {self.signal_norm}")
        if not np.isfinite(self.noise_level) or self.noise_level < 0:
            raise InvalidParameter(f"noise_level must be >= 0, got {self.noise_level}")
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise InvalidParameter(f"dimension must be a positive integer, got {self.dimension}")
        object.__setattr__(self, "signal_norm", float(self.signal_norm))
        object.__setattr__(self, "noise_level", float(self.noise_level))
        object.__setattr__(self, "dimension", int(self.dimension))
        object.__setattr__(self, "latent_law", LatentLaw(self.latent_law))

    @property
    def signal_vector(self) -> np.ndarray:
        v = np.zeros(self.dimension)
        v[0] = self.signal_norm
        return v

    def population_covariance(self) -> np.ndarray:
        """Return ``v v^T + sigma^2 I``."""
        v = self.signal_vector
        return np.outer(v, v) + self.noise_level**2 * np.eye(self.dimension)

    def with_noise_level(self, noise_level: float) -> "SpikedModel":
        return replace(self, noise_level=noise_level)

    def to_dict(self) -> dict:
        return {
            "signal_norm": self.signal_norm,
            "noise_level": self.noise_level,
            "dimension": self.dimension,
            "latent_law": self.latent_law.value,
        }


def _readonly(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class SampleRealization:
    """``n`` samples of a spiked model together with the latents that produced them."""

    model: SpikedModel
    samples: np.ndarray
    latents_u: np.ndarray
    latents_xi: np.ndarray
    seed: int
    stream_key: tuple = field(default=())

    def __post_init__(self) -> None:
        for name in ("samples", "latents_u", "latents_xi"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))
        n, p = self.latents_xi.shape
        if self.latents_u.shape != (n,) or self.samples.shape != (n, p):
            raise InvalidParameter("samples, latents_u and latents_xi have inconsistent shapes")
        if p != self.model.dimension:
            raise InvalidParameter(f"realization has p={p} but model has p={self.model.dimension}")

    @property
    def n(self) -> int:
        return self.latents_u.shape[0]

    @property
    def dimension(self) -> int:
        return self.latents_xi.shape[1]

    def head(self, n: int) -> "SampleRealization":
        """Return the realization made of the first ``n`` samples."""
        if not 1 <= n <= self.n:
            raise InvalidParameter(f"head size must be in [1, {self.n}], got {n}")
        return SampleRealization(
            model=self.model,
            samples=self.samples[:n],
            latents_u=self.latents_u[:n],
            latents_xi=self.latents_xi[:n],
            seed=self.seed,
            stream_key=self.stream_key,
        )

    def with_noise_level(self, noise_level: float) -> "SampleRealization":
        """Rebuild the samples for another ``sigma`` keeping the same latents."""
        model = self.model.with_noise_level(noise_level)
        return SampleRealization(
            model=model,
            samples=_compose(model, self.latents_u, self.latents_xi),
            latents_u=self.latents_u,
            latents_xi=self.latents_xi,
            seed=self.seed,
            stream_key=self.stream_key,
        )


def _compose(model: SpikedModel, u: np.ndarray, xi: np.ndarray) -> np.ndarray:
    return np.outer(u, model.signal_vector) + model.noise_level * xi


def sample_model(
    model: SpikedModel,
    n: int,
    seed: int,
    stream_key: Sequence[int] = (),
    logger: Logger = LOGGER,
) -> SampleRealization:
    """Draw ``n`` samples from ``model``.

    The latents ``u`` and the noise ``xi`` come from two independent streams
    derived from ``(seed, *stream_key)``, so the first ``m`` rows of a draw of
    size ``n`` equal a draw of size ``m`` with the same key.

    Args:
        model: Population parameters.
        n: Number of samples.
        seed: 64-bit unsigned seed.
        stream_key: Extra integers identifying the stream (trial index, ...).
        logger: Logger for debug output.

    Returns:
        The realization, with latents stored.
    """
    if int(n) != n or n < 1:
        raise InvalidParameter(f"n must be a positive integer, got {n}")
    n = int(n)
    seed = validate_seed(seed)
    key = tuple(int(k) for k in stream_key)
    u = model.latent_law.draw(stream(seed, (*key, 0)), n)
    xi = stream(seed, (*key, 1)).standard_normal((n, model.dimension))
    logger.debug("sampled n=%d p=%d seed=%d key=%s", n, model.dimension, seed, key)
    return SampleRealization(
        model=model,
        samples=_compose(model, u, xi),
        latents_u=u,
        latents_xi=xi,
        seed=seed,
        stream_key=key,
    )


def sample_covariance(
    real: SampleRealization, center: bool = False, logger: Logger = LOGGER
) -> np.ndarray:
    """Return ``S_n = (1/n) X^T X``.

    The divisor is ``n`` and no mean is removed unless ``center`` is set.
    Centered covariances fall outside the finite-sample theory implemented
    here and are reported as such in the log.
    """
    x = np.asarray(real.samples)
    if center:
        logger.warning("mean-centered covariance requested: results are outside the theory")
        x = x - x.mean(axis=0)
    s = x.T @ x / real.n
    return 0.5 * (s + s.T)


@dataclass(frozen=True, eq=False)
class CovarianceDecomposition:
    """Signal, interaction and noise parts of a sample covariance.

    ``S_n = L0 + sigma * L1 + sigma^2 * L2`` with ``L0 = kappa^2 e1 e1^T``,
    ``L1 = kappa (e1 rho^T + rho e1^T)`` and ``L2 = beta``.
    """

    s_u: float
    kappa: float
    rho: np.ndarray
    beta: np.ndarray
    L0: np.ndarray
    L1: np.ndarray
    L2: np.ndarray
    sigma: float = 0.0

    @property
    def dimension(self) -> int:
        return self.rho.shape[0]

    @property
    def rho_tail_sq(self) -> float:
        """Sum of ``rho_j^2`` over ``j >= 2``."""
        return float(np.dot(self.rho[1:], self.rho[1:]))

    def covariance(self, sigma: Optional[float] = None) -> np.ndarray:
        """Reassemble ``L0 + sigma L1 + sigma^2 L2`` (defaults to the realized sigma)."""
        sigma = self.sigma if sigma is None else sigma
        return self.L0 + sigma * self.L1 + sigma**2 * self.L2

    def signal_interaction(self, sigma: Optional[float] = None) -> np.ndarray:
        sigma = self.sigma if sigma is None else sigma
        return self.L0 + sigma * self.L1


def decompose_covariance(
    real: SampleRealization, model: Optional[SpikedModel] = None
) -> CovarianceDecomposition:
    """Compute ``s_u``, ``kappa``, ``rho``, ``beta`` and ``L0, L1, L2``.

    Raises:
        DegenerateSignal: when ``|v| = 0`` or every latent is zero.
    """
    model = real.model if model is None else model
    u = real.latents_u
    xi = real.latents_xi
    n, p = xi.shape

    s_u = float(np.sqrt(np.mean(u * u)))
    if model.signal_norm == 0 or s_u == 0:
        raise DegenerateSignal(
            f"kappa is zero (signal_norm={model.signal_norm}, s_u={s_u}); decomposition undefined"
        )
    kappa = model.signal_norm * s_u
    rho = xi.T @ u / (n * s_u)
    beta = xi.T @ xi / n
    beta = _readonly(0.5 * (beta + beta.T))

    e1 = np.zeros(p)
    e1[0] = 1.0
    L0 = kappa**2 * np.outer(e1, e1)
    L1 = kappa * (np.outer(e1, rho) + np.outer(rho, e1))
    return CovarianceDecomposition(
        s_u=s_u,
        kappa=kappa,
        rho=_readonly(rho),
        beta=beta,
        L0=_readonly(L0),
        L1=_readonly(L1),
        L2=beta,
        sigma=model.noise_level,
    )
