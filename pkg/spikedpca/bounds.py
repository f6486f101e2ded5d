"""Finite-sample bounds on the leading sample eigenpair.

For a realized signal strength ``kappa``, noise level ``sigma`` and free
deviation parameters ``s1, s2, s3``, the top eigenvalue and the angle of the
top eigenvector are bounded with probability at least ``1 - eps - eps1 -
eps2 - eps3``. The Wishart norm bounds used along the way are also exposed.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from logging import Logger
from typing import Optional, Tuple

import numpy as np
from scipy import optimize, stats

from spikedpca import settings
from spikedpca.errors import ConditionViolated, InvalidParameter, RegimeViolation
from spikedpca.linalg import check_symmetric, sym_eig
from spikedpca.log import get_logger
from spikedpca.tails import TailKind, tail_probability

LOGGER = get_logger(__name__)

# exp(-p / (2 (sqrt5 + 2)^2)) exponent denominator
_SZAREK_CONSTANT = 2.0 * (math.sqrt(5.0) + 2.0) ** 2


@dataclass(frozen=True)
class BoundConfig:
    """Inputs of the finite-sample eigenpair bounds."""

    s1: float
    s2: float
    s3: float
    p: int
    n: int
    sigma: float
    kappa: float

    def __post_init__(self) -> None:
        for name in ("s1", "s2", "s3"):
            value = getattr(self, name)
            if not value > 0:
                raise InvalidParameter(f"{name} must be > 0, got {value}")
        for name in ("p", "n"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise InvalidParameter(f"{name} must be a positive integer, got {value}")
            object.__setattr__(self, name, int(value))
        if self.p < 2:
            raise InvalidParameter("the bounds need p >= 2")
        if not self.sigma >= 0:
            raise InvalidParameter(f"sigma must be >= 0, got {self.sigma}")
        if not self.kappa > 0:
            raise InvalidParameter(f"kappa must be > 0, got {self.kappa}")

    @classmethod
    def with_defaults(
        cls,
        p: int,
        n: int,
        sigma: float,
        kappa: float,
        level: Optional[float] = None,
    ) -> "BoundConfig":
        """Pick ``s1, s2, s3`` so that each of ``eps1, eps2, eps3`` equals ``level``."""
        level = settings.TAIL_LEVEL if level is None else level
        s1, s2, s3 = default_deviations(p, level)
        return cls(s1=s1, s2=s2, s3=s3, p=p, n=n, sigma=sigma, kappa=kappa)

    def replace(self, **changes) -> "BoundConfig":
        return BoundConfig(**{**asdict(self), **changes})

    @property
    def shift(self) -> float:
        """``2 sigma s1 / (kappa sqrt(n))``."""
        return 2.0 * self.sigma * self.s1 / (self.kappa * math.sqrt(self.n))

    @property
    def aspect(self) -> float:
        """``(p - 1) / n``."""
        return (self.p - 1) / self.n


@lru_cache(maxsize=256)
def default_deviations(p: int, level: float) -> Tuple[float, float, float]:
    """Deviation parameters giving per-term failure probability ``level``."""
    if not 0 < level < 1:
        raise InvalidParameter(f"level must be in (0, 1), got {level}")
    if p < 2:
        raise InvalidParameter("default deviations need p >= 2")
    s1 = float(stats.norm.isf(level / 2.0))
    s3 = float(stats.chi2.isf(level, 1))
    dof = p - 1

    def excess(s2: float) -> float:
        return tail_probability(TailKind.CHISQ_TWO_SIDED_SCALED, dof, s2) - level

    upper = 4.0
    while excess(upper) > 0:
        upper *= 2.0
    s2 = float(optimize.brentq(excess, 0.0, upper, xtol=1e-12))
    return s1, s2, s3


@dataclass(frozen=True)
class BoundReport:
    """Evaluated bounds; a bound is ``None`` when its precondition fails."""

    config: BoundConfig
    eps: float
    eps1: float
    eps2: float
    eps3: float
    budget: float
    condition_holds: bool
    lambda_lower: Optional[float]
    lambda_upper: Optional[float]
    sintheta_upper: Optional[float]
    eigengap_lower: float
    lambda_lower_proof: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)


def szarek_epsilon(p: int) -> float:
    """``exp(-p / (2 (sqrt5 + 2)^2))``."""
    return math.exp(-p / _SZAREK_CONSTANT)


def epsilon_budget(cfg: BoundConfig) -> Tuple[float, float, float, float]:
    """Return ``(eps, eps1, eps2, eps3)``.

    Examples:
        >>> cfg = BoundConfig(s1=2, s2=2, s3=4, p=200, n=50, sigma=0.5, kappa=2.8)
        >>> round(epsilon_budget(cfg)[0], 5)
        0.0038
    """
    if cfg.p < 2:
        raise InvalidParameter("epsilon_budget needs p >= 2")
    eps = szarek_epsilon(cfg.p)
    eps1 = tail_probability(TailKind.ABS_NORMAL, None, cfg.s1)
    eps2 = tail_probability(TailKind.CHISQ_TWO_SIDED_SCALED, cfg.p - 1, cfg.s2)
    eps3 = tail_probability(TailKind.CHISQ_UPPER, 1, cfg.s3)
    return eps, eps1, eps2, eps3


def noise_norm_bound(p: int, n: int) -> float:
    """``(1 + sqrt((p-1)/n))^2 + (p-1)/n``, the right-hand side of the signal condition."""
    q = (p - 1) / n
    return (1.0 + math.sqrt(q)) ** 2 + q


def signal_condition(cfg: BoundConfig) -> bool:
    """Whether ``kappa^2 - 2 sigma s1 kappa / sqrt(n)`` exceeds the noise bound."""
    left = cfg.kappa**2 - 2.0 * cfg.sigma * cfg.s1 * cfg.kappa / math.sqrt(cfg.n)
    return left > cfg.sigma**2 * noise_norm_bound(cfg.p, cfg.n)


def _require_lambda_preconditions(cfg: BoundConfig) -> None:
    if not signal_condition(cfg):
        raise ConditionViolated("signal condition does not hold; eigenvalue bounds are not claimed")
    if not 1.0 - cfg.shift > 0:
        raise ConditionViolated("1 - 2 sigma s1 / (kappa sqrt(n)) must be positive")


def _lower_terms(cfg: BoundConfig) -> Tuple[float, float, float]:
    x = cfg.shift
    q = cfg.aspect
    a2 = cfg.s2 / math.sqrt(cfg.p - 1)
    ratio = cfg.sigma**2 / cfg.kappa**2
    second = ratio * q * (1.0 - a2) / (1.0 + x)
    third = ratio**2 * q**2 * (1.0 + a2) ** 2 / (1.0 - x) ** 3
    return x, second, third


def lambda_lower_variants(cfg: BoundConfig) -> Tuple[float, float]:
    """Lower bound in its stated grouping and with the factor (1 - x) pulled out.

    The stated form is ``kappa^2 [1 - x + A - B]``; the factored form carries the
    factor ``(1 - x)`` outside: ``kappa^2 (1 - x) [1 + A - B]``.
    """
    _require_lambda_preconditions(cfg)
    x, second, third = _lower_terms(cfg)
    k2 = cfg.kappa**2
    printed = k2 * (1.0 - x + second - third)
    proof = k2 * (1.0 - x) * (1.0 + second - third)
    return printed, proof


def lambda_bounds(cfg: BoundConfig) -> Tuple[float, float]:
    """Lower and upper bounds on the top sample eigenvalue.

    Raises:
        ConditionViolated: when the signal condition fails or
            ``2 sigma s1 / (kappa sqrt(n)) >= 1``.
    """
    lower, _ = lambda_lower_variants(cfg)
    x = cfg.shift
    a2 = cfg.s2 / math.sqrt(cfg.p - 1)
    inner = 1.0 + x + cfg.sigma**2 * cfg.s3 / cfg.kappa**2
    upper = cfg.kappa**2 * inner + cfg.sigma * cfg.kappa * math.sqrt(cfg.aspect) * math.sqrt(
        inner
    ) * (1.0 + a2)
    return lower, upper


def sintheta_bound(cfg: BoundConfig, logger: Logger = LOGGER) -> float:
    """Upper bound on ``sin theta`` between the top sample eigenvector and ``e1``.

    Raises:
        ConditionViolated: when ``1 - 2 sigma s1 / (kappa sqrt(n)) - sigma^2 / kappa^2 <= 0``;
            the bound is undefined there.
    """
    x = cfg.shift
    ratio = cfg.sigma**2 / cfg.kappa**2
    denom = 1.0 - x - ratio
    if not denom > 0:
        logger.warning(
            "sin theta bound undefined: 1 - 2 sigma s1/(kappa sqrt n) - sigma^2/kappa^2 = %.4g",
            denom,
        )
        raise ConditionViolated("sin theta bound is undefined for this configuration")
    a2 = cfg.s2 / math.sqrt(cfg.p - 1)
    first = (cfg.sigma / cfg.kappa) * math.sqrt(cfg.aspect) * (1.0 + x) * (1.0 + a2)
    second = 4.0 * math.sqrt(2.0) * ratio * (cfg.p / cfg.n) / denom
    return first + second


def eigengap_lower(cfg: BoundConfig) -> float:
    """``kappa^2 - 2 s1 sigma kappa / sqrt(n) - sigma^2``."""
    return (
        cfg.kappa**2
        - 2.0 * cfg.s1 * cfg.sigma * cfg.kappa / math.sqrt(cfg.n)
        - cfg.sigma**2
    )


def evaluate_bounds(cfg: BoundConfig, logger: Logger = LOGGER) -> BoundReport:
    """Evaluate every bound of the configuration into a report."""
    eps, eps1, eps2, eps3 = epsilon_budget(cfg)
    holds = signal_condition(cfg)
    if cfg.n > cfg.p:
        logger.warning("n=%d > p=%d: the bounds are stated for n <= p", cfg.n, cfg.p)

    lower = upper = lower_proof = None
    try:
        lower, upper = lambda_bounds(cfg)
        _, lower_proof = lambda_lower_variants(cfg)
    except ConditionViolated as exc:
        logger.info("eigenvalue bounds not claimed: %s", exc)

    try:
        sintheta = sintheta_bound(cfg, logger=logger)
    except ConditionViolated:
        sintheta = None

    return BoundReport(
        config=cfg,
        eps=eps,
        eps1=eps1,
        eps2=eps2,
        eps3=eps3,
        budget=eps + eps1 + eps2 + eps3,
        condition_holds=holds,
        lambda_lower=lower,
        lambda_upper=upper,
        sintheta_upper=sintheta,
        eigengap_lower=eigengap_lower(cfg),
        lambda_lower_proof=lower_proof,
    )


def compare_lower_forms(cfg: BoundConfig) -> dict:
    """Report both groupings of the eigenvalue lower bound and their difference."""
    printed, proof = lambda_lower_variants(cfg)
    return {"printed": printed, "proof": proof, "difference": printed - proof}


def _check_regime(p: int, n: int) -> None:
    if int(p) != p or int(n) != n or p < 1 or n < 1:
        raise InvalidParameter(f"p and n must be positive integers, got p={p}, n={n}")
    if n > p:
        raise RegimeViolation(f"Wishart bounds need n <= p, got n={n}, p={p}")


def wishart_norm_bound(p: int, n: int) -> Tuple[float, float, float]:
    """Bounds on ``|W|`` and ``|W - I|`` for ``W = X^T X / n`` with Gaussian ``X``.

    Returns:
        ``((1 + sqrt(p/n))^2 + p/n, 4 p/n, eps)``; both hold with probability
        at least ``1 - eps``.

    Raises:
        RegimeViolation: when ``n > p``.
    """
    _check_regime(p, n)
    ratio = p / n
    return (1.0 + math.sqrt(ratio)) ** 2 + ratio, 4.0 * ratio, szarek_epsilon(p)


def szarek_tail(p: int, n: int, alpha: float, relaxed: bool = False) -> float:
    """Upper bound on ``Pr{lambda_W > (1 + sqrt(p/n))^2 + alpha p/n}``.

    Args:
        p: Dimension.
        n: Number of samples (``n <= p``).
        alpha: Positive excess.
        relaxed: Use the ``n = p`` worst case of the exponent,
            ``alpha / (sqrt(alpha + 4) + 2)``, valid for every ``n <= p``.
    """
    _check_regime(p, n)
    if not alpha > 0:
        raise InvalidParameter(f"alpha must be > 0, got {alpha}")
    base = 2.0 if relaxed else 1.0 + math.sqrt(n / p)
    t = alpha / (math.sqrt(alpha + base**2) + base)
    return math.exp(-0.5 * p * t * t)


def weyl_interval(a: np.ndarray, b: np.ndarray) -> Tuple[float, float]:
    """First-order interval for the top eigenvalue of ``A + B``.

    With ``(lambda_1, v_1)`` the top eigenpair of ``A``, returns
    ``(lambda_1 + <v1, B v1>, lambda_1 + <v1, B v1> + |P_1 B v_1|)``.

    Raises:
        ConditionViolated: if ``lambda_1`` is not simple or
            ``|B| >= lambda_1 + <v1, B v1> - lambda_2``.
    """
    a = check_symmetric(a)
    b = check_symmetric(b)
    values, vectors = sym_eig(a)
    v1 = vectors[:, 0]
    bv = b @ v1
    shift = float(v1 @ bv)
    residual = float(np.linalg.norm(bv - shift * v1))
    lambda2 = values[1] if values.size > 1 else -math.inf
    norm_b = float(np.linalg.norm(b, 2))
    if not values[0] > lambda2 or not norm_b < values[0] + shift - lambda2:
        raise ConditionViolated("perturbation too large for the first-order eigenvalue interval")
    return float(values[0] + shift), float(values[0] + shift + residual)


def davis_kahan_bound(norm_b: float, gap: float) -> float:
    """``|B| / delta`` bound on the sine of the eigenvector rotation."""
    if not gap > 0:
        raise ConditionViolated(f"eigengap must be positive, got {gap}")
    return norm_b / gap
