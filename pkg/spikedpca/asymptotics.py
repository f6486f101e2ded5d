"""Joint-limit predictions for ``p, n -> infinity`` with ``p / n = c``.

Covers the Marchenko-Pastur law and its functionals, the eigenvalue and
overlap phase transition of the single-spike model, Lawley's finite-n shift,
the spike transform ``T`` of the heteroscedastic model, the limiting noise
norm and the Stieltjes transform of the limiting spectrum.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from logging import Logger
from typing import Sequence, Tuple

import numpy as np
from scipy import integrate, optimize

from spikedpca.density import NoiseDensity
from spikedpca.errors import (
    BulkViolation,
    DegenerateSpectrum,
    InvalidParameter,
    NoConvergence,
    RootNotFound,
    SupportViolation,
)
from spikedpca.log import get_logger

LOGGER = get_logger(__name__)

QUAD_OPTIONS = {"epsabs": 0.0, "epsrel": 1e-12, "limit": 400}
ALPHA_STAR_LOWER = 1e-6
ALPHA_STAR_UPPER = 10.0
STIELTJES_TOL = 1e-13
STIELTJES_MAX_ITER = 500


def _check_ratio(c: float) -> float:
    if not c > 0 or not math.isfinite(c):
        raise InvalidParameter(f"aspect ratio c must be > 0, got {c}")
    return float(c)


# Marchenko-Pastur law


def mp_edges(c: float) -> Tuple[float, float]:
    """Support ``[(1 - sqrt c)^2, (1 + sqrt c)^2]`` of the continuous part."""
    c = _check_ratio(c)
    root = math.sqrt(c)
    return (1.0 - root) ** 2, (1.0 + root) ** 2


def mp_atom(c: float) -> float:
    """Mass at zero, ``1 - 1/c`` when ``c > 1``."""
    c = _check_ratio(c)
    return max(0.0, 1.0 - 1.0 / c)


def mp_density(c: float, x):
    """Continuous Marchenko-Pastur density; the atom at zero is given by ``mp_atom``."""
    a, b = mp_edges(c)
    x_arr = np.asarray(x, dtype=float)
    inside = (x_arr > a) & (x_arr < b) & (x_arr > 0)
    safe = np.where(inside, x_arr, 1.0)
    values = np.where(
        inside,
        np.sqrt(np.clip((b - safe) * (safe - a), 0.0, None)) / (2.0 * math.pi * safe * c),
        0.0,
    )
    return float(values) if np.ndim(x) == 0 else values


def mp_integral(c: float, func) -> float:
    """``int func(x) f_MP(x) dx`` over the continuous part.

    The substitution ``x = a + (b - a) sin^2 t`` removes the square-root edge
    singularities, leaving ``(b - a)^2 sin^2 t cos^2 t / (pi c x)`` as weight.
    """
    a, b = mp_edges(c)
    width = b - a

    def integrand(t: float) -> float:
        s, co = math.sin(t), math.cos(t)
        x = a + width * s * s
        return func(x) * width * width * s * s * co * co / (math.pi * c * x)

    value, _ = integrate.quad(integrand, 0.0, 0.5 * math.pi, **QUAD_OPTIONS)
    return value


def mp_stieltjes(c: float, z: float) -> float:
    """Closed-form Stieltjes transform ``int dF(x) / (x - z)`` of the MP law for real ``z >= b``."""
    a, b = mp_edges(c)
    if z < b:
        raise BulkViolation(f"z={z} lies inside the Marchenko-Pastur support [{a}, {b}]")
    disc = max(0.0, (z - 1.0 - c) ** 2 - 4.0 * c)
    return (1.0 - c - z + math.sqrt(disc)) / (2.0 * c * z)


def mp_lambda_functional_closed(c: float, lam: float) -> float:
    """``int x / (lam - x) dF(x)`` from the closed-form transform, ``-1 - lam m(lam)``."""
    return -1.0 - lam * mp_stieltjes(c, lam)


def mp_lambda_functional(c: float, lam: float) -> float:
    """``int x / (lam - x) f_MP(x) dx`` by quadrature.

    Raises:
        BulkViolation: when ``lam`` does not lie above the support.
    """
    a, b = mp_edges(c)
    if not lam > b:
        raise BulkViolation(f"lambda={lam} must exceed the bulk edge {b}")
    return mp_integral(c, lambda x: x / (lam - x))


# Single-spike phase transition


@dataclass(frozen=True)
class AsymptoticPrediction:
    """Joint-limit top eigenvalue and squared overlap."""

    c: float
    lambda_limit: float
    overlap_sq: float
    above_threshold: bool
    threshold_ratio: float

    def to_dict(self) -> dict:
        return asdict(self)


def pulled_up_value(alpha: float, c: float) -> float:
    """``alpha + c alpha / (alpha - 1)``, the limit of a population eigenvalue ``alpha`` at unit noise."""
    c = _check_ratio(c)
    if not alpha > 1:
        raise InvalidParameter(f"alpha must exceed 1, got {alpha}")
    return alpha + c * alpha / (alpha - 1.0)


def phase_prediction(signal_norm: float, sigma: float, c: float) -> AsymptoticPrediction:
    """Limits of the top eigenvalue and of ``R^2 = <v_pca, e1>^2``.

    The signal is detected iff ``1/c >= sigma^4 / |v|^4``. Below the
    threshold the top eigenvalue sticks to the bulk edge
    ``sigma^2 (1 + sqrt c)^2`` and ``R^2 = 0``.

    Examples:
        >>> phase_prediction(math.sqrt(2.0), 1.0, 1.0).lambda_limit
        4.5
    """
    c = _check_ratio(c)
    if signal_norm < 0 or sigma < 0:
        raise InvalidParameter("signal_norm and sigma must be >= 0")
    v2 = signal_norm**2
    s2 = sigma**2
    if v2 == 0:
        ratio = math.inf if s2 > 0 else math.nan
    else:
        ratio = (s2 / v2) ** 2

    if v2 == 0:
        return AsymptoticPrediction(c, s2 * (1.0 + math.sqrt(c)) ** 2, 0.0, False, ratio)
    if s2 == 0:
        return AsymptoticPrediction(c, v2, 1.0, True, 0.0)

    snr = v2 / s2
    above = 1.0 / c >= ratio
    if not above:
        return AsymptoticPrediction(c, s2 * (1.0 + math.sqrt(c)) ** 2, 0.0, False, ratio)
    lam = (v2 + s2) * (1.0 + c / snr)
    overlap_sq = (snr**2 / c - 1.0) / (snr**2 / c + snr)
    return AsymptoticPrediction(c, lam, max(0.0, min(1.0, overlap_sq)), True, ratio)


def overlap_functional(signal_norm: float, sigma: float, c: float) -> float:
    """Squared overlap from the MP integral ``1 / (1 + c alpha int mu / (lam - mu)^2 dF)``.

    Works in units of ``sigma^2``: ``alpha = |v|^2 / sigma^2 + 1`` and
    ``lam = alpha + c alpha / (alpha - 1)``.

    Raises:
        BulkViolation: below the detection threshold.
    """
    c = _check_ratio(c)
    if not signal_norm > 0 or not sigma > 0:
        raise InvalidParameter("overlap_functional needs signal_norm > 0 and sigma > 0")
    snr = signal_norm**2 / sigma**2
    if snr**2 < c:
        raise BulkViolation(f"|v|^4/sigma^4 = {snr**2:.4g} is below the threshold c = {c:.4g}")
    if snr**2 == c:
        return 0.0
    alpha = snr + 1.0
    lam = pulled_up_value(alpha, c)
    weight = mp_integral(c, lambda mu: mu / (lam - mu) ** 2)
    return 1.0 / (1.0 + c * alpha * weight)


def heuristic_threshold(kappa: float, sigma: float) -> float:
    """Aspect ratio ``p/n = kappa^4 / (4 sigma^4)`` from the first-order perturbation argument."""
    if not sigma > 0:
        raise InvalidParameter(f"sigma must be > 0, got {sigma}")
    return kappa**4 / (4.0 * sigma**4)


def lawley_shift(alphas: Sequence[float], n: int, k: int) -> float:
    """Finite-``n`` mean of the ``k``-th largest sample eigenvalue (``k`` starts at 1).

    ``alpha_k + (alpha_k / n) sum_{i != k} alpha_i / (alpha_k - alpha_i)``.

    Raises:
        DegenerateSpectrum: when another population eigenvalue equals ``alpha_k``.

    Examples:
        >>> round(lawley_shift([3, 1, 1, 1, 1], 2000, 1), 12)
        3.003
    """
    alphas = np.asarray(alphas, dtype=float)
    if alphas.ndim != 1 or alphas.size < 1 or np.any(alphas <= 0):
        raise InvalidParameter("alphas must be a nonempty vector of positive values")
    if np.any(np.diff(alphas) > 0):
        raise InvalidParameter("alphas must be sorted in descending order")
    if int(n) != n or n < 1:
        raise InvalidParameter(f"n must be a positive integer, got {n}")
    if int(k) != k or not 1 <= k <= alphas.size:
        raise InvalidParameter(f"k must be in [1, {alphas.size}], got {k}")
    k = int(k)
    others = np.delete(alphas, k - 1)
    alpha_k = alphas[k - 1]
    if np.any(others == alpha_k):
        raise DegenerateSpectrum(f"alpha_{k} = {alpha_k} is not a simple eigenvalue")
    return float(alpha_k + alpha_k / n * np.sum(others / (alpha_k - others)))


def lawley_spiked(alpha: float, p: int, n: int) -> float:
    """Lawley's shift for a single spike ``alpha`` over ``p - 1`` unit eigenvalues."""
    if alpha == 1:
        raise DegenerateSpectrum("alpha = 1 coincides with the noise eigenvalues")
    return alpha + (p - 1) / n * alpha / (alpha - 1.0)


# Heteroscedastic noise


def _check_above_support(alpha: float, h: NoiseDensity) -> None:
    if not alpha > h.support_max:
        raise SupportViolation(f"alpha={alpha} must exceed the support edge {h.support_max}")


def spike_transform(alpha: float, c: float, h: NoiseDensity) -> float:
    """``T(alpha) = alpha + c alpha E_h[rho / (alpha - rho)]``.

    Raises:
        SupportViolation: unless ``alpha > support_max``.
    """
    c = _check_ratio(c)
    _check_above_support(alpha, h)
    return alpha + c * alpha * h.expect(lambda r: r / (alpha - r))


def spike_transform_derivative(alpha: float, c: float, h: NoiseDensity) -> float:
    """``T'(alpha) = 1 - c E_h[rho^2 / (alpha - rho)^2]``."""
    c = _check_ratio(c)
    _check_above_support(alpha, h)
    return 1.0 - c * h.expect(lambda r: (r / (alpha - r)) ** 2)


def spike_transform_second_derivative(alpha: float, c: float, h: NoiseDensity) -> float:
    """``T''(alpha) = 2 c E_h[rho^2 / (alpha - rho)^3]``, positive above the support."""
    c = _check_ratio(c)
    _check_above_support(alpha, h)
    return 2.0 * c * h.expect(lambda r: r * r / (alpha - r) ** 3)


def noise_norm_limit(c: float, h: NoiseDensity, logger: Logger = LOGGER) -> Tuple[float, float]:
    """Critical spike ``alpha*`` and the limiting spectral norm ``T(alpha*)`` of pure noise.

    ``alpha*`` is the zero of ``T'`` above the support, searched in
    ``[a_c (1 + 1e-6), 10 a_c (1 + sqrt c)]``.

    Raises:
        RootNotFound: when ``T'`` does not change sign over the bracket.
    """
    c = _check_ratio(c)
    edge = h.support_max
    lo = edge * (1.0 + ALPHA_STAR_LOWER)
    hi = ALPHA_STAR_UPPER * edge * (1.0 + math.sqrt(c))
    f_lo = spike_transform_derivative(lo, c, h)
    f_hi = spike_transform_derivative(hi, c, h)
    if not (f_lo < 0 < f_hi):
        raise RootNotFound(
            f"dT/dalpha has no sign change on [{lo:.6g}, {hi:.6g}] (values {f_lo:.3g}, {f_hi:.3g})"
        )
    alpha_star = optimize.brentq(
        spike_transform_derivative,
        lo,
        hi,
        args=(c, h),
        xtol=1e-14,
        rtol=4.0 * np.finfo(float).eps,
        maxiter=200,
    )
    norm = spike_transform(alpha_star, c, h)
    logger.debug("noise norm c=%g h=%s: alpha*=%.12g norm=%.12g", c, h.describe(), alpha_star, norm)
    return float(alpha_star), float(norm)


def spike_in_validity_region(alpha: float, c: float, h: NoiseDensity) -> bool:
    """Whether ``alpha`` is large enough for ``T(alpha)`` to separate from the noise (``alpha > alpha*``)."""
    alpha_star, _ = noise_norm_limit(c, h)
    return alpha > alpha_star


def large_ratio_approx(c: float, h: NoiseDensity, logger: Logger = LOGGER) -> Tuple[float, float]:
    """Large-``c`` approximations of ``alpha*`` and of the noise norm.

    With ``r = mu2^2 / mu1^2``:
    ``alpha* ~ mu1 (sqrt(c) sqrt(1 + r) + 1 + 4 r / (1 + 2 r))`` and
    ``norm ~ mu1 (c + 2 sqrt(c) sqrt(1 + r))``.
    """
    c = _check_ratio(c)
    if c < 10:
        logger.warning("large_ratio_approx is a c >> 1 approximation; c = %g", c)
    mu1 = h.mu1
    r = h.mu2_sq / mu1**2
    root = math.sqrt(c) * math.sqrt(1.0 + r)
    alpha_star = mu1 * (root + 1.0 + 4.0 * r / (1.0 + 2.0 * r))
    norm = mu1 * (c + 2.0 * root)
    return alpha_star, norm


# Stieltjes transform of the limiting spectrum


@dataclass(frozen=True)
class StieltjesState:
    """Transforms of the limiting spectral law at a real point above its support.

    Attributes:
        z: Evaluation point.
        m: Transform of the ``p x p`` spectral law ``F``.
        m_bar: Transform of the ``n x n`` companion law.
        residual: Residual of the fixed-point equation for ``m``.
        inverse_z: ``z`` recomputed from ``m_bar`` by the inverse equation.
    """

    z: float
    m: float
    m_bar: float
    residual: float
    inverse_z: float


def stieltjes_inverse(m_bar: float, c: float, h: NoiseDensity) -> float:
    """``z(m_bar) = -1/m_bar + c E_h[t / (1 + t m_bar)]``."""
    return -1.0 / m_bar + c * h.expect(lambda t: t / (1.0 + t * m_bar))


def stieltjes_residual(m: float, z: float, c: float, h: NoiseDensity) -> float:
    """``m - E_h[1 / (t (1 - c - c z m) - z)]``."""
    return m - h.expect(lambda t: 1.0 / (t * (1.0 - c - c * z * m) - z))


def stieltjes_solve(
    z: float,
    c: float,
    h: NoiseDensity,
    damping: float = 0.5,
    max_iter: int = STIELTJES_MAX_ITER,
    logger: Logger = LOGGER,
) -> StieltjesState:
    """Solve for the Stieltjes transform of the limiting spectrum at real ``z``.

    The companion transform is found first by the damped iteration
    ``m_bar <- -(1 - c)/z - (c/z) E_h[1 / (1 + t m_bar)]`` started at ``-1/z``;
    if that stalls, a bracketing solve of the inverse equation on
    ``(-1/alpha*, 0)`` takes over. Then ``m = (m_bar + (1 - c)/z) / c``.

    Raises:
        SupportViolation: when ``z`` is not above the support of the limit law.
        NoConvergence: when neither solver reaches the tolerance.
    """
    c = _check_ratio(c)
    alpha_star, edge = noise_norm_limit(c, h)
    if not z > edge:
        raise SupportViolation(f"z={z} must lie above the support edge {edge:.12g}")

    m_bar = -1.0 / z
    converged = False
    for _ in range(max_iter):
        if 1.0 + h.support_max * m_bar <= 0:
            break
        target = -(1.0 - c) / z - (c / z) * h.expect(lambda t: 1.0 / (1.0 + t * m_bar))
        update = (1.0 - damping) * m_bar + damping * target
        if abs(update - m_bar) <= STIELTJES_TOL * abs(update):
            m_bar = update
            converged = True
            break
        m_bar = update

    # the other root of z(m_bar) = z lies below -1/alpha*
    if converged and not m_bar > -1.0 / alpha_star:
        converged = False
    if not converged:
        logger.debug("damped iteration stalled at z=%g; switching to bracketing", z)
        try:
            m_bar = optimize.brentq(
                lambda mb: z - stieltjes_inverse(mb, c, h),
                -1.0 / alpha_star,
                -1.0 / (4.0 * z + 4.0 * c * edge + 1.0),
                xtol=1e-16,
                rtol=4.0 * np.finfo(float).eps,
                maxiter=500,
            )
        except (ValueError, RuntimeError) as exc:
            raise NoConvergence(f"Stieltjes solve failed at z={z}: {exc}") from exc

    m = (m_bar + (1.0 - c) / z) / c
    return StieltjesState(
        z=float(z),
        m=float(m),
        m_bar=float(m_bar),
        residual=float(abs(stieltjes_residual(m, z, c, h))),
        inverse_z=float(stieltjes_inverse(m_bar, c, h)),
    )


def inverse_pulled_up(lam: float, c: float, h: NoiseDensity) -> float:
    """Population spike ``alpha(lam) = -1 / m_bar(lam)`` whose limit is ``lam``."""
    return -1.0 / stieltjes_solve(lam, c, h).m_bar
