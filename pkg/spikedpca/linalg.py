"""Dense symmetric eigensolvers and the closed-form rank-2 eigenpair."""

from __future__ import annotations

import math
from dataclasses import dataclass
from logging import Logger
from typing import Tuple

import numpy as np
import scipy.linalg

from spikedpca.errors import InvalidParameter, NoConvergence, NotSymmetric
from spikedpca.log import get_logger
from spikedpca.model import CovarianceDecomposition

LOGGER = get_logger(__name__)

SYMMETRY_TOL = 1e-10
METHODS = ("lapack", "householder-ql")


@dataclass(frozen=True, eq=False)
class PcaResult:
    """Leading eigenpair of a sample covariance and its alignment with ``e1``.

    Attributes:
        lambda_pca: Largest eigenvalue.
        v_pca: Unit eigenvector, signed so that its first component is >= 0.
        lambda2: Second eigenvalue (``-inf`` when ``p == 1``).
        sin_theta: ``sqrt(1 - overlap^2)``.
        overlap: ``|<v_pca, e1>|``.
        second_overlap: ``|<v_2, e1>|`` for the second eigenvector.
    """

    lambda_pca: float
    v_pca: np.ndarray
    lambda2: float
    sin_theta: float
    overlap: float
    second_overlap: float = 0.0


@dataclass(frozen=True, eq=False)
class Rank2Pair:
    """Nonzero eigenvalues of ``L0 + sigma L1`` and the top eigenvector."""

    lambda_plus: float
    lambda_minus: float
    v_plus: np.ndarray
    normalization: float


def check_symmetric(m: np.ndarray, tol: float = SYMMETRY_TOL) -> np.ndarray:
    """Validate a square symmetric matrix and return it as a float array.

    Raises:
        NotSymmetric: when ``max|M - M^T| > tol * max(1, max|M|)``.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidParameter(f"expected a square matrix, got shape {m.shape}")
    if m.size == 0:
        raise InvalidParameter("empty matrix")
    asymmetry = float(np.max(np.abs(m - m.T)))
    scale = max(1.0, float(np.max(np.abs(m))))
    if asymmetry > tol * scale:
        raise NotSymmetric(f"matrix asymmetry {asymmetry:.3e} exceeds {tol:.0e} * {scale:.3e}")
    return m


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip columns so that each one's largest-magnitude component is positive."""
    vectors = np.array(vectors, dtype=float)
    if vectors.ndim == 1:
        return fix_signs(vectors[:, None])[:, 0]
    rows = np.argmax(np.abs(vectors), axis=0)
    signs = np.where(vectors[rows, np.arange(vectors.shape[1])] < 0, -1.0, 1.0)
    return vectors * signs


def householder_tridiagonalize(m: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Reduce a symmetric matrix to tridiagonal form ``Q^T M Q``.

    Returns:
        Diagonal ``d``, sub-diagonal ``e`` (``e[i] = T[i+1, i]``, last entry 0)
        and the accumulated orthogonal ``Q``.
    """
    a = np.array(m, dtype=float)
    p = a.shape[0]
    q = np.eye(p)
    for k in range(p - 2):
        x = a[k + 1 :, k]
        norm_x = np.linalg.norm(x)
        if norm_x == 0.0:
            continue
        alpha = -math.copysign(norm_x, x[0])
        v = x.copy()
        v[0] -= alpha
        norm_v = np.linalg.norm(v)
        if norm_v == 0.0:
            continue
        v /= norm_v
        a[k + 1 :, :] -= 2.0 * np.outer(v, v @ a[k + 1 :, :])
        a[:, k + 1 :] -= 2.0 * np.outer(a[:, k + 1 :] @ v, v)
        q[:, k + 1 :] -= 2.0 * np.outer(q[:, k + 1 :] @ v, v)
    d = np.diag(a).copy()
    e = np.zeros(p)
    e[: p - 1] = np.diag(a, -1)
    return d, e, q


def tridiagonal_ql(
    d: np.ndarray, e: np.ndarray, z: np.ndarray, max_iter: int = 60
) -> Tuple[np.ndarray, np.ndarray]:
    """Implicit-shift QL iteration on a symmetric tridiagonal matrix.

    ``d`` and ``e`` are consumed. Rotations are accumulated into the columns
    of ``z``, so passing the Householder ``Q`` yields eigenvectors of the
    original matrix.
    """
    d = np.array(d, dtype=float)
    e = np.array(e, dtype=float)
    z = np.array(z, dtype=float)
    n = d.size
    eps = np.finfo(float).eps
    for l in range(n):
        iteration = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            iteration += 1
            if iteration > max_iter:
                raise NoConvergence(f"QL iteration did not converge for eigenvalue {l}")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                col = z[:, i + 1].copy()
                z[:, i + 1] = s * z[:, i] + c * col
                z[:, i] = c * z[:, i] - s * col
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return d, z


def sym_eig(
    m: np.ndarray, method: str = "lapack", logger: Logger = LOGGER
) -> Tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix.

    Args:
        m: Symmetric matrix (within ``1e-10`` relative).
        method: ``"lapack"`` (``numpy.linalg.eigh``) or ``"householder-ql"``
            (Householder tridiagonalization followed by implicit QL).
        logger: Logger for debug output.

    Returns:
        Eigenvalues in descending order and the matching orthonormal
        eigenvectors as columns, each with its largest-magnitude component
        positive.

    Examples:
        >>> w, v = sym_eig(np.diag([1.0, 3.0]))
        >>> w
        array([3., 1.])
    """
    m = check_symmetric(m)
    sym = 0.5 * (m + m.T)
    if method == "lapack":
        w, v = np.linalg.eigh(sym)
    elif method == "householder-ql":
        d, e, q = householder_tridiagonalize(sym)
        w, v = tridiagonal_ql(d, e, q)
    else:
        raise InvalidParameter(f"unknown eigensolver {method!r}; expected one of {METHODS}")
    order = np.argsort(-w, kind="stable")
    logger.debug("sym_eig p=%d method=%s", m.shape[0], method)
    return w[order], fix_signs(v[:, order])


def _pca_result(values: np.ndarray, vectors: np.ndarray) -> PcaResult:
    v = np.array(vectors[:, 0], dtype=float)
    if v[0] < 0:
        v = -v
    overlap = min(1.0, abs(float(v[0])))
    second_overlap = min(1.0, abs(float(vectors[0, 1]))) if vectors.shape[1] > 1 else 0.0
    return PcaResult(
        lambda_pca=float(values[0]),
        v_pca=v,
        lambda2=float(values[1]) if values.size > 1 else -math.inf,
        sin_theta=math.sqrt(max(0.0, 1.0 - overlap * overlap)),
        overlap=overlap,
        second_overlap=second_overlap,
    )


def top_pair(m: np.ndarray, method: str = "lapack") -> PcaResult:
    """Leading eigenpair of ``m`` with overlap against the first axis."""
    values, vectors = sym_eig(m, method=method)
    return _pca_result(values, vectors)


def top_pairs_from_samples(samples: np.ndarray, k: int = 2) -> Tuple[np.ndarray, np.ndarray]:
    """Largest ``k`` eigenpairs of ``(1/n) X^T X`` without forming it when ``n < p``.

    A thin SVD of ``X / sqrt(n)`` is used in the wide case; otherwise only the
    top ``k`` eigenpairs of the covariance are requested from LAPACK.
    """
    x = np.asarray(samples, dtype=float)
    n, p = x.shape
    k = min(k, p)
    if k <= n < p:
        _, s, vt = np.linalg.svd(x / math.sqrt(n), full_matrices=False)
        return s[:k] ** 2, fix_signs(vt[:k].T)
    cov = x.T @ x / n
    cov = 0.5 * (cov + cov.T)
    w, v = scipy.linalg.eigh(cov, subset_by_index=[p - k, p - 1])
    order = np.argsort(-w, kind="stable")
    return w[order], fix_signs(v[:, order])


def top_pair_from_samples(samples: np.ndarray) -> PcaResult:
    """``top_pair`` of the uncentered sample covariance of ``samples``."""
    values, vectors = top_pairs_from_samples(samples, k=2)
    return _pca_result(values, vectors)


def rank2_pair(decomp: CovarianceDecomposition, sigma: float) -> Rank2Pair:
    """Closed-form nonzero eigenpairs of ``L0 + sigma L1``.

    With ``a = kappa^2 + 2 sigma kappa rho_1`` and ``r^2 = sum_{j>=2} rho_j^2``
    the eigenvalues are ``(a +- sqrt(a^2 + 4 sigma^2 kappa^2 r^2)) / 2``. The
    smaller-magnitude root is obtained from the product of the roots to avoid
    cancellation.
    """
    kappa = decomp.kappa
    if kappa <= 0:
        raise InvalidParameter("rank2_pair requires kappa > 0")
    a = kappa**2 + 2.0 * sigma * kappa * float(decomp.rho[0])
    product = (sigma * kappa) ** 2 * decomp.rho_tail_sq
    disc = math.sqrt(a * a + 4.0 * product)
    if a >= 0:
        lambda_plus = 0.5 * (a + disc)
        lambda_minus = -product / lambda_plus if lambda_plus > 0 else 0.0
    else:
        lambda_minus = 0.5 * (a - disc)
        lambda_plus = -product / lambda_minus

    p = decomp.dimension
    v = np.zeros(p)
    v[0] = 1.0
    if lambda_plus > 0:
        v[1:] = (sigma * kappa / lambda_plus) * decomp.rho[1:]
    normalization = float(np.linalg.norm(v))
    return Rank2Pair(
        lambda_plus=lambda_plus,
        lambda_minus=lambda_minus,
        v_plus=v / normalization,
        normalization=normalization,
    )
