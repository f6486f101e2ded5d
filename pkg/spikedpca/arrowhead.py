"""Symmetric arrowhead matrices and their secular-equation eigensolver.

An arrowhead matrix has a scalar ``head`` at (1,1), a ``shaft`` along the rest
of the first row and column, and a diagonal ``tail``. Its eigenvalues are the
roots of

    f(lam) = (lam - head) - sum_j shaft_j^2 / (lam - tail_j)

which interlace the tail values, and the eigenvector of a root ``lam`` is
proportional to ``(1, shaft_j / (lam - tail_j))``.
"""

from __future__ import annotations

from dataclasses import dataclass
from logging import Logger
from typing import List, Tuple

import numpy as np

from spikedpca.errors import InvalidParameter, RootBracketFailure
from spikedpca.linalg import check_symmetric, fix_signs, sym_eig
from spikedpca.log import get_logger

LOGGER = get_logger(__name__)

DEFLATION_TOL = 1e-14
WARM_START_STEPS = 6
MAX_ITER = 100


@dataclass(frozen=True, eq=False)
class ArrowheadMatrix:
    head: float
    shaft: np.ndarray
    tail: np.ndarray

    def __post_init__(self) -> None:
        shaft = np.atleast_1d(np.asarray(self.shaft, dtype=float)).copy()
        tail = np.atleast_1d(np.asarray(self.tail, dtype=float)).copy()
        if shaft.ndim != 1 or shaft.shape != tail.shape:
            raise InvalidParameter(
                f"shaft and tail must be vectors of equal length, got {shaft.shape} and {tail.shape}"
            )
        if not (np.all(np.isfinite(shaft)) and np.all(np.isfinite(tail)) and np.isfinite(self.head)):
            raise InvalidParameter("arrowhead entries must be finite")
        shaft.setflags(write=False)
        tail.setflags(write=False)
        object.__setattr__(self, "head", float(self.head))
        object.__setattr__(self, "shaft", shaft)
        object.__setattr__(self, "tail", tail)

    @property
    def size(self) -> int:
        return self.tail.size + 1

    def dense(self) -> np.ndarray:
        """Return the full symmetric matrix."""
        m = np.diag(np.concatenate(([self.head], self.tail)))
        m[0, 1:] = self.shaft
        m[1:, 0] = self.shaft
        return m

    def to_dict(self) -> dict:
        return {"head": self.head, "shaft": self.shaft.tolist(), "tail": self.tail.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "ArrowheadMatrix":
        try:
            return cls(head=data["head"], shaft=data["shaft"], tail=data["tail"])
        except KeyError as exc:
            raise InvalidParameter(f"arrowhead description is missing {exc}") from exc


def arrowhead_reduce(s: np.ndarray) -> Tuple[ArrowheadMatrix, np.ndarray]:
    """Rotate a symmetric matrix into arrowhead form.

    The trailing ``(p-1) x (p-1)`` block is diagonalized by ``Q`` and the
    returned basis is ``V = diag(1, Q^T)``, so that ``V S V^T`` is the dense
    form of the returned arrowhead.

    Raises:
        NotSymmetric: as ``sym_eig``.
        InvalidParameter: when ``p < 2``.
    """
    s = check_symmetric(s)
    p = s.shape[0]
    if p < 2:
        raise InvalidParameter("arrowhead reduction needs p >= 2")
    tail, q = sym_eig(s[1:, 1:])
    shaft = q.T @ s[1:, 0]
    basis = np.zeros((p, p))
    basis[0, 0] = 1.0
    basis[1:, 1:] = q.T
    return ArrowheadMatrix(head=s[0, 0], shaft=shaft, tail=tail), basis


def _complement_basis(direction: np.ndarray) -> np.ndarray:
    """Orthonormal columns spanning the complement of a unit ``direction``."""
    k = direction.size
    sign = 1.0 if direction[0] >= 0 else -1.0
    w = direction.copy()
    w[0] += sign
    h = np.eye(k) - 2.0 * np.outer(w, w) / np.dot(w, w)
    return h[:, 1:]


def _group_poles(tail: np.ndarray, active: np.ndarray, threshold: float) -> List[np.ndarray]:
    """Group active tail indices whose values coincide within ``threshold``."""
    order = active[np.argsort(tail[active], kind="stable")]
    groups: List[List[int]] = []
    for idx in order:
        if groups and tail[idx] - tail[groups[-1][0]] <= threshold:
            groups[-1].append(int(idx))
        else:
            groups.append([int(idx)])
    return [np.asarray(g) for g in groups]


def _secular(tau, offset, poles, weights):
    """Secular function and derivative in shifted coordinates.

    ``tau`` has one entry per root, ``poles`` is ``(roots, poles)`` already
    shifted by each root's origin.
    """
    diff = tau[:, None] - poles
    ratio = weights / diff
    f = tau + offset - ratio.sum(axis=1)
    df = 1.0 + (ratio / diff).sum(axis=1)
    return f, df


def solve_secular(
    head: float,
    poles: np.ndarray,
    weights: np.ndarray,
    max_iter: int = MAX_ITER,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Find all roots of ``lam - head - sum(w / (lam - d))``.

    ``poles`` must be strictly ascending and ``weights`` positive. There is one
    root below the first pole, one between each pair and one above the last.
    Each root is computed as ``origin + tau`` where ``origin`` is the nearer
    pole, which keeps ``tau - pole`` accurate for the eigenvectors.

    Returns:
        ``(origins, taus, shifted_poles)`` with ``shifted_poles[i] = poles - origins[i]``.

    Raises:
        RootBracketFailure: when a root is not resolved within ``max_iter``.
    """
    k = poles.size
    radius = float(np.sum(np.sqrt(weights)))
    lower = min(head, poles[0]) - radius
    upper = max(head, poles[-1]) + radius

    left = np.concatenate(([lower], poles))
    right = np.concatenate((poles, [upper]))
    origins = np.empty(k + 1)
    origins[0] = poles[0]
    origins[-1] = poles[-1]
    if k > 1:
        mid = 0.5 * (left[1:-1] + right[1:-1])
        f_mid, _ = _secular(mid, -head, poles[None, :], weights)
        origins[1:-1] = np.where(f_mid >= 0, left[1:-1], right[1:-1])

    shifted = poles[None, :] - origins[:, None]
    offset = origins - head
    lo = left - origins
    hi = right - origins
    # poles sit exactly at the shifted origin
    for i in range(k + 1):
        if i > 0:
            lo[i] = shifted[i, i - 1]
        if i < k:
            hi[i] = shifted[i, i]

    for _ in range(WARM_START_STEPS):
        mid = 0.5 * (lo + hi)
        f_mid, _ = _secular(mid, offset, shifted, weights)
        below = f_mid < 0
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)

    eps = np.finfo(float).eps
    tau = 0.5 * (lo + hi)
    done = np.zeros(k + 1, dtype=bool)
    for _ in range(max_iter):
        f, df = _secular(tau, offset, shifted, weights)
        below = f < 0
        lo = np.where(below, tau, lo)
        hi = np.where(below, hi, tau)
        step = f / df
        newton = tau - step
        outside = ~((newton > lo) & (newton < hi)) | ~np.isfinite(newton)
        candidate = np.where(outside, 0.5 * (lo + hi), newton)
        width = hi - lo
        converged = (
            (f == 0)
            | (np.abs(candidate - tau) <= 4.0 * eps * np.abs(candidate))
            | (width <= 4.0 * eps * np.maximum(np.abs(lo), np.abs(hi)))
        )
        tau = np.where(done | (f == 0), tau, candidate)
        done |= converged
        if done.all():
            return origins, tau, shifted
    missing = np.flatnonzero(~done)
    raise RootBracketFailure(
        f"{missing.size} secular root(s) unresolved after {max_iter} iterations "
        f"(first in interval {missing[0]})"
    )


def arrowhead_eig(
    a: ArrowheadMatrix,
    deflation_tol: float = DEFLATION_TOL,
    max_iter: int = MAX_ITER,
    logger: Logger = LOGGER,
) -> Tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of an arrowhead matrix via its secular equation.

    Shaft entries with ``|b_j| <= deflation_tol * (|head| + max|tail|)`` are
    deflated: their tail value is an eigenvalue with a coordinate eigenvector.
    Tail values that coincide within the same threshold are merged into one
    pole carrying the summed weight; the surplus eigenvalues of a merged pole
    equal the pole, with eigenvectors spanning the complement of the shaft
    restricted to that group.

    Args:
        a: Arrowhead matrix with ``p >= 2``.
        deflation_tol: Relative deflation threshold.
        max_iter: Newton iteration cap per root.
        logger: Logger for debug output.

    Returns:
        Eigenvalues in descending order and orthonormal eigenvectors as
        columns, each with its largest-magnitude component positive.

    Raises:
        RootBracketFailure: when a bracketed root is not resolved.
    """
    if a.size < 2:
        raise InvalidParameter("arrowhead_eig needs p >= 2")
    p = a.size
    head, shaft, tail = a.head, a.shaft, a.tail
    scale = abs(head) + (float(np.max(np.abs(tail))) if tail.size else 0.0)
    threshold = deflation_tol * scale

    values: List[float] = []
    columns: List[np.ndarray] = []

    deflated = np.flatnonzero(np.abs(shaft) <= threshold)
    active = np.flatnonzero(np.abs(shaft) > threshold)
    for j in deflated:
        vec = np.zeros(p)
        vec[j + 1] = 1.0
        values.append(float(tail[j]))
        columns.append(vec)

    if active.size == 0:
        vec = np.zeros(p)
        vec[0] = 1.0
        values.append(head)
        columns.append(vec)
    else:
        groups = _group_poles(tail, active, threshold)
        poles = np.array([tail[g[0]] for g in groups])
        weights = np.array([float(np.dot(shaft[g], shaft[g])) for g in groups])

        for pole, g in zip(poles, groups):
            if g.size < 2:
                continue
            direction = shaft[g] / np.linalg.norm(shaft[g])
            surplus = _complement_basis(direction)
            for col in surplus.T:
                vec = np.zeros(p)
                vec[g + 1] = col
                values.append(float(pole))
                columns.append(vec)

        origins, taus, shifted = solve_secular(head, poles, weights, max_iter=max_iter)
        member_pole = np.empty(active.size)
        member_index = np.empty(active.size, dtype=int)
        pos = 0
        for gi, g in enumerate(groups):
            member_pole[pos : pos + g.size] = gi
            member_index[pos : pos + g.size] = g
            pos += g.size
        group_of = member_pole.astype(int)
        for i, (origin, tau) in enumerate(zip(origins, taus)):
            vec = np.zeros(p)
            vec[0] = 1.0
            vec[member_index + 1] = shaft[member_index] / (tau - shifted[i, group_of])
            vec /= np.linalg.norm(vec)
            values.append(float(origin + tau))
            columns.append(vec)
        logger.debug(
            "arrowhead p=%d: %d deflated, %d poles, %d merged",
            p,
            deflated.size,
            poles.size,
            active.size - poles.size,
        )

    w = np.asarray(values)
    v = np.column_stack(columns)
    order = np.argsort(-w, kind="stable")
    return w[order], fix_signs(v[:, order])
