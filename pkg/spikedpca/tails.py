"""Normal and chi-square tail probabilities."""

from __future__ import annotations

import math
from enum import Enum
from typing import Optional, Union

from scipy import special

from spikedpca.errors import InvalidDof, InvalidParameter


class TailKind(str, Enum):
    ABS_NORMAL = "abs-normal"
    CHISQ_UPPER = "chisq-upper"
    CHISQ_TWO_SIDED_SCALED = "chisq-two-sided-scaled"


def _check_dof(dof: Optional[int]) -> int:
    if dof is None or int(dof) != dof or dof < 1:
        raise InvalidDof(f"degrees of freedom must be a positive integer, got {dof}")
    return int(dof)


def tail_probability(
    kind: Union[TailKind, str], dof: Optional[int], threshold: float
) -> float:
    """Tail probability of a normal or chi-square variable.

    Args:
        kind: ``abs-normal`` gives ``Pr{|N(0,1)| > t}``; ``chisq-upper`` gives
            ``Pr{chi2_d > t}``; ``chisq-two-sided-scaled`` gives
            ``Pr{|chi2_d / d - 1| > t / sqrt(d)}``.
        dof: Degrees of freedom, required for the chi-square kinds.
        threshold: Nonnegative threshold ``t``.

    Returns:
        A probability in ``[0, 1]``.

    Raises:
        InvalidDof: when a chi-square kind lacks a valid ``dof``.
        InvalidParameter: for a negative threshold or unknown kind.

    Examples:
        >>> tail_probability("abs-normal", None, 0.0)
        1.0
    """
    try:
        kind = TailKind(kind)
    except ValueError as exc:
        raise InvalidParameter(f"unknown tail kind {kind!r}") from exc
    if math.isnan(threshold) or threshold < 0:
        raise InvalidParameter(f"threshold must be >= 0, got {threshold}")

    if kind is TailKind.ABS_NORMAL:
        prob = float(special.erfc(threshold / math.sqrt(2.0)))
    elif kind is TailKind.CHISQ_UPPER:
        prob = float(special.chdtrc(_check_dof(dof), threshold))
    else:
        d = _check_dof(dof)
        spread = threshold * math.sqrt(d)
        prob = float(special.chdtrc(d, d + spread))
        if d - spread > 0:
            prob += float(special.chdtr(d, d - spread))
    return min(1.0, max(0.0, prob))
