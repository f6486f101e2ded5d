"""Densities of heteroscedastic noise variances.

A ``NoiseDensity`` describes the law ``h`` of the per-coordinate noise
variances. Three kinds are supported: a point mass, a uniform law on an
interval and a piecewise-linear density tabulated on a grid. Expectations
are computed by adaptive quadrature on the same representation that
defines the moments, so the moments are consistent with every functional.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np
import pandas as pd
from scipy import integrate

from spikedpca.errors import InvalidParameter, IoFailure
from spikedpca.log import get_logger

LOGGER = get_logger(__name__)

QUAD_OPTIONS = {"epsabs": 0.0, "epsrel": 1e-12, "limit": 400}


class DensityKind(str, Enum):
    POINT_MASS = "point-mass"
    UNIFORM = "uniform"
    TABULATED = "tabulated"


@dataclass(frozen=True, eq=False)
class NoiseDensity:
    """Law of the noise variances with compact support in ``[0, support_max]``.

    Use the ``point_mass``, ``uniform`` and ``tabulated`` constructors rather
    than building instances directly.
    """

    kind: DensityKind
    support_min: float
    support_max: float
    grid: Optional[np.ndarray] = None
    values: Optional[np.ndarray] = None

    @classmethod
    def point_mass(cls, location: float = 1.0) -> "NoiseDensity":
        if not location > 0:
            raise InvalidParameter(f"point mass location must be > 0, got {location}")
        return cls(DensityKind.POINT_MASS, float(location), float(location))

    @classmethod
    def uniform(cls, lo: float, hi: float) -> "NoiseDensity":
        if not 0 <= lo < hi:
            raise InvalidParameter(f"uniform support needs 0 <= lo < hi, got [{lo}, {hi}]")
        return cls(DensityKind.UNIFORM, float(lo), float(hi))

    @classmethod
    def tabulated(cls, grid, values) -> "NoiseDensity":
        """Piecewise-linear density through ``(grid, values)``, renormalized to mass one."""
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape or grid.size < 2:
            raise InvalidParameter("tabulated density needs matching grid and values of length >= 2")
        if np.any(np.diff(grid) <= 0):
            raise InvalidParameter("tabulated grid must be strictly ascending")
        if grid[0] < 0 or np.any(values < 0) or not np.all(np.isfinite(values)):
            raise InvalidParameter("tabulated density needs a nonnegative grid and values")
        # drop zero-mass segments at both ends so support_max is the true edge
        positive = np.flatnonzero(values > 0)
        if positive.size == 0:
            raise InvalidParameter("tabulated density has zero mass")
        first = max(positive[0] - 1, 0)
        last = min(positive[-1] + 1, grid.size - 1)
        grid = grid[first : last + 1].copy()
        values = values[first : last + 1].copy()
        mass = float(integrate.trapezoid(values, grid))
        values = values / mass
        grid.setflags(write=False)
        values.setflags(write=False)
        return cls(DensityKind.TABULATED, float(grid[0]), float(grid[-1]), grid, values)

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "NoiseDensity":
        """Read a two-column CSV of ``(grid point, density value)``; a header row is optional."""
        try:
            frame = pd.read_csv(path, header=None, comment="#")
        except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
            raise IoFailure(f"cannot read density table {path}: {exc}") from exc
        if frame.shape[1] < 2:
            raise InvalidParameter(f"density table {path} needs two columns")
        numeric = frame.iloc[:, :2].apply(pd.to_numeric, errors="coerce").dropna()
        return cls.tabulated(numeric.iloc[:, 0].to_numpy(), numeric.iloc[:, 1].to_numpy())

    @classmethod
    def parse(cls, text: str) -> "NoiseDensity":
        """Build a density from ``point:LOC``, ``uniform:LO:HI`` or ``csv:PATH``."""
        kind, _, rest = text.partition(":")
        kind = kind.strip().lower()
        try:
            if kind in ("point", "point-mass"):
                return cls.point_mass(float(rest) if rest else 1.0)
            if kind == "uniform":
                lo, hi = (float(x) for x in rest.split(":"))
                return cls.uniform(lo, hi)
        except ValueError as exc:
            if isinstance(exc, InvalidParameter):
                raise
            raise InvalidParameter(f"cannot parse density {text!r}") from exc
        if kind == "csv":
            return cls.from_csv(rest)
        raise InvalidParameter(f"unknown density {text!r}; use point:LOC, uniform:LO:HI or csv:PATH")

    def pdf(self, x) -> np.ndarray:
        """Density values (zero for the point mass, which has no density)."""
        x = np.asarray(x, dtype=float)
        if self.kind is DensityKind.UNIFORM:
            inside = (x >= self.support_min) & (x <= self.support_max)
            return np.where(inside, 1.0 / (self.support_max - self.support_min), 0.0)
        if self.kind is DensityKind.TABULATED:
            return np.interp(x, self.grid, self.values, left=0.0, right=0.0)
        return np.zeros_like(x)

    def expect(self, func: Callable[[float], float]) -> float:
        """``E_h[func(rho)]``."""
        if self.kind is DensityKind.POINT_MASS:
            return float(func(self.support_min))
        if self.kind is DensityKind.UNIFORM:
            width = self.support_max - self.support_min
            value, _ = integrate.quad(func, self.support_min, self.support_max, **QUAD_OPTIONS)
            return value / width
        total = 0.0
        for x0, x1, f0, f1 in zip(self.grid[:-1], self.grid[1:], self.values[:-1], self.values[1:]):
            if f0 == 0 and f1 == 0:
                continue
            slope = (f1 - f0) / (x1 - x0)
            value, _ = integrate.quad(
                lambda r, x0=x0, f0=f0, slope=slope: func(r) * (f0 + slope * (r - x0)),
                x0,
                x1,
                **QUAD_OPTIONS,
            )
            total += value
        return total

    @property
    def mass(self) -> float:
        return self.expect(lambda r: 1.0)

    @property
    def mu1(self) -> float:
        """Mean of the law."""
        return self.expect(lambda r: r)

    @property
    def mu2_sq(self) -> float:
        """Central second moment of the law."""
        mu1 = self.mu1
        return self.expect(lambda r: (r - mu1) ** 2)

    def scaled(self, factor: float) -> "NoiseDensity":
        """The law of ``factor * rho``."""
        if not factor > 0:
            raise InvalidParameter(f"scale factor must be > 0, got {factor}")
        if self.kind is DensityKind.POINT_MASS:
            return NoiseDensity.point_mass(self.support_min * factor)
        if self.kind is DensityKind.UNIFORM:
            return NoiseDensity.uniform(self.support_min * factor, self.support_max * factor)
        return NoiseDensity.tabulated(self.grid * factor, self.values / factor)

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        """Draw ``size`` variances by inverse transform sampling."""
        if self.kind is DensityKind.POINT_MASS:
            return np.full(size, self.support_min)
        if self.kind is DensityKind.UNIFORM:
            return rng.uniform(self.support_min, self.support_max, size)
        u = rng.random(size)
        widths = np.diff(self.grid)
        f0 = self.values[:-1]
        slopes = np.diff(self.values) / widths
        cdf = np.concatenate(([0.0], np.cumsum(0.5 * (self.values[:-1] + self.values[1:]) * widths)))
        seg = np.clip(np.searchsorted(cdf, u, side="right") - 1, 0, widths.size - 1)
        rest = np.maximum(u - cdf[seg], 0.0)
        root = np.sqrt(np.maximum(f0[seg] ** 2 + 2.0 * slopes[seg] * rest, 0.0))
        denom = f0[seg] + root
        offset = np.where(denom > 0, 2.0 * rest / np.where(denom > 0, denom, 1.0), 0.0)
        return np.minimum(self.grid[seg] + np.minimum(offset, widths[seg]), self.support_max)

    def describe(self) -> str:
        if self.kind is DensityKind.POINT_MASS:
            return f"point mass at {self.support_min:g}"
        if self.kind is DensityKind.UNIFORM:
            return f"uniform on [{self.support_min:g}, {self.support_max:g}]"
        return f"tabulated on [{self.support_min:g}, {self.support_max:g}] ({self.grid.size} points)"

    def to_dict(self) -> dict:
        data = {
            "kind": self.kind.value,
            "support_min": self.support_min,
            "support_max": self.support_max,
            "mu1": self.mu1,
            "mu2_sq": self.mu2_sq,
        }
        if self.kind is DensityKind.TABULATED:
            data["grid"] = self.grid.tolist()
            data["values"] = self.values.tolist()
        return data
