"""Cell-centred densities on a uniform grid in ``u = ln(2(1 - p))``.

``u = 0`` is the maximally mixed state and ``u = ln(2 eps_floor)`` the
purest cell edge. Values are densities per unit ``u``; the density in ``p`` is
``values / (1 - p)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from django.conf import settings

from fokkerplanck.coeffs import purity_from_u, u_from_purity
from purification.exceptions import ConfigurationError, InvalidStateError

DEFAULT_CELLS = 400
DEFAULT_EPSILON_FLOOR = 1e-8
NEGATIVE_TOLERANCE = 1e-12


def default_cells() -> int:
    return int(getattr(settings, "PURIFICATION_FPE_CELLS", DEFAULT_CELLS))


def default_floor() -> float:
    return float(getattr(settings, "PURIFICATION_FPE_EPSILON_FLOOR", DEFAULT_EPSILON_FLOOR))


def cell_centres(cells: int | None = None, floor: float | None = None) -> tuple[np.ndarray, float]:
    """Centres and width of ``cells`` equal cells covering ``[ln(2 floor), 0]``."""
    cells = default_cells() if cells is None else int(cells)
    floor = default_floor() if floor is None else float(floor)
    if cells < 4:
        raise ConfigurationError(f"at least 4 cells are required, got {cells}")
    if not 0.0 < floor < 0.5:
        raise ConfigurationError(f"the impurity floor must lie in (0, 1/2), got {floor}")
    lower = math.log(2.0 * floor)
    width = -lower / cells
    return lower + width * (np.arange(cells) + 0.5), width


@dataclass(frozen=True)
class DensityGrid:
    centres: np.ndarray = field(repr=False)
    width: float
    values: np.ndarray = field(repr=False)
    time: float = 0.0

    def __post_init__(self) -> None:
        centres = np.asarray(self.centres, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if centres.ndim != 1 or centres.shape != values.shape:
            raise ConfigurationError("centres and values must be 1-d arrays of equal length")
        if not np.all(np.isfinite(values)):
            raise InvalidStateError("density values must be finite")
        if values.size and values.min() < -NEGATIVE_TOLERANCE:
            raise InvalidStateError(f"density is negative down to {values.min():.3e}")
        object.__setattr__(self, "centres", centres)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_weights(cls, weights, cells: int | None = None, floor: float | None = None) -> "DensityGrid":
        """Normalise non-negative per-cell ``weights`` into a density."""
        centres, width = cell_centres(cells, floor)
        weights = np.asarray(weights, dtype=float)
        total = weights.sum() * width
        if not (total > 0.0 and math.isfinite(total)):
            raise InvalidStateError("cell weights must have a positive finite total")
        return cls(centres, width, weights / total)

    @classmethod
    def uniform(cls, cells: int | None = None, floor: float | None = None) -> "DensityGrid":
        """``P(p) = 2`` on ``[1/2, 1]``, with each cell given its exact mass."""
        centres, width = cell_centres(cells, floor)
        edges = np.append(centres - 0.5 * width, 0.0)
        return cls.from_weights(np.diff(np.exp(edges)), cells, floor)

    @classmethod
    def delta_bump(
        cls, p0: float, cells: int | None = None, floor: float | None = None, width: float = 2.0
    ) -> "DensityGrid":
        """A hat of ``width`` cells centred on ``p0``, standing in for ``delta(p - p0)``."""
        if width < 1.0:
            raise ConfigurationError(f"the bump must span at least one cell, got {width}")
        centres, h = cell_centres(cells, floor)
        if not 0.5 <= p0 <= 1.0:
            raise ConfigurationError(f"initial purity must lie in [1/2, 1], got {p0}")
        u0 = min(max(u_from_purity(p0), centres[0] - 0.5 * h), 0.0)
        weights = np.clip(1.0 - np.abs(centres - u0) / (0.5 * width * h), 0.0, None)
        return cls.from_weights(weights, cells, floor)

    @property
    def cells(self) -> int:
        return int(self.centres.size)

    @property
    def edges(self) -> np.ndarray:
        return np.append(self.centres - 0.5 * self.width, self.centres[-1] + 0.5 * self.width)

    @property
    def purities(self) -> np.ndarray:
        return purity_from_u(self.centres)

    @property
    def impurities(self) -> np.ndarray:
        """``1 - p`` at the cell centres."""
        return 0.5 * np.exp(self.centres)

    @property
    def purity_density(self) -> np.ndarray:
        """Density per unit ``p``."""
        return self.values / self.impurities

    @property
    def mass(self) -> float:
        return float(self.values.sum() * self.width)

    def mean_impurity(self) -> float:
        return float(np.dot(self.impurities, self.values) * self.width) / self.mass

    def mean_purity(self) -> float:
        return 1.0 - self.mean_impurity()

    def purity_variance(self) -> float:
        s = self.impurities
        second = float(np.dot(s**2, self.values) * self.width) / self.mass
        return max(second - self.mean_impurity() ** 2, 0.0)

    def l1_distance(self, other: "DensityGrid") -> float:
        if other.cells != self.cells or not math.isclose(other.width, self.width):
            raise ConfigurationError("densities live on different grids")
        return float(np.abs(self.values - other.values).sum() * self.width)

    def histogram(self, edges) -> np.ndarray:
        """Mass in each bin of ascending ``u`` edges, integrating cells that straddle an edge piecewise."""
        edges = np.asarray(edges, dtype=float)
        if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0.0):
            raise ConfigurationError("histogram edges must be a strictly increasing sequence of at least two values")
        cumulative = np.concatenate(([0.0], np.cumsum(self.values) * self.width))
        return np.diff(np.interp(edges, self.edges, cumulative))

    def evolved(self, values: np.ndarray, time: float) -> "DensityGrid":
        return replace(self, values=np.clip(values, 0.0, None), time=float(time))

    def to_frame_columns(self) -> dict[str, np.ndarray]:
        return {
            "u": self.centres,
            "purity": self.purities,
            "density_u": self.values,
            "density_p": self.purity_density,
        }


def density_mean_purity(density: DensityGrid) -> float:
    return density.mean_purity()


__all__ = ["DensityGrid", "NEGATIVE_TOLERANCE", "cell_centres", "density_mean_purity"]
