"""Bloch-ball representation of a single qubit and its purity functionals."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from django.conf import settings
from scipy.special import entr

from purification.exceptions import InvalidStateError

DEFAULT_RADIAL_SLACK = 1e-9


def radial_slack() -> float:
    return float(getattr(settings, "PURIFICATION_RADIAL_SLACK", DEFAULT_RADIAL_SLACK))


@dataclass(frozen=True)
class BlochVector:
    """Qubit state as Cartesian Bloch components.

    ``x = 2 Re rho_12``, ``y = 2 Im rho_12`` and ``z = rho_11 - rho_22``.
    """

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        for name in ("x", "y", "z"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InvalidStateError(f"Bloch component {name} is not finite: {value!r}")
            object.__setattr__(self, name, value)

    @classmethod
    def origin(cls) -> "BlochVector":
        return cls(0.0, 0.0, 0.0)

    @classmethod
    def from_array(cls, values) -> "BlochVector":
        x, y, z = (float(v) for v in np.asarray(values, dtype=float).reshape(3))
        return cls(x, y, z)

    @classmethod
    def from_polar(cls, r: float, theta: float, phi: float) -> "BlochVector":
        sin_theta = math.sin(theta)
        return cls(r * sin_theta * math.cos(phi), r * sin_theta * math.sin(phi), r * math.cos(theta))

    @classmethod
    def from_purity(cls, p: float, axis: int = 2) -> "BlochVector":
        """Diagonal state of purity ``p`` lying along the given coordinate axis."""
        if not 0.5 <= p <= 1.0:
            raise InvalidStateError(f"purity must lie in [1/2, 1], got {p}")
        components = [0.0, 0.0, 0.0]
        components[axis] = math.sqrt(2.0 * p - 1.0)
        return cls(*components)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @property
    def r(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    @property
    def theta(self) -> float:
        r = self.r
        if r == 0.0:
            return 0.0
        return math.acos(max(-1.0, min(1.0, self.z / r)))

    @property
    def phi(self) -> float:
        return math.atan2(self.y, self.x)

    def validated(self) -> "BlochVector":
        """Return the state with the radial slack policy applied.

        Overshoot up to the slack is renormalized onto the sphere; anything
        larger is an error.
        """
        r = self.r
        if r <= 1.0:
            return self
        if r > 1.0 + radial_slack():
            raise InvalidStateError(f"Bloch vector outside the ball: r = {r!r}")
        return BlochVector(self.x / r, self.y / r, self.z / r)


@dataclass(frozen=True)
class PurityState:
    """Purity together with the linear entropy ``s = 1 - p`` and its logarithm."""

    p: float

    def __post_init__(self) -> None:
        p = float(self.p)
        if not 0.5 <= p <= 1.0 + radial_slack():
            raise InvalidStateError(f"purity must lie in [1/2, 1], got {p}")
        object.__setattr__(self, "p", min(p, 1.0))

    @classmethod
    def from_bloch(cls, v: BlochVector) -> "PurityState":
        return cls(purity(v))

    @property
    def s(self) -> float:
        return 1.0 - self.p

    @property
    def log_s(self) -> float:
        s = self.s
        if s <= 0.0:
            return -math.inf
        return math.log(s)

    def to_dict(self) -> dict[str, float]:
        return {"p": self.p, "s": self.s, "log_s": self.log_s}


def purity(v: BlochVector) -> float:
    v = v.validated()
    return 0.5 * (1.0 + v.x * v.x + v.y * v.y + v.z * v.z)


def linear_entropy(v: BlochVector) -> float:
    return 1.0 - purity(v)


def von_neumann_entropy(v: BlochVector) -> float:
    """Entropy in nats from the eigenvalues ``(1 +/- r) / 2``.

    ``scipy.special.entr`` gives ``-x ln x`` with the ``x = 0`` limit, so a pure
    state returns exactly zero.
    """
    r = min(v.validated().r, 1.0)
    eigenvalues = np.array([(1.0 + r) / 2.0, (1.0 - r) / 2.0])
    return float(entr(eigenvalues).sum())


def purities(states: np.ndarray) -> np.ndarray:
    """Vectorized purity of an ``(..., 3)`` array of Bloch components."""
    states = np.asarray(states, dtype=float)
    return 0.5 * (1.0 + np.einsum("...i,...i->...", states, states))


__all__ = [
    "BlochVector",
    "PurityState",
    "linear_entropy",
    "purities",
    "purity",
    "radial_slack",
    "von_neumann_entropy",
]
