"""Proper rotations of the Bloch ball and the alignment primitive used by feedback."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.transform import Rotation as _ScipyRotation

from blochstate.state import BlochVector
from purification.exceptions import ConfigurationError, DegenerateDirectionError

PARALLEL = "parallel"
PERPENDICULAR = "perpendicular"
ALIGN_MODES = (PARALLEL, PERPENDICULAR)

_BASIS = np.eye(3)


def _unit(vector, *, label: str) -> np.ndarray:
    vector = np.asarray(vector, dtype=float).reshape(3)
    norm = float(np.linalg.norm(vector))
    if norm == 0.0 or not math.isfinite(norm):
        raise ConfigurationError(f"{label} must be a non-zero finite 3-vector")
    return vector / norm


def orthogonal_unit(direction) -> np.ndarray:
    """Deterministic unit vector orthogonal to ``direction``."""
    t = _unit(direction, label="direction")
    helper = _BASIS[int(np.argmin(np.abs(t)))]
    u = helper - np.dot(helper, t) * t
    return u / np.linalg.norm(u)


@dataclass(frozen=True)
class Rotation:
    """Rotation by ``angle`` radians about the unit vector ``axis``.

    Composition and action go through scipy's quaternion representation.
    """

    axis: tuple[float, float, float] = (0.0, 0.0, 1.0)
    angle: float = 0.0

    def __post_init__(self) -> None:
        angle = float(self.angle)
        if not math.isfinite(angle):
            raise ConfigurationError("rotation angle must be finite")
        if angle == 0.0 and not np.any(self.axis):
            axis = (0.0, 0.0, 1.0)
        else:
            axis = tuple(float(c) for c in _unit(self.axis, label="rotation axis"))
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "angle", angle)

    @classmethod
    def identity(cls) -> "Rotation":
        return cls()

    @classmethod
    def from_scipy(cls, rotation: _ScipyRotation) -> "Rotation":
        rotvec = rotation.as_rotvec()
        angle = float(np.linalg.norm(rotvec))
        if angle == 0.0:
            return cls.identity()
        return cls(tuple(rotvec / angle), angle)

    @classmethod
    def from_matrix(cls, matrix) -> "Rotation":
        return cls.from_scipy(_ScipyRotation.from_matrix(np.asarray(matrix, dtype=float)))

    @property
    def is_identity(self) -> bool:
        return self.angle == 0.0

    def as_scipy(self) -> _ScipyRotation:
        return _ScipyRotation.from_rotvec(np.asarray(self.axis) * self.angle)

    def as_matrix(self) -> np.ndarray:
        return self.as_scipy().as_matrix()

    def compose(self, other: "Rotation") -> "Rotation":
        """Rotation equal to applying ``other`` first and then ``self``."""
        return Rotation.from_scipy(self.as_scipy() * other.as_scipy())

    def inverse(self) -> "Rotation":
        return Rotation(self.axis, -self.angle)

    def apply(self, vectors: np.ndarray) -> np.ndarray:
        if self.is_identity:
            return np.array(vectors, dtype=float)
        return self.as_scipy().apply(np.asarray(vectors, dtype=float))


def rotate(v: BlochVector, rot: Rotation) -> BlochVector:
    v = v.validated()
    if rot.is_identity:
        return v
    return BlochVector.from_array(rot.apply(v.as_array()))


def _rotation_between(a: np.ndarray, b: np.ndarray) -> Rotation:
    cross = np.cross(a, b)
    sine = float(np.linalg.norm(cross))
    cosine = float(np.dot(a, b))
    if sine == 0.0:
        if cosine > 0.0:
            return Rotation.identity()
        return Rotation(tuple(orthogonal_unit(a)), math.pi)
    return Rotation(tuple(cross / sine), math.atan2(sine, cosine))


def align_rotation(v: BlochVector, target_axis, mode: str = PARALLEL) -> Rotation:
    """Minimal rotation bringing ``v`` parallel or perpendicular to ``target_axis``.

    In parallel mode the nearer of the two poles ``+/- target`` is used; in
    perpendicular mode the azimuth about the target is kept.
    """
    if mode not in ALIGN_MODES:
        raise ConfigurationError(f"unknown alignment mode {mode!r}")
    v = v.validated()
    r = v.r
    if r == 0.0:
        raise DegenerateDirectionError("the maximally mixed state has no direction to align")
    a = v.as_array() / r
    t = _unit(target_axis, label="target axis")

    if mode == PARALLEL:
        b = t if np.dot(a, t) >= 0.0 else -t
    else:
        component = a - np.dot(a, t) * t
        norm = float(np.linalg.norm(component))
        b = orthogonal_unit(t) if norm == 0.0 else component / norm
    return _rotation_between(a, b)


def aligned_states(states: np.ndarray, axis: int, mode: str) -> np.ndarray:
    """Apply :func:`align_rotation` to every row of an ``(N, 3)`` array.

    Rows at the origin are left untouched.
    """
    states = np.asarray(states, dtype=float)
    radius = np.sqrt(np.einsum("ij,ij->i", states, states))
    out = np.zeros_like(states)
    if mode == PARALLEL:
        out[:, axis] = np.where(states[:, axis] < 0.0, -radius, radius)
        return out
    if mode != PERPENDICULAR:
        raise ConfigurationError(f"unknown alignment mode {mode!r}")

    transverse = states.copy()
    transverse[:, axis] = 0.0
    norm = np.sqrt(np.einsum("ij,ij->i", transverse, transverse))
    on_axis = norm == 0.0
    scale = np.divide(radius, norm, out=np.zeros_like(radius), where=~on_axis)
    out = transverse * scale[:, None]
    if np.any(on_axis):
        out[on_axis] = radius[on_axis, None] * orthogonal_unit(_BASIS[axis])[None, :]
    return out


__all__ = [
    "ALIGN_MODES",
    "PARALLEL",
    "PERPENDICULAR",
    "Rotation",
    "align_rotation",
    "aligned_states",
    "orthogonal_unit",
    "rotate",
]
