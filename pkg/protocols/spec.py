"""Protocol descriptions: which detectors run and which feedback law applies."""
from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

from blochstate.rotations import PARALLEL, PERPENDICULAR
from purification.exceptions import InvalidProtocolError
from trajectories.params import DetectorParams
from trajectories.services.stepping import axis_index

PROTOCOL_PARALLEL = "parallel"
PROTOCOL_JACOBS = "jacobs"
PROTOCOL_WISEMAN_RALPH = "wiseman-ralph"
PROTOCOL_ISOTROPIC = "isotropic"

PROTOCOL_CHOICES = (
    (PROTOCOL_PARALLEL, "Single detector, no feedback"),
    (PROTOCOL_JACOBS, "Single detector kept perpendicular to the state"),
    (PROTOCOL_WISEMAN_RALPH, "Single detector kept aligned with the state"),
    (PROTOCOL_ISOTROPIC, "Three identical detectors along x, y and z"),
)
PROTOCOL_KINDS = tuple(value for value, _ in PROTOCOL_CHOICES)

FEEDBACK_MODES = {
    PROTOCOL_JACOBS: PERPENDICULAR,
    PROTOCOL_WISEMAN_RALPH: PARALLEL,
}


@dataclass(frozen=True)
class ProtocolSpec:
    """A purification protocol: its kind, its detectors and the measurement axis.

    Single-detector protocols measure along ``axis`` (z by default); the isotropic
    protocol carries detectors for x, y and z in that order.
    """

    kind: str
    detectors: tuple[DetectorParams, ...] = field(default_factory=lambda: (DetectorParams(),))
    axis: int = 2

    def __post_init__(self) -> None:
        if self.kind not in PROTOCOL_KINDS:
            raise InvalidProtocolError(
                f"unknown protocol {self.kind!r}; expected one of {', '.join(PROTOCOL_KINDS)}"
            )
        detectors = tuple(self.detectors)
        if not all(isinstance(d, DetectorParams) for d in detectors):
            raise InvalidProtocolError("detectors must be DetectorParams instances")
        expected = 3 if self.kind == PROTOCOL_ISOTROPIC else 1
        if len(detectors) != expected:
            raise InvalidProtocolError(
                f"protocol {self.kind!r} needs exactly {expected} detector(s), got {len(detectors)}"
            )
        object.__setattr__(self, "detectors", detectors)
        object.__setattr__(self, "axis", axis_index(self.axis))

    @classmethod
    def build(
        cls, kind: str, params: DetectorParams | Sequence[DetectorParams] | None = None, axis: int | str = 2
    ) -> "ProtocolSpec":
        """Protocol of ``kind`` using ``params`` for every detector it needs."""
        params = params or DetectorParams()
        if isinstance(params, DetectorParams):
            count = 3 if kind == PROTOCOL_ISOTROPIC else 1
            params = (params,) * count
        return cls(kind=kind, detectors=tuple(params), axis=axis)

    def with_detectors(self, params: DetectorParams | Sequence[DetectorParams]) -> "ProtocolSpec":
        return ProtocolSpec.build(self.kind, params, self.axis)

    @property
    def is_isotropic(self) -> bool:
        return self.kind == PROTOCOL_ISOTROPIC

    @property
    def feedback_mode(self) -> str | None:
        return FEEDBACK_MODES.get(self.kind)

    @property
    def noise_components(self) -> int:
        return len(self.detectors)

    @property
    def detector(self) -> DetectorParams:
        """The single detector, or the shared one of an identical isotropic set."""
        if self.is_isotropic and not self.has_identical_detectors:
            raise InvalidProtocolError("isotropic protocol with non-identical detectors has no single detector")
        return self.detectors[0]

    @property
    def has_identical_detectors(self) -> bool:
        return all(d == self.detectors[0] for d in self.detectors)

    def to_dict(self) -> dict[str, object]:
        return {
            "kind": self.kind,
            "axis": "xyz"[self.axis],
            "detectors": [d.to_dict() for d in self.detectors],
        }


__all__ = [
    "FEEDBACK_MODES",
    "PROTOCOL_CHOICES",
    "PROTOCOL_ISOTROPIC",
    "PROTOCOL_JACOBS",
    "PROTOCOL_KINDS",
    "PROTOCOL_PARALLEL",
    "PROTOCOL_WISEMAN_RALPH",
    "ProtocolSpec",
]
