"""Feedback laws applied at the start of every measurement interval."""
from __future__ import annotations

import numpy as np

from blochstate.rotations import Rotation, align_rotation, aligned_states
from blochstate.state import BlochVector
from protocols.spec import ProtocolSpec

_AXES = np.eye(3)


def control_rotation(protocol: ProtocolSpec, v: BlochVector) -> Rotation:
    """Rotation the controller applies to ``v`` before the next measurement step.

    Jacobs feedback turns the state perpendicular to the measurement axis and
    Wiseman-Ralph feedback aligns it with the axis; the other protocols, and the
    maximally mixed state, get the identity.
    """
    mode = protocol.feedback_mode
    v = v.validated()
    if mode is None or v.r == 0.0:
        return Rotation.identity()
    return align_rotation(v, _AXES[protocol.axis], mode)


def apply_feedback(protocol: ProtocolSpec, states: np.ndarray) -> np.ndarray:
    """Batched :func:`control_rotation` for an ``(N, 3)`` array of states."""
    mode = protocol.feedback_mode
    if mode is None:
        return states
    return aligned_states(states, protocol.axis, mode)


__all__ = ["apply_feedback", "control_rotation"]
