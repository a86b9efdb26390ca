from __future__ import annotations

import math

import numpy as np
import pytest

from blochstate.rotations import (
    PARALLEL,
    PERPENDICULAR,
    Rotation,
    align_rotation,
    aligned_states,
    rotate,
)
from blochstate.state import BlochVector, purity
from purification.exceptions import ConfigurationError, DegenerateDirectionError


def _random_states(count: int, seed: int) -> list[BlochVector]:
    rng = np.random.default_rng(seed)
    raw = rng.normal(size=(count, 3))
    radii = rng.uniform(0.05, 1.0, size=count)
    return [BlochVector.from_array(row / np.linalg.norm(row) * r) for row, r in zip(raw, radii)]


def _angle(a: np.ndarray, b: np.ndarray) -> float:
    return math.atan2(np.linalg.norm(np.cross(a, b)), np.dot(a, b))


class TestRotate:
    def test_identity_leaves_state_unchanged(self):
        v = BlochVector(0.1, 0.2, 0.3)
        assert rotate(v, Rotation.identity()) == v

    def test_quarter_turn_about_y_maps_z_to_x(self):
        out = rotate(BlochVector(0.0, 0.0, 1.0), Rotation((0.0, 1.0, 0.0), math.pi / 2))
        assert np.allclose(out.as_array(), [1.0, 0.0, 0.0], atol=1e-15)

    def test_purity_is_preserved(self):
        rng = np.random.default_rng(11)
        for v in _random_states(200, seed=5):
            rot = Rotation(tuple(rng.normal(size=3)), rng.uniform(-math.pi, math.pi))
            assert abs(purity(rotate(v, rot)) - purity(v)) < 1e-12

    def test_composition_applies_right_operand_first(self):
        first = Rotation((0.0, 0.0, 1.0), math.pi / 2)
        second = Rotation((1.0, 0.0, 0.0), math.pi / 2)
        v = BlochVector(1.0, 0.0, 0.0)
        composed = rotate(v, second.compose(first))
        stepwise = rotate(rotate(v, first), second)
        assert np.allclose(composed.as_array(), stepwise.as_array(), atol=1e-14)

    def test_inverse_undoes_rotation(self):
        rot = Rotation((1.0, 2.0, 3.0), 0.7)
        v = BlochVector(0.2, -0.4, 0.1)
        assert np.allclose(rotate(rotate(v, rot), rot.inverse()).as_array(), v.as_array(), atol=1e-14)

    def test_matrix_round_trip(self):
        rot = Rotation((0.0, 1.0, 1.0), 1.1)
        again = Rotation.from_matrix(rot.as_matrix())
        assert np.allclose(again.as_matrix(), rot.as_matrix(), atol=1e-12)

    def test_zero_axis_with_nonzero_angle_is_rejected(self):
        with pytest.raises(ConfigurationError):
            Rotation((0.0, 0.0, 0.0), 1.0)


class TestAlignRotation:
    def test_already_aligned_state_gets_identity(self):
        rot = align_rotation(BlochVector(0.0, 0.0, 0.5), (0.0, 0.0, 1.0))
        assert rot.is_identity

    def test_equatorial_state_gets_quarter_turn(self):
        rot = align_rotation(BlochVector(0.5, 0.0, 0.0), (0.0, 0.0, 1.0))
        assert rot.angle == pytest.approx(math.pi / 2)
        assert abs(rot.axis[1]) == pytest.approx(1.0)
        out = rotate(BlochVector(0.5, 0.0, 0.0), rot)
        assert np.allclose(out.as_array(), [0.0, 0.0, 0.5], atol=1e-15)

    def test_parallel_alignment_of_random_states(self):
        target = np.array([0.0, 0.0, 1.0])
        for v in _random_states(100, seed=8):
            out = rotate(v, align_rotation(v, target, PARALLEL)).as_array()
            assert min(_angle(out, target), _angle(out, -target)) < 1e-10
            assert np.linalg.norm(out) == pytest.approx(v.r, abs=1e-14)

    def test_perpendicular_alignment_of_random_states(self):
        target = np.array([0.3, -0.2, 0.9])
        for v in _random_states(100, seed=9):
            out = rotate(v, align_rotation(v, target, PERPENDICULAR)).as_array()
            assert abs(_angle(out, target) - math.pi / 2) < 1e-10

    def test_perpendicular_alignment_of_on_axis_state(self):
        out = rotate(BlochVector(0.0, 0.0, -0.7), align_rotation(BlochVector(0.0, 0.0, -0.7), (0, 0, 1), PERPENDICULAR))
        assert np.allclose(out.as_array(), [0.7, 0.0, 0.0], atol=1e-14)

    def test_origin_is_degenerate(self):
        with pytest.raises(DegenerateDirectionError):
            align_rotation(BlochVector.origin(), (0.0, 0.0, 1.0))

    def test_unknown_mode_is_rejected(self):
        with pytest.raises(ConfigurationError):
            align_rotation(BlochVector(0.1, 0.0, 0.0), (0, 0, 1), "diagonal")


class TestAlignedStates:
    @pytest.mark.parametrize("mode", [PARALLEL, PERPENDICULAR])
    def test_batch_matches_single_state_alignment(self, mode):
        states = _random_states(60, seed=21) + [BlochVector(0.0, 0.0, 0.4), BlochVector(0.0, 0.0, -0.3)]
        batch = aligned_states(np.array([v.as_array() for v in states]), axis=2, mode=mode)
        for v, row in zip(states, batch):
            expected = rotate(v, align_rotation(v, (0.0, 0.0, 1.0), mode)).as_array()
            assert np.allclose(row, expected, atol=1e-12)

    def test_origin_rows_stay_at_origin(self):
        batch = aligned_states(np.zeros((3, 3)), axis=2, mode=PERPENDICULAR)
        assert not batch.any()
