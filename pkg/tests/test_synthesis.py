"""Tests for loop constructors, gate synthesis and embeddings."""

import logging

import numpy as np
import pytest

from holonomy_lab.errors import InputError, ParameterError, RangeError, SynthesisError
from holonomy_lab.frames import connection_field
from holonomy_lab.holonomy import holonomy_ordered
from holonomy_lab.linalg import HADAMARD, PAULI_X, PAULI_Y, expm, projector
from holonomy_lab.loops import compose, invert
from holonomy_lab.schemas import LoopLabel
from holonomy_lab.synthesis import (
    diagonal_phase_loop,
    embed,
    interferometer_loop,
    loop_spec,
    optical_loop,
    predicted_holonomy,
    rotation_loop,
    synthesize_u2,
    two_qubit_gate_cv,
    wrap_angle,
)

OPTICAL_LABELS = [LoopLabel.C_I, LoopLabel.C_II, LoopLabel.C_III, LoopLabel.C_IV, LoopLabel.C_V]


def _engine(loop, steps=64):
    return holonomy_ordered(connection_field(loop.chart), loop, steps=steps).unitary


class TestDiagonalPhaseLoop:
    """Test C1 loops."""

    def test_zero_area(self):
        """Test a zero area gives the constant loop."""
        loop = diagonal_phase_loop(1, 0.0)
        assert loop.rectangle is None
        assert np.allclose(_engine(loop), np.eye(2))

    def test_half_sphere(self):
        """Test area pi uses theta* = pi/2 and width pi."""
        loop = diagonal_phase_loop(1, np.pi)
        assert loop.rectangle.sides == pytest.approx((np.pi / 2, np.pi))

    @pytest.mark.parametrize("area", [0.5, -1.2, 5.0])
    def test_holonomy(self, area):
        """Test the engine gives exp(-i area |beta><beta|)."""
        for beta in (1, 2):
            loop = diagonal_phase_loop(beta, area)
            assert np.allclose(_engine(loop), expm(-1j * area * projector(2, beta - 1)))

    def test_large_area_splits(self, caplog):
        """Test areas beyond 4 pi are split into repeated loops."""
        with caplog.at_level(logging.WARNING):
            loop = diagonal_phase_loop(1, 14.0)
        assert "splitting into 2 loops" in caplog.text
        assert len(loop.segments) == 8
        assert np.allclose(_engine(loop, 128), predicted_holonomy(LoopLabel.C1, 14.0))

    def test_additivity(self):
        """Test concatenated C1 loops add their areas."""
        loop = compose(diagonal_phase_loop(2, 0.4), diagonal_phase_loop(2, 1.1))
        assert np.allclose(_engine(loop, 128), predicted_holonomy(LoopLabel.C1, 1.5, beta=2))

    def test_beta_range(self):
        """Test beta must index a degenerate state."""
        with pytest.raises(ParameterError):
            diagonal_phase_loop(3, 1.0)

    def test_wrap_angle(self):
        """Test angles map into (-pi, pi]."""
        assert wrap_angle(-np.pi) == pytest.approx(np.pi)
        assert wrap_angle(3 * np.pi / 2) == pytest.approx(-np.pi / 2)


class TestRotationLoop:
    """Test C3 and C4 loops."""

    def test_index_order(self):
        """Test beta must precede beta_bar."""
        with pytest.raises(ParameterError):
            rotation_loop(2, 1, LoopLabel.C3, 1.0)
        with pytest.raises(ParameterError):
            rotation_loop(1, 2, LoopLabel.C1, 1.0)

    def test_c3_half_turn(self):
        """Test exp(-i pi sigma_2) = -I."""
        assert np.allclose(_engine(rotation_loop(1, 2, LoopLabel.C3, np.pi)), -np.eye(2))

    def test_c4_quarter_turn(self):
        """Test exp(-i pi/2 sigma_1) = -i sigma_1."""
        assert np.allclose(_engine(rotation_loop(1, 2, LoopLabel.C4, np.pi / 2)), -1j * PAULI_X)

    @pytest.mark.parametrize("label", [LoopLabel.C3, LoopLabel.C4])
    @pytest.mark.parametrize("area", [0.3, -0.8])
    def test_matches_prediction(self, label, area):
        """Test the engine against exp(-i area sigma)."""
        loop = rotation_loop(1, 2, label, area)
        assert np.allclose(_engine(loop), predicted_holonomy(label, area))

    def test_loop_and_inverse(self):
        """Test a rotation followed by its reverse is the identity."""
        loop = rotation_loop(1, 2, LoopLabel.C3, 0.9)
        assert np.allclose(_engine(compose(loop, invert(loop)), 128), np.eye(2))


class TestOpticalLoops:
    """Test optical and interferometer loops."""

    @pytest.mark.parametrize("label", OPTICAL_LABELS)
    def test_matches_prediction(self, label):
        """Test each optical family realizes its generator."""
        for area in (0.7, -0.4):
            loop = optical_loop(label, area)
            assert np.allclose(_engine(loop), predicted_holonomy(label, area), atol=1e-10)

    def test_generator_planes(self):
        """Test (x, r1) yields sigma_2 and (y, r1) yields sigma_1 under the frame sign."""
        area = 0.4
        c_i = optical_loop(LoopLabel.C_I, area)
        c_ii = optical_loop(LoopLabel.C_II, area)
        assert c_i.chart.names[c_i.plane[0]] == "x"
        assert c_ii.chart.names[c_ii.plane[0]] == "y"
        assert np.allclose(_engine(c_i), expm(-1j * area * PAULI_Y), atol=1e-10)
        assert np.allclose(_engine(c_ii), expm(-1j * area * PAULI_X), atol=1e-10)

    def test_two_qubit_gate(self):
        """Test C_V at pi/4 gives the partial swap on 01, 10."""
        c = 1 / np.sqrt(2)
        expected = np.array(
            [[1, 0, 0, 0], [0, c, -1j * c, 0], [0, -1j * c, c, 0], [0, 0, 0, 1]]
        )
        assert np.allclose(two_qubit_gate_cv(np.pi / 4), expected)
        assert np.allclose(_engine(optical_loop(LoopLabel.C_V, np.pi / 4)), expected, atol=1e-10)

    def test_squeezing_range(self):
        """Test C_III refuses areas beyond the squeezing budget."""
        with pytest.raises(RangeError):
            optical_loop(LoopLabel.C_III, 5.0, r_max=0.5)

    def test_not_optical(self):
        """Test CP^n labels are not optical loops."""
        with pytest.raises(ParameterError):
            optical_loop(LoopLabel.C1, 1.0)

    @pytest.mark.parametrize("label", [LoopLabel.SU2INT_C1, LoopLabel.SU2INT_C2])
    def test_interferometer(self, label):
        """Test interferometer loops against exp(-i area sigma^12)."""
        loop = interferometer_loop(label, 0.9)
        assert np.allclose(_engine(loop), predicted_holonomy(label, 0.9), atol=1e-10)


class TestSynthesis:
    """Test U(2) synthesis from CP^2 loops."""

    def test_identity(self):
        """Test the identity needs no loops."""
        program = synthesize_u2(np.eye(2))
        assert program.steps == []
        assert np.allclose(program.evaluate(), np.eye(2))

    def test_hadamard(self):
        """Test the Hadamard uses a C1 loop on |2> then a C3 loop."""
        program = synthesize_u2(HADAMARD)
        assert [(s.label, s.area) for s in program.steps] == [
            (LoopLabel.C1, pytest.approx(np.pi)),
            (LoopLabel.C3, pytest.approx(np.pi / 4)),
        ]
        report = program.report(HADAMARD, tol=1e-8, steps=64)
        assert report.within_tolerance
        assert report.steps[0].loop.reverse is False
        assert report.steps[1].loop.reverse is True
        assert np.allclose(report.predicted.to_array(), HADAMARD)

    def test_diagonal_phase(self):
        """Test diag(exp(i delta), 1) is a single C1 loop."""
        delta = 0.9
        program = synthesize_u2(np.diag([np.exp(1j * delta), 1.0]))
        assert len(program.steps) == 1
        assert program.steps[0].label == LoopLabel.C1
        assert program.steps[0].area == pytest.approx(-delta)

    def test_random_targets(self, random_unitary):
        """Test synthesis reproduces random unitaries, global phase included."""
        for _ in range(100):
            target = random_unitary(2)
            program = synthesize_u2(target)
            assert np.allclose(program.predicted(), target, atol=1e-10)
            assert np.allclose(program.evaluate(steps=64), target, atol=1e-8)

    def test_tolerance_enforced(self, monkeypatch):
        """Test a program that misses its target raises instead of returning."""
        monkeypatch.setattr("holonomy_lab.synthesis.wrap_angle", lambda x: x + 0.1)
        with pytest.raises(SynthesisError):
            synthesize_u2(HADAMARD)

    def test_tolerance_is_read(self):
        """Test an exact plan passes a tight tolerance."""
        program = synthesize_u2(HADAMARD, tol=1e-12)
        assert np.allclose(program.predicted(), HADAMARD, atol=1e-12)

    def test_invalid_targets(self):
        """Test non-2x2 and non-unitary targets are rejected."""
        with pytest.raises(InputError):
            synthesize_u2(np.eye(3))
        with pytest.raises(InputError):
            synthesize_u2(2 * np.eye(2))

    def test_loop_spec(self):
        """Test rectangles serialize and other shapes do not."""
        spec = loop_spec(diagonal_phase_loop(2, 1.0))
        assert spec.plane == ("theta_2", "phi_2")
        assert spec.n == 2
        assert loop_spec(diagonal_phase_loop(1, 0.0)) is None


class TestEmbed:
    """Test tensor embeddings of gates."""

    def test_single_qubit(self):
        """Test a one-qubit register returns the gate."""
        assert np.allclose(embed(PAULI_X, [0], 1), PAULI_X)

    def test_identity(self):
        """Test the identity embeds as the identity."""
        assert np.allclose(embed(np.eye(4), [0, 1], 3), np.eye(8))

    def test_cnot_on_outer_qubits(self):
        """Test CNOT on qubits 0 and 2 of three against the permutation it induces."""
        cnot = np.eye(4)[[0, 1, 3, 2]]
        expected = np.zeros((8, 8))
        for state in range(8):
            q0, q1, q2 = (state >> 2) & 1, (state >> 1) & 1, state & 1
            target = (q0 << 2) | (q1 << 1) | (q2 ^ q0)
            expected[target, state] = 1.0
        assert np.allclose(embed(cnot, [0, 2], 3), expected)

    def test_reversed_positions(self):
        """Test swapping positions swaps control and target."""
        cnot = np.eye(4)[[0, 1, 3, 2]]
        flipped = embed(cnot, [1, 0], 2)
        assert np.allclose(flipped, np.eye(4)[[0, 3, 2, 1]])

    def test_invalid(self):
        """Test collisions, range and size errors."""
        with pytest.raises(InputError):
            embed(np.eye(4), [0, 0], 2)
        with pytest.raises(InputError):
            embed(np.eye(4), [0, 3], 3)
        with pytest.raises(InputError):
            embed(np.eye(2), [0, 1], 2)
