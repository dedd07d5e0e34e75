"""Gate synthesis: loops that realize requested holonomies, and their composition into programs.

Every constructor returns a loop whose engine holonomy ``P exp(oint A)`` equals
``exp(-i Sigma G)`` for the generator ``G`` of its family:

* ``C1``: ``|beta><beta|`` from a ``(theta_beta, phi_beta)`` rectangle,
* ``C3`` / ``C4``: ``sigma_2`` / ``sigma_1`` on ``span{|beta>, |beta_bar>}``,
* ``C_I .. C_V``: the optical generators ``sigma_2, sigma_1, s_3, sigma_2^12, sigma_1^12``,
* ``SU2INT-C1`` / ``SU2INT-C2``: ``sigma_2^12`` / ``sigma_3^12`` on the interferometer block.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike

from holonomy_lab.config import settings
from holonomy_lab.errors import InputError, ParameterError, RangeError, SynthesisError
from holonomy_lab.frames import connection_field
from holonomy_lab.holonomy import holonomy_ordered
from holonomy_lab.linalg import expm, frobenius, is_unitary, ordered_product, projector, sigma_hat
from holonomy_lab.loops import Loop, compose_all, invert, rectangle_loop, trivial_loop
from holonomy_lab.manifold import Chart, ConnectionField
from holonomy_lab.schemas import (
    ChartKind,
    LoopKind,
    LoopLabel,
    LoopProgramReport,
    LoopSpec,
    MatrixPayload,
    ProgramStepReport,
)

logger = logging.getLogger(__name__)

S3_HAT = -np.diag([1.0, 3.0]).astype(complex)
MAX_PHASE_AREA = 4.0 * np.pi

# Widths of the bounded control rectangles used by the optical loops.
OPTICAL_R_SIDE = 0.5


def wrap_angle(x: float) -> float:
    """Map an angle into ``(-pi, pi]``."""
    y = math.remainder(x, 2.0 * math.pi)
    return math.pi if y == -math.pi else y


# Single-loop constructors


def _oriented(loop: Loop, area: float) -> Loop:
    """Counter-clockwise loops carry positive area; flip for negative requests."""
    return invert(loop) if area < 0 else loop


def diagonal_phase_loop(beta: int, area: float, n: int = 2) -> Loop:
    """C1 loop on CP^n with holonomy ``exp(-i area |beta><beta|)``.

    A rectangle ``theta_beta in [0, theta*]``, ``phi_beta in [0, W]`` encloses
    ``W sin^2 theta*``. ``W`` is ``pi`` when ``|area| <= pi`` and ``2 pi k`` beyond that.
    Areas above ``4 pi`` are split into equal repeats.

    Raises:
        ParameterError: If ``beta`` is not in ``1..n``.
    """
    chart = Chart.cpn(n)
    if not 1 <= beta <= n:
        raise ParameterError(f"beta={beta} outside 1..{n}")
    size = abs(area)
    if size == 0.0:
        return trivial_loop(chart.point())
    if size > MAX_PHASE_AREA:
        repeats = math.ceil(size / MAX_PHASE_AREA)
        logger.warning("area %.4f exceeds 4 pi; splitting into %d loops", area, repeats)
        return compose_all([diagonal_phase_loop(beta, area / repeats, n)] * repeats)
    width = np.pi if size <= np.pi else 2.0 * np.pi * math.ceil(size / (2.0 * np.pi))
    theta = math.asin(math.sqrt(min(1.0, size / width)))
    loop = rectangle_loop(chart, (f"theta_{beta}", f"phi_{beta}"), None, (0.0, 0.0), (theta, width))
    return _oriented(loop, area)


def rotation_loop(beta: int, beta_bar: int, kind: LoopLabel | str, area: float, n: int = 2) -> Loop:
    """C3 or C4 loop with holonomy ``exp(-i area sigma)`` on ``span{|beta>, |beta_bar>}``.

    The rectangle spans ``theta_beta in [0, pi/2]`` and ``theta_beta_bar in [0, |area|]``
    at ``phi_beta = 0`` (C3) or ``pi/2`` (C4); counter-clockwise traversal gives
    negative area, so positive requests run clockwise.

    Raises:
        ParameterError: If ``beta >= beta_bar``, an index is out of range or ``kind`` is
            neither C3 nor C4.
    """
    kind = LoopLabel(kind)
    if kind not in (LoopLabel.C3, LoopLabel.C4):
        raise ParameterError(f"rotation loops are C3 or C4, got {kind.value}")
    if not 1 <= beta < beta_bar <= n:
        raise ParameterError(
            f"rotation loop needs 1 <= beta < beta_bar <= {n}, got {beta}, {beta_bar}"
        )
    chart = Chart.cpn(n)
    fixed = {f"phi_{beta}": np.pi / 2} if kind == LoopLabel.C4 else {}
    if area == 0.0:
        return trivial_loop(chart.point(fixed))
    loop = rectangle_loop(
        chart, (f"theta_{beta}", f"theta_{beta_bar}"), fixed, (0.0, 0.0), (np.pi / 2, abs(area))
    )
    return _oriented(loop, -area)


_OPTICAL = {
    LoopLabel.C_I: (ChartKind.OPTICAL1, ("x", "r1"), {}),
    LoopLabel.C_II: (ChartKind.OPTICAL1, ("y", "r1"), {}),
    LoopLabel.C_III: (ChartKind.OPTICAL1, ("r1", "theta1"), {}),
    LoopLabel.C_IV: (ChartKind.OPTICAL2, ("r2", "r3"), {}),
    LoopLabel.C_V: (ChartKind.OPTICAL2, ("r2", "r3"), {"theta3": 1.5 * np.pi}),
}


def optical_loop(kind: LoopLabel | str, area: float, r_max: float | None = None) -> Loop:
    """Optical rectangle whose weighted area is ``area``.

    C_I and C_II run over ``r1 in [0, 1/2]``, C_IV and C_V over ``r2 in [0, 1/2]``, and the
    other side absorbs the area. C_III sweeps ``theta1`` through ``2 pi`` and solves for the
    squeezing radius.

    Raises:
        RangeError: If C_III would need ``r1 > r_max``.
    """
    kind = LoopLabel(kind)
    if kind not in _OPTICAL:
        raise ParameterError(f"{kind.value} is not an optical loop")
    r_max = settings.r_max if r_max is None else r_max
    chart_kind, plane, fixed = _OPTICAL[kind]
    chart = Chart(chart_kind)
    size = abs(area)
    if size == 0.0:
        return trivial_loop(chart.point(fixed))
    r = OPTICAL_R_SIDE
    if kind == LoopLabel.C_I:
        loop = rectangle_loop(chart, plane, fixed, (0.0, 0.0), (size / (1.0 - math.exp(-2 * r)), r))
    elif kind == LoopLabel.C_II:
        loop = rectangle_loop(chart, plane, fixed, (0.0, 0.0), (size / (math.exp(2 * r) - 1.0), r))
    elif kind == LoopLabel.C_III:
        radius = math.acosh(1.0 + 4.0 * size / (2.0 * np.pi)) / 4.0
        if radius > r_max:
            raise RangeError(f"area {area} needs r1 = {radius:.4f} beyond r_max = {r_max}")
        loop = rectangle_loop(chart, plane, fixed, (0.0, 0.0), (radius, 2.0 * np.pi))
    else:
        loop = rectangle_loop(chart, plane, fixed, (0.0, 0.0), (r, size / (math.cosh(2 * r) - 1.0)))
    return _oriented(loop, area)


def interferometer_loop(kind: LoopLabel | str, area: float) -> Loop:
    """Interferometer rectangle with ``alpha``-side ``pi`` realizing ``exp(-i area sigma^12)``.

    The counter-clockwise rectangle of height ``h`` yields ``exp(+2 i h sigma^12)``, so
    positive areas run clockwise with ``h = area / 2``.
    """
    kind = LoopLabel(kind)
    planes = {LoopLabel.SU2INT_C1: ("alpha", "beta"), LoopLabel.SU2INT_C2: ("alpha", "gamma")}
    if kind not in planes:
        raise ParameterError(f"{kind.value} is not an interferometer loop")
    chart = Chart(ChartKind.SU2INT)
    if area == 0.0:
        return trivial_loop(chart.point())
    loop = rectangle_loop(chart, planes[kind], None, (0.0, 0.0), (np.pi, abs(area) / 2.0))
    return _oriented(loop, -area)


def predicted_holonomy(
    label: LoopLabel | str, area: float, beta: int = 1, beta_bar: int = 2, n: int = 2
) -> np.ndarray:
    """Closed-form holonomy ``exp(-i area G)`` of a loop family on its degenerate block."""
    label = LoopLabel(label)
    if label in (LoopLabel.C1, LoopLabel.C2):
        generator = projector(n, beta - 1)
    elif label == LoopLabel.C3:
        generator = sigma_hat(2, beta - 1, beta_bar - 1, n)
    elif label == LoopLabel.C4:
        generator = sigma_hat(1, beta - 1, beta_bar - 1, n)
    elif label == LoopLabel.C_I:
        generator = sigma_hat(2, 0, 1, 2)
    elif label == LoopLabel.C_II:
        generator = sigma_hat(1, 0, 1, 2)
    elif label == LoopLabel.C_III:
        generator = S3_HAT
    elif label in (LoopLabel.C_IV, LoopLabel.SU2INT_C1):
        generator = sigma_hat(2, 1, 2, 4)
    elif label == LoopLabel.C_V:
        generator = sigma_hat(1, 1, 2, 4)
    else:
        generator = sigma_hat(3, 1, 2, 4)
    return expm(-1j * area * generator)


def two_qubit_gate_cv(area: float) -> np.ndarray:
    """``exp(-i area sigma_1^12)`` on the ``(00, 01, 10, 11)`` basis."""
    return predicted_holonomy(LoopLabel.C_V, area)


# Programs


@dataclass(frozen=True)
class ProgramStep:
    """One loop of a program with the holonomy it is meant to produce."""

    label: LoopLabel
    area: float
    loop: Loop = field(repr=False)
    predicted: np.ndarray = field(repr=False)

    def connection(self) -> ConnectionField:
        return connection_field(self.loop.chart)


@dataclass
class LoopProgram:
    """Loops executed in order; each later holonomy multiplies on the left."""

    steps: list[ProgramStep]
    block_dim: int

    def predicted(self) -> np.ndarray:
        if not self.steps:
            return np.eye(self.block_dim, dtype=complex)
        return ordered_product(np.stack([s.predicted for s in self.steps]))

    def evaluate(self, steps: int | None = None) -> np.ndarray:
        """Engine-evaluated product of the loop holonomies."""
        if not self.steps:
            return np.eye(self.block_dim, dtype=complex)
        factors = [holonomy_ordered(s.connection(), s.loop, steps).unitary for s in self.steps]
        return ordered_product(np.stack(factors))

    def report(self, target: ArrayLike, tol: float, steps: int | None = None) -> LoopProgramReport:
        target = np.asarray(target, dtype=complex)
        evaluated = self.evaluate(steps)
        error = frobenius(evaluated - target)
        return LoopProgramReport(
            steps=[
                ProgramStepReport(label=s.label, area=s.area, loop=loop_spec(s.loop))
                for s in self.steps
            ],
            predicted=MatrixPayload.from_array(self.predicted()),
            evaluated=MatrixPayload.from_array(evaluated),
            target=MatrixPayload.from_array(target),
            error=error,
            within_tolerance=error <= tol,
        )


def loop_spec(loop: Loop) -> LoopSpec | None:
    """JSON description of a rectangle loop, or ``None`` for other shapes."""
    rect = loop.rectangle
    if rect is None or len(loop.segments) not in (1, 4):
        return None
    chart = loop.chart
    base = loop.basepoint.coords
    fixed = {
        name: float(base[k])
        for k, name in enumerate(chart.names)
        if k not in rect.axes and base[k] != 0.0
    }
    return LoopSpec(
        chart=chart.kind,
        n=chart.n or None,
        plane=(chart.names[rect.axes[0]], chart.names[rect.axes[1]]),
        fixed=fixed,
        kind=LoopKind.RECTANGLE,
        corner=rect.corner,
        sides=rect.sides,
        reverse=rect.orientation < 0,
    )


def _phase(z: complex) -> complex:
    return z / abs(z)


def synthesize_u2(target: ArrayLike, tol: float = 1e-4, cutoff_tol: float = 1e-12) -> LoopProgram:
    """Factor a 2x2 unitary into CP^2 loops.

    ``U = diag(d1, d1') exp(-i b sigma_2) diag(1, e2)``; the loops run C1 on ``|2>`` for
    ``e2``, then C3 for ``b``, then C1 on ``|1>`` and ``|2>`` for the left phases. Every
    ``U(2)`` element is reachable, including its global phase. Loops with negligible area
    are dropped.

    Raises:
        InputError: If ``target`` is not a 2x2 unitary.
        SynthesisError: If the predicted product misses ``target`` by more than ``tol``.
    """
    u = np.asarray(target, dtype=complex)
    if u.shape != (2, 2):
        raise InputError(f"target must be 2x2, got shape {u.shape}")
    if not is_unitary(u, 1e-10):
        raise InputError("target is not unitary")
    c, s = abs(u[0, 0]), abs(u[1, 0])
    b = math.atan2(s, c)
    if s < cutoff_tol:
        d1, d1p, e2 = _phase(u[0, 0]), _phase(u[1, 1]), 1.0 + 0j
    elif c < cutoff_tol:
        d1, d1p, e2 = 1.0 + 0j, _phase(u[1, 0]), -_phase(u[0, 1])
    else:
        d1, d1p = _phase(u[0, 0]), _phase(u[1, 0])
        e2 = _phase(u[1, 1] / (c * d1p))
    plan = [
        (LoopLabel.C1, 2, -np.angle(e2)),
        (LoopLabel.C3, 1, b),
        (LoopLabel.C1, 1, -np.angle(d1)),
        (LoopLabel.C1, 2, -np.angle(d1p)),
    ]
    steps = []
    for label, beta, raw in plan:
        area = raw if label == LoopLabel.C3 else wrap_angle(raw)
        if abs(area) < cutoff_tol:
            continue
        if label == LoopLabel.C3:
            loop = rotation_loop(1, 2, LoopLabel.C3, area)
            predicted = predicted_holonomy(label, area, 1, 2)
        else:
            loop = diagonal_phase_loop(beta, area)
            predicted = predicted_holonomy(label, area, beta)
        steps.append(ProgramStep(label, float(area), loop, predicted))
    program = LoopProgram(steps, 2)
    error = frobenius(program.predicted() - u)
    logger.debug("synthesized %d loops; predicted error %.2e", len(steps), error)
    if error > tol:
        raise SynthesisError(
            f"loop program misses the target by {error:.3e} (tolerance {tol:.1e})"
        )
    return program


# Tensor embedding


def embed(gate: ArrayLike, positions: Sequence[int], m: int) -> np.ndarray:
    """Act with ``gate`` on qubits ``positions`` of an ``m``-qubit register, big-endian.

    Raises:
        InputError: On a size mismatch or repeated or out-of-range positions.
    """
    gate = np.asarray(gate, dtype=complex)
    k = len(positions)
    if gate.shape != (2**k, 2**k):
        raise InputError(f"a gate on {k} qubits must be {2**k}x{2**k}, got {gate.shape}")
    if len(set(positions)) != k:
        raise InputError(f"positions collide: {list(positions)}")
    if any(not 0 <= p < m for p in positions):
        raise InputError(f"positions {list(positions)} outside a {m}-qubit register")
    rest = [q for q in range(m) if q not in positions]
    full = np.kron(gate, np.eye(2 ** len(rest)))
    order = list(positions) + rest
    inverse = list(np.argsort(order))
    axes = inverse + [m + q for q in inverse]
    tensor = full.reshape((2,) * (2 * m)).transpose(axes)
    return tensor.reshape(2**m, 2**m)
