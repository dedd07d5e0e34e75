"""Loops in control charts and the loop-space group structure.

A loop is a chain of smooth segments. Each segment owns a sub-interval ``[t0, t1]`` of the
global parameter ``[0, 1]`` and a local map ``s -> coordinates`` on ``s in [0, 1]`` together
with its velocity ``d/ds``. Discretization is left to the holonomy engine.
"""

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np
from numpy.typing import ArrayLike
from scipy.optimize import brentq

from holonomy_lab.errors import CompositionError, LoopError, ParameterError
from holonomy_lab.manifold import Chart, ControlPoint
from holonomy_lab.schemas import LoopKind, LoopSpec

logger = logging.getLogger(__name__)

CLOSURE_TOL = 1e-12

PathMap = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Segment:
    """Smooth piece of a loop.

    ``path`` and ``velocity`` map ``(...,)`` local times to ``(..., dim)``.
    """

    path: PathMap = field(repr=False)
    velocity: PathMap = field(repr=False)
    t0: float
    t1: float

    def __post_init__(self) -> None:
        if not self.t1 > self.t0:
            raise LoopError(f"segment interval [{self.t0}, {self.t1}] is empty")

    def start(self) -> np.ndarray:
        return self.path(np.array(0.0))

    def end(self) -> np.ndarray:
        return self.path(np.array(1.0))

    def rescaled(self, offset: float, scale: float) -> "Segment":
        return replace(self, t0=offset + scale * self.t0, t1=offset + scale * self.t1)


class Rectangle(NamedTuple):
    """Axis-aligned rectangle a loop traces; ``orientation`` is +1 counter-clockwise."""

    axes: tuple[int, int]
    corner: tuple[float, float]
    sides: tuple[float, float]
    orientation: int = 1


def line_segment(a: ArrayLike, b: ArrayLike, t0: float, t1: float) -> Segment:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    delta = b - a

    def path(s: np.ndarray) -> np.ndarray:
        return a + np.asarray(s, dtype=float)[..., None] * delta

    def velocity(s: np.ndarray) -> np.ndarray:
        return np.broadcast_to(delta, np.shape(s) + delta.shape).copy()

    return Segment(path, velocity, t0, t1)


@dataclass(frozen=True)
class Loop:
    """Closed, piecewise-smooth path ``[0, 1] -> chart`` with ``gamma(0) = gamma(1)``.

    ``plane`` records the coordinate plane of planar loops, ``rectangle`` the geometry of
    axis-aligned rectangles; both are ``None`` when unknown.

    Raises:
        LoopError: If segments do not tile ``[0, 1]``, do not join, or the loop is not closed.
    """

    chart: Chart
    segments: tuple[Segment, ...]
    plane: tuple[int, int] | None = None
    rectangle: Rectangle | None = None

    def __post_init__(self) -> None:
        segs = tuple(self.segments)
        object.__setattr__(self, "segments", segs)
        if not segs:
            raise LoopError("a loop needs at least one segment")
        if abs(segs[0].t0) > CLOSURE_TOL or abs(segs[-1].t1 - 1.0) > CLOSURE_TOL:
            raise LoopError("segments must cover [0, 1]")
        for prev, nxt in zip(segs, segs[1:]):
            if abs(prev.t1 - nxt.t0) > CLOSURE_TOL:
                raise LoopError(f"gap in parameter between {prev.t1} and {nxt.t0}")
            jump = np.max(np.abs(prev.end() - nxt.start()))
            if jump > CLOSURE_TOL:
                raise LoopError(f"segments do not join at t={nxt.t0}: jump {jump:.3e}")
        gap = np.max(np.abs(segs[-1].end() - segs[0].start()))
        if gap > CLOSURE_TOL:
            raise LoopError(f"loop is not closed: |gamma(1) - gamma(0)| = {gap:.3e}")
        if segs[0].start().shape != (self.chart.dim,):
            raise LoopError(f"segments must produce {self.chart.dim} coordinates")

    @property
    def basepoint(self) -> ControlPoint:
        return ControlPoint(self.chart, self.segments[0].start())

    def __call__(self, t: ArrayLike) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if np.any(t < -CLOSURE_TOL) or np.any(t > 1.0 + CLOSURE_TOL):
            raise ParameterError("loop parameter must lie in [0, 1]")
        ends = np.array([seg.t1 for seg in self.segments])
        which = np.minimum(np.searchsorted(ends, t, side="left"), len(ends) - 1)
        out = np.empty(t.shape + (self.chart.dim,))
        for k, seg in enumerate(self.segments):
            mask = which == k
            if np.any(mask):
                local = np.clip((t[mask] - seg.t0) / (seg.t1 - seg.t0), 0.0, 1.0)
                out[mask] = seg.path(local)
        return out

    def _local_grids(self, steps: int) -> list[np.ndarray]:
        if steps < 1:
            raise ParameterError(f"steps must be at least 1, got {steps}")
        grids = []
        for seg in self.segments:
            k = max(1, int(np.ceil(steps * (seg.t1 - seg.t0) - 1e-9)))
            grids.append(np.linspace(0.0, 1.0, k + 1))
        return grids

    def discretize(self, steps: int) -> tuple[np.ndarray, np.ndarray]:
        """Midpoints and chord displacements of a partition with about ``steps`` pieces.

        Every segment receives at least one piece and partition nodes include every segment
        boundary, so corners are never straddled.
        """
        mids, deltas = [], []
        for seg, s in zip(self.segments, self._local_grids(steps), strict=True):
            mids.append(seg.path(0.5 * (s[:-1] + s[1:])))
            deltas.append(np.diff(seg.path(s), axis=0))
        return np.concatenate(mids), np.concatenate(deltas)

    def nodes(self, steps: int) -> np.ndarray:
        """Partition nodes of :meth:`discretize`, first and last both at the basepoint."""
        pieces = [
            seg.path(s[:-1]) for seg, s in zip(self.segments, self._local_grids(steps), strict=True)
        ]
        pieces.append(self.segments[-1].end()[None, :])
        return np.concatenate(pieces)

    def plane_coordinates(self, t: ArrayLike) -> np.ndarray:
        if self.plane is None:
            raise LoopError("loop is not known to be planar")
        return self(t)[..., list(self.plane)]


def _same_point(a: np.ndarray, b: np.ndarray) -> bool:
    return bool(np.max(np.abs(a - b)) <= CLOSURE_TOL)


def trivial_loop(point: ControlPoint) -> Loop:
    """Constant loop resting at ``point``."""
    coords = point.coords.copy()

    def path(s: np.ndarray) -> np.ndarray:
        return np.broadcast_to(coords, np.shape(s) + coords.shape).copy()

    def velocity(s: np.ndarray) -> np.ndarray:
        return np.zeros(np.shape(s) + coords.shape)

    return Loop(point.chart, (Segment(path, velocity, 0.0, 1.0),))


def compose(first: Loop, second: Loop) -> Loop:
    """Run ``first`` on ``[0, 1/2]`` and ``second`` on ``[1/2, 1]``, both at doubled speed.

    Raises:
        CompositionError: If the loops live on different charts or basepoints.
    """
    if first.chart != second.chart:
        raise CompositionError(
            f"cannot compose loops on {first.chart.label} and {second.chart.label}"
        )
    if not _same_point(first.basepoint.coords, second.basepoint.coords):
        raise CompositionError(
            f"basepoints differ: {first.basepoint.coords} vs {second.basepoint.coords}"
        )
    segments = tuple(s.rescaled(0.0, 0.5) for s in first.segments) + tuple(
        s.rescaled(0.5, 0.5) for s in second.segments
    )
    plane = first.plane if first.plane == second.plane else None
    return Loop(first.chart, segments, plane)


def compose_all(loops: Sequence[Loop]) -> Loop:
    """Left fold of :func:`compose`; ``loops[0]`` is traversed first."""
    if not loops:
        raise CompositionError("nothing to compose")
    result = loops[0]
    for loop in loops[1:]:
        result = compose(result, loop)
    return result


def _reverse_segment(seg: Segment) -> Segment:
    def path(s: np.ndarray) -> np.ndarray:
        return seg.path(1.0 - np.asarray(s, dtype=float))

    def velocity(s: np.ndarray) -> np.ndarray:
        return -seg.velocity(1.0 - np.asarray(s, dtype=float))

    return Segment(path, velocity, 1.0 - seg.t1, 1.0 - seg.t0)


def invert(loop: Loop) -> Loop:
    """The loop ``t -> gamma(1 - t)``."""
    rect = loop.rectangle
    if rect is not None:
        rect = rect._replace(orientation=-rect.orientation)
    segments = tuple(_reverse_segment(seg) for seg in reversed(loop.segments))
    return Loop(loop.chart, segments, loop.plane, rect)


def _slope(f: Callable[[np.ndarray], np.ndarray], x: np.ndarray, h: float = 1e-7) -> np.ndarray:
    lo = np.clip(x - h, 0.0, 1.0)
    hi = np.clip(x + h, 0.0, 1.0)
    return (f(hi) - f(lo)) / (hi - lo)


def reparametrize(loop: Loop, phi: Callable[[ArrayLike], ArrayLike], samples: int = 1001) -> Loop:
    """Return ``t -> gamma(phi(t))`` for an increasing ``phi`` with ``phi(0)=0`` and ``phi(1)=1``.

    Segment boundaries are pulled back through ``phi`` with :func:`scipy.optimize.brentq`.

    Raises:
        ParameterError: If ``phi`` fails the endpoint conditions or is not increasing.
    """

    def warp(t: np.ndarray) -> np.ndarray:
        return np.asarray(phi(np.asarray(t, dtype=float)), dtype=float)

    grid = warp(np.linspace(0.0, 1.0, samples))
    if abs(grid[0]) > CLOSURE_TOL or abs(grid[-1] - 1.0) > CLOSURE_TOL:
        raise ParameterError("reparametrization must fix 0 and 1")
    if np.any(np.diff(grid) <= 0.0):
        raise ParameterError("reparametrization must be strictly increasing")

    def pull_back(t: float) -> float:
        if t <= 0.0:
            return 0.0
        if t >= 1.0:
            return 1.0
        return brentq(lambda x: float(warp(np.array(x))) - t, 0.0, 1.0, xtol=1e-15)

    segments = []
    for seg in loop.segments:
        a, b = pull_back(seg.t0), pull_back(seg.t1)

        def local(s: np.ndarray, seg: Segment = seg, a: float = a, b: float = b) -> np.ndarray:
            s = np.asarray(s, dtype=float)
            sigma = (warp(a + s * (b - a)) - seg.t0) / (seg.t1 - seg.t0)
            return np.where(s <= 0.0, 0.0, np.where(s >= 1.0, 1.0, np.clip(sigma, 0.0, 1.0)))

        def path(s: np.ndarray, seg: Segment = seg, local: PathMap = local) -> np.ndarray:
            return seg.path(local(s))

        def velocity(s: np.ndarray, seg: Segment = seg, local: PathMap = local) -> np.ndarray:
            return seg.velocity(local(s)) * _slope(local, np.asarray(s, dtype=float))[..., None]

        segments.append(Segment(path, velocity, a, b))
    return Loop(loop.chart, tuple(segments), loop.plane, loop.rectangle)


# Constructors


def _plane_axes(chart: Chart, plane: Sequence[str | int]) -> tuple[int, int]:
    if len(plane) != 2:
        raise ParameterError(f"a plane needs two axes, got {plane}")
    mu, nu = chart.index(plane[0]), chart.index(plane[1])
    if mu == nu:
        raise ParameterError(f"plane axes must differ, got {plane}")
    return mu, nu


def _lift(chart: Chart, axes: tuple[int, int], fixed: dict[str, float] | None) -> Callable:
    base = chart.point(fixed).coords
    for axis in axes:
        if fixed and chart.names[axis] in fixed:
            raise ParameterError(f"coordinate {chart.names[axis]} is both in-plane and fixed")

    def lift(uv: np.ndarray) -> np.ndarray:
        uv = np.asarray(uv, dtype=float)
        out = np.broadcast_to(base, uv.shape[:-1] + base.shape).copy()
        out[..., axes[0]] = uv[..., 0]
        out[..., axes[1]] = uv[..., 1]
        return out

    return lift


def _polyline(
    chart: Chart, axes: tuple[int, int], lift: Callable, corners: np.ndarray
) -> Loop | None:
    closed = np.concatenate([corners, corners[:1]])
    lengths = np.linalg.norm(np.diff(closed, axis=0), axis=1)
    keep = lengths > 0.0
    total = lengths.sum()
    if total == 0.0:
        return None
    segments, t = [], 0.0
    points = lift(closed)
    for k in np.flatnonzero(keep):
        t_next = t + lengths[k] / total
        segments.append(line_segment(points[k], points[k + 1], t, t_next))
        t = t_next
    segments[-1] = replace(segments[-1], t1=1.0)
    return Loop(chart, tuple(segments), axes)


def rectangle_loop(
    chart: Chart,
    plane: Sequence[str | int],
    fixed: dict[str, float] | None,
    corner: Sequence[float],
    sides: Sequence[float],
) -> Loop:
    """Counter-clockwise axis-aligned rectangle starting at ``corner``.

    Edge times are proportional to edge lengths. A zero side gives the trivial loop at
    ``corner``.

    Raises:
        ParameterError: On invalid axes or negative sides.
    """
    axes = _plane_axes(chart, plane)
    lift = _lift(chart, axes, fixed)
    (u0, v0), (du, dv) = tuple(corner), tuple(sides)
    if du < 0 or dv < 0:
        raise ParameterError(f"rectangle sides must be non-negative, got {sides}")
    rect = Rectangle(axes, (float(u0), float(v0)), (float(du), float(dv)))
    if du == 0 or dv == 0:
        base = ControlPoint(chart, lift(np.array([u0, v0])))
        return replace(trivial_loop(base), plane=axes, rectangle=rect)
    corners = np.array([[u0, v0], [u0 + du, v0], [u0 + du, v0 + dv], [u0, v0 + dv]])
    return replace(_polyline(chart, axes, lift, corners), rectangle=rect)


def polygon_loop(
    chart: Chart,
    plane: Sequence[str | int],
    fixed: dict[str, float] | None,
    vertices: Sequence[Sequence[float]],
) -> Loop:
    """Closed polygon through ``vertices`` in order, returning to the first one."""
    axes = _plane_axes(chart, plane)
    lift = _lift(chart, axes, fixed)
    corners = np.asarray(vertices, dtype=float)
    if corners.ndim != 2 or corners.shape[1] != 2 or len(corners) < 1:
        raise ParameterError(f"vertices must be a list of (u, v) pairs, got shape {corners.shape}")
    loop = _polyline(chart, axes, lift, corners)
    if loop is None:
        base = ControlPoint(chart, lift(corners[0]))
        return replace(trivial_loop(base), plane=axes)
    return loop


def circle_polygon(
    chart: Chart,
    plane: Sequence[str | int],
    fixed: dict[str, float] | None,
    center: Sequence[float],
    radius: float,
    count: int,
) -> Loop:
    """Inscribed ``count``-gon with vertices at angles ``2 pi k / count``, counter-clockwise.

    Raises:
        ParameterError: If ``count < 3`` or ``radius < 0``.
    """
    if count < 3:
        raise ParameterError(f"a circle polygon needs at least 3 vertices, got {count}")
    if radius < 0:
        raise ParameterError(f"radius must be non-negative, got {radius}")
    angles = 2.0 * np.pi * np.arange(count) / count
    vertices = np.asarray(center, dtype=float) + radius * np.stack(
        [np.cos(angles), np.sin(angles)], axis=1
    )
    return polygon_loop(chart, plane, fixed, vertices)


def ellipse_loop(
    chart: Chart,
    plane: Sequence[str | int],
    fixed: dict[str, float] | None,
    center: Sequence[float],
    semi_axes: Sequence[float],
) -> Loop:
    """Smooth counter-clockwise ellipse starting at ``center + (a, 0)``."""
    axes = _plane_axes(chart, plane)
    lift = _lift(chart, axes, fixed)
    cu, cv = center
    a, b = semi_axes
    if a < 0 or b < 0:
        raise ParameterError(f"semi-axes must be non-negative, got {semi_axes}")

    def path(s: np.ndarray) -> np.ndarray:
        angle = 2.0 * np.pi * np.asarray(s, dtype=float)
        return lift(np.stack([cu + a * np.cos(angle), cv + b * np.sin(angle)], axis=-1))

    def velocity(s: np.ndarray) -> np.ndarray:
        angle = 2.0 * np.pi * np.asarray(s, dtype=float)
        out = np.zeros(angle.shape + (chart.dim,))
        out[..., axes[0]] = -2.0 * np.pi * a * np.sin(angle)
        out[..., axes[1]] = 2.0 * np.pi * b * np.cos(angle)
        return out

    return Loop(chart, (Segment(path, velocity, 0.0, 1.0),), axes)


def loop_from_spec(spec: LoopSpec) -> Loop:
    """Build a loop from its JSON description."""
    chart = Chart.from_descriptor(spec)
    if spec.kind == LoopKind.RECTANGLE:
        loop = rectangle_loop(chart, spec.plane, spec.fixed, spec.corner, spec.sides)
    elif spec.kind == LoopKind.POLYGON:
        loop = polygon_loop(chart, spec.plane, spec.fixed, spec.vertices)
    elif spec.kind == LoopKind.CIRCLE:
        loop = circle_polygon(chart, spec.plane, spec.fixed, spec.center, spec.radius, spec.count)
    else:
        loop = ellipse_loop(chart, spec.plane, spec.fixed, spec.center, spec.semi_axes)
    logger.debug(
        "built %s loop on %s with %d segments", spec.kind.value, chart.label, len(loop.segments)
    )
    return invert(loop) if spec.reverse else loop


# Line integrals


def line_integral(
    loop: Loop, form: Callable[[np.ndarray], np.ndarray], panels: int = 32, order: int = 16
) -> float:
    """``oint omega`` for a real 1-form given as ``(..., dim) -> (..., dim)`` coefficients.

    Each segment is split into ``panels`` Gauss-Legendre panels of the given order.
    """
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, 1.0, panels + 1)
    half = 0.5 * np.diff(edges)
    s = (0.5 * (edges[:-1] + edges[1:]))[:, None] + half[:, None] * x[None, :]
    weights = half[:, None] * w[None, :]
    total = 0.0
    for seg in loop.segments:
        coeffs = form(seg.path(s))
        total += float(np.sum(weights * np.sum(coeffs * seg.velocity(s), axis=-1)))
    return total
