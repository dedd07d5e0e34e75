"""Charts, control points and the field types evaluated on them."""

from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike

from holonomy_lab.errors import ChartError, ParameterError
from holonomy_lab.schemas import ChartDescriptor, ChartKind

_FIXED_NAMES = {
    ChartKind.OPTICAL1: ("x", "y", "r1", "theta1"),
    ChartKind.OPTICAL2: ("r2", "theta2", "r3", "theta3"),
    ChartKind.SU2INT: ("alpha", "beta", "gamma"),
}


@dataclass(frozen=True)
class Chart:
    """A coordinate chart with a fixed, positional coordinate order.

    CPN charts order coordinates as ``theta_1..theta_n, phi_1..phi_n``; the CPN_Z chart uses
    the real and imaginary parts ``z0_1..z0_n, z1_1..z1_n`` of ``z = theta * exp(i phi)``.
    """

    kind: ChartKind
    n: int = 0

    def __post_init__(self) -> None:
        if self.kind in (ChartKind.CPN, ChartKind.CPN_Z):
            if self.n < 1:
                raise ChartError(f"{self.kind.value} chart needs n >= 1, got {self.n}")
        elif self.n:
            raise ChartError(f"{self.kind.value} chart takes no n")

    @classmethod
    def cpn(cls, n: int) -> "Chart":
        return cls(ChartKind.CPN, n)

    @classmethod
    def from_descriptor(cls, descriptor: ChartDescriptor) -> "Chart":
        return cls(descriptor.chart, descriptor.n or 0)

    @property
    def names(self) -> tuple[str, ...]:
        if self.kind == ChartKind.CPN:
            return tuple(f"theta_{k}" for k in range(1, self.n + 1)) + tuple(
                f"phi_{k}" for k in range(1, self.n + 1)
            )
        if self.kind == ChartKind.CPN_Z:
            return tuple(f"z0_{k}" for k in range(1, self.n + 1)) + tuple(
                f"z1_{k}" for k in range(1, self.n + 1)
            )
        return _FIXED_NAMES[self.kind]

    @property
    def dim(self) -> int:
        return len(self.names)

    def index(self, coordinate: str | int) -> int:
        """Positional index of a coordinate given by name or index."""
        if isinstance(coordinate, int | np.integer):
            if not 0 <= coordinate < self.dim:
                raise ParameterError(
                    f"coordinate index {coordinate} out of range for {self.label} (dim {self.dim})"
                )
            return int(coordinate)
        try:
            return self.names.index(coordinate)
        except ValueError as exc:
            raise ParameterError(f"{self.label} has no coordinate {coordinate!r}") from exc

    def point(self, values: dict[str, float] | None = None) -> "ControlPoint":
        """Build a point from named coordinates, defaulting the rest to zero."""
        coords = np.zeros(self.dim)
        for name, value in (values or {}).items():
            coords[self.index(name)] = value
        return ControlPoint(self, coords)

    def check_points(self, points: ArrayLike) -> np.ndarray:
        """Validate a ``(..., dim)`` array of coordinates for this chart."""
        arr = np.asarray(points, dtype=float)
        if arr.ndim == 0 or arr.shape[-1] != self.dim:
            raise ChartError(f"{self.label} expects {self.dim} coordinates, got shape {arr.shape}")
        return arr

    @property
    def label(self) -> str:
        return f"{self.kind.value}({self.n})" if self.n else self.kind.value


@dataclass(frozen=True)
class ControlPoint:
    """A point on a control manifold: chart plus real coordinate vector."""

    chart: Chart
    coords: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        coords = np.array(self.coords, dtype=float).reshape(-1)
        if coords.shape[0] != self.chart.dim:
            raise ChartError(
                f"{self.chart.label} needs {self.chart.dim} coordinates, got {coords.shape[0]}"
            )
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)

    def shifted(self, index: int, step: float) -> "ControlPoint":
        coords = self.coords.copy()
        coords[index] += step
        return ControlPoint(self.chart, coords)


def _points_of(chart: Chart, point: "ControlPoint | ArrayLike") -> np.ndarray:
    if isinstance(point, ControlPoint):
        if point.chart != chart:
            raise ChartError(f"point on {point.chart.label} given to a {chart.label} field")
        return point.coords
    return chart.check_points(point)


@dataclass(frozen=True)
class FrameField:
    """Ordered orthonormal frames over a chart.

    ``vectors`` maps a ``(..., chart.dim)`` coordinate array to a ``(..., dim, k)`` array
    whose columns are the frame vectors; ``degenerate_indices`` selects the columns spanning
    the computational eigenspace.
    """

    chart: Chart
    dim: int
    degenerate_indices: tuple[int, ...]
    vectors: Callable[[np.ndarray], np.ndarray] = field(repr=False)

    def evaluate(self, point: "ControlPoint | ArrayLike") -> np.ndarray:
        return self.vectors(_points_of(self.chart, point))

    def block(self, point: "ControlPoint | ArrayLike") -> np.ndarray:
        """Frame columns restricted to the degenerate eigenspace."""
        return self.evaluate(point)[..., list(self.degenerate_indices)]


@dataclass(frozen=True)
class ConnectionField:
    """Gauge potential: ``(points, mu) -> A_mu`` as ``(..., n, n)`` anti-hermitian matrices."""

    chart: Chart
    block_dim: int
    components: Callable[[np.ndarray, int], np.ndarray] = field(repr=False)

    def evaluate(self, point: "ControlPoint | ArrayLike", mu: str | int) -> np.ndarray:
        index = self.chart.index(mu)
        return self.components(_points_of(self.chart, point), index)

    def potential(self, points: ArrayLike, displacement: ArrayLike) -> np.ndarray:
        """Contract ``sum_mu A_mu(p) * d_mu`` over coordinates with a nonzero displacement."""
        points = self.chart.check_points(points)
        displacement = np.asarray(displacement, dtype=float)
        out = np.zeros(points.shape[:-1] + (self.block_dim, self.block_dim), dtype=complex)
        for mu in range(self.chart.dim):
            d = displacement[..., mu]
            if np.any(d != 0.0):
                out += self.components(points, mu) * d[..., None, None]
        return out
