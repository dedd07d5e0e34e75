"""Schemas for Holonomy Lab wire formats and experiment configs."""

from enum import Enum

import numpy as np
from pydantic import BaseModel, Field, model_validator

from holonomy_lab.errors import DimensionError


class ChartKind(str, Enum):
    """Coordinate charts on the supported control manifolds."""

    CPN = "CPN"
    CPN_Z = "CPN_Z"
    OPTICAL1 = "OPTICAL1"
    OPTICAL2 = "OPTICAL2"
    SU2INT = "SU2INT"


class LoopKind(str, Enum):
    """Loop constructors reachable from a JSON description."""

    RECTANGLE = "rectangle"
    POLYGON = "polygon"
    CIRCLE = "circle"
    ELLIPSE = "ellipse"


class Weight(str, Enum):
    """Named surface measures for weighted areas in a coordinate plane."""

    SPHERE_POLAR = "sphere_polar"
    SPHERE_COLATITUDE = "sphere_colatitude"
    HYPERBOLIC_DECAY = "hyperbolic_decay"
    HYPERBOLIC_GROWTH = "hyperbolic_growth"
    SINH_4R = "sinh_4r"
    TWO_SINH_2R = "two_sinh_2r"
    FLAT = "flat"


class LoopLabel(str, Enum):
    """Loop families with closed-form holonomies."""

    C1 = "C1"
    C2 = "C2"
    C3 = "C3"
    C4 = "C4"
    C_I = "C_I"
    C_II = "C_II"
    C_III = "C_III"
    C_IV = "C_IV"
    C_V = "C_V"
    SU2INT_C1 = "SU2INT-C1"
    SU2INT_C2 = "SU2INT-C2"


class HolonomyMethod(str, Enum):
    """Evaluation strategy for the ``holonomy`` command."""

    ORDERED = "ordered"
    TRANSPORT = "transport"
    FLUX = "flux"
    STOKES = "stokes"


class MatrixPayload(BaseModel):
    """Row-major complex matrix with split real and imaginary parts."""

    rows: int = Field(..., ge=1)
    cols: int = Field(..., ge=1)
    re: list[float]
    im: list[float]

    @model_validator(mode="after")
    def _check_entry_count(self) -> "MatrixPayload":
        expected = self.rows * self.cols
        if len(self.re) != expected or len(self.im) != expected:
            raise ValueError(
                f"{self.rows}x{self.cols} matrix needs {expected} entries, "
                f"got re={len(self.re)} im={len(self.im)}"
            )
        return self

    @classmethod
    def from_array(cls, a: np.ndarray) -> "MatrixPayload":
        a = np.asarray(a, dtype=complex)
        if a.ndim != 2:
            raise DimensionError(f"cannot serialize array of shape {a.shape}")
        flat = a.reshape(-1)
        return cls(
            rows=a.shape[0],
            cols=a.shape[1],
            re=[float(x) for x in flat.real],
            im=[float(x) for x in flat.imag],
        )

    def to_array(self) -> np.ndarray:
        data = np.asarray(self.re) + 1j * np.asarray(self.im)
        return data.reshape(self.rows, self.cols)


class ChartDescriptor(BaseModel):
    """Chart selection as found in config files, e.g. ``{"chart": "CPN", "n": 2}``."""

    chart: ChartKind
    n: int | None = Field(default=None, ge=1, description="CP^n dimension, CPN charts only")

    @model_validator(mode="after")
    def _check_n(self) -> "ChartDescriptor":
        if self.chart in (ChartKind.CPN, ChartKind.CPN_Z) and self.n is None:
            raise ValueError(f"chart {self.chart.value} requires n")
        return self


class LoopSpec(ChartDescriptor):
    """Planar loop description."""

    plane: tuple[str, str] = Field(..., description="Coordinate names spanning the loop plane")
    fixed: dict[str, float] = Field(default_factory=dict, description="Off-plane coordinates")
    kind: LoopKind
    corner: tuple[float, float] | None = None
    sides: tuple[float, float] | None = None
    vertices: list[tuple[float, float]] | None = None
    center: tuple[float, float] | None = None
    radius: float | None = Field(default=None, ge=0.0)
    semi_axes: tuple[float, float] | None = None
    count: int | None = Field(default=None, ge=3, description="Vertex count of a circle polygon")
    reverse: bool = False

    @model_validator(mode="after")
    def _check_kind_params(self) -> "LoopSpec":
        required = {
            LoopKind.RECTANGLE: ("corner", "sides"),
            LoopKind.POLYGON: ("vertices",),
            LoopKind.CIRCLE: ("center", "radius", "count"),
            LoopKind.ELLIPSE: ("center", "semi_axes"),
        }[self.kind]
        missing = [name for name in required if getattr(self, name) is None]
        if missing:
            raise ValueError(f"{self.kind.value} loop is missing {', '.join(missing)}")
        return self


class HolonomyReport(BaseModel):
    """Serialized holonomy with its diagnostics."""

    unitary: MatrixPayload
    steps: int
    unitarity_defect: float
    richardson_error: float


class HolonomyConfig(BaseModel):
    """Config for the ``holonomy`` command."""

    loop: LoopSpec
    method: HolonomyMethod = HolonomyMethod.ORDERED
    steps: int | None = Field(default=None, ge=1)
    cutoff: int | None = Field(default=None, ge=2)


class CurvatureConfig(ChartDescriptor):
    """Config for the ``curvature`` command."""

    coords: list[float]
    mu: int = Field(..., ge=0)
    nu: int = Field(..., ge=0)
    h: float | None = Field(default=None, gt=0.0)
    cutoff: int | None = Field(default=None, ge=2)


class KickTableConfig(BaseModel):
    """Config for the ``kick-table`` command."""

    radius: float = Field(default=1.0, ge=0.0)
    T: float = Field(default=0.1, ge=0.0, description="Total loop duration, hbar = 1")
    X: float = Field(default=1.0, description="Kerr strength")
    cutoff: int = Field(default=40, ge=2)
    Ns: list[int] = Field(default_factory=lambda: [5, 10, 20, 26])
    ref_n: int = Field(default=100, ge=3)
    origin_start: bool = True
    check_cutoff: int | None = Field(default=None, ge=2)

    @model_validator(mode="after")
    def _check_reference(self) -> "KickTableConfig":
        if not self.Ns:
            raise ValueError("Ns must not be empty")
        if min(self.Ns) < 3:
            raise ValueError("every N must be at least 3")
        if self.ref_n <= max(self.Ns):
            raise ValueError(f"ref_n={self.ref_n} must exceed max(Ns)={max(self.Ns)}")
        return self


class SynthesisConfig(BaseModel):
    """Config for the ``synthesize`` command."""

    target: MatrixPayload
    tol: float = Field(default=1e-4, gt=0.0)
    steps: int | None = Field(default=None, ge=1)


class AdiabaticConfig(BaseModel):
    """Config for the ``adiabatic-check`` command (CP^1 ellipse loop)."""

    center: tuple[float, float] = (0.7853981633974483, 0.0)
    semi_axes: tuple[float, float] = (0.1, 0.3)
    ground_energy: float = Field(default=0.0, description="Energy of the tracked level")
    gap: float = Field(default=4.0, gt=0.0)
    durations: list[float] = Field(default_factory=lambda: [250.0, 500.0, 1000.0])
    dt: float = Field(default=0.02, gt=0.0)


class ProgramStepReport(BaseModel):
    label: LoopLabel
    area: float
    loop: LoopSpec | None = None


class LoopProgramReport(BaseModel):
    """Synthesized loop program and its engine verification."""

    steps: list[ProgramStepReport]
    predicted: MatrixPayload
    evaluated: MatrixPayload
    target: MatrixPayload
    error: float
    within_tolerance: bool


class KickRow(BaseModel):
    N: int
    deviations: tuple[float | None, float | None, float | None, float | None]


class ConvergenceTable(BaseModel):
    """Percentage deviations of ``|u_N|`` from ``|u_ref|`` for the four block entries."""

    ref_n: int
    rows: list[KickRow]
    cutoff: int
    cutoff_sensitivity: float | None = None

    def column(self, entry: int) -> list[float | None]:
        return [row.deviations[entry] for row in self.rows]
