"""Truncated Fock-space optics: ladder operators, Kerr media, control unitaries and kicks.

Units have hbar = 1. A single mode keeps the states ``|0>..|cutoff-1>``; two modes use the
tensor product with lexicographic ``(nu1, nu2)`` ordering, i.e. index ``nu1 * cutoff + nu2``.
"""

import logging
import warnings
from collections.abc import Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.typing import ArrayLike

from holonomy_lab.config import settings
from holonomy_lab.errors import ChartError, LeakageWarning, ParameterError
from holonomy_lab.linalg import dagger, expm, ordered_product
from holonomy_lab.loops import Loop, line_integral
from holonomy_lab.manifold import Chart, FrameField
from holonomy_lab.schemas import ChartKind, ConvergenceTable, KickRow

logger = logging.getLogger(__name__)

# Published percentage deviations (entries 00, 01, 10, 11) against an N = 100 reference,
# T = 0.1, X = 1, unit radius.
REFERENCE_TABLE: dict[int, tuple[float, float, float, float]] = {
    5: (0.2419, 0.9119, 0.9119, 1.6763),
    10: (0.0595, 0.2260, 0.2260, 0.4061),
    20: (0.0149, 0.0558, 0.0558, 0.0760),
    26: (0.0099, 0.0186, 0.0186, 0.0269),
}

QUBIT_STATES_TWO_MODE = ((0, 0), (0, 1), (1, 0), (1, 1))


@dataclass(frozen=True)
class FockSpace:
    """Truncated bosonic state space of one or two modes."""

    cutoff: int
    modes: int = 1

    def __post_init__(self) -> None:
        if self.cutoff < 2:
            raise ParameterError(f"Fock cutoff must be at least 2, got {self.cutoff}")
        if self.modes not in (1, 2):
            raise ParameterError(f"only one or two modes are supported, got {self.modes}")

    @property
    def dim(self) -> int:
        return self.cutoff**self.modes

    def index(self, *occupations: int) -> int:
        if len(occupations) != self.modes:
            raise ParameterError(f"expected {self.modes} occupation numbers, got {occupations}")
        idx = 0
        for nu in occupations:
            if not 0 <= nu < self.cutoff:
                raise ParameterError(f"occupation {nu} outside cutoff {self.cutoff}")
            idx = idx * self.cutoff + nu
        return idx

    def top_mask(self) -> np.ndarray:
        """Basis states whose occupation sits in the two highest levels of some mode."""
        levels = np.arange(self.cutoff) >= self.cutoff - 2
        if self.modes == 1:
            return levels
        return (levels[:, None] | levels[None, :]).reshape(-1)


def _cutoff(cutoff: int | None) -> int:
    return settings.fock_cutoff if cutoff is None else cutoff


@lru_cache(maxsize=32)
def _ladder_cached(cutoff: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    FockSpace(cutoff)
    a = np.diag(np.sqrt(np.arange(1, cutoff, dtype=float)), k=1).astype(complex)
    adag = a.conj().T
    n = np.diag(np.arange(cutoff, dtype=float)).astype(complex)
    for m in (a, adag, n):
        m.setflags(write=False)
    return a, adag, n


def ladder(cutoff: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return the truncated ``(a, a_dagger, n)`` matrices."""
    return tuple(m.copy() for m in _ladder_cached(cutoff))


@lru_cache(maxsize=32)
def _two_mode_cached(cutoff: int) -> tuple[np.ndarray, np.ndarray]:
    a, _, _ = _ladder_cached(cutoff)
    eye = np.eye(cutoff)
    a1, a2 = np.kron(a, eye), np.kron(eye, a)
    a1.setflags(write=False)
    a2.setflags(write=False)
    return a1, a2


def two_mode_ladders(cutoff: int) -> tuple[np.ndarray, np.ndarray]:
    """Annihilation operators ``(a1, a2)`` on the two-mode space."""
    return tuple(m.copy() for m in _two_mode_cached(cutoff))


def kerr_hamiltonian(X: float, cutoff: int | None = None, modes: int = 1) -> np.ndarray:
    """Diagonal Kerr Hamiltonian ``X n(n-1)`` summed over modes."""
    space = FockSpace(_cutoff(cutoff), modes)
    nu = np.arange(space.cutoff, dtype=float)
    single = X * nu * (nu - 1.0)
    if modes == 1:
        return np.diag(single).astype(complex)
    return np.diag((single[:, None] + single[None, :]).reshape(-1)).astype(complex)


def measure_leakage(u: np.ndarray, space: FockSpace, columns: Sequence[int]) -> float:
    """Largest amplitude carried from ``columns`` into the top of the truncated space."""
    top = space.top_mask()
    return float(np.max(np.abs(u[..., top, :][..., list(columns)]), initial=0.0))


def _warn_leakage(u: np.ndarray, space: FockSpace, columns: Sequence[int], label: str) -> float:
    leak = measure_leakage(u, space, columns)
    if leak > settings.leakage_tol:
        message = (
            f"{label}: amplitude {leak:.3e} reaches the top of a cutoff-{space.cutoff} space "
            f"(tolerance {settings.leakage_tol:.1e})"
        )
        logger.warning(message)
        warnings.warn(message, LeakageWarning, stacklevel=3)
    return leak


def _low_columns(space: FockSpace) -> list[int]:
    if space.modes == 1:
        return [0, 1]
    return [space.index(*occ) for occ in QUBIT_STATES_TWO_MODE]


def displacement(lam: ArrayLike, cutoff: int | None = None) -> np.ndarray:
    """``D(lambda) = exp(lambda a^dag - conj(lambda) a)``, batched over ``lambda``."""
    space = FockSpace(_cutoff(cutoff))
    a, adag, _ = _ladder_cached(space.cutoff)
    lam = np.asarray(lam, dtype=complex)[..., None, None]
    u = expm(lam * adag - np.conj(lam) * a)
    _warn_leakage(u, space, _low_columns(space), "displacement")
    return u


def squeeze(mu: ArrayLike, cutoff: int | None = None) -> np.ndarray:
    """``S(mu) = exp(mu a^dag^2 - conj(mu) a^2)``, batched over ``mu``."""
    space = FockSpace(_cutoff(cutoff))
    a, adag, _ = _ladder_cached(space.cutoff)
    mu = np.asarray(mu, dtype=complex)[..., None, None]
    u = expm(mu * (adag @ adag) - np.conj(mu) * (a @ a))
    _warn_leakage(u, space, _low_columns(space), "squeeze")
    return u


def two_mode_mixer(xi: ArrayLike, cutoff: int | None = None) -> np.ndarray:
    """``N(xi) = exp(xi a1^dag a2 - conj(xi) a1 a2^dag)``."""
    space = FockSpace(_cutoff(cutoff), modes=2)
    a1, a2 = _two_mode_cached(space.cutoff)
    xi = np.asarray(xi, dtype=complex)[..., None, None]
    gen = a1.conj().T @ a2
    u = expm(xi * gen - np.conj(xi) * gen.conj().T)
    _warn_leakage(u, space, _low_columns(space), "two-mode mixer")
    return u


def two_mode_squeeze(zeta: ArrayLike, cutoff: int | None = None) -> np.ndarray:
    """``M(zeta) = exp(zeta a1^dag a2^dag - conj(zeta) a1 a2)``."""
    space = FockSpace(_cutoff(cutoff), modes=2)
    a1, a2 = _two_mode_cached(space.cutoff)
    zeta = np.asarray(zeta, dtype=complex)[..., None, None]
    gen = a1.conj().T @ a2.conj().T
    u = expm(zeta * gen - np.conj(zeta) * gen.conj().T)
    _warn_leakage(u, space, _low_columns(space), "two-mode squeeze")
    return u


def angular_momentum(cutoff: int = 3) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Schwinger generators ``(J_x, J_y, J_z)`` of the two-mode SU(2) interferometer."""
    a1, a2 = _two_mode_cached(cutoff)
    a1d, a2d = a1.conj().T, a2.conj().T
    jx = 0.5 * (a1d @ a2 + a2d @ a1)
    jy = -0.5j * (a1d @ a2 - a2d @ a1)
    jz = 0.5 * (a1d @ a1 - a2d @ a2)
    return jx, jy, jz


# Unitary families U(sigma) acting on the full truncated space.


def optical1_unitary(points: ArrayLike, cutoff: int | None = None) -> np.ndarray:
    """``D(x + iy) S(r1 exp(i theta1))`` for OPTICAL1 coordinates ``(x, y, r1, theta1)``."""
    p = Chart(ChartKind.OPTICAL1).check_points(points)
    lam = p[..., 0] + 1j * p[..., 1]
    mu = p[..., 2] * np.exp(1j * p[..., 3])
    return displacement(lam, cutoff) @ squeeze(mu, cutoff)


def optical2_unitary(points: ArrayLike, cutoff: int | None = None) -> np.ndarray:
    """``N(xi) M(zeta)`` with ``zeta = r2 exp(i theta2)`` and ``xi = r3 exp(i theta3)``."""
    p = Chart(ChartKind.OPTICAL2).check_points(points)
    zeta = p[..., 0] * np.exp(1j * p[..., 1])
    xi = p[..., 2] * np.exp(1j * p[..., 3])
    return two_mode_mixer(xi, cutoff) @ two_mode_squeeze(zeta, cutoff)


def interferometer_unitary(points: ArrayLike, cutoff: int = 3) -> np.ndarray:
    """``U_x(alpha) U_y(beta) U_z(gamma)`` with ``U_k(t) = exp(i t J_k)``.

    The generators conserve total photon number, so ``cutoff = 3`` represents the
    ``N <= 2`` sectors holding the two-qubit states exactly.
    """
    p = Chart(ChartKind.SU2INT).check_points(points)
    jx, jy, jz = angular_momentum(cutoff)
    ux = expm(1j * p[..., 0, None, None] * jx)
    uy = expm(1j * p[..., 1, None, None] * jy)
    uz = expm(1j * p[..., 2, None, None] * jz)
    return ux @ uy @ uz


# Frames spanned by the images of the low Fock states.


def optical1_frame(levels: Sequence[int] = (0, 1), cutoff: int | None = None) -> FrameField:
    """Frame ``{D(lambda) S(mu)|nu>}`` over OPTICAL1 for the given Fock levels."""
    cutoff = _cutoff(cutoff)
    cols = list(levels)
    if any(not 0 <= nu < cutoff for nu in cols):
        raise ParameterError(f"levels {levels} outside cutoff {cutoff}")

    def vectors(points: np.ndarray) -> np.ndarray:
        return optical1_unitary(points, cutoff)[..., cols]

    return FrameField(Chart(ChartKind.OPTICAL1), cutoff, tuple(range(len(cols))), vectors)


def optical2_frame(cutoff: int | None = None) -> FrameField:
    """Frame ``{N(xi) M(zeta)|nu1 nu2>}`` for ``nu1, nu2`` in ``{0, 1}``."""
    space = FockSpace(_cutoff(cutoff), modes=2)
    cols = _low_columns(space)

    def vectors(points: np.ndarray) -> np.ndarray:
        return optical2_unitary(points, space.cutoff)[..., cols]

    return FrameField(Chart(ChartKind.OPTICAL2), space.dim, (0, 1, 2, 3), vectors)


def interferometer_frame(cutoff: int = 3) -> FrameField:
    """Frame ``{U_x U_y U_z |nu1 nu2>}`` ordered ``(00, 01, 10, 11)``."""
    space = FockSpace(cutoff, modes=2)
    cols = _low_columns(space)

    def vectors(points: np.ndarray) -> np.ndarray:
        return interferometer_unitary(points, cutoff)[..., cols]

    return FrameField(Chart(ChartKind.SU2INT), space.dim, (0, 1, 2, 3), vectors)


# Closed-form Abelian phases.


def _require_optical1(loop: Loop) -> None:
    if loop.chart.kind != ChartKind.OPTICAL1:
        raise ChartError(
            f"closed-form optical phases need an OPTICAL1 loop, got {loop.chart.label}"
        )


def displacer_berry_phase(loop: Loop) -> float:
    """``oint (y dx - x dy)``, the Berry phase of ``D(x + iy)|nu>`` for every ``nu``.

    A counter-clockwise circle of radius ``r`` gives ``-2 pi r^2``.
    """
    _require_optical1(loop)

    def form(points: np.ndarray) -> np.ndarray:
        out = np.zeros_like(points)
        out[..., 0] = points[..., 1]
        out[..., 1] = -points[..., 0]
        return out

    return line_integral(loop, form)


def squeezer_berry_phase(nu: int, loop: Loop) -> float:
    """Berry phase ``oint i <psi|d psi>`` of ``S(r1 exp(i theta1))|nu>``.

    Equals ``-((2 nu + 1) / 4) oint (cosh 4 r1 - 1) d theta1``; the sign follows from
    ``S(mu) = exp(mu a^dag^2 - conj(mu) a^2)``.
    """
    if nu < 0:
        raise ParameterError(f"Fock level must be non-negative, got {nu}")
    _require_optical1(loop)

    def form(points: np.ndarray) -> np.ndarray:
        out = np.zeros_like(points)
        out[..., 3] = -(2 * nu + 1) / 4.0 * (np.cosh(4.0 * points[..., 2]) - 1.0)
        return out

    return line_integral(loop, form)


# Kick method.


@dataclass(frozen=True)
class KickSchedule:
    """Polygon of displacement amplitudes visited with free Kerr evolution in between."""

    vertices: tuple[complex, ...]
    T: float
    X: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertices", tuple(complex(v) for v in self.vertices))
        if len(self.vertices) < 3:
            raise ParameterError(
                f"a kick polygon needs at least 3 vertices, got {len(self.vertices)}"
            )
        if self.T < 0:
            raise ParameterError(f"duration must be non-negative, got {self.T}")

    @classmethod
    def circle(cls, N: int, radius: float = 1.0, T: float = 0.1, X: float = 1.0) -> "KickSchedule":
        """Inscribed N-gon with vertices at angles ``2 pi k / N``, counter-clockwise from 0."""
        if N < 3:
            raise ParameterError(f"N must be at least 3, got {N}")
        angles = 2.0 * np.pi * np.arange(N) / N
        return cls(tuple(radius * np.exp(1j * angles)), T, X)

    @property
    def N(self) -> int:
        return len(self.vertices)

    @property
    def dt(self) -> float:
        return self.T / self.N


def kick_evolution(
    schedule: KickSchedule,
    cutoff: int | None = None,
    origin_start: bool = True,
    full: bool = False,
) -> np.ndarray:
    """Kicked Kerr evolution around a displacement polygon.

    Each vertex contributes ``D(p_k) exp(-i H_I dt) D(p_k)^dag`` and later vertices multiply on
    the left. With ``origin_start`` the polygon is translated so that its first vertex sits at
    the origin (``p_k = lambda_k - lambda_1``), which drops the outer ``D(lambda_1)`` and
    ``D(lambda_1)^dag``; otherwise ``p_k = lambda_k``.

    Returns:
        The 2x2 block on ``span{|0>, |1>}``, or the full matrix when ``full`` is set.
    """
    cutoff = _cutoff(cutoff)
    vertices = np.asarray(schedule.vertices)
    positions = vertices - vertices[0] if origin_start else vertices
    disp = displacement(positions, cutoff)
    nu = np.arange(cutoff, dtype=float)
    free = np.exp(-1j * schedule.X * nu * (nu - 1.0) * schedule.dt)
    factors = (disp * free[None, None, :]) @ dagger(disp)
    u = ordered_product(factors)
    return u if full else u[:2, :2]


def _block_deviation(block: np.ndarray, reference: np.ndarray) -> tuple[float | None, ...]:
    out: list[float | None] = []
    for u, ref in zip(np.abs(block).reshape(-1), np.abs(reference).reshape(-1), strict=True):
        out.append(None if ref < 1e-12 else float(100.0 * abs(u - ref) / ref))
    return tuple(out)


def _blocks(
    Ns: Iterable[int], radius: float, T: float, X: float, cutoff: int, origin_start: bool
) -> dict[int, np.ndarray]:
    Ns = sorted(set(Ns))

    def run(N: int) -> np.ndarray:
        return kick_evolution(KickSchedule.circle(N, radius, T, X), cutoff, origin_start)

    with ThreadPoolExecutor(max_workers=max(1, settings.threads)) as pool:
        return dict(zip(Ns, pool.map(run, Ns), strict=True))


def convergence_table(
    Ns: Sequence[int] = (5, 10, 20, 26),
    ref_n: int = 100,
    radius: float = 1.0,
    T: float = 0.1,
    X: float = 1.0,
    cutoff: int | None = None,
    origin_start: bool = True,
    check_cutoff: int | None = None,
) -> ConvergenceTable:
    """Percentage deviations ``100 * ||u_N| - |u_ref|| / |u_ref|`` for entries 00, 01, 10, 11.

    Independent N values run on a thread pool capped by ``settings.threads``. When
    ``check_cutoff`` is given the blocks are recomputed at that cutoff and the largest
    entrywise difference is reported as ``cutoff_sensitivity``.
    """
    cutoff = _cutoff(cutoff)
    if not Ns:
        raise ParameterError("Ns must not be empty")
    if ref_n <= max(Ns):
        raise ParameterError(f"ref_n={ref_n} must exceed max(Ns)={max(Ns)}")
    wanted = list(Ns) + [ref_n]
    blocks = _blocks(wanted, radius, T, X, cutoff, origin_start)
    reference = blocks[ref_n]
    rows = [KickRow(N=N, deviations=_block_deviation(blocks[N], reference)) for N in Ns]
    sensitivity = None
    if check_cutoff is not None:
        other = _blocks(wanted, radius, T, X, check_cutoff, origin_start)
        sensitivity = max(float(np.max(np.abs(blocks[N] - other[N]))) for N in wanted)
        logger.info("cutoff %d vs %d: max block difference %.3e", cutoff, check_cutoff, sensitivity)
    return ConvergenceTable(ref_n=ref_n, rows=rows, cutoff=cutoff, cutoff_sensitivity=sensitivity)


def fit_scaling_exponent(Ns: Sequence[float], deviations: Sequence[float]) -> float:
    """Exponent ``p`` of a least-squares fit ``deviation ~ C N^-p`` on log-log axes."""
    Ns = np.asarray(Ns, dtype=float)
    deviations = np.asarray(deviations, dtype=float)
    if Ns.shape != deviations.shape or Ns.size < 2:
        raise ParameterError("need at least two (N, deviation) pairs of equal length")
    if np.any(deviations <= 0) or np.any(Ns <= 0):
        raise ParameterError("scaling fit needs positive N and deviations")
    slope, _ = np.polyfit(np.log(Ns), np.log(deviations), 1)
    return float(-slope)


def compare_to_reference(
    table: ConvergenceTable,
    band: float = 0.3,
    reference: dict[int, tuple[float, float, float, float]] | None = None,
) -> dict[int, tuple[bool, ...]]:
    """Flag, per row and entry, whether a deviation lies within ``band`` of the reference."""
    reference = REFERENCE_TABLE if reference is None else reference
    verdict: dict[int, tuple[bool, ...]] = {}
    for row in table.rows:
        if row.N not in reference:
            continue
        verdict[row.N] = tuple(
            dev is not None and abs(dev - ref) <= band * ref
            for dev, ref in zip(row.deviations, reference[row.N], strict=True)
        )
    return verdict
