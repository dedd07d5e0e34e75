"""Eigen-frames of iso-spectral Hamiltonian families and their adiabatic connections.

A frame field assigns to each control point an ordered orthonormal set of eigenvectors of
``H(p) = U(p) H0 U(p)^dag``. The connection restricted to the degenerate block is
``(A_mu)^{ab} = <psi_a | d_mu psi_b>``; it is available numerically for any frame and in
closed form for the CP^n, optical and interferometer families.
"""

import logging
from collections.abc import Callable
from typing import NamedTuple

import numpy as np
from numpy.typing import ArrayLike

from holonomy_lab import fock
from holonomy_lab.config import settings
from holonomy_lab.errors import ChartError, DimensionError, ParameterError, UnsupportedError
from holonomy_lab.linalg import antihermitian_part, dagger, is_unitary, pauli, require_square
from holonomy_lab.manifold import Chart, ConnectionField, ControlPoint, FrameField, _points_of
from holonomy_lab.schemas import ChartKind

logger = logging.getLogger(__name__)


# CP^n frames


def _cpn_columns(u: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Assemble the CP^n frame from ``u_j = exp(i phi_j) sin theta_j`` and ``c_j = cos theta_j``.

    ``u`` and ``c`` have shape ``(..., n)``; the returned unitary has shape ``(..., n+1, n+1)``
    and its columns are ``|1'>, ..., |n'>, |n+1'>``.
    """
    n = u.shape[-1]
    batch = u.shape[:-1]
    one = np.ones(batch + (1,), dtype=complex)
    u_ext = np.concatenate([u, one], axis=-1)
    c_ext = np.concatenate([c.astype(complex), 0 * one], axis=-1)
    frame = np.zeros(batch + (n + 1, n + 1), dtype=complex)
    for a in range(n):
        frame[..., a, a] = c_ext[..., a]
        run = np.ones(batch, dtype=complex)
        for j in range(a + 1, n + 1):
            frame[..., j, a] = -np.conj(u_ext[..., a]) * u_ext[..., j] * run
            run = run * c_ext[..., j]
    run = np.ones(batch, dtype=complex)
    for j in range(n + 1):
        frame[..., j, n] = u_ext[..., j] * run
        run = run * c_ext[..., j]
    return frame


def _cpn_unitary(points: np.ndarray, n: int) -> np.ndarray:
    theta, phi = points[..., :n], points[..., n:]
    return _cpn_columns(np.exp(1j * phi) * np.sin(theta), np.cos(theta))


def _cpn_z_unitary(points: np.ndarray, n: int) -> np.ndarray:
    z = points[..., :n] + 1j * points[..., n:]
    modulus = np.abs(z)
    # sin|z| / |z| stays smooth through z = 0
    return _cpn_columns(z * np.sinc(modulus / np.pi), np.cos(modulus))


def cpn_frame(n: int, p: ControlPoint | ArrayLike) -> np.ndarray:
    """Frame ``(|1'>, ..., |n+1'>)`` of the rotated CP^n Hamiltonian as matrix columns.

    The first ``n`` columns span the degenerate eigenvalue-0 space; the last one carries
    the eigenvalue ``epsilon``. The rotation is ``U = U_n ... U_1`` with ``U_a`` mixing
    ``|a>`` and ``|n+1>`` by ``theta_a`` and phase ``phi_a``.

    Raises:
        ChartError: If ``p`` is not a point of ``CPN(n)``.
    """
    return _cpn_unitary(_points_of(Chart.cpn(n), p), n)


def cpn_frame_field(n: int) -> FrameField:
    return FrameField(
        Chart.cpn(n), n + 1, tuple(range(n)), lambda points: _cpn_unitary(points, n)
    )


def cpn_z_frame(n: int, p: ControlPoint | ArrayLike) -> np.ndarray:
    """CP^n frame in the coordinates ``z_a = theta_a exp(i phi_a)`` split into real parts."""
    return _cpn_z_unitary(_points_of(Chart(ChartKind.CPN_Z, n), p), n)


def cpn_z_frame_field(n: int) -> FrameField:
    return FrameField(
        Chart(ChartKind.CPN_Z, n), n + 1, tuple(range(n)), lambda points: _cpn_z_unitary(points, n)
    )


def frame_field(chart: Chart, cutoff: int | None = None) -> FrameField:
    """Default frame field of a chart's Hamiltonian family."""
    if chart.kind == ChartKind.CPN:
        return cpn_frame_field(chart.n)
    if chart.kind == ChartKind.CPN_Z:
        return cpn_z_frame_field(chart.n)
    if chart.kind == ChartKind.OPTICAL1:
        return fock.optical1_frame((0, 1), cutoff)
    if chart.kind == ChartKind.OPTICAL2:
        return fock.optical2_frame(cutoff)
    return fock.interferometer_frame(3 if cutoff is None else cutoff)


def gauge_transform(frame: FrameField, g: ArrayLike) -> FrameField:
    """Rotate the degenerate columns by a constant unitary: ``psi'_a = sum_b g_ba psi_b``."""
    g = require_square(g)
    k = len(frame.degenerate_indices)
    if g.shape != (k, k):
        raise DimensionError(f"gauge matrix must be {k}x{k}, got {g.shape}")
    if not is_unitary(g):
        raise ParameterError("gauge matrix is not unitary")
    cols = list(frame.degenerate_indices)

    def vectors(points: np.ndarray) -> np.ndarray:
        out = frame.vectors(points).copy()
        out[..., cols] = out[..., cols] @ g
        return out

    return FrameField(frame.chart, frame.dim, frame.degenerate_indices, vectors)


# Numeric connection


def numeric_connection(
    frame: FrameField, p: ControlPoint | ArrayLike, mu: str | int, h: float | None = None
) -> np.ndarray:
    """Central-difference estimate of ``<psi_a | d_mu psi_b>`` on the degenerate block.

    The result is projected onto u(n) by ``(A - A^dag) / 2``. Accepts a batch of points.

    Raises:
        ParameterError: If ``h <= 0`` or ``mu`` is not a coordinate of the chart.
    """
    h = settings.fd_step if h is None else h
    if h <= 0:
        raise ParameterError(f"finite-difference step must be positive, got {h}")
    index = frame.chart.index(mu)
    points = _points_of(frame.chart, p)
    step = np.zeros(frame.chart.dim)
    step[index] = h
    base = frame.block(points)
    derivative = (frame.block(points + step) - frame.block(points - step)) / (2.0 * h)
    return antihermitian_part(dagger(base) @ derivative)


def frame_connection_field(frame: FrameField, h: float | None = None) -> ConnectionField:
    """Connection field evaluated by :func:`numeric_connection`."""

    def components(points: np.ndarray, mu: int) -> np.ndarray:
        return numeric_connection(frame, points, mu, h)

    return ConnectionField(frame.chart, len(frame.degenerate_indices), components)


# Analytic CP^n connection


def _cpn_components(points: np.ndarray, mu: int, n: int) -> np.ndarray:
    theta, phi = points[..., :n], points[..., n:]
    s, c = np.sin(theta), np.cos(theta)
    batch = points.shape[:-1]
    out = np.zeros(batch + (n, n), dtype=complex)

    def cprod(lo: int, hi: int) -> np.ndarray:
        # product of cos(theta_g) for lo <= g < hi
        return np.prod(c[..., lo:hi], axis=-1) if hi > lo else np.ones(batch)

    def phase(a: int, b: int) -> np.ndarray:
        return np.exp(1j * (phi[..., a] - phi[..., b]))

    if mu < n:
        b = mu
        for a in range(b):
            value = phase(a, b) * s[..., a] * cprod(a + 1, b)
            out[..., a, b] = value
            out[..., b, a] = -np.conj(value)
        return out

    b = mu - n
    for a in range(b):
        value = -1j * phase(a, b) * s[..., b] * s[..., a] * cprod(a + 1, b + 1)
        out[..., a, b] = value
        out[..., b, a] = -np.conj(value)
        for a2 in range(b):
            out[..., a, a2] = (
                1j
                * phase(a, a2)
                * s[..., a]
                * s[..., a2]
                * s[..., b] ** 2
                * cprod(a2 + 1, b)
                * cprod(a + 1, b)
            )
    out[..., b, b] = -1j * s[..., b] ** 2
    return out


def cpn_connection(p: ControlPoint, mu: str | int) -> np.ndarray:
    """Closed-form ``A_mu`` of the CP^n frame at ``p``.

    Coordinates ``0..n-1`` are ``theta_b`` and ``n..2n-1`` are ``phi_b``. Rows and columns
    beyond ``b`` vanish.

    Raises:
        ChartError: If ``p`` is not on a CPN chart.
        ParameterError: If ``mu`` is out of range.
    """
    if not isinstance(p, ControlPoint) or p.chart.kind != ChartKind.CPN:
        raise ChartError("cpn_connection needs a point on a CPN chart")
    return _cpn_components(p.coords, p.chart.index(mu), p.chart.n)


def cpn_connection_field(n: int) -> ConnectionField:
    return ConnectionField(
        Chart.cpn(n), n, lambda points, mu: _cpn_components(points, mu, n)
    )


# Analytic optical and interferometer connections


def _offdiag(shape: tuple[int, ...], dim: int, i: int, j: int, upper: np.ndarray) -> np.ndarray:
    """Anti-hermitian matrix with ``upper`` at ``(i, j)`` and ``-conj(upper)`` at ``(j, i)``."""
    out = np.zeros(shape + (dim, dim), dtype=complex)
    out[..., i, j] = upper
    out[..., j, i] = -np.conj(upper)
    return out


def _diag(values: np.ndarray, entries: ArrayLike) -> np.ndarray:
    return np.asarray(values)[..., None, None] * np.diag(np.asarray(entries, dtype=complex))


def _optical1_components(points: np.ndarray) -> list[np.ndarray]:
    x, y, r1, th1 = (points[..., k] for k in range(4))
    ch, sh = np.cosh(2 * r1), np.sinh(2 * r1)
    eye = np.eye(2)
    a_x = -1j * y[..., None, None] * eye + _offdiag(
        x.shape, 2, 0, 1, -(ch - np.exp(-1j * th1) * sh)
    )
    a_y = 1j * x[..., None, None] * eye + _offdiag(
        x.shape, 2, 0, 1, 1j * (ch + np.exp(-1j * th1) * sh)
    )
    a_r1 = np.zeros(x.shape + (2, 2), dtype=complex)
    a_th1 = _diag(0.25j * (np.cosh(4 * r1) - 1.0), [1, 3])
    return [a_x, a_y, a_r1, a_th1]


def _optical2_components(points: np.ndarray) -> list[np.ndarray]:
    r2, th2, r3, th3 = (points[..., k] for k in range(4))
    shape = r2.shape
    ch2, sh2 = np.cosh(2 * r2), np.sinh(2 * r2)
    a_r2 = _offdiag(shape, 4, 0, 3, -np.exp(-1j * th2))
    a_th2 = _offdiag(shape, 4, 0, 3, 0.5j * sh2 * np.exp(-1j * th2)) + _diag(
        0.5j * (ch2 - 1.0), [1, 2, 2, 3]
    )
    a_r3 = _offdiag(shape, 4, 1, 2, -ch2 * np.exp(-1j * th3))
    a_th3 = _offdiag(shape, 4, 1, 2, 0.5j * ch2 * np.sin(2 * r3) * np.exp(-1j * th3)) + _diag(
        1j * np.sin(r3) ** 2, [0, 1, -1, 0]
    )
    return [a_r2, a_th2, a_r3, a_th3]


def _interferometer_components(points: np.ndarray) -> list[np.ndarray]:
    beta, gamma = points[..., 1], points[..., 2]
    shape = beta.shape
    a_alpha = _offdiag(shape, 4, 1, 2, 0.5j * np.cos(beta) * np.exp(1j * gamma)) + _diag(
        0.5j * np.sin(beta), [0, 1, -1, 0]
    )
    a_beta = _offdiag(shape, 4, 1, 2, -0.5 * np.exp(1j * gamma))
    a_gamma = _diag(np.full(shape, -0.5j), [0, 1, -1, 0])
    return [a_alpha, a_beta, a_gamma]


_COMPONENTS: dict[ChartKind, Callable[[np.ndarray], list[np.ndarray]]] = {
    ChartKind.OPTICAL1: _optical1_components,
    ChartKind.OPTICAL2: _optical2_components,
    ChartKind.SU2INT: _interferometer_components,
}


def optical_connection(p: ControlPoint) -> dict[str, np.ndarray]:
    """Closed-form optical connection components keyed by coordinate name.

    OPTICAL1 gives 2x2 blocks on ``span{|0>, |1>}``; OPTICAL2 gives 4x4 blocks in the order
    ``(00, 01, 10, 11)``.

    Raises:
        ChartError: If ``p`` is on neither optical chart.
    """
    if not isinstance(p, ControlPoint) or p.chart.kind not in (
        ChartKind.OPTICAL1,
        ChartKind.OPTICAL2,
    ):
        raise ChartError("optical_connection needs a point on OPTICAL1 or OPTICAL2")
    blocks = _COMPONENTS[p.chart.kind](p.coords)
    return dict(zip(p.chart.names, blocks, strict=True))


def interferometer_connection(p: ControlPoint) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(A_alpha, A_beta, A_gamma)`` for the frame ``U_x U_y U_z |nu1 nu2>``."""
    if not isinstance(p, ControlPoint) or p.chart.kind != ChartKind.SU2INT:
        raise ChartError("interferometer_connection needs a point on SU2INT")
    a_alpha, a_beta, a_gamma = _interferometer_components(p.coords)
    return a_alpha, a_beta, a_gamma


def connection_field(chart: Chart, cutoff: int | None = None) -> ConnectionField:
    """Closed-form connection field of a chart; CPN_Z falls back to the numeric one."""
    if chart.kind == ChartKind.CPN:
        return cpn_connection_field(chart.n)
    if chart.kind == ChartKind.CPN_Z:
        return frame_connection_field(cpn_z_frame_field(chart.n))
    builder = _COMPONENTS[chart.kind]
    block_dim = 2 if chart.kind == ChartKind.OPTICAL1 else 4
    return ConnectionField(chart, block_dim, lambda points, mu: builder(points)[mu])


# Iso-spectral Hamiltonians


def _resolve_family(family: Chart | str) -> Chart:
    if isinstance(family, Chart):
        return family
    try:
        kind = ChartKind(family)
    except ValueError as exc:
        raise UnsupportedError(f"no Hamiltonian family is registered for {family!r}") from exc
    return Chart(kind)


def family_unitary(chart: Chart, points: ArrayLike, cutoff: int | None = None) -> np.ndarray:
    """Control unitary ``U(p)`` of the chart's Hamiltonian family."""
    pts = chart.check_points(points)
    if chart.kind == ChartKind.CPN:
        return _cpn_unitary(pts, chart.n)
    if chart.kind == ChartKind.CPN_Z:
        return _cpn_z_unitary(pts, chart.n)
    if chart.kind == ChartKind.OPTICAL1:
        return fock.optical1_unitary(pts, cutoff)
    if chart.kind == ChartKind.OPTICAL2:
        return fock.optical2_unitary(pts, cutoff)
    return fock.interferometer_unitary(pts, 3 if cutoff is None else cutoff)


def base_hamiltonian(chart: Chart, epsilon: float = 1.0, cutoff: int | None = None) -> np.ndarray:
    """``H0`` of the family: ``diag(0, ..., 0, epsilon)`` for CP^n, a Kerr medium otherwise."""
    if chart.kind in (ChartKind.CPN, ChartKind.CPN_Z):
        h0 = np.zeros((chart.n + 1, chart.n + 1), dtype=complex)
        h0[-1, -1] = epsilon
        return h0
    if chart.kind == ChartKind.OPTICAL1:
        return fock.kerr_hamiltonian(epsilon, cutoff)
    if chart.kind == ChartKind.OPTICAL2:
        return fock.kerr_hamiltonian(epsilon, cutoff, modes=2)
    return fock.kerr_hamiltonian(epsilon, 3 if cutoff is None else cutoff, modes=2)


def isospectral_hamiltonian(
    family: Chart | str,
    p: ControlPoint | ArrayLike,
    epsilon: float = 1.0,
    cutoff: int | None = None,
) -> np.ndarray:
    """``H(p) = U(p) H0 U(p)^dag`` for a registered Hamiltonian family.

    Raises:
        UnsupportedError: If ``family`` names no known family.
    """
    chart = _resolve_family(family)
    u = family_unitary(chart, _points_of(chart, p), cutoff)
    return u @ base_hamiltonian(chart, epsilon, cutoff) @ dagger(u)


class RestrictedHamiltonian(NamedTuple):
    """A CP^n Hamiltonian restricted to a few basis states.

    ``shift`` is the identity part ``tr(block) / dim``; for two-level blocks ``field`` holds
    ``B`` in ``block = shift * I - (epsilon / 2) B . sigma``.
    """

    basis: tuple[int, ...]
    block: np.ndarray
    shift: float
    field: np.ndarray | None


def bloch_vector(theta: float, phi: float) -> np.ndarray:
    """``(sin theta cos phi, sin theta sin phi, cos theta)``."""
    return np.array(
        [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)]
    )


def restricted_hamiltonian(
    kind: str,
    n: int,
    beta: int,
    beta_bar: int | None,
    values: dict[str, float],
    epsilon: float = 1.0,
) -> RestrictedHamiltonian:
    """Restrict the CP^n Hamiltonian to the two- or three-level blocks of the C1 and C3 planes.

    ``kind`` is ``"H1"`` for the ``(|beta>, |n+1>)`` block or ``"H3"`` for the
    ``(|n+1>, |beta_bar>, |beta>)`` block; indices are 1-based. Coordinates missing from
    ``values`` are zero, which is the restriction defining both planes.
    """
    chart = Chart.cpn(n)
    if not 1 <= beta <= n:
        raise ParameterError(f"beta={beta} outside 1..{n}")
    h = isospectral_hamiltonian(chart, chart.point(values), epsilon)
    if kind == "H1":
        basis = (beta - 1, n)
    elif kind == "H3":
        if beta_bar is None or not beta < beta_bar <= n:
            raise ParameterError(f"H3 needs beta < beta_bar <= {n}, got {beta}, {beta_bar}")
        basis = (n, beta_bar - 1, beta - 1)
    else:
        raise ParameterError(f"unknown restricted Hamiltonian {kind!r}")
    block = h[np.ix_(basis, basis)]
    shift = float(np.real(np.trace(block))) / len(basis)
    field = None
    if len(basis) == 2:
        field = np.array(
            [-np.real(np.trace(block @ pauli(k))) / epsilon for k in (1, 2, 3)]
        )
    logger.debug("%s block on %s: identity shift %.3e", kind, basis, shift)
    return RestrictedHamiltonian(basis, block, shift, field)
