"""Holonomy evaluation: path-ordered products, flux and Stokes integrals, adiabatic evolution.

Ordering convention: ``holonomy_ordered`` returns ``P exp(+oint A)`` built from midpoint
exponentials with later factors on the left, so ``Gamma(compose(g1, g2)) = Gamma(g2) Gamma(g1)``.
``transport_holonomy`` is ``P exp(-oint A)``, the limit of Schroedinger evolution.
"""

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike
from scipy.integrate import simpson

from holonomy_lab.config import settings
from holonomy_lab.curvature import curvature_numeric
from holonomy_lab.errors import (
    AbelianizationError,
    ChartError,
    DimensionError,
    ParameterError,
    ShapeError,
)
from holonomy_lab.linalg import (
    dagger,
    expm,
    frobenius,
    ordered_product,
    require_square,
    structure_defects,
)
from holonomy_lab.loops import Loop, line_integral
from holonomy_lab.manifold import ConnectionField, FrameField
from holonomy_lab.schemas import HolonomyReport, MatrixPayload, Weight

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HolonomyResult:
    """Holonomy unitary with its discretization diagnostics."""

    unitary: np.ndarray
    steps: int
    unitarity_defect: float
    richardson_error: float

    @classmethod
    def from_estimates(
        cls, fine: np.ndarray, coarse: np.ndarray, steps: int, order: int = 2
    ) -> "HolonomyResult":
        error = frobenius(fine - coarse) / (2**order - 1)
        return cls(fine, steps, structure_defects(fine).unitarity, error)

    def to_report(self) -> HolonomyReport:
        return HolonomyReport(
            unitary=MatrixPayload.from_array(self.unitary),
            steps=self.steps,
            unitarity_defect=self.unitarity_defect,
            richardson_error=self.richardson_error,
        )


def _check_chart(field: ConnectionField, loop: Loop) -> None:
    if field.chart != loop.chart:
        raise ChartError(
            f"connection on {field.chart.label} cannot transport along a {loop.chart.label} loop"
        )


def _path_product(
    field: ConnectionField, loop: Loop, steps: int, sign: float
) -> tuple[np.ndarray, int]:
    mids, deltas = loop.discretize(steps)
    factors = expm(sign * field.potential(mids, deltas))
    return ordered_product(factors), len(mids)


def _ordered(field: ConnectionField, loop: Loop, steps: int | None, sign: float) -> HolonomyResult:
    _check_chart(field, loop)
    steps = settings.holonomy_steps if steps is None else steps
    if steps < 1:
        raise ParameterError(f"steps must be at least 1, got {steps}")
    fine, used = _path_product(field, loop, steps, sign)
    coarse, _ = _path_product(field, loop, max(1, steps // 2), sign)
    result = HolonomyResult.from_estimates(fine, coarse, used)
    logger.debug(
        "holonomy over %d steps: unitarity %.2e, richardson %.2e",
        used,
        result.unitarity_defect,
        result.richardson_error,
    )
    return result


def holonomy_ordered(
    field: ConnectionField, loop: Loop, steps: int | None = None
) -> HolonomyResult:
    """``P exp(oint A)``: ordered product of ``exp(sum_mu A_mu(p_k) d_mu)`` at segment midpoints.

    Later path pieces multiply on the left. The Richardson error compares the result with a
    half-resolution product.

    Raises:
        ChartError: If connection and loop live on different charts.
        ParameterError: If ``steps < 1``.
    """
    return _ordered(field, loop, steps, 1.0)


def transport_holonomy(
    field: ConnectionField, loop: Loop, steps: int | None = None
) -> HolonomyResult:
    """``P exp(-oint A)`` with later factors on the left.

    Parallel transport of the frame under adiabatic Schroedinger evolution converges to this
    matrix.
    """
    return _ordered(field, loop, steps, -1.0)


# Abelian flux


def _fan_quadrature(loop: Loop, panels: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and signed area weights of a radial fan from the loop's centroid."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, 1.0, panels + 1)
    half = 0.5 * np.diff(edges)
    s = ((0.5 * (edges[:-1] + edges[1:]))[:, None] + half[:, None] * x[None, :]).reshape(-1)
    ws = (half[:, None] * w[None, :]).reshape(-1)
    rho = 0.5 * (x + 1.0)
    wrho = 0.5 * w
    mu, nu = loop.plane
    center = np.mean(loop.nodes(64)[:-1], axis=0)
    points, weights = [], []
    for seg in loop.segments:
        edge = seg.path(s)
        vel = seg.velocity(s)
        offset = edge - center
        cross = offset[:, mu] * vel[:, nu] - offset[:, nu] * vel[:, mu]
        points.append(center + rho[:, None, None] * offset[None, :, :])
        weights.append(rho[:, None] * wrho[:, None] * (ws * cross)[None, :])
    nodes = np.concatenate(points, axis=1).reshape(-1, loop.chart.dim)
    return nodes, np.concatenate(weights, axis=1).reshape(-1)


def _flux_exponent(
    field: ConnectionField, loop: Loop, panels: int, order: int, tol: float
) -> np.ndarray:
    points, weights = _fan_quadrature(loop, panels, order)
    mu, nu = loop.plane
    a_mu = field.components(points, mu)
    a_nu = field.components(points, nu)
    defect = float(np.max(np.linalg.norm(a_mu @ a_nu - a_nu @ a_mu, axis=(-2, -1)), initial=0.0))
    if defect > tol:
        raise AbelianizationError(
            f"[A_{field.chart.names[mu]}, A_{field.chart.names[nu]}] reaches {defect:.3e}"
            " on the enclosed disk"
        )
    f = curvature_numeric(field, points, mu, nu)
    return np.sum(weights[:, None, None] * f, axis=0)


def holonomy_abelian_flux(
    field: ConnectionField,
    loop: Loop,
    panels: int = 8,
    order: int = 12,
    tol: float = 1e-9,
) -> HolonomyResult:
    """``exp(iint F_{mu nu} dmu dnu)`` over the disk bounded by a planar loop.

    The disk is swept by a radial fan from the loop centroid, so the region must be
    star-shaped with respect to it.

    Raises:
        ShapeError: If the loop is not planar.
        AbelianizationError: If the in-plane components fail to commute on the disk.
    """
    _check_chart(field, loop)
    if loop.plane is None:
        raise ShapeError("flux evaluation needs a planar loop")
    fine = expm(_flux_exponent(field, loop, panels, order, tol))
    coarse = expm(_flux_exponent(field, loop, max(1, panels // 2), order, tol))
    nodes = panels * order * order * len(loop.segments)
    return HolonomyResult(fine, nodes, structure_defects(fine).unitarity, frobenius(fine - coarse))


# Non-Abelian Stokes


def _stokes(field: ConnectionField, loop: Loop, n_sigma: int, n_tau: int, h: float) -> np.ndarray:
    rect = loop.rectangle
    (a, b), (s0, t0), (ls, lt) = rect.axes, rect.corner, rect.sides
    base = loop.basepoint.coords
    k = field.block_dim
    ds, dt = ls / n_sigma, lt / n_tau
    tau_mid = t0 + (np.arange(n_tau) + 0.5) * dt
    sig_mid = s0 + (np.arange(n_sigma) + 0.5) * ds

    def at(sig: ArrayLike, tau: ArrayLike) -> np.ndarray:
        sig, tau = np.broadcast_arrays(np.asarray(sig, float), np.asarray(tau, float))
        out = np.broadcast_to(base, sig.shape + base.shape).copy()
        out[..., a] = sig
        out[..., b] = tau
        return out

    # left edge: corner -> (s0, tau_k), midpoint exponentials, half step to the first cell
    left_times = np.concatenate([[t0 + 0.25 * dt], t0 + np.arange(1, n_tau) * dt])
    left_steps = np.concatenate([[0.5 * dt], np.full(n_tau - 1, dt)])
    left_factors = expm(field.components(at(s0, left_times), b) * left_steps[:, None, None])
    left = np.empty((n_tau, k, k), dtype=complex)
    acc = np.eye(k, dtype=complex)
    for i in range(n_tau):
        acc = left_factors[i] @ acc
        left[i] = acc

    # across each strip: (s0, tau_k) -> (sigma_j, tau_k)
    across_sigmas = np.concatenate([[s0 + 0.25 * ds], s0 + np.arange(1, n_sigma) * ds])
    across_steps = np.concatenate([[0.5 * ds], np.full(n_sigma - 1, ds)])
    grid = at(across_sigmas[None, :], tau_mid[:, None])
    across_factors = expm(field.components(grid, a) * across_steps[None, :, None, None])
    transport = np.empty((n_tau, n_sigma, k, k), dtype=complex)
    acc = left
    for j in range(n_sigma):
        acc = across_factors[:, j] @ acc
        transport[:, j] = acc

    cells = at(sig_mid[None, :], tau_mid[:, None])
    # field strength matching later-left ordering: d_s A_t - d_t A_s + [A_t, A_s]
    a_s, a_t = field.components(cells, a), field.components(cells, b)
    g = curvature_numeric(field, cells, a, b, h) - 2.0 * (a_s @ a_t - a_t @ a_s)
    conjugated = dagger(transport) @ g @ transport
    strips = np.sum(conjugated, axis=1) * ds * dt
    return ordered_product(expm(strips))


def stokes_rectangle(
    field: ConnectionField,
    loop: Loop,
    sigma_steps: int | None = None,
    tau_steps: int | None = None,
    h: float | None = None,
) -> HolonomyResult:
    """Rectangle holonomy as a tau-ordered exponential of transported field strength.

    Each strip contributes ``exp(dtau * sum_sigma dsigma V^-1 G V)`` where ``V`` transports
    from the corner up the left edge and across to the cell midpoint. Strips at larger tau
    multiply on the left. Matches :func:`holonomy_ordered` in the limit.

    Raises:
        ShapeError: If the loop is not an axis-aligned rectangle.
    """
    _check_chart(field, loop)
    rect = loop.rectangle
    if rect is None:
        raise ShapeError("stokes_rectangle needs a loop built by rectangle_loop")
    n_sigma = settings.stokes_steps if sigma_steps is None else sigma_steps
    n_tau = settings.stokes_steps if tau_steps is None else tau_steps
    h = settings.fd_step if h is None else h
    if n_sigma < 2 or n_tau < 2:
        raise ParameterError("stokes_rectangle needs at least 2 steps per side")
    eye = np.eye(field.block_dim, dtype=complex)
    if min(rect.sides) == 0.0:
        return HolonomyResult(eye, 0, 0.0, 0.0)
    fine = _stokes(field, loop, n_sigma, n_tau, h)
    coarse = _stokes(field, loop, n_sigma // 2, n_tau // 2, h)
    if rect.orientation < 0:
        fine, coarse = dagger(fine), dagger(coarse)
    return HolonomyResult.from_estimates(fine, coarse, n_sigma * n_tau)


# Weighted areas

# Green-theorem antiderivatives: ("v", Q) integrates oint Q(u) dv, ("u", P) integrates oint P(v) du.
_GREEN: dict[Weight, tuple[str, Callable[[np.ndarray], np.ndarray]]] = {
    Weight.SPHERE_POLAR: ("v", lambda u: np.sin(u) ** 2),
    Weight.SPHERE_COLATITUDE: ("v", lambda u: -np.sin(u)),
    Weight.HYPERBOLIC_DECAY: ("u", lambda v: -(1.0 - np.exp(-2.0 * v))),
    Weight.HYPERBOLIC_GROWTH: ("u", lambda v: -(np.exp(2.0 * v) - 1.0)),
    Weight.SINH_4R: ("v", lambda u: 0.25 * (np.cosh(4.0 * u) - 1.0)),
    Weight.TWO_SINH_2R: ("v", lambda u: np.cosh(2.0 * u) - 1.0),
    Weight.FLAT: ("v", lambda u: u),
}


def area_weighted(loop: Loop, weight: Weight | str) -> float:
    """Signed weighted area enclosed by a planar loop, counter-clockwise positive.

    Densities in the ``(u, v)`` plane coordinates: ``sin 2u`` (sphere_polar), ``-cos u``
    (sphere_colatitude), ``2 exp(-2v)``, ``2 exp(2v)``, ``sinh 4u``, ``2 sinh 2u`` and ``1``.

    Raises:
        ParameterError: If the weight is unknown.
        ShapeError: If the loop is not planar.
    """
    try:
        weight = Weight(weight)
    except ValueError as exc:
        raise ParameterError(f"unknown area weight {weight!r}") from exc
    if loop.plane is None:
        raise ShapeError("weighted areas need a planar loop")
    mu, nu = loop.plane
    along, antiderivative = _GREEN[weight]

    def form(points: np.ndarray) -> np.ndarray:
        out = np.zeros_like(points)
        if along == "v":
            out[..., nu] = antiderivative(points[..., mu])
        else:
            out[..., mu] = antiderivative(points[..., nu])
        return out

    return line_integral(loop, form)


# Adiabatic evolution and Abelian phases


def adiabatic_evolve(
    h0: ArrayLike,
    unitary: Callable[[np.ndarray], np.ndarray],
    loop: Loop,
    duration: float,
    steps: int,
) -> np.ndarray:
    """Kicked evolution ``prod_i U_i exp(-i H0 dt) U_i^dag`` around ``loop`` at constant speed.

    ``U_i`` is the control unitary at the midpoint of the ``i``-th time slice; later slices
    multiply on the left.
    """
    h0 = require_square(h0)
    if steps < 1:
        raise ParameterError(f"steps must be at least 1, got {steps}")
    if duration < 0:
        raise ParameterError(f"duration must be non-negative, got {duration}")
    t = (np.arange(steps) + 0.5) / steps
    u = unitary(loop(t))
    free = expm(-1j * h0 * (duration / steps))
    return ordered_product(u @ free @ dagger(u))


def adiabatic_block(
    h0: ArrayLike,
    unitary: Callable[[np.ndarray], np.ndarray],
    loop: Loop,
    duration: float,
    steps: int,
    indices: Sequence[int],
) -> np.ndarray:
    """Evolution restricted to the degenerate frame at the basepoint: ``Psi0^dag U Psi0``."""
    evolution = adiabatic_evolve(h0, unitary, loop, duration, steps)
    psi0 = unitary(loop.basepoint.coords)[:, list(indices)]
    return dagger(psi0) @ evolution @ psi0


def block_dynamical_phase(h0: ArrayLike, indices: Sequence[int], duration: float) -> complex:
    """``exp(-i e T)`` for a degenerate level ``e`` of a diagonal ``H0``.

    Raises:
        ParameterError: If the selected diagonal entries are not degenerate.
    """
    h0 = require_square(h0)
    levels = np.real(np.diag(h0))[list(indices)]
    if np.ptp(levels) > settings.structure_tol:
        raise ParameterError(f"levels {levels} at {list(indices)} are not degenerate")
    return complex(np.exp(-1j * levels[0] * duration))


def berry_phase(
    frame: FrameField, loop: Loop, steps: int | None = None, wrap: bool = True
) -> float:
    """Berry phase ``oint i <psi|d psi>`` of a one-dimensional fiber.

    Computed from discrete overlaps ``<psi_k|psi_k+1>`` along the loop partition, which is
    gauge invariant for a single-valued frame. ``wrap`` maps the result to ``(-pi, pi]``;
    otherwise the small per-step phases are summed.

    Raises:
        DimensionError: If the fiber is not one-dimensional.
    """
    if len(frame.degenerate_indices) != 1:
        raise DimensionError(
            f"Berry phase needs a 1-dimensional fiber, got {len(frame.degenerate_indices)}"
        )
    steps = settings.holonomy_steps if steps is None else steps
    psi = frame.block(loop.nodes(steps))[..., 0]
    overlaps = np.sum(np.conj(psi[:-1]) * psi[1:], axis=-1)
    if wrap:
        return float(-np.angle(np.prod(overlaps / np.abs(overlaps))))
    return float(-np.sum(np.angle(overlaps)))


def dynamical_phase(
    hamiltonian: Callable[[float], np.ndarray],
    state: Callable[[float], np.ndarray],
    duration: float,
    samples: int = 2001,
) -> float:
    """``-int_0^T <psi(t)|H(t)|psi(t)> dt`` by Simpson quadrature."""
    times = np.linspace(0.0, duration, samples)
    energies = []
    for t in times:
        psi = np.asarray(state(t), dtype=complex)
        energies.append(np.real(np.vdot(psi, np.asarray(hamiltonian(t)) @ psi)))
    if duration == 0:
        return 0.0
    return float(-simpson(np.asarray(energies), x=times))
