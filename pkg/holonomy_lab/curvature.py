"""Field strength of a connection and the irreducibility tests built on it."""

import logging
from collections.abc import Sequence

import numpy as np
from numpy.typing import ArrayLike

from holonomy_lab.config import settings
from holonomy_lab.errors import DimensionError, ParameterError
from holonomy_lab.linalg import commutator, require_square
from holonomy_lab.manifold import ConnectionField, ControlPoint, _points_of

logger = logging.getLogger(__name__)


def directional_derivative(
    field: ConnectionField, points: np.ndarray, along: int, component: int, h: float
) -> np.ndarray:
    """Central difference ``d_along A_component``."""
    step = np.zeros(field.chart.dim)
    step[along] = h
    forward = field.components(points + step, component)
    backward = field.components(points - step, component)
    return (forward - backward) / (2.0 * h)


def curvature_numeric(
    field: ConnectionField,
    p: ControlPoint | ArrayLike,
    mu: str | int,
    nu: str | int,
    h: float | None = None,
) -> np.ndarray:
    """``F_{mu nu} = d_mu A_nu - d_nu A_mu + [A_mu, A_nu]`` by central differences.

    Accepts a batch of points. ``mu == nu`` yields the zero matrix and logs a warning.

    Raises:
        ParameterError: If ``h <= 0`` or an index is out of range.
    """
    h = settings.fd_step if h is None else h
    if h <= 0:
        raise ParameterError(f"finite-difference step must be positive, got {h}")
    m, n = field.chart.index(mu), field.chart.index(nu)
    points = _points_of(field.chart, p)
    shape = points.shape[:-1] + (field.block_dim, field.block_dim)
    if m == n:
        logger.warning("F_{%d%d} requested; returning zero by antisymmetry", m, n)
        return np.zeros(shape, dtype=complex)
    a_mu = field.components(points, m)
    a_nu = field.components(points, n)
    return (
        directional_derivative(field, points, m, n, h)
        - directional_derivative(field, points, n, m, h)
        + commutator(a_mu, a_nu)
    )


def curvature_blocks(
    field: ConnectionField, p: ControlPoint | ArrayLike, h: float | None = None
) -> dict[tuple[int, int], np.ndarray]:
    """All components ``F_{mu nu}`` with ``mu < nu`` at a point."""
    dim = field.chart.dim
    return {
        (m, n): curvature_numeric(field, p, m, n, h) for m in range(dim) for n in range(m + 1, dim)
    }


def cpn_curvature_origin(n: int, alpha: int, i: int, beta: int, j: int) -> np.ndarray:
    """Closed form of ``F_{z^i_alpha z^j_beta}`` at the CP^n origin.

    ``alpha`` and ``beta`` are 1-based; ``i`` and ``j`` select the real (0) or imaginary (1)
    part of ``z``. The value is ``i^(i+j) [(-1)^j |alpha><beta| - (-1)^i |beta><alpha|]``.

    Raises:
        ParameterError: If an index is out of range.
    """
    if not (1 <= alpha <= n and 1 <= beta <= n):
        raise ParameterError(f"alpha={alpha}, beta={beta} must lie in 1..{n}")
    if i not in (0, 1) or j not in (0, 1):
        raise ParameterError(f"i={i}, j={j} must be 0 or 1")
    out = np.zeros((n, n), dtype=complex)
    out[alpha - 1, beta - 1] += (-1) ** j
    out[beta - 1, alpha - 1] -= (-1) ** i
    return (1j ** (i + j)) * out


def _vectorize(blocks: Sequence[ArrayLike]) -> tuple[np.ndarray, int]:
    mats = [require_square(b) for b in blocks]
    dims = {m.shape for m in mats}
    if len(dims) > 1 or any(m.ndim != 2 for m in mats):
        raise DimensionError(f"blocks must share one square shape, got {sorted(dims)}")
    n = mats[0].shape[0]
    flat = np.stack([m.reshape(-1) for m in mats])
    return np.concatenate([flat.real, flat.imag], axis=1), n


def _real_basis(vectors: np.ndarray, rtol: float) -> np.ndarray:
    if vectors.size == 0:
        return vectors
    _, s, vh = np.linalg.svd(vectors, full_matrices=False)
    if s[0] == 0.0:
        return vh[:0]
    return vh[s > rtol * s[0]]


def span_dimension(blocks: Sequence[ArrayLike], rtol: float | None = None) -> int:
    """Real dimension of the linear span of the given matrices inside u(n).

    Real and imaginary parts are vectorized separately so the span is taken over the reals.
    """
    if not blocks:
        return 0
    rtol = settings.rank_rtol if rtol is None else rtol
    vectors, _ = _vectorize(blocks)
    return int(_real_basis(vectors, rtol).shape[0])


def lie_closure_dimension(
    blocks: Sequence[ArrayLike], rtol: float | None = None, rounds: int | None = None
) -> int:
    """Dimension of the smallest real Lie algebra containing the blocks.

    Commutators of the current basis are added until the dimension stabilizes, reaches
    ``n^2`` or ``rounds`` iterations have run.
    """
    if not blocks:
        return 0
    rtol = settings.rank_rtol if rtol is None else rtol
    rounds = settings.closure_rounds if rounds is None else rounds
    vectors, n = _vectorize(blocks)
    basis = _real_basis(vectors, rtol)
    for round_ in range(rounds):
        if basis.shape[0] >= n * n:
            break
        mats = basis[:, : n * n] + 1j * basis[:, n * n :]
        mats = mats.reshape(-1, n, n)
        brackets = [
            commutator(mats[a], mats[b])
            for a in range(len(mats))
            for b in range(a + 1, len(mats))
        ]
        if not brackets:
            break
        extra, _ = _vectorize(brackets)
        grown = _real_basis(np.concatenate([basis, extra]), rtol)
        logger.debug("closure round %d: dimension %d -> %d", round_, basis.shape[0], grown.shape[0])
        if grown.shape[0] == basis.shape[0]:
            break
        basis = grown
    return int(basis.shape[0])
