"""Dense complex linear algebra shared by every other module.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Most helpers accept a stack of
matrices with shape ``(..., n, n)`` so that connection components, per-step exponentials and
frames can be processed in batches.
"""

from typing import NamedTuple

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike

from holonomy_lab.config import settings
from holonomy_lab.errors import DimensionError

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


class StructureDefects(NamedTuple):
    """Frobenius distances from the unitary and anti-hermitian manifolds."""

    unitarity: float
    antihermiticity: float


def as_matrix(a: ArrayLike) -> np.ndarray:
    """Coerce ``a`` to a complex array with at least two dimensions."""
    arr = np.asarray(a, dtype=complex)
    if arr.ndim < 2:
        raise DimensionError(f"expected a matrix, got array of shape {arr.shape}")
    return arr


def require_square(a: ArrayLike) -> np.ndarray:
    """Return ``a`` as a complex (stack of) square matrices or raise ``DimensionError``."""
    arr = as_matrix(a)
    if arr.shape[-1] != arr.shape[-2]:
        raise DimensionError(f"expected square matrices, got shape {arr.shape}")
    return arr


def dagger(a: ArrayLike) -> np.ndarray:
    """Conjugate transpose over the last two axes."""
    return np.conj(np.swapaxes(as_matrix(a), -1, -2))


def expm(a: ArrayLike) -> np.ndarray:
    """Matrix exponential of a square matrix or a stack of them.

    Delegates to :func:`scipy.linalg.expm`, which implements scaling and squaring with a
    degree-13 Padé approximant (Al-Mohy and Higham). Stacks of shape ``(..., n, n)`` are
    exponentiated elementwise.

    Raises:
        DimensionError: If the trailing two axes are not square.
    """
    return scipy.linalg.expm(require_square(a))


def commutator(a: ArrayLike, b: ArrayLike) -> np.ndarray:
    """Return ``AB - BA``."""
    a = require_square(a)
    b = require_square(b)
    if a.shape[-2:] != b.shape[-2:]:
        raise DimensionError(f"commutator of {a.shape[-2:]} and {b.shape[-2:]} matrices")
    return a @ b - b @ a


def frobenius(a: ArrayLike) -> float:
    """Frobenius norm of a single matrix."""
    return float(np.linalg.norm(np.asarray(a, dtype=complex)))


def structure_defects(m: ArrayLike) -> StructureDefects:
    """Return ``(||M^dag M - I||_F, ||M + M^dag||_F)``."""
    m = require_square(m)
    if m.ndim != 2:
        raise DimensionError(f"structure_defects expects one matrix, got shape {m.shape}")
    eye = np.eye(m.shape[0])
    md = dagger(m)
    return StructureDefects(frobenius(md @ m - eye), frobenius(m + md))


def is_unitary(m: ArrayLike, tol: float | None = None) -> bool:
    tol = settings.structure_tol if tol is None else tol
    return structure_defects(m).unitarity <= tol


def is_antihermitian(m: ArrayLike, tol: float | None = None) -> bool:
    tol = settings.structure_tol if tol is None else tol
    return structure_defects(m).antihermiticity <= tol


def antihermitian_part(a: ArrayLike) -> np.ndarray:
    """Project onto u(n) by ``(A - A^dag) / 2``."""
    a = require_square(a)
    return 0.5 * (a - dagger(a))


def ordered_product(factors: ArrayLike) -> np.ndarray:
    """Multiply a time-ordered stack ``F_0, F_1, ..., F_{K-1}`` into ``F_{K-1} ... F_1 F_0``.

    Later factors multiply on the left. The product is formed by a pairwise tree reduction,
    which keeps that order while doing only ``log2(K)`` batched ``matmul`` calls.
    """
    stack = require_square(factors)
    if stack.ndim != 3:
        raise DimensionError(f"expected a (K, n, n) stack, got shape {stack.shape}")
    if stack.shape[0] == 0:
        return np.eye(stack.shape[-1], dtype=complex)
    while stack.shape[0] > 1:
        if stack.shape[0] % 2:
            head = stack[:-1]
            tail = stack[-1:]
        else:
            head, tail = stack, None
        paired = head[1::2] @ head[0::2]
        stack = paired if tail is None else np.concatenate([paired, tail])
    return stack[0]


def pauli(k: int) -> np.ndarray:
    """Pauli matrix ``sigma_k`` for ``k`` in 1..3."""
    try:
        return (PAULI_X, PAULI_Y, PAULI_Z)[k - 1].copy()
    except IndexError as exc:
        raise DimensionError(f"no Pauli matrix with index {k}") from exc


def sigma_hat(k: int, i: int, j: int, dim: int) -> np.ndarray:
    """Embed ``sigma_k`` into rows/columns ``(i, j)`` of a ``dim``-dimensional zero matrix."""
    if not (0 <= i < dim and 0 <= j < dim) or i == j:
        raise DimensionError(f"invalid embedding indices ({i}, {j}) for dimension {dim}")
    out = np.zeros((dim, dim), dtype=complex)
    s = pauli(k)
    idx = [i, j]
    out[np.ix_(idx, idx)] = s
    return out


def unit_vector(dim: int, index: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(dim: int, index: int) -> np.ndarray:
    """Return ``|index><index|``."""
    out = np.zeros((dim, dim), dtype=complex)
    out[index, index] = 1.0
    return out
