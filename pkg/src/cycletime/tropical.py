"""Max-plus arithmetic on scalars, vectors and matrices.

Values live in R ∪ {-inf}.  Bottom (-inf) is encoded as the IEEE float
``-inf``; NaN and ``+inf`` are rejected by every constructor in this module,
so the ``+`` and ``max`` of numpy never see an undefined combination.

Matrices and vectors are plain read-only ``float64`` numpy arrays.  Use
:func:`as_matrix` / :func:`as_vector` to validate foreign input.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from numbers import Real
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .errors import CapExceededError, ModelError

BOTTOM = -math.inf

#: JSON spelling of Bottom in matrix literals.
BOTTOM_LITERAL = "-inf"

PATH_ORACLE_MAX_DIM = 6
PATH_ORACLE_MAX_LENGTH = 8


def as_value(x) -> float:
    """Validate a scalar; accepts numbers and the literal ``"-inf"``."""
    if isinstance(x, str):
        if x.strip() == BOTTOM_LITERAL:
            return BOTTOM
        raise ModelError(f"unrecognised tropical literal {x!r}")
    if isinstance(x, bool) or not isinstance(x, (Real, np.floating, np.integer)):
        raise ModelError(f"not a number: {x!r}")
    v = float(x)
    if math.isnan(v) or v == math.inf:
        raise ModelError(f"illegal tropical value {v!r}")
    return v


def is_bottom(x: float) -> bool:
    return x == BOTTOM


def trop_add(a: float, b: float) -> float:
    """a ⊕ b = max(a, b)."""
    return max(as_value(a), as_value(b))


def trop_mul(a: float, b: float) -> float:
    """a ⊗ b = a + b, with Bottom absorbing."""
    a, b = as_value(a), as_value(b)
    if a == BOTTOM or b == BOTTOM:
        return BOTTOM
    return a + b


def _check_array(arr: np.ndarray, what: str) -> np.ndarray:
    if np.isnan(arr).any():
        raise ModelError(f"{what} contains NaN")
    if np.isposinf(arr).any():
        raise ModelError(f"{what} contains +inf")
    if arr.flags.writeable:
        arr.setflags(write=False)
    return arr


def _parse_entries(obj) -> np.ndarray:
    if isinstance(obj, np.ndarray):
        return np.array(obj, dtype=np.float64)
    try:
        return np.array(
            [[as_value(v) for v in row] for row in obj], dtype=np.float64
        )
    except (TypeError, ValueError) as exc:
        raise ModelError(f"matrix literal must be a list of equal-length rows: {exc}") from None


def as_matrix(obj, *, square: bool = False) -> np.ndarray:
    """Validate and freeze a matrix given as an array or a list of rows."""
    if isinstance(obj, np.ndarray) and obj.dtype == np.float64 and not obj.flags.writeable:
        arr = obj
    else:
        arr = _parse_entries(obj)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ModelError(f"matrix must be a non-empty 2-d array, got shape {arr.shape}")
    if square and arr.shape[0] != arr.shape[1]:
        raise ModelError(f"matrix must be square, got shape {arr.shape}")
    return _check_array(arr, "matrix")


def as_vector(obj) -> np.ndarray:
    if isinstance(obj, np.ndarray):
        arr = np.array(obj, dtype=np.float64)
    else:
        arr = np.array([as_value(v) for v in obj], dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] < 1:
        raise ModelError(f"vector must be a non-empty 1-d array, got shape {arr.shape}")
    return _check_array(arr, "vector")


def identity(d: int) -> np.ndarray:
    """The tropical identity: 0 on the diagonal, Bottom elsewhere."""
    e = np.full((d, d), BOTTOM)
    np.fill_diagonal(e, 0.0)
    e.setflags(write=False)
    return e


def zeros(d: int) -> np.ndarray:
    """The vector of tropical units (all 0)."""
    z = np.zeros(d)
    z.setflags(write=False)
    return z


def mat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(A ⊗ B)_ij = max_k (A_ik + B_kj)."""
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ModelError(f"dimension mismatch: {a.shape} ⊗ {b.shape}")
    out = np.max(a[:, :, None] + b[None, :, :], axis=1)
    out.setflags(write=False)
    return out


def mat_vec(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    """(A ⊗ x)_i = max_j (A_ij + x_j)."""
    a, x = as_matrix(a), as_vector(x)
    if a.shape[1] != x.shape[0]:
        raise ModelError(f"dimension mismatch: {a.shape} ⊗ ({x.shape[0]},)")
    out = np.max(a + x[None, :], axis=1)
    out.setflags(write=False)
    return out


def scalar_mul(lam: float, a: np.ndarray) -> np.ndarray:
    """λ ⊗ A, entrywise."""
    lam = as_value(lam)
    a = np.asarray(a, dtype=np.float64)
    out = np.full(a.shape, BOTTOM) if lam == BOTTOM else a + lam
    out.setflags(write=False)
    return out


def finite_rows(a: np.ndarray) -> np.ndarray:
    """Boolean mask: which rows carry at least one finite entry."""
    return np.isfinite(as_matrix(a)).any(axis=1)


def has_finite_entry_each_row(a: np.ndarray) -> bool:
    return bool(finite_rows(a).all())


def pattern(a: np.ndarray) -> np.ndarray:
    """Support skeleton: 0 where ``a`` is finite, Bottom elsewhere."""
    out = np.where(np.isfinite(as_matrix(a)), 0.0, BOTTOM)
    out.setflags(write=False)
    return out


def submatrix(a: np.ndarray, nodes: Sequence[int]) -> np.ndarray:
    idx = np.asarray(list(nodes), dtype=np.intp)
    out = np.asarray(a)[np.ix_(idx, idx)].copy()
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class NormalizedProduct:
    """A matrix product kept as ``shift ⊗ matrix`` to avoid overflow.

    ``matrix`` has maximal finite entry 0 unless it is entirely Bottom.
    """

    matrix: np.ndarray
    shift: float

    def reconstruct(self) -> np.ndarray:
        return scalar_mul(self.shift, self.matrix)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


def product_range(matrices: Sequence[np.ndarray]) -> NormalizedProduct:
    """Left-to-right product A(0) ⊗ A(1) ⊗ ... with per-step renormalization."""
    mats = [as_matrix(m, square=True) for m in matrices]
    if not mats:
        raise ModelError("product of an empty sequence is undefined")
    d = mats[0].shape[0]
    if any(m.shape[0] != d for m in mats):
        raise ModelError("all factors must share one dimension")
    stack = np.ascontiguousarray(np.stack(mats))
    seq = np.arange(len(mats), dtype=np.int64)
    mat, shift, _ = kernels.fold_products(stack, seq, False)
    mat.setflags(write=False)
    return NormalizedProduct(mat, shift)


def path_weight_oracle(matrices: Sequence[np.ndarray], i: int, j: int) -> float:
    """Maximum weight over all paths i = i_0, i_1, ..., i_n = j.

    The l-th arc (i_l, i_{l+1}) is weighted by ``matrices[l]``.  Exponential
    enumeration, so only small instances are accepted.
    """
    mats = [as_matrix(m, square=True) for m in matrices]
    if not mats:
        raise ModelError("need at least one matrix")
    d = mats[0].shape[0]
    if d > PATH_ORACLE_MAX_DIM or len(mats) > PATH_ORACLE_MAX_LENGTH:
        raise CapExceededError(
            f"path oracle limited to d <= {PATH_ORACLE_MAX_DIM} and length "
            f"<= {PATH_ORACLE_MAX_LENGTH}, got d={d}, length={len(mats)}"
        )
    if not (0 <= i < d and 0 <= j < d):
        raise ModelError(f"node out of range: ({i}, {j}) for d={d}")
    best = BOTTOM
    for middle in itertools.product(range(d), repeat=len(mats) - 1):
        nodes = (i, *middle, j)
        w = 0.0
        for step, m in enumerate(mats):
            w = trop_mul(w, m[nodes[step], nodes[step + 1]])
            if w == BOTTOM:
                break
        best = max(best, w)
    return best


def matrix_to_json(a: np.ndarray) -> list[list]:
    return [[BOTTOM_LITERAL if v == BOTTOM else _plain(v) for v in row] for row in np.asarray(a)]


def vector_to_json(x: Iterable[float]) -> list:
    return [BOTTOM_LITERAL if v == BOTTOM else _plain(v) for v in x]


def value_to_json(v: float):
    return BOTTOM_LITERAL if v == BOTTOM else _plain(v)


def _plain(v: float):
    v = float(v)
    return int(v) if v.is_integer() and abs(v) < 2**53 else v
