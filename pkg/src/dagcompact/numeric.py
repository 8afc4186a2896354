"""Dense tensor arithmetic shared by every category in the package.

All multi-indices are row-major: a tuple ``(i_1, ..., i_n)`` over extents
``(d_1, ..., d_n)`` is stored at flat position
``((i_1 * d_2 + i_2) * d_3 + ...) + i_n``.  Boolean arrays use OR as addition
and AND as multiplication; nothing here ever subtracts booleans.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class ScalarKind(enum.Enum):
    BOOLEAN = "boolean"
    REAL = "real-float"
    COMPLEX = "complex-float"

    @property
    def dtype(self) -> np.dtype:
        return {
            ScalarKind.BOOLEAN: np.dtype(bool),
            ScalarKind.REAL: np.dtype(np.float64),
            ScalarKind.COMPLEX: np.dtype(np.complex128),
        }[self]

    @property
    def exact(self) -> bool:
        return self is ScalarKind.BOOLEAN

    def conj(self, x: np.ndarray) -> np.ndarray:
        """The scalar involution, applied entrywise."""
        if self is ScalarKind.COMPLEX:
            return np.conj(x)
        return np.asarray(x)

    def one(self) -> np.ndarray:
        return np.ones((1, 1), dtype=self.dtype)


@dataclass(frozen=True)
class Tolerance:
    absolute: float = 1e-9
    relative: float = 1e-9

    def __post_init__(self):
        if self.absolute < 0 or self.relative < 0:
            raise ValueError("tolerances must be nonnegative")


DEFAULT_TOL = Tolerance()


class ShapeError(ValueError):
    pass


def _as_matrix(x) -> np.ndarray:
    x = np.asarray(x)
    if x.ndim != 2:
        raise ShapeError(f"expected a rank-2 array, got shape {x.shape}")
    return x


def kron(x, y) -> np.ndarray:
    """Kronecker product; entry ``((i, k), (j, l))`` is ``x[i, j] * y[k, l]``.

    Works for boolean arrays too, where ``*`` is AND.
    """
    x, y = _as_matrix(x), _as_matrix(y)
    (rx, cx), (ry, cy) = x.shape, y.shape
    out = x[:, None, :, None] * y[None, :, None, :]
    return out.reshape(rx * ry, cx * cy)


def matmul(a, b) -> np.ndarray:
    """Matrix product, with boolean arrays composed relationally."""
    a, b = np.asarray(a), np.asarray(b)
    if a.dtype == bool and b.dtype == bool:
        return (a.astype(np.int64) @ b.astype(np.int64)) > 0
    return a @ b


def _check_perm(perm: Sequence[int], n: int) -> None:
    if sorted(perm) != list(range(n)):
        raise ValueError(f"{list(perm)} is not a permutation of 0..{n - 1}")


def permutation_indices(perm: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """Gather indices for :func:`wire_permutation`.

    Factor ``i`` of the input lands in slot ``perm[i]`` of the output, so
    ``out[p] = v[idx[p]]``.
    """
    perm, dims = list(perm), list(dims)
    _check_perm(perm, len(dims))
    if any(d < 1 for d in dims):
        raise ValueError("dimensions must be positive")
    inverse = np.argsort(perm)
    total = int(np.prod(dims, dtype=np.int64))
    if not dims:
        return np.zeros(1, dtype=np.int64)
    return np.arange(total).reshape(dims).transpose(inverse).ravel()


def wire_permutation(perm: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """0/1 matrix sending ``v_0 (x) ... (x) v_{n-1}`` to the factors reordered by ``perm``.

    >>> wire_permutation([1, 0], [2, 2]) @ np.array([0, 1, 0, 0])
    array([0, 0, 1, 0])
    """
    idx = permutation_indices(perm, dims)
    p = np.zeros((idx.size, idx.size), dtype=np.int64)
    p[np.arange(idx.size), idx] = 1
    return p


def partial_contract(v, dims: Sequence[int], keep: Sequence[int], dual_row) -> np.ndarray:
    """Contract the factors not listed in ``keep`` against ``dual_row``.

    ``v`` is a flat vector over ``dims``; ``dual_row`` is flat over the
    discarded factors in their original order.  The result is flat over the
    kept factors, also in original order.
    """
    v = np.asarray(v).ravel()
    dims = list(dims)
    keep = sorted(keep)
    if v.size != int(np.prod(dims, dtype=np.int64)):
        raise ShapeError("vector length does not match factor extents")
    drop = [i for i in range(len(dims)) if i not in keep]
    drop_size = int(np.prod([dims[i] for i in drop], dtype=np.int64))
    row = np.asarray(dual_row).ravel()
    if row.size != drop_size:
        raise ShapeError(f"dual row has length {row.size}, expected {drop_size}")
    if not drop:
        return v & row[0] if row.dtype == bool else v * row[0]
    t = v.reshape(dims).transpose(keep + drop).reshape(-1, drop_size)
    return matmul(t, row)


def frobenius(x) -> float:
    x = np.asarray(x)
    if x.dtype == bool:
        return float(np.count_nonzero(x))
    return float(np.linalg.norm(x.ravel()))


def residual(a, b) -> float:
    """Frobenius distance, or the count of differing entries for booleans."""
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch {a.shape} vs {b.shape}")
    if a.dtype == bool or b.dtype == bool:
        return float(np.count_nonzero(a != b))
    return float(np.linalg.norm((a - b).ravel()))


def approx_eq(a, b, tol: Tolerance = DEFAULT_TOL) -> bool:
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch {a.shape} vs {b.shape}")
    if a.dtype == bool or b.dtype == bool:
        return bool(np.array_equal(a, b))
    bound = tol.absolute + tol.relative * max(frobenius(a), frobenius(b))
    return residual(a, b) <= bound


class NotPSDError(ValueError):
    pass


def _phase_normalize(vecs: np.ndarray, threshold: float) -> np.ndarray:
    out = vecs.copy()
    for c in range(out.shape[1]):
        col = out[:, c]
        nz = np.flatnonzero(np.abs(col) > threshold)
        if nz.size:
            lead = col[nz[0]]
            out[:, c] = col * (np.conj(lead) / abs(lead))
    return out


def eig_psd(m, tol: Tolerance = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a positive semidefinite matrix.

    Eigenvalues come back in descending order with anything below
    ``tol.absolute`` reported as exactly zero.  Each eigenvector is rotated so
    its first nonzero entry is positive real, which makes purifications and
    kernel inclusions reproducible.
    """
    m = _as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ShapeError("eig_psd needs a square matrix")
    scale = max(1.0, frobenius(m))
    if residual(m, np.conj(m.T)) > tol.absolute + tol.relative * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    h = (m + np.conj(m.T)) / 2
    vals, vecs = np.linalg.eigh(h)
    vals, vecs = vals[::-1].copy(), vecs[:, ::-1]
    if vals.size and vals[-1] < -(tol.absolute + tol.relative * scale):
        raise NotPSDError(f"negative eigenvalue {vals[-1]:.3e}")
    vals[np.abs(vals) <= tol.absolute] = 0.0
    vals[vals < 0] = 0.0
    if not np.iscomplexobj(m):
        vecs = vecs.real
    return vals, _phase_normalize(vecs, tol.absolute)


def numerical_rank(m, tol: Tolerance = DEFAULT_TOL) -> int:
    vals, _ = eig_psd(m, tol)
    return int(np.count_nonzero(vals))


def orthonormalize(g: np.ndarray) -> np.ndarray:
    """Orthonormal columns spanning the columns of a full-rank ``g`` (QR with sign fix)."""
    q, r = np.linalg.qr(g)
    d = np.diagonal(r)
    phases = np.where(np.abs(d) > 0, d / np.where(np.abs(d) > 0, np.abs(d), 1), 1)
    return q * phases[None, :]
