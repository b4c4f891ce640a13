"""Dense complex linear algebra over labeled tensor-product spaces.

Conventions used throughout the package:

* Tensor factors are big-endian: the first factor in a space list is the most
  significant index, so the matrix of ``A (x) B`` is ``np.kron(A, B)``.
* ``vec`` flattens row-major, i.e. ``vec(|i><j|) = e_i (x) e_j``; a map
  ``X -> Y`` is vectorized into ``Y (x) X``.  With this choice
  ``(A (x) B) vec(M) = vec(A M B^T)``.
* Operators never permute factors silently; reordering is always explicit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    ContractViolationError,
    InsufficientEnvironmentError,
    LabelNotFoundError,
    NoIsometryError,
)

# Hermiticity is checked relative to the largest matrix entry; PSD checks use
# an absolute eigenvalue floor.  Double-precision eigensolvers on dims <= 256
# keep residuals far below either.
HERM_TOL = 1e-10
PSD_TOL = 1e-8


@dataclass(frozen=True)
class Space:
    """A labeled complex Euclidean factor; dim 1 encodes an empty message."""

    label: str
    dim: int

    def __post_init__(self):
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 1:
            raise ContractViolationError(f"space {self.label!r}: dim must be >= 1, got {self.dim}")


@dataclass(frozen=True)
class SpaceList:
    """An ordered list of factors with unique labels."""

    factors: tuple[Space, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        labels = [s.label for s in self.factors]
        if len(set(labels)) != len(labels):
            raise ContractViolationError(f"duplicate factor labels in {labels}")

    @staticmethod
    def of(*spaces: Space) -> "SpaceList":
        return SpaceList(tuple(spaces))

    @property
    def dim(self) -> int:
        d = 1
        for s in self.factors:
            d *= s.dim
        return d

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(s.dim for s in self.factors)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(s.label for s in self.factors)

    def __len__(self):
        return len(self.factors)

    def __iter__(self):
        return iter(self.factors)

    def index_of(self, label: str) -> int:
        for i, s in enumerate(self.factors):
            if s.label == label:
                return i
        raise LabelNotFoundError(f"label {label!r} not in {self.labels}")

    def concat(self, other: "SpaceList") -> "SpaceList":
        return SpaceList(self.factors + other.factors)

    def drop(self, labels: Iterable[str]) -> "SpaceList":
        labels = set(labels)
        missing = labels - set(self.labels)
        if missing:
            raise LabelNotFoundError(f"labels {sorted(missing)} not in {self.labels}")
        return SpaceList(tuple(s for s in self.factors if s.label not in labels))

    def insert(self, space: Space, position: int) -> "SpaceList":
        if not 0 <= position <= len(self.factors):
            raise ContractViolationError(
                f"insert position {position} out of bounds for {len(self.factors)} factors"
            )
        fs = list(self.factors)
        fs.insert(position, space)
        return SpaceList(tuple(fs))

    def permuted(self, order: Sequence[str]) -> "SpaceList":
        if sorted(order) != sorted(self.labels):
            raise LabelNotFoundError(f"order {order} is not a permutation of {self.labels}")
        return SpaceList(tuple(self.factors[self.index_of(lab)] for lab in order))


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with the first factor most significant."""
    return np.kron(np.asarray(a), np.asarray(b))


def vec(a: np.ndarray) -> np.ndarray:
    """Row-major flattening of a matrix into a column vector.

    For ``a: X -> Y`` the result lives in ``Y (x) X``.
    """
    a = np.asarray(a)
    return a.reshape(-1, 1)


def unvec(v: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vec` for the given target shape."""
    v = np.asarray(v)
    if v.size != rows * cols:
        raise ContractViolationError(f"cannot unvec {v.size} entries into {rows}x{cols}")
    return v.reshape(rows, cols)


def _as_perm_indices(dims_len: int, perm: Sequence[int]) -> tuple[int, ...]:
    perm = tuple(perm)
    if sorted(perm) != list(range(dims_len)):
        raise ContractViolationError(f"{perm} is not a permutation of 0..{dims_len - 1}")
    return perm


def permute_vector(v: np.ndarray, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder the tensor factors of a vector; new factor i is old factor perm[i]."""
    perm = _as_perm_indices(len(dims), perm)
    shape = v.shape
    t = np.asarray(v).reshape(tuple(dims))
    return t.transpose(perm).reshape(shape)


def permute_operator(m: np.ndarray, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder the tensor factors of a square operator on ``(x)_i C^{dims[i]}``."""
    perm = _as_perm_indices(len(dims), perm)
    n = len(dims)
    d = int(np.prod(dims))
    m = np.asarray(m)
    if m.shape != (d, d):
        raise ContractViolationError(f"operator shape {m.shape} does not match dims {tuple(dims)}")
    t = m.reshape(tuple(dims) * 2)
    t = t.transpose(tuple(perm) + tuple(n + p for p in perm))
    return t.reshape(d, d)


def permutation_matrix(dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Matrix P with P (u_0 (x) ... ) = u_{perm[0]} (x) u_{perm[1]} (x) ...."""
    perm = _as_perm_indices(len(dims), perm)
    d = int(np.prod(dims))
    p = np.zeros((d, d))
    new_dims = [dims[i] for i in perm]
    for idx in np.ndindex(*dims):
        r = np.ravel_multi_index([idx[i] for i in perm], new_dims) if dims else 0
        c = np.ravel_multi_index(idx, dims) if dims else 0
        p[r, c] = 1.0
    return p


def hermitize(m: np.ndarray) -> np.ndarray:
    return (m + m.conj().T) / 2.0


@dataclass(frozen=True)
class HermOp:
    """A Hermitian operator tagged with the ordered factors it acts on.

    The constructor rejects matrices farther than HERM_TOL (relative to the
    largest entry) from their adjoint, then stores the exactly hermitized
    matrix.  Instances are immutable; operations return new values.
    """

    space: SpaceList
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        d = self.space.dim
        if m.shape != (d, d):
            raise ContractViolationError(
                f"matrix shape {m.shape} does not match space dim {d} ({self.space.labels})"
            )
        scale = max(1e-300, float(np.max(np.abs(m))) if m.size else 0.0)
        gap = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
        if gap > HERM_TOL * scale:
            raise ContractViolationError(
                f"matrix is not Hermitian: max |M - M*| = {gap:.3e} (scale {scale:.3e})"
            )
        object.__setattr__(self, "matrix", hermitize(m))

    @property
    def dim(self) -> int:
        return self.space.dim

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def permuted(self, order: Sequence[str]) -> "HermOp":
        new_space = self.space.permuted(order)
        perm = [self.space.index_of(lab) for lab in order]
        return HermOp(new_space, permute_operator(self.matrix, self.space.dims, perm))

    def relabeled(self, space: SpaceList) -> "HermOp":
        """Reinterpret the same matrix on another space list of identical dims."""
        if space.dims != self.space.dims:
            raise ContractViolationError(
                f"cannot relabel {self.space.dims} as {space.dims}"
            )
        return HermOp(space, self.matrix)

    def max_abs_diff(self, other: "HermOp") -> float:
        if other.space.dims != self.space.dims:
            raise ContractViolationError("operators live on different dimension lists")
        return float(np.max(np.abs(self.matrix - other.matrix)))


def scalar_op(value: float = 1.0) -> HermOp:
    """The 1x1 operator on the empty factor list (the scalar base case)."""
    return HermOp(SpaceList(()), np.array([[value]], dtype=complex))


def identity_op(space: SpaceList) -> HermOp:
    return HermOp(space, np.eye(space.dim, dtype=complex))


def partial_trace(op: HermOp, traced_labels: Iterable[str]) -> HermOp:
    """Trace out the named factors, leaving the rest in their original order."""
    traced = set(traced_labels)
    missing = traced - set(op.space.labels)
    if missing:
        raise LabelNotFoundError(f"labels {sorted(missing)} not in {op.space.labels}")
    if not traced:
        return op
    n = len(op.space)
    dims = op.space.dims
    t = op.matrix.reshape(dims * 2)
    # einsum with repeated axis ids on the traced bra/ket pairs
    row_ids = list(range(n))
    col_ids = [n + i for i in range(n)]
    out_ids = []
    for i, s in enumerate(op.space):
        if s.label in traced:
            col_ids[i] = row_ids[i]
        else:
            out_ids.append(row_ids[i])
    out_ids += [c for i, c in enumerate(col_ids) if op.space.factors[i].label not in traced]
    reduced = np.einsum(t, row_ids + col_ids, out_ids)
    new_space = op.space.drop(traced)
    d = new_space.dim
    return HermOp(new_space, hermitize(reduced.reshape(d, d)))


def tensor_with_identity(op: HermOp, new_factor: Space, position: int) -> HermOp:
    """Insert an identity factor at the given position of the factor list."""
    new_space = op.space.insert(new_factor, position)
    grown = np.kron(op.matrix, np.eye(new_factor.dim, dtype=complex))
    # kron puts the new factor last; move it into place
    n = len(op.space)
    perm = list(range(n))
    perm.insert(position, n)
    dims = op.space.dims + (new_factor.dim,)
    return HermOp(new_space, permute_operator(grown, dims, perm))


def min_eigenvalue(op: HermOp) -> float:
    if op.dim == 0:
        return 0.0
    return float(np.linalg.eigvalsh(op.matrix)[0])


def is_psd(op: HermOp, tol: float = PSD_TOL) -> bool:
    """True iff the smallest eigenvalue is >= -tol."""
    return min_eigenvalue(op) >= -tol


def psd_part_sqrt(m: np.ndarray) -> np.ndarray:
    """Square root of the positive part of a Hermitian matrix."""
    w, v = np.linalg.eigh(hermitize(np.asarray(m, dtype=complex)))
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def numerical_rank(m: np.ndarray, rank_tol: float = 1e-9) -> int:
    """Count of eigenvalues above rank_tol times the largest one."""
    w = np.linalg.eigvalsh(hermitize(np.asarray(m, dtype=complex)))
    top = float(w[-1]) if w.size else 0.0
    if top <= 0.0:
        return 0
    return int(np.sum(w > rank_tol * top))


def purify(op: HermOp, env_dim: int) -> np.ndarray:
    """A factor B (dim x env_dim) with B B* = op, i.e. tracing the trailing
    environment factor of vec(B) vec(B)* reproduces op.

    Columns are eigenvectors scaled by sqrt(eigenvalue); surplus environment
    columns are zero.
    """
    if not is_psd(op):
        raise ContractViolationError("cannot purify: operator is not PSD")
    w, v = np.linalg.eigh(op.matrix)
    w = np.clip(w, 0.0, None)
    rank = numerical_rank(op.matrix)
    if env_dim < rank:
        raise InsufficientEnvironmentError(
            f"environment dim {env_dim} < operator rank {rank}"
        )
    cols = v[:, ::-1] * np.sqrt(w[::-1])  # descending eigenvalues
    b = np.zeros((op.dim, env_dim), dtype=complex)
    b[:, :rank] = cols[:, :rank]
    return b


def haar_isometry(in_dim: int, out_dim: int, seed: int) -> np.ndarray:
    """Haar-random isometry via QR of a complex Gaussian with phase-fixed R.

    Deterministic per seed; V* V = I to within 1e-12.
    """
    if in_dim > out_dim:
        raise NoIsometryError(f"no isometry from dim {in_dim} into dim {out_dim}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((out_dim, in_dim)) + 1j * rng.standard_normal((out_dim, in_dim))
    q, r = np.linalg.qr(g / np.sqrt(2.0))
    d = np.diagonal(r)
    return q * (d / np.abs(d))
