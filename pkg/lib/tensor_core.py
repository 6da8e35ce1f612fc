"""
Named-index dense tensor algebra.

Every tensor in the simulator (site tensors, gates, messages, boundary MPS
sites) is an IndexedTensor: a complex128 numpy array whose axes are named by
string labels. Contraction matches indices by label only.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

logger = logging.getLogger(__name__)

DEFAULT_SVD_CUTOFF = 1e-14
DEFAULT_REG_CUTOFF = 1e-12
NEGATIVE_EIGENVALUE_TOL = 1e-8


class TensorError(Exception):
    """Base class for tensor-algebra failures."""


class StructuralError(TensorError, ValueError):
    """Index, label or dimension mismatch."""


class NumericalError(TensorError, ArithmeticError):
    """Base class for numerical failures."""


class DegenerateSpectrumError(NumericalError):
    """All singular values of a decomposition fall below the cutoff."""


class NonPSDError(NumericalError):
    """A matrix expected to be positive semidefinite has a negative eigenvalue."""


@dataclass(frozen=True)
class Index:
    """A labelled tensor axis."""

    label: str
    dimension: int

    def __post_init__(self):
        if int(self.dimension) < 1:
            raise StructuralError(f"Index {self.label!r} has dimension {self.dimension} < 1")


IndexSpec = Union[Index, Tuple[str, int]]


class IndexedTensor:
    """
    Dense complex tensor with labelled axes.

    Instances are treated as immutable: every operation returns a new tensor
    and the underlying array is marked read-only.

    Example:
        >>> t = IndexedTensor.from_array(["i", "j"], np.eye(2))
        >>> t.labels
        ('i', 'j')
    """

    __slots__ = ("_indices", "_data")

    def __init__(self, indices: Sequence[IndexSpec], data):
        parsed = tuple(i if isinstance(i, Index) else Index(str(i[0]), int(i[1])) for i in indices)
        labels = [i.label for i in parsed]
        if len(set(labels)) != len(labels):
            raise StructuralError(f"Duplicate labels in {labels}")

        array = np.array(data, dtype=np.complex128)
        shape = tuple(i.dimension for i in parsed)
        if array.shape != shape:
            if array.size != int(np.prod(shape, dtype=np.int64)):
                raise StructuralError(f"Data of size {array.size} does not fit shape {shape}")
            array = array.reshape(shape)
        array.flags.writeable = False
        self._indices = parsed
        self._data = array

    @classmethod
    def _wrap(cls, indices: Tuple[Index, ...], array: np.ndarray) -> "IndexedTensor":
        # Internal constructor for arrays produced by our own operations.
        obj = cls.__new__(cls)
        array = np.asarray(array, dtype=np.complex128)
        array.flags.writeable = False
        obj._indices = indices
        obj._data = array
        return obj

    @classmethod
    def from_array(cls, labels: Sequence[str], array) -> "IndexedTensor":
        """Build a tensor whose dimensions are read from the array shape."""
        array = np.asarray(array)
        if array.ndim != len(labels):
            raise StructuralError(f"{len(labels)} labels for an array of rank {array.ndim}")
        return cls([Index(label, dim) for label, dim in zip(labels, array.shape)], array)

    @classmethod
    def scalar(cls, value: complex = 1.0) -> "IndexedTensor":
        return cls((), np.asarray(value))

    @classmethod
    def from_matrix(
        cls, matrix, row_indices: Sequence[IndexSpec], col_indices: Sequence[IndexSpec]
    ) -> "IndexedTensor":
        """Inverse of to_matrix: reshape a matrix into labelled row and column indices."""
        indices = [i if isinstance(i, Index) else Index(str(i[0]), int(i[1])) for i in (*row_indices, *col_indices)]
        return cls(indices, np.asarray(matrix).reshape([i.dimension for i in indices]))

    @property
    def indices(self) -> Tuple[Index, ...]:
        return self._indices

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(i.label for i in self._indices)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self._data.shape

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def ndim(self) -> int:
        return len(self._indices)

    @property
    def size(self) -> int:
        return int(self._data.size)

    def has(self, label: str) -> bool:
        return any(i.label == label for i in self._indices)

    def axis(self, label: str) -> int:
        for position, index in enumerate(self._indices):
            if index.label == label:
                return position
        raise StructuralError(f"Label {label!r} not in {self.labels}")

    def dim(self, label: str) -> int:
        return self._indices[self.axis(label)].dimension

    def conj(self) -> "IndexedTensor":
        return IndexedTensor._wrap(self._indices, np.conj(self._data))

    def relabel(self, mapping: Mapping[str, str]) -> "IndexedTensor":
        """Rename labels; labels missing from the mapping are kept."""
        indices = tuple(Index(mapping.get(i.label, i.label), i.dimension) for i in self._indices)
        labels = [i.label for i in indices]
        if len(set(labels)) != len(labels):
            raise StructuralError(f"Relabelling produced duplicate labels {labels}")
        return IndexedTensor._wrap(indices, self._data)

    def transpose(self, labels: Sequence[str]) -> "IndexedTensor":
        if sorted(labels) != sorted(self.labels):
            raise StructuralError(f"Cannot transpose {self.labels} to {tuple(labels)}")
        axes = [self.axis(label) for label in labels]
        if axes == list(range(self.ndim)):
            return self
        return IndexedTensor._wrap(tuple(self._indices[a] for a in axes), np.transpose(self._data, axes))

    def to_matrix(self, row_labels: Sequence[str], col_labels: Sequence[str]) -> np.ndarray:
        """Group the given labels into matrix rows and columns (C order)."""
        ordered = self.transpose([*row_labels, *col_labels])
        rows = int(np.prod([self.dim(label) for label in row_labels], dtype=np.int64))
        return ordered.data.reshape(rows, -1)

    def norm(self) -> float:
        return float(np.linalg.norm(self._data.ravel()))

    def scale(self, alpha: complex) -> "IndexedTensor":
        return IndexedTensor._wrap(self._indices, self._data * alpha)

    def project(self, label: str, value: int) -> "IndexedTensor":
        """Fix one index to a basis value and drop it."""
        axis = self.axis(label)
        if not 0 <= value < self._indices[axis].dimension:
            raise StructuralError(f"Value {value} out of range for index {label!r}")
        indices = self._indices[:axis] + self._indices[axis + 1:]
        return IndexedTensor._wrap(indices, np.take(self._data, value, axis=axis))

    def expand(self, label: str) -> "IndexedTensor":
        """Append a dimension-1 index."""
        if self.has(label):
            raise StructuralError(f"Label {label!r} already present")
        return IndexedTensor._wrap(self._indices + (Index(label, 1),), self._data[..., np.newaxis])

    def item(self) -> complex:
        if self.ndim != 0:
            raise StructuralError(f"Tensor with labels {self.labels} is not a scalar")
        return complex(self._data)

    def __repr__(self) -> str:
        dims = ", ".join(f"{i.label}:{i.dimension}" for i in self._indices)
        return f"IndexedTensor({dims})"


def contract(a: IndexedTensor, b: IndexedTensor) -> IndexedTensor:
    """
    Sum over all labels shared by a and b.

    The result carries a's free indices followed by b's free indices.

    Raises:
        StructuralError: If a shared label has different dimensions
    """
    b_axes = {label: position for position, label in enumerate(b.labels)}
    shared = [label for label in a.labels if label in b_axes]
    for label in shared:
        if a.dim(label) != b.dim(label):
            raise StructuralError(f"Dimension mismatch on {label!r}: {a.dim(label)} vs {b.dim(label)}")

    if a.ndim == 0 or b.ndim == 0:
        data = a.data * b.data
    else:
        axes_a = [a.axis(label) for label in shared]
        axes_b = [b_axes[label] for label in shared]
        data = np.tensordot(a.data, b.data, axes=(axes_a, axes_b))

    shared_set = set(shared)
    indices = tuple(i for i in a.indices if i.label not in shared_set) + tuple(
        i for i in b.indices if i.label not in shared_set
    )
    return IndexedTensor._wrap(indices, data)


def _result_size(a: IndexedTensor, b: IndexedTensor) -> int:
    b_labels = set(b.labels)
    a_labels = set(a.labels)
    size = 1
    for index in a.indices:
        if index.label not in b_labels:
            size *= index.dimension
    for index in b.indices:
        if index.label not in a_labels:
            size *= index.dimension
    return size


def contract_network(tensors: Iterable[IndexedTensor]) -> IndexedTensor:
    """
    Contract a list of tensors pairwise, always merging the connected pair
    with the smallest intermediate. Disconnected parts are joined last by
    outer products.
    """
    pool: List[IndexedTensor] = list(tensors)
    if not pool:
        return IndexedTensor.scalar(1.0)

    while len(pool) > 1:
        best: Optional[Tuple[int, int, int]] = None
        for i in range(len(pool)):
            labels_i = set(pool[i].labels)
            for j in range(i + 1, len(pool)):
                if labels_i.isdisjoint(pool[j].labels):
                    continue
                size = _result_size(pool[i], pool[j])
                if best is None or size < best[0]:
                    best = (size, i, j)
        if best is None:
            order = sorted(range(len(pool)), key=lambda k: pool[k].size)
            i, j = sorted(order[:2])
        else:
            _, i, j = best
        merged = contract(pool[i], pool[j])
        pool = [t for k, t in enumerate(pool) if k not in (i, j)] + [merged]
    return pool[0]


@dataclass(frozen=True)
class TruncationResult:
    """
    Outcome of svd_truncate.

    singular_values is the full spectrum normalized so that the squares sum
    to one; norm is the Frobenius norm of the input tensor.
    """

    left: IndexedTensor
    right: IndexedTensor
    kept_rank: int
    exact_rank: int
    discarded_weight: float
    singular_values: np.ndarray
    norm: float

    @property
    def truncated(self) -> bool:
        return self.kept_rank < self.exact_rank


def _svd(matrix: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    try:
        return scipy.linalg.svd(matrix, full_matrices=False, lapack_driver="gesdd", check_finite=False)
    except np.linalg.LinAlgError:
        logger.debug("gesdd did not converge on a %s matrix, retrying with gesvd", matrix.shape)
        return scipy.linalg.svd(matrix, full_matrices=False, lapack_driver="gesvd", check_finite=False)


def svd_truncate(
    t: IndexedTensor,
    left_labels: Sequence[str],
    max_rank: int,
    cutoff: float = DEFAULT_SVD_CUTOFF,
    bond_label: str = "bond",
    absorb: str = "right",
) -> TruncationResult:
    """
    Truncated SVD of t across the bipartition left_labels | rest.

    Args:
        t: Tensor to split
        left_labels: Labels that go to the left factor
        max_rank: Maximum number of singular values kept
        cutoff: Normalized squared singular values at or below this are treated as zero
        bond_label: Label of the new index joining the two factors
        absorb: Where the singular values go: "right", "left" or "both" (square roots)

    Returns:
        TruncationResult whose left and right factors contract back to t up to
        the discarded weight

    Raises:
        StructuralError: If left_labels is not a nonempty proper subset of t's labels
        DegenerateSpectrumError: If every singular value falls below the cutoff
    """
    left_labels = list(left_labels)
    left_set = set(left_labels)
    if not left_labels or not left_set.issubset(t.labels) or len(left_set) == t.ndim:
        raise StructuralError(f"Left labels {left_labels} must be a nonempty proper subset of {t.labels}")
    if max_rank < 1:
        raise StructuralError(f"max_rank must be >= 1, got {max_rank}")
    if absorb not in ("right", "left", "both"):
        raise StructuralError(f"Unknown absorb mode {absorb!r}")

    right_labels = [label for label in t.labels if label not in left_set]
    matrix = t.to_matrix(left_labels, right_labels)
    u, s, vh = _svd(matrix)

    total = float(np.sum(s ** 2))
    if total <= 0.0:
        raise DegenerateSpectrumError(f"Zero tensor cannot be split across {left_labels}")
    weights = s ** 2 / total
    exact_rank = int(np.count_nonzero(weights > cutoff))
    if exact_rank == 0:
        raise DegenerateSpectrumError(f"All singular values below cutoff {cutoff}")
    kept = min(int(max_rank), exact_rank)
    discarded = float(min(1.0, max(0.0, np.sum(weights[kept:]))))

    u, s_kept, vh = u[:, :kept], s[:kept], vh[:kept, :]
    if absorb == "right":
        vh = s_kept[:, np.newaxis] * vh
    elif absorb == "left":
        u = u * s_kept[np.newaxis, :]
    else:
        root = np.sqrt(s_kept)
        u = u * root[np.newaxis, :]
        vh = root[:, np.newaxis] * vh

    bond = Index(bond_label, kept)
    left_indices = tuple(t.indices[t.axis(label)] for label in left_labels)
    right_indices = tuple(t.indices[t.axis(label)] for label in right_labels)
    left = IndexedTensor._wrap(left_indices + (bond,), u.reshape([i.dimension for i in left_indices] + [kept]))
    right = IndexedTensor._wrap((bond,) + right_indices, vh.reshape([kept] + [i.dimension for i in right_indices]))

    return TruncationResult(
        left=left,
        right=right,
        kept_rank=kept,
        exact_rank=exact_rank,
        discarded_weight=discarded,
        singular_values=np.sqrt(weights),
        norm=float(np.sqrt(total)),
    )


def _square_labels(
    m: IndexedTensor, row_labels: Optional[Sequence[str]], col_labels: Optional[Sequence[str]]
) -> Tuple[List[str], List[str]]:
    if row_labels is None:
        half = m.ndim // 2
        row_labels = list(m.labels[:half])
    if col_labels is None:
        col_labels = [label for label in m.labels if label not in set(row_labels)]
    rows = int(np.prod([m.dim(label) for label in row_labels], dtype=np.int64))
    cols = int(np.prod([m.dim(label) for label in col_labels], dtype=np.int64))
    if rows != cols or not row_labels or not col_labels:
        raise StructuralError(f"Tensor {m} does not reshape to a square matrix via {row_labels} | {col_labels}")
    return list(row_labels), list(col_labels)


def eig_full(
    m: IndexedTensor,
    row_labels: Optional[Sequence[str]] = None,
    col_labels: Optional[Sequence[str]] = None,
) -> np.ndarray:
    """
    All eigenvalues of m viewed as a square matrix, sorted by descending modulus.

    Without explicit labels the first half of m's indices are the rows.
    """
    rows, cols = _square_labels(m, row_labels, col_labels)
    values = scipy.linalg.eigvals(m.to_matrix(rows, cols), check_finite=False)
    order = np.argsort(-np.abs(values), kind="stable")
    return values[order]


@dataclass(frozen=True)
class PSDRoots:
    sqrt: IndexedTensor
    inv_sqrt: IndexedTensor
    dropped: int


def psd_roots(
    m: IndexedTensor,
    row_labels: Optional[Sequence[str]] = None,
    col_labels: Optional[Sequence[str]] = None,
    reg_cutoff: float = DEFAULT_REG_CUTOFF,
) -> PSDRoots:
    """
    Square root and regularized inverse square root of a PSD matrix.

    Eigenvalues at or below reg_cutoff times the largest eigenvalue are
    excluded from the inverse; their count is reported as dropped.

    Raises:
        NonPSDError: If an eigenvalue is below -1e-8 (relative to the largest)
    """
    rows, cols = _square_labels(m, row_labels, col_labels)
    matrix = m.to_matrix(rows, cols)
    matrix = 0.5 * (matrix + matrix.conj().T)
    values, vectors = scipy.linalg.eigh(matrix, check_finite=False)

    scale = float(np.max(np.abs(values))) if values.size else 0.0
    if values.size and values[0] < -NEGATIVE_EIGENVALUE_TOL * max(1.0, scale):
        raise NonPSDError(f"Eigenvalue {values[0]:.3e} below -{NEGATIVE_EIGENVALUE_TOL} in a PSD root")

    values = np.clip(values, 0.0, None)
    keep = values > reg_cutoff * scale if scale > 0.0 else np.zeros(values.shape, dtype=bool)
    dropped = int(values.size - np.count_nonzero(keep))

    root = np.sqrt(values)
    sqrt_matrix = (vectors * root[np.newaxis, :]) @ vectors.conj().T
    kept_vectors = vectors[:, keep]
    inv_matrix = (kept_vectors / root[keep][np.newaxis, :]) @ kept_vectors.conj().T

    row_indices = [m.indices[m.axis(label)] for label in rows]
    col_indices = [m.indices[m.axis(label)] for label in cols]
    return PSDRoots(
        sqrt=IndexedTensor.from_matrix(sqrt_matrix, row_indices, col_indices),
        inv_sqrt=IndexedTensor.from_matrix(inv_matrix, row_indices, col_indices),
        dropped=dropped,
    )


def psd_sqrt_and_pinv_sqrt(
    m: IndexedTensor, reg_cutoff: float = DEFAULT_REG_CUTOFF
) -> Tuple[IndexedTensor, IndexedTensor]:
    """Two-value view of psd_roots with the default row/column split."""
    roots = psd_roots(m, reg_cutoff=reg_cutoff)
    return roots.sqrt, roots.inv_sqrt


def qr_split(t: IndexedTensor, left_labels: Sequence[str], bond_label: str) -> Tuple[IndexedTensor, IndexedTensor]:
    """Split t = Q R with Q an isometry on left_labels."""
    left_labels = list(left_labels)
    right_labels = [label for label in t.labels if label not in set(left_labels)]
    q, r = scipy.linalg.qr(t.to_matrix(left_labels, right_labels), mode="economic", check_finite=False)
    bond = Index(bond_label, q.shape[1])
    left_indices = tuple(t.indices[t.axis(label)] for label in left_labels)
    right_indices = tuple(t.indices[t.axis(label)] for label in right_labels)
    return (
        IndexedTensor._wrap(left_indices + (bond,), q.reshape([i.dimension for i in left_indices] + [bond.dimension])),
        IndexedTensor._wrap((bond,) + right_indices, r.reshape([bond.dimension] + [i.dimension for i in right_indices])),
    )


def lq_split(t: IndexedTensor, left_labels: Sequence[str], bond_label: str) -> Tuple[IndexedTensor, IndexedTensor]:
    """Split t = L Q with Q having orthonormal rows over the remaining labels."""
    left_labels = list(left_labels)
    right_labels = [label for label in t.labels if label not in set(left_labels)]
    matrix = t.to_matrix(left_labels, right_labels)
    q, r = scipy.linalg.qr(matrix.conj().T, mode="economic", check_finite=False)
    lower, q_rows = r.conj().T, q.conj().T
    bond = Index(bond_label, q_rows.shape[0])
    left_indices = tuple(t.indices[t.axis(label)] for label in left_labels)
    right_indices = tuple(t.indices[t.axis(label)] for label in right_labels)
    return (
        IndexedTensor._wrap(left_indices + (bond,), lower.reshape([i.dimension for i in left_indices] + [bond.dimension])),
        IndexedTensor._wrap(
            (bond,) + right_indices, q_rows.reshape([bond.dimension] + [i.dimension for i in right_indices])
        ),
    )
