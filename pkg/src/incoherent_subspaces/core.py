"""Shared data model, vector p-norms and matrix (q, p) operator norms."""

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

INF = np.inf

#: Supported norm tags. Anything else is rejected by :func:`as_norm_tag`.
NORM_TAGS = (1.0, 2.0, INF)

#: Largest column count for which the (inf, 1) norm is enumerated exactly.
MAX_ENUM_COLS = 20


def as_norm_tag(p):
    """Coerce ``p`` (1, 2, inf or their string forms) to a float norm tag."""
    if isinstance(p, str):
        key = p.strip().lower()
        if key in ("inf", "infinity", "max"):
            return INF
        try:
            p = float(key)
        except ValueError:
            raise ValueError(f"unsupported norm tag {p!r}; use 1, 2 or inf") from None
    p = float(p)
    if p not in NORM_TAGS:
        raise ValueError(f"unsupported norm tag {p!r}; use 1, 2 or inf")
    return p


def norm_tag_name(p):
    p = as_norm_tag(p)
    return "inf" if p == INF else str(int(p))


@dataclass(frozen=True)
class NormPair:
    """Input/output norm tags of an operator norm ``max_{|v|_q=1} |Mv|_p``."""

    q: float
    p: float

    def __post_init__(self):
        object.__setattr__(self, "q", as_norm_tag(self.q))
        object.__setattr__(self, "p", as_norm_tag(self.p))

    @classmethod
    def parse(cls, text):
        """Parse ``"2,2"``, ``"inf,1"`` and the like."""
        parts = [t for t in text.replace(" ", "").split(",") if t]
        if len(parts) != 2:
            raise ValueError(f"expected 'q,p', got {text!r}")
        return cls(parts[0], parts[1])

    def __str__(self):
        return f"{norm_tag_name(self.q)},{norm_tag_name(self.p)}"


@dataclass
class ClassDataset:
    """Column signals grouped into labelled class blocks.

    Parameters
    ----------
    classes : list of ndarray
        One ``d x n_i`` matrix per class, columns are signals.
    labels : list of str
        Class identifiers, same order as ``classes``.
    """

    classes: list
    labels: list

    def __post_init__(self):
        self.classes = [np.asarray(Y, dtype=np.float64) for Y in self.classes]
        self.labels = [str(lab) for lab in self.labels]
        if not self.classes:
            raise ValueError("dataset has no classes")
        if len(self.classes) != len(self.labels):
            raise ValueError("number of class blocks and labels differ")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("duplicate class labels")
        d = None
        for lab, Y in zip(self.labels, self.classes):
            if Y.ndim != 2:
                raise ValueError(f"class {lab!r}: block must be 2-D")
            if Y.shape[1] < 1:
                raise ValueError(f"class {lab!r} has no signals")
            if d is None:
                d = Y.shape[0]
            elif Y.shape[0] != d:
                raise ValueError(
                    f"class {lab!r} has dimension {Y.shape[0]}, expected {d}")
        if d < 1:
            raise ValueError("signal dimension must be positive")

    @property
    def dim(self):
        return self.classes[0].shape[0]

    @property
    def n_classes(self):
        return len(self.classes)

    @property
    def sizes(self):
        return [Y.shape[1] for Y in self.classes]

    @property
    def n_signals(self):
        return sum(self.sizes)

    @property
    def matrix(self):
        """The full ``d x N`` data matrix, class blocks side by side."""
        return np.hstack(self.classes)

    @property
    def column_classes(self):
        """Class index of every column of :attr:`matrix`."""
        return np.repeat(np.arange(self.n_classes), self.sizes)

    def with_classes(self, classes):
        return ClassDataset(classes, list(self.labels))


@dataclass
class FeatureBank:
    """The trained model: one orthonormal ``d x s`` block per class.

    ``blocks`` is stored as a ``(C, d, s)`` array.
    """

    blocks: np.ndarray
    pnorm: float = 2.0
    labels: list = field(default=None)
    check: bool = True

    def __post_init__(self):
        self.blocks = np.asarray(self.blocks, dtype=np.float64)
        if self.blocks.ndim != 3:
            raise ValueError("blocks must have shape (C, d, s)")
        self.pnorm = as_norm_tag(self.pnorm)
        C, d, s = self.blocks.shape
        if self.labels is None:
            self.labels = [str(i) for i in range(C)]
        self.labels = [str(lab) for lab in self.labels]
        if len(self.labels) != C:
            raise ValueError("number of labels must equal number of blocks")
        if s > d:
            raise ValueError(f"rank s={s} exceeds dimension d={d}")
        if self.check:
            err = self.orthonormality_error()
            if err > 1e-8:
                raise ValueError(f"blocks are not orthonormal (max error {err:.3e})")

    @property
    def n_classes(self):
        return self.blocks.shape[0]

    @property
    def dim(self):
        return self.blocks.shape[1]

    @property
    def rank(self):
        return self.blocks.shape[2]

    @property
    def stacked(self):
        """All features side by side as a ``d x (C s)`` matrix."""
        C, d, s = self.blocks.shape
        return self.blocks.transpose(1, 0, 2).reshape(d, C * s)

    def orthonormality_error(self):
        s = self.blocks.shape[2]
        gram = np.einsum("cdi,cdj->cij", self.blocks, self.blocks)
        return float(np.max(np.abs(gram - np.eye(s)), initial=0.0))


@dataclass
class ResponseGrid:
    """Block matrix of responses ``G_ij = F_i^T Y_j``.

    ``values`` is ``(C s) x N``; row block ``i`` belongs to class ``i``'s
    features, column block ``j`` to class ``j``'s signals.
    """

    values: np.ndarray
    rank: int
    sizes: Sequence[int]

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        self.sizes = [int(n) for n in self.sizes]
        rows, cols = self.values.shape
        if rows != self.rank * len(self.sizes) or cols != sum(self.sizes):
            raise ValueError(
                f"grid of shape {self.values.shape} does not tile into "
                f"{len(self.sizes)} x {len(self.sizes)} blocks of rank {self.rank}")

    @classmethod
    def from_bank(cls, bank, data):
        return cls(bank.stacked.T @ data.matrix, bank.rank, data.sizes)

    @property
    def n_classes(self):
        return len(self.sizes)

    @property
    def column_classes(self):
        return np.repeat(np.arange(len(self.sizes)), self.sizes)

    def block(self, i, j):
        s = self.rank
        start = sum(self.sizes[:j])
        return self.values[i * s:(i + 1) * s, start:start + self.sizes[j]]


def vector_pnorm(v, p):
    """p-norm of ``v`` for ``p`` in {1, 2, inf}; empty vectors have norm 0."""
    p = as_norm_tag(p)
    v = np.abs(np.asarray(v, dtype=np.float64).ravel())
    if v.size == 0:
        return 0.0
    if p == 1:
        return float(v.sum())
    if p == 2:
        return float(np.sqrt(v @ v))
    return float(v.max())


def column_pnorms(M, p):
    """p-norm of each column of ``M``, vectorised."""
    p = as_norm_tag(p)
    A = np.abs(np.asarray(M, dtype=np.float64))
    if A.shape[0] == 0:
        return np.zeros(A.shape[1])
    if p == 1:
        return A.sum(axis=0)
    if p == 2:
        return np.sqrt(np.einsum("ij,ij->j", A, A))
    return A.max(axis=0)


def _inf_to_one(M):
    rows, cols = M.shape
    if cols > MAX_ENUM_COLS:
        raise ValueError(
            f"(inf,1) norm is computed by sign enumeration and limited to "
            f"{MAX_ENUM_COLS} columns, got {cols}")
    if cols == 0 or rows == 0:
        return 0.0
    # v and -v give the same value, so fix the first sign to +1.
    best = 0.0
    n_free = cols - 1
    chunk = 1 << min(n_free, 14)
    bits = np.arange(n_free)
    for start in range(0, 1 << n_free, chunk):
        codes = np.arange(start, min(start + chunk, 1 << n_free))
        signs = np.ones((codes.size, cols))
        if n_free:
            signs[:, 1:] = 1.0 - 2.0 * ((codes[:, None] >> bits) & 1)
        vals = np.abs(signs @ M.T).sum(axis=1)
        best = max(best, float(vals.max()))
    return best


def operator_norm(M, qp):
    """Operator norm ``max_{|v|_q = 1} |M v|_p`` for the supported pairs.

    Supported ``(q, p)``: (1, inf), (inf, inf), (1, 1), (2, 2) and (inf, 1).
    The last one is NP-hard in general and is enumerated exactly over sign
    vectors, so ``M`` may have at most 20 columns.
    """
    if not isinstance(qp, NormPair):
        qp = NormPair(*qp)
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise ValueError("operator_norm expects a 2-D matrix")
    if M.size == 0:
        return 0.0
    key = (qp.q, qp.p)
    if key == (1.0, INF):
        return float(np.abs(M).max())
    if key == (INF, INF):
        return float(np.abs(M).sum(axis=1).max())
    if key == (1.0, 1.0):
        return float(np.abs(M).sum(axis=0).max())
    if key == (2.0, 2.0):
        return float(np.linalg.norm(M, 2))
    if key == (INF, 1.0):
        return _inf_to_one(M)
    raise ValueError(f"operator norm ({qp}) is not supported")


def coherence_report(bank, qp=(2, 2)):
    """Matrix of cross-class coherences ``|F_j^T F_i|_{q,p}`` at entry (i, j)."""
    if not isinstance(qp, NormPair):
        qp = NormPair(*qp)
    C = bank.n_classes
    out = np.zeros((C, C))
    for i in range(C):
        for j in range(C):
            out[i, j] = operator_norm(bank.blocks[j].T @ bank.blocks[i], qp)
    return out
