"""Column normalisation and QR dimensionality reduction."""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import ClassDataset, FeatureBank

#: Singular values below ``RANK_RTOL * sigma_max`` count as zero.
RANK_RTOL = 1e-10


def normalize_columns(data):
    """Rescale every signal of ``data`` to unit Euclidean norm."""
    out = []
    for lab, Y in zip(data.labels, data.classes):
        norms = np.linalg.norm(Y, axis=0)
        zero = np.flatnonzero(norms == 0)
        if zero.size:
            raise ValueError(f"class {lab!r}: column {int(zero[0])} is zero")
        out.append(Y / norms)
    return data.with_classes(out)


def numerical_rank(sv, rtol=RANK_RTOL):
    if sv.size == 0 or sv[0] == 0:
        return 0
    return int(np.count_nonzero(sv > rtol * sv[0]))


@dataclass
class QrReduction:
    """Orthonormal embedding ``Y = Q R`` of the training data.

    Attributes
    ----------
    q_factor : ndarray, shape (d, r)
    r_factor : ndarray, shape (r, N)
    """

    q_factor: np.ndarray
    r_factor: np.ndarray

    @property
    def original_dim(self):
        return self.q_factor.shape[0]

    @property
    def reduced_dim(self):
        return self.q_factor.shape[1]

    def reduce(self, Y):
        """Coordinates ``Q^T Y`` of signals in the reduced space."""
        return self.q_factor.T @ np.asarray(Y, dtype=np.float64)


def qr_reduce(data):
    """Embed ``data`` into ``r = rank(Y)`` dimensions without changing geometry.

    Full-rank data uses a plain reduced QR. Rank-deficient data uses a
    column-pivoted QR truncated to the numerical rank, so that ``Q`` spans
    exactly ``span(Y)``; ``R`` is then triangular up to that column pivoting.

    Returns
    -------
    red : QrReduction
    reduced : ClassDataset
        The dataset ``Q^T Y`` in ``R^r``; all inner products are preserved.
    """
    Y = data.matrix
    rank = numerical_rank(np.linalg.svd(Y, compute_uv=False))
    q, r = np.linalg.qr(Y, mode="reduced")
    if rank < q.shape[1]:
        q, _, _ = scipy.linalg.qr(Y, mode="economic", pivoting=True)
        q = q[:, :rank]
        r = q.T @ Y
    # Deterministic orientation independent of the LAPACK sign choice.
    k = min(r.shape)
    flip = np.ones(q.shape[1])
    flip[:k][np.diagonal(r[:k, :k]) < 0] = -1.0
    q = q * flip
    r = r * flip[:, None]
    red = QrReduction(q, r)
    return red, data.with_classes([q.T @ Yc for Yc in data.classes])


def lift_features(red, bank_reduced):
    """Map a bank learned on ``Q^T Y`` back to the original space as ``Q F``."""
    if bank_reduced.dim != red.reduced_dim:
        raise ValueError(
            f"bank dimension {bank_reduced.dim} does not match reduced "
            f"dimension {red.reduced_dim}")
    blocks = np.einsum("dr,crs->cds", red.q_factor, bank_reduced.blocks)
    return FeatureBank(blocks, bank_reduced.pnorm, list(bank_reduced.labels))
