"""Labelling signals by per-class feature responses, plus NN and NS baselines."""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import column_pnorms
from .preprocess import RANK_RTOL


@dataclass
class Prediction:
    label: str
    index: int
    scores: np.ndarray
    margin: float


@dataclass
class LinearFeatureMap:
    """Linear feature selection ``f = A y``; identity when ``matrix`` is None."""

    matrix: np.ndarray = None

    def __post_init__(self):
        if self.matrix is not None:
            self.matrix = np.asarray(self.matrix, dtype=np.float64)
            if self.matrix.ndim != 2 or not np.all(np.isfinite(self.matrix)):
                raise ValueError("feature map must be a finite 2-D matrix")

    @property
    def rank(self):
        if self.matrix is None:
            return None
        return int(np.linalg.matrix_rank(self.matrix))

    def __call__(self, Y):
        Y = np.asarray(Y, dtype=np.float64)
        return Y if self.matrix is None else self.matrix @ Y


@dataclass
class EvaluationSummary:
    misclassified: int
    total: int
    accuracy: float
    confusion: np.ndarray
    labels: list
    mean_margin: float
    predicted: np.ndarray

    def lines(self):
        out = [f"misclassified={self.misclassified} total={self.total} "
               f"accuracy={self.accuracy:.6f}"]
        for i, true in enumerate(self.labels):
            for j, pred in enumerate(self.labels):
                if self.confusion[i, j]:
                    out.append(f"confusion true={true} predicted={pred} "
                               f"count={int(self.confusion[i, j])}")
        return out


def _as_columns(y, dim):
    Y = np.asarray(y, dtype=np.float64)
    single = Y.ndim == 1
    Y = Y.reshape(-1, 1) if single else Y
    if Y.shape[0] != dim:
        raise ValueError(f"signal dimension {Y.shape[0]} does not match {dim}")
    norms = np.linalg.norm(Y, axis=0)
    if np.any(norms == 0):
        raise ValueError(f"cannot classify a zero signal (column {int(np.argmin(norms))})")
    return Y / norms, single


def decide(scores):
    """Column-wise argmax of a ``C x n`` score matrix and the best-minus-second margin.

    Ties go to the lowest class index (``argmax`` returns the first maximum).
    """
    idx = np.argmax(scores, axis=0)
    if scores.shape[0] == 1:
        return idx, scores[0].copy()
    top2 = -np.sort(-scores, axis=0)[:2]
    return idx, top2[0] - top2[1]


def _predictions(scores, labels, single):
    idx, margin = decide(scores)
    preds = [Prediction(labels[k], int(k), scores[:, n].copy(), float(margin[n]))
             for n, k in enumerate(idx)]
    return preds[0] if single else preds


def response_scores(bank, Y):
    """``C x n`` matrix of ``|F_i^T y|_p`` for the columns of ``Y``."""
    Y, _ = _as_columns(Y, bank.dim)
    return np.stack([column_pnorms(F.T @ Y, bank.pnorm) for F in bank.blocks])


def classify(bank, y):
    """Label ``y`` (a vector, or a matrix of column signals) by the largest response.

    Signals are normalised first; labels do not depend on this.
    """
    Y, single = _as_columns(y, bank.dim)
    scores = np.stack([column_pnorms(F.T @ Y, bank.pnorm) for F in bank.blocks])
    return _predictions(scores, bank.labels, single)


def nn_classify(train, y, feature_map=None):
    """Nearest neighbour: largest ``|<A y_i^j, A y>|`` over all training signals.

    The class score is ``|(A^T A Y_i)^T y|_inf``.
    """
    A = feature_map or LinearFeatureMap()
    Y, single = _as_columns(y, train.dim)
    fy = A(Y)
    scores = np.stack([np.abs(A(Yi).T @ fy).max(axis=0) for Yi in train.classes])
    return _predictions(scores, train.labels, single)


def class_bases(train, feature_map=None):
    """Orthonormal basis of ``span(A Y_i)`` per class, via pivoted reduced QR."""
    A = feature_map or LinearFeatureMap()
    bases = []
    for Yi in train.classes:
        Q, R, _ = scipy.linalg.qr(A(Yi), mode="economic", pivoting=True)
        diag = np.abs(np.diagonal(R))
        k = int(np.count_nonzero(diag > RANK_RTOL * diag[0])) if diag.size and diag[0] > 0 else 0
        bases.append(Q[:, :k])
    return bases


def ns_classify(train, y, feature_map=None):
    """Nearest subspace: largest energy ``|Q_i^T A y|_2`` captured by each class span."""
    A = feature_map or LinearFeatureMap()
    Y, single = _as_columns(y, train.dim)
    fy = A(Y)
    scores = np.stack([np.linalg.norm(Q.T @ fy, axis=0) for Q in class_bases(train, A)])
    return _predictions(scores, train.labels, single)


def evaluate(bank, test, classifier=None):
    """Misclassification count, accuracy, confusion matrix and mean margin.

    ``classifier`` maps a ``d x n`` matrix to a list of predictions and
    defaults to :func:`classify` with ``bank``. Test labels must be known to
    the bank.
    """
    labels = list(bank.labels) if bank is not None else list(test.labels)
    where = {lab: i for i, lab in enumerate(labels)}
    unknown = [lab for lab in test.labels if lab not in where]
    if unknown:
        raise ValueError(f"test labels not known to the model: {unknown}")
    predict = classifier or (lambda Y: classify(bank, Y))
    C = len(labels)
    confusion = np.zeros((C, C), dtype=np.int64)
    margins = []
    predicted = []
    for lab, Yc in zip(test.labels, test.classes):
        preds = predict(Yc)
        for pr in preds:
            confusion[where[lab], where[pr.label]] += 1
            margins.append(pr.margin)
            predicted.append(pr.label)
    total = int(confusion.sum())
    wrong = total - int(np.trace(confusion))
    return EvaluationSummary(
        misclassified=wrong,
        total=total,
        accuracy=(total - wrong) / total if total else float("nan"),
        confusion=confusion,
        labels=labels,
        mean_margin=float(np.mean(margins)) if margins else float("nan"),
        predicted=np.array(predicted, dtype=object),
    )
