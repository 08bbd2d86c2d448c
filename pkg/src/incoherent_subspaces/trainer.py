"""Learning class-specific orthonormal feature blocks by alternating projections.

The two constraint sets are

* orthonormal systems, one ``d x s`` block ``F_i`` per class, and
* banks whose responses to the training data hit ``beta_p`` within class
  (``|F_i^T y|_p = beta_p``) and stay below ``mu_p`` outside the class.

Projection onto the first set is a per-class orthogonal Procrustes problem.
Projection onto the second is carried out on the response grid
``G = F^T Y`` by forward-backward splitting, with the column-wise
projections of :mod:`incoherent_subspaces.prox` as the backward step.
"""

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import INF, FeatureBank, as_norm_tag, column_pnorms
from .preprocess import (RANK_RTOL, lift_features, normalize_columns,
                         numerical_rank, qr_reduce)
from .prox import project_grid_values

log = logging.getLogger(__name__)

STEP_POLICIES = ("conservative", "aggressive", "auto")

#: ``auto`` step policy switches to ``aggressive`` above this mu fraction.
AUTO_STEP_THRESHOLD = 0.05


class TrainingError(RuntimeError):
    """Numerical failure during training (non-finite iterate, eigensolver)."""


@dataclass
class TrainConfig:
    p: float = 2.0
    s: int = 1
    mu_fraction: float = 0.0
    outer_iters: int = 10
    inner_tol: float = 1e-4
    inner_max_iters: int = 500
    step_policy: str = "auto"
    seed: int = 0

    def __post_init__(self):
        self.p = as_norm_tag(self.p)
        if int(self.s) != self.s or self.s < 1:
            raise ValueError(f"s must be a positive integer, got {self.s}")
        self.s = int(self.s)
        if not 0.0 <= self.mu_fraction <= 1.0:
            raise ValueError(f"mu_fraction must lie in [0, 1], got {self.mu_fraction}")
        if self.outer_iters < 1:
            raise ValueError("outer_iters must be at least 1")
        if self.inner_max_iters < 1:
            raise ValueError("inner_max_iters must be at least 1")
        if self.inner_tol < 0:
            raise ValueError("inner_tol must be non-negative")
        if self.step_policy not in STEP_POLICIES:
            raise ValueError(f"step_policy must be one of {STEP_POLICIES}")

    @property
    def beta(self):
        return beta_for(self.p, self.s)

    @property
    def mu(self):
        return self.mu_fraction * self.beta

    @property
    def resolved_step_policy(self):
        if self.step_policy != "auto":
            return self.step_policy
        return "conservative" if self.mu_fraction <= AUTO_STEP_THRESHOLD else "aggressive"


@dataclass
class TrainReport:
    best_distance: float = math.inf
    distance_trace: list = field(default_factory=list)
    inner_objective_traces: list = field(default_factory=list)
    within_deficit: float = math.nan
    without_excess: float = math.nan
    completed_blocks: int = 0
    warnings: list = field(default_factory=list)

    @property
    def feasibility(self):
        return {"within_deficit": self.within_deficit,
                "without_excess": self.without_excess}

    def summary_lines(self):
        return [
            f"best_distance={self.best_distance:.12g}",
            f"within_deficit={self.within_deficit:.12g}",
            f"without_excess={self.without_excess:.12g}",
            f"outer_steps={len(self.distance_trace) // 2}",
            f"inner_iterations={sum(len(t) for t in self.inner_objective_traces)}",
            f"completed_blocks={self.completed_blocks}",
        ]


def beta_for(p, s):
    """Largest attainable within-class response ``|F^T y|_p`` for unit ``y``."""
    p = as_norm_tag(p)
    if s < 1:
        raise ValueError("s must be at least 1")
    return math.sqrt(s) if p == 1 else 1.0


def grassmann_bound(s, d, C=INF):
    """Lower bound on the largest (2,2)-coherence of ``C`` ``s``-dim subspaces of R^d.

    Returns ``sqrt(max(0, (s C - d) / (d (C - 1))))``, or ``sqrt(s / d)``
    in the limit of infinitely many classes.
    """
    if d < 1:
        raise ValueError("d must be positive")
    if C == INF or C is None:
        return math.sqrt(s / d)
    if C < 2:
        raise ValueError("the bound needs at least two classes")
    return math.sqrt(max(0.0, (s * C - d) / (d * (C - 1))))


def _orient(vecs):
    # largest-magnitude entry of every column made positive
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def init_features(data, s):
    """Per class, the top-``s`` eigenvectors of ``Y_i Y_i^T - sum_{j!=i} Y_j Y_j^T``.

    These maximise the energy captured from the own class minus the energy
    captured from all others.
    """
    d = data.dim
    if s > d:
        raise ValueError(f"s={s} exceeds the signal dimension d={d}")
    scatter = [Y @ Y.T for Y in data.classes]
    total = np.sum(scatter, axis=0)
    blocks = []
    for S in scatter:
        M = 2.0 * S - total
        M = 0.5 * (M + M.T)
        try:
            _, vecs = np.linalg.eigh(M)
        except np.linalg.LinAlgError as exc:
            raise TrainingError(f"eigendecomposition failed: {exc}") from exc
        blocks.append(_orient(vecs[:, ::-1][:, :s]))
    return np.stack(blocks)


def polar_factor(X, rtol=RANK_RTOL):
    """Closest matrix with orthonormal columns to ``X`` (Frobenius norm).

    Returns ``(F, completed)``. For rank-deficient ``X`` the missing
    directions are filled with canonical basis vectors orthogonalised
    against the range, lowest index first, and ``completed`` is True.
    """
    U, sv, Vt = np.linalg.svd(X, full_matrices=False)
    k = numerical_rank(sv, rtol)
    s = X.shape[1]
    if k == s:
        return U @ Vt, False
    extra = []
    for e in np.eye(X.shape[0]):
        if len(extra) == s - k:
            break
        cur = np.column_stack([U[:, :k]] + extra)
        v = e - cur @ (cur.T @ e)
        v = v - cur @ (cur.T @ v)
        nv = np.linalg.norm(v)
        if nv > 1e-6:
            extra.append(v / nv)
    W = np.column_stack([U[:, :k]] + extra)
    return W @ Vt, True


def project_to_orthonormal(blocks):
    """Per-class Procrustes projection of a ``(C, d, s)`` stack.

    Returns ``(projected, n_completed)`` where ``n_completed`` counts blocks
    that were rank deficient.
    """
    out = np.empty_like(np.asarray(blocks, dtype=np.float64))
    completed = 0
    for i, X in enumerate(blocks):
        out[i], flag = polar_factor(X)
        completed += flag
    return out, completed


def pseudo_inverse(Y, rtol=RANK_RTOL):
    """Moore-Penrose inverse via SVD, dropping singular values below ``rtol * max``."""
    U, sv, Vt = np.linalg.svd(Y, full_matrices=False)
    k = numerical_rank(sv, rtol)
    return (Vt[:k].T / sv[:k]) @ U[:, :k].T


def response_objective(G, G_hat, Y_pinv):
    """``|(G - G_hat) Y^+|_F^2``, the distance of feature banks seen through the data."""
    D = (G - G_hat) @ Y_pinv
    return float(np.sum(D * D))


def response_gradient(G, G_hat, Y_pinv):
    """Gradient ``2 (G - G_hat) Y^+ (Y^+)^T`` of :func:`response_objective`."""
    return 2.0 * ((G - G_hat) @ Y_pinv) @ Y_pinv.T


def _step_size(policy, G, grad):
    gn = np.linalg.norm(grad)
    if gn == 0:
        return 0.0
    if policy == "conservative":
        return np.linalg.norm(G) / (20.0 * gn)
    return 1.0 / gn


def project_to_response_set(blocks, data, cfg, Y_pinv=None):
    """Approximate projection of a bank onto the response constraint set.

    Runs forward-backward splitting on the response grid starting from the
    projection of ``G_hat = F^T Y`` and returns the bank ``F_mu = (G Y^+)^T``
    of the best iterate found, together with the objective trace.

    Parameters
    ----------
    blocks : ndarray, shape (C, d, s)
    data : ClassDataset
        Should have full row rank (run :func:`qr_reduce` first).
    cfg : TrainConfig
    Y_pinv : ndarray, optional
        Precomputed pseudo-inverse of ``data.matrix``.
    """
    Y = data.matrix
    if Y_pinv is None:
        Y_pinv = pseudo_inverse(Y)
    C, d, s = blocks.shape
    col_class = data.column_classes
    beta, mu = cfg.beta, cfg.mu
    policy = cfg.resolved_step_policy

    F = blocks.transpose(1, 0, 2).reshape(d, C * s)
    G_hat = F.T @ Y

    def prox(V):
        return project_grid_values(V, s, col_class, cfg.p, beta, mu)

    G = prox(G_hat)
    f = response_objective(G, G_hat, Y_pinv)
    trace = [f]
    best_G, best_f = G, f
    for it in range(1, cfg.inner_max_iters + 1):
        if f == 0.0:
            break
        grad = response_gradient(G, G_hat, Y_pinv)
        gamma = _step_size(policy, G, grad)
        if gamma == 0.0:
            break
        G_new = prox(G - gamma * grad)
        f_new = response_objective(G_new, G_hat, Y_pinv)
        if not (np.isfinite(f_new) and np.all(np.isfinite(G_new))):
            raise TrainingError(f"non-finite iterate in inner iteration {it}")
        trace.append(f_new)
        improvement = (f - f_new) / f
        G, f = G_new, f_new
        if f < best_f:
            best_G, best_f = G, f
        if improvement < cfg.inner_tol:
            break
    F_mu = (best_G @ Y_pinv).T
    return F_mu.reshape(d, C, s).transpose(1, 0, 2), trace


def response_feasibility(bank_blocks, data, p, beta, mu):
    """Worst within-class deficit and worst without-class excess over the data."""
    C, d, s = bank_blocks.shape
    col_class = data.column_classes
    F = bank_blocks.transpose(1, 0, 2).reshape(d, C * s)
    R = (F.T @ data.matrix).reshape(C, s, -1)
    norms = np.stack([column_pnorms(R[i], p) for i in range(C)])
    own = np.arange(C)[:, None] == col_class[None, :]
    deficit = float(np.max(np.abs(norms[own] - beta)))
    excess = float(np.max(np.maximum(norms[~own] - mu, 0.0), initial=0.0))
    return deficit, excess


def train(data, cfg):
    """Alternate between the two constraint sets and keep the closest pair.

    ``data`` should be column-normalised and QR-reduced. Returns the
    stored orthonormal bank (as a :class:`FeatureBank`) and a
    :class:`TrainReport`.
    """
    d, C, s = data.dim, data.n_classes, cfg.s
    if s > d:
        raise ValueError(f"s={s} exceeds the signal dimension d={d}")
    report = TrainReport()
    if C > 1 and s * C > d:
        msg = (f"s*C={s * C} exceeds d={d}: class subspaces must overlap, "
               f"grassmann bound {grassmann_bound(s, d, C):.4g}")
        warnings.warn(msg, stacklevel=2)
        report.warnings.append(msg)

    Y_pinv = pseudo_inverse(data.matrix)
    F_s = init_features(data, s)
    best = F_s
    for k in range(1, cfg.outer_iters + 1):
        F_mu, trace = project_to_response_set(F_s, data, cfg, Y_pinv)
        report.inner_objective_traces.append(trace)
        dist = float(np.linalg.norm(F_s - F_mu))
        report.distance_trace.append(dist)
        if dist < report.best_distance:
            report.best_distance, best = dist, F_s
        F_s, completed = project_to_orthonormal(F_mu)
        report.completed_blocks += completed
        dist = float(np.linalg.norm(F_s - F_mu))
        report.distance_trace.append(dist)
        if dist < report.best_distance:
            report.best_distance, best = dist, F_s
        log.debug("outer %d: distances %.6g %.6g, %d inner steps",
                  k, report.distance_trace[-2], dist, len(trace) - 1)
    if report.completed_blocks:
        report.warnings.append(
            f"{report.completed_blocks} rank-deficient block(s) completed deterministically")

    report.within_deficit, report.without_excess = response_feasibility(
        best, data, cfg.p, cfg.beta, cfg.mu)
    return FeatureBank(best, cfg.p, list(data.labels)), report


def fit(data, cfg):
    """Normalise, QR-reduce, train and lift back to the original space.

    Returns ``(bank, report, reduction)``.
    """
    data = normalize_columns(data)
    if cfg.s > data.dim:
        raise ValueError(f"s={cfg.s} exceeds the signal dimension d={data.dim}")
    red, reduced = qr_reduce(data)
    if cfg.s > reduced.dim:
        raise ValueError(
            f"s={cfg.s} exceeds the rank {reduced.dim} of the training data")
    bank, report = train(reduced, cfg)
    return lift_features(red, bank), report, red
