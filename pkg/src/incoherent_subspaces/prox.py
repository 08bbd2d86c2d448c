"""Euclidean projections onto p-norm spheres and balls, p in {1, 2, inf}.

Every projection acts on the last axis, so a ``(k, m)`` array is treated as
``k`` independent vectors of length ``m``.
"""

from dataclasses import dataclass

import numpy as np

from .core import INF, ResponseGrid, as_norm_tag


def _arr(h):
    return np.array(h, dtype=np.float64, copy=True, ndmin=1)


def _signs(h):
    # sign with sign(0) = +1
    return np.where(h < 0, -1.0, 1.0)


def project_l2_sphere(h, beta):
    """Nearest point with ``|g|_2 = beta``; the zero vector maps to ``beta e_1``."""
    g = _arr(h)
    nrm = np.linalg.norm(g, axis=-1, keepdims=True)
    zero = nrm[..., 0] == 0
    safe = np.where(nrm == 0, 1.0, nrm)
    g = beta * g / safe
    if np.any(zero):
        g[zero] = 0.0
        g[zero, 0] = beta
    return g


def project_l2_ball(h, mu):
    g = _arr(h)
    nrm = np.linalg.norm(g, axis=-1, keepdims=True)
    scale = np.where(nrm > mu, mu / np.where(nrm == 0, 1.0, nrm), 1.0)
    return g * scale


def project_l1_ball(h, mu):
    """Nearest point with ``|g|_1 <= mu``.

    Vectors outside the ball are shrunk iteratively: every step subtracts the
    current excess ``(|g|_1 - mu)`` spread evenly over the non-zero entries
    and clips at zero. An entry can only reach zero once, so at most ``m``
    steps are needed.
    """
    g = _arr(h)
    sign = np.sign(g)
    a = np.abs(g)
    l1 = a.sum(axis=-1)
    out = l1 > mu
    if mu <= 0:
        a[out] = 0.0
        return sign * a
    if not np.any(out):
        return g
    work = a[out]
    live = np.ones(work.shape[0], dtype=bool)
    for _ in range(work.shape[-1]):
        rows = work[live]
        nnz = np.count_nonzero(rows, axis=-1)
        lam = (rows.sum(axis=-1) - mu) / nnz
        rows = np.maximum(rows - lam[:, None], 0.0)
        work[live] = rows
        # a row is finished once a step zeroes no further entry
        live[live] = np.count_nonzero(rows, axis=-1) != nnz
        if not np.any(live):
            break
    a[out] = work
    return sign * a


def project_l1_sphere(h, beta):
    """Nearest point with ``|g|_1 = beta``.

    Inside the ball every entry is pushed outward by the same amount, in the
    direction of its sign (zeros count as positive). Outside the ball this is
    the l1-ball projection, which already lands on the sphere.
    """
    g = _arr(h)
    l1 = np.abs(g).sum(axis=-1)
    m = g.shape[-1]
    inside = l1 <= beta
    if np.any(inside):
        lam = (beta - l1[inside]) / m
        g[inside] = g[inside] + _signs(g[inside]) * lam[..., None]
    if not np.all(inside):
        g[~inside] = project_l1_ball(g[~inside], beta)
    return g


def project_linf_ball(h, mu):
    return np.clip(_arr(h), -mu, mu)


def project_linf_sphere(h, beta):
    """Nearest point with ``|g|_inf = beta``.

    The first entry of largest magnitude is set to ``+-beta`` (keeping its
    sign, zero counts as positive); the others are clipped to ``[-beta, beta]``.
    """
    g = _arr(h)
    imax = np.argmax(np.abs(g), axis=-1)
    picked = np.take_along_axis(g, imax[..., None], axis=-1)
    g = np.clip(g, -beta, beta)
    np.put_along_axis(g, imax[..., None], _signs(picked) * beta, axis=-1)
    return g


_SPHERE = {1.0: project_l1_sphere, 2.0: project_l2_sphere, INF: project_linf_sphere}
_BALL = {1.0: project_l1_ball, 2.0: project_l2_ball, INF: project_linf_ball}


@dataclass(frozen=True)
class ProxSpec:
    """One column problem: sphere (``equality``) or ball (``inequality``)."""

    p: float
    mode: str
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "p", as_norm_tag(self.p))
        if self.mode not in ("equality", "inequality"):
            raise ValueError(f"mode must be 'equality' or 'inequality', got {self.mode!r}")
        if self.radius < 0:
            raise ValueError("radius must be non-negative")
        if self.mode == "equality" and self.radius == 0:
            raise ValueError("sphere radius must be positive")

    def __call__(self, h):
        return project(h, self.p, self.mode, self.radius)


def project(h, p, mode, radius):
    """Dispatch to the sphere or ball projection for norm tag ``p``."""
    p = as_norm_tag(p)
    table = _SPHERE if mode == "equality" else _BALL
    return table[p](h, radius)


def project_grid_values(values, rank, col_class, p, beta, mu):
    """Array version of :func:`project_grid`.

    ``values`` is ``(C s) x N``; ``col_class[n]`` is the class of column ``n``.
    Diagonal-block columns go to the sphere of radius ``beta``, the rest to
    the ball of radius ``mu``.
    """
    p = as_norm_tag(p)
    values = np.asarray(values, dtype=np.float64)
    N = values.shape[1]
    C = values.shape[0] // rank
    # (C, N, s): one length-s vector per (feature block, column)
    H = values.reshape(C, rank, N).transpose(0, 2, 1).copy()
    own = np.arange(C)[:, None] == np.asarray(col_class)[None, :]
    H[own] = _SPHERE[p](H[own], beta)
    if np.any(~own):
        H[~own] = _BALL[p](H[~own], mu)
    return H.transpose(0, 2, 1).reshape(C * rank, N)


def project_grid(grid, p, beta, mu):
    """Project every column of every block of a :class:`ResponseGrid`."""
    vals = project_grid_values(grid.values, grid.rank, grid.column_classes, p, beta, mu)
    return ResponseGrid(vals, grid.rank, grid.sizes)
