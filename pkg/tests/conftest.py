import numpy as np
import pytest

from incoherent_subspaces.core import ClassDataset


def l1_ball_oracle(h, mu):
    """Sort-based Euclidean projection onto the l1 ball (simplex route)."""
    h = np.asarray(h, dtype=float)
    if np.abs(h).sum() <= mu:
        return h.copy()
    if mu == 0:
        return np.zeros_like(h)
    u = np.sort(np.abs(h))[::-1]
    css = np.cumsum(u)
    k = np.arange(1, u.size + 1)
    rho = np.nonzero(u * k > css - mu)[0][-1]
    theta = (css[rho] - mu) / (rho + 1.0)
    return np.sign(h) * np.maximum(np.abs(h) - theta, 0.0)


def pnorm(v, p):
    v = np.abs(np.asarray(v, dtype=float))
    if p == np.inf:
        return v.max(axis=-1)
    return (v ** p).sum(axis=-1) ** (1.0 / p)


def feasible_candidates(rng, m, p, mode, radius, n, around=None):
    """``n`` random points on the p-sphere (equality) or in the p-ball (inequality).

    Half are global random draws; if ``around`` is given the other half are
    small perturbations of it pushed back into the set.
    """
    n_local = n // 2 if around is not None else 0
    V = rng.standard_normal((n - n_local, m))
    if n_local:
        scale = rng.uniform(1e-4, 1e-1, size=(n_local, 1))
        V = np.vstack([V, around + scale * rng.standard_normal((n_local, m))])
    nrm = pnorm(V, p)[:, None]
    nrm[nrm == 0] = 1.0
    if mode == "equality":
        return radius * V / nrm
    t = rng.uniform(0, 1, size=(n - n_local, 1))
    glob = t * radius * V[: n - n_local] / nrm[: n - n_local]
    loc = V[n - n_local:]
    ln = nrm[n - n_local:]
    loc = np.where(ln > radius, radius * loc / ln, loc)
    return np.vstack([glob, loc])


def orthonormal(rng, d, s):
    Q, R = np.linalg.qr(rng.standard_normal((d, s)))
    return Q * np.sign(np.diagonal(R))


def planted_dataset(rng, bases, n_per_class, noise=0.0):
    """Unit-norm signals from given orthonormal class bases."""
    classes = []
    for F in bases:
        Y = F @ rng.standard_normal((F.shape[1], n_per_class))
        if noise:
            Y = Y + noise * rng.standard_normal(Y.shape)
        classes.append(Y / np.linalg.norm(Y, axis=0))
    return ClassDataset(classes, [f"k{i}" for i in range(len(bases))])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def criterion(request):
    """Print one PASS/FAIL line per acceptance criterion, even under capture."""
    reporter = request.config.pluginmanager.get_plugin("terminalreporter")
    state = {}

    def record(number, title, detail=""):
        state.update(number=number, title=title, detail=detail)

    def detail(text):
        state["detail"] = text

    record.detail = detail
    yield record
    rep = getattr(request.node, "rep_call", None)
    ok = rep is not None and rep.passed
    line = (f"[acceptance {state.get('number', '?'):>2}] {'PASS' if ok else 'FAIL'} "
            f"{state.get('title', request.node.name)}")
    if state.get("detail"):
        line += f" ({state['detail']})"
    if reporter is not None:
        reporter.write_line(line)
    else:
        print(line)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep
