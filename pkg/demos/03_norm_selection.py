"""
Choosing the response norm
==========================

Sparse class coefficients suit the linf constraint and flat ones suit l1.
We train both on each kind of data and compare held-out accuracy.
"""

import numpy as np

from incoherent_subspaces import TrainConfig, evaluate, fit
from incoherent_subspaces.data_io import SyntheticSpec, generate_synthetic


def accuracy(model, p, seed):
    spec = SyntheticSpec(classes=10, dim=64, per_class=40, rank=4,
                         coefficient_model=model, noise_sigma=0.15,
                         subspace_coherence=0.3, seed=seed)
    train, test, _ = generate_synthetic(spec)
    bank, _, _ = fit(train, TrainConfig(p=p, s=4, mu_fraction=0.02))
    return evaluate(bank, test).accuracy


for model in ("sparse", "flat"):
    for p in (1, np.inf):
        acc = np.mean([accuracy(model, p, seed) for seed in range(5)])
        print(f"{model:<6} coefficients, p={p}: mean accuracy {acc:.3f}")
