"""Train the feature-matching GAN and the plain conditional GAN on the
two-Gaussian benchmark set, then compare generated minority statistics.

Uses 200 epochs so the conditional means are visibly learned; expect roughly
half a minute of runtime.
"""

import numpy as np

from imbench import TrainingConfig, generate_minority, oversample_to_balance, train_cgan, train_sdg_gan
from imbench.bench import synth_dataset
from imbench.data import imbalance_stats

train = synth_dataset(n_minority=100, n_majority=400, n_features=8, separation=0.3, seed=0)
true_minority_mean = train.features[train.labels == 1].mean(axis=0)
print(f"true minority mean ~= {true_minority_mean.mean():.3f} per feature\n")

config = TrainingConfig(epochs=200)
for name, trainer in (("sdg-gan", train_sdg_gan), ("cgan", train_cgan)):
    model = trainer(train, config, seed=2)
    d0, g0 = model.loss_history[0]
    d1, g1 = model.loss_history[-1]
    rows = generate_minority(model, 500, seed=3)
    err = np.abs(rows.mean(axis=0) - true_minority_mean).max()
    print(f"{name}:")
    print(f"  losses epoch 0 -> {config.epochs - 1}: d {d0:.3f} -> {d1:.3f}, g {g0:.3f} -> {g1:.3f}")
    print(f"  generated minority mean {rows.mean():.3f}, worst per-feature error {err:.3f}")

    aug = oversample_to_balance(model, train, seed=5)
    print(f"  oversample_to_balance added {aug.n_synthetic} rows -> IR 1:{imbalance_stats(aug.data).ratio:.1f}\n")
