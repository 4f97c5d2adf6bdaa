#!/usr/bin/env python3
"""Train the regression network to reproduce the priority rule, then show
that the learned model transfers to cycles it never saw.

The network is a 14-input multilayer perceptron (10/20/15 hidden units,
Mish activations, single linear output) trained with Adam on
mean-squared error until the loss undercuts 1e-4.
"""

from pathlib import Path

import numpy as np

from testprio.metrics import regression_accuracy
from testprio.net import load_model, predict, save_model
from testprio.pipeline import ExperimentPlan, run_pipeline
from testprio.simulate import PAINT_CONTROL_LIKE, generate_history

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

cycles = generate_history(PAINT_CONTROL_LIKE, seed=42)
plan = ExperimentPlan(dataset=cycles, seed=7, name="paint",
                      strategies=("deeporder",), out_dir=None)
result = run_pipeline(plan)

training = result.training
print(f"architecture {'x'.join(str(d) for d in result.model.net.dims)} "
      f"({result.model.net.parameter_count} parameters)")
print(f"trained for {training.stopped_epoch} epochs ({training.reason}); "
      f"loss {training.epoch_mse[0]:.4f} -> {training.final_mse:.6f}")

preds, labels = result.holdout_pairs
acc = result.holdout
print(f"\nheld-out cycles after the 80% cut: {len(preds)} predictions")
print(f"  mse {acc.mse:.2e}   r_squared {acc.r_squared:.4f}   "
      f"residual std {acc.residual_std:.4f}")

worst = np.argsort(-np.abs(preds - labels))[:3]
print("  three worst predictions (predicted vs labeled):")
for i in worst:
    print(f"    {preds[i]:.4f} vs {labels[i]:.4f}")

# Models persist to a versioned plain-text file and reload bit-exactly.
model_path = OUT / "paint_model.txt"
save_model(result.model, model_path)
reloaded = load_model(model_path)
X = np.random.default_rng(0).uniform(-1, 1, (1000, 14))
assert np.array_equal(predict(result.model.net, X), predict(reloaded.net, X))
print(f"\nsaved to {model_path} and reloaded: predictions bit-identical")

check = regression_accuracy(predict(reloaded.net, np.stack([p for p in X[:50]])),
                            predict(result.model.net, X[:50]))
assert check.mse == 0.0
