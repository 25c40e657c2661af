# %% [markdown]
# # Complexity tiers vs feature spaces
#
# The full pipeline: simulate every tier, split 80/20, train on the combined
# train splits and score each dev split.

# %%
import tempfile
from pathlib import Path

from glovelearn.evaluation import run_pipeline

out = Path(tempfile.mkdtemp())
report = run_pipeline({"notes_per_tier": 500, "noise": "moderate"}, out)
print((out / "accuracy_table.csv").read_text())

# %% [markdown]
# Predicted thumb-under accuracy per finger on the dev splits.

# %%
for finger, entry in report["tu_dev_accuracy"].items():
    print(finger, round(entry["accuracy"], 3), entry["count"])

# %% [markdown]
# Swapping in the true thumb-under labels shows how much the classifier costs.

# %%
oracle = run_pipeline({"notes_per_tier": 500, "noise": "moderate", "oracle_tu": True}, Path(tempfile.mkdtemp()))
for fs in ("pair", "pair_tu"):
    print(fs, round(report["feature_spaces"][fs]["tier_average"], 3),
          round(oracle["feature_spaces"][fs]["tier_average"], 3))
