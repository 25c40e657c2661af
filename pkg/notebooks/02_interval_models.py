# %% [markdown]
# # Interval models
#
# A model counts white-key intervals per finger context. Finer contexts
# back off to coarser ones when a context was never seen.

# %%
import warnings

from glovelearn.labeling import build_dataset
from glovelearn.models import fit_interval_model, interval_distribution, predict_interval, transition_matrix
from glovelearn.simgen import generate_score, render_sensors

seqs = [build_dataset(render_sensors(generate_score(tier, 200, seed=3, octaves=2 if tier == "scales" else 1)))
        for tier in ("scales", "menuet", "improv_pred")]
with warnings.catch_warnings():
    warnings.simplefilter("ignore")  # improv intervals beyond the support are dropped
    models = {fs: fit_interval_model(seqs, fs) for fs in ("delta_f", "pair", "pair_tu")}

# %% [markdown]
# The same finger move can mean different intervals. Finger 3 to 1 is +1
# when the thumb passes under but a plain -2 otherwise; only pair_tu keeps
# them apart. Likewise delta_f pools 5->3 with every other -2 finger move.

# %%
contexts = [(3, 1, True), (3, 1, False), (5, 3, False), (2, 4, False)]
for fs, m in models.items():
    print(f"{fs:8s}", [predict_interval(m, *c) for c in contexts])

# %%
m = models["pair_tu"]
p = interval_distribution(m, (3, 1, True))
print({int(d): round(float(x), 3) for d, x in zip(m.intervals, p) if x > 0.05})

# %% [markdown]
# Rows of the finger-difference transition matrix (finger differences seen in training).

# %%
deltas, mat = transition_matrix(m)
for d, row in zip(deltas, mat):
    if d not in m.tables["delta_f"]:
        continue
    print(f"{d:+d}", "argmax interval", int(m.intervals[row.argmax()]), "p", round(float(row.max()), 2))

# %% [markdown]
# Unseen contexts fall back down the chain, ending at the finger difference.

# %%
empty_pair = next((a, b) for a in range(1, 6) for b in range(1, 6) if (a, b) not in models["pair"].counts)
print(empty_pair, "->", predict_interval(models["pair"], *empty_pair))
