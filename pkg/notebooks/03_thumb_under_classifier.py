# %% [markdown]
# # Thumb-under classifier
#
# One logistic regression per finger reads the normalized thumb-flex window
# that precedes the note. The thumb dips before it passes under.

# %%
import numpy as np

from glovelearn.evaluation import split_session
from glovelearn.labeling import build_dataset
from glovelearn.models import fit_tu_classifier, predict_tu
from glovelearn.simgen import TU_DIP, NoiseParams, generate_score, render_sensors


def run(flex_sigma):
    train, dev = [], []
    for seed, tier in enumerate(["scales", "scales_rand", "menuet", "improv_pred"]):
        score = generate_score(tier, 400, seed, octaves=2 if tier == "scales" else 1)
        a, b = split_session(build_dataset(render_sensors(score, NoiseParams(flex_sigma=flex_sigma, seed=seed))))
        train.append(a)
        dev.append(b)
    clf = fit_tu_classifier(train)
    acc = np.mean([predict_tu(clf, e.finger, e.flex_window)[0] == e.tu for s in dev for e in s])
    return clf, acc


# %%
for frac in (0.0, 0.1, 0.3, 0.6):
    clf, acc = run(frac * TU_DIP)
    print(f"flex noise {frac:.1f} x dip: held-out accuracy {acc:.3f}, trained fingers {clf.trained}")

# %% [markdown]
# The thumb classifier puts most weight on the samples just before onset.

# %%
clf, _ = run(0.3 * TU_DIP)
print(np.round(clf.weights[0], 2))
