# %% [markdown]
# # Decode a performance
#
# Pressure triggers become notes; the first note is the reference key and each
# later note moves by the predicted interval.

# %%
from glovelearn.core import white_index_to_midi
from glovelearn.decode import DecoderConfig, decode_performance, notes_to_events
from glovelearn.evaluation import decode_transition_accuracy
from glovelearn.labeling import build_dataset
from glovelearn.models import fit_interval_model, fit_tu_classifier
from glovelearn.sessionio import normalize_flex, read_midi_records, write_midi_records
from glovelearn.simgen import generate_score, render_sensors

train = build_dataset(render_sensors(generate_score("scales", 300, 1, octaves=2)))
im = fit_interval_model(train, "pair_tu")
tc = fit_tu_classifier(train)

test = render_sensors(generate_score("scales", 30, 2, octaves=2))
truth = build_dataset(test)
notes = decode_performance(normalize_flex(test.sensors), im, tc, DecoderConfig(reference_note=truth[0].white_index))

# %%
for note in notes[:10]:
    print(f"{note.t_on:6.3f}s finger {note.finger} tu {int(note.tu)} -> midi {white_index_to_midi(note.white_index)} vel {note.velocity}")
print("transition accuracy:", decode_transition_accuracy(notes, truth))

# %% [markdown]
# The play output is a stream of (millisecond delta, 3 MIDI bytes) records.

# %%
blob = write_midi_records(notes_to_events(notes))
print(len(blob), "bytes")
print(read_midi_records(blob)[:4])
