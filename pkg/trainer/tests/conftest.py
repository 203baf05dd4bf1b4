import json
import random

import pytest

from summtrain.data import load_train_file
from summtrain.training import TrainConfig, train

# Pseudo-words keep the tests language-neutral and collision-free.
WORD_POOL = ["kavora", "midel", "sorat", "pelin", "dumo", "ratga", "visel",
             "nopra", "tiga", "lemus", "bont", "haris", "veld", "okin",
             "sarpu", "gimel"]


def _synth_rows(count: int, seed: int) -> list[dict]:
    rng = random.Random(seed)
    rows = []
    for i in range(count):
        key = rng.choice(WORD_POOL)
        summary = " ".join(rng.sample(WORD_POOL, rng.randint(2, 4)))
        docs = [
            {"text": " ".join(rng.sample(WORD_POOL, 6)) + f" {key}",
             "label": "evidential", "rank": 1},
            {"text": " ".join(rng.sample(WORD_POOL, 8)),
             "label": "irrelevant", "rank": 2},
        ]
        rows.append({"id": f"t{i:02d}", "question": f"what about {key}",
                     "documents": docs, "summary": summary,
                     "teacher": "toy", "mode": "evidential_only"})
    return rows


@pytest.fixture(scope="session")
def synth_train_file(tmp_path_factory):
    """32 distillation examples over the pseudo-word pool, as a JSONL file."""
    path = tmp_path_factory.mktemp("data") / "train.jsonl"
    with open(path, "w", encoding="utf-8") as fh:
        for row in _synth_rows(32, seed=7):
            fh.write(json.dumps(row) + "\n")
    return path


@pytest.fixture(scope="session")
def toy_checkpoint(synth_train_file, tmp_path_factory):
    """One trained checkpoint shared by the serving tests."""
    examples = load_train_file(synth_train_file)
    out_dir = tmp_path_factory.mktemp("run")
    return train(examples, out_dir, TrainConfig(steps=50, seed=1, lr=1e-2))
