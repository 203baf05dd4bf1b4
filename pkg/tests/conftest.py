"""Shared fixtures: the toy corpus and its classified/augmented views."""

from __future__ import annotations

import pytest

from pipeharness import TOY_PATH, TOY_SEED
from ragnoise.augment import DistractorPool, augment_set
from ragnoise.classify import classify_documents
from ragnoise.dataio import load_retrieval_dump


@pytest.fixture(scope="session")
def toy_pairs():
    return list(load_retrieval_dump(TOY_PATH, k=5))


@pytest.fixture(scope="session")
def toy_classified(toy_pairs):
    return [classify_documents(q, docs) for q, docs in toy_pairs]


@pytest.fixture(scope="session")
def toy_pool(toy_classified):
    return DistractorPool.from_queries([s.query for s in toy_classified])


@pytest.fixture(scope="session")
def toy_augmented(toy_classified, toy_pool):
    return [augment_set(s, TOY_SEED, toy_pool) for s in toy_classified]
