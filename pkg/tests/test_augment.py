import math
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ragnoise.augment import (
    CorruptionFailed,
    CorruptorError,
    DistractorPool,
    augment_set,
    corrupt_document,
    draw_outcome,
    stable_hash64,
)
from ragnoise.classify import classify_documents
from ragnoise.models import NoiseKind, Provenance, QueryRecord, RetrievedDocument
from ragnoise.normalize import contains_answer


def classified(qid, answers, texts):
    query = QueryRecord(id=qid, question="q", answers=list(answers))
    docs = [RetrievedDocument(doc_id=f"d{i}", text=t, rank=i) for i, t in enumerate(texts, 1)]
    return classify_documents(query, docs)


POOL = DistractorPool(["London", "Berlin", "Madrid", "Rome", "Oslo"])


class TestStableHash:
    def test_deterministic(self):
        assert stable_hash64("a", 1, "b") == stable_hash64("a", 1, "b")

    def test_order_sensitive(self):
        assert stable_hash64("a", "b") != stable_hash64("b", "a")

    def test_length_prefix_prevents_concatenation_collisions(self):
        assert stable_hash64("ab", "c") != stable_hash64("a", "bc")

    def test_known_value_is_stable(self):
        # Frozen so any later change to the hashing scheme is caught loudly.
        assert stable_hash64("outcome", 13, "q1", 2, 0) == stable_hash64("outcome", 13, "q1", 2, 0)
        assert 0 <= stable_hash64("x") < (1 << 64)


class TestDrawOutcome:
    def test_zero_evidential_forces_zero(self):
        assert draw_outcome("q1", 99, 0) == 0

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            draw_outcome("q1", 1, -1)

    def test_range(self):
        for n in (1, 2, 3, 5):
            for i in range(50):
                assert 0 <= draw_outcome(f"q{i}", 7, n) <= n

    def test_pure_function_of_inputs(self):
        a = [draw_outcome(f"q{i}", 42, 3) for i in range(20)]
        b = [draw_outcome(f"q{i}", 42, 3) for i in range(20)]
        assert a == b

    def test_seed_changes_draws(self):
        a = [draw_outcome(f"q{i}", 1, 3) for i in range(200)]
        b = [draw_outcome(f"q{i}", 2, 3) for i in range(200)]
        assert a != b

    def test_roughly_uniform(self):
        n = 3
        counts = Counter(draw_outcome(f"q{i}", 5, n) for i in range(8000))
        expected = 8000 / (n + 1)
        for outcome in range(n + 1):
            assert math.isclose(counts[outcome], expected, rel_tol=0.10)


class TestDistractorPool:
    def test_dedupes_under_normalization(self):
        pool = DistractorPool(["Paris", "paris", "PARIS!", "London"])
        assert sorted(pool.entries, key=str.lower) == ["London", "Paris"]

    def test_never_proposes_the_span_itself(self):
        got = POOL.propose("capital is [MASK]", "London", seed=3)
        assert "London" not in got

    def test_empty_pool_errors(self):
        pool = DistractorPool(["only"])
        with pytest.raises(CorruptorError):
            pool.propose("x [MASK]", "only", seed=1)

    def test_deterministic_given_seed(self):
        assert POOL.propose("a [MASK]", "Paris", 9) == POOL.propose("a [MASK]", "Paris", 9)


class TestCorruptDocument:
    def _evidential(self, text, answers=("Paris",)):
        rset = classified("qx", answers, [text])
        return rset.documents[0]

    def test_replaces_span_and_relabels(self):
        doc = self._evidential("The capital of France is Paris, and Paris is large.")
        corrupted, (orig, repl) = corrupt_document(doc, ["Paris"], POOL, seed=4)
        assert orig == "Paris"
        assert repl in POOL.entries
        assert "Paris" not in corrupted.doc.text
        assert corrupted.doc.text.count(repl) == 2
        assert corrupted.label.kind is NoiseKind.FACTUAL_ERROR
        assert corrupted.label.provenance is Provenance.AUGMENTED

    def test_result_contains_no_alias(self):
        doc = self._evidential("Paris hosted the games.", answers=("Paris", "City of Light"))
        corrupted, _ = corrupt_document(doc, ["Paris", "City of Light"], POOL, seed=4)
        assert not contains_answer(corrupted.doc.text, ["Paris", "City of Light"])

    def test_non_evidential_rejected(self):
        rset = classified("qx", ["Paris"], ["nothing relevant"])
        with pytest.raises(ValueError):
            corrupt_document(rset.documents[0], ["Paris"], POOL, seed=1)

    def test_other_fields_preserved(self):
        query = QueryRecord(id="q", question="?", answers=["Paris"])
        doc = RetrievedDocument(doc_id="d9", text="Paris stands.", rank=3, title="T", score=0.5)
        rset = classify_documents(query, [doc])
        corrupted, _ = corrupt_document(rset.documents[0], ["Paris"], POOL, seed=1)
        assert corrupted.doc.doc_id == "d9"
        assert corrupted.doc.rank == 3
        assert corrupted.doc.title == "T"
        assert corrupted.doc.score == 0.5

    def test_all_candidates_still_contain_alias_fails(self):
        # Replacing the longest alias still leaves the short alias in the text.
        doc = self._evidential("Tokyo, the City of the East, is huge.",
                               answers=("Tokyo", "City of the East"))
        with pytest.raises(CorruptionFailed):
            corrupt_document(doc, ["Tokyo", "City of the East"], POOL, seed=2)

    def test_candidate_equal_to_alias_skipped(self):
        pool = DistractorPool(["paris!", "Lyon"])
        doc = self._evidential("Paris is the capital.")
        corrupted, (_, repl) = corrupt_document(doc, ["Paris"], pool, seed=6)
        assert repl == "Lyon"


class TestAugmentSet:
    def test_outcome_zero_keeps_documents_identical(self):
        rset = classified("q-none", ["Paris"], ["no answer here", "none here either"])
        aset = augment_set(rset, seed=1, corruptor=POOL)
        assert aset.decision.outcome == 0
        assert aset.decision.n_evidential == 0
        assert aset.decision.corrupted_doc_id is None
        assert [d.doc.text for d in aset.documents] == [d.doc.text for d in rset.documents]

    def test_corruption_targets_mth_evidential_in_rank_order(self):
        texts = ["filler one", "Paris again", "filler two", "Paris the third"]
        rset = classified("q-pick", ["Paris"], texts)
        # Scan seeds for one that draws outcome 2 (the second evidential doc, rank 4).
        seed = next(s for s in range(1000) if draw_outcome("q-pick", s, 2) == 2)
        aset = augment_set(rset, seed=seed, corruptor=POOL)
        assert aset.decision.outcome == 2
        assert aset.decision.corrupted_doc_id == "d4"
        assert aset.documents[3].label.kind is NoiseKind.FACTUAL_ERROR
        assert aset.documents[1].label.kind is NoiseKind.EVIDENTIAL
        assert "Paris" not in aset.documents[3].doc.text

    def test_untouched_documents_are_byte_identical(self):
        texts = ["Paris stands", "irrelevant text", "Paris falls"]
        rset = classified("q-id", ["Paris"], texts)
        seed = next(s for s in range(1000) if draw_outcome("q-id", s, 2) == 1)
        aset = augment_set(rset, seed=seed, corruptor=POOL)
        assert aset.documents[1] is rset.documents[1]
        assert aset.documents[2] is rset.documents[2]

    def test_at_most_one_factual_error(self):
        texts = ["Paris a", "Paris b", "Paris c"]
        for seed in range(30):
            aset = augment_set(classified("q-m", ["Paris"], texts), seed=seed, corruptor=POOL)
            kinds = [d.label.kind for d in aset.documents]
            assert kinds.count(NoiseKind.FACTUAL_ERROR) <= 1

    def test_failure_falls_back_to_outcome_zero(self):
        texts = ["Tokyo, the City of the East, is huge."]
        rset = classified("q-fail", ["Tokyo", "City of the East"], texts)
        seed = next(s for s in range(1000) if draw_outcome("q-fail", s, 1) == 1)
        aset = augment_set(rset, seed=seed, corruptor=POOL)
        assert aset.decision.outcome == 0
        assert aset.decision.failure is not None
        assert aset.decision.corrupted_doc_id is None
        assert aset.documents[0].doc.text == texts[0]

    def test_decision_repeatable(self):
        texts = ["Paris a", "nope", "Paris b"]
        a = augment_set(classified("q-r", ["Paris"], texts), seed=17, corruptor=POOL)
        b = augment_set(classified("q-r", ["Paris"], texts), seed=17, corruptor=POOL)
        assert a.decision == b.decision
        assert [d.doc.text for d in a.documents] == [d.doc.text for d in b.documents]

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2**31), n_docs=st.integers(1, 5))
    def test_outcome_always_in_range(self, seed, n_docs):
        texts = [f"Paris appears in doc {i}" for i in range(n_docs)]
        aset = augment_set(classified("q-h", ["Paris"], texts), seed=seed, corruptor=POOL)
        assert 0 <= aset.decision.outcome <= n_docs
        if aset.decision.outcome == 0:
            assert aset.decision.corrupted_doc_id is None
        else:
            assert aset.decision.corrupted_doc_id is not None
