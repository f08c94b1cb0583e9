"""Acceptance criteria, one test per criterion, run against the scripted mock.

Each test prints a PASS line on success so the suite doubles as a checklist:
``pytest tests/test_acceptance.py -v -s``.
"""

from __future__ import annotations

import json
import os
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from rubriclearn.corpus import (
    Artifact,
    CommentInstance,
    Corpus,
    mean_content_score,
    split_corpus,
    validate_split,
)
from rubriclearn.downstream import h_mean, run_revision_experiment
from rubriclearn.fixtures import PROMPT_FAMILIES, build_fixture_prompts, render_prompt_file
from rubriclearn.gateway import EmbeddingRequest, Gateway, MockEntry, MockProvider
from rubriclearn.journal import Journal, read_journal, verify_journal
from rubriclearn.pipeline import PipelineSession, RunConfig, collect_signals, format_mean_std
from rubriclearn.records import split_scores
from rubriclearn.retrieval import (
    EmbeddingIndex,
    IndexEntry,
    build_document_text,
    build_index,
    build_query_text,
    run_top1_baseline,
    top_k,
)
from rubriclearn.rubric import Criterion, Rubric

from conftest import (
    echo_comments_response,
    echo_entries,
    make_corpus,
    scores_response,
)

GOLDEN_DIR = os.path.join(os.path.dirname(__file__), "goldens")


def passed(line: str) -> None:
    print(f"ACCEPTANCE PASS: {line}")


def _echo_session(corpus, rounds, run_dir, journal_path):
    split = split_corpus(corpus, (0.6, 0.2, 0.2), seed=0)
    journal = Journal(journal_path)
    gateway = Gateway(MockProvider(echo_entries(corpus)), journal, backoff_base=0)
    config = RunConfig(mode="commentwise_refine", rounds=rounds, repeats=1)
    return PipelineSession(gateway, corpus, split, config, run_dir=run_dir), journal


class TestCriterion01PipelineRoundTrip:
    def test_three_round_echo_run(self, tmp_path, ten_artifact_corpus):
        started = time.monotonic()
        session_a, journal_a = _echo_session(
            ten_artifact_corpus, 3, tmp_path / "a", tmp_path / "a" / "journal.jsonl"
        )
        result_a = session_a.run_refinement()

        assert len(result_a.round_results) == 4
        for round_result in result_a.round_results:
            assert round_result.train_mean == 10.0
            assert round_result.validation_mean == 10.0
            assert round_result.train_missing == 0
            assert round_result.validation_missing == 0
        assert result_a.best_val_round == 0

        session_b, journal_b = _echo_session(
            ten_artifact_corpus, 3, tmp_path / "b", tmp_path / "b" / "journal.jsonl"
        )
        session_b.run_refinement()
        bytes_a = (tmp_path / "a" / "journal.jsonl").read_bytes()
        bytes_b = (tmp_path / "b" / "journal.jsonl").read_bytes()
        assert bytes_a == bytes_b
        verify_journal(read_journal(tmp_path / "a" / "journal.jsonl"))

        elapsed = time.monotonic() - started
        assert elapsed < 10.0
        passed(
            f"criterion 1: 10.00 means every round, best_val_round=0, "
            f"byte-identical journal replay, {elapsed:.2f}s < 10s"
        )


class TestCriterion02SignalFidelity:
    def test_signals_equal_records_field_for_field(self, tmp_path, ten_artifact_corpus):
        session, _ = _echo_session(
            ten_artifact_corpus, 3, tmp_path / "run", tmp_path / "run" / "journal.jsonl"
        )
        session.run_refinement()

        mismatches = 0
        checked = 0
        for current_round in range(4):
            signals = collect_signals(session.records_by_round, current_round, 3)
            stored = {
                (r.instance_key, r.round): r
                for records in session.records_by_round.values()
                for r in records
            }
            for signal in signals:
                for entry in signal.entries:
                    checked += 1
                    record = stored[(signal.instance_key, entry.round)]
                    fields = (
                        "target_quote",
                        "reference_comment",
                        "generated_comment",
                        "content_score",
                        "judge_reasoning",
                        "cited",
                    )
                    for field in fields:
                        if getattr(entry, field) != getattr(record, field):
                            mismatches += 1
        assert checked > 0
        assert mismatches == 0
        passed(f"criterion 2: {checked} signal entries, 0 field mismatches")


class TestCriterion03HistoryWindow:
    def test_round_five_window_and_round_zero_empty(self, tmp_path, ten_artifact_corpus):
        session, journal = _echo_session(
            ten_artifact_corpus, 6, tmp_path / "run", tmp_path / "run" / "journal.jsonl"
        )
        session.run_refinement()
        refine_requests = [
            r for r in journal.records
            if r["event"] == "chat_request" and r["tag"] == "refine"
        ]
        assert len(refine_requests) == 6

        round5 = refine_requests[5]["user_text"]
        assert "**Current Round Rubrics (Round 5," in round5
        for r in (4, 3, 2):
            assert f"  Round {r} Rubrics (" in round5
        for r in (0, 1, 5, 6):
            assert f"  Round {r} Rubrics (" not in round5

        round0 = refine_requests[0]["user_text"]
        snapshots = round0.split("**Prior Round Rubric Snapshots:**")[1].split("**")[0]
        assert "Rubrics (" not in snapshots
        assert "(none)" in snapshots
        passed("criterion 3: round-5 refinement shows snapshots {4,3,2} only; round 0 none")


class TestCriterion04RetrievalOracle:
    def test_top_k_matches_exhaustive_sort(self):
        rng = np.random.default_rng(2024)
        vectors = rng.normal(size=(200, 32)).astype(np.float32)
        # Exact duplicates force similarity ties.
        for src, dst in ((0, 17), (0, 91), (42, 130)):
            vectors[dst] = vectors[src]
        vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
        entries = [
            IndexEntry(instance_key=("t", i), document_text=f"d{i}", comment=f"c{i}", quote=f"q{i}")
            for i in range(200)
        ]
        index = EmbeddingIndex(entries, vectors, 32)

        for q in range(50):
            raw = rng.normal(size=32)
            if q % 10 == 0:
                raw = vectors[q]  # exact self-match queries included
            query = (raw / np.linalg.norm(raw)).astype(np.float32)
            neighbors = top_k(index, query, 3)
            sims = vectors @ query
            oracle = sorted(range(200), key=lambda i: (-float(sims[i]), i))[:3]
            assert [n.instance_key[1] for n in neighbors] == oracle
            for neighbor, i in zip(neighbors, oracle):
                assert abs(neighbor.similarity - float(sims[i])) < 1e-6
        passed("criterion 4: top_k equals exhaustive-sort oracle on 50 queries with ties")


def _retrieval_corpus_and_entries():
    def one(artifact_id, quote, comment):
        return Artifact(
            artifact_id=artifact_id,
            body=f"Doc {artifact_id} holds {quote}.",
            comments=(
                CommentInstance(
                    artifact_id=artifact_id, index=0,
                    target_quote=quote, reference_comment=comment,
                ),
            ),
        )

    corpus = Corpus(
        artifacts=(
            one("tr-0", "alpha beta", "Train comment alpha."),
            one("tr-1", "gamma delta", "Train comment gamma."),
            one("tr-2", "epsilon zeta", "Train comment epsilon."),
            one("te-0", "alpha beta", "Held-out reference."),
        )
    )
    train_ids = ("tr-0", "tr-1", "tr-2")
    entries = []
    for axis, artifact in enumerate(corpus.subset(train_ids)):
        c = artifact.comments[0]
        vec = [0.0] * 8
        vec[axis] = 1.0
        entries.append(MockEntry(tag="embed", text=build_document_text(c), vector=vec))
        entries.append(MockEntry(tag="embed", text=build_query_text(c), vector=vec))
    for artifact in corpus.artifacts:
        entries.append(
            MockEntry(
                tag="judge",
                contains=f"Doc {artifact.artifact_id}",
                response=scores_response(1, 10),
            )
        )
    return corpus, train_ids, entries


class TestCriterion05BaselinePurity:
    def test_top1_run_journal_and_provenance(self):
        corpus, train_ids, entries = _retrieval_corpus_and_entries()
        journal = Journal()
        gateway = Gateway(MockProvider(entries), journal, backoff_base=0)
        index = build_index(gateway, corpus, train_ids, dimensionality=8)

        records = run_top1_baseline(gateway, index, corpus, ("te-0",))
        scored_count = len(records)
        assert scored_count == 1
        assert records[0].generated_comment == "Train comment alpha."

        generation_calls = [
            r for r in journal.records
            if r["event"] == "chat_request" and r.get("tag") == "generate"
        ]
        assert generation_calls == []
        assert all(e.instance_key[0] in train_ids for e in index.entries)

        query = gateway.embed(
            EmbeddingRequest(build_query_text(corpus.artifact("te-0").comments[0]), 8)
        )
        for neighbor in top_k(index, query, 3):
            assert neighbor.instance_key[0] in train_ids
        passed("criterion 5: zero generation calls, train-only neighbors, verbatim self-match")


class TestCriterion06PromptSnapshots:
    def test_all_seven_families_byte_identical(self):
        prompts = build_fixture_prompts("mini")
        for family in PROMPT_FAMILIES:
            golden_path = os.path.join(GOLDEN_DIR, f"{family}.txt")
            with open(golden_path, encoding="utf-8") as fh:
                golden = fh.read()
            assert render_prompt_file(prompts[family]) == golden, family

        generation = render_prompt_file(prompts["generation"])
        refinement = render_prompt_file(prompts["refinement"])
        rag = render_prompt_file(prompts["rag"])
        assert "exactly 2 comments" in generation
        assert "R2.0." in refinement and "R2.1." in refinement
        assert "<<like>>" in rag and "<<goes>>" in rag
        passed("criterion 6: 7 prompt families match goldens byte-for-byte with markers")


class TestCriterion07Metrics:
    def test_mean_and_std_against_brute_force(self):
        rng = random.Random(808)
        for _ in range(100):
            scores = [rng.uniform(0, 10) for _ in range(rng.randint(1, 200))]
            brute = 0.0
            for s in scores:
                brute += s
            brute /= len(scores)
            assert abs(mean_content_score(scores) - brute) < 1e-12

            repeat_means = [rng.uniform(0, 10) for _ in range(5)]
            mu = sum(repeat_means) / 5
            var = sum((m - mu) ** 2 for m in repeat_means) / 5
            assert format_mean_std(repeat_means) == f"{mu:.2f} ± {var ** 0.5:.2f}"

        with pytest.raises(ValueError):
            mean_content_score([])
        with pytest.raises(ValueError):
            format_mean_std([])
        passed("criterion 7: metrics match brute force to 1e-12; empty sets error")


class TestCriterion08SplitProperty:
    def test_five_hundred_random_corpora(self):
        rng = random.Random(31337)

        def sizes_oracle(n):
            quotas = [Fraction(6, 10) * n, Fraction(2, 10) * n, Fraction(2, 10) * n]
            sizes = [int(q) for q in quotas]
            order = sorted(range(3), key=lambda i: (-(quotas[i] - sizes[i]), i))
            for i in order[: n - sum(sizes)]:
                sizes[i] += 1
            return tuple(sizes)

        for _ in range(500):
            n = rng.randint(1, 180)
            seed = rng.randrange(2**32)
            artifacts = tuple(
                Artifact(artifact_id=f"a{i:03d}", body=f"body {i}") for i in range(n)
            )
            corpus = Corpus(artifacts=artifacts)
            split = split_corpus(corpus, (0.6, 0.2, 0.2), seed=seed)
            validate_split(split, corpus)
            assert split.sizes() == sizes_oracle(n)
            assert split == split_corpus(corpus, (0.6, 0.2, 0.2), seed=seed)
        passed("criterion 8: 500 random (size, seed) splits partition exactly with LR sizes")


class TestCriterion09AgreementMath:
    def test_all_121_pairs(self):
        for r in range(11):
            for p in range(11):
                value = h_mean(r, p)
                if r + p == 0:
                    assert value == 0.0
                else:
                    assert value == pytest.approx(2 * r * p / (r + p), abs=1e-12)
                assert value == pytest.approx(h_mean(p, r), abs=1e-12)
        passed("criterion 9: h_mean exact on all 121 integer pairs, symmetric, h(0,0)=0")


class TestCriterion10RevisionBookkeeping:
    def _artifact(self):
        return Artifact(
            artifact_id="rev-1",
            body="Original low-quality draft omega.",
            comments=(
                CommentInstance(
                    artifact_id="rev-1", index=0, target_quote="draft", reference_comment="c"
                ),
            ),
        )

    def test_identity_and_scripted_deltas(self):
        criterion_text = "SecretRubricCriterionText never in no_rubric journals."
        rubric = Rubric(
            round=1,
            criteria=(Criterion(text=criterion_text + " Example pair: t/c.", points=-1),),
        )
        verdicts_before = json.dumps(
            {"verdicts": [{"satisfied": bool(i < 2), "justification": "j"} for i in range(5)]}
        )
        verdicts_after = json.dumps(
            {"verdicts": [{"satisfied": bool(i < 4), "justification": "j"} for i in range(5)]}
        )
        items = [f"reference item {i}" for i in range(5)]

        # Identity reviser: the revise entry echoes the artifact body.
        journal = Journal()
        gateway = Gateway(
            MockProvider(
                [
                    MockEntry(tag="revise", response="Original low-quality draft omega."),
                    MockEntry(tag="judge", response=verdicts_before),
                ]
            ),
            journal,
            backoff_base=0,
        )
        identity = run_revision_experiment(
            gateway, [self._artifact()], {"no_rubric": None}, items, rounds=3
        )
        assert identity.traces[0].delta == 0
        assert identity.summaries["no_rubric"].rendered == "+0.00 ± 0.00"
        assert "SecretRubricCriterionText" not in json.dumps(journal.records)

        # Scripted improvement: before 2, after 4 -> delta scripted(after-before).
        gateway2 = Gateway(
            MockProvider(
                [
                    MockEntry(tag="revise", response="Rewritten stronger draft."),
                    MockEntry(tag="judge", contains="omega", response=verdicts_before),
                    MockEntry(tag="judge", contains="Rewritten", response=verdicts_after),
                ]
            ),
            Journal(),
            backoff_base=0,
        )
        scripted = run_revision_experiment(
            gateway2, [self._artifact()], {"best_val": rubric}, items, rounds=2
        )
        trace = scripted.traces[0]
        assert (trace.before, trace.after) == (2, 4)
        assert trace.delta == trace.after - trace.before == 2
        assert 0 <= trace.before <= len(items) and 0 <= trace.after <= len(items)
        passed("criterion 10: identity delta 0, scripted delta=after-before, clean journals")


class TestCriterion11FallbackAndAlignment:
    def test_fallback_flag_and_missing_exclusion(self):
        corpus = make_corpus(2, comments_per=4, prefix="fa")
        short_artifact, full_artifact = corpus.artifacts
        partial = json.loads(echo_comments_response(short_artifact))
        partial["comments"] = [c for c in partial["comments"] if c["position_index"] != 2]
        entries = [
            MockEntry(
                tag="generate",
                contains=f"body-token-{short_artifact.artifact_id}",
                response=json.dumps(partial),
            ),
            MockEntry(
                tag="generate",
                contains=f"body-token-{full_artifact.artifact_id}",
                response=echo_comments_response(full_artifact),
            ),
            # Short score list for the first artifact; aligned for the second.
            MockEntry(
                tag="judge",
                contains=f"body-token-{short_artifact.artifact_id}",
                response=scores_response(2, 9),
            ),
            MockEntry(
                tag="judge",
                contains=f"body-token-{full_artifact.artifact_id}",
                response=scores_response(4, 6),
            ),
        ]
        journal = Journal()
        gateway = Gateway(MockProvider(entries), journal, backoff_base=0)
        split = split_corpus(corpus, (1.0, 0.0, 0.0), seed=0)
        session = PipelineSession(
            gateway, corpus, split, RunConfig(mode="commentwise_refine", rounds=0, repeats=1)
        )

        records, failed = session.predict_round(
            [short_artifact.artifact_id, full_artifact.artifact_id], None, 0
        )
        short_records = [r for r in records if r.instance_key[0] == short_artifact.artifact_id]
        assert len(short_records) == 4
        assert sum(r.fallback for r in short_records) == 1
        assert [r.fallback for r in short_records] == [False, False, True, False]

        scored = session.judge_round(records, skip_artifacts=failed)
        short_scored = [r for r in scored if r.instance_key[0] == short_artifact.artifact_id]
        full_scored = [r for r in scored if r.instance_key[0] == full_artifact.artifact_id]
        assert all(r.content_score is None for r in short_scored)
        assert all(r.content_score == 6 for r in full_scored)

        present, missing = split_scores(scored)
        assert missing == 4
        assert mean_content_score(present) == 6.0
        alignment_notes = [
            r for r in journal.records if r.get("note") == "judge_alignment_error"
        ]
        assert len(alignment_notes) == 1
        assert alignment_notes[0]["artifact_id"] == short_artifact.artifact_id
        passed("criterion 11: 1 fallback of 4, short judge list excluded with count 4")


LIVE = os.environ.get("RL_LIVE_SMOKE") == "1"


@pytest.mark.skipif(not LIVE, reason="live smoke is env-gated: set RL_LIVE_SMOKE=1")
class TestCriterion12LiveSmoke:
    def test_one_artifact_one_round(self, tmp_path):
        from rubriclearn.gateway import gateway_from_env

        corpus = make_corpus(1, comments_per=1, prefix="live")
        journal = Journal(tmp_path / "journal.jsonl")
        gateway = gateway_from_env(journal)
        split = split_corpus(corpus, (1.0, 0.0, 0.0), seed=0)
        session = PipelineSession(
            gateway, corpus, split,
            RunConfig(mode="commentwise_refine", rounds=0, repeats=1),
        )
        rubric = session.learn_initial_rubric()
        assert len(rubric) >= 1
        records, failed = session.predict_round(split.train, rubric, 0)
        scored = session.judge_round(records, skip_artifacts=failed)
        for record in scored:
            if record.content_score is not None:
                assert 0 <= record.content_score <= 10
        verify_journal(read_journal(tmp_path / "journal.jsonl"))
        passed("criterion 12: live smoke schema-valid with complete journal")
