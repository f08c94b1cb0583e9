"""Agreement scoring, localization, satisfaction counting, revision loop."""

from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rubriclearn.corpus import Artifact, CommentInstance
from rubriclearn.downstream import (
    count_satisfied_items,
    h_mean,
    localize_rubric,
    run_revision_experiment,
    score_rubric_agreement,
)
from rubriclearn.errors import EvaluationError
from rubriclearn.gateway import Gateway, MockEntry, MockProvider
from rubriclearn.journal import Journal
from rubriclearn.rubric import Criterion, Rubric

from conftest import make_gateway


def learned_rubric(n=3):
    return Rubric(
        round=4,
        criteria=tuple(
            Criterion(
                text=f"LearnedCriterionText-{k}. Example pair 1: Target: \"t\" Comment: \"c\".",
                points=-1,
            )
            for k in range(n)
        ),
    )


REFERENCE = ["Covers topic A.", "Covers topic B.", "Covers topic C."]


def agreement_response(recall, precision):
    return json.dumps(
        {"recall_score": recall, "precision_score": precision, "reasoning": "because"}
    )


def verdicts_response(flags):
    return json.dumps(
        {"verdicts": [{"satisfied": bool(f), "justification": "j"} for f in flags]}
    )


class TestHMean:
    def test_all_integer_pairs(self):
        for r in range(11):
            for p in range(11):
                expected = 0.0 if r + p == 0 else 2 * r * p / (r + p)
                assert h_mean(r, p) == pytest.approx(expected)

    def test_zero_zero_convention(self):
        assert h_mean(0, 0) == 0.0

    @given(st.integers(0, 10), st.integers(0, 10))
    @settings(max_examples=121, deadline=None)
    def test_symmetry_and_bounds(self, r, p):
        assert h_mean(r, p) == pytest.approx(h_mean(p, r))
        assert min(r, p) - 1e-9 <= h_mean(r, p) <= max(r, p) + 1e-9


class TestAgreement:
    def test_full_agreement(self):
        gw = make_gateway([MockEntry(tag="agree", response=agreement_response(10, 10))])
        result = score_rubric_agreement(gw, REFERENCE, learned_rubric())
        assert (result.recall, result.precision) == (10, 10)
        assert result.h_mean == pytest.approx(10.0)
        assert result.reasoning == "because"

    @pytest.mark.parametrize("score", range(1, 11))
    def test_equal_scores_give_same_h_mean(self, score):
        gw = make_gateway([MockEntry(tag="agree", response=agreement_response(score, score))])
        result = score_rubric_agreement(gw, REFERENCE, learned_rubric())
        assert result.h_mean == pytest.approx(score)

    def test_out_of_range_rejected_after_reask(self):
        gw = make_gateway([MockEntry(tag="agree", response=agreement_response(11, 5))])
        from rubriclearn.errors import SchemaViolationError

        with pytest.raises(SchemaViolationError):
            score_rubric_agreement(gw, REFERENCE, learned_rubric())


class TestLocalization:
    def _items(self, indices):
        return json.dumps(
            {
                "items": [
                    {"source_index": i, "criterion": f"local-{i}", "points": -1,
                     "tags": [], "reasoning": "r"}
                    for i in indices
                ],
                "reasoning": "overall",
            }
        )

    def test_expansion_allowed(self):
        gw = make_gateway(
            [MockEntry(tag="localize", response=self._items([0, 0, 1, 2, 2, 2, 1]))]
        )
        items = localize_rubric(gw, learned_rubric(3), "Some task prompt.")
        assert len(items) == 7

    def test_out_of_range_dropped_with_warning(self, caplog):
        gw = make_gateway([MockEntry(tag="localize", response=self._items([0, 9]))])
        with caplog.at_level("WARNING"):
            items = localize_rubric(gw, learned_rubric(3), "Prompt.")
        assert len(items) == 1
        assert "source_index" in caplog.text

    def test_all_invalid_is_error(self):
        gw = make_gateway([MockEntry(tag="localize", response=self._items([7, 8, 9]))])
        with pytest.raises(EvaluationError, match="no items"):
            localize_rubric(gw, learned_rubric(3), "Prompt.")


class TestCountSatisfied:
    def test_seven_of_ten(self):
        items = [f"item {i}" for i in range(10)]
        flags = [1, 1, 1, 1, 1, 1, 1, 0, 0, 0]
        gw = make_gateway([MockEntry(tag="judge", response=verdicts_response(flags))])
        count, verdicts = count_satisfied_items(gw, "artifact text", items)
        assert count == 7
        assert len(verdicts) == 10

    def test_zero_of_n(self):
        gw = make_gateway([MockEntry(tag="judge", response=verdicts_response([0, 0, 0]))])
        count, _ = count_satisfied_items(gw, "text", REFERENCE)
        assert count == 0

    def test_misalignment_reask_then_error(self):
        gw = make_gateway([MockEntry(tag="judge", response=verdicts_response([1]))])
        with pytest.raises(EvaluationError, match="misaligned"):
            count_satisfied_items(gw, "text", REFERENCE)

    def test_misalignment_recovered_on_reask(self):
        entries = [
            MockEntry(tag="judge", response=verdicts_response([1]), uses=1),
            MockEntry(tag="judge", response=verdicts_response([1, 0, 1])),
        ]
        gw = make_gateway(entries)
        count, _ = count_satisfied_items(gw, "text", REFERENCE)
        assert count == 2

    def test_count_bounded_by_items(self):
        gw = make_gateway([MockEntry(tag="judge", response=verdicts_response([1, 1, 1]))])
        count, _ = count_satisfied_items(gw, "text", REFERENCE)
        assert 0 <= count <= len(REFERENCE)


def artifact(artifact_id="draft-1", body="Original draft body alpha."):
    return Artifact(
        artifact_id=artifact_id,
        body=body,
        comments=(
            CommentInstance(
                artifact_id=artifact_id, index=0, target_quote="body", reference_comment="c"
            ),
        ),
    )


class TestRevisionExperiment:
    def test_identity_revision_delta_zero(self):
        original = artifact()
        entries = [
            MockEntry(tag="revise", response=original.body),
            MockEntry(tag="judge", response=verdicts_response([1, 0, 0])),
        ]
        journal = Journal()
        gw = Gateway(MockProvider(entries), journal, backoff_base=0)
        result = run_revision_experiment(
            gw, [original], {"best_val": learned_rubric()}, REFERENCE, rounds=3
        )
        trace = result.traces[0]
        assert trace.delta == 0
        assert trace.before == trace.after == 1
        assert len(trace.revised_texts) == 3
        assert result.summaries["best_val"].rendered == "+0.00 ± 0.00"

    def test_scripted_improvement_delta(self):
        original = artifact()
        entries = [
            MockEntry(tag="revise", contains="alpha", response="Improved draft beta."),
            MockEntry(tag="revise", contains="beta", response="Improved draft gamma."),
            MockEntry(tag="revise", contains="gamma", response="Final draft delta."),
            MockEntry(tag="judge", contains="alpha", response=verdicts_response([1, 0, 0])),
            MockEntry(tag="judge", contains="delta", response=verdicts_response([1, 1, 1])),
        ]
        gw = make_gateway(entries)
        result = run_revision_experiment(
            gw, [original], {"best_val": learned_rubric()}, REFERENCE, rounds=3
        )
        trace = result.traces[0]
        assert (trace.before, trace.after, trace.delta) == (1, 3, 2)
        assert result.summaries["best_val"].rendered == "+2.00 ± 0.00"

    def test_per_repeat_std(self):
        original = artifact()
        entries = [
            MockEntry(tag="revise", response="Rewritten draft."),
            MockEntry(tag="judge", lane="repeat=0", contains="Original",
                      response=verdicts_response([0, 0, 0])),
            MockEntry(tag="judge", lane="repeat=0", contains="Rewritten",
                      response=verdicts_response([1, 1, 1])),
            MockEntry(tag="judge", lane="repeat=1", contains="Original",
                      response=verdicts_response([0, 0, 0])),
            MockEntry(tag="judge", lane="repeat=1", contains="Rewritten",
                      response=verdicts_response([1, 0, 0])),
        ]
        gw = make_gateway(entries)
        result = run_revision_experiment(
            gw, [original], {"initial": learned_rubric()}, REFERENCE, rounds=1, repeats=2
        )
        summary = result.summaries["initial"]
        assert summary.per_repeat_deltas == (3.0, 1.0)
        assert summary.rendered == "+2.00 ± 1.00"

    def test_empty_revision_retried_then_failed(self):
        original = artifact()
        entries = [
            MockEntry(tag="revise", response=""),
            MockEntry(tag="judge", response=verdicts_response([1, 0, 0])),
        ]
        gw = make_gateway(entries)
        result = run_revision_experiment(
            gw, [original], {"initial": learned_rubric()}, REFERENCE, rounds=3
        )
        assert result.traces[0].failed
        assert "initial" not in result.summaries

    def test_empty_then_recovered(self):
        original = artifact()
        entries = [
            MockEntry(tag="revise", response="", uses=1),
            MockEntry(tag="revise", response="Recovered text."),
            MockEntry(tag="judge", contains="Original", response=verdicts_response([0, 0, 0])),
            MockEntry(tag="judge", contains="Recovered", response=verdicts_response([1, 0, 0])),
        ]
        gw = make_gateway(entries)
        result = run_revision_experiment(
            gw, [original], {"initial": learned_rubric()}, REFERENCE, rounds=1
        )
        assert not result.traces[0].failed
        assert result.traces[0].delta == 1

    def test_no_rubric_journal_free_of_rubric_text(self):
        original = artifact()
        rubric = learned_rubric()
        entries = [
            MockEntry(tag="revise", response=original.body),
            MockEntry(tag="judge", response=verdicts_response([1, 1, 0])),
        ]
        journal = Journal()
        gw = Gateway(MockProvider(entries), journal, backoff_base=0)
        run_revision_experiment(gw, [original], {"no_rubric": None}, REFERENCE, rounds=2)
        payload = json.dumps(journal.records)
        assert "LearnedCriterionText" not in payload

    def test_before_counted_once_per_artifact_per_repeat(self):
        original = artifact()
        rubric = learned_rubric()
        entries = [
            MockEntry(tag="revise", response=original.body),
            MockEntry(tag="judge", response=verdicts_response([1, 0, 0])),
        ]
        journal = Journal()
        gw = Gateway(MockProvider(entries), journal, backoff_base=0)
        run_revision_experiment(
            gw, [original], {"no_rubric": None, "best_val": rubric}, REFERENCE, rounds=1
        )
        judge_calls = [
            r for r in journal.records if r["event"] == "chat_request" and r["tag"] == "judge"
        ]
        # 1 shared "before" + 1 "after" per condition.
        assert len(judge_calls) == 3

    def test_empty_reference_rejected(self):
        gw = make_gateway([])
        with pytest.raises(EvaluationError, match="reference"):
            run_revision_experiment(gw, [artifact()], {"no_rubric": None}, [], rounds=3)
