"""Prompt assembly: layout rules, purity, and golden snapshots."""

from __future__ import annotations

import hashlib
from pathlib import Path

import pytest

from rubriclearn.corpus import Artifact, CommentInstance
from rubriclearn.fixtures import (
    PROMPT_FAMILIES,
    build_fixture_prompts,
    extra_fixture_prompts,
    mini_corpus,
    mini_rubric,
    render_prompt_file,
)
from rubriclearn.prompts import (
    CaseFeedback,
    JudgePair,
    PromptError,
    RetrievedExample,
    SlotHistory,
    SlotRoundEntry,
    build_generation_prompt,
    build_judge_prompt,
    build_localization_prompt,
    build_rag_prompt,
    build_refinement_prompt,
    build_revision_prompt,
    build_rubric_learning_prompt,
)
from rubriclearn.rubric import Rubric

GOLDEN_DIR = Path(__file__).parent / "goldens"


def _artifact(artifact_id="a", n_comments=2, prompt="Task prompt."):
    comments = tuple(
        CommentInstance(
            artifact_id=artifact_id,
            index=j,
            target_quote=f"quote-{j}",
            reference_comment=f"reference-{j}",
        )
        for j in range(n_comments)
    )
    return Artifact(
        artifact_id=artifact_id,
        body="Body text. " + " ".join(f"Sentence with quote-{j}." for j in range(n_comments)),
        prompt=prompt,
        comments=comments,
    )


def _case(artifact, rounds=(2,)):
    slots = tuple(
        SlotHistory(
            target_quote=c.target_quote,
            reference_comment=c.reference_comment,
            rounds=tuple(
                SlotRoundEntry(
                    round=r,
                    generated_comment=f"gen-{c.index}-r{r}",
                    cited_ids=(f"R{r}.0",),
                    content_score=7,
                    judge_reasoning="close match",
                )
                for r in rounds
            ),
        )
        for c in artifact.comments
    )
    return CaseFeedback(
        artifact_id=artifact.artifact_id,
        prompt=artifact.prompt,
        body=artifact.body,
        slots=slots,
        content_mean=7.0,
    )


class TestLearningPrompt:
    def test_counts_interpolated(self):
        artifacts = [_artifact("a1", 2), _artifact("a2", 1)]
        bundle = build_rubric_learning_prompt(artifacts)
        assert "2 cases" in bundle.user_text
        assert "3 comments" in bundle.user_text

    def test_single_case_block(self):
        bundle = build_rubric_learning_prompt([_artifact("only", 1)])
        assert bundle.user_text.count("=== Case") == 1

    def test_empty_training_set_rejected(self):
        with pytest.raises(PromptError):
            build_rubric_learning_prompt([])

    def test_byte_identity_across_assemblies(self):
        artifacts = [_artifact("a1", 3), _artifact("a2", 2)]
        first = build_rubric_learning_prompt(artifacts)
        second = build_rubric_learning_prompt(artifacts)
        digest = lambda b: hashlib.sha256((b.system_text + b.user_text).encode()).hexdigest()
        assert digest(first) == digest(second)


class TestGenerationPrompt:
    def test_exact_count_demanded(self):
        artifact = _artifact(n_comments=3)
        bundle = build_generation_prompt(artifact, artifact.comments, mini_rubric())
        assert "exactly 3 comments" in bundle.user_text

    def test_offsets_rendered_when_present(self):
        artifact = mini_corpus().artifact("mini-1")
        bundle = build_generation_prompt(artifact, artifact.comments, mini_rubric())
        assert ', start=3, end=5' in bundle.user_text

    def test_offsets_omitted_when_absent(self):
        artifact = _artifact()
        bundle = build_generation_prompt(artifact, artifact.comments, mini_rubric())
        assert "start=" not in bundle.user_text

    def test_no_rubric_sentinel(self):
        artifact = _artifact()
        bundle = build_generation_prompt(artifact, artifact.comments, None)
        assert "(no criteria provided)" in bundle.user_text
        assert "guided by the evaluation criteria" not in bundle.user_text
        assert "identify violated criteria" not in bundle.system_text

    def test_criterion_lines_numbered_with_points(self):
        artifact = _artifact()
        bundle = build_generation_prompt(artifact, artifact.comments, mini_rubric())
        assert "\n  0. [-1] " in bundle.user_text
        assert "\n  2. [1] " in bundle.user_text


class TestJudgePrompt:
    def test_pair_count_header(self):
        artifact = _artifact()
        pairs = [
            JudgePair("q0", "ref", "gen"),
            JudgePair("q1", "ref2", "gen2"),
        ]
        bundle = build_judge_prompt(artifact, pairs)
        assert "Comment Pairs (2 pairs)" in bundle.user_text

    def test_issue_type_line_omitted_when_absent(self):
        artifact = _artifact()
        bundle = build_judge_prompt(artifact, [JudgePair("q", "ref", "gen")])
        assert "issue_type" not in bundle.user_text

    def test_identical_reference_and_generated_still_valid(self):
        artifact = _artifact()
        bundle = build_judge_prompt(artifact, [JudgePair("q", "same text", "same text")])
        assert bundle.user_text.count('"same text"') == 2


class TestRefinementPrompt:
    def test_window_contents(self):
        current = mini_rubric(5)
        priors = [
            Rubric(round=r, criteria=mini_rubric(r).criteria) for r in (4, 3, 2)
        ]
        bundle = build_refinement_prompt(current, priors, [_case(_artifact(), rounds=(5,))], [(5, 6.0)])
        for r in (4, 3, 2):
            assert f"  Round {r} Rubrics (" in bundle.user_text
        assert "  Round 1 Rubrics (" not in bundle.user_text
        assert "  Round 0 Rubrics (" not in bundle.user_text

    def test_round_zero_no_prior_snapshots(self):
        bundle = build_refinement_prompt(
            mini_rubric(0), [], [_case(_artifact(), rounds=(0,))], [(0, 4.0)]
        )
        section = bundle.user_text.split("**Prior Round Rubric Snapshots:**")[1]
        assert section.splitlines()[1].strip() == "(none)"

    def test_window_violation_rejected(self):
        priors = [Rubric(round=r, criteria=mini_rubric(r).criteria) for r in (4, 3, 2, 1)]
        with pytest.raises(PromptError, match="history window"):
            build_refinement_prompt(mini_rubric(5), priors, [_case(_artifact())], [])

    def test_non_prior_snapshot_rejected(self):
        with pytest.raises(PromptError, match="history window"):
            build_refinement_prompt(
                mini_rubric(2),
                [Rubric(round=2, criteria=mini_rubric(2).criteria)],
                [_case(_artifact())],
                [],
            )

    def test_dropped_ids_render_only_valid_refs(self):
        artifact = _artifact(n_comments=1)
        case = CaseFeedback(
            artifact_id=artifact.artifact_id,
            prompt=None,
            body=artifact.body,
            slots=(
                SlotHistory(
                    target_quote="q",
                    reference_comment="ref",
                    rounds=(
                        SlotRoundEntry(
                            round=2,
                            generated_comment="gen",
                            cited_ids=(),
                            content_score=None,
                            judge_reasoning="",
                        ),
                    ),
                ),
            ),
            content_mean=None,
        )
        bundle = build_refinement_prompt(mini_rubric(2), [], [case], [(2, None)])
        assert "Selected Rubrics: (none)" in bundle.user_text
        assert "Content Score: missing" in bundle.user_text

    def test_fieldwise_differs_only_in_user_feedback(self):
        cases = [_case(_artifact(), rounds=(2,))]
        commentwise = build_refinement_prompt(mini_rubric(2), [], cases, [(2, 7.0)])
        fieldwise = build_refinement_prompt(mini_rubric(2), [], cases, [(2, 7.0)], fieldwise=True)
        assert commentwise.system_text == fieldwise.system_text
        assert "Comment Slot C0:" in commentwise.user_text
        assert "Comment Slot" not in fieldwise.user_text
        assert "Field-Wise Feedback" in fieldwise.user_text
        # Same header sections either way.
        for header in ("**Current Round Rubrics", "**Score History:**", "**Per-Case Score Breakdown:**"):
            assert header in fieldwise.user_text and header in commentwise.user_text

    def test_mean_position_score_never_rendered(self):
        bundle = build_refinement_prompt(mini_rubric(2), [], [_case(_artifact())], [(2, 5.0)])
        assert "Mean Position Score" not in bundle.user_text

    def test_signal_rounds_pass_through_exactly(self):
        # Signals spanning rounds 2-4 at t=4 render exactly those histories.
        case = _case(_artifact(), rounds=(4, 3, 2))
        priors = [Rubric(round=3, criteria=mini_rubric(3).criteria)]
        bundle = build_refinement_prompt(mini_rubric(4), priors, [case], [(4, 6.0)])
        feedback = bundle.user_text.split("**Evaluation Feedback")[1]
        for r in (4, 3, 2):
            assert f"      Round {r}:" in feedback
        for r in (0, 1, 5):
            assert f"      Round {r}:" not in feedback


class TestRagPrompt:
    def _retrieved(self, positions, k=3):
        return [
            [
                RetrievedExample(comment=f"c{j}-{r}", quote=f"q{j}-{r}", similarity=1.0 - 0.1 * r)
                for r in range(k)
            ]
            for j in range(len(positions))
        ]

    def test_three_lines_per_position(self):
        artifact = _artifact(n_comments=2)
        bundle = build_rag_prompt(artifact, artifact.comments, self._retrieved(artifact.comments))
        assert bundle.user_text.count("retrieved comment:") == 6

    def test_similarity_four_decimals(self):
        artifact = _artifact(n_comments=1)
        retrieved = [[RetrievedExample(comment="c", quote="q", similarity=1.0)]]
        bundle = build_rag_prompt(artifact, artifact.comments, retrieved)
        assert "similarity=1.0000" in bundle.user_text

    def test_k_one_single_line(self):
        artifact = _artifact(n_comments=2)
        bundle = build_rag_prompt(artifact, artifact.comments, self._retrieved(artifact.comments, k=1))
        assert bundle.user_text.count("retrieved comment:") == 2

    def test_count_mismatch_rejected(self):
        artifact = _artifact(n_comments=2)
        with pytest.raises(PromptError, match="match positions"):
            build_rag_prompt(artifact, artifact.comments, self._retrieved(artifact.comments[:1]))

    def test_system_mentions_retrieval(self):
        artifact = _artifact(n_comments=1)
        bundle = build_rag_prompt(artifact, artifact.comments, self._retrieved(artifact.comments))
        assert "retrieved by similarity" in bundle.system_text
        assert "not" in bundle.system_text.lower() and "verbatim" in bundle.system_text


class TestLocalizationAndAgreement:
    def test_localization_empty_rubric_rejected(self):
        with pytest.raises(PromptError):
            build_localization_prompt(Rubric(round=0, criteria=()), "prompt")

    def test_agreement_scores_schema(self):
        from rubriclearn.prompts import build_agreement_prompt

        bundle = build_agreement_prompt(["ref item"], mini_rubric())
        assert bundle.schema_id == "agreement"
        assert "ORIGINAL Rubric (1 items)" in bundle.user_text


class TestRevisionPrompt:
    def test_no_rubric_has_no_criteria_section(self):
        bundle = build_revision_prompt("text", None, 1, 3)
        assert "Rubric Criteria" not in bundle.user_text
        assert "rubric" not in bundle.system_text.lower()

    def test_rubric_condition_lists_criteria(self):
        bundle = build_revision_prompt("text", mini_rubric(), 1, 3)
        assert "## Rubric Criteria (3 criteria):" in bundle.user_text

    def test_final_round_marker(self):
        bundle = build_revision_prompt("text", mini_rubric(), 3, 3)
        assert "final round" in bundle.user_text
        earlier = build_revision_prompt("text", mini_rubric(), 2, 3)
        assert "final round" not in earlier.user_text

    def test_round_bounds(self):
        with pytest.raises(PromptError):
            build_revision_prompt("text", None, 4, 3)
        with pytest.raises(PromptError):
            build_revision_prompt("text", None, 0, 3)


class TestGoldenSnapshots:
    @pytest.mark.parametrize("family", PROMPT_FAMILIES)
    def test_dumped_families_match_goldens(self, family):
        bundle = build_fixture_prompts("mini")[family]
        golden = (GOLDEN_DIR / f"{family}.txt").read_text(encoding="utf-8")
        assert render_prompt_file(bundle) == golden

    @pytest.mark.parametrize(
        "name",
        sorted(extra_fixture_prompts().keys()),
    )
    def test_variant_prompts_match_goldens(self, name):
        bundle = extra_fixture_prompts()[name]
        golden = (GOLDEN_DIR / f"{name}.txt").read_text(encoding="utf-8")
        assert render_prompt_file(bundle) == golden

    def test_goldens_carry_required_markers(self):
        generation = (GOLDEN_DIR / "generation.txt").read_text(encoding="utf-8")
        refinement = (GOLDEN_DIR / "refinement.txt").read_text(encoding="utf-8")
        rag = (GOLDEN_DIR / "rag.txt").read_text(encoding="utf-8")
        assert "exactly 2 comments" in generation
        assert "R2.0." in refinement
        assert "<<like>>" in rag
