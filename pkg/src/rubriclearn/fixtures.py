"""Built-in fixtures: a deterministic mini corpus plus assembled prompts.

The ``mini`` fixture is an essay-review style corpus with character offsets,
used by ``prompts dump`` and the snapshot tests. Everything here is static
data; the assembled prompts must never change without updating the checked-in
goldens.
"""

from __future__ import annotations

from .corpus import Artifact, CommentInstance, Corpus
from .prompts import (
    CaseFeedback,
    JudgePair,
    PromptBundle,
    RetrievedExample,
    SlotHistory,
    SlotRoundEntry,
    build_agreement_prompt,
    build_generation_prompt,
    build_judge_prompt,
    build_localization_prompt,
    build_rag_prompt,
    build_refinement_prompt,
    build_revision_prompt,
    build_rubric_learning_prompt,
    build_satisfaction_prompt,
)
from .rubric import Criterion, Rubric

PROMPT_FAMILIES = (
    "rubric_learning",
    "generation",
    "judge",
    "refinement",
    "rag",
    "localization",
    "agreement",
)


def mini_corpus() -> Corpus:
    def comment(artifact_id, j, quote, text, start, end):
        return CommentInstance(
            artifact_id=artifact_id,
            index=j,
            target_quote=quote,
            reference_comment=text,
            start=start,
            end=end,
        )

    a1_body = "He go to school. The results was good."
    a2_body = "She like apples. We goes home early."
    a3_body = "They is happy. Yesterday we walk to town."
    artifacts = (
        Artifact(
            artifact_id="mini-1",
            prompt="Write a short essay about your school day.",
            body=a1_body,
            comments=(
                comment("mini-1", 0, "go", "Verb form error: the subject is singular, use 'goes'.", 3, 5),
                comment("mini-1", 1, "was", "Subject-verb agreement: 'results' is plural, use 'were'.", 29, 32),
            ),
        ),
        Artifact(
            artifact_id="mini-2",
            prompt="Write a short essay about food you enjoy.",
            body=a2_body,
            comments=(
                comment("mini-2", 0, "like", "Third-person singular: use 'likes'.", 4, 8),
                comment("mini-2", 1, "goes", "Plural subject takes the base form: use 'go'.", 20, 24),
            ),
        ),
        Artifact(
            artifact_id="mini-3",
            prompt=None,
            body=a3_body,
            comments=(
                comment("mini-3", 0, "is", "Plural subject: use 'are'.", 5, 7),
                comment("mini-3", 1, "walk", "Past-time adverb requires past tense: use 'walked'.", 28, 32),
            ),
        ),
    )
    return Corpus(artifacts=artifacts, source="fixture:mini")


def _criterion(text: str, points: int, tags: tuple[str, ...]) -> Criterion:
    return Criterion(text=text, points=points, tags=tags)


def mini_rubric(round_number: int = 2) -> Rubric:
    criteria = (
        _criterion(
            "Select this when a present-tense verb disagrees with its subject in number "
            "(singular subject with a base-form verb, or plural subject with an -s form). "
            "Point out the agreement error and give the corrected form. Do not select for "
            "tense errors. Example pair 1: Target: \"go\" Comment: \"Verb form error: the "
            "subject is singular, use 'goes'.\"",
            -1,
            ("grammar", "agreement"),
        ),
        _criterion(
            "Select this when a verb's tense conflicts with an explicit time expression in "
            "the same sentence (e.g. a past-time adverb with a present-tense verb). Ask for "
            "the tense that matches the stated time. Do not select for bare agreement "
            "errors. Example pair 1: Target: \"walk\" Comment: \"Past-time adverb requires "
            "past tense: use 'walked'.\"",
            -1,
            ("grammar", "tense"),
        ),
        _criterion(
            "Select this when a sentence is fully correct and idiomatic where nearby "
            "sentences are not; praise the correct usage briefly. Do not select when any "
            "error is present in the sentence. Example pair 1: Target: \"to school\" "
            "Comment: \"Good, natural phrasing here.\"",
            1,
            ("praise",),
        ),
    )
    return Rubric(round=round_number, criteria=criteria, run_id="fixture-mini")


def mini_prior_rubrics() -> list[Rubric]:
    round1 = Rubric(
        round=1,
        criteria=mini_rubric(1).criteria[:2],
        run_id="fixture-mini",
        parent_round=0,
    )
    round0 = Rubric(
        round=0,
        criteria=mini_rubric(0).criteria[:1],
        run_id="fixture-mini",
    )
    return [round1, round0]


def mini_reference_items() -> list[str]:
    return [
        "Comments flag subject-verb agreement errors and give the corrected verb form.",
        "Comments flag tense errors tied to explicit time expressions.",
        "Comments occasionally praise correct usage near repeated errors.",
    ]


def _mini_cases() -> list[CaseFeedback]:
    corpus = mini_corpus()
    a1 = corpus.artifact("mini-1")
    a2 = corpus.artifact("mini-2")
    return [
        CaseFeedback(
            artifact_id=a1.artifact_id,
            prompt=a1.prompt,
            body=a1.body,
            slots=(
                SlotHistory(
                    target_quote="go",
                    reference_comment=a1.comments[0].reference_comment,
                    rounds=(
                        SlotRoundEntry(
                            round=2,
                            generated_comment="The singular subject needs 'goes' here.",
                            cited_ids=("R2.0",),
                            content_score=8,
                            judge_reasoning="Both comments identify the agreement error and correct it.",
                        ),
                        SlotRoundEntry(
                            round=1,
                            generated_comment="This sentence sounds informal.",
                            cited_ids=(),
                            content_score=2,
                            judge_reasoning="The generated comment raises tone, not the agreement error.",
                        ),
                    ),
                ),
                SlotHistory(
                    target_quote="was",
                    reference_comment=a1.comments[1].reference_comment,
                    rounds=(
                        SlotRoundEntry(
                            round=2,
                            generated_comment="'results' is plural, so 'were' fits better.",
                            cited_ids=("R2.0",),
                            content_score=9,
                            judge_reasoning="Same concern and same correction as the reference.",
                        ),
                        SlotRoundEntry(
                            round=1,
                            generated_comment="Consider rephrasing this clause.",
                            cited_ids=("R1.1",),
                            content_score=1,
                            judge_reasoning="Generic rephrasing advice misses the agreement error.",
                        ),
                    ),
                ),
            ),
            content_mean=8.5,
        ),
        CaseFeedback(
            artifact_id=a2.artifact_id,
            prompt=a2.prompt,
            body=a2.body,
            slots=(
                SlotHistory(
                    target_quote="like",
                    reference_comment=a2.comments[0].reference_comment,
                    rounds=(
                        SlotRoundEntry(
                            round=2,
                            generated_comment="Use 'likes' with a third-person singular subject.",
                            cited_ids=("R2.0",),
                            content_score=9,
                            judge_reasoning="Matches the reference concern exactly.",
                        ),
                    ),
                ),
                SlotHistory(
                    target_quote="goes",
                    reference_comment=a2.comments[1].reference_comment,
                    rounds=(
                        SlotRoundEntry(
                            round=2,
                            generated_comment="No comment was produced for this position.",
                            cited_ids=(),
                            content_score=None,
                            judge_reasoning="",
                        ),
                    ),
                ),
            ),
            content_mean=9.0,
        ),
    ]


def _mini_retrieved() -> list[list[RetrievedExample]]:
    return [
        [
            RetrievedExample(
                comment="Third-person singular: use 'likes'.",
                quote="She <<like>> apples.",
                similarity=1.0,
            ),
            RetrievedExample(
                comment="Plural subject takes the base form: use 'go'.",
                quote="We <<goes>> home early.",
                similarity=0.8321,
            ),
            RetrievedExample(
                comment="Plural subject: use 'are'.",
                quote="They <<is>> happy.",
                similarity=0.7644,
            ),
        ],
        [
            RetrievedExample(
                comment="Plural subject: use 'are'.",
                quote="They <<is>> happy.",
                similarity=0.9012,
            ),
            RetrievedExample(
                comment="Third-person singular: use 'likes'.",
                quote="She <<like>> apples.",
                similarity=0.6530,
            ),
            RetrievedExample(
                comment="Past-time adverb requires past tense: use 'walked'.",
                quote="Yesterday we <<walk>> to town.",
                similarity=0.5118,
            ),
        ],
    ]


def build_fixture_prompts(fixture_id: str = "mini") -> dict[str, PromptBundle]:
    """Assemble one prompt per family for the given fixture."""
    if fixture_id != "mini":
        raise KeyError(f"unknown fixture {fixture_id!r}")
    corpus = mini_corpus()
    a1 = corpus.artifact("mini-1")
    rubric = mini_rubric()
    prompts: dict[str, PromptBundle] = {}
    prompts["rubric_learning"] = build_rubric_learning_prompt(corpus.artifacts[:2])
    prompts["generation"] = build_generation_prompt(a1, list(a1.comments), rubric)
    prompts["judge"] = build_judge_prompt(
        a1,
        [
            JudgePair(
                target_quote="go",
                reference_comment=a1.comments[0].reference_comment,
                generated_comment="The singular subject needs 'goes' here.",
                reference_issue_type="harmful_present",
                generated_issue_type="harmful_present",
            ),
            JudgePair(
                target_quote="was",
                reference_comment=a1.comments[1].reference_comment,
                generated_comment="'results' is plural, so 'were' fits better.",
            ),
        ],
    )
    prompts["refinement"] = build_refinement_prompt(
        rubric,
        mini_prior_rubrics(),
        _mini_cases(),
        [(0, 4.0), (1, 5.25), (2, 6.5)],
    )
    prompts["rag"] = build_rag_prompt(a1, list(a1.comments), _mini_retrieved())
    prompts["localization"] = build_localization_prompt(
        mini_rubric(0), "Write a short essay about your school day."
    )
    prompts["agreement"] = build_agreement_prompt(mini_reference_items(), rubric)
    return prompts


def extra_fixture_prompts() -> dict[str, PromptBundle]:
    """Variants beyond the seven dumped families, pinned by test goldens."""
    corpus = mini_corpus()
    a1 = corpus.artifact("mini-1")
    return {
        "generation_no_rubric": build_generation_prompt(a1, list(a1.comments), None),
        "refinement_fieldwise": build_refinement_prompt(
            mini_rubric(),
            mini_prior_rubrics(),
            _mini_cases(),
            [(0, 4.0), (1, 5.25), (2, 6.5)],
            fieldwise=True,
        ),
        "revision": build_revision_prompt(a1.body, mini_rubric(), 3, 3),
        "revision_no_rubric": build_revision_prompt(a1.body, None, 1, 3),
        "satisfaction": build_satisfaction_prompt(a1.body, mini_reference_items()),
    }


def render_prompt_file(bundle: PromptBundle) -> str:
    """Canonical dump format consumed by the snapshot tests."""
    return (
        "=== SYSTEM ===\n"
        + bundle.system_text
        + "\n=== USER ===\n"
        + bundle.user_text
        + "\n"
    )
