"""Deterministic prompt assembly for every pipeline step.

Builders are pure functions of their typed inputs: no clock, randomness, or
environment reads. Identical inputs produce identical bytes, which the
snapshot tests pin. Layout constants (indent widths, section headers,
numbering bases) are part of the external contract.
"""

from __future__ import annotations

import textwrap
from dataclasses import dataclass
from typing import Sequence

from . import prompt_text
from .corpus import Artifact, CommentInstance
from .errors import RubricLearnError
from .rubric import Criterion, Rubric

NO_CRITERIA_SENTINEL = "(no criteria provided)"
CONTEXT_SNIPPET_CHARS = 160


class PromptError(RubricLearnError):
    pass


@dataclass(frozen=True)
class PromptBundle:
    system_text: str
    user_text: str
    schema_id: str | None
    tag: str


@dataclass(frozen=True)
class JudgePair:
    """One (reference, generated) comment pair sharing a target quote."""

    target_quote: str
    reference_comment: str
    generated_comment: str
    reference_issue_type: str | None = None
    generated_issue_type: str | None = None


@dataclass(frozen=True)
class RetrievedExample:
    """A retrieved in-context example rendered into the RAG prompt."""

    comment: str
    quote: str
    similarity: float


@dataclass(frozen=True)
class SlotRoundEntry:
    """One round's outcome for one comment slot (newest rendered first)."""

    round: int
    generated_comment: str
    cited_ids: tuple[str, ...]
    content_score: int | None
    judge_reasoning: str


@dataclass(frozen=True)
class SlotHistory:
    target_quote: str
    reference_comment: str
    rounds: tuple[SlotRoundEntry, ...]


@dataclass(frozen=True)
class CaseFeedback:
    """One case's (artifact's) refinement feedback bundle."""

    artifact_id: str
    prompt: str | None
    body: str
    slots: tuple[SlotHistory, ...]
    content_mean: float | None


def _prompt_or_none(prompt: str | None) -> str:
    return prompt if prompt else "(none)"


def _criterion_line(k: int, criterion: Criterion, prefix: str, indent: str) -> str:
    return f"{indent}{prefix}{k}. [{criterion.points}] {criterion.text}"


def _criteria_block(rubric: Rubric, indent: str = "  ", round_prefix: bool = False) -> str:
    prefix = f"R{rubric.round}." if round_prefix else ""
    return "\n".join(
        _criterion_line(k, c, prefix, indent) for k, c in enumerate(rubric.criteria)
    )


def _position_line(j: int, instance: CommentInstance) -> str:
    line = f'  {j}. target_quote: "{instance.target_quote}"'
    if instance.start is not None:
        line += f", start={instance.start}, end={instance.end}"
    return line


def _score_text(mean: float | None) -> str:
    return "n/a" if mean is None else f"{mean:.2f}/10"


def build_rubric_learning_prompt(train_artifacts: Sequence[Artifact]) -> PromptBundle:
    """Prompt that infers the initial rubric from the training comments."""
    artifacts = [a for a in train_artifacts if a.comments]
    if not artifacts:
        raise PromptError("rubric learning needs at least one case with at least one comment")
    total_comments = sum(len(a.comments) for a in artifacts)

    parts = [
        f"Analyze reference comments from {len(artifacts)} cases with a total of "
        f"{total_comments} comments across all artifacts. Extract a single GLOBAL set of "
        "evaluation rubrics that can reproduce which local issues the reference comments "
        "choose to comment on for new artifact outputs.",
        "",
    ]
    for i, artifact in enumerate(artifacts):
        parts.append(f"=== Case {i} (artifact_id: {artifact.artifact_id}) ===")
        parts.append("Question:")
        parts.append(_prompt_or_none(artifact.prompt))
        parts.append("")
        parts.append(f"  --- Artifact {i} ---")
        parts.append(textwrap.indent(artifact.body, "  "))
        parts.append("")
        parts.append(f"  Comments ({len(artifact.comments)} issues):")
        for j, comment in enumerate(artifact.comments):
            parts.append(f'      {j}. Target: "{comment.target_quote}"')
            parts.append(f"         Comment: {comment.reference_comment}")
        parts.append("")
    parts.append(
        "Based on the reference comments across ALL cases and artifacts, what set of rubrics "
        "would best reproduce the reference-comment patterns for new artifact outputs? Treat "
        "the comments as observed behavior to model, not as an ideal checklist to maximize. "
        "Ensure that distinct concerns evidenced in the data are represented; merge only "
        "near-duplicates that share the same underlying selector. Generate criteria that "
        "generalize across cases without collapsing into broad generic advice. Make each "
        "criterion self-contained and put the useful detail inside `criterion`; leave "
        "`reasoning` as an empty string."
    )
    return PromptBundle(
        system_text=prompt_text.RUBRIC_LEARNING_SYSTEM,
        user_text="\n".join(parts),
        schema_id="inferred_rubrics",
        tag="learn",
    )


def _generation_user_text(
    artifact: Artifact,
    positions: Sequence[CommentInstance],
    rubric: Rubric | None,
    retrieved: Sequence[Sequence[RetrievedExample]] | None = None,
) -> str:
    if not positions:
        raise PromptError("generation needs at least one position")
    parts = [
        "## Conversation:",
        _prompt_or_none(artifact.prompt),
        "",
        "## Artifact Being Reviewed:",
        artifact.body,
        "",
    ]
    if rubric is not None and len(rubric) > 0:
        parts.append(f"## Evaluation Criteria ({len(rubric)} criteria):")
        parts.append(_criteria_block(rubric))
    else:
        parts.append("## Evaluation Criteria (0 criteria):")
        parts.append(f"  {NO_CRITERIA_SENTINEL}")
    parts.append("")
    parts.append(f"## Positions Requiring Comments ({len(positions)} positions):")
    for j, instance in enumerate(positions):
        parts.append(_position_line(j, instance))
    parts.append("")

    if retrieved is not None:
        if len(retrieved) != len(positions):
            raise PromptError(
                f"retrieved-neighbor groups ({len(retrieved)}) must match positions "
                f"({len(positions)})"
            )
        parts.append("## Retrieved Comments from Reference Data:")
        for j, (instance, neighbors) in enumerate(zip(positions, retrieved)):
            if not neighbors:
                raise PromptError(f"position {j} has no retrieved neighbors")
            parts.append(f"### Position {j}")
            parts.append(f'  target_quote: "{instance.target_quote}"')
            for r, ex in enumerate(neighbors, start=1):
                parts.append(
                    f'    {r}. retrieved comment: "{ex.comment}", '
                    f'target_quote: "{ex.quote}", similarity={ex.similarity:.4f}'
                )
        parts.append("")

    if rubric is not None and len(rubric) > 0:
        parts.append(
            "For EACH position above, write a feedback comment about the issue at that "
            "location, guided by the evaluation criteria. Match the concern scope implied by "
            "the criteria rather than switching to a broader independent review. You MUST "
            f"return exactly {len(positions)} comments, one per position."
        )
    else:
        parts.append(
            "For EACH position above, write a feedback comment about the issue at that "
            f"location. You MUST return exactly {len(positions)} comments, one per position."
        )
    return "\n".join(parts)


def build_generation_prompt(
    artifact: Artifact,
    positions: Sequence[CommentInstance],
    rubric: Rubric | None,
) -> PromptBundle:
    """Fixed-position comment generation; ``rubric=None`` is the no-rubric ablation."""
    system = (
        prompt_text.GENERATION_SYSTEM
        if rubric is not None and len(rubric) > 0
        else prompt_text.GENERATION_SYSTEM_NO_RUBRIC
    )
    return PromptBundle(
        system_text=system,
        user_text=_generation_user_text(artifact, positions, rubric),
        schema_id="comments",
        tag="generate",
    )


def build_rag_prompt(
    artifact: Artifact,
    positions: Sequence[CommentInstance],
    retrieved: Sequence[Sequence[RetrievedExample]],
) -> PromptBundle:
    """Generation prompt plus retrieved in-context examples (rubric-free)."""
    return PromptBundle(
        system_text=prompt_text.RAG_GENERATION_SYSTEM,
        user_text=_generation_user_text(artifact, positions, None, retrieved=retrieved),
        schema_id="comments",
        tag="generate",
    )


def build_judge_prompt(artifact: Artifact, pairs: Sequence[JudgePair]) -> PromptBundle:
    """Batched content-similarity judging over (reference, generated) pairs."""
    if not pairs:
        raise PromptError("judge prompt needs at least one pair")
    parts = [
        "## Artifact:",
        artifact.body,
        "",
        f"## Comment Pairs ({len(pairs)} pairs):",
    ]
    for i, pair in enumerate(pairs):
        parts.append(f"--- Pair {i} ---")
        parts.append(f'  Location: "{pair.target_quote}"')
        parts.append(f'  Original comment: "{pair.reference_comment}"')
        if pair.reference_issue_type is not None:
            parts.append(f"    issue_type: {pair.reference_issue_type}")
        parts.append(f'  Regenerated comment: "{pair.generated_comment}"')
        if pair.generated_issue_type is not None:
            parts.append(f"    issue_type: {pair.generated_issue_type}")
        parts.append("")
    parts.append("Evaluate each pair on content similarity.")
    return PromptBundle(
        system_text=prompt_text.JUDGE_SYSTEM,
        user_text="\n".join(parts),
        schema_id="comment_scores",
        tag="judge",
    )


def _context_snippet(prompt: str | None) -> str:
    if not prompt:
        return "(none)"
    flat = " ".join(prompt.split())
    return flat[:CONTEXT_SNIPPET_CHARS]


def _slot_round_lines(entry: SlotRoundEntry, indent: str) -> list[str]:
    cited = ", ".join(entry.cited_ids) if entry.cited_ids else "(none)"
    score = "missing" if entry.content_score is None else f"{entry.content_score}/10"
    return [
        f"{indent}Round {entry.round}:",
        f'{indent}  Generated Comment: "{entry.generated_comment}"',
        f"{indent}  Selected Rubrics: {cited}",
        f"{indent}  Content Score: {score}",
        f"{indent}  Judge Reasoning: {entry.judge_reasoning}",
    ]


def _commentwise_feedback(case: CaseFeedback, case_index: int) -> list[str]:
    parts = [
        f"=== Case {case_index} (artifact_id: {case.artifact_id}) ===",
        f"Context snippet: {_context_snippet(case.prompt)}",
        f"  --- Artifact 0 (artifact_id: {case.artifact_id}) ---",
        "  Artifact:",
        case.body,
        "",
        f"  Comment Bundles ({len(case.slots)}):",
    ]
    for s, slot in enumerate(case.slots):
        parts.append(f"    Comment Slot C{s}:")
        parts.append(f'      Target Quote: "{slot.target_quote}"')
        parts.append(f'      GT Comment: "{slot.reference_comment}"')
        for entry in slot.rounds:
            parts.extend(_slot_round_lines(entry, "      "))
    parts.append("")
    return parts


def _fieldwise_feedback(case: CaseFeedback, case_index: int) -> list[str]:
    """Parallel field lists: same information as the per-slot bundles, unpaired."""
    parts = [
        f"=== Case {case_index} (artifact_id: {case.artifact_id}) ===",
        f"Context snippet: {_context_snippet(case.prompt)}",
        f"  --- Artifact 0 (artifact_id: {case.artifact_id}) ---",
        "  Artifact:",
        case.body,
        "",
        f"  Field-Wise Feedback ({len(case.slots)} slots):",
        "    Target Quotes:",
    ]
    for s, slot in enumerate(case.slots):
        parts.append(f'      {s}. "{slot.target_quote}"')
    parts.append("    GT Comments:")
    for s, slot in enumerate(case.slots):
        parts.append(f'      {s}. "{slot.reference_comment}"')

    rounds_present: list[int] = []
    for slot in case.slots:
        for entry in slot.rounds:
            if entry.round not in rounds_present:
                rounds_present.append(entry.round)
    for round_number in rounds_present:
        entries = {
            s: e for s, slot in enumerate(case.slots) for e in slot.rounds if e.round == round_number
        }
        parts.append(f"    Round {round_number} Generated Comments:")
        for s in sorted(entries):
            parts.append(f'      {s}. "{entries[s].generated_comment}"')
        parts.append(f"    Round {round_number} Selected Rubrics:")
        for s in sorted(entries):
            cited = ", ".join(entries[s].cited_ids) if entries[s].cited_ids else "(none)"
            parts.append(f"      {s}. {cited}")
        parts.append(f"    Round {round_number} Content Scores:")
        for s in sorted(entries):
            score = entries[s].content_score
            parts.append(f"      {s}. {'missing' if score is None else f'{score}/10'}")
        parts.append(f"    Round {round_number} Judge Reasonings:")
        for s in sorted(entries):
            parts.append(f"      {s}. {entries[s].judge_reasoning}")
    parts.append("")
    return parts


_REFINEMENT_GUIDANCE = [
    "- Compare each comment slot across rounds before changing a criterion.",
    "- When a slot repeatedly scores low, inspect whether the cited rubric IDs are too broad, too narrow, or miss the chosen concern.",
    "- Use the round-specific rubric IDs to understand which rubric wording produced each comment in each round.",
    "- Repair selector boundaries before adding a new criterion.",
    "- Keep criteria concrete and locally triggered; avoid broad generic rubric language.",
    "- Match the original chosen concern, not the broadest possible critique.",
    "- Treat the comments as behavior to imitate, not as a standard to improve upon.",
    "- Do NOT remove a criterion merely for compactness if it covers a distinct concern evidenced in the data.",
    "- Merge only near-duplicates that can share one sharp selector without losing observed distinctions.",
    "- Focus on UNIVERSAL patterns, not case-specific issues.",
    "- Make each revised criterion self-contained and keep `reasoning` as an empty string.",
]


def build_refinement_prompt(
    current_rubric: Rubric,
    prior_rubrics: Sequence[Rubric],
    cases: Sequence[CaseFeedback],
    score_history: Sequence[tuple[int, float | None]],
    fieldwise: bool = False,
) -> PromptBundle:
    """Rubric refinement from judged feedback.

    ``prior_rubrics`` holds at most the three most recent prior-round
    snapshots, newest first. ``fieldwise=True`` renders the ablation layout
    (parallel lists instead of per-slot bundles); everything else is shared.
    """
    if current_rubric.round < 0:
        raise PromptError("current round must be >= 0")
    if len(prior_rubrics) > 3:
        raise PromptError(
            f"history window violation: {len(prior_rubrics)} prior snapshots (max 3)"
        )
    for prior in prior_rubrics:
        if prior.round >= current_rubric.round:
            raise PromptError(
                f"history window violation: snapshot round {prior.round} is not prior to "
                f"round {current_rubric.round}"
            )
    if not cases:
        raise PromptError("refinement needs at least one case of feedback")

    evaluations = sum(len(case.slots) for case in cases)
    scored = [case.content_mean for case in cases if case.content_mean is not None]
    overall = sum(scored) / len(scored) if scored else None

    parts = [
        f"Refine the GLOBAL evaluation rubrics based on fixed-position feedback from "
        f"{len(cases)} artifacts.",
        "",
        f"**Current Round Rubrics (Round {current_rubric.round}, {len(current_rubric)} criteria):**",
        _criteria_block(current_rubric, indent="  ", round_prefix=True),
        "",
        "**Score History:**",
    ]
    for round_number, mean in score_history:
        parts.append(f"  Round {round_number}: Content {_score_text(mean)}")
    parts.append("")
    parts.append("**Prior Round Rubric Snapshots:**")
    if prior_rubrics:
        for prior in prior_rubrics:
            parts.append(f"  Round {prior.round} Rubrics ({len(prior)} criteria):")
            parts.append(_criteria_block(prior, indent="    ", round_prefix=True))
    else:
        parts.append("  (none)")
    parts.append("")
    parts.append(f"**Aggregate Score Summary (across {evaluations} evaluations, {len(cases)} cases):**")
    parts.append(f"  Mean Content Score:  {_score_text(overall)}")
    parts.append("")
    parts.append("**Per-Case Score Breakdown:**")
    for i, case in enumerate(cases):
        parts.append(f"  Case {i}: Content {_score_text(case.content_mean)} (1 artifacts)")
    parts.append("")
    parts.append("**Evaluation Feedback (all artifacts, grouped by case):**")
    render_case = _fieldwise_feedback if fieldwise else _commentwise_feedback
    for i, case in enumerate(cases):
        parts.extend(render_case(case, i))

    if fieldwise:
        parts.append(
            "Based on the field-wise evaluation feedback above, produce refined GLOBAL "
            "rubrics that better capture concerns for ANY artifact."
        )
    else:
        parts.append(
            "Based on the per-comment histories above, produce refined GLOBAL rubrics that "
            "better capture concerns for ANY artifact."
        )
    parts.extend(_REFINEMENT_GUIDANCE)
    return PromptBundle(
        system_text=prompt_text.REFINEMENT_SYSTEM,
        user_text="\n".join(parts),
        schema_id="inferred_rubrics",
        tag="refine",
    )


def build_localization_prompt(global_rubric: Rubric, prompt: str) -> PromptBundle:
    """Specialize a global rubric to one prompt (per-prompt reference settings)."""
    if len(global_rubric) == 0:
        raise PromptError("localization needs a non-empty global rubric")
    if not prompt:
        raise PromptError("localization needs a non-empty prompt")
    parts = [
        f"## Global Rubric ({len(global_rubric)} items):",
        _criteria_block(global_rubric),
        "",
        "## Prompt:",
        prompt,
        "",
        "Produce the LOCAL rubric for this prompt.",
    ]
    return PromptBundle(
        system_text=prompt_text.LOCALIZATION_SYSTEM,
        user_text="\n".join(parts),
        schema_id="localized_items",
        tag="localize",
    )


def _reference_items_block(items: Sequence[str]) -> str:
    return "\n".join(f"  {k}. {text}" for k, text in enumerate(items))


def build_agreement_prompt(
    original_rubric: Sequence[str],
    current_rubric: Rubric,
) -> PromptBundle:
    """Recall/precision agreement judging of a learned rubric against a reference."""
    if not original_rubric:
        raise PromptError("agreement needs a non-empty original rubric")
    if len(current_rubric) == 0:
        raise PromptError("agreement needs a non-empty current rubric")
    parts = [
        f"## ORIGINAL Rubric ({len(original_rubric)} items):",
        _reference_items_block(original_rubric),
        "",
        f"## CURRENT Rubric ({len(current_rubric)} items):",
        _criteria_block(current_rubric),
        "",
        "Judge the agreement between the CURRENT rubric and the ORIGINAL rubric.",
    ]
    return PromptBundle(
        system_text=prompt_text.AGREEMENT_SYSTEM,
        user_text="\n".join(parts),
        schema_id="agreement",
        tag="agree",
    )


def build_revision_prompt(
    artifact_text: str,
    rubric: Rubric | None,
    round_number: int,
    total_rounds: int = 3,
) -> PromptBundle:
    """One revision round; the response is the full revised artifact text."""
    if not (1 <= round_number <= total_rounds):
        raise PromptError(
            f"revision round {round_number} outside [1, {total_rounds}]"
        )
    header = f"## Artifact (revision round {round_number} of {total_rounds}"
    header += ", final round):" if round_number == total_rounds else "):"
    parts = [header, artifact_text, ""]
    if rubric is not None and len(rubric) > 0:
        parts.append(f"## Rubric Criteria ({len(rubric)} criteria):")
        parts.append(_criteria_block(rubric))
        parts.append("")
        parts.append(
            "Revise the artifact so that it satisfies the rubric criteria. "
            "Output only the full revised artifact."
        )
        system = prompt_text.REVISION_SYSTEM
    else:
        parts.append(
            "Revise the artifact to improve its overall quality. "
            "Output only the full revised artifact."
        )
        system = prompt_text.REVISION_SYSTEM_NO_RUBRIC
    return PromptBundle(
        system_text=system,
        user_text="\n".join(parts),
        schema_id=None,
        tag="revise",
    )


def build_satisfaction_prompt(artifact_text: str, items: Sequence[str]) -> PromptBundle:
    """Batched per-item yes/no satisfaction verdicts against a reference rubric."""
    if not items:
        raise PromptError("satisfaction judging needs a non-empty item list")
    parts = [
        "## Artifact:",
        artifact_text,
        "",
        f"## Rubric Items ({len(items)} items):",
        _reference_items_block(items),
        "",
        f"For EACH rubric item above, return a verdict. You MUST return exactly "
        f"{len(items)} verdicts, one per item.",
    ]
    return PromptBundle(
        system_text=prompt_text.SATISFACTION_SYSTEM,
        user_text="\n".join(parts),
        schema_id="satisfaction",
        tag="judge",
    )
