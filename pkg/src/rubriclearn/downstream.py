"""Non-prediction evaluations: rubric agreement and rubric-guided revision.

Agreement judges a learned rubric against a reference rubric on 0-10 recall
and precision (harmonic mean computed locally). Revision rewrites test
artifacts under a rubric condition for a fixed number of rounds and scores
one point per satisfied reference-rubric item, before vs after.
"""

from __future__ import annotations

import logging
import statistics
from dataclasses import dataclass, replace
from typing import Sequence

from .corpus import Artifact
from .errors import EvaluationError, ProviderError
from .gateway import ChatRequest, Gateway
from .prompts import (
    PromptBundle,
    build_agreement_prompt,
    build_localization_prompt,
    build_revision_prompt,
    build_satisfaction_prompt,
)
from .rubric import Rubric
from .structured import LocalizedItem

logger = logging.getLogger(__name__)

REVISION_CONDITIONS = ("no_rubric", "initial", "best_val")


@dataclass(frozen=True)
class AgreementResult:
    recall: int
    precision: int
    h_mean: float
    reasoning: str = ""


@dataclass(frozen=True)
class RevisionTrace:
    artifact_id: str
    condition: str
    repeat: int
    revised_texts: tuple[str, ...]
    before: int
    after: int
    delta: int
    failed: bool = False


@dataclass(frozen=True)
class RevisionConditionSummary:
    condition: str
    per_repeat_deltas: tuple[float, ...]
    mean: float
    std: float
    rendered: str


@dataclass
class RevisionExperimentResult:
    traces: list[RevisionTrace]
    summaries: dict[str, RevisionConditionSummary]


def h_mean(recall: float, precision: float) -> float:
    """Harmonic mean with the h(0, 0) = 0 convention."""
    if recall + precision <= 0:
        return 0.0
    return 2.0 * recall * precision / (recall + precision)


def _request(bundle: PromptBundle, lane: str | None = None, **overrides) -> ChatRequest:
    return ChatRequest(
        system_text=bundle.system_text,
        user_text=bundle.user_text,
        tag=bundle.tag,
        lane=lane,
        **overrides,
    )


def score_rubric_agreement(
    gateway: Gateway,
    reference_items: Sequence[str],
    learned_rubric: Rubric,
    lane: str | None = None,
) -> AgreementResult:
    """One agreement judging call; integer scores validated, h-mean local."""
    bundle = build_agreement_prompt(reference_items, learned_rubric)
    scores, _ = gateway.chat_structured(_request(bundle, lane), bundle.schema_id)
    return AgreementResult(
        recall=scores.recall_score,
        precision=scores.precision_score,
        h_mean=h_mean(scores.recall_score, scores.precision_score),
        reasoning=scores.reasoning,
    )


def localize_rubric(
    gateway: Gateway,
    global_rubric: Rubric,
    prompt: str,
    lane: str | None = None,
) -> list[LocalizedItem]:
    """Specialize a global rubric to one prompt; invalid source indices drop."""
    bundle = build_localization_prompt(global_rubric, prompt)
    (items, _overall), _ = gateway.chat_structured(_request(bundle, lane), bundle.schema_id)
    valid = []
    for item in items:
        if 0 <= item.source_index < len(global_rubric):
            valid.append(item)
        else:
            logger.warning(
                "dropping localized item with out-of-range source_index %d (global size %d)",
                item.source_index,
                len(global_rubric),
            )
    if not valid:
        raise EvaluationError("localization produced no items with valid source indices")
    return valid


def count_satisfied_items(
    gateway: Gateway,
    artifact_text: str,
    reference_items: Sequence[str],
    lane: str | None = None,
) -> tuple[int, list]:
    """Count reference-rubric items the artifact satisfies (batched verdicts).

    The verdict list must align 1:1 with the items; one re-ask on
    misalignment, then the call fails.
    """
    if not reference_items:
        raise EvaluationError("reference rubric must be non-empty")
    bundle = build_satisfaction_prompt(artifact_text, reference_items)
    request = _request(bundle, lane)
    verdicts, _ = gateway.chat_structured(request, bundle.schema_id)
    if len(verdicts) != len(reference_items):
        gateway.journal.append(
            "note",
            note="satisfaction_alignment_error",
            expected=len(reference_items),
            returned=len(verdicts),
        )
        retry = replace(
            request,
            user_text=request.user_text
            + f"\n\nYou MUST return exactly {len(reference_items)} verdicts, one per item.",
        )
        verdicts, _ = gateway.chat_structured(retry, bundle.schema_id)
        if len(verdicts) != len(reference_items):
            raise EvaluationError(
                f"satisfaction verdicts misaligned after re-ask: expected "
                f"{len(reference_items)}, got {len(verdicts)}"
            )
    count = sum(1 for v in verdicts if v.satisfied)
    gateway.journal.append(
        "note",
        note="satisfaction_verdicts",
        satisfied=count,
        total=len(reference_items),
        verdicts=[{"satisfied": v.satisfied, "justification": v.justification} for v in verdicts],
    )
    return count, verdicts


def _revise_once(
    gateway: Gateway,
    text: str,
    rubric: Rubric | None,
    round_number: int,
    total_rounds: int,
    lane: str | None,
) -> str | None:
    """One revision round; returns the revised text or None when it fails."""
    bundle = build_revision_prompt(text, rubric, round_number, total_rounds)
    request = _request(bundle, lane)
    for attempt in range(2):
        try:
            response = gateway.chat(request)
        except ProviderError:
            return None
        revised = response.raw_text.strip()
        if revised:
            return revised
        gateway.journal.append("note", note="empty_revision", attempt=attempt)
    return None


def run_revision_experiment(
    gateway: Gateway,
    artifacts: Sequence[Artifact],
    conditions: dict[str, Rubric | None],
    reference_items: Sequence[str],
    rounds: int = 3,
    repeats: int = 1,
) -> RevisionExperimentResult:
    """Revise each artifact under each condition and score satisfied items.

    The "before" count is computed once per artifact per repeat and reused
    across conditions within that repeat. A condition fails for an artifact
    when a revision round returns nothing twice; failed cells are excluded
    from the condition means.
    """
    if not reference_items:
        raise EvaluationError("revision experiment needs a reference rubric")
    if rounds < 1:
        raise EvaluationError("rounds must be >= 1")

    traces: list[RevisionTrace] = []
    per_condition_repeat: dict[str, list[float]] = {name: [] for name in conditions}
    for repeat in range(repeats):
        before_by_artifact = {
            artifact.artifact_id: count_satisfied_items(
                gateway, artifact.body, reference_items, lane=f"repeat={repeat}"
            )[0]
            for artifact in artifacts
        }
        for condition, rubric in conditions.items():
            deltas: list[int] = []
            for artifact in artifacts:
                lane = f"{condition}:repeat={repeat}"
                text = artifact.body
                revised_texts: list[str] = []
                failed = False
                for round_number in range(1, rounds + 1):
                    revised = _revise_once(gateway, text, rubric, round_number, rounds, lane)
                    if revised is None:
                        failed = True
                        break
                    text = revised
                    revised_texts.append(revised)
                before = before_by_artifact[artifact.artifact_id]
                if failed:
                    traces.append(
                        RevisionTrace(
                            artifact_id=artifact.artifact_id,
                            condition=condition,
                            repeat=repeat,
                            revised_texts=tuple(revised_texts),
                            before=before,
                            after=before,
                            delta=0,
                            failed=True,
                        )
                    )
                    continue
                after, _ = count_satisfied_items(
                    gateway, text, reference_items, lane=f"repeat={repeat}"
                )
                traces.append(
                    RevisionTrace(
                        artifact_id=artifact.artifact_id,
                        condition=condition,
                        repeat=repeat,
                        revised_texts=tuple(revised_texts),
                        before=before,
                        after=after,
                        delta=after - before,
                    )
                )
                deltas.append(after - before)
            if deltas:
                per_condition_repeat[condition].append(sum(deltas) / len(deltas))

    summaries = {}
    for condition, repeat_means in per_condition_repeat.items():
        if not repeat_means:
            logger.warning("condition %r failed for every artifact; no summary", condition)
            continue
        mean = sum(repeat_means) / len(repeat_means)
        std = statistics.pstdev(repeat_means)
        summaries[condition] = RevisionConditionSummary(
            condition=condition,
            per_repeat_deltas=tuple(repeat_means),
            mean=mean,
            std=std,
            rendered=f"{mean:+.2f} ± {std:.2f}",
        )
    return RevisionExperimentResult(traces=traces, summaries=summaries)
