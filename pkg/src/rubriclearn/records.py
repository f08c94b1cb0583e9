"""Prediction records: one generated comment per position per round.

The record keeps the full per-instance bundle (quote, reference, generation,
score, judge reasoning, cited criteria) so refinement signals can be derived
from it without a second bookkeeping path.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

from .corpus import CommentInstance
from .rubric import CriterionRef, Rubric, parse_criterion_id, render_criterion_id, resolve_cited_ids
from .structured import GeneratedComment

FALLBACK_COMMENT = "No comment was produced for this position."


@dataclass(frozen=True)
class PredictionRecord:
    instance_key: tuple[str, int]
    round: int
    target_quote: str
    reference_comment: str
    generated_comment: str
    cited: tuple[CriterionRef, ...] = ()
    content_score: int | None = None
    judge_reasoning: str = ""
    issue_type: str | None = None
    reference_issue_type: str | None = None
    fallback: bool = False

    def scored(self, content_score: int | None, judge_reasoning: str) -> "PredictionRecord":
        return replace(self, content_score=content_score, judge_reasoning=judge_reasoning)

    def to_dict(self) -> dict:
        return {
            "artifact_id": self.instance_key[0],
            "index": self.instance_key[1],
            "round": self.round,
            "target_quote": self.target_quote,
            "reference_comment": self.reference_comment,
            "generated_comment": self.generated_comment,
            "cited": [render_criterion_id(ref) for ref in self.cited],
            "content_score": self.content_score,
            "judge_reasoning": self.judge_reasoning,
            "issue_type": self.issue_type,
            "reference_issue_type": self.reference_issue_type,
            "fallback": self.fallback,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "PredictionRecord":
        return cls(
            instance_key=(raw["artifact_id"], raw["index"]),
            round=raw["round"],
            target_quote=raw["target_quote"],
            reference_comment=raw["reference_comment"],
            generated_comment=raw["generated_comment"],
            cited=tuple(parse_criterion_id(text) for text in raw.get("cited", [])),
            content_score=raw.get("content_score"),
            judge_reasoning=raw.get("judge_reasoning", ""),
            issue_type=raw.get("issue_type"),
            reference_issue_type=raw.get("reference_issue_type"),
            fallback=raw.get("fallback", False),
        )


@dataclass(frozen=True)
class AlignmentReport:
    """What happened while aligning a generation response to its positions."""

    fallback_count: int = 0
    dropped_cited: tuple = ()
    extra_comments: int = 0


def records_from_generation(
    positions: Sequence[CommentInstance],
    generated: Sequence[GeneratedComment],
    rubric: Rubric | None,
    round_number: int,
) -> tuple[list[PredictionRecord], AlignmentReport]:
    """Align a generation response to its positions, exactly one record each.

    Comments map to positions by ``position_index``; the first valid claim on
    an index wins and out-of-range or duplicate indices are dropped. Omitted
    positions receive a flagged fallback comment. Cited criterion ids resolve
    leniently against the round's rubric (empty rubric drops everything).
    """
    by_index: dict[int, GeneratedComment] = {}
    extra = 0
    for item in generated:
        if 0 <= item.position_index < len(positions) and item.position_index not in by_index:
            by_index[item.position_index] = item
        else:
            extra += 1

    empty_rubric = Rubric(round=round_number, criteria=())
    records: list[PredictionRecord] = []
    fallback_count = 0
    all_dropped: list = []
    for j, instance in enumerate(positions):
        item = by_index.get(j)
        if item is None:
            fallback_count += 1
            records.append(
                PredictionRecord(
                    instance_key=instance.instance_key,
                    round=round_number,
                    target_quote=instance.target_quote,
                    reference_comment=instance.reference_comment,
                    generated_comment=FALLBACK_COMMENT,
                    reference_issue_type=instance.issue_type,
                    fallback=True,
                )
            )
            continue
        cited, dropped = resolve_cited_ids(
            list(item.violated_criteria), rubric if rubric is not None else empty_rubric
        )
        all_dropped.extend(dropped)
        records.append(
            PredictionRecord(
                instance_key=instance.instance_key,
                round=round_number,
                target_quote=instance.target_quote,
                reference_comment=instance.reference_comment,
                generated_comment=item.comment,
                cited=tuple(cited),
                issue_type=item.issue_type,
                reference_issue_type=instance.issue_type,
            )
        )
    report = AlignmentReport(
        fallback_count=fallback_count,
        dropped_cited=tuple(all_dropped),
        extra_comments=extra,
    )
    return records, report


def split_scores(records: Sequence[PredictionRecord]) -> tuple[list[int], int]:
    """Scores present in the records plus the missing count."""
    present = [r.content_score for r in records if r.content_score is not None]
    return present, len(records) - len(present)
