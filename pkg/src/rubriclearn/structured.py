"""Structured-output extraction from model text.

``extract_json`` finds the first top-level JSON object in a raw response
(skipping code fences and surrounding prose), parses it, and validates it
against one of the known response schemas. No local repair beyond that: a
malformed response is the caller's cue to re-ask, never to fabricate
structure.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import NoJsonFoundError, SchemaViolationError
from .rubric import Criterion, criterion_from_dict
from .errors import RubricError

SCHEMA_IDS = (
    "inferred_rubrics",
    "comments",
    "comment_scores",
    "localized_items",
    "agreement",
    "satisfaction",
)


@dataclass(frozen=True)
class GeneratedComment:
    position_index: int
    target_quote: str
    comment: str
    issue_type: str | None = None
    violated_criteria: tuple = ()


@dataclass(frozen=True)
class PairScore:
    content_score: int
    reasoning: str = ""


@dataclass(frozen=True)
class LocalizedItem:
    source_index: int
    criterion: str
    points: int
    tags: tuple[str, ...] = ()
    reasoning: str = ""


@dataclass(frozen=True)
class AgreementScores:
    recall_score: int
    precision_score: int
    reasoning: str = ""


@dataclass(frozen=True)
class SatisfactionVerdict:
    satisfied: bool
    justification: str = ""


def first_json_object(text: str) -> str:
    """Return the substring of the first parseable top-level JSON object.

    Scans for ``{``, bracket-matches with string/escape awareness, and
    validates the candidate with the JSON parser; on failure the scan resumes
    at the next opening brace, which also skips braces inside prose or fences.
    """
    start = text.find("{")
    while start != -1:
        depth = 0
        in_string = False
        escaped = False
        for i in range(start, len(text)):
            ch = text[i]
            if in_string:
                if escaped:
                    escaped = False
                elif ch == "\\":
                    escaped = True
                elif ch == '"':
                    in_string = False
            elif ch == '"':
                in_string = True
            elif ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    candidate = text[start : i + 1]
                    try:
                        json.loads(candidate)
                    except json.JSONDecodeError:
                        break
                    return candidate
        start = text.find("{", start + 1)
    raise NoJsonFoundError("no top-level JSON object found in model output")


def _require(raw: dict, key: str, path: str):
    if key not in raw:
        raise SchemaViolationError(f"missing required key {path}.{key}", path=f"{path}.{key}")
    return raw[key]


def _require_str(raw: dict, key: str, path: str, allow_empty: bool = False) -> str:
    value = _require(raw, key, path)
    if not isinstance(value, str) or (not allow_empty and not value):
        raise SchemaViolationError(
            f"{path}.{key} must be a non-empty string", path=f"{path}.{key}"
        )
    return value


def _require_int(value, path: str) -> int:
    if isinstance(value, bool):
        raise SchemaViolationError(f"{path} must be an integer", path=path)
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    raise SchemaViolationError(f"{path} must be an integer (got {value!r})", path=path)


def _require_score(value, path: str) -> int:
    score = _require_int(value, path)
    if not (0 <= score <= 10):
        raise SchemaViolationError(f"{path} out of range [0, 10] (got {score})", path=path)
    return score


def _parse_inferred_rubrics(raw: dict) -> list[Criterion]:
    items = _require(raw, "inferred_rubrics", "$")
    if not isinstance(items, list) or not items:
        raise SchemaViolationError(
            "$.inferred_rubrics must be a non-empty array", path="$.inferred_rubrics"
        )
    criteria = []
    for k, item in enumerate(items):
        try:
            criteria.append(criterion_from_dict(item, path=f"$.inferred_rubrics[{k}]"))
        except RubricError as exc:
            raise SchemaViolationError(str(exc), path=f"$.inferred_rubrics[{k}]") from exc
    return criteria


def _parse_comments(raw: dict) -> list[GeneratedComment]:
    items = _require(raw, "comments", "$")
    if not isinstance(items, list):
        raise SchemaViolationError("$.comments must be an array", path="$.comments")
    out = []
    for k, item in enumerate(items):
        path = f"$.comments[{k}]"
        if not isinstance(item, dict):
            raise SchemaViolationError(f"{path} must be an object", path=path)
        position_index = _require_int(_require(item, "position_index", path), f"{path}.position_index")
        comment = _require_str(item, "comment", path)
        target_quote = item.get("target_quote", "")
        if not isinstance(target_quote, str):
            raise SchemaViolationError(f"{path}.target_quote must be a string", path=path)
        issue_type = item.get("issue_type")
        if issue_type is not None and not isinstance(issue_type, str):
            raise SchemaViolationError(f"{path}.issue_type must be a string", path=path)
        cited = item.get("violated_criteria", [])
        if not isinstance(cited, list):
            raise SchemaViolationError(f"{path}.violated_criteria must be an array", path=path)
        out.append(
            GeneratedComment(
                position_index=position_index,
                target_quote=target_quote,
                comment=comment,
                issue_type=issue_type,
                violated_criteria=tuple(cited),
            )
        )
    return out


def _parse_comment_scores(raw: dict) -> list[PairScore]:
    items = _require(raw, "comment_scores", "$")
    if not isinstance(items, list):
        raise SchemaViolationError("$.comment_scores must be an array", path="$.comment_scores")
    out = []
    for k, item in enumerate(items):
        path = f"$.comment_scores[{k}]"
        if not isinstance(item, dict):
            raise SchemaViolationError(f"{path} must be an object", path=path)
        score = _require_score(_require(item, "content_score", path), f"{path}.content_score")
        reasoning = item.get("reasoning", "")
        if not isinstance(reasoning, str):
            raise SchemaViolationError(f"{path}.reasoning must be a string", path=path)
        out.append(PairScore(content_score=score, reasoning=reasoning))
    return out


def _parse_localized_items(raw: dict) -> tuple[list[LocalizedItem], str]:
    items = _require(raw, "items", "$")
    if not isinstance(items, list):
        raise SchemaViolationError("$.items must be an array", path="$.items")
    out = []
    for k, item in enumerate(items):
        path = f"$.items[{k}]"
        if not isinstance(item, dict):
            raise SchemaViolationError(f"{path} must be an object", path=path)
        source_index = _require_int(_require(item, "source_index", path), f"{path}.source_index")
        criterion = _require_str(item, "criterion", path)
        points = _require_int(item.get("points", 0), f"{path}.points")
        tags = item.get("tags", [])
        if not isinstance(tags, list) or not all(isinstance(t, str) for t in tags):
            raise SchemaViolationError(f"{path}.tags must be an array of strings", path=path)
        reasoning = item.get("reasoning", "")
        if not isinstance(reasoning, str):
            raise SchemaViolationError(f"{path}.reasoning must be a string", path=path)
        out.append(
            LocalizedItem(
                source_index=source_index,
                criterion=criterion,
                points=points,
                tags=tuple(tags),
                reasoning=reasoning,
            )
        )
    overall = raw.get("reasoning", "")
    if not isinstance(overall, str):
        raise SchemaViolationError("$.reasoning must be a string", path="$.reasoning")
    return out, overall


def _parse_agreement(raw: dict) -> AgreementScores:
    recall = _require_score(_require(raw, "recall_score", "$"), "$.recall_score")
    precision = _require_score(_require(raw, "precision_score", "$"), "$.precision_score")
    reasoning = raw.get("reasoning", "")
    if not isinstance(reasoning, str):
        raise SchemaViolationError("$.reasoning must be a string", path="$.reasoning")
    return AgreementScores(recall_score=recall, precision_score=precision, reasoning=reasoning)


def _parse_satisfaction(raw: dict) -> list[SatisfactionVerdict]:
    items = _require(raw, "verdicts", "$")
    if not isinstance(items, list):
        raise SchemaViolationError("$.verdicts must be an array", path="$.verdicts")
    out = []
    for k, item in enumerate(items):
        path = f"$.verdicts[{k}]"
        if not isinstance(item, dict):
            raise SchemaViolationError(f"{path} must be an object", path=path)
        satisfied = _require(item, "satisfied", path)
        if not isinstance(satisfied, bool):
            raise SchemaViolationError(f"{path}.satisfied must be a boolean", path=path)
        justification = item.get("justification", "")
        if not isinstance(justification, str):
            raise SchemaViolationError(f"{path}.justification must be a string", path=path)
        out.append(SatisfactionVerdict(satisfied=satisfied, justification=justification))
    return out


_PARSERS = {
    "inferred_rubrics": _parse_inferred_rubrics,
    "comments": _parse_comments,
    "comment_scores": _parse_comment_scores,
    "localized_items": _parse_localized_items,
    "agreement": _parse_agreement,
    "satisfaction": _parse_satisfaction,
}


def extract_json(raw_text: str, schema_id: str):
    """Extract and validate the first JSON object in ``raw_text``.

    Returns the schema's typed value; raises NoJsonFoundError or
    SchemaViolationError (naming the offending key) otherwise.
    """
    if schema_id not in _PARSERS:
        raise ValueError(f"unknown schema_id {schema_id!r}; expected one of {SCHEMA_IDS}")
    payload = first_json_object(raw_text)
    raw = json.loads(payload)
    if not isinstance(raw, dict):
        raise SchemaViolationError("top-level JSON value must be an object", path="$")
    return _PARSERS[schema_id](raw)
