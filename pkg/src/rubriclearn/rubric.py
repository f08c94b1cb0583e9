"""Rubric and criterion values, round-addressed criterion ids, serialization.

Criterion ids are round-specific: ``R{round}.{index}`` addresses the
criterion at ``index`` in the rubric snapshot of ``round``. No identity is
inferred across rounds; refinement always produces a new snapshot.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass

from .errors import RubricError

logger = logging.getLogger(__name__)

_ID_RE = re.compile(r"^R(\d+)\.(\d+)$")
_EXAMPLE_MARKER_RE = re.compile(r"example", re.IGNORECASE)


@dataclass(frozen=True)
class Criterion:
    """One natural-language rubric item.

    ``text`` is self-contained (trigger, concern, exclusion boundary, and at
    least one embedded example pair); ``points`` is a nonzero integer in
    [-10, 10]; ``reasoning`` is always empty on output but kept for schema
    fidelity with provider responses.
    """

    text: str
    points: int
    tags: tuple[str, ...] = ()
    reasoning: str = ""

    def validate(self, path: str = "criterion") -> None:
        if not isinstance(self.text, str) or not self.text.strip():
            raise RubricError(f"{path}.criterion: text must be non-empty")
        if isinstance(self.points, bool) or not isinstance(self.points, int):
            raise RubricError(f"{path}.points: must be an integer")
        if self.points == 0 or abs(self.points) > 10:
            raise RubricError(
                f"{path}.points: must be a nonzero integer in [-10, 10] (got {self.points})"
            )
        if not _EXAMPLE_MARKER_RE.search(self.text):
            # Lenient by design: models vary the marker wording, and the text
            # is only consumed as prompt content downstream.
            logger.warning("%s: no embedded example-pair marker found; keeping criterion", path)


@dataclass(frozen=True)
class Rubric:
    """An immutable rubric snapshot at a refinement round."""

    round: int
    criteria: tuple[Criterion, ...]
    run_id: str | None = None
    parent_round: int | None = None

    def __len__(self) -> int:
        return len(self.criteria)

    def validate(self) -> None:
        if self.round < 0:
            raise RubricError(f"round: must be >= 0 (got {self.round})")
        if not self.criteria:
            raise RubricError("criteria: rubric must hold at least one criterion")
        if self.parent_round is not None and self.parent_round >= self.round:
            raise RubricError(
                f"provenance: parent round {self.parent_round} must precede round {self.round}"
            )
        for k, criterion in enumerate(self.criteria):
            criterion.validate(path=f"criteria[{k}]")


@dataclass(frozen=True, order=True)
class CriterionRef:
    """Round-qualified address of one criterion, rendered ``R{round}.{index}``."""

    round: int
    index: int


def render_criterion_id(ref: CriterionRef) -> str:
    if ref.round < 0 or ref.index < 0:
        raise RubricError(f"criterion ref components must be >= 0 (got {ref})")
    return f"R{ref.round}.{ref.index}"


def parse_criterion_id(text: str) -> CriterionRef:
    match = _ID_RE.match(text.strip())
    if not match:
        raise RubricError(f"not a criterion id: {text!r}")
    return CriterionRef(round=int(match.group(1)), index=int(match.group(2)))


def resolve_cited_ids(raw_ids: list, rubric: Rubric) -> tuple[list[CriterionRef], list]:
    """Leniently resolve generator-cited criterion ids against a rubric snapshot.

    Accepts bare indices (ints or digit strings) and fully-qualified
    ``R{round}.{index}`` strings for the rubric's own round. Out-of-range,
    wrong-round, unparseable, and duplicate entries land in ``dropped``;
    nothing is raised.
    """
    valid: list[CriterionRef] = []
    seen: set[int] = set()
    dropped: list = []
    for raw in raw_ids:
        index: int | None = None
        if isinstance(raw, bool):
            index = None
        elif isinstance(raw, int):
            index = raw
        elif isinstance(raw, str):
            text = raw.strip()
            if re.fullmatch(r"-?\d+", text):
                index = int(text)
            else:
                match = _ID_RE.match(text)
                if match and int(match.group(1)) == rubric.round:
                    index = int(match.group(2))
        if index is None or not (0 <= index < len(rubric.criteria)) or index in seen:
            dropped.append(raw)
            continue
        seen.add(index)
        valid.append(CriterionRef(round=rubric.round, index=index))
    return valid, dropped


def criterion_from_dict(raw: dict, path: str) -> Criterion:
    if not isinstance(raw, dict):
        raise RubricError(f"{path}: expected an object")
    text = raw.get("criterion")
    if not isinstance(text, str):
        raise RubricError(f"{path}.criterion: required string")
    points = raw.get("points")
    tags = raw.get("tags", [])
    if not isinstance(tags, list) or not all(isinstance(t, str) for t in tags):
        raise RubricError(f"{path}.tags: must be an array of strings")
    reasoning = raw.get("reasoning", "")
    if not isinstance(reasoning, str):
        raise RubricError(f"{path}.reasoning: must be a string")
    criterion = Criterion(text=text, points=points, tags=tuple(tags), reasoning=reasoning)
    criterion.validate(path=path)
    return criterion


def criterion_to_dict(criterion: Criterion) -> dict:
    return {
        "criterion": criterion.text,
        "points": criterion.points,
        "tags": list(criterion.tags),
        "reasoning": criterion.reasoning,
    }


def serialize_rubric(rubric: Rubric) -> bytes:
    """Canonical JSON bytes; ``deserialize_rubric`` inverts exactly."""
    rubric.validate()
    record: dict = {
        "round": rubric.round,
        "criteria": [criterion_to_dict(c) for c in rubric.criteria],
    }
    if rubric.run_id is not None or rubric.parent_round is not None:
        record["provenance"] = {"run_id": rubric.run_id, "parent_round": rubric.parent_round}
    return (json.dumps(record, ensure_ascii=False, indent=2) + "\n").encode("utf-8")


def deserialize_rubric(data: bytes | str) -> Rubric:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        raw = json.loads(data)
    except json.JSONDecodeError as exc:
        raise RubricError(f"rubric is not valid JSON: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise RubricError("rubric: expected a JSON object")
    round_ = raw.get("round")
    if isinstance(round_, bool) or not isinstance(round_, int):
        raise RubricError("round: required integer")
    raw_criteria = raw.get("criteria")
    if not isinstance(raw_criteria, list):
        raise RubricError("criteria: required array")
    criteria = tuple(
        criterion_from_dict(rc, path=f"criteria[{k}]") for k, rc in enumerate(raw_criteria)
    )
    provenance = raw.get("provenance") or {}
    rubric = Rubric(
        round=round_,
        criteria=criteria,
        run_id=provenance.get("run_id"),
        parent_round=provenance.get("parent_round"),
    )
    rubric.validate()
    return rubric
