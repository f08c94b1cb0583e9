"""Corpus loading, artifact-level splitting, and the mean content score.

The canonical corpus format is JSON-lines: one object per artifact with
fields ``artifact_id`` (string), ``prompt`` (string or null), ``artifact``
(string), and ``comments`` (array of objects with ``target_quote``,
``comment``, and optional ``start``, ``end``, ``issue_type``).
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .errors import CorpusError, SplitError

SPLIT_NAMES = ("train", "validation", "test")
DEFAULT_RATIOS = (0.6, 0.2, 0.2)


@dataclass(frozen=True)
class CommentInstance:
    """One (target quote, reference comment) pair attached to an artifact.

    ``index`` disambiguates multiple comments on the same quote; the pair
    ``(artifact_id, index)`` is the instance key used everywhere downstream.
    """

    artifact_id: str
    index: int
    target_quote: str
    reference_comment: str
    start: int | None = None
    end: int | None = None
    issue_type: str | None = None

    @property
    def instance_key(self) -> tuple[str, int]:
        return (self.artifact_id, self.index)


@dataclass(frozen=True)
class Artifact:
    """A text document under review plus its ordered inline comments."""

    artifact_id: str
    body: str
    prompt: str | None = None
    comments: tuple[CommentInstance, ...] = ()


@dataclass(frozen=True)
class Corpus:
    artifacts: tuple[Artifact, ...]
    source: str = ""

    def __post_init__(self) -> None:
        by_id = {a.artifact_id: a for a in self.artifacts}
        if len(by_id) != len(self.artifacts):
            raise CorpusError("duplicate artifact_id in corpus")
        object.__setattr__(self, "_by_id", by_id)

    def __len__(self) -> int:
        return len(self.artifacts)

    def artifact(self, artifact_id: str) -> Artifact:
        try:
            return self._by_id[artifact_id]
        except KeyError:
            raise CorpusError(f"unknown artifact_id {artifact_id!r}") from None

    def artifact_ids(self) -> tuple[str, ...]:
        return tuple(a.artifact_id for a in self.artifacts)

    def instances(self) -> Iterator[CommentInstance]:
        for artifact in self.artifacts:
            yield from artifact.comments

    def instance_count(self) -> int:
        return sum(len(a.comments) for a in self.artifacts)

    def subset(self, artifact_ids: Iterable[str]) -> tuple[Artifact, ...]:
        """Artifacts for the given ids, preserving corpus order."""
        wanted = set(artifact_ids)
        unknown = wanted - set(self.artifact_ids())
        if unknown:
            raise CorpusError(f"unknown artifact ids in subset: {sorted(unknown)}")
        return tuple(a for a in self.artifacts if a.artifact_id in wanted)


@dataclass(frozen=True)
class CorpusSplit:
    """Disjoint artifact-level train/validation/test id sets."""

    train: tuple[str, ...]
    validation: tuple[str, ...]
    test: tuple[str, ...]
    seed: int | None = None
    ratios: tuple[float, float, float] | None = None

    def ids_for(self, split_name: str) -> tuple[str, ...]:
        if split_name not in SPLIT_NAMES:
            raise SplitError(f"unknown split name {split_name!r}")
        return getattr(self, split_name)

    def sizes(self) -> tuple[int, int, int]:
        return (len(self.train), len(self.validation), len(self.test))

    def to_dict(self) -> dict:
        return {
            "train": list(self.train),
            "validation": list(self.validation),
            "test": list(self.test),
        }


def _validate_artifact(raw: dict, row: int) -> Artifact:
    artifact_id = raw.get("artifact_id")
    if not isinstance(artifact_id, str) or not artifact_id:
        raise CorpusError(f"row {row}: artifact_id must be a non-empty string")
    body = raw.get("artifact")
    if not isinstance(body, str) or not body:
        raise CorpusError(f"row {row} ({artifact_id}): artifact body must be non-empty")
    prompt = raw.get("prompt")
    if prompt is not None and not isinstance(prompt, str):
        raise CorpusError(f"row {row} ({artifact_id}): prompt must be a string or null")
    raw_comments = raw.get("comments", [])
    if not isinstance(raw_comments, list):
        raise CorpusError(f"row {row} ({artifact_id}): comments must be an array")

    comments = []
    for j, rc in enumerate(raw_comments):
        if not isinstance(rc, dict):
            raise CorpusError(f"row {row} ({artifact_id}): comment {j} must be an object")
        quote = rc.get("target_quote")
        if not isinstance(quote, str) or not quote:
            raise CorpusError(
                f"row {row} ({artifact_id}): comment {j} target_quote must be non-empty"
            )
        text = rc.get("comment")
        if not isinstance(text, str) or not text:
            raise CorpusError(
                f"row {row} ({artifact_id}): comment {j} comment text must be non-empty"
            )
        start, end = rc.get("start"), rc.get("end")
        if (start is None) != (end is None):
            raise CorpusError(
                f"row {row} ({artifact_id}): comment {j} offsets must carry both start and end"
            )
        if start is not None:
            if not isinstance(start, int) or not isinstance(end, int):
                raise CorpusError(
                    f"row {row} ({artifact_id}): comment {j} offsets must be integers"
                )
            if not (0 <= start < end <= len(body)):
                raise CorpusError(
                    f"row {row} ({artifact_id}): comment {j} offsets violate "
                    f"0 <= start < end <= len(body) (start={start}, end={end}, len={len(body)})"
                )
        issue_type = rc.get("issue_type")
        if issue_type is not None and not isinstance(issue_type, str):
            raise CorpusError(f"row {row} ({artifact_id}): comment {j} issue_type must be a string")
        comments.append(
            CommentInstance(
                artifact_id=artifact_id,
                index=j,
                target_quote=quote,
                reference_comment=text,
                start=start,
                end=end,
                issue_type=issue_type,
            )
        )
    return Artifact(artifact_id=artifact_id, body=body, prompt=prompt, comments=tuple(comments))


def load_corpus(path: str | Path, format: str = "jsonl") -> Corpus:
    """Load a corpus file, preserving on-disk comment order.

    Raises CorpusError with the row number for parse failures and with the
    artifact id for invariant violations.
    """
    if format != "jsonl":
        raise CorpusError(f"unknown corpus format {format!r}")
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"corpus file not found: {path}")

    artifacts: list[Artifact] = []
    seen: set[str] = set()
    for row, line in enumerate(path.read_text(encoding="utf-8").splitlines()):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"row {row}: invalid JSON ({exc.msg})") from exc
        if not isinstance(raw, dict):
            raise CorpusError(f"row {row}: expected a JSON object")
        artifact = _validate_artifact(raw, row)
        if artifact.artifact_id in seen:
            raise CorpusError(f"row {row}: duplicate artifact_id {artifact.artifact_id!r}")
        seen.add(artifact.artifact_id)
        artifacts.append(artifact)
    return Corpus(artifacts=tuple(artifacts), source=str(path))


def _comment_to_dict(c: CommentInstance) -> dict:
    out: dict = {"target_quote": c.target_quote, "comment": c.reference_comment}
    if c.start is not None:
        out["start"] = c.start
        out["end"] = c.end
    if c.issue_type is not None:
        out["issue_type"] = c.issue_type
    return out


def dumps_corpus(corpus: Corpus) -> str:
    """Serialize to the canonical JSON-lines form (load/dump round-trip stable)."""
    lines = []
    for a in corpus.artifacts:
        record = {
            "artifact_id": a.artifact_id,
            "prompt": a.prompt,
            "artifact": a.body,
            "comments": [_comment_to_dict(c) for c in a.comments],
        }
        lines.append(json.dumps(record, ensure_ascii=False))
    return "\n".join(lines) + "\n" if lines else ""


def dump_corpus(corpus: Corpus, path: str | Path) -> None:
    Path(path).write_text(dumps_corpus(corpus), encoding="utf-8")


def largest_remainder_sizes(total: int, ratios: Sequence[float]) -> list[int]:
    """Apportion ``total`` items over ``ratios`` by largest remainder.

    Ties in the fractional parts are broken by lower ratio index, which keeps
    the result deterministic across platforms.
    """
    quotas = [r * total for r in ratios]
    sizes = [math.floor(q) for q in quotas]
    leftover = total - sum(sizes)
    by_remainder = sorted(range(len(ratios)), key=lambda i: (-(quotas[i] - sizes[i]), i))
    for i in by_remainder[:leftover]:
        sizes[i] += 1
    return sizes


def split_corpus(
    corpus: Corpus,
    ratios: Sequence[float] = DEFAULT_RATIOS,
    seed: int = 0,
) -> CorpusSplit:
    """Split at the artifact level into train/validation/test.

    Deterministic given (corpus ids, seed): artifact ids are sorted
    lexicographically, permuted by a seeded PRNG, and carved into sizes given
    by largest-remainder apportionment of the ratios.
    """
    if len(ratios) != 3:
        raise SplitError("ratios must have exactly three entries")
    if any(r < 0 for r in ratios):
        raise SplitError("ratios must be non-negative")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise SplitError(f"ratios must sum to 1 (got {sum(ratios)!r})")
    if len(corpus) == 0:
        raise SplitError("cannot split an empty corpus")

    ids = sorted(corpus.artifact_ids())
    random.Random(seed).shuffle(ids)
    n_train, n_val, _ = largest_remainder_sizes(len(ids), ratios)
    return CorpusSplit(
        train=tuple(ids[:n_train]),
        validation=tuple(ids[n_train : n_train + n_val]),
        test=tuple(ids[n_train + n_val :]),
        seed=seed,
        ratios=(ratios[0], ratios[1], ratios[2]),
    )


def validate_split(split: CorpusSplit, corpus: Corpus) -> None:
    """Check the partition property: union covers the corpus, pairwise disjoint."""
    parts = [set(split.train), set(split.validation), set(split.test)]
    for name, ids, part in zip(SPLIT_NAMES, (split.train, split.validation, split.test), parts):
        if len(part) != len(ids):
            raise SplitError(f"{name} split contains duplicate ids")
    for i in range(3):
        for j in range(i + 1, 3):
            overlap = parts[i] & parts[j]
            if overlap:
                raise SplitError(
                    f"splits {SPLIT_NAMES[i]} and {SPLIT_NAMES[j]} overlap: {sorted(overlap)}"
                )
    union = parts[0] | parts[1] | parts[2]
    corpus_ids = set(corpus.artifact_ids())
    if union != corpus_ids:
        missing = sorted(corpus_ids - union)
        extra = sorted(union - corpus_ids)
        raise SplitError(f"split does not partition corpus (missing={missing}, extra={extra})")


def load_split_file(path: str | Path, corpus: Corpus | None = None) -> CorpusSplit:
    """Load a published split file: JSON {"train": [...], "validation": [...], "test": [...]}.

    When a corpus is given, the partition property is validated against it.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SplitError(f"cannot read split file {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise SplitError(f"split file {path} must hold a JSON object")
    for name in SPLIT_NAMES:
        ids = raw.get(name)
        if not isinstance(ids, list) or not all(isinstance(i, str) for i in ids):
            raise SplitError(f"split file {path}: {name!r} must be an array of artifact ids")
    split = CorpusSplit(
        train=tuple(raw["train"]),
        validation=tuple(raw["validation"]),
        test=tuple(raw["test"]),
    )
    if corpus is not None:
        validate_split(split, corpus)
    return split


def save_split_file(split: CorpusSplit, path: str | Path) -> None:
    Path(path).write_text(json.dumps(split.to_dict(), indent=2) + "\n", encoding="utf-8")


def mean_content_score(scores: Iterable[float]) -> float:
    """Arithmetic mean of content scores; an empty set is an error, not 0.

    Callers pass the scores carried by prediction records; every score must
    lie in [0, 10].
    """
    values = list(scores)
    if not values:
        raise ValueError("mean_content_score over an empty set is undefined")
    for s in values:
        if not (0 <= s <= 10):
            raise ValueError(f"content score {s!r} outside [0, 10]")
    return sum(values) / len(values)
