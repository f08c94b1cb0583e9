"""Shared fixtures: synthetic corpora and scripted mock providers."""

from __future__ import annotations

import json

import pytest

from rubriclearn.corpus import Artifact, CommentInstance, Corpus
from rubriclearn.gateway import Gateway, MockEntry, MockProvider
from rubriclearn.journal import Journal


def make_corpus(n_artifacts=10, comments_per=2, prefix="art", with_prompt=True) -> Corpus:
    """Synthetic corpus whose bodies carry unique tokens for mock matching."""
    artifacts = []
    for i in range(n_artifacts):
        artifact_id = f"{prefix}-{i:02d}"
        token = f"body-token-{prefix}-{i:02d}"
        comments = []
        sentences = [f"Artifact {token} under review."]
        for j in range(comments_per):
            quote = f"span {i:02d}-{j}"
            sentences.append(f"It contains {quote} as content.")
            comments.append(
                CommentInstance(
                    artifact_id=artifact_id,
                    index=j,
                    target_quote=quote,
                    reference_comment=f"Reference comment {i:02d}-{j} on {quote}.",
                )
            )
        artifacts.append(
            Artifact(
                artifact_id=artifact_id,
                body=" ".join(sentences),
                prompt=f"Review task for {artifact_id}." if with_prompt else None,
                comments=tuple(comments),
            )
        )
    return Corpus(artifacts=tuple(artifacts), source=f"synthetic:{prefix}")


def criterion_dict(text_suffix="", points=-1, tags=("grammar",)) -> dict:
    return {
        "criterion": (
            "Select this when a local claim lacks support. Do not select for tone. "
            f"Example pair 1: Target: \"span\" Comment: \"Needs support.\"{text_suffix}"
        ),
        "points": points,
        "tags": list(tags),
        "reasoning": "",
    }


def rubric_response(n_criteria=2) -> str:
    return json.dumps(
        {"inferred_rubrics": [criterion_dict(text_suffix=f" v{k}") for k in range(n_criteria)]}
    )


def echo_comments_response(artifact: Artifact, cite=(0,)) -> str:
    return json.dumps(
        {
            "comments": [
                {
                    "position_index": j,
                    "target_quote": c.target_quote,
                    "comment": c.reference_comment,
                    "issue_type": "harmful_present",
                    "violated_criteria": list(cite),
                }
                for j, c in enumerate(artifact.comments)
            ]
        }
    )


def scores_response(count: int, score=10) -> str:
    return json.dumps(
        {
            "comment_scores": [
                {"content_score": score, "reasoning": f"pair {i} matches"} for i in range(count)
            ]
        }
    )


def echo_entries(corpus: Corpus, n_criteria=2, judge_score=10) -> list[MockEntry]:
    """Stateless script: fixed rubric, reference-echoing generator, constant judge."""
    entries = [
        MockEntry(tag="learn", response=rubric_response(n_criteria)),
        MockEntry(tag="refine", response=rubric_response(n_criteria)),
    ]
    for artifact in corpus.artifacts:
        token = f"body-token-{artifact.artifact_id}"
        entries.append(
            MockEntry(tag="generate", contains=token, response=echo_comments_response(artifact))
        )
        entries.append(
            MockEntry(
                tag="judge",
                contains=token,
                response=scores_response(len(artifact.comments), judge_score),
            )
        )
    return entries


def make_gateway(entries, journal=None, **kwargs) -> Gateway:
    kwargs.setdefault("backoff_base", 0.0)
    return Gateway(MockProvider(entries), journal or Journal(), **kwargs)


def write_mock_script(path, entries: list[MockEntry]) -> str:
    """Serialize MockEntry objects to the JSON-lines script format."""
    lines = []
    for e in entries:
        match = {}
        if e.tag is not None:
            match["tag"] = e.tag
        if e.contains is not None:
            match["contains"] = e.contains
        if e.lane is not None:
            match["lane"] = e.lane
        if e.text is not None:
            match["text"] = e.text
        record = {"match": match}
        if e.response is not None:
            record["response"] = e.response
        if e.vector is not None:
            record["vector"] = e.vector
        if e.error is not None:
            record["error"] = e.error
        if e.uses is not None:
            record["uses"] = e.uses
        if e.delay:
            record["delay"] = e.delay
        lines.append(json.dumps(record, ensure_ascii=False))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


@pytest.fixture
def ten_artifact_corpus() -> Corpus:
    return make_corpus(10, comments_per=2)
