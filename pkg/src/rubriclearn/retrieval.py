"""Embedding index over training comments and the two retrieval baselines.

Queries embed the target quote; documents embed the reference comment. At
corpus scale (a few hundred comments) an exact brute-force scan beats any
approximate index, so similarity search is a dot product over a stacked
matrix of unit vectors.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import Artifact, CommentInstance, Corpus
from .errors import RetrievalError
from .gateway import DEFAULT_EMBED_DIM, ChatRequest, EmbeddingRequest, Gateway
from .prompts import RetrievedExample, build_rag_prompt
from .records import AlignmentReport, PredictionRecord, records_from_generation

logger = logging.getLogger(__name__)

QUERY_PREFIX = "task: feedback comment retrieval | query: "
DOCUMENT_PREFIX = "title: none | text: "
SENTENCE_TERMINATORS = ".!?"
DATASET_KINDS = ("default", "essay")


def _locate_span(body: str, instance: CommentInstance) -> tuple[int, int]:
    if instance.start is not None and body[instance.start : instance.end] == instance.target_quote:
        return instance.start, instance.end
    found = body.find(instance.target_quote)
    if found < 0:
        raise RetrievalError(
            f"target quote of instance {instance.instance_key} not locatable in artifact body"
        )
    return found, found + len(instance.target_quote)


def _sentence_bounds(body: str, start: int, end: int) -> tuple[int, int]:
    """Expand a span to the nearest sentence terminators, else the whole line."""
    left = start
    while left > 0:
        ch = body[left - 1]
        if ch in SENTENCE_TERMINATORS or ch == "\n":
            break
        left -= 1
    while left < start and body[left].isspace():
        left += 1
    right = end
    while right < len(body):
        ch = body[right]
        if ch in SENTENCE_TERMINATORS:
            right += 1
            break
        if ch == "\n":
            break
        right += 1
    return left, right


def build_query_text(
    instance: CommentInstance,
    dataset_kind: str = "default",
    artifact: Artifact | None = None,
) -> str:
    """Embedding query for a target quote.

    The essay kind wraps the span with ``<<``/``>>`` inside its containing
    sentence (quotes there are too short to stand alone); it needs the
    artifact for the surrounding text.
    """
    if dataset_kind not in DATASET_KINDS:
        raise RetrievalError(f"unknown dataset kind {dataset_kind!r}")
    if not instance.target_quote:
        raise RetrievalError(f"instance {instance.instance_key} has an empty target quote")
    if dataset_kind == "default":
        return QUERY_PREFIX + instance.target_quote
    if artifact is None:
        raise RetrievalError("essay-kind query text needs the containing artifact")
    start, end = _locate_span(artifact.body, instance)
    left, right = _sentence_bounds(artifact.body, start, end)
    before = artifact.body[left:start]
    after = artifact.body[end:right]
    return f"{QUERY_PREFIX}{before}<<{instance.target_quote}>>{after}"


def build_document_text(instance: CommentInstance) -> str:
    return DOCUMENT_PREFIX + instance.reference_comment


@dataclass(frozen=True)
class Neighbor:
    instance_key: tuple[str, int]
    similarity: float
    retrieved_comment: str
    retrieved_quote: str


@dataclass(frozen=True)
class IndexEntry:
    instance_key: tuple[str, int]
    document_text: str
    comment: str
    quote: str


class EmbeddingIndex:
    """Immutable unit-vector index over training comments."""

    def __init__(
        self,
        entries: Sequence[IndexEntry],
        vectors: np.ndarray,
        dimensionality: int,
        embedder_id: str = "",
    ):
        if len(entries) == 0:
            raise RetrievalError("cannot build an empty embedding index")
        if vectors.shape != (len(entries), dimensionality):
            raise RetrievalError(
                f"vector matrix shape {vectors.shape} mismatches "
                f"({len(entries)}, {dimensionality})"
            )
        norms = np.linalg.norm(vectors, axis=1)
        if not np.allclose(norms, 1.0, atol=1e-6):
            raise RetrievalError("index vectors must be L2-normalized")
        self.entries = tuple(entries)
        self.vectors = vectors.astype(np.float32)
        self.dimensionality = dimensionality
        self.embedder_id = embedder_id

    def __len__(self) -> int:
        return len(self.entries)


def build_index(
    gateway: Gateway,
    corpus: Corpus,
    train_ids: Sequence[str],
    dataset_kind: str = "default",
    dimensionality: int = DEFAULT_EMBED_DIM,
    embedder_id: str = "",
) -> EmbeddingIndex:
    """Embed every train-split comment as a retrieval document."""
    entries: list[IndexEntry] = []
    rows: list[np.ndarray] = []
    for artifact in corpus.subset(train_ids):
        for instance in artifact.comments:
            document = build_document_text(instance)
            display_quote = (
                build_query_text(instance, dataset_kind, artifact)[len(QUERY_PREFIX) :]
                if dataset_kind == "essay"
                else instance.target_quote
            )
            rows.append(gateway.embed(EmbeddingRequest(document, dimensionality)))
            entries.append(
                IndexEntry(
                    instance_key=instance.instance_key,
                    document_text=document,
                    comment=instance.reference_comment,
                    quote=display_quote,
                )
            )
    if not entries:
        raise RetrievalError("train split holds no comments; cannot build index")
    return EmbeddingIndex(entries, np.stack(rows), dimensionality, embedder_id)


def top_k(index: EmbeddingIndex, query_vector: np.ndarray, k: int) -> list[Neighbor]:
    """Exact k nearest entries by dot product.

    Order: similarity descending, ties by lowest insertion index. Asking for
    more neighbors than the index holds returns everything with a warning.
    """
    if k < 1:
        raise RetrievalError("k must be >= 1")
    query = np.asarray(query_vector, dtype=np.float32)
    if query.shape != (index.dimensionality,):
        raise RetrievalError(
            f"query shape {query.shape} mismatches index dimensionality {index.dimensionality}"
        )
    if k > len(index):
        logger.warning("top_k asked for %d neighbors but index holds %d", k, len(index))
        k = len(index)
    similarities = index.vectors @ query
    order = np.argsort(-similarities, kind="stable")[:k]
    return [
        Neighbor(
            instance_key=index.entries[i].instance_key,
            similarity=float(similarities[i]),
            retrieved_comment=index.entries[i].comment,
            retrieved_quote=index.entries[i].quote,
        )
        for i in order
    ]


def _query_vector(
    gateway: Gateway,
    instance: CommentInstance,
    dataset_kind: str,
    artifact: Artifact,
    dimensionality: int,
) -> np.ndarray:
    text = build_query_text(instance, dataset_kind, artifact)
    return gateway.embed(EmbeddingRequest(text, dimensionality))


def run_top1_baseline(
    gateway: Gateway,
    index: EmbeddingIndex,
    corpus: Corpus,
    eval_ids: Sequence[str],
    dataset_kind: str = "default",
    round_number: int = 0,
) -> list[PredictionRecord]:
    """Copy the nearest training comment verbatim; no chat calls at all."""
    records: list[PredictionRecord] = []
    for artifact in corpus.subset(eval_ids):
        for instance in artifact.comments:
            query = _query_vector(gateway, instance, dataset_kind, artifact, index.dimensionality)
            nearest = top_k(index, query, 1)[0]
            records.append(
                PredictionRecord(
                    instance_key=instance.instance_key,
                    round=round_number,
                    target_quote=instance.target_quote,
                    reference_comment=instance.reference_comment,
                    generated_comment=nearest.retrieved_comment,
                    reference_issue_type=instance.issue_type,
                )
            )
    return records


def run_top3_rag_baseline(
    gateway: Gateway,
    index: EmbeddingIndex,
    corpus: Corpus,
    eval_ids: Sequence[str],
    k: int = 3,
    dataset_kind: str = "default",
    round_number: int = 0,
    lane: str | None = None,
) -> tuple[list[PredictionRecord], list[AlignmentReport]]:
    """Generate with the top-k retrieved comments as in-context examples."""
    all_records: list[PredictionRecord] = []
    reports: list[AlignmentReport] = []
    for artifact in corpus.subset(eval_ids):
        positions = list(artifact.comments)
        if not positions:
            continue
        retrieved = []
        for instance in positions:
            query = _query_vector(gateway, instance, dataset_kind, artifact, index.dimensionality)
            neighbors = top_k(index, query, k)
            retrieved.append(
                [
                    RetrievedExample(
                        comment=n.retrieved_comment, quote=n.retrieved_quote, similarity=n.similarity
                    )
                    for n in neighbors
                ]
            )
        bundle = build_rag_prompt(artifact, positions, retrieved)
        request = ChatRequest(
            system_text=bundle.system_text,
            user_text=bundle.user_text,
            tag=bundle.tag,
            lane=lane,
        )
        generated, _ = gateway.chat_structured(request, bundle.schema_id)
        records, report = records_from_generation(positions, generated, None, round_number)
        all_records.extend(records)
        reports.append(report)
    return all_records, reports


def index_cache_key(
    corpus: Corpus,
    train_ids: Sequence[str],
    dataset_kind: str,
    dimensionality: int,
    embedder_id: str,
) -> str:
    """Hash of everything that determines index content."""
    hasher = hashlib.sha256()
    hasher.update(f"{embedder_id}|{dimensionality}|{dataset_kind}".encode("utf-8"))
    for artifact in corpus.subset(train_ids):
        for instance in artifact.comments:
            hasher.update(
                json.dumps(
                    [instance.artifact_id, instance.index, build_document_text(instance)],
                    ensure_ascii=False,
                ).encode("utf-8")
            )
    return hasher.hexdigest()[:16]


def save_index(index: EmbeddingIndex, cache_dir: str | Path, key: str) -> Path:
    path = Path(cache_dir) / f"index_{key}.json"
    payload = {
        "dimensionality": index.dimensionality,
        "embedder_id": index.embedder_id,
        "entries": [
            {
                "artifact_id": e.instance_key[0],
                "index": e.instance_key[1],
                "document_text": e.document_text,
                "comment": e.comment,
                "quote": e.quote,
                "vector": [float(x) for x in index.vectors[i]],
            }
            for i, e in enumerate(index.entries)
        ],
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


def load_index(cache_dir: str | Path, key: str) -> EmbeddingIndex | None:
    path = Path(cache_dir) / f"index_{key}.json"
    if not path.exists():
        return None
    payload = json.loads(path.read_text(encoding="utf-8"))
    entries = [
        IndexEntry(
            instance_key=(raw["artifact_id"], raw["index"]),
            document_text=raw["document_text"],
            comment=raw["comment"],
            quote=raw["quote"],
        )
        for raw in payload["entries"]
    ]
    vectors = np.array([raw["vector"] for raw in payload["entries"]], dtype=np.float32)
    return EmbeddingIndex(entries, vectors, payload["dimensionality"], payload["embedder_id"])
