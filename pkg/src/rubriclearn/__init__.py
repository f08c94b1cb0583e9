"""Learn reusable natural-language rubrics from inline comments.

The engine iterates rubric-conditioned comment prediction, judge scoring,
and comment-wise rubric refinement, and evaluates the learned rubrics via
comment prediction, rubric agreement, and rubric-guided artifact revision.
"""

from .corpus import (
    Artifact,
    CommentInstance,
    Corpus,
    CorpusSplit,
    load_corpus,
    load_split_file,
    mean_content_score,
    split_corpus,
)
from .downstream import (
    AgreementResult,
    count_satisfied_items,
    h_mean,
    localize_rubric,
    run_revision_experiment,
    score_rubric_agreement,
)
from .gateway import ChatRequest, EmbeddingRequest, Gateway, MockEntry, MockProvider
from .journal import Journal, read_journal, verify_journal
from .pipeline import PipelineSession, RunConfig, format_mean_std
from .records import PredictionRecord
from .retrieval import EmbeddingIndex, Neighbor, build_index, top_k
from .rubric import Criterion, CriterionRef, Rubric, render_criterion_id, resolve_cited_ids
from .structured import extract_json

__version__ = "0.1.0"

__all__ = [
    "AgreementResult",
    "Artifact",
    "ChatRequest",
    "CommentInstance",
    "Corpus",
    "CorpusSplit",
    "Criterion",
    "CriterionRef",
    "EmbeddingIndex",
    "EmbeddingRequest",
    "Gateway",
    "Journal",
    "MockEntry",
    "MockProvider",
    "Neighbor",
    "PipelineSession",
    "PredictionRecord",
    "Rubric",
    "RunConfig",
    "build_index",
    "count_satisfied_items",
    "extract_json",
    "format_mean_std",
    "h_mean",
    "load_corpus",
    "load_split_file",
    "localize_rubric",
    "mean_content_score",
    "read_journal",
    "render_criterion_id",
    "resolve_cited_ids",
    "run_revision_experiment",
    "score_rubric_agreement",
    "split_corpus",
    "top_k",
    "verify_journal",
]
