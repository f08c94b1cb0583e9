"""Embedding index plus the two retrieval baselines (Top-1 copy, Top-3 RAG).

Documents are training comments; queries are target quotes. The mock
provider answers unscripted embedding requests with a deterministic
hash-derived unit vector, so everything here reproduces run-to-run. One
query/document pair is scripted to share a direction, showing the
verbatim self-match path.

Run:  python demos/demo_retrieval_baselines.py
"""

import json

from rubriclearn import Gateway, Journal, MockEntry, MockProvider
from rubriclearn.corpus import Artifact, CommentInstance, Corpus
from rubriclearn.retrieval import (
    build_document_text,
    build_index,
    build_query_text,
    run_top1_baseline,
    run_top3_rag_baseline,
    top_k,
)

DIM = 32


def build_corpus():
    def artifact(artifact_id, quote, comment):
        return Artifact(
            artifact_id=artifact_id,
            body=f"Essay {artifact_id}. The passage says {quote} near the end.",
            comments=(
                CommentInstance(
                    artifact_id=artifact_id, index=0,
                    target_quote=quote, reference_comment=comment,
                ),
            ),
        )

    return Corpus(
        artifacts=(
            artifact("train-0", "he go home", "Use 'goes' with a singular subject."),
            artifact("train-1", "data shows clear", "Plural 'data' takes 'show'."),
            artifact("train-2", "results was strong", "Use 'were' with plural 'results'."),
            artifact("train-3", "an hour ago arrive", "Past-time adverbial needs past tense."),
            # The held-out quote repeats train-0's exactly.
            artifact("test-0", "he go home", "Held-out reference comment."),
        )
    )


def main():
    corpus = build_corpus()
    train_ids = ("train-0", "train-1", "train-2", "train-3")

    # Script train-0's query and document onto one axis: an identical test
    # quote then retrieves its own comment at similarity 1.
    shared = [1.0] + [0.0] * (DIM - 1)
    t0 = corpus.artifact("train-0").comments[0]
    entries = [
        MockEntry(tag="embed", text=build_document_text(t0), vector=shared),
        MockEntry(tag="embed", text=build_query_text(t0), vector=shared),
        MockEntry(
            tag="generate",
            response=json.dumps(
                {
                    "comments": [
                        {
                            "position_index": 0,
                            "target_quote": "he go home",
                            "comment": "Singular subject: 'goes', as nearby feedback shows.",
                            "issue_type": "harmful_present",
                            "violated_criteria": [],
                        }
                    ]
                }
            ),
        ),
    ]
    journal = Journal()
    gateway = Gateway(MockProvider(entries), journal, backoff_base=0)

    print("building the index over the train split...")
    index = build_index(gateway, corpus, train_ids, dimensionality=DIM)
    print(f"index entries: {len(index)}, dimensionality {index.dimensionality}")
    for e in index.entries:
        print(f"  {e.instance_key}: {e.document_text}")

    print("\nquery text for the held-out quote:")
    test_instance = corpus.artifact("test-0").comments[0]
    print(f"  {build_query_text(test_instance)}")

    from rubriclearn.gateway import EmbeddingRequest

    query = gateway.embed(EmbeddingRequest(build_query_text(test_instance), DIM))
    print("\ntop-3 neighbors (similarity desc, ties by insertion):")
    for n in top_k(index, query, 3):
        print(f"  sim={n.similarity:.4f}  {n.instance_key}  -> {n.retrieved_comment!r}")

    print("\nTop-1 baseline (no LLM call; nearest comment copied verbatim):")
    top1 = run_top1_baseline(gateway, index, corpus, ("test-0",))
    for r in top1:
        print(f"  {r.instance_key}: {r.generated_comment!r}")

    print("\nTop-3 RAG baseline (one generation call with in-context neighbors):")
    rag_records, _ = run_top3_rag_baseline(gateway, index, corpus, ("test-0",), k=3)
    for r in rag_records:
        print(f"  {r.instance_key}: {r.generated_comment!r}")

    generate_calls = [
        rec for rec in journal.records
        if rec["event"] == "chat_request" and rec["tag"] == "generate"
    ]
    print(f"\ngeneration chat calls in the journal: {len(generate_calls)} "
          "(the Top-1 pass contributed zero)")
    retrieved_section = generate_calls[0]["user_text"].split("## Retrieved Comments")[1]
    print("retrieved section sent to the RAG generator:")
    print("## Retrieved Comments" + retrieved_section.split("\n\nFor EACH")[0])


if __name__ == "__main__":
    main()
