"""Rubric agreement scoring and rubric-guided artifact revision.

Agreement asks a judge for 0-10 recall and precision of a learned rubric
against a reference rubric; the harmonic mean is computed locally.
Revision rewrites an artifact for three rounds under each condition and
scores one point per satisfied reference item, before vs after.

Run:  python demos/demo_agreement_and_revision.py
"""

import json

from rubriclearn import Gateway, Journal, MockEntry, MockProvider, h_mean
from rubriclearn.corpus import Artifact, CommentInstance
from rubriclearn.downstream import (
    localize_rubric,
    run_revision_experiment,
    score_rubric_agreement,
)
from rubriclearn.rubric import Criterion, Rubric

REFERENCE = [
    "States the research question explicitly.",
    "Backs each factual claim with a citation.",
    "Describes the evaluation metric.",
    "Names the dataset and its size.",
]

LEARNED = Rubric(
    round=4,
    criteria=(
        Criterion(
            text="Select this when a factual claim lacks a citation. "
            "Example pair 1: Target: \"t\" Comment: \"Citation needed.\"",
            points=-1,
            tags=("citations",),
        ),
        Criterion(
            text="Select this when the research question is implicit or missing. "
            "Example pair 1: Target: \"t\" Comment: \"State the RQ.\"",
            points=-1,
            tags=("research-question",),
        ),
    ),
)


def verdicts(flags):
    return json.dumps(
        {"verdicts": [{"satisfied": bool(f), "justification": "checked"} for f in flags]}
    )


def main():
    journal = Journal()
    entries = [
        MockEntry(
            tag="agree",
            response=json.dumps(
                {"recall_score": 9, "precision_score": 7,
                 "reasoning": "Covers citations and RQ; adds nothing off-reference."}
            ),
        ),
        MockEntry(
            tag="localize",
            response=json.dumps(
                {
                    "items": [
                        {"source_index": 0, "criterion": "Cite the two systems being compared.",
                         "points": -1, "tags": [], "reasoning": "specialized"},
                        {"source_index": 1, "criterion": "State the RQ about retrieval quality.",
                         "points": -1, "tags": [], "reasoning": "specialized"},
                    ],
                    "reasoning": "Both global concerns apply to this prompt.",
                }
            ),
        ),
        # Revision: each round appends a marker; satisfaction improves with it.
        MockEntry(tag="revise", contains="round 3", response="Draft v3: RQ stated, cited, metric named."),
        MockEntry(tag="revise", response="Draft v2: RQ stated and cited."),
        MockEntry(tag="judge", contains="Draft v3", response=verdicts([1, 1, 1, 0])),
        MockEntry(tag="judge", contains="Draft v2", response=verdicts([1, 1, 0, 0])),
        MockEntry(tag="judge", response=verdicts([0, 1, 0, 0])),
    ]
    gateway = Gateway(MockProvider(entries), journal, backoff_base=0)

    print("agreement between the learned rubric and the reference rubric:")
    result = score_rubric_agreement(gateway, REFERENCE, LEARNED)
    print(f"  recall={result.recall}  precision={result.precision}  "
          f"h_mean={result.h_mean:.2f}")
    print(f"  judge reasoning: {result.reasoning}")
    print(f"  (h_mean(10, 10) = {h_mean(10, 10):.2f}; h_mean(0, 0) = {h_mean(0, 0):.2f})")

    print("\nlocalizing the global rubric to one task prompt:")
    items = localize_rubric(gateway, LEARNED, "Compare the two retrieval systems.")
    for item in items:
        print(f"  source {item.source_index} -> {item.criterion}")

    artifact = Artifact(
        artifact_id="lowq-1",
        body="Low-quality starting draft with vague claims.",
        comments=(
            CommentInstance(artifact_id="lowq-1", index=0,
                            target_quote="vague claims", reference_comment="c"),
        ),
    )
    print("\nthree-round revision, best_val condition:")
    experiment = run_revision_experiment(
        gateway, [artifact], {"best_val": LEARNED}, REFERENCE, rounds=3
    )
    trace = experiment.traces[0]
    print(f"  satisfied before: {trace.before}/{len(REFERENCE)}")
    print(f"  satisfied after:  {trace.after}/{len(REFERENCE)}")
    print(f"  delta: {trace.delta:+d}")
    summary = experiment.summaries["best_val"]
    print(f"  condition summary: {summary.rendered}")


if __name__ == "__main__":
    main()
