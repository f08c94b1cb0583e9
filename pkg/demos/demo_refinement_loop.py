"""Walk through the full learn -> predict -> judge -> refine loop.

The scripted mock provider plays a generator that drifts on one comment slot
under the initial rubric and recovers once the refined rubric (with a
sharper selector) reaches the prompt. Watch the validation mean climb and
the selection pick the first post-refinement round.

Run:  python demos/demo_refinement_loop.py
"""

import json

from rubriclearn import (
    Gateway,
    Journal,
    MockEntry,
    MockProvider,
    PipelineSession,
    RunConfig,
    split_corpus,
)
from rubriclearn.corpus import Artifact, CommentInstance, Corpus


def build_corpus(n_artifacts=5):
    artifacts = []
    for i in range(n_artifacts):
        artifact_id = f"draft-{i}"
        token = f"draft-token-{i}"
        comments = (
            CommentInstance(
                artifact_id=artifact_id,
                index=0,
                target_quote=f"claim {i}",
                reference_comment=f"Claim {i} needs a citation.",
            ),
            CommentInstance(
                artifact_id=artifact_id,
                index=1,
                target_quote=f"method {i}",
                reference_comment=f"Method {i} lacks concrete metrics.",
            ),
        )
        artifacts.append(
            Artifact(
                artifact_id=artifact_id,
                body=f"Document {token}. It makes claim {i} and describes method {i}.",
                prompt="Review this draft.",
                comments=comments,
            )
        )
    return Corpus(artifacts=tuple(artifacts))


def rubric_json(marker, texts):
    return json.dumps(
        {
            "inferred_rubrics": [
                {
                    "criterion": f"{text} ({marker}) Example pair 1: Target: \"t\" Comment: \"c\".",
                    "points": -1,
                    "tags": ["demo"],
                    "reasoning": "",
                }
                for text in texts
            ]
        }
    )


def generation_json(artifact, drift_slot=None):
    comments = []
    for j, c in enumerate(artifact.comments):
        if j == drift_slot:
            text = "(drifted) Consider restructuring this section."
        else:
            text = c.reference_comment
        comments.append(
            {
                "position_index": j,
                "target_quote": c.target_quote,
                "comment": text,
                "issue_type": "harmful_present",
                "violated_criteria": [0],
            }
        )
    return json.dumps({"comments": comments})


def scores_json(values):
    return json.dumps(
        {
            "comment_scores": [
                {"content_score": v, "reasoning": "matches reference" if v >= 9 else "wrong concern"}
                for v in values
            ]
        }
    )


def build_script(corpus):
    """Initial rubric -> drifting generator; refined rubric -> faithful one."""
    entries = [
        MockEntry(tag="learn", response=rubric_json("v1 selector", ["Missing citations."])),
        MockEntry(
            tag="refine",
            response=rubric_json(
                "v2 selector",
                ["Missing citations.", "Methods stated without concrete metrics."],
            ),
        ),
    ]
    for artifact in corpus.artifacts:
        token = f"draft-token-{artifact.artifact_id.split('-')[1]}"
        # Once the refined rubric's selector text appears in the prompt, the
        # generator reproduces both slots; before that, slot 1 drifts.
        entries.append(
            MockEntry(
                tag="generate",
                contains=[token, "v2 selector"],
                response=generation_json(artifact),
            )
        )
        entries.append(
            MockEntry(tag="generate", contains=token, response=generation_json(artifact, drift_slot=1))
        )
        entries.append(
            MockEntry(tag="judge", contains=[token, "(drifted)"], response=scores_json([10, 2]))
        )
        entries.append(MockEntry(tag="judge", contains=token, response=scores_json([10, 10])))
    return entries


def main():
    corpus = build_corpus()
    split = split_corpus(corpus, (0.6, 0.2, 0.2), seed=0)
    print(f"corpus: {len(corpus)} artifacts, {corpus.instance_count()} comment instances")
    print(f"split sizes (train/val/test): {split.sizes()}\n")

    journal = Journal()
    gateway = Gateway(MockProvider(build_script(corpus)), journal, backoff_base=0)
    config = RunConfig(mode="commentwise_refine", rounds=2, repeats=1)
    session = PipelineSession(gateway, corpus, split, config)

    result = session.run_refinement()

    print("round  train  validation")
    for r in result.round_results:
        print(f"{r.round:>5}  {r.train_mean:5.2f}  {r.validation_mean:10.2f}")
    print(f"\nbest validation round: {result.best_val_round}")

    print("\ninitial rubric:")
    for k, c in enumerate(session.rubrics[0].criteria):
        print(f"  R0.{k} [{c.points}] {c.text[:70]}...")
    print("refined rubric (round 1):")
    for k, c in enumerate(session.rubrics[1].criteria):
        print(f"  R1.{k} [{c.points}] {c.text[:70]}...")

    drifted = [
        r for r in session.records_by_round[0] if "(drifted)" in r.generated_comment
    ]
    print(f"\nround-0 drifted slots: {len(drifted)} "
          f"(each scored {drifted[0].content_score}/10 by the judge)")
    fixed = [
        r for r in session.records_by_round[1]
        if r.instance_key == drifted[0].instance_key
    ]
    print(f"round-1 same slot: score {fixed[0].content_score}/10 after refinement")
    print(f"\njournal records: {len(journal.records)} (every request and response)")


if __name__ == "__main__":
    main()
