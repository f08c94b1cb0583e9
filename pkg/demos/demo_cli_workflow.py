"""End-to-end CLI workflow in a temp directory: corpus -> split -> run -> report.

Shows the on-disk formats (JSON-lines corpus, split file, run config, mock
script) and the run-directory layout the pipeline writes. Uses the same
`main()` entry point as the installed `rubriclearn` command.

Run:  python demos/demo_cli_workflow.py
"""

import json
import tempfile
from pathlib import Path

from rubriclearn.cli import main


def corpus_rows():
    rows = []
    for i in range(6):
        rows.append(
            {
                "artifact_id": f"doc-{i}",
                "prompt": "Review the draft.",
                "artifact": f"Draft doc-{i} token-{i}. It claims thing {i} without support.",
                "comments": [
                    {
                        "target_quote": f"thing {i}",
                        "comment": f"Claim {i} needs evidence.",
                    }
                ],
            }
        )
    return rows


def mock_script_lines():
    rubric = {
        "inferred_rubrics": [
            {
                "criterion": "Select this when a claim lacks evidence. "
                "Example pair 1: Target: \"thing\" Comment: \"Needs evidence.\"",
                "points": -1,
                "tags": ["evidence"],
                "reasoning": "",
            }
        ]
    }
    lines = [
        {"match": {"tag": "learn"}, "response": json.dumps(rubric)},
        {"match": {"tag": "refine"}, "response": json.dumps(rubric)},
    ]
    for i in range(6):
        generation = {
            "comments": [
                {
                    "position_index": 0,
                    "target_quote": f"thing {i}",
                    "comment": f"Claim {i} needs evidence.",
                    "issue_type": "harmful_present",
                    "violated_criteria": [0],
                }
            ]
        }
        lines.append(
            {"match": {"tag": "generate", "contains": f"token-{i}"},
             "response": json.dumps(generation)}
        )
        lines.append(
            {"match": {"tag": "judge", "contains": f"token-{i}"},
             "response": json.dumps({"comment_scores": [{"content_score": 10, "reasoning": "same"}]})}
        )
    return lines


def main_demo():
    with tempfile.TemporaryDirectory() as tmp:
        base = Path(tmp)
        corpus_path = base / "corpus.jsonl"
        corpus_path.write_text(
            "\n".join(json.dumps(r) for r in corpus_rows()) + "\n", encoding="utf-8"
        )
        script_path = base / "mock_script.jsonl"
        script_path.write_text(
            "\n".join(json.dumps(l) for l in mock_script_lines()) + "\n", encoding="utf-8"
        )

        print("$ rubriclearn split --corpus corpus.jsonl --seed 7 --out split.json")
        main(["split", "--corpus", str(corpus_path), "--seed", "7",
              "--out", str(base / "split.json")])

        config = {
            "corpus": "corpus.jsonl",
            "split_file": "split.json",
            "run_dir": "run",
            "mode": "commentwise_refine",
            "rounds": 1,
            "repeats": 2,
            "provider": {"provider": "mock", "mock_script": str(script_path)},
        }
        (base / "config.json").write_text(json.dumps(config, indent=2), encoding="utf-8")
        print("\n$ rubriclearn run --config config.json")
        code = main(["run", "--config", str(base / "config.json")])
        print(f"exit code: {code}")

        print("\nrun directory layout:")
        for path in sorted((base / "run").rglob("*")):
            if path.is_file():
                print(f"  {path.relative_to(base)}")

        print("\n$ rubriclearn report run --out report_out")
        main(["report", str(base / "run"), "--out", str(base / "report_out")])
        print("\nablation.csv:")
        print((base / "report_out" / "ablation.csv").read_text())
        print("curves.csv:")
        print((base / "report_out" / "curves.csv").read_text())

        print("$ rubriclearn run --resume run   (completed -> no-op)")
        code = main(["run", "--resume", str(base / "run")])
        print(f"exit code: {code}")


if __name__ == "__main__":
    main_demo()
