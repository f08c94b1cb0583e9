"""Command-line surface: run, report, split, prompts dump, index build.

Exit codes: 0 success, 2 configuration error, 3 provider exhaustion,
4 structured-output failure, 1 anything else. Config validation always
completes before the first provider call, and run.json is written before
the gateway is touched (crash forensics).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .corpus import (
    DEFAULT_RATIOS,
    load_corpus,
    load_split_file,
    save_split_file,
    split_corpus,
)
from .downstream import run_revision_experiment, score_rubric_agreement
from .errors import (
    ConfigError,
    CorpusError,
    ExtractionError,
    MockScriptError,
    ProviderError,
    RubricLearnError,
    SplitError,
)
from .fixtures import PROMPT_FAMILIES, build_fixture_prompts, render_prompt_file
from .gateway import gateway_from_env
from .journal import Journal
from .pipeline import PipelineSession, RunConfig
from .reports import hash_file, write_agreement_csv, write_report, write_revision_csv
from .retrieval import build_index, index_cache_key, save_index
from .rubric import Rubric

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PROVIDER = 3
EXIT_SCHEMA = 4


def load_config_file(path: str | Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        try:
            return tomllib.loads(text)
        except Exception as exc:
            raise ConfigError(f"invalid TOML config: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON config: {exc.msg} (line {exc.lineno})") from exc


def _run_config_from(raw: dict) -> RunConfig:
    known = {
        "mode",
        "rounds",
        "history_window",
        "repeats",
        "seed",
        "dataset_kind",
        "rag_k",
        "temperature",
        "reasoning_effort",
        "max_output",
        "embed_dim",
        "relearn_per_repeat",
    }
    if "mode" not in raw:
        raise ConfigError("config is missing required field 'mode'")
    config = RunConfig(**{k: raw[k] for k in known if k in raw})
    config.validate()
    return config


def _resolve_split(raw: dict, corpus, base: Path):
    has_file = "split_file" in raw
    has_ratios = "ratios" in raw
    if has_file == has_ratios:
        raise ConfigError("config must supply exactly one of 'split_file' or 'ratios'")
    if has_file:
        return load_split_file(base / raw["split_file"], corpus)
    ratios = raw["ratios"]
    if not isinstance(ratios, list) or len(ratios) != 3:
        raise ConfigError("'ratios' must be a list of three numbers")
    return split_corpus(corpus, tuple(ratios), int(raw.get("seed", 0)))


def _load_reference_rubric(path: Path) -> list[str]:
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read reference rubric {path}: {exc}") from exc
    if not isinstance(raw, list) or not all(isinstance(item, str) and item for item in raw):
        raise ConfigError(f"reference rubric {path} must be a JSON array of non-empty strings")
    return raw


def cmd_run(args) -> int:
    if args.resume:
        run_dir = Path(args.resume)
        meta_path = run_dir / "run.json"
        if not meta_path.exists():
            raise ConfigError(f"cannot resume: {meta_path} does not exist")
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        raw = meta["raw_config"]
        base = Path(meta["config_base"])
        resume = True
    else:
        if not args.config:
            raise ConfigError("either --config or --resume is required")
        raw = load_config_file(args.config)
        base = Path(args.config).resolve().parent
        if "run_dir" not in raw:
            raise ConfigError("config is missing required field 'run_dir'")
        run_dir = (base / raw["run_dir"]).resolve()
        resume = False

    if args.relearn_per_repeat:
        raw = dict(raw, relearn_per_repeat=True)
    config = _run_config_from(raw)
    corpus_path = base / raw["corpus"] if "corpus" in raw else None
    if corpus_path is None:
        raise ConfigError("config is missing required field 'corpus'")
    corpus = load_corpus(corpus_path)
    split = _resolve_split(raw, corpus, base)

    reference_items = None
    if raw.get("agreement") or raw.get("revision"):
        if "reference_rubric" not in raw:
            raise ConfigError("agreement/revision evaluations need 'reference_rubric'")
        reference_items = _load_reference_rubric(base / raw["reference_rubric"])

    run_dir.mkdir(parents=True, exist_ok=True)
    meta = {
        "raw_config": raw,
        "config_base": str(base),
        "config": config.to_dict(),
        "corpus": str(corpus_path),
        "corpus_hash": hash_file(corpus_path),
        "task": Path(corpus_path).stem,
        "split": split.to_dict(),
    }
    (run_dir / "run.json").write_text(
        json.dumps(meta, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )

    provider_config = dict(raw.get("provider") or {})
    if "mock_script" in provider_config:
        provider_config["mock_script"] = str(base / provider_config["mock_script"])
    journal = Journal(run_dir / "journal.jsonl", resume=resume)
    gateway = gateway_from_env(journal, provider_config)
    session = PipelineSession(gateway, corpus, split, config, run_dir=run_dir)

    if config.relearn_per_repeat and config.mode in ("initial_only", "fieldwise_refine", "commentwise_refine"):
        means = []
        for repeat in range(config.repeats):
            sub = PipelineSession(
                gateway,
                corpus,
                split,
                RunConfig(**{**config.to_dict(), "repeats": 1, "relearn_per_repeat": False}),
                run_dir=run_dir / f"relearn_{repeat}",
            )
            sub_result = sub.run()
            if sub_result.test and sub_result.test.mean is not None:
                means.append(sub_result.test.mean)
        from .pipeline import format_mean_std

        rendered = format_mean_std(means) if means else "n/a"
        print(f"relearn-per-repeat test score: {rendered}")
        return EXIT_OK

    try:
        result = session.run()
    except RubricLearnError as exc:
        journal.append("note", note="run_failed", error=type(exc).__name__, message=str(exc))
        raise
    if result.best_val_round is not None:
        print(f"best validation round: {result.best_val_round}")
    if result.test is not None:
        print(f"test score: {result.test.rendered}")

    if reference_items and config.mode in ("initial_only", "fieldwise_refine", "commentwise_refine"):
        _run_downstream_evaluations(
            session, gateway, corpus, split, config, reference_items, raw, run_dir, meta["task"]
        )
    return EXIT_OK


def _run_downstream_evaluations(
    session, gateway, corpus, split, config, reference_items, raw, run_dir, task
) -> None:
    initial = session._load_rubric(0)
    results = json.loads((run_dir / "results.json").read_text(encoding="utf-8"))
    best_round = results.get("best_val_round")
    best = session._load_rubric(best_round) if best_round is not None else None

    if raw.get("agreement"):
        rows = []
        for kind, rubric in (("initial", initial), ("best_val", best)):
            if rubric is None:
                continue
            for repeat in range(config.repeats):
                result = score_rubric_agreement(
                    gateway, reference_items, rubric, lane=f"repeat={repeat}"
                )
                rows.append(
                    {
                        "rubric_kind": kind,
                        "repeat": repeat,
                        "recall": result.recall,
                        "precision": result.precision,
                        "h_mean": result.h_mean,
                    }
                )
        write_agreement_csv(run_dir / "report" / "agreement.csv", task, rows)
        print(f"agreement rows written: {len(rows)}")

    if raw.get("revision"):
        conditions: dict[str, Rubric | None] = {"no_rubric": None}
        if initial is not None:
            conditions["initial"] = initial
        if best is not None:
            conditions["best_val"] = best
        experiment = run_revision_experiment(
            gateway,
            corpus.subset(split.test),
            conditions,
            reference_items,
            rounds=int(raw.get("revision_rounds", 3)),
            repeats=config.repeats,
        )
        rows = [
            {"condition": condition, "repeat": repeat, "delta": delta}
            for condition, summary in sorted(experiment.summaries.items())
            for repeat, delta in enumerate(summary.per_repeat_deltas)
        ]
        write_revision_csv(run_dir / "report" / "revision.csv", task, rows)
        for condition, summary in sorted(experiment.summaries.items()):
            print(f"revision {condition}: {summary.rendered}")


def cmd_report(args) -> int:
    written = write_report(args.run_dirs, args.out)
    for path in written:
        print(path)
    return EXIT_OK


def cmd_split(args) -> int:
    corpus = load_corpus(args.corpus)
    ratios = tuple(float(x) for x in args.ratios.split(","))
    split = split_corpus(corpus, ratios, args.seed)
    save_split_file(split, args.out)
    print(f"{args.out}: sizes {split.sizes()}")
    return EXIT_OK


def cmd_prompts_dump(args) -> int:
    try:
        prompts = build_fixture_prompts(args.fixture)
    except KeyError as exc:
        raise ConfigError(str(exc)) from exc
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for family in PROMPT_FAMILIES:
        path = out / f"{family}.txt"
        path.write_text(render_prompt_file(prompts[family]), encoding="utf-8")
        print(path)
    return EXIT_OK


def cmd_index_build(args) -> int:
    corpus = load_corpus(args.corpus)
    if args.split_file:
        split = load_split_file(args.split_file, corpus)
    else:
        split = split_corpus(corpus, DEFAULT_RATIOS, args.seed)
    journal = Journal(Path(args.out) / "index_build_journal.jsonl")
    gateway = gateway_from_env(journal)
    index = build_index(
        gateway,
        corpus,
        split.train,
        dataset_kind=args.kind,
        dimensionality=args.dim,
        embedder_id=args.embedder_id,
    )
    key = index_cache_key(corpus, split.train, args.kind, args.dim, args.embedder_id)
    path = save_index(index, args.out, key)
    print(f"{path}: {len(index)} entries, dim {index.dimensionality}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rubriclearn",
        description="Learn reusable rubrics from inline comments and evaluate them.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a configured pipeline run")
    run.add_argument("--config", help="JSON or TOML run configuration")
    run.add_argument("--resume", metavar="RUN_DIR", help="resume an interrupted run")
    run.add_argument(
        "--relearn-per-repeat",
        action="store_true",
        help="relearn the rubric for every test repeat instead of reusing it",
    )
    run.set_defaults(func=cmd_run)

    report = sub.add_parser("report", help="emit CSV reports from run directories")
    report.add_argument("run_dirs", nargs="+")
    report.add_argument("--out", default="report", help="output directory")
    report.set_defaults(func=cmd_report)

    split = sub.add_parser("split", help="materialize a split file")
    split.add_argument("--corpus", required=True)
    split.add_argument("--ratios", default="0.6,0.2,0.2")
    split.add_argument("--seed", type=int, default=0)
    split.add_argument("--out", required=True)
    split.set_defaults(func=cmd_split)

    prompts = sub.add_parser("prompts", help="prompt utilities")
    prompts_sub = prompts.add_subparsers(dest="prompts_command", required=True)
    dump = prompts_sub.add_parser("dump", help="write every assembled prompt for a fixture")
    dump.add_argument("--fixture", default="mini")
    dump.add_argument("--out", default="prompt_dump")
    dump.set_defaults(func=cmd_prompts_dump)

    index = sub.add_parser("index", help="embedding index utilities")
    index_sub = index.add_subparsers(dest="index_command", required=True)
    build = index_sub.add_parser("build", help="build and cache the train-split index")
    build.add_argument("--corpus", required=True)
    build.add_argument("--split-file")
    build.add_argument("--seed", type=int, default=0)
    build.add_argument("--kind", default="default", choices=("default", "essay"))
    build.add_argument("--dim", type=int, default=3072)
    build.add_argument("--embedder-id", default="default")
    build.add_argument("--out", default="index_cache")
    build.set_defaults(func=cmd_index_build)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, CorpusError, SplitError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ProviderError, MockScriptError) as exc:
        print(f"provider error: {exc}", file=sys.stderr)
        return EXIT_PROVIDER
    except ExtractionError as exc:
        print(f"structured-output error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except RubricLearnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
