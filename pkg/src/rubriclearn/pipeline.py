"""The learn -> predict -> judge -> refine loop, selection, and test repeats.

Round ``t`` covers prediction and judging on train (refinement signal) and
validation (round selection) under rubric ``R_t``; refinement then produces
``R_{t+1}``. A run with ``rounds=R`` therefore evaluates rounds 0..R and
refines after rounds 0..R-1. State persists at round boundaries, so an
aborted run resumes exactly where the journal left off.
"""

from __future__ import annotations

import json
import logging
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .corpus import Artifact, Corpus, CorpusSplit, mean_content_score
from .errors import ConfigError, ExtractionError, ProviderError
from .gateway import ChatRequest, Gateway
from .prompts import (
    CaseFeedback,
    JudgePair,
    SlotHistory,
    SlotRoundEntry,
    build_generation_prompt,
    build_judge_prompt,
    build_refinement_prompt,
    build_rubric_learning_prompt,
)
from .records import PredictionRecord, records_from_generation, split_scores
from .retrieval import build_index, run_top1_baseline, run_top3_rag_baseline
from .rubric import Rubric, deserialize_rubric, render_criterion_id, serialize_rubric

logger = logging.getLogger(__name__)

MODES = (
    "no_rubric",
    "initial_only",
    "fieldwise_refine",
    "commentwise_refine",
    "top1_retrieval",
    "top3_rag",
)
RUBRIC_MODES = ("initial_only", "fieldwise_refine", "commentwise_refine")
# Rounds whose validation split has more missing scores than this fraction
# are flagged invalid for selection.
MISSING_INVALID_FRACTION = 0.2


@dataclass(frozen=True)
class RunConfig:
    mode: str
    rounds: int = 10
    history_window: int = 3
    repeats: int = 5
    seed: int = 0
    dataset_kind: str = "default"
    rag_k: int = 3
    temperature: float = 1.0
    reasoning_effort: str = "low"
    max_output: int = 16384
    embed_dim: int = 3072
    relearn_per_repeat: bool = False

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.rounds < 0:
            raise ConfigError("rounds must be >= 0")
        if self.history_window < 0:
            raise ConfigError("history_window must be >= 0")
        if self.repeats < 1:
            raise ConfigError("repeats must be >= 1")
        if self.rag_k < 1:
            raise ConfigError("rag_k must be >= 1")

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "rounds": self.rounds,
            "history_window": self.history_window,
            "repeats": self.repeats,
            "seed": self.seed,
            "dataset_kind": self.dataset_kind,
            "rag_k": self.rag_k,
            "temperature": self.temperature,
            "reasoning_effort": self.reasoning_effort,
            "max_output": self.max_output,
            "embed_dim": self.embed_dim,
            "relearn_per_repeat": self.relearn_per_repeat,
        }


@dataclass(frozen=True)
class RefinementSignal:
    """Per-instance bundle of prediction outcomes across executed rounds."""

    instance_key: tuple[str, int]
    entries: tuple[PredictionRecord, ...]  # newest round first


@dataclass(frozen=True)
class RoundResult:
    round: int
    train_mean: float | None
    train_missing: int
    validation_mean: float | None
    validation_missing: int
    per_case: dict
    valid_for_selection: bool

    def to_dict(self) -> dict:
        return {
            "round": self.round,
            "train_mean": self.train_mean,
            "train_missing": self.train_missing,
            "validation_mean": self.validation_mean,
            "validation_missing": self.validation_missing,
            "per_case": self.per_case,
            "valid_for_selection": self.valid_for_selection,
        }


@dataclass(frozen=True)
class TestEvaluation:
    per_repeat_means: tuple
    per_repeat_missing: tuple
    mean: float | None
    std: float | None
    rendered: str

    def to_dict(self) -> dict:
        return {
            "per_repeat_means": list(self.per_repeat_means),
            "per_repeat_missing": list(self.per_repeat_missing),
            "mean": self.mean,
            "std": self.std,
            "rendered": self.rendered,
        }


@dataclass
class RunResult:
    config: RunConfig
    round_results: list[RoundResult] = field(default_factory=list)
    best_val_round: int | None = None
    test: TestEvaluation | None = None


def format_mean_std(means: Sequence[float]) -> str:
    """Render repeat means as ``mean ± std`` (population std, two decimals)."""
    values = list(means)
    if not values:
        raise ValueError("cannot render mean ± std over an empty set")
    mean = sum(values) / len(values)
    std = statistics.pstdev(values)
    return f"{mean:.2f} ± {std:.2f}"


def select_best_round(round_results: Sequence[RoundResult]) -> int:
    """Argmax of validation mean; earliest round on ties.

    Rounds flagged invalid (too many missing scores) are skipped unless every
    round is invalid, in which case selection falls back to all rounds.
    """
    if not round_results:
        raise ValueError("no rounds to select from")
    candidates = [r for r in round_results if r.valid_for_selection]
    if not candidates:
        logger.warning("every round is invalid for selection; falling back to all rounds")
        candidates = list(round_results)
    best = None
    for result in candidates:
        mean = result.validation_mean
        if mean is None:
            continue
        if best is None or mean > best.validation_mean:
            best = result
    if best is None:
        return candidates[0].round
    return best.round


def collect_signals(
    records_by_round: dict[int, list[PredictionRecord]],
    current_round: int,
    history_window: int,
) -> list[RefinementSignal]:
    """Group per-instance records over the current round plus the history window."""
    window = [r for r in range(current_round, current_round - history_window - 1, -1) if r >= 0]
    order: list[tuple[str, int]] = []
    grouped: dict[tuple[str, int], list[PredictionRecord]] = {}
    for round_number in window:
        for record in records_by_round.get(round_number, []):
            if record.instance_key not in grouped:
                grouped[record.instance_key] = []
                order.append(record.instance_key)
            grouped[record.instance_key].append(record)
    return [RefinementSignal(instance_key=key, entries=tuple(grouped[key])) for key in order]


def _case_feedback(
    artifacts: Sequence[Artifact],
    signals: list[RefinementSignal],
    current_round: int,
) -> list[CaseFeedback]:
    by_artifact: dict[str, list[RefinementSignal]] = {}
    for signal in signals:
        by_artifact.setdefault(signal.instance_key[0], []).append(signal)
    cases = []
    for artifact in artifacts:
        slot_signals = by_artifact.get(artifact.artifact_id, [])
        slots = []
        current_scores = []
        for signal in slot_signals:
            entries = tuple(
                SlotRoundEntry(
                    round=record.round,
                    generated_comment=record.generated_comment,
                    cited_ids=tuple(render_criterion_id(ref) for ref in record.cited),
                    content_score=record.content_score,
                    judge_reasoning=record.judge_reasoning,
                )
                for record in signal.entries
            )
            newest = signal.entries[0]
            if newest.round == current_round and newest.content_score is not None:
                current_scores.append(newest.content_score)
            slots.append(
                SlotHistory(
                    target_quote=newest.target_quote,
                    reference_comment=newest.reference_comment,
                    rounds=entries,
                )
            )
        cases.append(
            CaseFeedback(
                artifact_id=artifact.artifact_id,
                prompt=artifact.prompt,
                body=artifact.body,
                slots=tuple(slots),
                content_mean=sum(current_scores) / len(current_scores) if current_scores else None,
            )
        )
    return cases


class RunPaths:
    """File layout of a run directory."""

    def __init__(self, run_dir: str | Path):
        self.root = Path(run_dir)
        self.config = self.root / "run.json"
        self.journal = self.root / "journal.jsonl"
        self.rubrics = self.root / "rubrics"
        self.records = self.root / "records"
        self.results = self.root / "results.json"
        self.report = self.root / "report"

    def ensure(self) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        self.rubrics.mkdir(exist_ok=True)
        self.records.mkdir(exist_ok=True)
        self.report.mkdir(exist_ok=True)

    def rubric_path(self, round_number: int) -> Path:
        return self.rubrics / f"round_{round_number}.json"

    def round_records_path(self, round_number: int, split_name: str) -> Path:
        return self.records / f"round_{round_number}_{split_name}.jsonl"

    def test_records_path(self, repeat: int) -> Path:
        return self.records / f"test_repeat_{repeat}.jsonl"


def _write_records(path: Path, records: Sequence[PredictionRecord]) -> None:
    lines = [json.dumps(r.to_dict(), ensure_ascii=False) for r in records]
    path.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def _read_records(path: Path) -> list[PredictionRecord]:
    records = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.strip():
            records.append(PredictionRecord.from_dict(json.loads(line)))
    return records


class PipelineSession:
    """One run of one mode over one corpus split."""

    def __init__(
        self,
        gateway: Gateway,
        corpus: Corpus,
        split: CorpusSplit,
        config: RunConfig,
        run_dir: str | Path | None = None,
        run_id: str = "",
    ):
        config.validate()
        self.gateway = gateway
        self.corpus = corpus
        self.split = split
        self.config = config
        self.run_id = run_id or (Path(run_dir).name if run_dir else "adhoc")
        self.paths = RunPaths(run_dir) if run_dir is not None else None
        if self.paths is not None:
            self.paths.ensure()
        self.records_by_round: dict[int, list[PredictionRecord]] = {}
        self.rubrics: dict[int, Rubric] = {}
        self._index = None
        self._test_failed: set[str] = set()

    # -- provider-facing steps ------------------------------------------------

    def _chat_request(self, bundle, lane: str | None) -> ChatRequest:
        return ChatRequest(
            system_text=bundle.system_text,
            user_text=bundle.user_text,
            tag=bundle.tag,
            temperature=self.config.temperature,
            reasoning_effort=self.config.reasoning_effort,
            max_output=self.config.max_output,
            lane=lane,
        )

    def learn_initial_rubric(self, lane: str | None = None) -> Rubric:
        train = self.corpus.subset(self.split.train)
        bundle = build_rubric_learning_prompt(train)
        criteria, _ = self.gateway.chat_structured(self._chat_request(bundle, lane), bundle.schema_id)
        rubric = Rubric(round=0, criteria=tuple(criteria), run_id=self.run_id)
        rubric.validate()
        self.gateway.journal.append(
            "note", note="rubric", round=0, criteria=len(rubric.criteria)
        )
        return rubric

    def _map_artifacts(self, work, items):
        """Apply per-artifact work, concurrently when the gateway cap allows.

        Results come back in submission order either way, so record order and
        round results stay deterministic; only journal interleaving varies
        above parallelism 1.
        """
        if self.gateway.parallelism <= 1 or len(items) <= 1:
            return [work(item) for item in items]
        with ThreadPoolExecutor(max_workers=self.gateway.parallelism) as pool:
            return list(pool.map(work, items))

    def predict_round(
        self,
        artifact_ids: Sequence[str],
        rubric: Rubric | None,
        round_number: int,
        lane: str | None = None,
    ) -> tuple[list[PredictionRecord], set[str]]:
        """One generation call per artifact; exactly one record per position.

        Artifacts whose generation call fails outright get flagged fallback
        records and are excluded from judging (their scores stay missing);
        the round continues.
        """

        def generate(artifact):
            positions = list(artifact.comments)
            if not positions:
                return [], False
            bundle = build_generation_prompt(artifact, positions, rubric)
            generation_failed = False
            try:
                generated, _ = self.gateway.chat_structured(
                    self._chat_request(bundle, lane), bundle.schema_id
                )
            except (ProviderError, ExtractionError) as exc:
                generation_failed = True
                self.gateway.journal.append(
                    "note",
                    note="artifact_generation_failed",
                    artifact_id=artifact.artifact_id,
                    error=type(exc).__name__,
                )
                generated = []
            aligned, report = records_from_generation(positions, generated, rubric, round_number)
            if report.fallback_count or report.dropped_cited or report.extra_comments:
                self.gateway.journal.append(
                    "note",
                    note="generation_alignment",
                    artifact_id=artifact.artifact_id,
                    fallbacks=report.fallback_count,
                    dropped_cited=[str(d) for d in report.dropped_cited],
                    extra_comments=report.extra_comments,
                )
            return aligned, generation_failed

        artifacts = self.corpus.subset(artifact_ids)
        records: list[PredictionRecord] = []
        failed: set[str] = set()
        for artifact, (aligned, generation_failed) in zip(
            artifacts, self._map_artifacts(generate, artifacts)
        ):
            records.extend(aligned)
            if generation_failed:
                failed.add(artifact.artifact_id)
        return records, failed

    def judge_round(
        self,
        records: list[PredictionRecord],
        skip_artifacts: set[str] | None = None,
        lane: str | None = None,
    ) -> list[PredictionRecord]:
        """One judge call per artifact over its batched pairs, aligned by order.

        A score list whose length mismatches the pair count marks that
        artifact's instances missing (never partially assigned).
        """
        skip = skip_artifacts or set()
        by_artifact: dict[str, list[int]] = {}
        for i, record in enumerate(records):
            by_artifact.setdefault(record.instance_key[0], []).append(i)
        groups = [(a, idx) for a, idx in by_artifact.items() if a not in skip]

        def judge(group):
            artifact_id, indices = group
            artifact = self.corpus.artifact(artifact_id)
            pairs = [
                JudgePair(
                    target_quote=records[i].target_quote,
                    reference_comment=records[i].reference_comment,
                    generated_comment=records[i].generated_comment,
                    reference_issue_type=records[i].reference_issue_type,
                    generated_issue_type=records[i].issue_type,
                )
                for i in indices
            ]
            bundle = build_judge_prompt(artifact, pairs)
            try:
                pair_scores, _ = self.gateway.chat_structured(
                    self._chat_request(bundle, lane), bundle.schema_id
                )
            except (ProviderError, ExtractionError) as exc:
                self.gateway.journal.append(
                    "note",
                    note="artifact_judging_failed",
                    artifact_id=artifact_id,
                    error=type(exc).__name__,
                )
                return None
            if len(pair_scores) != len(pairs):
                self.gateway.journal.append(
                    "note",
                    note="judge_alignment_error",
                    artifact_id=artifact_id,
                    expected=len(pairs),
                    returned=len(pair_scores),
                )
                return None
            return pair_scores

        scored = list(records)
        for (artifact_id, indices), pair_scores in zip(
            groups, self._map_artifacts(judge, groups)
        ):
            if pair_scores is None:
                continue
            for i, score in zip(indices, pair_scores):
                scored[i] = records[i].scored(score.content_score, score.reasoning)
        return scored

    def refine_rubric(
        self,
        current: Rubric,
        signals: list[RefinementSignal],
        score_history: Sequence[tuple[int, float | None]],
        prior_rubrics: Sequence[Rubric],
    ) -> Rubric:
        artifacts = self.corpus.subset(self.split.train)
        cases = _case_feedback(artifacts, signals, current.round)
        bundle = build_refinement_prompt(
            current,
            prior_rubrics,
            cases,
            score_history,
            fieldwise=(self.config.mode == "fieldwise_refine"),
        )
        criteria, _ = self.gateway.chat_structured(self._chat_request(bundle, None), bundle.schema_id)
        rubric = Rubric(
            round=current.round + 1,
            criteria=tuple(criteria),
            run_id=self.run_id,
            parent_round=current.round,
        )
        rubric.validate()
        self.gateway.journal.append(
            "note", note="rubric", round=rubric.round, criteria=len(rubric.criteria)
        )
        return rubric

    # -- persistence ----------------------------------------------------------

    def _save_rubric(self, rubric: Rubric) -> None:
        self.rubrics[rubric.round] = rubric
        if self.paths is not None:
            self.paths.rubric_path(rubric.round).write_bytes(serialize_rubric(rubric))

    def _load_rubric(self, round_number: int) -> Rubric | None:
        if round_number in self.rubrics:
            return self.rubrics[round_number]
        if self.paths is None:
            return None
        path = self.paths.rubric_path(round_number)
        if not path.exists():
            return None
        rubric = deserialize_rubric(path.read_bytes())
        self.rubrics[round_number] = rubric
        return rubric

    def _save_round_records(self, round_number: int, split_name: str, records) -> None:
        if self.paths is not None:
            _write_records(self.paths.round_records_path(round_number, split_name), records)

    def _save_results(self, result: RunResult) -> None:
        if self.paths is None:
            return
        payload = {
            "mode": self.config.mode,
            "rounds": [r.to_dict() for r in result.round_results],
            "best_val_round": result.best_val_round,
            "test": result.test.to_dict() if result.test else None,
        }
        self.paths.results.write_text(
            json.dumps(payload, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
        )

    def _load_completed(self) -> list[RoundResult]:
        if self.paths is None or not self.paths.results.exists():
            return []
        payload = json.loads(self.paths.results.read_text(encoding="utf-8"))
        results = []
        for raw in payload.get("rounds", []):
            results.append(
                RoundResult(
                    round=raw["round"],
                    train_mean=raw["train_mean"],
                    train_missing=raw["train_missing"],
                    validation_mean=raw["validation_mean"],
                    validation_missing=raw["validation_missing"],
                    per_case=raw["per_case"],
                    valid_for_selection=raw["valid_for_selection"],
                )
            )
        return results

    def _reload_round_records(self, upto_round: int) -> None:
        if self.paths is None:
            return
        for round_number in range(upto_round + 1):
            path = self.paths.round_records_path(round_number, "train")
            if path.exists():
                self.records_by_round[round_number] = _read_records(path)

    def _write_scores_csv(self, round_results: Sequence[RoundResult]) -> None:
        if self.paths is None:
            return
        lines = ["round,split,mean,missing_count"]
        for result in round_results:
            train = "" if result.train_mean is None else f"{result.train_mean:.4f}"
            val = "" if result.validation_mean is None else f"{result.validation_mean:.4f}"
            lines.append(f"{result.round},train,{train},{result.train_missing}")
            lines.append(f"{result.round},validation,{val},{result.validation_missing}")
        (self.paths.report / "scores.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    # -- round loop -----------------------------------------------------------

    def _round_means(self, records, split_name: str):
        present, missing = split_scores(records)
        mean = mean_content_score(present) if present else None
        if missing:
            logger.warning(
                "%s round has %d missing scores (excluded from the mean)", split_name, missing
            )
        return mean, missing

    def _evaluate_round(self, rubric: Rubric | None, round_number: int) -> RoundResult:
        train_records, train_failed = self.predict_round(self.split.train, rubric, round_number)
        train_records = self.judge_round(train_records, skip_artifacts=train_failed)
        self.records_by_round[round_number] = train_records
        self._save_round_records(round_number, "train", train_records)

        val_records, val_failed = self.predict_round(self.split.validation, rubric, round_number)
        val_records = self.judge_round(val_records, skip_artifacts=val_failed)
        self._save_round_records(round_number, "validation", val_records)

        train_mean, train_missing = self._round_means(train_records, "train")
        val_mean, val_missing = self._round_means(val_records, "validation")

        per_case: dict[str, float | None] = {}
        for artifact_id in self.split.train:
            scores = [
                r.content_score
                for r in train_records
                if r.instance_key[0] == artifact_id and r.content_score is not None
            ]
            per_case[artifact_id] = sum(scores) / len(scores) if scores else None

        missing_fraction = val_missing / max(1, len(val_records))
        result = RoundResult(
            round=round_number,
            train_mean=train_mean,
            train_missing=train_missing,
            validation_mean=val_mean,
            validation_missing=val_missing,
            per_case=per_case,
            valid_for_selection=missing_fraction <= MISSING_INVALID_FRACTION,
        )
        self.gateway.journal.append(
            "note",
            note="round_result",
            round=round_number,
            train_mean=train_mean,
            train_missing=train_missing,
            validation_mean=val_mean,
            validation_missing=val_missing,
        )
        return result

    def run_refinement(self, stop_after_round: int | None = None) -> RunResult:
        """Execute rounds 0..R with refinement between them, then select.

        ``stop_after_round`` interrupts cleanly at that round boundary (the
        round's results are persisted; the next refinement has not run);
        calling again resumes and produces the same journal suffix.
        """
        if self.config.mode not in RUBRIC_MODES:
            raise ConfigError(f"mode {self.config.mode!r} does not use rubric refinement")
        total_rounds = 0 if self.config.mode == "initial_only" else self.config.rounds

        result = RunResult(config=self.config)
        result.round_results = self._load_completed()
        start_round = len(result.round_results)
        self._reload_round_records(start_round - 1)

        if start_round > total_rounds:
            result.best_val_round = select_best_round(result.round_results)
            return result

        for round_number in range(start_round + 1):
            self._load_rubric(round_number)
        if 0 not in self.rubrics:
            self._save_rubric(self.learn_initial_rubric())

        for round_number in range(start_round, total_rounds + 1):
            rubric = self.rubrics.get(round_number)
            if rubric is None:
                # Interrupted between a round result and its refinement.
                rubric = self._refine_from_round(
                    self.rubrics[round_number - 1], result.round_results
                )
                self._save_rubric(rubric)
            round_result = self._evaluate_round(rubric, round_number)
            result.round_results.append(round_result)
            self._save_results(result)
            self._write_scores_csv(result.round_results)
            if stop_after_round is not None and round_number >= stop_after_round:
                return result
            if round_number < total_rounds:
                self._save_rubric(self._refine_from_round(rubric, result.round_results))

        result.best_val_round = select_best_round(result.round_results)
        self._save_results(result)
        self._write_scores_csv(result.round_results)
        return result

    def _refine_from_round(self, current: Rubric, round_results: Sequence[RoundResult]) -> Rubric:
        t = current.round
        signals = collect_signals(self.records_by_round, t, self.config.history_window)
        score_history = [(r.round, r.train_mean) for r in round_results if r.round <= t]
        prior_rubrics = []
        for r in range(t - 1, max(-1, t - 1 - self.config.history_window), -1):
            loaded = self._load_rubric(r)
            if loaded is not None:
                prior_rubrics.append(loaded)
        return self.refine_rubric(current, signals, score_history, prior_rubrics)

    # -- test evaluation --------------------------------------------------------

    def _ensure_index(self):
        if self._index is None:
            self._index = build_index(
                self.gateway,
                self.corpus,
                self.split.train,
                dataset_kind=self.config.dataset_kind,
                dimensionality=self.config.embed_dim,
                embedder_id="default",
            )
        return self._index

    def predict_test_records(
        self, rubric: Rubric | None, repeat: int
    ) -> list[PredictionRecord]:
        """One repeat's unscored test predictions for the configured mode."""
        lane = f"repeat={repeat}"
        mode = self.config.mode
        round_number = rubric.round if rubric is not None else 0
        if mode == "top1_retrieval":
            return run_top1_baseline(
                self.gateway,
                self._ensure_index(),
                self.corpus,
                self.split.test,
                dataset_kind=self.config.dataset_kind,
            )
        if mode == "top3_rag":
            records, _ = run_top3_rag_baseline(
                self.gateway,
                self._ensure_index(),
                self.corpus,
                self.split.test,
                k=self.config.rag_k,
                dataset_kind=self.config.dataset_kind,
                lane=lane,
            )
            return records
        records, failed = self.predict_round(self.split.test, rubric, round_number, lane=lane)
        self._test_failed = failed
        return records

    def evaluate_test(self, rubric: Rubric | None, repeats: int | None = None) -> TestEvaluation:
        """Predict+judge the test split ``repeats`` times; report mean ± std.

        The selected rubric is reused across repeats; repeats differ only by
        provider sampling (mock scripts key on the ``repeat=N`` lane).
        """
        repeats = self.config.repeats if repeats is None else repeats
        if repeats < 1:
            raise ConfigError("repeats must be >= 1")
        per_means: list[float | None] = []
        per_missing: list[int] = []
        for repeat in range(repeats):
            self._test_failed = set()
            records = self.predict_test_records(rubric, repeat)
            records = self.judge_round(
                records, skip_artifacts=self._test_failed, lane=f"repeat={repeat}"
            )
            if self.paths is not None:
                _write_records(self.paths.test_records_path(repeat), records)
            present, missing = split_scores(records)
            per_means.append(mean_content_score(present) if present else None)
            per_missing.append(missing)
            self.gateway.journal.append(
                "note",
                note="test_repeat",
                repeat=repeat,
                mean=per_means[-1],
                missing=missing,
            )
        clean = [m for m in per_means if m is not None]
        if len(clean) == len(per_means) and clean:
            overall = sum(clean) / len(clean)
            std = statistics.pstdev(clean)
            rendered = format_mean_std(clean)
        else:
            logger.warning("some test repeats produced no scores; overall mean unavailable")
            overall, std, rendered = None, None, "n/a"
        return TestEvaluation(
            per_repeat_means=tuple(per_means),
            per_repeat_missing=tuple(per_missing),
            mean=overall,
            std=std,
            rendered=rendered,
        )

    def _completed_result(self) -> RunResult | None:
        """A finished run's persisted result, so resume is a no-op."""
        if self.paths is None or not self.paths.results.exists():
            return None
        payload = json.loads(self.paths.results.read_text(encoding="utf-8"))
        if payload.get("test") is None:
            return None
        result = RunResult(config=self.config)
        result.round_results = self._load_completed()
        result.best_val_round = payload.get("best_val_round")
        raw = payload["test"]
        result.test = TestEvaluation(
            per_repeat_means=tuple(raw["per_repeat_means"]),
            per_repeat_missing=tuple(raw["per_repeat_missing"]),
            mean=raw["mean"],
            std=raw["std"],
            rendered=raw["rendered"],
        )
        return result

    def run(self, stop_after_round: int | None = None) -> RunResult:
        """End-to-end run for the configured mode (refinement modes include selection)."""
        done = self._completed_result()
        if done is not None:
            logger.info("run already complete; nothing to do")
            return done
        if self.config.mode in RUBRIC_MODES:
            result = self.run_refinement(stop_after_round=stop_after_round)
            if stop_after_round is not None:
                return result
            best = result.best_val_round
            rubric = self._load_rubric(best)
            if rubric is None:
                raise ConfigError(f"best rubric (round {best}) is not available for testing")
            result.test = self.evaluate_test(rubric)
            self._save_results(result)
            return result
        result = RunResult(config=self.config)
        result.test = self.evaluate_test(None)
        self._save_results(result)
        return result
