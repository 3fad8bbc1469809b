"""Two-level generation: five source passes in parallel, then one consolidation pass."""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Mapping

from .errors import (
    DocforgeError,
    ExtractionError,
    Level1Error,
    MissingBundlesError,
    PassFailure,
    SchemaError,
    StageError,
)
from .gateway import REPAIR_INSTRUCTION, LLMGateway, ModelConfig, RawCompletion
from .groundtruth import GroundtruthStore
from .ingestion import IngestionConfig, build_bundle, cache_load, cache_store, fetch_artifacts
from .ingestion.fetch import ArtifactClient
from .jsonextract import extract_json
from .model import (
    SOURCES,
    DocMetadata,
    DocumentationSource,
    DocumentationType,
    RepositoryRef,
    Scope,
    SourceBundle,
    StructuredDoc,
)
from .promptkit import (
    PromptText,
    build_level1_prompt,
    build_level2_prompt,
    make_prompt,
    select_level1_shots,
    select_level2_exemplar,
    trim_shot,
)
from .schema import Violation, validate_schema

logger = logging.getLogger(__name__)

REPAIR_SUFFIX = "\n" + REPAIR_INSTRUCTION


def _utc_now() -> datetime:
    return datetime.now(timezone.utc).replace(microsecond=0)


@dataclass
class PipelineConfig:
    gateway: LLMGateway
    model: ModelConfig = field(default_factory=ModelConfig)
    ingestion: IngestionConfig = field(default_factory=IngestionConfig)
    client: ArtifactClient | None = None
    offline: bool = False
    retain: str = "head"
    # each level-1 shot input is cut to budget // shot_input_share characters
    shot_input_share: int = 5
    seed: int | None = None
    clock: Callable[[], datetime] = _utc_now

    @property
    def prompt_budget(self) -> int:
        # room is kept so the repair prompt still fits the model budget
        return self.model.context_budget_chars - len(REPAIR_SUFFIX)


@dataclass
class PassResult:
    doc: StructuredDoc
    calls: int
    repairs: int
    elapsed: float
    prompt: PromptText


@dataclass
class PipelineRunReport:
    repo: RepositoryRef
    doc_type: DocumentationType
    intermediates: dict[DocumentationSource, StructuredDoc]
    final: StructuredDoc
    llm_calls: int
    repairs: int
    per_pass_timings: dict[str, float] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        """Deterministic part of the report; wall-clock timings are kept out."""
        return {
            "repo": str(self.repo),
            "doc_type": self.doc_type.value,
            "llm_calls": self.llm_calls,
            "repairs": self.repairs,
            "intermediates": {s.value: d.to_json() for s, d in self.intermediates.items()},
            "final": self.final.to_json(),
        }


def _structural(message: str) -> SchemaError:
    return SchemaError([Violation(-1, "entries", message)])


def completion_to_doc(value: Any, doc_type: DocumentationType, scope: Scope,
                      metadata: DocMetadata) -> StructuredDoc:
    """Interpret extracted JSON as a document of ``doc_type``; raise SchemaError if it is not one."""
    if isinstance(value, dict):
        if "entries" not in value:
            raise _structural("expected an object with an 'entries' list")
        if value.get("doc_type", doc_type.value) != doc_type.value:
            raise _structural(f"doc_type {value.get('doc_type')!r} does not match {doc_type.value!r}")
        entries = value["entries"]
    elif isinstance(value, list):
        entries = value
    else:
        raise _structural("expected a JSON object or a list of entries")
    if not isinstance(entries, list):
        raise _structural("'entries' must be a list")
    doc = StructuredDoc(doc_type, scope, tuple(entries), metadata)
    violations = validate_schema(doc)
    if violations:
        raise SchemaError(violations)
    return doc


def _metadata(prompt: PromptText, cfg: PipelineConfig) -> DocMetadata:
    return DocMetadata(cfg.clock(), cfg.model.model_id, prompt.fingerprint, prompt.truncated_context)


def _interpret(raw: RawCompletion, prompt: PromptText, doc_type, scope, cfg) -> StructuredDoc:
    return completion_to_doc(extract_json(raw), doc_type, scope, _metadata(prompt, cfg))


def repair_pass(raw: RawCompletion, violations, prompt: PromptText, cfg: PipelineConfig, *,
                doc_type: DocumentationType, scope: Scope, label: str = "") -> StructuredDoc:
    """Re-ask once with a corrective instruction appended; a second failure is terminal."""
    logger.info("repairing pass %s: %s", label or scope, violations)
    repair_prompt = make_prompt(prompt.text + REPAIR_SUFFIX, cfg.model.context_budget_chars,
                                prompt.truncated_context)
    second = cfg.gateway.complete(repair_prompt, cfg.model)
    try:
        return _interpret(second, prompt, doc_type, scope, cfg)
    except (ExtractionError, SchemaError) as exc:
        raise PassFailure(label or str(scope), f"invalid output after repair: {exc}",
                          [raw.text, second.text]) from exc


def _execute(prompt: PromptText, doc_type, scope, cfg: PipelineConfig, label: str) -> PassResult:
    started = time.monotonic()
    raw = cfg.gateway.complete(prompt, cfg.model)
    try:
        doc = _interpret(raw, prompt, doc_type, scope, cfg)
        calls, repairs = 1, 0
    except (ExtractionError, SchemaError) as exc:
        problems = exc.violations if isinstance(exc, SchemaError) else [str(exc)]
        doc = repair_pass(raw, problems, prompt, cfg, doc_type=doc_type, scope=scope, label=label)
        calls, repairs = 2, 1
    return PassResult(doc, calls, repairs, time.monotonic() - started, prompt)


def _level1_pass(bundle: SourceBundle, doc_type, gt_store, cfg: PipelineConfig) -> PassResult:
    source = bundle.source
    shots = select_level1_shots(doc_type, source, bundle.repo, gt_store, cfg.seed)
    limit = cfg.prompt_budget // cfg.shot_input_share
    shots = tuple(trim_shot(s, limit, cfg.retain) for s in shots)
    prompt = build_level1_prompt(shots, bundle.extracted_text, doc_type, cfg.prompt_budget, cfg.retain)
    return _execute(prompt, doc_type, Scope.single(source), cfg, source.value)


def _run_level1(bundles: Mapping[DocumentationSource, SourceBundle], doc_type, gt_store,
                cfg: PipelineConfig) -> dict[DocumentationSource, PassResult]:
    missing = [s for s in SOURCES if s not in bundles]
    if missing:
        raise Level1Error({s: DocforgeError("no bundle supplied") for s in missing}, {})
    with ThreadPoolExecutor(max_workers=len(SOURCES), thread_name_prefix="level1") as pool:
        futures = {s: pool.submit(_level1_pass, bundles[s], doc_type, gt_store, cfg) for s in bundles}
    results, failures = {}, {}
    for source in SOURCES:
        try:
            results[source] = futures[source].result()
        except DocforgeError as exc:
            failures[source] = exc
    if failures:
        raise Level1Error(failures, {s: r.doc for s, r in results.items()})
    return results


def run_level1(bundles: Mapping[DocumentationSource, SourceBundle], doc_type: DocumentationType,
               gt_store: GroundtruthStore, cfg: PipelineConfig) -> dict[DocumentationSource, StructuredDoc]:
    """One validated intermediate per source; the five passes run concurrently."""
    return {s: r.doc for s, r in _run_level1(bundles, doc_type, gt_store, cfg).items()}


def _run_level2(intermediates, doc_type, gt_store, cfg: PipelineConfig, repo: RepositoryRef) -> PassResult:
    one_shot = select_level2_exemplar(doc_type, repo, gt_store, cfg.seed)
    prompt = build_level2_prompt(one_shot, intermediates, doc_type, cfg.prompt_budget)
    return _execute(prompt, doc_type, Scope.all_sources(), cfg, "final")


def run_level2(intermediates: Mapping[DocumentationSource, StructuredDoc], doc_type: DocumentationType,
               gt_store: GroundtruthStore, cfg: PipelineConfig, repo: RepositoryRef) -> StructuredDoc:
    return _run_level2(intermediates, doc_type, gt_store, cfg, repo).doc


def obtain_bundles(repo: RepositoryRef, cfg: PipelineConfig) -> dict[DocumentationSource, SourceBundle]:
    """Cached bundles for every source, fetching and caching the missing ones unless offline."""
    bundles = {s: cache_load(repo, s, cfg.ingestion) for s in SOURCES}
    missing = [s for s, b in bundles.items() if b is None]
    if missing and cfg.offline:
        raise MissingBundlesError(repo, missing)
    for source in missing:
        records = fetch_artifacts(repo, source, cfg.ingestion, cfg.client)
        bundle = build_bundle(repo, source, records)
        cache_store(bundle, cfg.ingestion)
        bundles[source] = bundle
    return bundles


def output_dir(out_root: str | Path, repo: RepositoryRef, doc_type: DocumentationType) -> Path:
    return Path(out_root) / repo.slug / doc_type.value


def write_outputs(report: PipelineRunReport, out_root: str | Path) -> Path:
    target = output_dir(out_root, report.repo, report.doc_type)
    target.mkdir(parents=True, exist_ok=True)
    for source, doc in report.intermediates.items():
        (target / f"intermediate_{source.value}.json").write_text(doc.dumps(), encoding="utf-8")
    (target / "final.json").write_text(report.final.dumps(), encoding="utf-8")
    (target / "report.json").write_text(
        json.dumps(report.to_json(), ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    (target / "timings.json").write_text(
        json.dumps({k: round(v, 6) for k, v in report.per_pass_timings.items()}, indent=2) + "\n",
        encoding="utf-8")
    return target


def _write_debug(exc: BaseException, out_root: Path, repo: RepositoryRef, doc_type) -> None:
    failures = []
    if isinstance(exc, Level1Error):
        failures = [f for f in exc.failures.values() if isinstance(f, PassFailure)]
    elif isinstance(exc, PassFailure):
        failures = [exc]
    if not failures:
        return
    debug = Path(out_root) / "debug" / repo.slug / doc_type.value
    debug.mkdir(parents=True, exist_ok=True)
    for failure in failures:
        for k, text in enumerate(failure.raw_texts, 1):
            (debug / f"{failure.label}_attempt{k}.txt").write_text(text, encoding="utf-8")


def generate_documentation(repo: RepositoryRef, doc_type: DocumentationType, cfg: PipelineConfig,
                 gt_store: GroundtruthStore, out_root: str | Path | None = None) -> PipelineRunReport:
    """Ingest, run both levels and (optionally) write the outputs under ``out_root``.

    Failures are re-raised as StageError labelled ingest, level1 or level2.
    """
    try:
        bundles = obtain_bundles(repo, cfg)
    except DocforgeError as exc:
        raise StageError("ingest", exc) from exc
    stage = "level1"
    try:
        level1 = _run_level1(bundles, doc_type, gt_store, cfg)
        stage = "level2"
        intermediates = {s: r.doc for s, r in level1.items()}
        level2 = _run_level2(intermediates, doc_type, gt_store, cfg, repo)
    except DocforgeError as exc:
        if out_root is not None:
            _write_debug(exc, Path(out_root), repo, doc_type)
        raise StageError(stage, exc) from exc

    passes = list(level1.values()) + [level2]
    timings = {s.value: r.elapsed for s, r in level1.items()}
    timings["final"] = level2.elapsed
    report = PipelineRunReport(
        repo=repo,
        doc_type=doc_type,
        intermediates=intermediates,
        final=level2.doc,
        llm_calls=sum(p.calls for p in passes),
        repairs=sum(p.repairs for p in passes),
        per_pass_timings=timings,
    )
    if out_root is not None:
        write_outputs(report, out_root)
    return report
