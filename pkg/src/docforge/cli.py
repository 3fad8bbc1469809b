"""``docforge`` command line: ingest, generate and evaluate.

Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from .errors import DocforgeError, StageError
from .evalkit import ScoreMatrix, evaluate_corpus, render_report
from .gateway import HttpProvider, LLMGateway, MockFault, MockProvider, ModelConfig
from .groundtruth import GroundtruthStore
from .ingestion import ArchiveClient, IngestionConfig, build_bundle, cache_load, cache_store, fetch_artifacts
from .model import EPOCH, DocumentationSource, DocumentationType, RepositoryRef
from .pipeline import PipelineConfig, generate_documentation, output_dir
from .promptkit import DEFAULT_BUDGET_CHARS

logger = logging.getLogger("docforge")

TYPE_IDS = [t.value for t in DocumentationType]
SOURCE_IDS = [s.value for s in DocumentationSource]
DEFAULT_CACHE_DIR = ".docforge-cache"
LLM_URL_ENV = "DOCFORGE_LLM_URL"

EXIT_OK, EXIT_USAGE, EXIT_FAILURE = 0, 1, 2

# flags every subcommand must end up with, from the command line or --config
REQUIRED = {
    "ingest": ("repo",),
    "generate": ("repo", "doc_type", "out", "gt"),
    "evaluate": ("generated", "groundtruth"),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


class JsonFormatter(logging.Formatter):
    def format(self, record: logging.LogRecord) -> str:
        payload = {
            "time": datetime.fromtimestamp(record.created, timezone.utc).isoformat(timespec="milliseconds"),
            "level": record.levelname.lower(),
            "logger": record.name,
            "message": record.getMessage(),
        }
        if record.exc_info:
            payload["exception"] = self.formatException(record.exc_info)
        return json.dumps(payload, ensure_ascii=False)


def _setup_logging(json_logs: bool, verbose: bool) -> None:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(JsonFormatter() if json_logs else logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger("docforge")
    root.handlers[:] = [handler]
    root.setLevel(logging.INFO if (verbose or json_logs) else logging.WARNING)
    root.propagate = False


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="docforge",
        description="Generate per-type documentation from repository artifacts and score it.",
        epilog=f"documentation types: {', '.join(TYPE_IDS)}; sources: {', '.join(SOURCE_IDS)}",
    )
    parser.add_argument("--config", type=Path, help="JSON file with default values for any flag")
    parser.add_argument("--json-logs", action="store_true", help="emit progress logs as JSON lines on stderr")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="{ingest,generate,evaluate}")

    ingest = sub.add_parser("ingest", help="fetch artifact streams into the bundle cache")
    ingest.add_argument("--repo", help="repository as owner/name")
    ingest.add_argument("--cache-dir", default=DEFAULT_CACHE_DIR)
    ingest.add_argument("--source", action="append", choices=SOURCE_IDS, dest="sources",
                        help="source to ingest, repeatable (default: all five)")
    _add_fetch_flags(ingest)

    gen = sub.add_parser("generate", help="run the two-level pipeline for one documentation type")
    gen.add_argument("--repo", help="repository as owner/name")
    gen.add_argument("--doc-type", choices=TYPE_IDS, help="documentation type to generate")
    gen.add_argument("--out", type=Path, help="output root directory")
    gen.add_argument("--gt", type=Path, help="groundtruth root the exemplar shots are drawn from")
    gen.add_argument("--provider", choices=["mock", "http"], default="mock")
    gen.add_argument("--offline", action="store_true", help="never fetch; every bundle must be cached")
    gen.add_argument("--cache-dir", default=DEFAULT_CACHE_DIR)
    gen.add_argument("--mock-fixtures", type=Path,
                     help="repository directory (groundtruth layout) the mock provider answers from")
    gen.add_argument("--mock-fault", action="append", default=[], metavar="SOURCE=MODE",
                     help=f"script a mock fault; SOURCE is a source id or 'final', MODE one of "
                          f"{', '.join(f.value for f in MockFault)}")
    gen.add_argument("--model-id", default=None)
    gen.add_argument("--llm-url", default=None, help=f"HTTP provider endpoint (or ${LLM_URL_ENV})")
    gen.add_argument("--budget", type=int, default=DEFAULT_BUDGET_CHARS, help="context budget in characters")
    gen.add_argument("--retain", choices=["head", "tail"], default="head",
                     help="which end of an oversized context to keep")
    _add_fetch_flags(gen)

    ev = sub.add_parser("evaluate", help="score generated documents against groundtruth")
    ev.add_argument("--generated", type=Path)
    ev.add_argument("--groundtruth", type=Path)
    ev.add_argument("--report", type=Path, help="write the report here instead of stdout")
    ev.add_argument("--format", choices=["md", "csv"], default="md")
    ev.add_argument("--from-matrix", type=Path, help="render a saved score matrix JSON instead of scoring")
    ev.add_argument("--save-matrix", type=Path, help="also write the computed score matrix as JSON")
    return parser


def _add_fetch_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--archive", type=Path, help="read artifacts from a local fixture archive, not the network")
    p.add_argument("--api-base-url", default=None)
    p.add_argument("--max-records", type=int, default=300, help="per-source record cap")


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", type=Path)
    known, _ = pre.parse_known_args(argv)
    if known.config is not None:
        try:
            values = json.loads(known.config.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {known.config}: {exc}") from exc
        if not isinstance(values, dict):
            raise UsageError(f"config {known.config} must hold a JSON object")
        # config values become defaults, so explicit flags still win;
        # argparse runs type= over string defaults, so paths come out as Path
        defaults = {k.replace("-", "_"): v for k, v in values.items()}
        for sub in _subcommands(parser).values():
            sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def _subcommands(parser: argparse.ArgumentParser) -> dict[str, argparse.ArgumentParser]:
    for action in parser._actions:  # noqa: SLF001
        if isinstance(action, argparse._SubParsersAction):  # noqa: SLF001
            return dict(action.choices)
    return {}


def _ingestion_config(args) -> IngestionConfig:
    kwargs = {"cache_dir": Path(args.cache_dir), "max_records_per_source": args.max_records}
    if args.api_base_url:
        kwargs["api_base_url"] = args.api_base_url
    return IngestionConfig(**kwargs)


def _parse_repo(text: str) -> RepositoryRef:
    try:
        return RepositoryRef.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_ingest(args) -> int:
    repo = _parse_repo(args.repo)
    cfg = _ingestion_config(args)
    client = ArchiveClient(args.archive) if args.archive else None
    sources = [DocumentationSource.parse(s) for s in (args.sources or SOURCE_IDS)]
    for source in sources:
        try:
            records = fetch_artifacts(repo, source, cfg, client)
            path = cache_store(build_bundle(repo, source, records), cfg)
        except DocforgeError as exc:
            raise StageError(f"ingest:{source.value}", exc) from exc
        logger.info("stored %s", path)
        print(f"{source.value}: {len(records)} records")
    return EXIT_OK


def _clock(provider: str):
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        fixed = datetime.fromtimestamp(int(epoch), timezone.utc)
        return lambda: fixed
    if provider == "mock":
        # synthetic output: a fixed stamp keeps reruns byte-identical
        return lambda: EPOCH
    return lambda: datetime.now(timezone.utc).replace(microsecond=0)


def _mock_provider(args, doc_type: DocumentationType) -> MockProvider:
    faults = {}
    for spec in args.mock_fault:
        where, sep, mode = spec.partition("=")
        try:
            source = None if where == "final" else DocumentationSource.parse(where)
            fault = MockFault(mode)
        except ValueError as exc:
            raise UsageError(f"bad --mock-fault {spec!r}: {exc}") from exc
        if not sep:
            raise UsageError(f"bad --mock-fault {spec!r}: expected SOURCE=MODE")
        faults[(doc_type, source)] = fault
    if args.mock_fixtures:
        return MockProvider.from_dir(args.mock_fixtures, faults=faults)
    return MockProvider(faults=faults)


def cmd_generate(args) -> int:
    repo = _parse_repo(args.repo)
    doc_type = DocumentationType.parse(args.doc_type)
    ingestion = _ingestion_config(args)

    def donor_input(donor: RepositoryRef, source: DocumentationSource):
        bundle = cache_load(donor, source, ingestion)
        return bundle.extracted_text if bundle is not None else None

    try:
        gt_store = GroundtruthStore.load(args.gt, input_loader=donor_input)
    except DocforgeError as exc:
        raise StageError("groundtruth", exc) from exc

    if args.provider == "mock":
        provider = _mock_provider(args, doc_type)
        model = ModelConfig(provider_id="mock", model_id=args.model_id or "mock-model",
                            context_budget_chars=args.budget)
    else:
        url = args.llm_url or os.environ.get(LLM_URL_ENV)
        if not url:
            raise UsageError(f"--provider http needs --llm-url or ${LLM_URL_ENV}")
        provider = HttpProvider(url)
        model = ModelConfig(provider_id="http", model_id=args.model_id or "default",
                            context_budget_chars=args.budget)

    cfg = PipelineConfig(
        gateway=LLMGateway(provider),
        model=model,
        ingestion=ingestion,
        client=ArchiveClient(args.archive) if args.archive else None,
        offline=args.offline,
        retain=args.retain,
        clock=_clock(args.provider),
    )
    report = generate_documentation(repo, doc_type, cfg, gt_store, out_root=args.out)
    target = output_dir(args.out, repo, doc_type)
    print(f"{target / 'final.json'}: {len(report.final.entries)} entries "
          f"(llm_calls={report.llm_calls}, repairs={report.repairs})")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    if args.from_matrix:
        try:
            matrix = ScoreMatrix.from_json(json.loads(args.from_matrix.read_text(encoding="utf-8")))
        except (OSError, ValueError, KeyError) as exc:
            raise StageError("evaluate", DocforgeError(f"cannot read matrix {args.from_matrix}: {exc}")) from exc
    else:
        matrix = evaluate_corpus(args.generated, args.groundtruth)
    fmt = "markdown" if args.format == "md" else "csv"
    text = render_report(matrix, fmt)
    if args.save_matrix:
        args.save_matrix.write_text(json.dumps(matrix.to_json(), indent=2) + "\n", encoding="utf-8")
    if args.report:
        args.report.parent.mkdir(parents=True, exist_ok=True)
        args.report.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    for note in matrix.coverage:
        logger.warning(note)
    return EXIT_OK


COMMANDS = {"ingest": cmd_ingest, "generate": cmd_generate, "evaluate": cmd_evaluate}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        if args.command is None:
            raise UsageError("a command is required")
        required = () if getattr(args, "from_matrix", None) else REQUIRED[args.command]
        missing = [k for k in required if getattr(args, k, None) in (None, "")]
        if missing:
            raise UsageError("missing required flag(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))
        _setup_logging(args.json_logs, args.verbose)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"docforge: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DocforgeError as exc:
        print(f"docforge: failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
