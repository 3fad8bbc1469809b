"""Artifact fetching from the hosting platform or from a local fixture archive.

Clients yield platform-neutral raw dicts; :func:`fetch_artifacts` turns them
into :class:`ArtifactRecord` lists.

Raw shapes::

    pull request / issue: {"number", "title", "body", "created_at", "url", "comments": [str]}
    commit:               {"sha", "message", "created_at", "url"}
    file:                 {"path", "content"}
"""

from __future__ import annotations

import base64
import json
import logging
import threading
import time
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Protocol
from urllib.parse import urlsplit

import httpx

from ..errors import (
    FetchAuthenticationError,
    FetchError,
    RepositoryNotFoundError,
    RetriableFetchError,
)
from ..model import ArtifactRecord, DocumentationSource, RepositoryRef, parse_timestamp
from .comments import extract_comments
from .config import IngestionConfig

logger = logging.getLogger(__name__)

DATED_SOURCES = (DocumentationSource.PULL_REQUESTS, DocumentationSource.ISSUES, DocumentationSource.COMMITS)


class ArtifactClient(Protocol):
    def pull_requests(self, repo: RepositoryRef, limit: int) -> Iterator[dict]: ...

    def issues(self, repo: RepositoryRef, limit: int) -> Iterator[dict]: ...

    def commits(self, repo: RepositoryRef, limit: int) -> Iterator[dict]: ...

    def files(self, repo: RepositoryRef) -> Iterator[dict]: ...


class RateGovernor:
    """Serializes requests to the same API host across threads."""

    def __init__(self, min_interval: float = 0.0):
        self.min_interval = min_interval
        self._locks: dict[str, threading.Lock] = {}
        self._last: dict[str, float] = {}
        self._guard = threading.Lock()

    @contextmanager
    def slot(self, host: str):
        with self._guard:
            lock = self._locks.setdefault(host, threading.Lock())
        with lock:
            wait = self._last.get(host, 0.0) + self.min_interval - time.monotonic()
            if wait > 0:
                time.sleep(wait)
            try:
                yield
            finally:
                self._last[host] = time.monotonic()


DEFAULT_GOVERNOR = RateGovernor()


class GitHubClient:
    """Minimal REST client for the hosting platform's v3 API."""

    def __init__(self, cfg: IngestionConfig, transport: httpx.BaseTransport | None = None,
                 sleep=None, governor: RateGovernor | None = None):
        self.cfg = cfg
        headers = {"Accept": "application/vnd.github+json", "User-Agent": "docforge"}
        if cfg.auth_token:
            headers["Authorization"] = f"Bearer {cfg.auth_token}"
        self._http = httpx.Client(base_url=cfg.api_base_url, headers=headers, timeout=30.0,
                                  transport=transport)
        # looked up per call so tests can patch time.sleep
        self._sleep = sleep or (lambda seconds: time.sleep(seconds))
        self._governor = governor or DEFAULT_GOVERNOR
        self._host = urlsplit(cfg.api_base_url).netloc
        self.requests_made = 0

    def close(self) -> None:
        self._http.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _get(self, url: str, params: dict | None = None) -> httpx.Response:
        attempts = 0
        while True:
            attempts += 1
            try:
                with self._governor.slot(self._host):
                    self.requests_made += 1
                    response = self._http.get(url, params=params)
            except httpx.TransportError as exc:
                reason = f"network error: {exc}"
            else:
                status = response.status_code
                if status < 400:
                    return response
                if status == 401:
                    raise FetchAuthenticationError(f"authentication rejected for {url}")
                if status == 404:
                    raise RepositoryNotFoundError(f"not found: {url}")
                rate_limited = status == 429 or (
                    status == 403 and response.headers.get("x-ratelimit-remaining") == "0"
                )
                if status == 403 and not rate_limited:
                    raise FetchAuthenticationError(f"access forbidden for {url}")
                if not rate_limited and status < 500:
                    raise FetchError(f"unexpected HTTP {status} for {url}")
                reason = f"HTTP {status}"
            if attempts >= self.cfg.max_attempts:
                raise RetriableFetchError(f"giving up on {url}: {reason}", attempts)
            delay = self.cfg.backoff_base * self.cfg.backoff_factor ** (attempts - 1)
            logger.warning("retrying %s in %.1fs (%s)", url, delay, reason)
            self._sleep(delay)

    def _paginate(self, path: str, params: dict, limit: int | None = None) -> Iterator[dict]:
        url: str | None = path
        params = {**params, "per_page": self.cfg.page_size}
        seen = 0
        while url:
            response = self._get(url, params=params)
            items = response.json()
            for item in items:
                yield item
                seen += 1
                if limit is not None and seen >= limit:
                    return
            url = response.links.get("next", {}).get("url")
            params = None  # the next link already carries the query

    def _discussion(self, repo: RepositoryRef, number: int) -> list[str]:
        return [
            c.get("body") or ""
            for c in self._paginate(f"/repos/{repo.owner}/{repo.name}/issues/{number}/comments", {})
        ]

    def _topic(self, repo: RepositoryRef, item: dict) -> dict:
        return {
            "number": item["number"],
            "title": item.get("title") or "",
            "body": item.get("body") or "",
            "created_at": item.get("created_at"),
            "url": item.get("html_url"),
            "comments": self._discussion(repo, item["number"]) if item.get("comments", 1) else [],
        }

    def pull_requests(self, repo: RepositoryRef, limit: int) -> Iterator[dict]:
        params = {"state": "all", "sort": "created", "direction": "desc"}
        for item in self._paginate(f"/repos/{repo.owner}/{repo.name}/pulls", params, limit):
            yield self._topic(repo, item)

    def issues(self, repo: RepositoryRef, limit: int) -> Iterator[dict]:
        params = {"state": "all", "sort": "created", "direction": "desc"}
        count = 0
        for item in self._paginate(f"/repos/{repo.owner}/{repo.name}/issues", params):
            if "pull_request" in item:
                continue
            yield self._topic(repo, item)
            count += 1
            if count >= limit:
                return

    def commits(self, repo: RepositoryRef, limit: int) -> Iterator[dict]:
        for item in self._paginate(f"/repos/{repo.owner}/{repo.name}/commits", {}, limit):
            commit = item.get("commit", {})
            stamp = (commit.get("committer") or {}).get("date") or (commit.get("author") or {}).get("date")
            yield {
                "sha": item["sha"],
                "message": commit.get("message") or "",
                "created_at": stamp,
                "url": item.get("html_url"),
            }

    def files(self, repo: RepositoryRef) -> Iterator[dict]:
        base = f"/repos/{repo.owner}/{repo.name}"
        branch = self._get(base).json().get("default_branch", "main")
        tree = self._get(f"{base}/git/trees/{branch}", params={"recursive": "1"}).json()
        for node in tree.get("tree", []):
            path = node.get("path", "")
            if node.get("type") != "blob":
                continue
            if not (self.cfg.is_textual(path) or self.cfg.grammar_for(path)):
                continue
            blob = self._get(f"{base}/git/blobs/{node['sha']}").json()
            raw = base64.b64decode(blob.get("content", "")) if blob.get("encoding") == "base64" \
                else (blob.get("content") or "").encode()
            try:
                yield {"path": path, "content": raw.decode("utf-8")}
            except UnicodeDecodeError:
                logger.debug("skipping non-UTF-8 file %s", path)


class ArchiveClient:
    """Reads raw artifacts from ``<root>/<owner>__<name>/<stream>.jsonl``.

    Files come from ``files.jsonl`` or, if present, a ``files/`` directory tree.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def _repo_dir(self, repo: RepositoryRef) -> Path:
        path = self.root / repo.slug
        if not path.is_dir():
            raise RepositoryNotFoundError(f"repository {repo} not present in archive {self.root}")
        return path

    def _lines(self, repo: RepositoryRef, stream: str) -> Iterator[dict]:
        path = self._repo_dir(repo) / f"{stream}.jsonl"
        if not path.is_file():
            return
        with path.open(encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, 1):
                if line.strip():
                    try:
                        yield json.loads(line)
                    except json.JSONDecodeError as exc:
                        raise FetchError(f"{path}:{line_no}: {exc}") from exc

    def pull_requests(self, repo, limit):
        return self._lines(repo, "pull_requests")

    def issues(self, repo, limit):
        return self._lines(repo, "issues")

    def commits(self, repo, limit):
        return self._lines(repo, "commits")

    def files(self, repo):
        tree = self._repo_dir(repo) / "files"
        if tree.is_dir():
            for path in sorted(p for p in tree.rglob("*") if p.is_file()):
                try:
                    content = path.read_text(encoding="utf-8")
                except UnicodeDecodeError:
                    continue
                yield {"path": path.relative_to(tree).as_posix(), "content": content}
        else:
            yield from self._lines(repo, "files")


def _stamp(value):
    return parse_timestamp(value) if value else None


def _topic_record(source: DocumentationSource, raw: dict) -> ArtifactRecord:
    parts = [raw.get("body") or ""] + [c for c in raw.get("comments", []) if c]
    body = "\n\n".join(p for p in parts if p)
    return ArtifactRecord(
        source=source,
        id=f"#{raw['number']}",
        title=raw.get("title") or None,
        body=body,
        created_at=_stamp(raw.get("created_at")),
        url=raw.get("url"),
    )


def _records_from_raw(repo, source, cfg, client) -> list[ArtifactRecord]:
    limit = cfg.max_records_per_source
    if source in (DocumentationSource.PULL_REQUESTS, DocumentationSource.ISSUES):
        raws = client.pull_requests(repo, limit) if source is DocumentationSource.PULL_REQUESTS \
            else client.issues(repo, limit)
        records = []
        for raw in raws:
            if source is DocumentationSource.ISSUES and raw.get("pull_request"):
                continue
            if not (raw.get("title") or raw.get("body") or raw.get("comments")):
                continue
            records.append(_topic_record(source, raw))
        return records
    if source is DocumentationSource.COMMITS:
        return [
            ArtifactRecord(source=source, id=raw["sha"][:12], body=raw["message"].strip(),
                           created_at=_stamp(raw.get("created_at")), url=raw.get("url"))
            for raw in client.commits(repo, limit)
            if raw.get("message", "").strip()
        ]
    records = []
    for raw in client.files(repo):
        path, content = raw["path"], raw.get("content") or ""
        if source is DocumentationSource.TEXTUAL_FILES:
            if cfg.is_textual(path) and content.strip():
                records.append(ArtifactRecord(source=source, id=path, body=content))
        else:
            grammar = cfg.grammar_for(path)
            if grammar is None:
                continue
            found = extract_comments(content, grammar)
            for warning in found.warnings:
                logger.info("%s: %s", path, warning)
            records.extend(
                ArtifactRecord(source=source, id=f"{path}#{k:04d}", body=text)
                for k, text in enumerate(found)
            )
    return records


def fetch_artifacts(repo: RepositoryRef, source: DocumentationSource, cfg: IngestionConfig,
                    client: ArtifactClient | None = None) -> list[ArtifactRecord]:
    """Fetch at most ``cfg.max_records_per_source`` records, oldest first.

    Dated streams keep the most recent records; file-based streams keep the
    first ones in path order.
    """
    own_client = client is None
    if own_client:
        client = GitHubClient(cfg)
    try:
        records = sorted(_records_from_raw(repo, source, cfg, client), key=ArtifactRecord.sort_key)
    finally:
        if own_client:
            client.close()
    limit = cfg.max_records_per_source
    if len(records) > limit:
        records = records[-limit:] if source in DATED_SOURCES else records[:limit]
    return records
