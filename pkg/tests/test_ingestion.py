import base64
import json
from datetime import datetime, timedelta, timezone
from pathlib import Path

import httpx
import pytest
from hypothesis import given, strategies as st

from docforge.errors import (
    CacheCorruptError,
    FetchAuthenticationError,
    RepositoryNotFoundError,
    RetriableFetchError,
)
from docforge.ingestion import (
    C_FAMILY,
    DOCSTRING_FAMILY,
    ArchiveClient,
    CommentGrammar,
    GitHubClient,
    IngestionConfig,
    build_bundle,
    cache_load,
    cache_store,
    extract_comments,
    fetch_artifacts,
)
from docforge.model import ArtifactRecord, DocumentationSource, RepositoryRef

CORPUS = Path(__file__).parent / "data" / "comments"
REPO = RepositoryRef("octo", "demo")
T0 = datetime(2024, 1, 1, tzinfo=timezone.utc)


def corpus_cases():
    return sorted(p for p in CORPUS.iterdir() if not p.name.endswith(".expected.json"))


@pytest.mark.parametrize("path", corpus_cases(), ids=lambda p: p.name)
def test_comment_corpus(path):
    expected = json.loads(Path(str(path) + ".expected.json").read_text())
    grammar = IngestionConfig().grammar_for(path.name)
    found = extract_comments(path.read_text(), grammar)
    assert list(found) == expected["comments"]
    assert len(found.warnings) == expected["warnings"]


def test_corpus_has_thirty_files():
    assert len(corpus_cases()) == 30


def test_grammar_rejects_prefix_markers():
    with pytest.raises(ValueError):
        CommentGrammar(line_markers=("/", "//"))
    with pytest.raises(ValueError):
        CommentGrammar(block_pairs=(("/*", ""),))


# code without any comment or quote characters never yields a comment
@given(st.text(alphabet="abcxyz =;(){}\n\t0123456789+-", max_size=200))
def test_plain_code_has_no_comments(code):
    assert list(extract_comments(code, C_FAMILY)) == []


@given(st.lists(st.text(alphabet="abc xyz", min_size=1, max_size=20).filter(str.strip), min_size=1, max_size=5))
def test_line_comments_separated_by_code_survive(texts):
    body = "".join(f"x = 1; // {t}\ny();\n" for t in texts)
    assert list(extract_comments(body, C_FAMILY)) == [t.strip() for t in texts]


@given(st.text(alphabet='abc/*#"\n ', max_size=60))
def test_lexer_is_total(body):
    # never raises, whatever the input
    extract_comments(body, C_FAMILY)
    extract_comments(body, DOCSTRING_FAMILY)


# ---- fake hosting API -------------------------------------------------------


class FakeAPI:
    def __init__(self, n_prs=3, n_issues=2, fail_first=0, status=None, headers=None):
        self.n_prs, self.n_issues = n_prs, n_issues
        self.fail_first = fail_first
        self.status, self.headers = status, headers or {}
        self.calls = 0

    def _page(self, request, items):
        per = int(request.url.params.get("per_page", 100))
        page = int(request.url.params.get("page", 1))
        chunk = items[(page - 1) * per: page * per]
        headers = {}
        if page * per < len(items):
            nxt = request.url.copy_set_param("page", page + 1)
            headers["link"] = f'<{nxt}>; rel="next"'
        return httpx.Response(200, json=chunk, headers=headers)

    def __call__(self, request: httpx.Request) -> httpx.Response:
        self.calls += 1
        if self.status is not None:
            return httpx.Response(self.status, headers=self.headers, json={})
        if self.calls <= self.fail_first:
            return httpx.Response(503, json={})
        path = request.url.path
        if path.endswith("/pulls"):
            items = [{"number": k, "title": f"PR {k}", "body": f"body {k}", "comments": 0,
                      "created_at": (T0 + timedelta(hours=k)).isoformat()} for k in range(self.n_prs, 0, -1)]
            return self._page(request, items)
        if path.endswith("/issues"):
            items = [{"number": 1000 + k, "title": f"Issue {k}", "body": "", "comments": 1,
                      "created_at": (T0 + timedelta(hours=k)).isoformat()} for k in range(self.n_issues)]
            items.append({"number": 5, "title": "a PR in disguise", "pull_request": {}, "comments": 0})
            return self._page(request, items)
        if path.endswith("/comments"):
            return httpx.Response(200, json=[{"body": "first reply"}])
        if path.endswith("/commits"):
            return self._page(request, [{"sha": f"{k:040x}", "commit": {"message": f"change {k}\n",
                                         "committer": {"date": (T0 + timedelta(days=k)).isoformat()}}}
                                        for k in range(4)])
        if path == "/repos/octo/demo":
            return httpx.Response(200, json={"default_branch": "trunk"})
        if "/git/trees/" in path:
            return httpx.Response(200, json={"tree": [
                {"path": "README.md", "type": "blob", "sha": "r1"},
                {"path": "src/a.c", "type": "blob", "sha": "c1"},
                {"path": "img.png", "type": "blob", "sha": "p1"},
                {"path": "src", "type": "tree", "sha": "t1"},
            ]})
        if "/git/blobs/" in path:
            content = {"r1": "# Demo\nHello\n", "c1": "/* adds */ int a; // ints\n"}[path.rsplit("/", 1)[1]]
            return httpx.Response(200, json={"encoding": "base64",
                                             "content": base64.b64encode(content.encode()).decode()})
        return httpx.Response(404, json={})


def _client(api, tmp_path, **cfg):
    sleeps = []
    config = IngestionConfig(cache_dir=tmp_path, auth_token="t", **cfg)
    return GitHubClient(config, transport=httpx.MockTransport(api), sleep=sleeps.append), config, sleeps


def test_pull_requests_capped_to_most_recent(tmp_path):
    api = FakeAPI(n_prs=500)
    client, cfg, _ = _client(api, tmp_path, max_records_per_source=300)
    records = fetch_artifacts(REPO, DocumentationSource.PULL_REQUESTS, cfg, client)
    assert len(records) == 300
    assert records[0].id == "#201" and records[-1].id == "#500"
    assert [r.created_at for r in records] == sorted(r.created_at for r in records)


def test_issues_skip_pull_requests_and_join_discussion(tmp_path):
    client, cfg, _ = _client(FakeAPI(), tmp_path)
    records = fetch_artifacts(REPO, DocumentationSource.ISSUES, cfg, client)
    assert [r.id for r in records] == ["#1000", "#1001"]
    assert records[0].body == "first reply"


def test_commits_and_files(tmp_path):
    client, cfg, _ = _client(FakeAPI(), tmp_path)
    commits = fetch_artifacts(REPO, DocumentationSource.COMMITS, cfg, client)
    assert [c.body for c in commits] == [f"change {k}" for k in range(4)]
    assert commits[0].id == "0" * 12
    textual = fetch_artifacts(REPO, DocumentationSource.TEXTUAL_FILES, cfg, client)
    assert [(r.id, r.body) for r in textual] == [("README.md", "# Demo\nHello\n")]
    comments = fetch_artifacts(REPO, DocumentationSource.COMMENTS, cfg, client)
    assert [(r.id, r.body) for r in comments] == [("src/a.c#0000", "adds"), ("src/a.c#0001", "ints")]


def test_transient_errors_retry_with_backoff(tmp_path):
    api = FakeAPI(fail_first=2)
    client, cfg, sleeps = _client(api, tmp_path)
    assert len(fetch_artifacts(REPO, DocumentationSource.COMMITS, cfg, client)) == 4
    assert sleeps == [1, 2]


def test_retries_exhausted(tmp_path):
    client, cfg, sleeps = _client(FakeAPI(status=502), tmp_path, max_attempts=3)
    with pytest.raises(RetriableFetchError) as info:
        fetch_artifacts(REPO, DocumentationSource.COMMITS, cfg, client)
    assert info.value.attempts == 3 and sleeps == [1, 2]


def test_rate_limit_403_is_retried_but_plain_403_is_not(tmp_path):
    client, cfg, sleeps = _client(FakeAPI(status=403, headers={"x-ratelimit-remaining": "0"}), tmp_path,
                                  max_attempts=2)
    with pytest.raises(RetriableFetchError):
        fetch_artifacts(REPO, DocumentationSource.COMMITS, cfg, client)
    client, cfg, _ = _client(FakeAPI(status=403), tmp_path)
    with pytest.raises(FetchAuthenticationError):
        fetch_artifacts(REPO, DocumentationSource.COMMITS, cfg, client)


def test_auth_and_missing_repo(tmp_path):
    client, cfg, _ = _client(FakeAPI(status=401), tmp_path)
    with pytest.raises(FetchAuthenticationError):
        fetch_artifacts(REPO, DocumentationSource.ISSUES, cfg, client)
    client, cfg, _ = _client(FakeAPI(status=404), tmp_path)
    with pytest.raises(RepositoryNotFoundError):
        fetch_artifacts(REPO, DocumentationSource.ISSUES, cfg, client)


def test_network_down_is_a_fetch_failure(tmp_path):
    def down(request):
        raise httpx.ConnectError("unreachable", request=request)

    cfg = IngestionConfig(cache_dir=tmp_path, max_attempts=2)
    client = GitHubClient(cfg, transport=httpx.MockTransport(down), sleep=lambda s: None)
    with pytest.raises(RetriableFetchError):
        fetch_artifacts(REPO, DocumentationSource.COMMITS, cfg, client)


def test_archive_client_reads_bundled_fixture(bundled):
    cfg = IngestionConfig(cache_dir=Path("unused"))
    archive = ArchiveClient(bundled / "archive")
    repo = RepositoryRef("fixture", "repo00")
    counts = {s: len(fetch_artifacts(repo, s, cfg, archive)) for s in DocumentationSource}
    assert counts[DocumentationSource.PULL_REQUESTS] == 12
    assert counts[DocumentationSource.TEXTUAL_FILES] == 2
    with pytest.raises(RepositoryNotFoundError):
        fetch_artifacts(RepositoryRef("no", "such"), DocumentationSource.ISSUES, cfg, archive)


# ---- bundles and cache ------------------------------------------------------

_records = st.lists(
    st.builds(
        ArtifactRecord,
        source=st.just(DocumentationSource.ISSUES),
        id=st.from_regex(r"#[0-9]{1,4}", fullmatch=True),
        body=st.text(min_size=1, max_size=40),
        title=st.none() | st.text(max_size=10),
        created_at=st.none() | st.datetimes(min_value=datetime(2000, 1, 1), max_value=datetime(2030, 1, 1),
                                            timezones=st.just(timezone.utc)),
    ),
    max_size=12,
)


@given(records=_records)
def test_cache_round_trip(records, tmp_path_factory):
    tmp = tmp_path_factory.mktemp("cache")
    bundle = build_bundle(REPO, DocumentationSource.ISSUES, records)
    cache_store(bundle, tmp)
    assert cache_load(REPO, DocumentationSource.ISSUES, tmp) == bundle


def test_build_bundle_rejects_foreign_records():
    rec = ArtifactRecord(DocumentationSource.COMMITS, "abc", "msg")
    with pytest.raises(ValueError, match="abc"):
        build_bundle(REPO, DocumentationSource.ISSUES, [rec])


def test_cache_miss_and_corruption(tmp_path):
    assert cache_load(REPO, DocumentationSource.ISSUES, tmp_path) is None
    path = tmp_path / REPO.slug / "issues.jsonl"
    path.parent.mkdir(parents=True)
    path.write_text("{not json\n")
    with pytest.raises(CacheCorruptError):
        cache_load(REPO, DocumentationSource.ISSUES, tmp_path)


def test_cache_store_leaves_no_temp_files(tmp_path):
    bundle = build_bundle(REPO, DocumentationSource.COMMITS, [ArtifactRecord(DocumentationSource.COMMITS, "a1", "m")])
    cache_store(bundle, tmp_path)
    assert [p.name for p in (tmp_path / REPO.slug).iterdir()] == ["commits.jsonl"]
