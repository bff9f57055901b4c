"""Paginated issue-tracker crawler with retries and a resumable cursor."""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Iterator

import requests

from .ingest import IngestError, RawIssueDocument, SessionLog
from .log import stage_logger

log = stage_logger("crawl")

DEFAULT_TIMEOUT_ENV = "ECOGRAPH_HTTP_TIMEOUT_SECS"
DEFAULT_PARALLELISM = 4


class CrawlError(IngestError):
    """Raised when the tracker rejects a request (no retry)."""


class CrawlSessionError(IngestError):
    """Raised when a crawl gives up; ``next_start_at`` resumes the session."""

    def __init__(self, message: str, next_start_at: int):
        super().__init__(message)
        self.next_start_at = next_start_at


@dataclass(frozen=True)
class RetryPolicy:
    """Bounded exponential backoff for transient fetch failures."""

    attempts: int = 4
    base_delay: float = 0.5
    max_delay: float = 8.0

    def delay(self, attempt: int) -> float:
        return min(self.base_delay * (2**attempt), self.max_delay)


def http_timeout() -> float:
    return float(os.environ.get(DEFAULT_TIMEOUT_ENV, "30"))


def _fetch_page(
    http: requests.Session,
    endpoint: str,
    query: str,
    start_at: int,
    page_size: int,
    retry: RetryPolicy,
    timeout: float,
) -> dict:
    """GET one search page, retrying transient failures with backoff."""
    params = {"jql": query, "startAt": start_at, "maxResults": page_size}
    last_error: Exception | None = None
    for attempt in range(retry.attempts):
        if attempt:
            time.sleep(retry.delay(attempt - 1))
        try:
            response = http.get(endpoint, params=params, timeout=timeout)
        except requests.RequestException as exc:
            last_error = exc
            log.warning(
                "transient fetch failure, retrying",
                extra={"fields": {"start_at": start_at, "attempt": attempt + 1,
                                  "error": str(exc)}},
            )
            continue
        if 400 <= response.status_code < 500:
            raise CrawlError(
                f"tracker rejected request (HTTP {response.status_code}): "
                f"{response.text.strip()}"
            )
        if response.status_code >= 500:
            last_error = CrawlError(
                f"server error (HTTP {response.status_code}) at startAt={start_at}"
            )
            log.warning(
                "server error, retrying",
                extra={"fields": {"start_at": start_at, "attempt": attempt + 1,
                                  "status": response.status_code}},
            )
            continue
        try:
            return response.json()
        except ValueError as exc:
            raise CrawlError(f"tracker returned invalid JSON at startAt={start_at}: {exc}")
    raise CrawlSessionError(
        f"giving up on page at startAt={start_at} after {retry.attempts} attempts: "
        f"{last_error}",
        next_start_at=start_at,
    )


def _page_documents(page: dict, start_at: int) -> list[RawIssueDocument]:
    issues = page.get("issues")
    if not isinstance(issues, list):
        raise CrawlError(f"search response at startAt={start_at} has no issues array")
    fetched_at = datetime.now(timezone.utc)
    documents = []
    for issue in issues:
        source_id = issue.get("key") or str(issue.get("id", ""))
        if not source_id:
            raise CrawlError(f"issue without key or id at startAt={start_at}")
        documents.append(
            RawIssueDocument(
                source_id=source_id,
                payload=json.dumps(issue, ensure_ascii=False),
                fetched_at=fetched_at,
            )
        )
    return documents


def crawl(
    endpoint: str,
    query: str,
    page_size: int,
    session: SessionLog,
    *,
    start_at: int = 0,
    parallelism: int = DEFAULT_PARALLELISM,
    retry: RetryPolicy | None = None,
    timeout: float | None = None,
) -> Iterator[RawIssueDocument]:
    """Stream every issue document matching ``query``, exactly once.

    Pages through the tracker's search API until the server reports no
    further results. Each document is persisted to ``session`` before it is
    yielded, so a consumer crash never loses fetched data. Transient errors
    are retried per ``retry``; when a page cannot be fetched the session
    cursor records the offset to resume from and :class:`CrawlSessionError`
    is raised. Remaining pages after the first are fetched with at most
    ``parallelism`` requests in flight; documents are still yielded in
    pagination order.
    """
    if page_size <= 0:
        raise ValueError("page_size must be positive")
    retry = retry or RetryPolicy()
    timeout = http_timeout() if timeout is None else timeout

    def cursor(next_start: int, total: int | None, completed: bool) -> dict:
        return {
            "endpoint": endpoint,
            "query": query,
            "page_size": page_size,
            "next_start_at": next_start,
            "total": total,
            "completed": completed,
        }

    with requests.Session() as http:
        def fetch(offset: int) -> dict:
            return _fetch_page(http, endpoint, query, offset, page_size, retry, timeout)

        try:
            first = fetch(start_at)
        except CrawlSessionError as exc:
            session.save_cursor(cursor(exc.next_start_at, None, False))
            raise
        total = first.get("total")
        if not isinstance(total, int):
            raise CrawlError("search response lacks an integer total")
        log.info("session started",
                 extra={"fields": {"query": query, "total": total}})

        yielded = 0
        next_offset = start_at
        remaining = range(start_at + page_size, total, page_size)
        executor = ThreadPoolExecutor(max_workers=max(1, parallelism))
        try:
            tail = executor.map(fetch, remaining)

            def all_pages():
                yield start_at, first
                for offset, page in zip(remaining, tail):
                    yield offset, page

            for offset, page in all_pages():
                documents = _page_documents(page, offset)
                for doc in documents:
                    if session.append(doc):
                        yield doc
                        yielded += 1
                next_offset = offset + page_size
                session.save_cursor(cursor(next_offset, total, next_offset >= total))
                if not documents and offset < total:
                    # server reported fewer results than total; stop cleanly
                    break
        except CrawlSessionError as exc:
            session.save_cursor(cursor(exc.next_start_at, total, False))
            raise
        finally:
            executor.shutdown(wait=False, cancel_futures=True)
        session.save_cursor(cursor(next_offset, total, True))
        log.info("session completed",
                 extra={"fields": {"documents": yielded, "total": total}})
