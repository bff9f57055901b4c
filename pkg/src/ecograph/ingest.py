"""Issue ingestion: normalized records, diff stats, and canonical JSONL I/O.

Raw tracker documents are parsed into immutable :class:`IssueRecord` values.
The canonical on-disk form is JSONL, one issue object per line, which
round-trips losslessly through :func:`export_jsonl` / :func:`import_jsonl`.
"""

from __future__ import annotations

import json
import re
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Iterator

from .log import stage_logger

log = stage_logger("ingest")

ISSUE_TYPES = ("feature", "improvement", "bug", "other")

# JIRA issue type names seen in the wild, normalized to the canonical four.
_TYPE_ALIASES = {
    "feature": "feature",
    "new feature": "feature",
    "improvement": "improvement",
    "bug": "bug",
}


class IngestError(Exception):
    """Base error for ingestion failures."""


class IssueParseError(IngestError):
    """Raised for a malformed tracker issue document; carries its source id."""

    def __init__(self, source_id: str, reason: str):
        super().__init__(f"{source_id}: {reason}")
        self.source_id = source_id
        self.reason = reason


class CorpusImportError(IngestError):
    """Raised when a canonical JSONL corpus violates the schema."""


class DiffParseError(IngestError):
    """Raised when attachment content is not a recognizable unified diff."""


# --------------------------------------------------------------------------
# timestamps

_TZ_NO_COLON = re.compile(r"([+-]\d{2})(\d{2})$")


def parse_timestamp(value: str) -> datetime:
    """Parse an RFC 3339 timestamp (or the tracker's ``+0000`` variant) to UTC.

    Naive timestamps are taken to already be UTC.
    """
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    else:
        text = _TZ_NO_COLON.sub(r"\1:\2", text)
    try:
        parsed = datetime.fromisoformat(text)
    except ValueError as exc:
        raise ValueError(f"invalid timestamp {value!r}") from exc
    if parsed.tzinfo is None:
        return parsed.replace(tzinfo=timezone.utc)
    return parsed.astimezone(timezone.utc)


def format_timestamp(value: datetime) -> str:
    """Serialize a UTC datetime as RFC 3339 with a ``Z`` suffix."""
    if value.tzinfo is None:
        value = value.replace(tzinfo=timezone.utc)
    return value.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


# --------------------------------------------------------------------------
# domain records


@dataclass(frozen=True)
class RawIssueDocument:
    """A verbatim fetched tracker document, keyed by its source id."""

    source_id: str
    payload: str
    fetched_at: datetime


@dataclass(frozen=True)
class Patch:
    """One attachment contribution: author plus added/deleted line counts."""

    author_email: str
    added_loc: int
    deleted_loc: int
    submitted_at: datetime
    approved: bool = True

    def __post_init__(self):
        if self.added_loc < 0 or self.deleted_loc < 0:
            raise ValueError("patch line counts must be nonnegative")

    @property
    def net_loc(self) -> int:
        return self.added_loc - self.deleted_loc


@dataclass(frozen=True)
class IssueRecord:
    """A normalized tracker issue."""

    key: str
    issue_type: str
    fix_versions: tuple[str, ...]
    created_at: datetime
    resolved_at: datetime | None
    reporter_email: str
    patches: tuple[Patch, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not self.key:
            raise ValueError("issue key must be non-empty")
        if self.issue_type not in ISSUE_TYPES:
            raise ValueError(f"unknown issue type {self.issue_type!r}")
        if self.resolved_at is not None and self.resolved_at < self.created_at:
            raise ValueError("resolved_at earlier than created_at")


def normalize_issue_type(name: str) -> str:
    """Map a tracker's issue type name onto the canonical four (default other)."""
    return _TYPE_ALIASES.get(name.strip().lower(), "other")


# --------------------------------------------------------------------------
# unified-diff line counting

_HUNK_HEADER = re.compile(r"^@@ -\d+(?:,\d+)? \+\d+(?:,\d+)? @@")

# A patch attachment is detected by filename suffix or by its content
# opening with a unified-diff header line.
_PATCH_SUFFIXES = (".patch", ".diff")
_DIFF_PREFIXES = ("--- ", "diff ", "Index: ")


def looks_like_patch(filename: str, content: str) -> bool:
    """Classify an attachment as a patch file."""
    if filename.lower().endswith(_PATCH_SUFFIXES):
        return True
    return content.startswith(_DIFF_PREFIXES)


def diff_line_counts(content: str) -> tuple[int, int]:
    """Count (added, deleted) lines of a unified diff.

    Added lines start with ``+`` (excluding ``+++`` file headers), deleted
    lines with ``-`` (excluding ``---``). Binary patches have no such lines
    and count as zero. Raises :class:`DiffParseError` when the text contains
    no hunk header at all.
    """
    lines = content.splitlines()
    if not any(_HUNK_HEADER.match(line) for line in lines):
        raise DiffParseError("no unified-diff hunk header found")
    added = sum(
        1 for line in lines if line.startswith("+") and not line.startswith("+++")
    )
    deleted = sum(
        1 for line in lines if line.startswith("-") and not line.startswith("---")
    )
    return added, deleted


# --------------------------------------------------------------------------
# tracker document parsing


def parse_issue(doc: RawIssueDocument) -> IssueRecord:
    """Normalize a raw tracker issue document.

    The payload is the tracker's JSON issue representation: ``key`` at the
    top level and the usual ``fields`` object (issue type, fix versions,
    created/resolution timestamps, reporter, attachments). Attachments that
    are patch files become :class:`Patch` entries with line counts taken
    from their unified-diff content; other attachments are ignored. A patch
    whose diff cannot be parsed is kept with zero counts and a warning.
    """
    try:
        data = json.loads(doc.payload)
    except json.JSONDecodeError as exc:
        raise IssueParseError(doc.source_id, f"payload is not valid JSON: {exc}")
    if not isinstance(data, dict):
        raise IssueParseError(doc.source_id, "payload is not a JSON object")

    key = data.get("key")
    if not key or not isinstance(key, str):
        raise IssueParseError(doc.source_id, "missing issue key")
    fields = data.get("fields")
    if not isinstance(fields, dict):
        raise IssueParseError(doc.source_id, "missing fields object")

    type_name = _nested(fields, "issuetype", "name") or ""
    issue_type = normalize_issue_type(type_name)

    fix_versions = []
    for entry in fields.get("fixVersions") or []:
        name = entry.get("name") if isinstance(entry, dict) else entry
        if isinstance(name, str) and name:
            fix_versions.append(name)

    created_raw = fields.get("created")
    if not created_raw:
        raise IssueParseError(doc.source_id, "missing created timestamp")
    resolved_raw = fields.get("resolutiondate")
    reporter_email = _nested(fields, "reporter", "emailAddress")
    if not reporter_email:
        raise IssueParseError(doc.source_id, "missing reporter email")

    try:
        created_at = parse_timestamp(created_raw)
        resolved_at = parse_timestamp(resolved_raw) if resolved_raw else None
    except ValueError as exc:
        raise IssueParseError(doc.source_id, str(exc))

    patches = []
    for attachment in fields.get("attachment") or []:
        if not isinstance(attachment, dict):
            raise IssueParseError(doc.source_id, "attachment is not an object")
        filename = attachment.get("filename") or ""
        content = attachment.get("content") or ""
        if not looks_like_patch(filename, content):
            continue
        author_email = _nested(attachment, "author", "emailAddress")
        submitted_raw = attachment.get("created")
        if not author_email or not submitted_raw:
            raise IssueParseError(
                doc.source_id, f"patch attachment {filename!r} lacks author or timestamp"
            )
        try:
            submitted_at = parse_timestamp(submitted_raw)
        except ValueError as exc:
            raise IssueParseError(doc.source_id, str(exc))
        try:
            added, deleted = diff_line_counts(content)
        except DiffParseError:
            added = deleted = 0
            log.warning(
                "unparseable patch diff, counted as 0/0",
                extra={"fields": {"issue": key, "attachment": filename}},
            )
        patches.append(
            Patch(
                author_email=author_email.strip().lower(),
                added_loc=added,
                deleted_loc=deleted,
                submitted_at=submitted_at,
                approved=bool(attachment.get("approved", True)),
            )
        )

    try:
        return IssueRecord(
            key=key,
            issue_type=issue_type,
            fix_versions=tuple(fix_versions),
            created_at=created_at,
            resolved_at=resolved_at,
            reporter_email=reporter_email.strip().lower(),
            patches=tuple(patches),
        )
    except ValueError as exc:
        raise IssueParseError(doc.source_id, str(exc))


def _nested(obj: dict, *path: str):
    for part in path:
        if not isinstance(obj, dict):
            return None
        obj = obj.get(part)
    return obj


# --------------------------------------------------------------------------
# canonical JSONL corpus

_REQUIRED_FIELDS = (
    "key",
    "type",
    "fix_versions",
    "created_at",
    "resolved_at",
    "reporter_email",
    "patches",
)
_REQUIRED_PATCH_FIELDS = ("author_email", "added_loc", "deleted_loc", "submitted_at")


def record_to_obj(record: IssueRecord) -> dict:
    """Canonical JSON object form of an issue record."""
    patches = []
    for patch in record.patches:
        obj = {
            "author_email": patch.author_email,
            "added_loc": patch.added_loc,
            "deleted_loc": patch.deleted_loc,
            "submitted_at": format_timestamp(patch.submitted_at),
        }
        if not patch.approved:
            obj["approved"] = False
        patches.append(obj)
    return {
        "key": record.key,
        "type": record.issue_type,
        "fix_versions": list(record.fix_versions),
        "created_at": format_timestamp(record.created_at),
        "resolved_at": (
            format_timestamp(record.resolved_at) if record.resolved_at else None
        ),
        "reporter_email": record.reporter_email,
        "patches": patches,
    }


def record_from_obj(obj: dict) -> IssueRecord:
    """Parse one canonical issue object, raising on any schema violation."""
    if not isinstance(obj, dict):
        raise CorpusImportError("not a JSON object")
    for name in _REQUIRED_FIELDS:
        if name not in obj:
            raise CorpusImportError(f"missing field {name}")
    if obj["type"] not in ISSUE_TYPES:
        raise CorpusImportError(f"field type: unknown issue type {obj['type']!r}")
    if not isinstance(obj["fix_versions"], list):
        raise CorpusImportError("field fix_versions: expected an array")
    if not isinstance(obj["patches"], list):
        raise CorpusImportError("field patches: expected an array")
    patches = []
    for i, pobj in enumerate(obj["patches"]):
        if not isinstance(pobj, dict):
            raise CorpusImportError(f"field patches[{i}]: expected an object")
        for name in _REQUIRED_PATCH_FIELDS:
            if name not in pobj:
                raise CorpusImportError(f"missing field patches[{i}].{name}")
        try:
            patches.append(
                Patch(
                    author_email=pobj["author_email"],
                    added_loc=int(pobj["added_loc"]),
                    deleted_loc=int(pobj["deleted_loc"]),
                    submitted_at=parse_timestamp(pobj["submitted_at"]),
                    approved=bool(pobj.get("approved", True)),
                )
            )
        except (ValueError, TypeError) as exc:
            raise CorpusImportError(f"field patches[{i}]: {exc}")
    try:
        return IssueRecord(
            key=obj["key"],
            issue_type=obj["type"],
            fix_versions=tuple(str(v) for v in obj["fix_versions"]),
            created_at=parse_timestamp(obj["created_at"]),
            resolved_at=(
                parse_timestamp(obj["resolved_at"])
                if obj["resolved_at"] is not None
                else None
            ),
            reporter_email=obj["reporter_email"],
            patches=tuple(patches),
        )
    except (ValueError, TypeError) as exc:
        raise CorpusImportError(str(exc))


def import_jsonl(path: str | Path) -> list[IssueRecord]:
    """Load a canonical JSONL corpus; duplicate issue keys are rejected."""
    records: list[IssueRecord] = []
    seen: dict[str, int] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusImportError(f"line {lineno}: invalid JSON: {exc.msg}")
            try:
                record = record_from_obj(obj)
            except CorpusImportError as exc:
                raise CorpusImportError(f"line {lineno}: {exc}")
            if record.key in seen:
                raise CorpusImportError(
                    f'line {lineno}: duplicate issue key "{record.key}" '
                    f"(first seen on line {seen[record.key]})"
                )
            seen[record.key] = lineno
            records.append(record)
    return records


def export_jsonl(records: Iterable[IssueRecord], path: str | Path) -> None:
    """Write records as canonical JSONL (LF line endings, compact JSON)."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for record in records:
            handle.write(json.dumps(record_to_obj(record), ensure_ascii=False))
            handle.write("\n")


# --------------------------------------------------------------------------
# raw-document persistence


class SessionLog:
    """Append-only store of raw fetched documents for one crawl session.

    Documents land in ``raw_issues.jsonl`` keyed by source id; the pagination
    cursor lives in ``cursor.json`` so an interrupted crawl can resume.
    Appends are serialized; re-appending an already seen source id is a no-op,
    which keeps resumed sessions exactly-once.
    """

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.documents_path = self.directory / "raw_issues.jsonl"
        self.cursor_path = self.directory / "cursor.json"
        self._lock = threading.Lock()
        self._seen: set[str] = {
            doc.source_id for doc in self.iter_documents()
        }

    def append(self, doc: RawIssueDocument) -> bool:
        """Persist one document; returns False when its id was already stored."""
        with self._lock:
            if doc.source_id in self._seen:
                return False
            line = json.dumps(
                {
                    "source_id": doc.source_id,
                    "fetched_at": format_timestamp(doc.fetched_at),
                    "payload": doc.payload,
                },
                ensure_ascii=False,
            )
            with open(self.documents_path, "a", encoding="utf-8", newline="\n") as fh:
                fh.write(line + "\n")
            self._seen.add(doc.source_id)
            return True

    def iter_documents(self) -> Iterator[RawIssueDocument]:
        if not self.documents_path.exists():
            return
        with open(self.documents_path, encoding="utf-8") as handle:
            for line in handle:
                if not line.strip():
                    continue
                obj = json.loads(line)
                yield RawIssueDocument(
                    source_id=obj["source_id"],
                    payload=obj["payload"],
                    fetched_at=parse_timestamp(obj["fetched_at"]),
                )

    def save_cursor(self, cursor: dict) -> None:
        self.cursor_path.write_text(
            json.dumps(cursor, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
        )

    def load_cursor(self) -> dict | None:
        if not self.cursor_path.exists():
            return None
        return json.loads(self.cursor_path.read_text(encoding="utf-8"))
