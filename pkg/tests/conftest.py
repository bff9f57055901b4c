from __future__ import annotations

from datetime import datetime, timezone
from pathlib import Path

import pytest

from ecograph.identity import AffiliationMap
from ecograph.ingest import IssueRecord, Patch

FIXTURES = Path(__file__).parent / "fixtures"


def ts(year=2014, month=1, day=1, hour=0, minute=0, second=0):
    return datetime(year, month, day, hour, minute, second, tzinfo=timezone.utc)


def make_patch(author="dev@a.com", added=10, deleted=0, when=None, approved=True):
    return Patch(
        author_email=author,
        added_loc=added,
        deleted_loc=deleted,
        submitted_at=when or ts(),
        approved=approved,
    )


def make_issue(
    key="X-1",
    issue_type="bug",
    fix_versions=("2.2.0",),
    created=None,
    resolved=None,
    reporter="reporter@a.com",
    patches=(),
):
    return IssueRecord(
        key=key,
        issue_type=issue_type,
        fix_versions=tuple(fix_versions),
        created_at=created or ts(),
        resolved_at=resolved,
        reporter_email=reporter,
        patches=tuple(patches),
    )


def synthetic_network(vertex_count: int, edge_count: int):
    """A deterministic directed network with exactly the given counts."""
    from ecograph.graph import CollaborationNetwork

    vertices = [f"v{i:03d}" for i in range(vertex_count)]
    edges = {}
    for i in range(vertex_count):
        for j in range(vertex_count):
            if i != j and len(edges) < edge_count:
                edges[(vertices[i], vertices[j])] = 1.0
    if len(edges) < edge_count:
        raise ValueError("edge_count exceeds n*(n-1)")
    return CollaborationNetwork("synthetic", frozenset(vertices), edges)


@pytest.fixture
def abc_map():
    """Three single-letter orgs for weighting tests."""
    return AffiliationMap.from_obj(
        {"domains": {"a.com": "a", "b.com": "b", "c.com": "c", "d.com": "d"}}
    )


@pytest.fixture
def fixture_paths():
    return {
        "corpus": FIXTURES / "corpus.jsonl",
        "affiliations": FIXTURES / "affiliations.json",
        "releases": FIXTURES / "releases.json",
        "selfimpl": FIXTURES / "selfimpl.jsonl",
    }
