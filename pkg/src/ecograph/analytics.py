"""Release-level analytics: windowing, innovation counts, rankings, crosstabs.

Issues are grouped into configured releases by the major.minor prefix of
their fix versions; third-level versions fold into their parent release.
Innovation metrics count implemented (resolved) issues only, while network
construction elsewhere uses every issue that carries patches.
"""

from __future__ import annotations

import csv
import json
import re
import statistics
from dataclasses import dataclass
from datetime import datetime
from itertools import combinations
from pathlib import Path
from typing import IO, Iterable, Mapping, Sequence

from .graph import CollaborationNetwork
from .ingest import IssueRecord, parse_timestamp
from .log import stage_logger
from .metrics import format_value, _open_for_csv

log = stage_logger("analytics")

_RELEASE_ID = re.compile(r"^R(\d+)\.(\d+)$")


class AnalyticsError(Exception):
    """Raised for invalid release configs or empty metric inputs."""


def parse_version(version: str) -> tuple[int, ...]:
    """Parse a dotted numeric version ("2.7.1") into an integer tuple."""
    parts = version.strip().split(".")
    try:
        return tuple(int(part) for part in parts)
    except ValueError:
        raise ValueError(f"not a dotted numeric version: {version!r}")


def release_prefix(release_id: str) -> tuple[int, int]:
    match = _RELEASE_ID.match(release_id)
    if not match:
        raise AnalyticsError(f"release id must look like R<major>.<minor>: {release_id!r}")
    return int(match.group(1)), int(match.group(2))


@dataclass(frozen=True)
class ReleaseSpec:
    """One configured release: id plus its release date."""

    id: str
    released_at: datetime


@dataclass(frozen=True)
class Release:
    """A populated release window."""

    id: str
    member_versions: tuple[str, ...]
    start_at: datetime
    released_at: datetime
    issues: tuple[str, ...]

    def __post_init__(self):
        if self.released_at < self.start_at:
            raise ValueError(f"{self.id}: released_at earlier than start_at")


@dataclass(frozen=True)
class InnovationReport:
    """Innovation and time-to-market measures for one release."""

    release_id: str
    feature_count: int
    improvement_count: int
    bug_count: int
    other_count: int
    change_size_loc: int
    cycle_time_days: float


@dataclass(frozen=True)
class RankedStakeholder:
    stakeholder: str
    value: float
    rank: int


@dataclass(frozen=True)
class RankingSeries:
    """Per-release stakeholder rankings for one metric, plus average ranks."""

    metric_name: str
    release_order: tuple[str, ...]
    per_release: dict[str, tuple[RankedStakeholder, ...]]
    average_rank: dict[str, float]


@dataclass(frozen=True)
class CategoryCrosstab:
    """Symmetric cross-category collaboration counts (unordered pairs).

    Pairs involving an unknown-category stakeholder are excluded from the
    cells but tallied in ``unknown_pairs``.
    """

    cells: dict[tuple[str, str], int]
    unknown_pairs: int


def load_release_config(path: str | Path) -> list[ReleaseSpec]:
    """Load and validate the release config, sorted by release date."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise AnalyticsError(f"{path}: invalid JSON: {exc}")
    if not isinstance(data, list):
        raise AnalyticsError(f"{path}: expected a JSON array of releases")
    specs = []
    seen = set()
    for entry in data:
        if not isinstance(entry, dict) or "id" not in entry or "released_at" not in entry:
            raise AnalyticsError(f"{path}: each release needs id and released_at")
        release_prefix(entry["id"])
        if entry["id"] in seen:
            raise AnalyticsError(f"{path}: duplicate release id {entry['id']!r}")
        seen.add(entry["id"])
        specs.append(
            ReleaseSpec(id=entry["id"], released_at=parse_timestamp(entry["released_at"]))
        )
    specs.sort(key=lambda spec: (spec.released_at, spec.id))
    return specs


def assign_releases(
    corpus: Sequence[IssueRecord], release_config: Sequence[ReleaseSpec]
) -> dict[str, Release]:
    """Partition issues into releases by fix-version major.minor prefix.

    An issue whose fix versions span several configured releases goes to the
    earliest one by release date. Issues with no matching fix version are
    excluded; unparseable fix versions are ignored with a warning. A release
    starts when the previous configured release shipped; the first release
    starts at the earliest patch timestamp among its issues.
    """
    specs = sorted(release_config, key=lambda spec: (spec.released_at, spec.id))
    prefix_to_spec = {release_prefix(spec.id): spec for spec in specs}
    spec_rank = {spec.id: i for i, spec in enumerate(specs)}

    assigned: dict[str, list[IssueRecord]] = {spec.id: [] for spec in specs}
    versions: dict[str, set[str]] = {spec.id: set() for spec in specs}
    warned: set[str] = set()
    for issue in corpus:
        candidates: dict[str, list[str]] = {}
        for version in issue.fix_versions:
            try:
                parts = parse_version(version)
            except ValueError:
                if version not in warned:
                    warned.add(version)
                    log.warning(
                        "ignoring unparseable fix version",
                        extra={"fields": {"version": version}},
                    )
                continue
            if len(parts) < 2:
                continue
            spec = prefix_to_spec.get((parts[0], parts[1]))
            if spec is not None:
                candidates.setdefault(spec.id, []).append(version)
        if not candidates:
            continue
        target = min(candidates, key=lambda rid: spec_rank[rid])
        assigned[target].append(issue)
        versions[target].update(candidates[target])

    releases: dict[str, Release] = {}
    previous: ReleaseSpec | None = None
    for spec in specs:
        issues = assigned[spec.id]
        if previous is not None:
            start_at = previous.released_at
        else:
            patch_times = [
                patch.submitted_at for issue in issues for patch in issue.patches
            ]
            if patch_times:
                start_at = min(patch_times)
            elif issues:
                start_at = min(issue.created_at for issue in issues)
            else:
                start_at = spec.released_at
        start_at = min(start_at, spec.released_at)
        releases[spec.id] = Release(
            id=spec.id,
            member_versions=tuple(
                sorted(versions[spec.id], key=parse_version)
            ),
            start_at=start_at,
            released_at=spec.released_at,
            issues=tuple(sorted(issue.key for issue in issues)),
        )
        previous = spec
    return releases


def issues_for_release(
    corpus: Sequence[IssueRecord],
    release_id: str,
    release_config: Sequence[ReleaseSpec] | None = None,
) -> list[IssueRecord]:
    """Issues belonging to one release.

    With a release config the full assignment rules apply (an issue spanning
    several releases goes to the earliest). Without one, membership falls
    back to the fix-version prefix match alone.
    """
    if release_config:
        releases = assign_releases(corpus, release_config)
        if release_id not in releases:
            raise AnalyticsError(f"release {release_id!r} not in the release config")
        keys = set(releases[release_id].issues)
        return [issue for issue in corpus if issue.key in keys]
    prefix = release_prefix(release_id)
    selected = []
    for issue in corpus:
        for version in issue.fix_versions:
            try:
                parts = parse_version(version)
            except ValueError:
                continue
            if len(parts) >= 2 and (parts[0], parts[1]) == prefix:
                selected.append(issue)
                break
    return selected


def innovation_report(
    release: Release, corpus: Iterable[IssueRecord]
) -> InnovationReport:
    """Count implemented issues by type and sum net changed LOC.

    Only resolved issues count as implemented. The net change size keeps its
    sign: deletions beyond additions shrink it.
    """
    by_key = {issue.key: issue for issue in corpus}
    counts = {"feature": 0, "improvement": 0, "bug": 0, "other": 0}
    change_size = 0
    for key in release.issues:
        issue = by_key[key]
        if issue.resolved_at is None:
            continue
        counts[issue.issue_type] += 1
        change_size += sum(patch.net_loc for patch in issue.patches)
    cycle_seconds = (release.released_at - release.start_at).total_seconds()
    return InnovationReport(
        release_id=release.id,
        feature_count=counts["feature"],
        improvement_count=counts["improvement"],
        bug_count=counts["bug"],
        other_count=counts["other"],
        change_size_loc=change_size,
        cycle_time_days=cycle_seconds / 86400.0,
    )


def issue_type_statistics(
    reports: Sequence[InnovationReport],
) -> dict[str, tuple[float, float, float]]:
    """Mean, median, and population standard deviation of counts per type."""
    if not reports:
        raise AnalyticsError("no innovation reports to summarize")
    series = {
        "feature": [r.feature_count for r in reports],
        "improvement": [r.improvement_count for r in reports],
        "bug": [r.bug_count for r in reports],
        "other": [r.other_count for r in reports],
    }
    return {
        issue_type: (
            statistics.mean(values),
            float(statistics.median(values)),
            statistics.pstdev(values),
        )
        for issue_type, values in series.items()
    }


def ranking_series(
    values_by_release: Mapping[str, Mapping[str, float]],
    metric_name: str,
    release_order: Sequence[str] | None = None,
) -> RankingSeries:
    """Rank stakeholders per release and average ranks where they appear.

    Rank 1 is the highest metric value; ties break by ascending stakeholder
    id so output is deterministic. A stakeholder's average covers only the
    releases it participated in.
    """
    if not values_by_release:
        raise AnalyticsError("no centrality tables to rank")
    order = tuple(release_order) if release_order else tuple(sorted(values_by_release))
    per_release: dict[str, tuple[RankedStakeholder, ...]] = {}
    ranks: dict[str, list[int]] = {}
    for release_id in order:
        values = values_by_release[release_id]
        ordered = sorted(values.items(), key=lambda item: (-item[1], item[0]))
        entries = tuple(
            RankedStakeholder(stakeholder=s, value=v, rank=i)
            for i, (s, v) in enumerate(ordered, start=1)
        )
        per_release[release_id] = entries
        for entry in entries:
            ranks.setdefault(entry.stakeholder, []).append(entry.rank)
    average = {s: statistics.mean(r) for s, r in ranks.items()}
    return RankingSeries(
        metric_name=metric_name,
        release_order=order,
        per_release=per_release,
        average_rank=average,
    )


def format_average_rank(value: float) -> str:
    """Average ranks are reported to one decimal place."""
    return f"{value:.1f}"


def top_accumulated(
    values_by_release: Mapping[str, Mapping[str, float]], top_n: int
) -> set[str]:
    """The N stakeholders with the highest metric total across all releases.

    ``top_n <= 0`` selects everyone.
    """
    totals: dict[str, float] = {}
    for values in values_by_release.values():
        for stakeholder, value in values.items():
            totals[stakeholder] = totals.get(stakeholder, 0.0) + value
    if top_n <= 0:
        return set(totals)
    ordered = sorted(totals.items(), key=lambda item: (-item[1], item[0]))
    return {stakeholder for stakeholder, _ in ordered[:top_n]}


def category_crosstab(
    networks: Iterable[CollaborationNetwork], categories: Mapping[str, str]
) -> CategoryCrosstab:
    """Count issue-level collaboration pairs between user categories.

    Every unordered stakeholder pair that co-contributed to an issue adds
    one to the cell of its category pair; same-category pairs land on the
    diagonal. Cells are keyed with the category pair in sorted order.
    """
    cells: dict[tuple[str, str], int] = {}
    unknown_pairs = 0
    for network in networks:
        for contribution in network.contributions:
            for a, b in combinations(sorted(contribution.shares), 2):
                cat_a = categories.get(a, "unknown")
                cat_b = categories.get(b, "unknown")
                if cat_a == "unknown" or cat_b == "unknown":
                    unknown_pairs += 1
                    continue
                cell = (cat_a, cat_b) if cat_a <= cat_b else (cat_b, cat_a)
                cells[cell] = cells.get(cell, 0) + 1
    return CategoryCrosstab(cells=cells, unknown_pairs=unknown_pairs)


def self_implementation_ratio(corpus: Sequence[IssueRecord]) -> float:
    """Fraction of patches authored by the issue's own reporter."""
    total = 0
    self_authored = 0
    for issue in corpus:
        reporter = issue.reporter_email.strip().lower()
        for patch in issue.patches:
            total += 1
            if patch.author_email.strip().lower() == reporter:
                self_authored += 1
    if total == 0:
        raise AnalyticsError("corpus has no patches")
    return self_authored / total


# --------------------------------------------------------------------------
# CSV output


def write_innovation_csv(
    reports: Iterable[InnovationReport], handle: IO[str] | str | Path
) -> None:
    with _open_for_csv(handle) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            [
                "release",
                "feature",
                "improvement",
                "bug",
                "other",
                "change_size_loc",
                "cycle_time_days",
            ]
        )
        for report in reports:
            writer.writerow(
                [
                    report.release_id,
                    report.feature_count,
                    report.improvement_count,
                    report.bug_count,
                    report.other_count,
                    report.change_size_loc,
                    format_value(report.cycle_time_days),
                ]
            )


def write_rankings_csv(
    series: Iterable[RankingSeries],
    handle: IO[str] | str | Path,
    include: Mapping[str, set[str]] | None = None,
) -> None:
    """Write ranking rows, optionally filtered to per-metric stakeholder sets."""
    with _open_for_csv(handle) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["metric", "release", "stakeholder", "value", "rank"])
        for ranking in series:
            keep = include.get(ranking.metric_name) if include else None
            for release_id in ranking.release_order:
                for entry in ranking.per_release[release_id]:
                    if keep is not None and entry.stakeholder not in keep:
                        continue
                    writer.writerow(
                        [
                            ranking.metric_name,
                            release_id,
                            entry.stakeholder,
                            format_value(entry.value),
                            entry.rank,
                        ]
                    )


def write_crosstab_csv(
    crosstab: CategoryCrosstab, handle: IO[str] | str | Path
) -> None:
    with _open_for_csv(handle) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["category_a", "category_b", "count"])
        for (cat_a, cat_b), count in sorted(crosstab.cells.items()):
            writer.writerow([cat_a, cat_b, count])
