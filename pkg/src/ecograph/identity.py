"""Resolution of contributor emails to organizational stakeholders.

Resolution is table-driven: exact full-email overrides first, then exact
(case-insensitive) email-domain rules. Anything else stays unresolved and
is surfaced through :func:`unresolved_report`; analysis either groups those
contributors under the synthetic ``_unaffiliated`` stakeholder or, in strict
mode, refuses to proceed.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Union

from .ingest import IssueRecord

USER_CATEGORIES = (
    "infrastructure_provider",
    "platform_user",
    "product_provider",
    "product_supporter",
    "service_provider",
    "unknown",
)

UNAFFILIATED = "_unaffiliated"


class AffiliationError(Exception):
    """Raised for malformed affiliation config or invalid emails."""


@dataclass(frozen=True)
class Stakeholder:
    """An organizational entity participating in the ecosystem."""

    id: str
    display_name: str
    user_category: str = "unknown"

    def __post_init__(self):
        if not self.id or self.id != self.id.lower():
            raise ValueError(f"stakeholder id must be lowercase and non-empty: {self.id!r}")
        if self.user_category not in USER_CATEGORIES:
            raise ValueError(f"unknown user category {self.user_category!r}")


@dataclass(frozen=True)
class Unresolved:
    """Marker result for an email no rule matches."""

    email: str


Resolution = Union[Stakeholder, Unresolved]


@dataclass(frozen=True)
class AffiliationMap:
    """Email-to-stakeholder rules plus optional category labels.

    ``email_overrides`` always wins over ``domain_rules``. Domain matching is
    exact (no subdomain inference), so subdomains need their own entries.
    """

    domain_rules: dict[str, str] = field(default_factory=dict)
    email_overrides: dict[str, str] = field(default_factory=dict)
    category_labels: dict[str, str] = field(default_factory=dict)

    @classmethod
    def from_obj(cls, obj: dict) -> "AffiliationMap":
        domains = {
            str(domain).lower(): _slug(stakeholder)
            for domain, stakeholder in (obj.get("domains") or {}).items()
        }
        overrides = {
            str(email).lower(): _slug(stakeholder)
            for email, stakeholder in (obj.get("overrides") or {}).items()
        }
        categories = {}
        for stakeholder, category in (obj.get("categories") or {}).items():
            if category not in USER_CATEGORIES:
                raise AffiliationError(
                    f"unknown user category {category!r} for {stakeholder!r}"
                )
            categories[_slug(stakeholder)] = category
        return cls(domains, overrides, categories)

    @classmethod
    def load(cls, path: str | Path) -> "AffiliationMap":
        try:
            obj = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise AffiliationError(f"{path}: invalid JSON: {exc}")
        if not isinstance(obj, dict):
            raise AffiliationError(f"{path}: expected a JSON object")
        return cls.from_obj(obj)

    def stakeholder(self, stakeholder_id: str) -> Stakeholder:
        """Stakeholder registry entry, created on first reference."""
        return Stakeholder(
            id=stakeholder_id,
            display_name=stakeholder_id,
            user_category=self.category_labels.get(stakeholder_id, "unknown"),
        )


def _slug(value) -> str:
    slug = str(value).strip().lower()
    if not slug:
        raise AffiliationError("empty stakeholder id in affiliation config")
    return slug


def resolve(email: str, affiliations: AffiliationMap) -> Resolution:
    """Resolve one contributor email to a stakeholder, never guessing.

    Raises :class:`AffiliationError` for syntactically invalid emails
    (anything without exactly one ``@`` between non-empty parts).
    """
    normalized = email.strip().lower()
    local, sep, domain = normalized.partition("@")
    if not sep or not local or not domain or "@" in domain:
        raise AffiliationError(f"invalid email address {email!r}")
    if normalized in affiliations.email_overrides:
        return affiliations.stakeholder(affiliations.email_overrides[normalized])
    if domain in affiliations.domain_rules:
        return affiliations.stakeholder(affiliations.domain_rules[domain])
    return Unresolved(normalized)


def resolve_to_id(email: str, affiliations: AffiliationMap) -> str:
    """Stakeholder id for analysis: unresolved or invalid → ``_unaffiliated``."""
    try:
        resolution = resolve(email, affiliations)
    except AffiliationError:
        return UNAFFILIATED
    if isinstance(resolution, Unresolved):
        return UNAFFILIATED
    return resolution.id


def contributor_emails(corpus: Iterable[IssueRecord]) -> Counter:
    """Occurrence counts of every reporter and patch-author email."""
    counts: Counter = Counter()
    for issue in corpus:
        counts[issue.reporter_email.strip().lower()] += 1
        for patch in issue.patches:
            counts[patch.author_email.strip().lower()] += 1
    return counts


def unresolved_report(
    corpus: Iterable[IssueRecord], affiliations: AffiliationMap
) -> list[tuple[str, int]]:
    """Unresolved (or invalid) contributor emails with occurrence counts.

    Sorted by descending count, then lexicographic email for determinism.
    """
    unresolved: list[tuple[str, int]] = []
    for email, count in contributor_emails(corpus).items():
        try:
            resolution = resolve(email, affiliations)
        except AffiliationError:
            unresolved.append((email, count))
            continue
        if isinstance(resolution, Unresolved):
            unresolved.append((email, count))
    unresolved.sort(key=lambda item: (-item[1], item[0]))
    return unresolved
