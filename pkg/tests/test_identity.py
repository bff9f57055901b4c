from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from ecograph.identity import (
    AffiliationError,
    AffiliationMap,
    Stakeholder,
    UNAFFILIATED,
    Unresolved,
    contributor_emails,
    resolve,
    resolve_to_id,
    unresolved_report,
)

from conftest import make_issue, make_patch


@pytest.fixture
def sample_map():
    return AffiliationMap.from_obj(
        {
            "domains": {"hortonworks.com": "hortonworks", "Yahoo-Inc.COM": "yahoo"},
            "overrides": {"bob@apache.org": "yahoo"},
            "categories": {"hortonworks": "product_provider", "yahoo": "platform_user"},
        }
    )


def test_domain_rule_resolves(sample_map):
    result = resolve("alice@hortonworks.com", sample_map)
    assert isinstance(result, Stakeholder)
    assert result.id == "hortonworks"
    assert result.user_category == "product_provider"


def test_override_beats_domain(sample_map):
    assert resolve("bob@apache.org", sample_map).id == "yahoo"


def test_no_rule_gives_unresolved(sample_map):
    assert resolve("carol@gmail.com", sample_map) == Unresolved("carol@gmail.com")


def test_domain_matching_is_case_insensitive(sample_map):
    assert resolve("dev@YAHOO-INC.com", sample_map).id == "yahoo"


def test_domain_matching_is_exact_no_subdomains(sample_map):
    assert isinstance(resolve("x@corp.hortonworks.com", sample_map), Unresolved)


@pytest.mark.parametrize("email", ["nodomain", "two@at@x.com", "@x.com", "user@"])
def test_invalid_email_raises(sample_map, email):
    with pytest.raises(AffiliationError):
        resolve(email, sample_map)


def test_resolve_to_id_groups_unknowns(sample_map):
    assert resolve_to_id("carol@gmail.com", sample_map) == UNAFFILIATED
    assert resolve_to_id("garbage-no-at", sample_map) == UNAFFILIATED
    assert resolve_to_id("alice@hortonworks.com", sample_map) == "hortonworks"


def test_unknown_category_rejected():
    with pytest.raises(AffiliationError):
        AffiliationMap.from_obj({"categories": {"x": "world_domination"}})


def test_category_defaults_to_unknown(sample_map):
    assert sample_map.stakeholder("newcomer").user_category == "unknown"


# --------------------------------------------------------------------------
# unresolved report


def corpus_with_gmail():
    return [
        make_issue(
            key="X-1",
            reporter="alice@hortonworks.com",
            patches=(
                make_patch("x@gmail.com"),
                make_patch("x@gmail.com"),
                make_patch("x@gmail.com"),
            ),
        ),
        make_issue(
            key="X-2",
            reporter="bob@apache.org",
            patches=(make_patch("y@gmail.com"),),
        ),
    ]


def test_unresolved_report_counts_and_sorts(sample_map):
    report = unresolved_report(corpus_with_gmail(), sample_map)
    assert report == [("x@gmail.com", 3), ("y@gmail.com", 1)]


def test_unresolved_report_empty_when_all_resolve(sample_map):
    corpus = [
        make_issue(reporter="alice@hortonworks.com",
                   patches=(make_patch("bob@apache.org"),))
    ]
    assert unresolved_report(corpus, sample_map) == []


def test_unresolved_report_tie_breaks_lexicographically(sample_map):
    corpus = [
        make_issue(
            key="X-1",
            reporter="alice@hortonworks.com",
            patches=(make_patch("zed@gmail.com"), make_patch("ann@gmail.com"),
                     make_patch("zed@gmail.com"), make_patch("ann@gmail.com")),
        )
    ]
    assert unresolved_report(corpus, sample_map) == [
        ("ann@gmail.com", 2),
        ("zed@gmail.com", 2),
    ]


# --------------------------------------------------------------------------
# properties

_email = st.from_regex(r"[a-z]{1,8}@[a-z]{1,8}\.(com|org)", fullmatch=True)


@given(_email, st.dictionaries(st.from_regex(r"[a-z]{1,8}\.com", fullmatch=True),
                               st.sampled_from(["org1", "org2"]), max_size=4))
def test_resolve_is_pure(email, domains):
    amap = AffiliationMap.from_obj({"domains": domains})
    assert resolve(email, amap) == resolve(email, amap)


@given(_email, st.sampled_from(["org1", "org2"]),
       st.from_regex(r"[a-z]{1,8}\.com", fullmatch=True))
def test_adding_domain_rule_never_shadows_override(email, target, new_domain):
    base = AffiliationMap.from_obj({"overrides": {email: target}})
    extended = AffiliationMap.from_obj(
        {"overrides": {email: target}, "domains": {new_domain: "other"}}
    )
    assert resolve(email, base) == resolve(email, extended)


@given(st.lists(_email, min_size=1, max_size=12))
def test_resolved_plus_unresolved_covers_all_distinct(emails):
    amap = AffiliationMap.from_obj({"domains": {"resolved.com": "org1"}})
    corpus = [
        make_issue(key=f"X-{i}", reporter=email, patches=(make_patch(email),))
        for i, email in enumerate(emails)
    ]
    distinct = set(contributor_emails(corpus))
    unresolved = {email for email, _ in unresolved_report(corpus, amap)}
    resolved = {
        email for email in distinct
        if not isinstance(resolve(email, amap), Unresolved)
    }
    assert resolved | unresolved == distinct
    assert resolved & unresolved == set()
