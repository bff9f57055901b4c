from __future__ import annotations

import math

import pytest
from hypothesis import given, strategies as st

from ecograph.graph import (
    CollaborationNetwork,
    IssueContribution,
    build_network,
    issue_edge_weights,
    issue_shares,
    write_dot,
    write_graphml,
)
from ecograph.identity import AffiliationMap

from conftest import make_issue, make_patch


def fig2_issue():
    return make_issue(
        key="W-1",
        patches=(
            make_patch("p@a.com", 100, 50),
            make_patch("p@b.com", 100, 0),
            make_patch("p@c.com", 150, 0),
        ),
    )


# --------------------------------------------------------------------------
# issue_shares


def test_shares_net_loc(abc_map):
    shares = issue_shares(fig2_issue(), abc_map).shares
    assert shares == {"a": 50.0, "b": 100.0, "c": 150.0}


def test_shares_single_contributor(abc_map):
    issue = make_issue(patches=(make_patch("p@a.com", 10, 2),))
    assert issue_shares(issue, abc_map).shares == {"a": 8.0}


def test_shares_all_nonpositive_falls_back_to_counts(abc_map):
    issue = make_issue(
        patches=(make_patch("p@a.com", 5, 9), make_patch("p@b.com", 3, 3))
    )
    assert issue_shares(issue, abc_map).shares == {"a": 1.0, "b": 1.0}


def test_shares_drop_zero_contributor_when_others_positive(abc_map):
    issue = make_issue(
        patches=(make_patch("p@a.com", 2, 10), make_patch("p@b.com", 30, 0))
    )
    assert issue_shares(issue, abc_map).shares == {"b": 30.0}


def test_shares_sum_multiple_patches_same_org(abc_map):
    issue = make_issue(
        patches=(
            make_patch("p@a.com", 10, 0),
            make_patch("q@a.com", 5, 1),
            make_patch("p@b.com", 7, 0),
        )
    )
    assert issue_shares(issue, abc_map).shares == {"a": 14.0, "b": 7.0}


def test_shares_committed_only_filter(abc_map):
    issue = make_issue(
        patches=(
            make_patch("p@a.com", 10, 0, approved=False),
            make_patch("p@b.com", 5, 0),
        )
    )
    assert issue_shares(issue, abc_map, committed_only=True).shares == {"b": 5.0}
    all_shares = issue_shares(issue, abc_map).shares
    assert all_shares == {"a": 10.0, "b": 5.0}


def test_shares_no_countable_patches_returns_none(abc_map):
    issue = make_issue(patches=(make_patch("p@a.com", 1, 0, approved=False),))
    assert issue_shares(issue, abc_map, committed_only=True) is None


# --------------------------------------------------------------------------
# issue_edge_weights


def test_fig2_edge_weights(abc_map):
    weights = issue_edge_weights(issue_shares(fig2_issue(), abc_map))
    expected = {
        ("a", "b"): 50 / 300,
        ("a", "c"): 50 / 300,
        ("b", "a"): 100 / 300,
        ("b", "c"): 100 / 300,
        ("c", "a"): 150 / 300,
        ("c", "b"): 150 / 300,
    }
    assert weights.keys() == expected.keys()
    for pair, value in expected.items():
        assert weights[pair] == pytest.approx(value, abs=1e-12)


def test_single_contributor_produces_no_edges():
    assert issue_edge_weights(IssueContribution("X-1", {"a": 8.0})) == {}


def test_equal_split_pair():
    weights = issue_edge_weights(IssueContribution("X-1", {"a": 1.0, "b": 1.0}))
    assert weights == {("a", "b"): 0.5, ("b", "a"): 0.5}


_shares = st.dictionaries(
    st.sampled_from([f"org{i}" for i in range(8)]),
    st.integers(min_value=1, max_value=500).map(float),
    min_size=1,
    max_size=8,
)


@given(_shares)
def test_edge_weights_telescope_to_k_minus_one(shares):
    weights = issue_edge_weights(IssueContribution("X-1", shares))
    k = len(shares)
    assert sum(weights.values()) == pytest.approx(k - 1, abs=1e-9)


@given(_shares, st.integers(min_value=1, max_value=9))
def test_edge_weights_invariant_under_loc_scaling(shares, factor):
    scaled = {org: value * factor for org, value in shares.items()}
    assert issue_edge_weights(IssueContribution("X-1", shares)) == issue_edge_weights(
        IssueContribution("X-1", scaled)
    )


# --------------------------------------------------------------------------
# build_network


def test_two_issues_accumulate(abc_map):
    issues = [
        make_issue(key="X-1", patches=(make_patch("p@a.com", 3, 2),
                                       make_patch("p@b.com", 2, 1))),
        make_issue(key="X-2", patches=(make_patch("q@a.com", 7, 0),
                                       make_patch("q@b.com", 7, 0))),
    ]
    net = build_network(issues, abc_map, "R1.0")
    assert net.edges[("a", "b")] == pytest.approx(1.0)
    assert net.edges[("b", "a")] == pytest.approx(1.0)


def test_fig2_network_structure(abc_map):
    net = build_network([fig2_issue()], abc_map, "R1.0")
    assert net.vertices == frozenset({"a", "b", "c"})
    assert net.edge_count == 6
    assert net.edges[("c", "a")] == pytest.approx(0.5, abs=1e-12)


def test_isolated_contributor_kept_as_vertex(abc_map):
    issues = [
        make_issue(key="X-1", patches=(make_patch("p@a.com", 5, 0),
                                       make_patch("p@b.com", 5, 0))),
        make_issue(key="X-2", patches=(make_patch("p@c.com", 9, 0),)),
    ]
    net = build_network(issues, abc_map, "R1.0")
    assert net.vertices == frozenset({"a", "b", "c"})
    assert all("c" not in pair for pair in net.edges)


def test_zero_net_contributor_still_a_vertex(abc_map):
    issue = make_issue(
        patches=(make_patch("p@a.com", 0, 10), make_patch("p@b.com", 30, 0),
                 make_patch("p@c.com", 20, 0))
    )
    net = build_network([issue], abc_map, "R1.0")
    assert "a" in net.vertices
    assert all("a" not in pair for pair in net.edges)


def test_same_org_collaboration_has_no_self_loop(abc_map):
    issue = make_issue(
        patches=(make_patch("p@a.com", 10, 0), make_patch("q@a.com", 20, 0))
    )
    net = build_network([issue], abc_map, "R1.0")
    assert net.vertices == frozenset({"a"})
    assert net.edges == {}


def test_empty_issue_list_gives_empty_network(abc_map):
    net = build_network([], abc_map, "R1.0")
    assert net.vertices == frozenset()
    assert net.edges == {}


def test_unresolved_authors_group_under_unaffiliated():
    amap = AffiliationMap.from_obj({"domains": {"a.com": "a"}})
    issue = make_issue(
        patches=(make_patch("p@a.com", 5, 0), make_patch("who@gmail.com", 5, 0))
    )
    net = build_network([issue], amap, "R1.0")
    assert net.vertices == frozenset({"a", "_unaffiliated"})
    assert net.edges[("a", "_unaffiliated")] == pytest.approx(0.5)


@given(st.lists(_shares, min_size=0, max_size=6))
def test_network_additivity_over_concatenation(share_maps):
    def issues_from(maps, offset):
        issues = []
        for i, shares in enumerate(maps):
            patches = tuple(
                make_patch(f"dev@{org.replace('org', '')}x.com", int(v), 0)
                for org, v in shares.items()
            )
            issues.append(make_issue(key=f"X-{offset + i}", patches=patches))
        return issues

    amap = AffiliationMap.from_obj(
        {"domains": {f"{i}x.com": f"org{i}" for i in range(8)}}
    )
    half = len(share_maps) // 2
    first = issues_from(share_maps[:half], 0)
    second = issues_from(share_maps[half:], half)
    combined = build_network(first + second, amap, "R1.0")
    part_a = build_network(first, amap, "R1.0")
    part_b = build_network(second, amap, "R1.0")
    assert combined.vertices == part_a.vertices | part_b.vertices
    summed = dict(part_a.edges)
    for pair, weight in part_b.edges.items():
        summed[pair] = summed.get(pair, 0.0) + weight
    assert combined.edges.keys() == summed.keys()
    for pair, weight in summed.items():
        assert math.isclose(combined.edges[pair], weight, rel_tol=1e-12)


def test_build_network_is_bit_stable(abc_map):
    issues = [
        make_issue(key=f"X-{i}", patches=(make_patch("p@a.com", i + 1, 0),
                                          make_patch("p@b.com", 2 * i + 1, 0)))
        for i in range(20)
    ]
    net_fwd = build_network(issues, abc_map, "R1.0")
    net_rev = build_network(list(reversed(issues)), abc_map, "R1.0")
    assert net_fwd.edges == net_rev.edges


# --------------------------------------------------------------------------
# invariants and exports


def test_network_rejects_self_loop():
    with pytest.raises(ValueError):
        CollaborationNetwork("R", frozenset({"a"}), {("a", "a"): 1.0})


def test_network_rejects_dangling_edge():
    with pytest.raises(ValueError):
        CollaborationNetwork("R", frozenset({"a"}), {("a", "b"): 1.0})


def test_network_rejects_nonpositive_weight():
    with pytest.raises(ValueError):
        CollaborationNetwork("R", frozenset({"a", "b"}), {("a", "b"): 0.0})


def test_graphml_export(tmp_path, abc_map):
    net = build_network([fig2_issue()], abc_map, "R2.2")
    out = tmp_path / "net.graphml"
    write_graphml(net, out, abc_map)
    text = out.read_text(encoding="utf-8")
    assert text.startswith("<?xml")
    assert '<graph id="R2.2" edgedefault="directed">' in text
    assert text.count("<node ") == 3
    assert text.count("<edge ") == 6
    assert '<data key="d_weight">0.1666666667</data>' in text


def test_dot_export(tmp_path, abc_map):
    net = build_network([fig2_issue()], abc_map, "R2.2")
    out = tmp_path / "net.dot"
    write_dot(net, out, abc_map)
    text = out.read_text(encoding="utf-8")
    assert text.startswith('digraph "R2.2" {')
    assert '"a" -> "b" [weight=0.1666666667];' in text
    assert text.rstrip().endswith("}")
