"""Per-release directed weighted stakeholder collaboration networks.

Each issue distributes influence among the stakeholders that attached
patches to it: a stakeholder's share is its summed net added LOC, and the
directed edge weight toward every co-contributor is that share divided by
the issue's total. Edge weights accumulate across all issues of a release.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape, quoteattr

from .identity import AffiliationMap, resolve_to_id
from .ingest import IssueRecord


@dataclass(frozen=True)
class IssueContribution:
    """Net contribution weight per stakeholder for a single issue."""

    issue_key: str
    shares: dict[str, float]

    def __post_init__(self):
        if not self.shares:
            raise ValueError(f"{self.issue_key}: contribution must have shares")
        if any(share <= 0 for share in self.shares.values()):
            raise ValueError(f"{self.issue_key}: shares must be positive")


@dataclass(frozen=True)
class CollaborationNetwork:
    """Directed weighted graph over stakeholders for one release.

    ``vertices`` holds every stakeholder with at least one counted patch in
    the release, including isolated ones; ``edges`` maps ordered stakeholder
    pairs (no self-loops) to accumulated positive weights. The per-issue
    ``contributions`` are kept so issue-level collaboration pairs can be
    recovered downstream.
    """

    release_id: str
    vertices: frozenset[str]
    edges: dict[tuple[str, str], float]
    contributions: tuple[IssueContribution, ...] = field(default_factory=tuple)

    def __post_init__(self):
        for (source, target), weight in self.edges.items():
            if source == target:
                raise ValueError(f"self-loop on {source!r}")
            if source not in self.vertices or target not in self.vertices:
                raise ValueError(f"edge endpoint not in vertices: {source}->{target}")
            if weight <= 0:
                raise ValueError(f"non-positive weight on {source}->{target}")

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def edge_count(self) -> int:
        return len(self.edges)


def countable_patches(issue: IssueRecord, *, committed_only: bool = False):
    """Patches that participate in weighting (optionally approved ones only)."""
    if committed_only:
        return [patch for patch in issue.patches if patch.approved]
    return list(issue.patches)


def issue_shares(
    issue: IssueRecord,
    affiliations: AffiliationMap,
    *,
    committed_only: bool = False,
) -> IssueContribution | None:
    """Aggregate an issue's patches into per-stakeholder contribution weights.

    Per stakeholder the weight is the sum over its patches of the net added
    LOC (added minus deleted), with each patch floored at zero. Stakeholders
    whose total is zero are dropped; when every stakeholder lands on zero,
    each patch-submitting stakeholder gets weight 1 so the collaboration
    itself still counts. Returns None when no patches are countable.
    """
    patches = countable_patches(issue, committed_only=committed_only)
    if not patches:
        return None
    totals: dict[str, int] = {}
    for patch in patches:
        stakeholder = resolve_to_id(patch.author_email, affiliations)
        net = max(patch.net_loc, 0)
        totals[stakeholder] = totals.get(stakeholder, 0) + net
    shares = {stakeholder: float(x) for stakeholder, x in totals.items() if x > 0}
    if not shares:
        shares = {stakeholder: 1.0 for stakeholder in totals}
    return IssueContribution(issue_key=issue.key, shares=shares)


def issue_edge_weights(
    contribution: IssueContribution,
) -> dict[tuple[str, str], float]:
    """Directed influence weights for one issue.

    Every contributing stakeholder points at every co-contributor with
    weight share/total. Single-contributor issues yield no edges.
    """
    if len(contribution.shares) < 2:
        return {}
    total = sum(contribution.shares.values())
    weights: dict[tuple[str, str], float] = {}
    for source, share in contribution.shares.items():
        weight = share / total
        for target in contribution.shares:
            if target != source:
                weights[(source, target)] = weight
    return weights


def build_network(
    issues: list[IssueRecord],
    affiliations: AffiliationMap,
    release_id: str,
    *,
    committed_only: bool = False,
) -> CollaborationNetwork:
    """Accumulate per-issue influence weights into the release network.

    Issues are processed in sorted key order so floating-point accumulation
    is bit-stable across runs. Stakeholders that only ever contribute alone
    stay in the vertex set as isolated vertices.
    """
    contributions: list[IssueContribution] = []
    vertices: set[str] = set()
    for issue in sorted(issues, key=lambda i: i.key):
        patches = countable_patches(issue, committed_only=committed_only)
        if not patches:
            continue
        vertices.update(
            resolve_to_id(patch.author_email, affiliations) for patch in patches
        )
        contribution = issue_shares(
            issue, affiliations, committed_only=committed_only
        )
        if contribution is not None:
            contributions.append(contribution)

    edges: dict[tuple[str, str], float] = {}
    for contribution in contributions:
        for pair, weight in issue_edge_weights(contribution).items():
            edges[pair] = edges.get(pair, 0.0) + weight

    return CollaborationNetwork(
        release_id=release_id,
        vertices=frozenset(vertices),
        edges=edges,
        contributions=tuple(contributions),
    )


# --------------------------------------------------------------------------
# exports

_WEIGHT_FORMAT = "{:.10g}"


def write_graphml(
    network: CollaborationNetwork,
    path: str | Path,
    affiliations: AffiliationMap | None = None,
) -> None:
    """Write the network as GraphML with weight, id, and category attributes."""
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<graphml xmlns="http://graphml.graphdrawing.org/xmlns">',
        '  <key id="d_id" for="node" attr.name="id" attr.type="string"/>',
        '  <key id="d_category" for="node" attr.name="category" attr.type="string"/>',
        '  <key id="d_weight" for="edge" attr.name="weight" attr.type="double"/>',
        f'  <graph id={quoteattr(network.release_id)} edgedefault="directed">',
    ]
    for vertex in sorted(network.vertices):
        category = _category(vertex, affiliations)
        lines.append(f"    <node id={quoteattr(vertex)}>")
        lines.append(f'      <data key="d_id">{escape(vertex)}</data>')
        lines.append(f'      <data key="d_category">{escape(category)}</data>')
        lines.append("    </node>")
    for source, target in sorted(network.edges):
        weight = _WEIGHT_FORMAT.format(network.edges[(source, target)])
        lines.append(
            f"    <edge source={quoteattr(source)} target={quoteattr(target)}>"
        )
        lines.append(f'      <data key="d_weight">{weight}</data>')
        lines.append("    </edge>")
    lines.extend(["  </graph>", "</graphml>", ""])
    Path(path).write_text("\n".join(lines), encoding="utf-8", newline="\n")


def write_dot(
    network: CollaborationNetwork,
    path: str | Path,
    affiliations: AffiliationMap | None = None,
) -> None:
    """Write the network in DOT form for graphviz-compatible tools."""
    lines = [f"digraph {_dot_id(network.release_id)} {{"]
    for vertex in sorted(network.vertices):
        category = _category(vertex, affiliations)
        lines.append(f'  {_dot_id(vertex)} [id="{vertex}" category="{category}"];')
    for source, target in sorted(network.edges):
        weight = _WEIGHT_FORMAT.format(network.edges[(source, target)])
        lines.append(f"  {_dot_id(source)} -> {_dot_id(target)} [weight={weight}];")
    lines.extend(["}", ""])
    Path(path).write_text("\n".join(lines), encoding="utf-8", newline="\n")


def _category(vertex: str, affiliations: AffiliationMap | None) -> str:
    if affiliations is None:
        return "unknown"
    return affiliations.category_labels.get(vertex, "unknown")


def _dot_id(value: str) -> str:
    quoted = value.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{quoted}"'
