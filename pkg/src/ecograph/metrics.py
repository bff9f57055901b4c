"""Influence and cohesion metrics on a collaboration network.

Shortest paths treat an edge of weight ``w`` as having distance ``1/w``:
stronger collaboration means a shorter path. Betweenness follows the
Brandes accumulation without normalization and with endpoints excluded;
closeness uses the component-adjusted (Wasserman-Faust) form so values
stay comparable on the disconnected networks this domain produces.
"""

from __future__ import annotations

import csv
import heapq
import itertools
import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable

from .graph import CollaborationNetwork

#: Relative tolerance under which two path distances count as tied.
DISTANCE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class CentralityTable:
    """Per-stakeholder centrality values for one network."""

    out_degree: dict[str, float]
    betweenness: dict[str, float]
    closeness: dict[str, float]

    def stakeholders(self) -> list[str]:
        return sorted(self.out_degree)


@dataclass(frozen=True)
class GraphStats:
    """Whole-network cohesion measures."""

    average_clustering_coefficient: float
    graph_density: float
    vertex_count: int
    edge_count: int


def _distance_adjacency(
    network: CollaborationNetwork,
) -> dict[str, list[tuple[str, float]]]:
    """Outgoing 1/weight distances, target-sorted for deterministic order."""
    adjacency: dict[str, list[tuple[str, float]]] = {
        vertex: [] for vertex in network.vertices
    }
    for (source, target), weight in network.edges.items():
        adjacency[source].append((target, 1.0 / weight))
    for neighbors in adjacency.values():
        neighbors.sort()
    return adjacency


def _ties(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=DISTANCE_TOLERANCE, abs_tol=0.0)


def _dijkstra_paths(
    source: str, adjacency: dict[str, list[tuple[str, float]]]
) -> tuple[list[str], dict[str, list[str]], dict[str, float], dict[str, float]]:
    """Single-source shortest paths with path counting.

    Returns the settle order, predecessor lists, shortest-path counts, and
    final distances. All tied shortest paths are counted; distance equality
    uses :data:`DISTANCE_TOLERANCE`. Edge distances are strictly positive,
    so every predecessor settles (and has its count finalized) before the
    node it feeds.
    """
    order: list[str] = []
    predecessors: dict[str, list[str]] = {v: [] for v in adjacency}
    sigma = dict.fromkeys(adjacency, 0.0)
    sigma[source] = 1.0
    final: dict[str, float] = {}
    best: dict[str, float] = {source: 0.0}
    counter = itertools.count()
    queue: list[tuple[float, int, str]] = [(0.0, next(counter), source)]
    while queue:
        distance, _, vertex = heapq.heappop(queue)
        if vertex in final:
            continue
        final[vertex] = distance
        order.append(vertex)
        for neighbor, step in adjacency[vertex]:
            if neighbor in final:
                continue
            candidate = distance + step
            known = best.get(neighbor)
            if known is None or (candidate < known and not _ties(candidate, known)):
                best[neighbor] = candidate
                heapq.heappush(queue, (candidate, next(counter), neighbor))
                sigma[neighbor] = sigma[vertex]
                predecessors[neighbor] = [vertex]
            elif _ties(candidate, known):
                sigma[neighbor] += sigma[vertex]
                predecessors[neighbor].append(vertex)
    return order, predecessors, sigma, final


def out_degree_centrality(network: CollaborationNetwork) -> dict[str, float]:
    """Sum of outgoing edge weights per stakeholder (node strength)."""
    strength = dict.fromkeys(network.vertices, 0.0)
    for (source, _), weight in sorted(network.edges.items()):
        strength[source] += weight
    return strength


def betweenness_centrality(network: CollaborationNetwork) -> dict[str, float]:
    """Weighted directed betweenness: shortest-path load on each stakeholder.

    For every ordered vertex pair the fraction of tied shortest paths
    passing through a third vertex is accumulated onto that vertex. No
    normalization is applied.
    """
    adjacency = _distance_adjacency(network)
    centrality = dict.fromkeys(network.vertices, 0.0)
    for source in sorted(network.vertices):
        order, predecessors, sigma, _ = _dijkstra_paths(source, adjacency)
        dependency = dict.fromkeys(order, 0.0)
        for vertex in reversed(order):
            coefficient = (1.0 + dependency[vertex]) / sigma[vertex]
            for predecessor in predecessors[vertex]:
                dependency[predecessor] += sigma[predecessor] * coefficient
            if vertex != source:
                centrality[vertex] += dependency[vertex]
    return centrality


def closeness_centrality(network: CollaborationNetwork) -> dict[str, float]:
    """Component-adjusted closeness over outward shortest-path distances.

    With ``R`` the set of vertices reachable from ``v`` and ``n`` the vertex
    count: ``(|R| / (n-1)) * (|R| / sum of distances)``; 0 when nothing is
    reachable.
    """
    adjacency = _distance_adjacency(network)
    n = len(network.vertices)
    closeness = {}
    for vertex in sorted(network.vertices):
        _, _, _, distances = _dijkstra_paths(vertex, adjacency)
        reachable = len(distances) - 1
        if reachable <= 0:
            closeness[vertex] = 0.0
            continue
        total = sum(d for node, d in distances.items() if node != vertex)
        closeness[vertex] = (reachable / (n - 1)) * (reachable / total)
    return closeness


def average_clustering_coefficient(network: CollaborationNetwork) -> float:
    """Mean local clustering on the undirected, unweighted projection.

    A vertex with fewer than two neighbors contributes 0; the mean runs
    over all vertices, isolated ones included.
    """
    if not network.vertices:
        return 0.0
    neighbors: dict[str, set[str]] = {v: set() for v in network.vertices}
    for source, target in network.edges:
        neighbors[source].add(target)
        neighbors[target].add(source)
    total = 0.0
    for vertex in network.vertices:
        adjacent = neighbors[vertex]
        degree = len(adjacent)
        if degree < 2:
            continue
        links = 0
        for a, b in itertools.combinations(sorted(adjacent), 2):
            if b in neighbors[a]:
                links += 1
        total += 2.0 * links / (degree * (degree - 1))
    return total / len(network.vertices)


def graph_density(network: CollaborationNetwork) -> float:
    """Directed simple-graph density: edges over n*(n-1) possible."""
    n = network.vertex_count
    if n < 2:
        return 0.0
    return network.edge_count / (n * (n - 1))


def centrality_table(network: CollaborationNetwork) -> CentralityTable:
    return CentralityTable(
        out_degree=out_degree_centrality(network),
        betweenness=betweenness_centrality(network),
        closeness=closeness_centrality(network),
    )


def graph_stats(network: CollaborationNetwork) -> GraphStats:
    return GraphStats(
        average_clustering_coefficient=average_clustering_coefficient(network),
        graph_density=graph_density(network),
        vertex_count=network.vertex_count,
        edge_count=network.edge_count,
    )


# --------------------------------------------------------------------------
# CSV output


def format_value(value: float) -> str:
    """Shortest decimal representation that round-trips the float."""
    return repr(float(value))


def write_centrality_csv(
    rows: Iterable[tuple[str, CentralityTable]], handle: IO[str] | str | Path
) -> None:
    """One row per stakeholder: release,stakeholder,out_degree,betweenness,closeness."""
    with _open_for_csv(handle) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["release", "stakeholder", "out_degree", "betweenness", "closeness"]
        )
        for release_id, table in rows:
            for stakeholder in table.stakeholders():
                writer.writerow(
                    [
                        release_id,
                        stakeholder,
                        format_value(table.out_degree[stakeholder]),
                        format_value(table.betweenness[stakeholder]),
                        format_value(table.closeness[stakeholder]),
                    ]
                )


def write_stats_csv(
    rows: Iterable[tuple[str, GraphStats]], handle: IO[str] | str | Path
) -> None:
    """One row per release: release,vertex_count,edge_count,acc,gd."""
    with _open_for_csv(handle) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["release", "vertex_count", "edge_count", "acc", "gd"])
        for release_id, stats in rows:
            writer.writerow(
                [
                    release_id,
                    stats.vertex_count,
                    stats.edge_count,
                    format_value(stats.average_clustering_coefficient),
                    format_value(stats.graph_density),
                ]
            )


class _open_for_csv:
    """Open a path for CSV writing, or pass an already open handle through."""

    def __init__(self, target: IO[str] | str | Path):
        self.target = target
        self.handle: IO[str] | None = None

    def __enter__(self) -> IO[str]:
        if hasattr(self.target, "write"):
            return self.target  # type: ignore[return-value]
        self.handle = open(self.target, "w", encoding="utf-8", newline="")
        return self.handle

    def __exit__(self, *exc_info):
        if self.handle is not None:
            self.handle.close()
        return False
