"""End-to-end pipeline: import, resolve, build, measure, analyze, export.

A run writes one GraphML network per release, four CSV reports, and a
manifest listing every artifact with its content hash. Reruns on identical
inputs produce byte-identical artifacts; on any stage failure the partial
outputs are removed and no manifest is written.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .analytics import (
    assign_releases,
    category_crosstab,
    innovation_report,
    load_release_config,
    ranking_series,
    top_accumulated,
    write_crosstab_csv,
    write_innovation_csv,
    write_rankings_csv,
)
from .graph import build_network, write_graphml
from .identity import AffiliationMap, unresolved_report
from .ingest import import_jsonl
from .log import stage_logger
from .metrics import centrality_table, graph_stats, write_stats_csv

log = stage_logger("pipeline")

MANIFEST_NAME = "manifest.json"
CENTRALITY_METRICS = ("out_degree", "betweenness", "closeness")


class PipelineError(Exception):
    """Raised when a pipeline stage cannot complete."""


@dataclass(frozen=True)
class PipelineConfig:
    """Validated inputs and flags for one pipeline run."""

    corpus: Path
    affiliations: Path
    releases: Path
    out_dir: Path
    top_n: int = 10
    strict: bool = False
    committed_only: bool = False

    @classmethod
    def from_json(cls, path: str | Path) -> "PipelineConfig":
        path = Path(path)
        try:
            obj = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise PipelineError(f"{path}: invalid JSON: {exc}")
        missing = [k for k in ("corpus", "affiliations", "releases", "out_dir") if k not in obj]
        if missing:
            raise PipelineError(f"{path}: missing config fields: {', '.join(missing)}")
        base = path.parent
        return cls(
            corpus=(base / obj["corpus"]).resolve(),
            affiliations=(base / obj["affiliations"]).resolve(),
            releases=(base / obj["releases"]).resolve(),
            out_dir=(base / obj["out_dir"]).resolve(),
            top_n=int(obj.get("top_n", 10)),
            strict=bool(obj.get("strict", False)),
            committed_only=bool(obj.get("committed_only", False)),
        )

    def validate(self) -> None:
        for name in ("corpus", "affiliations", "releases"):
            target: Path = getattr(self, name)
            if not target.is_file():
                raise PipelineError(f"{name} file not found: {target}")
        self.out_dir.mkdir(parents=True, exist_ok=True)


class _ArtifactWriter:
    """Tracks written artifacts so a failed run can clean up after itself."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.paths: list[Path] = []

    def target(self, relative: str) -> Path:
        path = self.out_dir / relative
        path.parent.mkdir(parents=True, exist_ok=True)
        self.paths.append(path)
        return path

    def remove_all(self) -> None:
        for path in self.paths:
            path.unlink(missing_ok=True)

    def manifest(self) -> dict:
        files = []
        for path in sorted(self.paths):
            digest = hashlib.sha256(path.read_bytes()).hexdigest()
            files.append(
                {
                    "path": path.relative_to(self.out_dir).as_posix(),
                    "sha256": digest,
                    "bytes": path.stat().st_size,
                }
            )
        return {"generator": f"ecograph {__version__}", "files": files}


def run_pipeline(config: PipelineConfig) -> dict:
    """Execute the full pipeline; returns the artifact manifest."""
    config.validate()
    writer = _ArtifactWriter(config.out_dir)
    try:
        manifest = _run_stages(config, writer)
    except Exception:
        writer.remove_all()
        (config.out_dir / MANIFEST_NAME).unlink(missing_ok=True)
        raise
    manifest_path = config.out_dir / MANIFEST_NAME
    manifest_path.write_text(
        json.dumps(manifest, indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
        newline="\n",
    )
    log.info("pipeline complete",
             extra={"fields": {"artifacts": len(manifest["files"])}})
    return manifest


@dataclass(frozen=True)
class ReleaseProducts:
    """Per-release networks and centrality tables, in release-date order."""

    release_order: tuple[str, ...]
    releases: dict
    networks: dict
    tables: dict

    def metric_values(self, metric_name: str) -> dict[str, dict[str, float]]:
        return {
            release_id: getattr(self.tables[release_id], metric_name)
            for release_id in self.release_order
        }


def ensure_resolvable(corpus, affiliations: AffiliationMap) -> None:
    """Strict-mode gate: abort when any contributor email stays unresolved."""
    unresolved = unresolved_report(corpus, affiliations)
    if unresolved:
        listing = ", ".join(f"{email} ({count})" for email, count in unresolved)
        raise PipelineError(f"unresolved contributor emails: {listing}")


def build_release_products(
    corpus,
    affiliations: AffiliationMap,
    release_config,
    *,
    committed_only: bool = False,
) -> ReleaseProducts:
    """Window the corpus and build one network and table per release."""
    releases = assign_releases(corpus, release_config)
    in_scope = sum(len(release.issues) for release in releases.values())
    if in_scope == 0:
        raise PipelineError("no issues in scope")
    log.info("releases assigned",
             extra={"fields": {"releases": len(releases), "issues": in_scope}})

    by_key = {issue.key: issue for issue in corpus}
    release_order = tuple(spec.id for spec in release_config)
    networks = {}
    tables = {}
    for release_id in release_order:
        issues = [by_key[key] for key in releases[release_id].issues]
        network = build_network(
            issues, affiliations, release_id, committed_only=committed_only
        )
        networks[release_id] = network
        tables[release_id] = centrality_table(network)
        log.info("network built",
                 extra={"fields": {"release": release_id,
                                   "vertices": network.vertex_count,
                                   "edges": network.edge_count}})
    return ReleaseProducts(
        release_order=release_order,
        releases=releases,
        networks=networks,
        tables=tables,
    )


def write_analytics_reports(
    products: ReleaseProducts,
    corpus,
    affiliations: AffiliationMap,
    top_n: int,
    target,
) -> None:
    """Write innovation.csv, rankings.csv, and crosstab.csv via ``target``."""
    reports = [
        innovation_report(products.releases[rid], corpus)
        for rid in products.release_order
    ]
    write_innovation_csv(reports, target("innovation.csv"))

    all_series = []
    include = {}
    for metric_name in CENTRALITY_METRICS:
        values = products.metric_values(metric_name)
        all_series.append(ranking_series(values, metric_name, products.release_order))
        include[metric_name] = top_accumulated(values, top_n)
    write_rankings_csv(all_series, target("rankings.csv"), include)

    crosstab = category_crosstab(
        (products.networks[rid] for rid in products.release_order),
        affiliations.category_labels,
    )
    write_crosstab_csv(crosstab, target("crosstab.csv"))
    if crosstab.unknown_pairs:
        log.info("collaboration pairs with unknown category excluded from crosstab",
                 extra={"fields": {"pairs": crosstab.unknown_pairs}})


def _run_stages(config: PipelineConfig, writer: _ArtifactWriter) -> dict:
    corpus = import_jsonl(config.corpus)
    log.info("corpus imported", extra={"fields": {"issues": len(corpus)}})
    affiliations = AffiliationMap.load(config.affiliations)

    if config.strict:
        ensure_resolvable(corpus, affiliations)

    release_config = load_release_config(config.releases)
    products = build_release_products(
        corpus, affiliations, release_config, committed_only=config.committed_only
    )

    stats_rows = []
    for release_id in products.release_order:
        network = products.networks[release_id]
        stats_rows.append((release_id, graph_stats(network)))
        write_graphml(
            network, writer.target(f"networks/{release_id}.graphml"), affiliations
        )
    write_stats_csv(stats_rows, writer.target("network_stats.csv"))

    write_analytics_reports(
        products, corpus, affiliations, config.top_n, writer.target
    )
    return writer.manifest()


__all__ = ["PipelineConfig", "PipelineError", "run_pipeline", "MANIFEST_NAME"]
