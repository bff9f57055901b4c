"""The ``ecograph`` command line interface."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import __version__
from .analytics import (
    AnalyticsError,
    issues_for_release,
    load_release_config,
)
from .crawler import DEFAULT_PARALLELISM, crawl
from .graph import build_network, write_dot, write_graphml
from .identity import AffiliationMap, AffiliationError, unresolved_report
from .ingest import (
    CorpusImportError,
    IngestError,
    SessionLog,
    export_jsonl,
    import_jsonl,
    parse_issue,
)
from .log import configure_logging
from .metrics import centrality_table, graph_stats, write_centrality_csv, write_stats_csv
from .report import (
    PipelineConfig,
    PipelineError,
    build_release_products,
    ensure_resolvable,
    run_pipeline,
    write_analytics_reports,
)

_ERRORS = (IngestError, AffiliationError, AnalyticsError, PipelineError, OSError)


@click.group()
@click.version_option(version=__version__, prog_name="ecograph")
def main():
    """Mine issue-tracker data into stakeholder collaboration networks."""
    configure_logging()


def _echo_json(obj) -> None:
    click.echo(json.dumps(obj, ensure_ascii=False))


@main.command("crawl")
@click.option("--endpoint", required=True, help="Tracker search API URL.")
@click.option("--query", required=True, help="Tracker query string.")
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
@click.option("--page-size", default=50, show_default=True, type=click.IntRange(min=1))
@click.option("--parallelism", default=DEFAULT_PARALLELISM, show_default=True,
              type=click.IntRange(min=1))
@click.option("--resume", is_flag=True, help="Continue from the saved session cursor.")
def crawl_command(endpoint, query, out_dir, page_size, parallelism, resume):
    """Fetch matching issues, keeping raw documents and a normalized corpus."""
    session = SessionLog(out_dir)
    start_at = 0
    if resume:
        cursor = session.load_cursor()
        if cursor and not cursor.get("completed"):
            start_at = int(cursor.get("next_start_at", 0))
    try:
        fetched = sum(
            1
            for _ in crawl(
                endpoint, query, page_size, session,
                start_at=start_at, parallelism=parallelism,
            )
        )
        # the session holds everything fetched, including earlier resumed runs
        records = sorted(
            (parse_issue(doc) for doc in session.iter_documents()),
            key=lambda record: record.key,
        )
        export_jsonl(records, Path(out_dir) / "issues.jsonl")
    except _ERRORS as exc:
        raise click.ClickException(str(exc))
    _echo_json({"fetched": fetched, "normalized": len(records), "out": str(out_dir)})


@main.command("import")
@click.option("--in", "corpus_path", required=True,
              type=click.Path(exists=True, path_type=Path))
def import_command(corpus_path):
    """Validate a canonical JSONL corpus."""
    try:
        records = import_jsonl(corpus_path)
    except CorpusImportError as exc:
        raise click.ClickException(str(exc))
    _echo_json(
        {
            "issues": len(records),
            "patches": sum(len(record.patches) for record in records),
        }
    )


@main.command("resolve")
@click.option("--map", "map_path", required=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--in", "corpus_path", required=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--report-unresolved", is_flag=True,
              help="Print unresolved emails with occurrence counts as CSV.")
def resolve_command(map_path, corpus_path, report_unresolved):
    """Resolve contributor emails against an affiliation map."""
    try:
        affiliations = AffiliationMap.load(map_path)
        corpus = import_jsonl(corpus_path)
        unresolved = unresolved_report(corpus, affiliations)
    except _ERRORS as exc:
        raise click.ClickException(str(exc))
    if report_unresolved:
        click.echo("email,count")
        for email, count in unresolved:
            click.echo(f"{email},{count}")
    else:
        from .identity import contributor_emails

        distinct = len(contributor_emails(corpus))
        _echo_json(
            {
                "distinct_emails": distinct,
                "resolved": distinct - len(unresolved),
                "unresolved": len(unresolved),
            }
        )


def _load_release_issues(corpus_path, map_path, release_id, releases_path):
    affiliations = AffiliationMap.load(map_path)
    corpus = import_jsonl(corpus_path)
    config = load_release_config(releases_path) if releases_path else None
    issues = issues_for_release(corpus, release_id, config)
    return corpus, affiliations, issues


@main.command("network")
@click.option("--release", "release_id", required=True)
@click.option("--in", "corpus_path", required=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--map", "map_path", required=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--out-graphml", required=True, type=click.Path(path_type=Path))
@click.option("--out-dot", type=click.Path(path_type=Path))
@click.option("--releases", "releases_path", type=click.Path(exists=True, path_type=Path),
              help="Release config for exact multi-release assignment.")
@click.option("--committed-only", is_flag=True,
              help="Count only patches marked approved.")
def network_command(release_id, corpus_path, map_path, out_graphml, out_dot,
                    releases_path, committed_only):
    """Build one release's collaboration network and export it."""
    try:
        _, affiliations, issues = _load_release_issues(
            corpus_path, map_path, release_id, releases_path
        )
        network = build_network(
            issues, affiliations, release_id, committed_only=committed_only
        )
        write_graphml(network, out_graphml, affiliations)
        if out_dot:
            write_dot(network, out_dot, affiliations)
    except _ERRORS as exc:
        raise click.ClickException(str(exc))
    _echo_json(
        {
            "release": release_id,
            "vertices": network.vertex_count,
            "edges": network.edge_count,
        }
    )


@main.command("metrics")
@click.option("--release", "release_id", required=True)
@click.option("--in", "corpus_path", required=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--map", "map_path", required=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--out-csv", required=True, type=click.Path(path_type=Path))
@click.option("--out-stats", type=click.Path(path_type=Path),
              help="Also write the release's vertex/edge/ACC/GD row.")
@click.option("--releases", "releases_path", type=click.Path(exists=True, path_type=Path))
@click.option("--committed-only", is_flag=True)
def metrics_command(release_id, corpus_path, map_path, out_csv, out_stats,
                    releases_path, committed_only):
    """Compute centralities (and optionally graph stats) for one release."""
    try:
        _, affiliations, issues = _load_release_issues(
            corpus_path, map_path, release_id, releases_path
        )
        network = build_network(
            issues, affiliations, release_id, committed_only=committed_only
        )
        table = centrality_table(network)
        write_centrality_csv([(release_id, table)], out_csv)
        if out_stats:
            write_stats_csv([(release_id, graph_stats(network))], out_stats)
    except _ERRORS as exc:
        raise click.ClickException(str(exc))
    _echo_json({"release": release_id, "stakeholders": len(table.out_degree)})


@main.command("analyze")
@click.option("--in", "corpus_path", required=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--map", "map_path", required=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--releases", "releases_path", required=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
@click.option("--top-n", default=10, show_default=True, type=int,
              help="Limit ranking rows to the N highest-accumulated stakeholders "
                   "(0 keeps everyone).")
@click.option("--strict", is_flag=True,
              help="Abort when any contributor email stays unresolved.")
@click.option("--committed-only", is_flag=True)
def analyze_command(corpus_path, map_path, releases_path, out_dir, top_n,
                    strict, committed_only):
    """Write innovation, ranking, and category-crosstab reports."""
    try:
        corpus = import_jsonl(corpus_path)
        affiliations = AffiliationMap.load(map_path)
        if strict:
            ensure_resolvable(corpus, affiliations)
        release_config = load_release_config(releases_path)
        products = build_release_products(
            corpus, affiliations, release_config, committed_only=committed_only
        )
        out_dir.mkdir(parents=True, exist_ok=True)
        write_analytics_reports(
            products, corpus, affiliations, top_n, lambda name: out_dir / name
        )
    except _ERRORS as exc:
        raise click.ClickException(str(exc))
    _echo_json({"releases": list(products.release_order), "out": str(out_dir)})


@main.command("run")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, path_type=Path))
def run_command(config_path):
    """Run the full pipeline described by a config file."""
    try:
        config = PipelineConfig.from_json(config_path)
        manifest = run_pipeline(config)
    except _ERRORS as exc:
        raise click.ClickException(str(exc))
    _echo_json(
        {"out": str(config.out_dir), "artifacts": len(manifest["files"])}
    )


if __name__ == "__main__":
    main()
