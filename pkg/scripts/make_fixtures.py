#!/usr/bin/env python3
"""Regenerate the bundled synthetic fixtures under tests/fixtures/.

The corpus spans six releases with a deliberately varied mix: multi-party
collaborations, isolated contributors, zero-net and negative-net patches,
same-organization co-contributions, an unresolved issue, an unaffiliated
gmail contributor, an override-resolved apache.org address, a fix version
spanning two releases, and one unparseable fix version.
"""

from __future__ import annotations

import json
import sys
from datetime import timedelta
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from ecograph.ingest import export_jsonl, parse_timestamp, record_from_obj

FIXTURES = Path(__file__).resolve().parents[1] / "tests" / "fixtures"

AFFILIATIONS = {
    "domains": {
        "hortonworks.com": "hortonworks",
        "cloudera.com": "cloudera",
        "yahoo-inc.com": "yahoo",
        "intel.com": "intel",
        "nttdata.com": "nttdata",
        "ebay.com": "ebay",
        "wandisco.com": "wandisco",
        "altiscale.com": "altiscale",
        "quantcast.com": "quantcast",
    },
    "overrides": {"bob@apache.org": "yahoo"},
    "categories": {
        "hortonworks": "product_provider",
        "cloudera": "product_provider",
        "yahoo": "platform_user",
        "intel": "product_supporter",
        "nttdata": "service_provider",
        "ebay": "platform_user",
        "wandisco": "infrastructure_provider",
        "altiscale": "service_provider",
        # quantcast intentionally unlabeled -> unknown category
    },
}

RELEASES = [
    ("R2.2", "2013-10-15T00:00:00Z"),
    ("R2.3", "2014-02-20T00:00:00Z"),
    ("R2.4", "2014-04-07T00:00:00Z"),
    ("R2.5", "2014-08-11T00:00:00Z"),
    ("R2.6", "2014-11-18T00:00:00Z"),
    ("R2.7", "2015-04-21T00:00:00Z"),
]

# (key, fix_versions, type, reporter, resolved, patches)
# patches: (author, added, deleted[, approved])
CORPUS = [
    # ---- R2.2: hub around hortonworks, no triangles (star-shaped core)
    ("HDP-1", ["2.2.0"], "feature", "alice@hortonworks.com", True,
     [("alice@hortonworks.com", 100, 50), ("carl@cloudera.com", 100, 0),
      ("yuri@yahoo-inc.com", 150, 0)]),
    ("HDP-2", ["2.2.0"], "bug", "ivan@intel.com", True,
     [("alice@hortonworks.com", 40, 10), ("ivan@intel.com", 20, 0)]),
    ("HDP-3", ["2.2.1"], "bug", "nina@nttdata.com", True,
     [("nina@nttdata.com", 30, 5)]),
    ("HDP-4", ["2.2.0"], "improvement", "erik@ebay.com", True,
     [("erik@ebay.com", 55, 5), ("alice@hortonworks.com", 25, 0)]),
    ("HDP-5", ["2.2.1"], "bug", "wanda@wandisco.com", False,
     [("wanda@wandisco.com", 12, 2)]),
    # ---- R2.3: first triangle (hortonworks, cloudera, yahoo)
    ("HDP-10", ["2.3.0"], "feature", "carl@cloudera.com", True,
     [("carl@cloudera.com", 220, 20), ("alice@hortonworks.com", 180, 30)]),
    ("HDP-11", ["2.3.0"], "bug", "yuri@yahoo-inc.com", True,
     [("yuri@yahoo-inc.com", 60, 10), ("carl@cloudera.com", 90, 0)]),
    ("HDP-12", ["2.3.0"], "improvement", "alice@hortonworks.com", True,
     [("alice@hortonworks.com", 75, 25), ("yuri@yahoo-inc.com", 45, 5)]),
    ("HDP-13", ["2.3.0"], "bug", "ivan@intel.com", True,
     [("ivan@intel.com", 35, 0), ("nina@nttdata.com", 15, 0)]),
    ("HDP-14", ["2.3.0"], "bug", "amy@altiscale.com", True,
     [("amy@altiscale.com", 9, 1)]),
    ("HDP-15", ["2.3.0"], "other", "erik@ebay.com", True,
     [("erik@ebay.com", 18, 3)]),
    # ---- R2.4: zero-net fallback, unapproved patch, unlabeled organization
    ("HDP-20", ["2.4.0"], "bug", "alice@hortonworks.com", True,
     [("alice@hortonworks.com", 10, 10), ("carl@cloudera.com", 8, 8)]),
    ("HDP-21", ["2.4.0"], "feature", "quinn@quantcast.com", True,
     [("quinn@quantcast.com", 120, 10), ("alice@hortonworks.com", 80, 0)]),
    ("HDP-22", ["2.4.1"], "improvement", "carl@cloudera.com", True,
     [("carl@cloudera.com", 65, 15), ("ivan@intel.com", 35, 5),
      ("nina@nttdata.com", 25, 5)]),
    ("HDP-23", ["2.4.0"], "bug", "yuri@yahoo-inc.com", True,
     [("yuri@yahoo-inc.com", 42, 2, False), ("erik@ebay.com", 20, 0)]),
    ("HDP-24", ["2.4.0"], "bug", "wanda@wandisco.com", True,
     [("wanda@wandisco.com", 14, 4)]),
    # ---- R2.5: negative net among positives, gmail and override contributors
    ("HDP-30", ["2.5.0"], "feature", "alice@hortonworks.com", True,
     [("alice@hortonworks.com", 300, 50), ("freelancer@gmail.com", 90, 10)]),
    ("HDP-31", ["2.5.0"], "bug", "carl@cloudera.com", True,
     [("carl@cloudera.com", 5, 45), ("nina@nttdata.com", 70, 10)]),
    ("HDP-32", ["2.5.0"], "improvement", "bob@apache.org", True,
     [("bob@apache.org", 150, 20), ("alice@hortonworks.com", 60, 10)]),
    ("HDP-33", ["2.5.0"], "bug", "ivan@intel.com", True,
     [("ivan@intel.com", 28, 8), ("carl@cloudera.com", 12, 2)]),
    ("HDP-34", ["2.5.0"], "bug", "amy@altiscale.com", True,
     [("amy@altiscale.com", 33, 3), ("yuri@yahoo-inc.com", 17, 7)]),
    ("HDP-35", ["2.5.0"], "improvement", "erik@ebay.com", False,
     [("erik@ebay.com", 44, 4)]),
    # ---- R2.6: spans releases, unparseable version, unresolved collaboration
    ("HDP-40", ["2.6.0", "2.7.0"], "feature", "alice@hortonworks.com", True,
     [("alice@hortonworks.com", 200, 40), ("carl@cloudera.com", 160, 20)]),
    ("HDP-41", ["2.6.0", "3.0.0-alpha"], "improvement", "yuri@yahoo-inc.com", True,
     [("yuri@yahoo-inc.com", 85, 15), ("ivan@intel.com", 55, 5)]),
    ("HDP-42", ["2.6.0"], "improvement", "nina@nttdata.com", True,
     [("nina@nttdata.com", 48, 8), ("alice@hortonworks.com", 32, 2)]),
    ("HDP-43", ["2.6.0"], "bug", "wanda@wandisco.com", False,
     [("wanda@wandisco.com", 26, 6), ("carl@cloudera.com", 24, 4)]),
    ("HDP-44", ["2.6.0"], "bug", "erik@ebay.com", True,
     [("erik@ebay.com", 19, 9)]),
    ("HDP-45", ["2.6.0"], "bug", "amy@altiscale.com", True,
     [("amy@altiscale.com", 37, 7), ("nina@nttdata.com", 23, 3)]),
    ("HDP-46", ["2.6.1"], "other", "quinn@quantcast.com", True,
     [("quinn@quantcast.com", 11, 1)]),
    # ---- R2.7: same-org pair, dense core
    ("HDP-50", ["2.7.0"], "feature", "alice@hortonworks.com", True,
     [("alice@hortonworks.com", 140, 20), ("hank@hortonworks.com", 110, 10)]),
    ("HDP-51", ["2.7.0"], "bug", "carl@cloudera.com", True,
     [("carl@cloudera.com", 95, 15), ("alice@hortonworks.com", 85, 5),
      ("yuri@yahoo-inc.com", 70, 10)]),
    ("HDP-52", ["2.7.1"], "improvement", "ivan@intel.com", True,
     [("ivan@intel.com", 64, 4), ("nina@nttdata.com", 56, 6),
      ("carl@cloudera.com", 40, 0)]),
    ("HDP-53", ["2.7.0"], "bug", "yuri@yahoo-inc.com", True,
     [("yuri@yahoo-inc.com", 52, 2), ("nina@nttdata.com", 38, 8)]),
    ("HDP-54", ["2.7.1"], "bug", "erik@ebay.com", True,
     [("erik@ebay.com", 29, 9), ("amy@altiscale.com", 21, 1)]),
    ("HDP-55", ["2.7.0"], "improvement", "wanda@wandisco.com", True,
     [("wanda@wandisco.com", 16, 6)]),
    ("HDP-56", ["2.7.0"], "bug", "freelancer@gmail.com", True,
     [("freelancer@gmail.com", 13, 3), ("alice@hortonworks.com", 27, 7)]),
]

# (key, reporter, [(author, self_authored), ...]) -> 13 of 20 self-authored
SELF_IMPL = [
    ("SI-1", "r1@one.com", [True, True, True, False]),
    ("SI-2", "r2@two.com", [True, True]),
    ("SI-3", "r3@three.com", [True, True, False, False]),
    ("SI-4", "r4@four.com", [True]),
    ("SI-5", "r5@five.com", [False, False]),
    ("SI-6", "r6@six.com", [True, True, True]),
    ("SI-7", "r7@seven.com", [True, False]),
    ("SI-8", "r8@eight.com", [True, False]),
]


def _release_date(fix_versions):
    for release_id, released_at in RELEASES:
        prefix = release_id[1:]
        if any(v.startswith(prefix + ".") or v == prefix for v in fix_versions):
            return parse_timestamp(released_at)
    raise ValueError(f"no release for {fix_versions}")


def build_corpus():
    records = []
    for index, (key, versions, issue_type, reporter, resolved, patches) in enumerate(
        CORPUS
    ):
        released = _release_date(versions)
        created = released - timedelta(days=45) + timedelta(days=index % 11)
        patch_objs = []
        for offset, patch in enumerate(patches):
            author, added, deleted = patch[:3]
            approved = patch[3] if len(patch) > 3 else True
            obj = {
                "author_email": author,
                "added_loc": added,
                "deleted_loc": deleted,
                "submitted_at": (
                    created + timedelta(days=2 + offset, hours=offset)
                ).isoformat().replace("+00:00", "Z"),
            }
            if not approved:
                obj["approved"] = False
            patch_objs.append(obj)
        records.append(
            record_from_obj(
                {
                    "key": key,
                    "type": issue_type,
                    "fix_versions": versions,
                    "created_at": created.isoformat().replace("+00:00", "Z"),
                    "resolved_at": (
                        (created + timedelta(days=20)).isoformat().replace("+00:00", "Z")
                        if resolved
                        else None
                    ),
                    "reporter_email": reporter,
                    "patches": patch_objs,
                }
            )
        )
    return records


def build_self_impl():
    records = []
    base = parse_timestamp("2014-06-01T00:00:00Z")
    for index, (key, reporter, authorship) in enumerate(SELF_IMPL):
        created = base + timedelta(days=index)
        patches = []
        for offset, self_authored in enumerate(authorship):
            author = reporter if self_authored else f"helper{offset}@elsewhere.com"
            patches.append(
                {
                    "author_email": author,
                    "added_loc": 10 + offset,
                    "deleted_loc": offset,
                    "submitted_at": (
                        created + timedelta(days=1 + offset)
                    ).isoformat().replace("+00:00", "Z"),
                }
            )
        records.append(
            record_from_obj(
                {
                    "key": key,
                    "type": "bug",
                    "fix_versions": ["2.6.0"],
                    "created_at": created.isoformat().replace("+00:00", "Z"),
                    "resolved_at": (
                        (created + timedelta(days=15)).isoformat().replace("+00:00", "Z")
                    ),
                    "reporter_email": reporter,
                    "patches": patches,
                }
            )
        )
    return records


def main():
    FIXTURES.mkdir(parents=True, exist_ok=True)
    (FIXTURES / "affiliations.json").write_text(
        json.dumps(AFFILIATIONS, indent=2) + "\n", encoding="utf-8"
    )
    (FIXTURES / "releases.json").write_text(
        json.dumps(
            [{"id": rid, "released_at": at} for rid, at in RELEASES], indent=2
        )
        + "\n",
        encoding="utf-8",
    )
    export_jsonl(build_corpus(), FIXTURES / "corpus.jsonl")
    export_jsonl(build_self_impl(), FIXTURES / "selfimpl.jsonl")
    print(f"fixtures written to {FIXTURES}")


if __name__ == "__main__":
    main()
