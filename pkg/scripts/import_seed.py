#!/usr/bin/env python3
"""Import a legacy three-level seed spreadsheet into a running service.

    python3 scripts/import_seed.py seed.csv --url http://127.0.0.1:8000 \
        --project demo --user curator --password pw

Compiles the CSV (header: level1,level2,level3) into a change list and
commits it through the HTTP API as one seed-import revision. Run it again
with an extended sheet: rows already present are skipped.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

import httpx

from taxonomist import vocab
from taxonomist.changelog import change_to_json
from taxonomist.model import Taxonomy
from taxonomist.ofn import SeedSheet, import_seed, parse_ofn


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csv", type=Path)
    parser.add_argument("--url", default="http://127.0.0.1:8000")
    parser.add_argument("--project", required=True)
    parser.add_argument("--user", required=True)
    parser.add_argument("--password", required=True)
    parser.add_argument("--message", default="seed import")
    args = parser.parse_args()

    sheet = SeedSheet.from_csv(args.csv.read_text(encoding="utf-8"))

    with httpx.Client(base_url=args.url, timeout=60) as client:
        token = client.post("/login", json={
            "username": args.user, "password": args.password,
        }).raise_for_status().json()["token"]
        auth = {"Authorization": f"Bearer {token}"}

        settings = client.get(f"/p/{args.project}/settings",
                              headers=auth).raise_for_status().json()
        ofn_text = client.get(f"/p/{args.project}/taxonomy",
                              headers=auth).raise_for_status().text
        existing = Taxonomy.from_axioms(parse_ofn(ofn_text).axioms,
                                        root=settings.get("rootIri",
                                                          vocab.DEFAULT_ROOT_IRI))

        changes = import_seed(sheet, existing.root,
                              namespace=settings.get("namespace",
                                                     vocab.DEFAULT_NAMESPACE),
                              default_lang=settings.get("default", "en"),
                              existing=existing)
        if not changes:
            print("nothing new to import")
            return
        response = client.post(f"/p/{args.project}/commit", headers=auth, json={
            "changes": [change_to_json(c) for c in changes],
            "message": args.message,
            "provenance": "seedImport",
        }).raise_for_status().json()
        print(f"committed revision {response['revision']['rev']} "
              f"with {response['applied']} changes")


if __name__ == "__main__":
    main()
