#!/usr/bin/env python3
"""Offline relational export of an OFN taxonomy file.

    python3 scripts/export_bundle.py taxonomy.ofn --out bundle.zip \
        [--include-no-ads] [--include-deprecated]

Writes the interests/synonyms/closure tables plus manifest as a zip; the
surrogate-id map is persisted next to the output so ids stay stable
across runs.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from taxonomist import vocab
from taxonomist.export import IdMap, export, row_counts, zip_bundle
from taxonomist.model import Taxonomy
from taxonomist.ofn import parse_ofn


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("ofn", type=Path)
    parser.add_argument("--out", type=Path, default=Path("bundle.zip"))
    parser.add_argument("--root", default=vocab.DEFAULT_ROOT_IRI)
    parser.add_argument("--include-no-ads", action="store_true")
    parser.add_argument("--include-deprecated", action="store_true")
    args = parser.parse_args()

    document = parse_ofn(args.ofn.read_text(encoding="utf-8"))
    tax = Taxonomy.from_axioms(document.axioms, root=args.root)
    idmap = IdMap(args.out.with_suffix(".idmap.json"))
    bundle = export(tax, 0, idmap,
                    include_no_ads=args.include_no_ads,
                    include_deprecated=args.include_deprecated)
    args.out.write_bytes(zip_bundle(bundle))
    print(f"wrote {args.out}: {row_counts(bundle)}")


if __name__ == "__main__":
    main()
