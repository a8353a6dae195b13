#!/usr/bin/env python3
"""Generate a synthetic taxonomy and write it as an OFN document.

    python3 scripts/make_synthetic.py --classes 11000 --verticals 24 \
        --max-depth 12 --out synthetic.ofn

Useful for load experiments and demos; the defaults reproduce the shape
targets the acceptance suite checks (11,000 classes, 24 verticals,
depth 12).
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from taxonomist import vocab
from taxonomist.lint import stats
from taxonomist.model import Taxonomy
from taxonomist.ofn import serialize_taxonomy
from taxonomist.synthetic import shaped_taxonomy_changes


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--classes", type=int, default=11_000)
    parser.add_argument("--verticals", type=int, default=24)
    parser.add_argument("--max-depth", type=int, default=12)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--out", type=Path, default=Path("synthetic.ofn"))
    args = parser.parse_args()

    started = time.perf_counter()
    changes = shaped_taxonomy_changes(seed=args.seed, classes=args.classes,
                                  verticals=args.verticals,
                                  max_depth=args.max_depth)
    tax = Taxonomy(root=vocab.DEFAULT_ROOT_IRI)
    tax.apply_all(changes)
    text = serialize_taxonomy(tax, vocab.DEFAULT_NAMESPACE + "synthetic")
    args.out.write_text(text, encoding="utf-8")

    s = stats(tax)
    print(f"wrote {args.out} in {time.perf_counter() - started:.1f}s")
    print(f"classes={s.class_count} verticals={s.vertical_count} "
          f"maxDepth={s.max_depth} axioms={len(tax.axioms)}")


if __name__ == "__main__":
    main()
