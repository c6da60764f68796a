#!/usr/bin/env python3
"""Regenerate the .ccss sources bundled under models/."""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from ccss import protocols
from ccss.syntax import spec_str

CATALOG = {
    "example1.ccss": lambda: protocols.example1().source,
    "example2.ccss": lambda: protocols.example2().source,
    "peterson2-ccs.ccss": lambda: protocols.peterson2("ccs").source,
    "peterson2-ccss.ccss": lambda: protocols.peterson2("ccss").source,
    "filter2-ccss.ccss": lambda: protocols.filter_lock(2, "ccss").source,
    "filter3-ccss.ccss": lambda: protocols.filter_lock(3, "ccss").source,
    "bakery2-ccss.ccss": lambda: protocols.bakery(2, 4, "ccss").source,
    "dekker-variable.ccss": lambda: spec_str(protocols.dekker_variable()),
}


def main():
    out_dir = pathlib.Path(__file__).resolve().parents[1] / "models"
    out_dir.mkdir(exist_ok=True)
    for filename, make in CATALOG.items():
        path = out_dir / filename
        path.write_text(make(), encoding="utf-8")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
