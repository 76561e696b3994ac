"""Deterministic JSON/CSV artifact writers shared by experiments and the CLI.

Reports carry no timestamps and are dumped with sorted keys, so identical
inputs produce byte-identical files; volatile metadata lives in a separate
sidecar written by the CLI.
"""

from __future__ import annotations

import csv
import hashlib
import json
from typing import Iterable, Sequence

__all__ = ["dump_json", "dump_csv", "config_hash"]


def dump_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def dump_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(c) if isinstance(c, float) else c for c in row])


def config_hash(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()
