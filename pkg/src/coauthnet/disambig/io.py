from __future__ import annotations

import csv
import json

from .stages import CanonicalAuthor


def write_mapping(mapping: dict[str, CanonicalAuthor], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["raw_name", "canonical_id", "representative"])
        for raw in sorted(mapping):
            prof = mapping[raw]
            w.writerow([raw, prof.canonical_id, prof.representative])


def read_mapping(path) -> dict[str, CanonicalAuthor]:
    """Rebuild raw -> CanonicalAuthor from the mapping table (paper ids are not stored)."""
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            rows.append((row["raw_name"], row["canonical_id"], row["representative"]))
    variants: dict[str, set] = {}
    reps = {}
    for raw, cid, rep in rows:
        variants.setdefault(cid, set()).add(raw)
        reps[cid] = rep
    profiles = {cid: CanonicalAuthor(cid, reps[cid], frozenset(v)) for cid, v in variants.items()}
    return {raw: profiles[cid] for raw, cid, _ in rows}


def write_audit(audit, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for entry in audit:
            fh.write(json.dumps(entry, sort_keys=True) + "\n")
