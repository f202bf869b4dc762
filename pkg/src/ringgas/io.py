"""Provenance-stamped CSV/JSON output with stable, reproducible bytes.

Every file starts with comment lines carrying the package version, the
canonical configuration JSON, its hash and the master seed, so a result
can always be traced back to the exact invocation.  No timestamps: equal
configurations produce byte-identical files.
"""

from __future__ import annotations

import csv
import hashlib
import io as _io
import json
from pathlib import Path

from . import __version__

__all__ = ["provenance", "write_csv", "write_json", "read_csv", "read_json"]


def _canonical(config: dict) -> str:
    return json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)


def provenance(config: dict, seed=None) -> dict:
    blob = _canonical(config)
    return {
        "version": __version__,
        "config": config,
        "config_sha256": hashlib.sha256(blob.encode()).hexdigest(),
        "seed": seed,
    }


def _header_lines(prov: dict) -> list[str]:
    return [
        f"# ringgas {prov['version']}",
        f"# config: {_canonical(prov['config'])}",
        f"# config_sha256: {prov['config_sha256']}",
        f"# seed: {prov['seed']}",
    ]


def write_csv(path, columns: list[str], rows, config: dict, seed=None) -> Path:
    """CSV with provenance comment header; floats via repr (round-trip exact)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = _io.StringIO()
    for line in _header_lines(provenance(config, seed)):
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    path.write_text(buf.getvalue())
    return path


def write_json(path, payload: dict, config: dict, seed=None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"provenance": provenance(config, seed), **payload}
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n")
    return path


def read_csv(path) -> tuple[list[str], list[list[str]], dict]:
    """Parse a provenance CSV back into (columns, string rows, header metadata)."""
    meta = {}
    rows = []
    columns = None
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                key_val = line[1:].strip().split(":", 1)
                if len(key_val) == 2:
                    meta[key_val[0].strip()] = key_val[1].strip()
                continue
            record = next(csv.reader([line]))
            if columns is None:
                columns = record
            elif record:
                rows.append(record)
    return columns or [], rows, meta


def read_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
