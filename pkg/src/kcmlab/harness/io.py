"""Versioned CSV tables: one '# kcmlab <schema> v<N>' line, a header, rows, then an optional manifest."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

from ..samples import TauSample

TAU_SCHEMA = "tau-samples"
TAU_COLUMNS = ("family", "q", "region", "seed", "tau", "truncated", "ring_count")
VERSION = 1
MANIFEST_PREFIX = "# manifest "


@dataclass
class Table:
    schema: str
    version: int
    columns: tuple
    rows: list  # lists of strings
    manifest: dict | None = None

    def column(self, name: str) -> list:
        j = self.columns.index(name)
        return [r[j] for r in self.rows]


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def table_body(schema: str, columns, rows) -> str:
    buf = io.StringIO()
    buf.write(f"# kcmlab {schema} v{VERSION}\n")
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(columns)
    for r in rows:
        wr.writerow([fmt(v) for v in r])
    return buf.getvalue()


def manifest_line(manifest: dict) -> str:
    return MANIFEST_PREFIX + json.dumps(manifest, sort_keys=True) + "\n"


def parse_table(text: str) -> Table:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# kcmlab "):
        raise ValueError("missing '# kcmlab <schema> v<N>' header line")
    parts = lines[0].split()
    if len(parts) != 4 or not parts[3].startswith("v"):
        raise ValueError(f"malformed header line {lines[0]!r}")
    schema, version = parts[2], int(parts[3][1:])
    if version > VERSION:
        raise ValueError(f"{schema} v{version} is newer than this reader (v{VERSION})")
    manifest = None
    body = []
    for line in lines[1:]:
        if line.startswith(MANIFEST_PREFIX):
            manifest = json.loads(line[len(MANIFEST_PREFIX):])
        elif not line.startswith("#"):
            body.append(line)
    rows = list(csv.reader(body))
    if not rows:
        raise ValueError("missing column header")
    return Table(schema, version, tuple(rows[0]), rows[1:], manifest)


def strip_manifest(text: str) -> str:
    return "".join(l for l in text.splitlines(keepends=True) if not l.startswith(MANIFEST_PREFIX))


def tau_rows(samples) -> list:
    return [(s.family, float(s.q), s.region, s.seed, s.tau, s.truncated, s.ring_count) for s in samples]


def write_tau_samples(samples, manifest: dict | None = None) -> str:
    text = table_body(TAU_SCHEMA, TAU_COLUMNS, tau_rows(samples))
    return text + (manifest_line(manifest) if manifest is not None else "")


def read_tau_samples(text: str) -> list[TauSample]:
    t = parse_table(text)
    if t.schema != TAU_SCHEMA:
        raise ValueError(f"expected {TAU_SCHEMA}, got {t.schema}")
    missing = set(TAU_COLUMNS) - set(t.columns)
    if missing:
        raise ValueError(f"missing columns {sorted(missing)}")
    ix = {c: t.columns.index(c) for c in TAU_COLUMNS}
    out = []
    for r in t.rows:
        trunc = r[ix["truncated"]] == "1"
        tau = r[ix["tau"]]
        out.append(TauSample(
            tau=None if trunc or tau == "" else float(tau),
            truncated=trunc,
            seed=int(r[ix["seed"]]),
            q=float(r[ix["q"]]),
            region=r[ix["region"]],
            family=r[ix["family"]],
            ring_count=int(r[ix["ring_count"]]),
        ))
    return out
