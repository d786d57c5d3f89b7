"""Ingestion of PEER AT2 accelerograms and line-oriented catalog manifests.

Records are parsed in g and converted once to m/s^2 when a catalog is
assembled, so every downstream computation works in SI units.

Manifest format (documented here and in the README): entries are blocks of
``key = value`` lines separated by one or more blank lines. Lines starting
with ``#`` are comments. Required keys per entry: ``id``, ``path`` (AT2 file,
relative to the manifest location). Optional keys carry the fitted model
parameters: ``log_ai``, ``d595``, ``t_mid``, ``omega_mid``, ``omega_rate``,
``zeta_f``, ``t_total`` and an externally supplied ``fc_hz``.
"""

import logging
import os
import re
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (CountMismatch, DataError, MalformedHeader, ManifestError,
                     NonFiniteSample)

log = logging.getLogger(__name__)

G_TO_MS2 = 9.80665

# "NPTS=   2000, DT=   .0100  SEC" style
_RE_NPTS_EQ = re.compile(r"NPTS\s*=\s*(\d+)\s*,?\s*DT\s*=\s*([0-9.Ee+-]+)", re.IGNORECASE)
# "  2000   0.0100  NPTS, DT" style
_RE_NPTS_TRAIL = re.compile(r"^\s*(\d+)\s+([0-9.Ee+-]+)\s+NPTS\s*,?\s*DT", re.IGNORECASE)

_PARAM_KEYS = ("log_ai", "d595", "t_mid", "omega_mid", "omega_rate",
               "zeta_f", "t_total", "fc_hz")


@dataclass(frozen=True)
class AccelerogramRecord:
    """Uniformly sampled ground-acceleration series plus metadata.

    ``accel`` is in g as parsed from file, or in m/s^2 after catalog
    conversion; ``unit`` tracks which.
    """

    id: str
    dt: float
    accel: np.ndarray
    unit: str = "g"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        accel = np.asarray(self.accel, dtype=float)
        object.__setattr__(self, "accel", accel)
        if self.dt <= 0:
            raise ValueError(f"record {self.id}: dt must be > 0, got {self.dt}")
        if accel.size < 2:
            raise ValueError(f"record {self.id}: need at least 2 samples")
        if not np.all(np.isfinite(accel)):
            raise NonFiniteSample(f"record {self.id}: non-finite acceleration values")

    @property
    def npts(self):
        return self.accel.size

    @property
    def duration(self):
        return (self.accel.size - 1) * self.dt

    def to_si(self):
        """Return a copy with acceleration in m/s^2."""
        if self.unit == "m/s2":
            return self
        return replace(self, accel=self.accel * G_TO_MS2, unit="m/s2")


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    path: str
    params: dict = field(default_factory=dict)  # subset of _PARAM_KEYS


@dataclass(frozen=True)
class Catalog:
    """Loaded records (SI units) and their manifest-supplied parameters."""

    records: tuple
    entries: tuple

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def record(self, rec_id):
        for r in self.records:
            if r.id == rec_id:
                return r
        raise KeyError(rec_id)

    def entry(self, rec_id):
        for e in self.entries:
            if e.id == rec_id:
                return e
        raise KeyError(rec_id)


def parse_at2(raw_text):
    """Parse the text of a PEER AT2 file into an AccelerogramRecord (in g).

    Accepts both common header spellings for the 4th line:
    ``NPTS=  n, DT= x SEC`` and ``n  x  NPTS, DT``.
    """
    lines = raw_text.splitlines()
    if len(lines) < 5:
        raise MalformedHeader("AT2 file has fewer than 5 lines")
    header = lines[3]
    m = _RE_NPTS_EQ.search(header) or _RE_NPTS_TRAIL.match(header)
    if m is None:
        raise MalformedHeader(f"cannot locate NPTS/DT in header line: {header!r}")
    npts = int(m.group(1))
    dt = float(m.group(2))

    values = []
    for line in lines[4:]:
        for tok in line.split():
            values.append(float(tok))
    if len(values) != npts:
        raise CountMismatch(f"header declares NPTS={npts} but body has {len(values)} values")
    accel = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(accel)):
        raise NonFiniteSample("AT2 body contains non-finite values")

    title = lines[0].strip()
    rec_id = title if title else "record"
    return AccelerogramRecord(id=rec_id, dt=dt, accel=accel, unit="g",
                              meta={"header": lines[:4]})


def write_at2(record, title=None):
    """Serialize a record (in g) to AT2 text, 7 significant digits, 5/line."""
    rec = record
    if rec.unit != "g":
        rec = replace(rec, accel=rec.accel / G_TO_MS2, unit="g")
    out = [
        title if title is not None else rec.id,
        "stochgm export",
        "ACCELERATION TIME SERIES IN UNITS OF G",
        f"NPTS= {rec.npts:6d}, DT= {rec.dt:10.5f}  SEC",
    ]
    vals = [f"{v:15.7e}" for v in rec.accel]
    for i in range(0, len(vals), 5):
        out.append("".join(vals[i:i + 5]))
    return "\n".join(out) + "\n"


def parse_manifest(text):
    """Parse manifest text into a list of ManifestEntry (no file access)."""
    entries = []
    block = {}

    def flush():
        if not block:
            return
        if "id" not in block or "path" not in block:
            raise ManifestError(f"manifest entry missing id/path: {block}")
        params = {}
        for k in _PARAM_KEYS:
            if k in block:
                try:
                    params[k] = float(block[k])
                except ValueError as exc:
                    raise ManifestError(
                        f"entry {block['id']}: bad value for {k}: {block[k]!r}") from exc
        entries.append(ManifestEntry(id=block["id"], path=block["path"], params=params))
        block.clear()

    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            flush()
            continue
        if line.startswith("#"):
            continue
        if "=" not in line:
            raise ManifestError(f"manifest line is not 'key = value': {line!r}")
        key, _, val = line.partition("=")
        block[key.strip()] = val.strip()
    flush()

    ids = [e.id for e in entries]
    if len(set(ids)) != len(ids):
        dup = sorted({i for i in ids if ids.count(i) > 1})
        raise ManifestError(f"duplicate entry ids in manifest: {dup}")
    return entries


def load_catalog(manifest_path):
    """Load a manifest and all referenced AT2 records, converted to SI."""
    with open(manifest_path) as fh:
        entries = parse_manifest(fh.read())
    if not entries:
        log.warning("manifest %s contains no entries", manifest_path)
        return Catalog(records=(), entries=())

    base = os.path.dirname(os.path.abspath(manifest_path))
    records = []
    for entry in entries:
        path = os.path.join(base, entry.path)
        if not os.path.exists(path):
            raise ManifestError(f"entry {entry.id}: file not found: {path}")
        try:
            with open(path) as fh:
                rec = parse_at2(fh.read())
        except DataError as exc:
            raise type(exc)(f"entry {entry.id}: {exc}") from exc
        rec = replace(rec, id=entry.id)
        records.append(rec.to_si())
    return Catalog(records=tuple(records), entries=tuple(entries))
