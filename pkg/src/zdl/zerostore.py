"""Append-only persistent store of certified zero records.

One JSONL file; each line is a checksummed segment: the zeros of zeta^(k)
found in a half-open height range [t0, t1) under a specific evaluation
policy fingerprint.  Append-only plus per-line checksums buys cheap crash
safety: a torn final line (interrupted write) is detected and discarded on
load, while corruption anywhere earlier raises CorruptSegment.

Coordinates are serialized as hex mantissa/exponent pairs, so round-trips
are bit-exact at any precision; exports are deterministic byte-for-byte
given identical store content.
"""

from __future__ import annotations

import io
import json
import os
import zlib
from dataclasses import dataclass
from datetime import datetime, timezone
from hashlib import sha256
from typing import Dict, Iterable, List, Optional, Tuple

import mpmath
from mpmath import mpf
from mpmath.libmp import from_man_exp

from . import __version__
from .errors import CorruptSegment, GapsPresent, OverlapConflict, StoreError
from .zeroscan import ZeroRecord

_FMT = "zdl-store-v1"
CSV_HEADER = "k,beta_hex,gamma_hex,multiplicity,error_radius_hex,method"


# ---------------------------------------------------------------------------
# bit-exact real codec

def mpf_to_hex(x: mpf) -> str:
    """Serialize an mpf exactly: sign, hex mantissa, binary exponent."""
    if not mpmath.isfinite(x):
        raise StoreError(f"cannot serialize non-finite value {x}")
    if x == 0:
        return "0x0p+0"
    # the raw tuple carries the sign as a separate bit; to_man_exp would
    # discard it (its mantissa is unsigned)
    sign, man, exp, _ = x._mpf_
    return f"{'-' if sign else ''}0x{int(man):x}p{int(exp):+d}"


def hex_to_mpf(text: str) -> mpf:
    s = text.strip()
    neg = s.startswith("-")
    if neg:
        s = s[1:]
    if not s.startswith("0x") or "p" not in s:
        raise CorruptSegment(f"bad hex float: {text!r}")
    man_s, exp_s = s[2:].split("p", 1)
    man = int(man_s, 16)
    exp = int(exp_s)
    if neg:
        man = -man
    # mpf(tuple) would round to the ambient context; make_mpf keeps the
    # mantissa verbatim, which the checksum depends on
    return mpmath.mp.make_mpf(from_man_exp(man, exp))


def _rec_to_row(rec: ZeroRecord) -> list:
    return [
        rec.k,
        mpf_to_hex(rec.beta),
        mpf_to_hex(rec.gamma),
        rec.multiplicity,
        mpf_to_hex(rec.error_radius),
        rec.method,
    ]


def _row_to_rec(row) -> ZeroRecord:
    if len(row) != 6:
        raise CorruptSegment(f"record row of length {len(row)}")
    return ZeroRecord(
        k=int(row[0]),
        beta=hex_to_mpf(row[1]),
        gamma=hex_to_mpf(row[2]),
        multiplicity=int(row[3]),
        error_radius=hex_to_mpf(row[4]),
        method=str(row[5]),
    )


# ---------------------------------------------------------------------------
# segments

@dataclass(frozen=True)
class StoreSegment:
    k: int
    t0: float
    t1: float
    policy_fingerprint: str
    records: Tuple[ZeroRecord, ...]
    created_at: str
    tool_version: str

    def payload(self) -> dict:
        """Canonical content; excludes created_at/tool_version so that
        content fingerprints do not depend on when or by what a segment
        was produced."""
        return {
            "fmt": _FMT,
            "k": self.k,
            "t0": float(self.t0).hex(),
            "t1": float(self.t1).hex(),
            "fp": self.policy_fingerprint,
            "records": [_rec_to_row(r) for r in sorted(
                self.records, key=lambda r: (float(r.gamma), float(r.beta)))],
        }

    def canonical_json(self) -> str:
        return json.dumps(self.payload(), sort_keys=True, separators=(",", ":"))


def _segment_line(seg: StoreSegment) -> str:
    body = seg.payload()
    body["created_at"] = seg.created_at
    body["tool_version"] = seg.tool_version
    body["crc"] = f"{zlib.crc32(seg.canonical_json().encode()):08x}"
    return json.dumps(body, sort_keys=True, separators=(",", ":"))


def _parse_line(line: str) -> StoreSegment:
    data = json.loads(line)
    if data.get("fmt") != _FMT:
        raise CorruptSegment(f"unknown segment format {data.get('fmt')!r}")
    seg = StoreSegment(
        k=int(data["k"]),
        t0=float.fromhex(data["t0"]),
        t1=float.fromhex(data["t1"]),
        policy_fingerprint=str(data["fp"]),
        records=tuple(_row_to_rec(r) for r in data["records"]),
        created_at=str(data.get("created_at", "")),
        tool_version=str(data.get("tool_version", "")),
    )
    want = data.get("crc")
    got = f"{zlib.crc32(seg.canonical_json().encode()):08x}"
    if want != got:
        raise CorruptSegment(f"checksum mismatch: stored {want}, computed {got}")
    return seg


# ---------------------------------------------------------------------------
# the store

class ZeroStore:
    """Single-file append log of scan segments, indexed by (k, policy)."""

    def __init__(self, path: str):
        self.path = path
        self._segments: List[StoreSegment] = []
        self._load()

    # -- loading and recovery

    def _load(self) -> None:
        self._segments = []
        if not os.path.exists(self.path):
            return
        with open(self.path, "r", encoding="utf-8") as fh:
            raw = fh.read()
        lines = raw.split("\n")
        # a trailing empty string after the final newline is normal
        tail_incomplete = not raw.endswith("\n") and raw != ""
        kept = []
        for i, line in enumerate(lines):
            if line == "":
                continue
            is_last = i == len(lines) - 1 or (i == len(lines) - 2 and lines[-1] == "")
            try:
                kept.append(_parse_line(line))
            except (CorruptSegment, json.JSONDecodeError, KeyError, ValueError) as exc:
                if is_last and (tail_incomplete or i == len(lines) - 1 or lines[-1] == ""):
                    # torn final write from an interrupted run: drop it and
                    # truncate the file to the healthy prefix
                    healthy = "\n".join(l for l in lines[:i] if l != "")
                    with open(self.path, "w", encoding="utf-8") as fh:
                        if healthy:
                            fh.write(healthy + "\n")
                    break
                raise CorruptSegment(f"segment {i} of {self.path}: {exc}") from None
        self._segments = kept

    # -- writing

    def put_segment(self, k: int, t0: float, t1: float, policy_fingerprint: str,
                    records: Iterable[ZeroRecord]) -> StoreSegment:
        """Append a scanned segment; ranges for one (k, policy) must not overlap.

        Re-putting a byte-identical segment is a no-op (idempotent rescans);
        a differing overlap raises OverlapConflict.
        """
        if not (t0 < t1):
            raise StoreError(f"empty segment range [{t0}, {t1})")
        recs = tuple(sorted(records, key=lambda r: (float(r.gamma), float(r.beta))))
        for r in recs:
            if not (t0 <= float(r.gamma) < t1):
                raise StoreError(
                    f"record gamma {float(r.gamma)} outside segment [{t0}, {t1})"
                )
        seg = StoreSegment(
            k=k, t0=float(t0), t1=float(t1),
            policy_fingerprint=policy_fingerprint,
            records=recs,
            created_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
            tool_version=__version__,
        )
        for old in self._segments:
            if old.k != k or old.policy_fingerprint != policy_fingerprint:
                continue
            if old.t1 <= seg.t0 or seg.t1 <= old.t0:
                continue
            if old.canonical_json() == seg.canonical_json():
                return old
            raise OverlapConflict(
                f"[{seg.t0}, {seg.t1}) overlaps stored [{old.t0}, {old.t1}) "
                f"for k={k} with different content"
            )
        line = _segment_line(seg)
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(line + "\n")
            fh.flush()
            os.fsync(fh.fileno())
        self._segments.append(seg)
        return seg

    # -- reading

    def segments(self, k: Optional[int] = None,
                 policy_fingerprint: Optional[str] = None) -> List[StoreSegment]:
        out = self._segments
        if k is not None:
            out = [s for s in out if s.k == k]
        if policy_fingerprint is not None:
            out = [s for s in out if s.policy_fingerprint == policy_fingerprint]
        return sorted(out, key=lambda s: (s.k, s.t0, s.t1))

    def get_range(self, k: int, t0: float, t1: float, policy_fingerprint: str
                  ) -> Tuple[List[ZeroRecord], List[Tuple[float, float]]]:
        """Records with gamma in [t0, t1) plus the uncovered sub-ranges."""
        if not (t0 < t1):
            raise StoreError(f"empty query range [{t0}, {t1})")
        segs = self.segments(k, policy_fingerprint)
        records: List[ZeroRecord] = []
        gaps: List[Tuple[float, float]] = []
        cursor = float(t0)
        for seg in segs:
            if seg.t1 <= cursor or seg.t0 >= t1:
                continue
            if seg.t0 > cursor:
                gaps.append((cursor, min(seg.t0, t1)))
            records.extend(r for r in seg.records if t0 <= float(r.gamma) < t1)
            cursor = max(cursor, seg.t1)
            if cursor >= t1:
                break
        if cursor < t1:
            gaps.append((cursor, float(t1)))
        records.sort(key=lambda r: (float(r.gamma), float(r.beta)))
        return records, gaps

    def content_fingerprint(self, k: Optional[int] = None,
                            policy_fingerprint: Optional[str] = None) -> str:
        """Digest of canonical segment payloads (creation metadata excluded)."""
        h = sha256()
        for seg in self.segments(k, policy_fingerprint):
            h.update(seg.canonical_json().encode())
            h.update(b"\n")
        return h.hexdigest()[:16]

    # -- export / import

    def export_range(self, k: int, t0: float, t1: float, policy_fingerprint: str,
                     fmt: str = "csv") -> bytes:
        """Deterministic serialization of a fully covered range.

        Raises GapsPresent when the stored segments do not cover [t0, t1):
        silently exporting a partial range would corrupt downstream counts.
        """
        records, gaps = self.get_range(k, t0, t1, policy_fingerprint)
        if gaps:
            raise GapsPresent(f"range [{t0}, {t1}) has gaps {gaps}")
        if fmt == "csv":
            buf = io.StringIO()
            buf.write(CSV_HEADER + "\n")
            for r in records:
                row = _rec_to_row(r)
                buf.write(",".join(str(c) for c in row) + "\n")
            return buf.getvalue().encode()
        if fmt == "jsonl":
            buf = io.StringIO()
            for r in records:
                row = _rec_to_row(r)
                buf.write(json.dumps({
                    "k": row[0], "beta_hex": row[1], "gamma_hex": row[2],
                    "multiplicity": row[3], "error_radius_hex": row[4],
                    "method": row[5],
                }, sort_keys=True, separators=(",", ":")) + "\n")
            return buf.getvalue().encode()
        raise StoreError(f"unknown export format {fmt!r}")


def import_records(blob: bytes, fmt: str = "csv") -> List[ZeroRecord]:
    """Parse an export back into records (bit-exact round trip)."""
    text = blob.decode()
    out: List[ZeroRecord] = []
    if fmt == "csv":
        lines = [l for l in text.split("\n") if l and not l.startswith("#")]
        if not lines or lines[0] != CSV_HEADER:
            raise CorruptSegment("missing or wrong CSV header")
        for line in lines[1:]:
            out.append(_row_to_rec(line.split(",")))
        return out
    if fmt == "jsonl":
        for line in (l for l in text.split("\n") if l and not l.startswith("#")):
            d = json.loads(line)
            out.append(_row_to_rec([
                d["k"], d["beta_hex"], d["gamma_hex"],
                d["multiplicity"], d["error_radius_hex"], d["method"],
            ]))
        return out
    raise StoreError(f"unknown import format {fmt!r}")
