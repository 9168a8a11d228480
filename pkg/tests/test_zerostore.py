"""Persistence-layer tests: codecs, log recovery, range algebra, exports.

Hex serialization must survive any ambient mpmath context: records are
produced at 100+ working bits but reloaded by processes running at the
53-bit default, and the checksums notice every lost bit.
"""

from __future__ import annotations

import os
import tempfile

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mpf, workprec

from zdl.errors import (
    CorruptSegment,
    GapsPresent,
    OverlapConflict,
    StoreError,
)
from zdl.zeroscan import ZeroRecord
from zdl.zerostore import (
    CSV_HEADER,
    ZeroStore,
    hex_to_mpf,
    import_records,
    mpf_to_hex,
)

FP = "f" * 16


def record(gamma: float, k: int = 0, beta: float = 0.5, mult: int = 1) -> ZeroRecord:
    return ZeroRecord(
        k=k,
        beta=mpf(beta),
        gamma=mpf(gamma),
        multiplicity=mult,
        error_radius=mpf("1e-10"),
        method="newton",
    )


class TestHexCodec:
    @settings(max_examples=200, deadline=None)
    @given(
        man=st.integers(min_value=-(2**300), max_value=2**300),
        exp=st.integers(min_value=-400, max_value=400),
    )
    def test_round_trip_is_exact_at_ambient_precision(self, man, exp):
        # build a wide-mantissa value, then decode it under the default
        # 53-bit context: not one bit may move
        with workprec(320):
            x = mpf(man) * mpf(2) ** exp
        text = mpf_to_hex(x)
        y = hex_to_mpf(text)
        assert y._mpf_ == x._mpf_

    @settings(max_examples=100, deadline=None)
    @given(v=st.floats(allow_nan=False, allow_infinity=False, width=64))
    def test_floats_round_trip(self, v):
        x = mpf(v)
        assert hex_to_mpf(mpf_to_hex(x))._mpf_ == x._mpf_

    def test_zero_and_signs(self):
        for v in (mpf(0), mpf(-1) / 3, mpf("1e300"), mpf("-1e-300")):
            assert hex_to_mpf(mpf_to_hex(v))._mpf_ == v._mpf_


class TestPutGet:
    def test_put_then_get(self, tmp_path):
        store = ZeroStore(str(tmp_path / "s.jsonl"))
        store.put_segment(0, 0.0, 20.0, FP, [record(14.13)])
        recs, gaps = store.get_range(0, 0.0, 20.0, FP)
        assert len(recs) == 1 and gaps == []
        assert float(recs[0].gamma) == 14.13

    def test_gamma_outside_segment_rejected(self, tmp_path):
        store = ZeroStore(str(tmp_path / "s.jsonl"))
        with pytest.raises(StoreError):
            store.put_segment(0, 0.0, 10.0, FP, [record(14.13)])
        with pytest.raises(StoreError):
            store.put_segment(0, 10.0, 10.0, FP, [])

    def test_identical_re_put_is_idempotent(self, tmp_path):
        store = ZeroStore(str(tmp_path / "s.jsonl"))
        store.put_segment(0, 0.0, 20.0, FP, [record(14.13)])
        store.put_segment(0, 0.0, 20.0, FP, [record(14.13)])
        assert len(store.segments()) == 1

    def test_conflicting_overlap_raises(self, tmp_path):
        store = ZeroStore(str(tmp_path / "s.jsonl"))
        store.put_segment(0, 0.0, 20.0, FP, [record(14.13)])
        with pytest.raises(OverlapConflict):
            store.put_segment(0, 15.0, 30.0, FP, [record(21.02)])
        # same range, different policy: independent shelf, no conflict
        store.put_segment(0, 15.0, 30.0, "0" * 16, [record(21.02)])

    def test_ranges_partition_by_order_and_policy(self, tmp_path):
        store = ZeroStore(str(tmp_path / "s.jsonl"))
        store.put_segment(0, 0.0, 20.0, FP, [record(14.13)])
        store.put_segment(1, 0.0, 20.0, FP, [])
        recs0, _ = store.get_range(0, 0.0, 20.0, FP)
        recs1, _ = store.get_range(1, 0.0, 20.0, FP)
        assert len(recs0) == 1 and recs1 == []


class TestGapAlgebra:
    @settings(max_examples=100, deadline=None)
    @given(
        bounds=st.lists(
            st.integers(min_value=0, max_value=40), min_size=2, max_size=8
        ),
        q0=st.integers(min_value=0, max_value=39),
        span=st.integers(min_value=1, max_value=40),
    )
    def test_gaps_and_coverage_tile_the_query(self, bounds, q0, span):
        # segments from consecutive pairs of sorted distinct bounds, with
        # every second pair left as a hole; a fresh directory per example
        # (function-scoped fixtures do not reset between hypothesis draws)
        edges = sorted(set(bounds))
        with tempfile.TemporaryDirectory() as tmp:
            store = ZeroStore(os.path.join(tmp, "g.jsonl"))
            covered = []
            for i in range(0, len(edges) - 1, 2):
                store.put_segment(0, float(edges[i]), float(edges[i + 1]), FP, [])
                covered.append((float(edges[i]), float(edges[i + 1])))
            q1 = q0 + span
            _, gaps = store.get_range(0, float(q0), float(q1), FP)
        # gaps must be disjoint, ordered, inside the query, and their
        # complement within the query must be covered by segments
        cursor = float(q0)
        for g0, g1 in gaps:
            assert q0 <= g0 < g1 <= q1
            assert g0 >= cursor
            for x in (g0 + (g1 - g0) / 3, g1 - (g1 - g0) / 3):
                assert not any(c0 <= x < c1 for c0, c1 in covered)
            cursor = g1
        total_gap = sum(g1 - g0 for g0, g1 in gaps)
        total_cover = sum(
            max(0.0, min(c1, float(q1)) - max(c0, float(q0))) for c0, c1 in covered
        )
        assert abs((q1 - q0) - total_gap - total_cover) < 1e-12


class TestRecovery:
    def test_torn_tail_is_dropped_and_truncated(self, tmp_path):
        path = str(tmp_path / "s.jsonl")
        store = ZeroStore(path)
        store.put_segment(0, 0.0, 20.0, FP, [record(14.13)])
        store.put_segment(0, 20.0, 30.0, FP, [record(21.02)])
        with open(path, "a", encoding="utf-8") as fh:
            fh.write('{"fmt":"zdl-segment-v1","k":0,"t0":"0x1.e')  # torn write
        recovered = ZeroStore(path)
        assert len(recovered.segments()) == 2
        with open(path, encoding="utf-8") as fh:
            content = fh.read()
        assert content.endswith("\n") and len(content.split("\n")) == 3
        # the log accepts appends again after recovery
        recovered.put_segment(0, 30.0, 40.0, FP, [])
        assert len(ZeroStore(path).segments()) == 3

    def test_mid_file_corruption_is_fatal(self, tmp_path):
        path = str(tmp_path / "s.jsonl")
        store = ZeroStore(path)
        store.put_segment(0, 0.0, 20.0, FP, [record(14.13)])
        store.put_segment(0, 20.0, 30.0, FP, [record(21.02)])
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().split("\n")
        lines[0] = lines[0].replace("newton", "nEwton")  # flip a byte mid-file
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines))
        with pytest.raises(CorruptSegment):
            ZeroStore(path)

    def test_wide_mantissa_survives_reload_under_default_context(self, tmp_path):
        path = str(tmp_path / "s.jsonl")
        with workprec(240):
            gamma = mpf("21.5") + mpf(2) ** -200  # needs ~206 mantissa bits
            rec = ZeroRecord(0, mpf(1) / 2, gamma, 1, mpf("1e-10"), "newton")
        store = ZeroStore(path)
        store.put_segment(0, 21.0, 22.0, FP, [rec])
        reloaded = ZeroStore(path)  # parses under the ambient 53-bit context
        assert reloaded.segments()[0].records[0].gamma._mpf_ == gamma._mpf_


class TestExportImport:
    def test_csv_round_trip_is_bit_exact(self, tmp_path):
        store = ZeroStore(str(tmp_path / "s.jsonl"))
        with workprec(200):
            g = mpf("14.134725141734693790457251983562") + mpf(2) ** -150
        rec = ZeroRecord(0, mpf(1) / 2, g, 1, mpf("1e-10"), "newton")
        store.put_segment(0, 0.0, 20.0, FP, [rec])
        blob = store.export_range(0, 0.0, 20.0, FP, fmt="csv")
        assert blob.decode().splitlines()[0] == CSV_HEADER
        back = import_records(blob, fmt="csv")
        assert len(back) == 1
        assert back[0].gamma._mpf_ == g._mpf_
        assert back[0].beta._mpf_ == rec.beta._mpf_

    def test_jsonl_round_trip(self, tmp_path):
        store = ZeroStore(str(tmp_path / "s.jsonl"))
        store.put_segment(1, 0.0, 30.0, FP, [record(23.29, k=1, beta=2.46)])
        blob = store.export_range(1, 0.0, 30.0, FP, fmt="jsonl")
        back = import_records(blob, fmt="jsonl")
        assert len(back) == 1 and back[0].k == 1
        assert float(back[0].beta) == 2.46

    def test_export_is_deterministic(self, tmp_path):
        a = ZeroStore(str(tmp_path / "a.jsonl"))
        b = ZeroStore(str(tmp_path / "b.jsonl"))
        for store in (a, b):
            store.put_segment(0, 0.0, 15.0, FP, [record(14.13)])
            store.put_segment(0, 15.0, 25.0, FP, [record(21.02)])
        assert a.export_range(0, 0.0, 25.0, FP) == b.export_range(0, 0.0, 25.0, FP)

    def test_gaps_block_export(self, tmp_path):
        store = ZeroStore(str(tmp_path / "s.jsonl"))
        store.put_segment(0, 0.0, 10.0, FP, [])
        store.put_segment(0, 20.0, 30.0, FP, [record(21.02)])
        with pytest.raises(GapsPresent):
            store.export_range(0, 0.0, 30.0, FP)

    def test_import_tolerates_comment_headers(self):
        blob = ("# tool: zdl 0.1.0\n# run: {}\n" + CSV_HEADER + "\n").encode()
        assert import_records(blob, fmt="csv") == []
        with pytest.raises(CorruptSegment):
            import_records(b"not,a,header\n", fmt="csv")

    def test_unknown_format_rejected(self, tmp_path):
        store = ZeroStore(str(tmp_path / "s.jsonl"))
        store.put_segment(0, 0.0, 10.0, FP, [])
        with pytest.raises(StoreError):
            store.export_range(0, 0.0, 10.0, FP, fmt="parquet")
        with pytest.raises(StoreError):
            import_records(b"", fmt="parquet")


class TestFingerprint:
    def test_content_fingerprint_ignores_creation_metadata(self, tmp_path):
        a = ZeroStore(str(tmp_path / "a.jsonl"))
        a.put_segment(0, 0.0, 20.0, FP, [record(14.13)])
        b = ZeroStore(str(tmp_path / "b.jsonl"))
        b.put_segment(0, 0.0, 20.0, FP, [record(14.13)])
        assert a.content_fingerprint() == b.content_fingerprint()

    def test_content_fingerprint_sees_records(self, tmp_path):
        a = ZeroStore(str(tmp_path / "a.jsonl"))
        a.put_segment(0, 0.0, 20.0, FP, [record(14.13)])
        b = ZeroStore(str(tmp_path / "b.jsonl"))
        b.put_segment(0, 0.0, 20.0, FP, [])
        assert a.content_fingerprint() != b.content_fingerprint()
