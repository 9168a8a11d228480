"""Command-line surface: parsing, exit codes, report format, determinism."""

from __future__ import annotations

import argparse
import filecmp

import pytest

from zdl.cli import COUNT_COLUMNS, _grid, _int_grid, main
from zdl.zerostore import CSV_HEADER, import_records


@pytest.fixture(autouse=True)
def isolated_config(monkeypatch):
    monkeypatch.delenv("ZDL_CONFIG", raising=False)


def read(path) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


class TestGridParsing:
    def test_single_value(self):
        assert _grid("3.5") == [3.5]

    def test_three_fields_exclusive_stop(self):
        assert _grid("1:2:0.5") == [1.0, 1.5]
        assert _grid("10:30:10") == [10.0, 20.0]
        assert _grid("1:2:0.25") == [1.0, 1.25, 1.5, 1.75]

    def test_rejections(self):
        for bad in ("1:2", "2:1:0.5", "1:2:0", "1:2:-1", "a", "1:b:2", ""):
            with pytest.raises(argparse.ArgumentTypeError):
                _grid(bad)

    def test_int_grid(self):
        assert _int_grid("0:4:1") == [0, 1, 2, 3]
        assert _int_grid("2") == [2]
        with pytest.raises(argparse.ArgumentTypeError):
            _int_grid("0:2:0.5")


class TestExitCodes:
    def test_usage_error_is_two(self, capsys):
        assert main(["count", "--k", "0"]) == 2  # --T missing
        assert main(["definitely-not-a-command"]) == 2
        capsys.readouterr()

    def test_bad_config_file_is_two(self, tmp_path, monkeypatch, capsys):
        cfg = tmp_path / "bad.toml"
        cfg.write_text("scan = nope\n")
        monkeypatch.setenv("ZDL_CONFIG", str(cfg))
        store = str(tmp_path / "s.jsonl")
        assert main(["--store", store, "scan", "--k", "0", "--t-max", "15"]) == 2
        assert "configuration error" in capsys.readouterr().err

    def test_unknown_config_key_is_two(self, tmp_path, monkeypatch, capsys):
        cfg = tmp_path / "bad.toml"
        cfg.write_text("[eval]\nk_mx = 3\n")
        monkeypatch.setenv("ZDL_CONFIG", str(cfg))
        store = str(tmp_path / "s.jsonl")
        assert main(["--store", store, "scan", "--k", "0", "--t-max", "15"]) == 2
        capsys.readouterr()

    def test_export_with_gaps_is_three(self, tmp_path, capsys):
        store = str(tmp_path / "empty.jsonl")
        rc = main(["--store", store, "export", "--k", "0", "--t-max", "20"])
        assert rc == 3
        assert "GapsPresent" in capsys.readouterr().err

    def test_domain_error_is_two(self, tmp_path, capsys):
        store = str(tmp_path / "s.jsonl")
        rc = main(["--store", store, "scan", "--k", "0", "--t-max", "-5"])
        assert rc == 2
        capsys.readouterr()


class TestScanExportRoundTrip:
    def test_scan_report_and_determinism(self, tmp_path):
        store = str(tmp_path / "zeros.jsonl")
        out1, out2 = str(tmp_path / "r1"), str(tmp_path / "r2")
        assert main(["--store", store, "--out", out1,
                     "scan", "--k", "0", "--t-max", "15"]) == 0
        text = read(tmp_path / "r1" / "scan_k0.csv")
        headers = [l for l in text.splitlines() if l.startswith("# ")]
        assert [h.split(" ")[1].rstrip(":") for h in headers] == [
            "tool", "config", "policy", "run", "store"]
        body = [l for l in text.splitlines() if not l.startswith("#")]
        assert body[0] == CSV_HEADER
        assert len(body) == 2  # exactly one zero below t = 15
        recs = import_records(text.encode(), fmt="csv")
        assert len(recs) == 1 and recs[0].k == 0
        assert abs(float(recs[0].gamma) - 14.134725) < 1e-5

        # second run re-reads the store and must emit identical bytes
        assert main(["--store", store, "--out", out2,
                     "scan", "--k", "0", "--t-max", "15"]) == 0
        assert filecmp.cmp(tmp_path / "r1" / "scan_k0.csv",
                           tmp_path / "r2" / "scan_k0.csv", shallow=False)

    def test_export_formats(self, tmp_path):
        store = str(tmp_path / "zeros.jsonl")
        out = str(tmp_path / "r")
        assert main(["--store", store, "--out", out,
                     "scan", "--k", "0", "--t-max", "15"]) == 0
        assert main(["--store", store, "--out", out,
                     "export", "--k", "0", "--t-max", "15"]) == 0
        csv_recs = import_records(
            read(tmp_path / "r" / "export_k0.csv").encode(), fmt="csv")
        assert main(["--store", store, "--out", out, "export", "--k", "0",
                     "--t-max", "15", "--format", "jsonl"]) == 0
        jsonl_recs = import_records(
            read(tmp_path / "r" / "export_k0.jsonl").encode(), fmt="jsonl")
        assert len(csv_recs) == len(jsonl_recs) == 1
        assert csv_recs[0].gamma._mpf_ == jsonl_recs[0].gamma._mpf_

    def test_stdout_when_no_out_dir(self, tmp_path, capsys):
        store = str(tmp_path / "zeros.jsonl")
        assert main(["--store", store, "scan", "--k", "0", "--t-max", "15"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("# tool: zdl ")
        assert CSV_HEADER in out


class TestCountReport:
    def test_single_row(self, tmp_path):
        store = str(tmp_path / "zeros.jsonl")
        out = str(tmp_path / "r")
        assert main(["--store", store, "--out", out,
                     "count", "--k", "0", "--T", "15"]) == 0
        body = [l for l in read(tmp_path / "r" / "count.csv").splitlines()
                if not l.startswith("#")]
        assert body[0] == COUNT_COLUMNS
        fields = body[1].split(",")
        assert fields[0] == "0" and fields[1] == "15.0"
        assert fields[2] == "1"  # N(15) = 1
        # e_term = n - main consistent within the printed row
        assert abs(float(fields[4]) - (1 - float(fields[3]))) < 1e-12

    def test_prec_bits_changes_policy_header(self, tmp_path):
        store = str(tmp_path / "zeros.jsonl")
        out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
        assert main(["--store", store, "--out", out1,
                     "scan", "--k", "0", "--t-max", "15"]) == 0
        assert main(["--prec-bits", "80", "--store", store, "--out", out2,
                     "scan", "--k", "0", "--t-max", "15"]) == 0
        pol1 = [l for l in read(tmp_path / "a" / "scan_k0.csv").splitlines()
                if l.startswith("# policy:")]
        pol2 = [l for l in read(tmp_path / "b" / "scan_k0.csv").splitlines()
                if l.startswith("# policy:")]
        assert pol1 != pol2


class TestDiagnoseReports:
    def test_lemma4_rows(self, tmp_path):
        store = str(tmp_path / "zeros.jsonl")
        out = str(tmp_path / "r")
        rc = main(["--store", store, "--out", out, "diagnose", "lemma4",
                   "--ell", "1", "--sigma", "0.25:0.55:0.25", "--t", "10:12:1"])
        assert rc == 0
        body = [l for l in read(tmp_path / "r" / "lemma4.csv").splitlines()
                if not l.startswith("#")]
        assert body[0] == "ell,sigma,t,re_value,status"
        assert len(body) == 1 + 4  # 2 sigmas x 2 ordinates
        assert all(row.endswith(",negative") for row in body[1:])

    def test_missing_grid_arguments_exit_two(self, tmp_path, capsys):
        store = str(tmp_path / "zeros.jsonl")
        assert main(["--store", store, "diagnose", "lemma4",
                     "--sigma", "0.25"]) == 2
        assert "requires --t" in capsys.readouterr().err

    def test_bad_profile_exits_two(self, tmp_path, capsys):
        store = str(tmp_path / "zeros.jsonl")
        assert main(["--store", store, "diagnose", "boxes", "--k", "1",
                     "--T", "150", "--phi", "custom:1/T"]) == 2
        capsys.readouterr()
