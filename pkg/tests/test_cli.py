"""End-to-end CLI tests driven through main(argv); files live in tmp_path.

Exit code contract: 0 success, 1 failed verification, 2 bad input/format,
3 I/O trouble.
"""

import math

import numpy as np
import pytest

from ilans import cli
from ilans.interleave import encode_interleaved
from ilans.rans import BYTE8, SymbolTable


@pytest.fixture
def sample(tmp_path):
    rng = np.random.default_rng(70)
    # skewed byte source so compression actually does something
    data = rng.choice(64, size=8192, p=np.arange(64, 0, -1) / np.arange(64, 0, -1).sum())
    path = tmp_path / "sample.bin"
    path.write_bytes(data.astype(np.uint8).tobytes())
    return path


class TestEncodeDecode:
    def test_round_trip(self, tmp_path, sample, capsys):
        enc = tmp_path / "sample.iec"
        dec = tmp_path / "sample.out"
        assert cli.main(["encode", str(sample), str(enc), "--lanes", "4"]) == 0
        assert "->" in capsys.readouterr().out
        assert cli.main(["decode", str(enc), str(dec)]) == 0
        assert dec.read_bytes() == sample.read_bytes()

    def test_lane_decode_matches_serial(self, tmp_path, sample):
        enc = tmp_path / "s.iec"
        a = tmp_path / "a.out"
        b = tmp_path / "b.out"
        assert cli.main(["encode", str(sample), str(enc)]) == 0
        assert cli.main(["decode", str(enc), str(a), "--mode", "serial"]) == 0
        assert cli.main(["decode", str(enc), str(b), "--mode", "lanes"]) == 0
        assert a.read_bytes() == b.read_bytes() == sample.read_bytes()

    def test_byte8_variant(self, tmp_path, sample):
        enc = tmp_path / "s8.iec"
        dec = tmp_path / "s8.out"
        assert cli.main(["encode", str(sample), str(enc), "--variant", "byte8"]) == 0
        assert cli.main(["decode", str(enc), str(dec)]) == 0
        assert dec.read_bytes() == sample.read_bytes()

    def test_empty_file(self, tmp_path):
        src = tmp_path / "empty"
        src.write_bytes(b"")
        enc = tmp_path / "empty.iec"
        dec = tmp_path / "empty.out"
        assert cli.main(["encode", str(src), str(enc)]) == 0
        assert cli.main(["decode", str(enc), str(dec)]) == 0
        assert dec.read_bytes() == b""

    def test_lane_decode_of_byte8_is_a_usage_error(self, tmp_path, capsys):
        enc = tmp_path / "b8.iec"
        table = SymbolTable.from_counts([5, 3], 3)
        blob = encode_interleaved([0, 1, 0, 0], table, 2, BYTE8).to_bytes()
        enc.write_bytes(blob)
        out = tmp_path / "x.out"
        assert cli.main(["decode", str(enc), str(out), "--mode", "lanes"]) == 2
        assert "error:" in capsys.readouterr().err

    def test_missing_input_is_io_error(self, tmp_path, capsys):
        assert cli.main(["encode", str(tmp_path / "nope"), str(tmp_path / "o")]) == 3
        assert "io error" in capsys.readouterr().err

    def test_not_a_container(self, tmp_path, capsys):
        junk = tmp_path / "junk"
        junk.write_bytes(b"this is not a container at all")
        assert cli.main(["decode", str(junk), str(tmp_path / "o")]) == 2
        assert "error:" in capsys.readouterr().err


class TestVerify:
    def test_raw_mode_passes(self, tmp_path, sample, capsys):
        assert cli.main(["verify", str(sample)]) == 0
        out = capsys.readouterr().out
        assert "checks passed" in out
        assert "FAIL" not in out
        assert "lockstep[N=8]" in out

    def test_container_mode_passes(self, tmp_path, sample, capsys):
        enc = tmp_path / "v.iec"
        assert cli.main(["encode", str(sample), str(enc)]) == 0
        capsys.readouterr()
        assert cli.main(["verify", str(enc)]) == 0
        out = capsys.readouterr().out
        assert "lane-decode" in out and "matches serial" in out

    def test_corrupt_container_fails(self, tmp_path, sample, capsys):
        enc = tmp_path / "v.iec"
        assert cli.main(["encode", str(sample), str(enc)]) == 0
        blob = enc.read_bytes()
        enc.write_bytes(blob[: len(blob) - 5])  # chop off payload tail
        capsys.readouterr()
        assert cli.main(["verify", str(enc)]) == 1
        out = capsys.readouterr().out
        assert "FAIL" in out and "checks failed" in out


class TestInspect:
    def test_reports_model_entropy(self, tmp_path, sample, capsys):
        enc = tmp_path / "i.iec"
        assert cli.main(["encode", str(sample), str(enc)]) == 0
        capsys.readouterr()
        assert cli.main(["inspect", str(enc)]) == 0
        out = capsys.readouterr().out
        assert "variant:          word16" in out
        entropy = None
        for line in out.splitlines():
            if line.startswith("entropy estimate:"):
                entropy = float(line.split(":")[1].split()[0])
        assert entropy is not None
        # cross-check against an independent empirical estimate
        data = np.frombuffer(sample.read_bytes(), dtype=np.uint8)
        counts = np.bincount(data)
        p = counts[counts > 0] / len(data)
        empirical = float(-(p * np.log2(p)).sum())
        assert math.isclose(entropy, empirical, rel_tol=0.02)


class TestBench:
    def test_bench_runs_and_prints_table(self, tmp_path, sample, capsys):
        assert cli.main(["bench", str(sample), "--repeats", "1", "--lanes", "4"]) == 0
        out = capsys.readouterr().out
        assert "MiB/s" in out and "vs serial" in out
        machine = [l for l in out.splitlines() if l.startswith("bench\t")]
        assert machine, "machine-readable rows missing"
        fields = machine[0].split("\t")
        assert len(fields) == 10
        assert int(fields[4]) == 8192  # raw_bytes
        assert "tiny input" in out  # 8 KiB is far below the honest-timing size

    def test_bench_pure_backend(self, sample, capsys):
        assert cli.main(["bench", str(sample), "--repeats", "1", "--backend", "pure"]) == 0
        out = capsys.readouterr().out
        assert " pure " in out
