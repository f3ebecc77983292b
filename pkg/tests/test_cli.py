import json

import numpy as np
import pytest

from polardec.cli import main, _parse_snr


def run_cli(args):
    return main(args)


class TestParsing:
    def test_sweep(self):
        assert _parse_snr("2:0.5:4.5") == [2.0, 2.5, 3.0, 3.5, 4.0, 4.5]

    def test_list(self):
        assert _parse_snr("1,2.5,4") == [1.0, 2.5, 4.0]


class TestCodeCommand:
    def test_paper_code(self, tmp_path, capsys):
        out = tmp_path / "code.json"
        assert run_cli(["code", "-n", "7", "--min-info", "27",
                        "--output", str(out)]) == 0
        body = json.loads(out.read_text())
        assert body["K"] == 60
        assert body["block_profile"] == [3, 4]

    def test_small_code_stdout(self, capsys):
        assert run_cli(["code", "-n", "3", "--min-info", "7"]) == 0
        body = json.loads(capsys.readouterr().out)
        assert body["K"] == 1

    def test_invalid_index_exits_2(self, capsys):
        assert run_cli(["code", "-n", "7", "--min-info", "200"]) == 2
        assert capsys.readouterr().err

    def test_unknown_flag_exits_2(self, capsys):
        assert run_cli(["code", "-n", "3", "--min-info", "3", "--bogus"]) == 2

    def test_missing_code_exits_2(self, capsys):
        assert run_cli(["code"]) == 2


class TestPermsCommand:
    def test_json_schema(self, tmp_path):
        out = tmp_path / "perms.json"
        assert run_cli(["perms", "-n", "3", "--min-info", "3", "-L", "4",
                        "--relax-classes", "--seed", "3",
                        "--output", str(out)]) == 0
        body = json.loads(out.read_text())
        assert body["count"] == 4
        assert all(set(p) == {"A", "b"} for p in body["perms"])


class TestDecodeCommand:
    def test_decode_file(self, tmp_path, rng):
        llr_file = tmp_path / "llrs.txt"
        llr_file.write_text("\n".join(f"{v:.6f}" for v in rng.normal(size=8) * 2))
        out = tmp_path / "out.json"
        assert run_cli(["decode", "-n", "3", "--min-info", "3",
                        "--decoder", "scl", "-L", "4", "--llrs", str(llr_file),
                        "--output", str(out)]) == 0
        body = json.loads(out.read_text())
        assert len(body["x_hat"]) == 8
        assert len(body["u_hat"]) == 4
        assert body["final_list"][0]["pm"] <= body["final_list"][-1]["pm"]

    def test_missing_file_exits_2(self, tmp_path):
        assert run_cli(["decode", "-n", "3", "--min-info", "3",
                        "--llrs", str(tmp_path / "nope.txt")]) == 2


class TestSimulateCommand:
    def test_sweep_row_count(self, tmp_path):
        out = tmp_path / "fer.csv"
        assert run_cli(["simulate", "-n", "3", "--min-info", "3",
                        "--decoder", "scl", "-L", "2", "--snr", "2:0.5:4.5",
                        "--max-blocks", "200", "--max-errors", "50",
                        "--output", str(out)]) == 0
        lines = out.read_text().strip().split("\n")
        assert len(lines) == 7  # header + 6 SNR points

    def test_scl1_equals_sc(self, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        common = ["-n", "3", "--min-info", "3", "--snr", "2.5",
                  "--max-blocks", "400", "--max-errors", "100",
                  "--seed", "17"]
        assert run_cli(["simulate", *common, "--decoder", "scl", "-L", "1",
                        "--output", str(a)]) == 0
        assert run_cli(["simulate", *common, "--decoder", "sc",
                        "--output", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_rerun_byte_identical(self, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        args = ["simulate", "-n", "3", "--min-info", "3", "--decoder", "scl",
                "-L", "2", "--snr", "3", "--max-blocks", "300",
                "--max-errors", "60", "--seed", "5"]
        assert run_cli([*args, "--output", str(a)]) == 0
        assert run_cli([*args, "--workers", "2", "--output", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_config_file_with_overrides(self, tmp_path):
        cfg = {"code": {"n": 3, "min_info_set": [3]},
               "decoder": {"algorithm": "scl", "list_size": 2},
               "snr_points": [2.0], "max_blocks": 200, "max_errors": 30}
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        out = tmp_path / "fer.csv"
        assert run_cli(["simulate", "--config", str(path), "--snr", "4",
                        "--output", str(out)]) == 0
        assert out.read_text().strip().split("\n")[1].startswith("4,")

    def test_json_format(self, tmp_path, capsys):
        assert run_cli(["simulate", "-n", "3", "--min-info", "3",
                        "--decoder", "sc", "--snr", "3",
                        "--max-blocks", "100", "--max-errors", "10",
                        "--format", "json"]) == 0
        rows = json.loads(capsys.readouterr().out)
        assert rows[0]["ebn0_db"] == 3.0

    def test_bad_config_exits_2(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text("[1, 2]")
        assert run_cli(["simulate", "--config", str(path)]) == 2


class TestAnalyzeCommand:
    def test_writes_sidecars(self, tmp_path):
        outdir = tmp_path / "analysis"
        assert run_cli(["analyze", "-n", "3", "--min-info", "3",
                        "--decoder", "scal", "-L", "4", "--relax-classes",
                        "--snr", "3", "--max-blocks", "150",
                        "--output", str(outdir)]) == 0
        evo = (outdir / "perm_evolution.csv").read_text().strip().split("\n")
        assert len(evo) == 9
        assert evo[1].startswith("0,4.000000")
        assert (outdir / "final_list.csv").exists()

    def test_rejects_non_scal(self, tmp_path):
        assert run_cli(["analyze", "-n", "3", "--min-info", "3",
                        "--decoder", "scl", "--snr", "3",
                        "--max-blocks", "50",
                        "--output", str(tmp_path)]) == 2

    def test_deterministic_across_workers(self, tmp_path):
        args = ["analyze", "-n", "3", "--min-info", "3", "--decoder", "scal",
                "-L", "4", "--relax-classes", "--snr", "2,3",
                "--max-blocks", "200", "--seed", "21"]
        a = tmp_path / "a"
        b = tmp_path / "b"
        assert run_cli([*args, "--output", str(a)]) == 0
        assert run_cli([*args, "--workers", "2", "--output", str(b)]) == 0
        assert (a / "perm_evolution.csv").read_bytes() == \
               (b / "perm_evolution.csv").read_bytes()
        assert (a / "final_list.csv").read_bytes() == \
               (b / "final_list.csv").read_bytes()
