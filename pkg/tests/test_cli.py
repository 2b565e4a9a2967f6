import csv
import hashlib
import json
import math
import subprocess
import sys

import pytest

from massart.cli import EXIT_CONFIG, EXIT_FLAGGED, EXIT_OK, main


def write_config(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def read_csv(path):
    lines = path.read_text().splitlines()
    return lines[0], list(csv.DictReader(lines[1:]))


SMALL_LEARN = {"geometry": {"d": 5}, "noise": {"kind": "noiseless"},
               "experiment": {"excess_samples": 100_000}}
SMALL_BASELINES = {"experiment": {"samples": 100_000, "trials": 2, "excess_samples": 20_000}}
SMALL_LOWER = {"experiment": {"samples": 20_000, "etas": [0.1, 0.3]}}


class TestConfigErrors:
    def test_beta_out_of_range(self, tmp_path):
        assert main(["baselines", "--beta", "1.5", "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_unknown_check(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"experiment": {"checks": ["lemma_nope"]}})
        assert main(["verify", "--config", cfg, "--out", str(tmp_path)]) == EXIT_CONFIG
        assert "lemma_nope" in capsys.readouterr().err

    def test_unknown_section(self, tmp_path):
        cfg = write_config(tmp_path, {"plots": {}})
        assert main(["learn", "--config", cfg, "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_bad_seed(self, tmp_path):
        assert main(["lowerbounds", "--seed", "-1", "--out", str(tmp_path)]) == EXIT_CONFIG
        assert main(["lowerbounds", "--seed", str(2**64), "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_unreadable_config(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["learn", "--config", str(bad), "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_unknown_noise_kind(self, tmp_path):
        cfg = write_config(tmp_path, {"noise": {"kind": "tsybakov"}})
        assert main(["learn", "--config", cfg, "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_paper_schedule_low_dimension(self, tmp_path):
        assert main(["learn", "--schedule", "paper", "--d", "5", "--out", str(tmp_path)]) \
            == EXIT_CONFIG


class TestLearn:
    def test_noiseless_run(self, tmp_path):
        cfg = write_config(tmp_path, SMALL_LEARN)
        out = tmp_path / "out"
        assert main(["learn", "--config", cfg, "--seed", "3", "--out", str(out)]) == EXIT_OK
        report = json.loads((out / "runreport.json").read_text())
        assert report["final_disagreement"] <= 0.05
        assert report["seed"] == 3 and not report["flagged"]

        first, rows = read_csv(out / "rounds.csv")
        assert first == f"# config_sha256={report['config_sha256']} seed=3"
        assert list(rows[0]) == ["k", "angle_rad", "excess_err", "labels", "unlabeled",
                                 "hinge", "converged"]
        assert [int(r["k"]) for r in rows] == list(range(1, len(rows) + 1))
        for r in rows:
            assert float(r["excess_err"]) == pytest.approx(float(r["angle_rad"]) / math.pi)
        # label counts are cumulative over rounds
        assert int(rows[-1]["labels"]) == report["total_labels"]

    def test_hash_matches_config(self, tmp_path):
        out = tmp_path / "out"
        main(["learn", "--config", write_config(tmp_path, SMALL_LEARN), "--out", str(out)])
        report = json.loads((out / "runreport.json").read_text())
        blob = json.dumps(report["config"], sort_keys=True, separators=(",", ":"))
        assert hashlib.sha256(blob.encode()).hexdigest() == report["config_sha256"]

    def test_flagged_round_exit(self, tmp_path):
        cfg = dict(SMALL_LEARN, solver={"max_iters": 2, "restarts": 1, "epoch_length": 2})
        out = tmp_path / "out"
        assert main(["learn", "--config", write_config(tmp_path, cfg), "--out", str(out)]) \
            == EXIT_FLAGGED
        assert json.loads((out / "runreport.json").read_text())["flagged"]


class TestDeterminism:
    @pytest.mark.parametrize("command,cfg", [("learn", SMALL_LEARN),
                                             ("baselines", SMALL_BASELINES),
                                             ("lowerbounds", SMALL_LOWER)])
    def test_byte_identical(self, tmp_path, command, cfg):
        path = write_config(tmp_path, cfg)
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            main([command, "--config", path, "--seed", "17", "--out", str(out)])
        files = sorted(p.name for p in a.iterdir())
        assert files == sorted(p.name for p in b.iterdir()) and files
        for name in files:
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_seed_changes_output(self, tmp_path):
        path = write_config(tmp_path, SMALL_LOWER)
        a, b = tmp_path / "a", tmp_path / "b"
        main(["lowerbounds", "--config", path, "--seed", "1", "--out", str(a)])
        main(["lowerbounds", "--config", path, "--seed", "2", "--out", str(b)])
        assert (a / "regions.csv").read_bytes() != (b / "regions.csv").read_bytes()

    def test_no_temp_files_left(self, tmp_path):
        main(["lowerbounds", "--config", write_config(tmp_path, SMALL_LOWER),
              "--out", str(tmp_path / "o")])
        assert sorted(p.name for p in (tmp_path / "o").iterdir()) == [
            "average.csv", "hinge_gap.csv", "lowerbounds.json", "regions.csv"]


class TestBaselines:
    def test_quadrant_average_angle(self, tmp_path):
        out = tmp_path / "out"
        path = write_config(tmp_path, SMALL_BASELINES)
        assert main(["baselines", "--config", path, "--out", str(out)]) == EXIT_OK
        summary = json.loads((out / "baselines.json").read_text())
        assert summary["reference_angle"] == pytest.approx(math.atan(1 / 3))
        assert summary["summary"]["average"]["mean_angle"] == pytest.approx(0.3218, abs=0.01)
        _, rows = read_csv(out / "baselines.csv")
        assert {r["method"] for r in rows} == {"average", "hinge"}
        assert len(rows) == 4

    def test_wedge_alpha_chosen(self, tmp_path):
        cfg = {"noise": {"kind": "wedge", "eta": 0.1},
               "experiment": {"samples": 5000, "trials": 1, "excess_samples": 5000, "tau": 0.5}}
        out = tmp_path / "out"
        assert main(["baselines", "--config", write_config(tmp_path, cfg),
                     "--out", str(out)]) == EXIT_OK
        summary = json.loads((out / "baselines.json").read_text())
        assert summary["config"]["noise"]["alpha"] == pytest.approx(0.0888547, abs=1e-6)


class TestLowerBounds:
    def test_tables(self, tmp_path):
        out = tmp_path / "out"
        path = write_config(tmp_path, SMALL_LOWER)
        assert main(["lowerbounds", "--config", path, "--out", str(out)]) == EXIT_OK
        data = json.loads((out / "lowerbounds.json").read_text())
        assert data["eta1"] == pytest.approx(0.205604, abs=1e-6)
        _, gap = read_csv(out / "hinge_gap.csv")
        assert float(gap[0]["gap_closed"]) > 0 > float(gap[1]["gap_closed"])
        _, regions = read_csv(out / "regions.csv")
        assert [r["region"] for r in regions] == ["cA", "dA", "cB", "dB", "cC", "dC", "cD", "dD"]
        _, avg = read_csv(out / "average.csv")
        assert [float(r["beta"]) for r in avg] == [0.25, 0.5, 0.9]


class TestVerify:
    def test_subset(self, tmp_path, capsys):
        cfg = {"experiment": {"checks": ["theorem_inequality", "lemma_Lwstar"],
                              "samples": 100_000}}
        out = tmp_path / "out"
        assert main(["verify", "--config", write_config(tmp_path, cfg),
                     "--out", str(out)]) == EXIT_OK
        data = json.loads((out / "verify.json").read_text())
        assert data["all_pass"]
        assert [r["check"] for r in data["results"]] == ["theorem_inequality", "lemma_Lwstar"]
        assert all(r["pass"] for r in data["results"])
        lines = capsys.readouterr().out.splitlines()
        assert [ln.split()[0] for ln in lines] == ["PASS", "PASS"]

    def test_per_check_streams(self, tmp_path):
        """A check's result does not depend on which other checks run with it."""
        alone = {"experiment": {"checks": ["lemma_Lwstar"], "samples": 50_000}}
        both = {"experiment": {"checks": ["band_lemmas", "lemma_Lwstar"], "samples": 50_000}}
        a, b = tmp_path / "a", tmp_path / "b"
        main(["verify", "--config", write_config(tmp_path, alone, "a.json"), "--out", str(a)])
        main(["verify", "--config", write_config(tmp_path, both, "b.json"), "--out", str(b)])
        ra = json.loads((a / "verify.json").read_text())["results"]
        rb = json.loads((b / "verify.json").read_text())["results"]
        assert ra[0] == [r for r in rb if r["check"] == "lemma_Lwstar"][0]


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "massart.cli", "--help"], capture_output=True,
                          text=True)
    assert proc.returncode == 0 and "verify" in proc.stdout
