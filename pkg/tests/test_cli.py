import json
import subprocess
import sys

import numpy as np
import pytest

from signwalk.cli import main, read_pairs
from signwalk.errors import EdgeListError
from signwalk.encoding import load_walkset


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """One trained run shared by the read-only CLI tests."""
    root = tmp_path_factory.mktemp("cli")
    edges = root / "edges.tsv"
    out = root / "run"
    assert main(["gen-synthetic", "--nodes", "20", "--noise", "0.1",
                 "--p-intra", "0.5", "--p-inter", "0.5", "--seed", "5",
                 "--output", str(edges)]) == 0
    cfg = root / "fast.cfg"
    cfg.write_text("d = 6\nheads = 2\nr = 2\nl = 4\nmax_epochs = 2\n"
                   "patience = 1\nK = 3\nn_sample = 10\nprecision_k = 2\n")
    assert main(["train", "--edges", str(edges), "--out", str(out),
                 "--config", str(cfg)]) == 0
    assert main(["srwr", "--edges", str(edges), "--out", str(out),
                 "--config", str(cfg)]) == 0
    return {"edges": edges, "out": out, "cfg": cfg, "root": root}


class TestGenSynthetic:
    def test_deterministic_output(self, tmp_path, capsys):
        a, b = tmp_path / "a.tsv", tmp_path / "b.tsv"
        for path in (a, b):
            assert main(["gen-synthetic", "--nodes", "12", "--seed", "7",
                         "--output", str(path)]) == 0
        assert a.read_bytes() == b.read_bytes()
        out = capsys.readouterr().out
        assert "nodes 12" in out

    def test_reports_counts(self, tmp_path, capsys):
        path = tmp_path / "g.tsv"
        main(["gen-synthetic", "--nodes", "16", "--p-intra", "1.0",
              "--p-inter", "1.0", "--output", str(path)])
        out = capsys.readouterr().out
        # two blocks of 8: within-block pairs 2*C(8,2)=56, across 64,
        # mirrored to directed counts
        assert "pos_edges 112" in out
        assert "neg_edges 128" in out


class TestTrainCommand:
    def test_artifacts_and_summary(self, workspace, capsys):
        out = workspace["out"]
        for name in ("split.json", "checkpoint.npz", "loss_trace.csv",
                     "walks.npz", "diffusion.tsv"):
            assert (out / name).exists(), name

    def test_walk_override_changes_cache(self, workspace, tmp_path, capsys):
        out2 = tmp_path / "run2"
        assert main(["train", "--edges", str(workspace["edges"]),
                     "--out", str(out2), "--config", str(workspace["cfg"]),
                     "--walks", "3"]) == 0
        walkset = load_walkset(out2 / "walks.npz")
        assert walkset.num_walks == 3


class TestEvalCommand:
    def test_prints_report_json(self, workspace, capsys):
        assert main(["eval", "--edges", str(workspace["edges"]),
                     "--out", str(workspace["out"]),
                     "--config", str(workspace["cfg"])]) == 0
        report = json.loads(capsys.readouterr().out)
        assert 0.0 <= report["accuracy"] <= 1.0
        assert report["format_version"] == 1

    def test_missing_checkpoint_exit_code(self, workspace, tmp_path, capsys):
        code = main(["eval", "--edges", str(workspace["edges"]),
                     "--out", str(tmp_path / "empty"),
                     "--config", str(workspace["cfg"])])
        assert code == 3
        assert "train stage" in capsys.readouterr().err


class TestPredictCommand:
    def pairs_file(self, root):
        path = root / "pairs.tsv"
        path.write_text("# queries\n0 5\n3 14\n7 2\n")
        return path

    def test_stdout_predictions(self, workspace, capsys):
        pairs = self.pairs_file(workspace["root"])
        assert main(["predict", "--edges", str(workspace["edges"]),
                     "--out", str(workspace["out"]),
                     "--config", str(workspace["cfg"]),
                     "--pairs", str(pairs)]) == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert len(lines) == 3
        for line in lines:
            u, v, s = line.split("\t")
            assert int(s) in (-1, 1)

    def test_output_file(self, workspace, tmp_path, capsys):
        pairs = self.pairs_file(workspace["root"])
        target = tmp_path / "preds.tsv"
        assert main(["predict", "--edges", str(workspace["edges"]),
                     "--out", str(workspace["out"]),
                     "--config", str(workspace["cfg"]),
                     "--pairs", str(pairs), "--output", str(target)]) == 0
        assert len(target.read_text().strip().split("\n")) == 3
        assert capsys.readouterr().out == ""

    def test_out_of_range_pair_rejected(self, workspace, tmp_path, capsys):
        bad = tmp_path / "bad.tsv"
        bad.write_text("0 99\n")
        code = main(["predict", "--edges", str(workspace["edges"]),
                     "--out", str(workspace["out"]),
                     "--config", str(workspace["cfg"]),
                     "--pairs", str(bad)])
        assert code == 2
        assert "99" in capsys.readouterr().err


class TestExplainCommand:
    def test_json_lines(self, workspace, capsys):
        pairs = workspace["root"] / "explain_pairs.tsv"
        pairs.write_text("0 5\n3 14\n")
        assert main(["explain", "--edges", str(workspace["edges"]),
                     "--out", str(workspace["out"]),
                     "--config", str(workspace["cfg"]),
                     "--pairs", str(pairs)]) == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert len(lines) == 2
        for line in lines:
            record = json.loads(line)
            assert {"i", "j", "predicted_sign", "d_ij", "d_ip", "d_in",
                    "k_pos", "k_neg", "degenerate"} <= set(record)


class TestExpressivityCommand:
    def test_fixture_verdicts(self, capsys):
        assert main(["expressivity-check", "--fixture", "spe_blind"]) == 0
        result = json.loads(capsys.readouterr().out)
        assert result == {"spe": "same", "walk": "different", "wl": "same"}

    def test_wl_fixture_verdicts(self, capsys):
        assert main(["expressivity-check", "--fixture", "wl_blind"]) == 0
        result = json.loads(capsys.readouterr().out)
        assert result["wl"] == "same"
        assert result["walk"] == "different"

    def test_pair_of_files(self, tmp_path, capsys):
        a = tmp_path / "a.tsv"
        b = tmp_path / "b.tsv"
        a.write_text("0\t1\t1\n1\t0\t1\n1\t2\t1\n2\t1\t1\n")
        b.write_text("0\t1\t1\n1\t0\t1\n1\t2\t-1\n2\t1\t-1\n")
        assert main(["expressivity-check", "--pair", str(a), str(b)]) == 0
        result = json.loads(capsys.readouterr().out)
        assert set(result) == {"spe", "walk", "wl"}
        assert result["walk"] == "different"


class TestErrorHandling:
    def test_missing_edge_file(self, tmp_path, capsys):
        code = main(["train", "--edges", str(tmp_path / "nope.tsv"),
                     "--out", str(tmp_path / "o")])
        assert code == 2
        assert "error:" in capsys.readouterr().err

    def test_bad_config_key(self, workspace, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("width = 3\n")
        code = main(["train", "--edges", str(workspace["edges"]),
                     "--out", str(tmp_path / "o"), "--config", str(cfg)])
        assert code == 2

    def test_malformed_pairs_file(self, workspace, tmp_path, capsys):
        pairs = tmp_path / "pairs.tsv"
        pairs.write_text("0 1 extra\n")
        code = main(["predict", "--edges", str(workspace["edges"]),
                     "--out", str(workspace["out"]), "--pairs", str(pairs)])
        assert code == 2
        assert "line 1" in capsys.readouterr().err

    def test_read_pairs_rejects_empty(self, tmp_path):
        path = tmp_path / "empty.tsv"
        path.write_text("# nothing\n")
        with pytest.raises(EdgeListError):
            read_pairs(path)


class TestEntryPoints:
    def test_module_invocation(self):
        proc = subprocess.run([sys.executable, "-m", "signwalk", "--help"],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        assert "expressivity-check" in proc.stdout

    def test_unknown_subcommand_exits_two(self):
        proc = subprocess.run([sys.executable, "-m", "signwalk", "bogus"],
                              capture_output=True, text=True)
        assert proc.returncode == 2
