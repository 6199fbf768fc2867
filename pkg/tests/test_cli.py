import json
import os

import numpy as np
import pytest

from tgbench.bundle import read_bundle
from tgbench.cli import main, read_config_file
from tgbench.errors import DatasetFormatError
from tgbench.leaderboard import read_store
from tgbench.splits import read_splits
from tgbench import synth


@pytest.fixture
def raw_csv(tmp_path):
    raw = synth.bipartite_stream(30, 18, 900, seed=4, item_offset=4000)
    path = tmp_path / "raw.csv"
    synth.write_raw_csv(raw, path, feature_dim=3)
    return path


def run_cli(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestIngestAndDescribe:
    def test_ingest_writes_a_readable_bundle(self, tmp_path, raw_csv, capsys):
        data = tmp_path / "data"
        code, out, err = run_cli(["ingest", str(raw_csv), "--name", "demo",
                                  "--data", str(data),
                                  "--node-feature-dim", "8"], capsys)
        assert code == 0
        assert "ingested" in out
        bundle = read_bundle(data, "demo")
        assert bundle.graph.n_edges == 900
        assert bundle.node_features.values.shape == (bundle.graph.n_nodes + 1, 8)

    def test_stats_output(self, tmp_path, raw_csv, capsys):
        data = tmp_path / "data"
        run_cli(["ingest", str(raw_csv), "--name", "demo", "--data",
                 str(data)], capsys)
        code, out, _ = run_cli(["stats", "--name", "demo", "--data",
                                str(data)], capsys)
        assert code == 0
        lines = dict(l.split(" ", 1) for l in out.strip().split("\n"))
        assert int(lines["n_edges"]) == 900
        assert int(lines["n_nodes"]) == 48
        assert float(lines["avg_degree"]) == pytest.approx(900 / 48, abs=0.01)
        assert "time_min" in lines and "time_max" in lines

    def test_hist_to_file(self, tmp_path, raw_csv, capsys):
        data = tmp_path / "data"
        run_cli(["ingest", str(raw_csv), "--name", "demo", "--data",
                 str(data)], capsys)
        out_path = tmp_path / "hist.csv"
        code, _, _ = run_cli(["hist", "--name", "demo", "--data", str(data),
                              "--bins", "6", "--out", str(out_path)], capsys)
        assert code == 0
        lines = out_path.read_text().strip().split("\n")
        assert lines[0] == "bin_start,bin_end,count"
        assert len(lines) == 7
        assert sum(int(l.split(",")[2]) for l in lines[1:]) == 900

    def test_data_dir_from_environment(self, tmp_path, raw_csv, capsys,
                                       monkeypatch):
        data = tmp_path / "envdata"
        monkeypatch.setenv("TGBENCH_DATA", str(data))
        code, _, _ = run_cli(["ingest", str(raw_csv), "--name", "demo"],
                             capsys)
        assert code == 0
        code, out, _ = run_cli(["stats", "--name", "demo"], capsys)
        assert code == 0 and "n_edges 900" in out


class TestSplitCommand:
    def test_split_then_run_pipeline(self, tmp_path, raw_csv, capsys):
        data = tmp_path / "data"
        run_cli(["ingest", str(raw_csv), "--name", "demo", "--data",
                 str(data)], capsys)
        code, out, _ = run_cli(["split", "--name", "demo", "--data",
                                str(data), "--task", "lp", "--mask-seed",
                                "0"], capsys)
        assert code == 0
        splits_path = data / "demo.splits.json"
        assert splits_path.exists()
        sp = read_splits(splits_path)
        assert len(sp.train) > 0

        store = tmp_path / "results.jsonl"
        code, out, _ = run_cli(["run", "--name", "demo", "--data", str(data),
                                "--model", "edgebank", "--repeats", "1",
                                "--store", str(store)], capsys)
        assert code == 0
        assert "transductive:" in out
        assert "epochs_used 1.0" in out
        assert len(read_store(store)) > 0

    def test_split_summary_lists_partition_sizes(self, tmp_path, raw_csv,
                                                 capsys):
        data = tmp_path / "data"
        run_cli(["ingest", str(raw_csv), "--name", "demo", "--data",
                 str(data)], capsys)
        code, out, _ = run_cli(["split", "--name", "demo", "--data",
                                str(data)], capsys)
        got = dict(l.split(" ", 1) for l in out.strip().split("\n")[1:])
        assert {"train", "val", "test", "ind_val", "ind_test",
                "unseen_nodes"} <= set(got)

    def test_nc_split(self, tmp_path, raw_csv, capsys):
        data = tmp_path / "data"
        run_cli(["ingest", str(raw_csv), "--name", "demo", "--data",
                 str(data)], capsys)
        code, out, _ = run_cli(["split", "--name", "demo", "--data",
                                str(data), "--task", "nc"], capsys)
        assert code == 0
        sp = read_splits(data / "demo.splits.json")
        assert not hasattr(sp, "unseen")


class TestRunConfigFile:
    def test_config_file_parsed_and_flags_override(self, tmp_path, raw_csv,
                                                   capsys):
        data = tmp_path / "data"
        run_cli(["ingest", str(raw_csv), "--name", "demo", "--data",
                 str(data)], capsys)
        run_cli(["split", "--name", "demo", "--data", str(data)], capsys)
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "# demo configuration\n"
            "model = time-decay\n"
            "repeats = 2\n"
            "max-epochs = 4\n"
            "model.tau = 25.0\n")
        code, out, _ = run_cli(["run", "--name", "demo", "--data", str(data),
                                "--config", str(cfg), "--repeats", "1"],
                               capsys)
        assert code == 0
        # --repeats 1 overrides the file's 2; model comes from the file
        assert "epochs_used 1.0" in out

    def test_read_config_file_coercions(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("lr = 0.05\nrepeats = 3\nmodel = logistic\n"
                       "reseed-val-each-epoch = true\n")
        values = read_config_file(cfg)
        assert values == {"lr": 0.05, "repeats": 3, "model": "logistic",
                          "reseed_val_each_epoch": True}

    def test_unknown_config_key_rejected(self, tmp_path, raw_csv, capsys):
        data = tmp_path / "data"
        run_cli(["ingest", str(raw_csv), "--name", "demo", "--data",
                 str(data)], capsys)
        run_cli(["split", "--name", "demo", "--data", str(data)], capsys)
        cfg = tmp_path / "run.cfg"
        cfg.write_text("momentum = 0.9\n")
        code, _, err = run_cli(["run", "--name", "demo", "--data", str(data),
                                "--config", str(cfg)], capsys)
        assert code == 1
        assert err.startswith("error: {")
        assert "momentum" in err

    def test_malformed_config_line_rejected(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("just some words\n")
        with pytest.raises(DatasetFormatError, match="line 1"):
            read_config_file(cfg)


class TestLeaderboardCommand:
    def test_leaderboard_renders_recorded_runs(self, tmp_path, raw_csv,
                                               capsys):
        data = tmp_path / "data"
        store = tmp_path / "results.jsonl"
        run_cli(["ingest", str(raw_csv), "--name", "demo", "--data",
                 str(data)], capsys)
        run_cli(["split", "--name", "demo", "--data", str(data)], capsys)
        for model in ("edgebank", "time-decay"):
            code, _, _ = run_cli(["run", "--name", "demo", "--data",
                                  str(data), "--model", model, "--repeats",
                                  "1", "--store", str(store)], capsys)
            assert code == 0
        code, out, _ = run_cli(["leaderboard", "--store", str(store),
                                "--metric", "auc"], capsys)
        assert code == 0
        header = out.strip().split("\n")[0]
        assert "edgebank" in header and "time-decay" in header
        assert "**" in out  # a best cell is flagged
        assert "avg rank" in out

        code, out, _ = run_cli(["leaderboard", "--store", str(store),
                                "--metric", "auc", "--format", "csv"], capsys)
        assert code == 0
        assert out.startswith("dataset,")


class TestErrorContract:
    def test_missing_bundle_is_a_single_error_line(self, tmp_path, capsys):
        code, out, err = run_cli(["stats", "--name", "ghost", "--data",
                                  str(tmp_path)], capsys)
        assert code == 1
        assert out == ""
        lines = err.strip().split("\n")
        assert len(lines) == 1
        assert lines[0].startswith("error: ")
        payload = json.loads(lines[0][len("error: "):])
        assert payload["code"] == "dataset-format"
        assert "missing" in payload["message"]

    def test_malformed_raw_file_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("user_id,item_id,timestamp,state_label\n0,1,oops,0\n")
        code, _, err = run_cli(["ingest", str(bad), "--name", "x", "--data",
                                str(tmp_path)], capsys)
        assert code == 1
        assert err.startswith("error: {")

    def test_usage_error_exits_two(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["split"])  # --name is required
        assert excinfo.value.code == 2
        _, err = capsys.readouterr().out, capsys.readouterr().err
        # the usage error line was printed before exiting

    def test_unknown_subcommand_exits_two(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["transmogrify"])
        assert excinfo.value.code == 2
