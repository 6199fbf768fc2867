import json

import numpy as np
import pytest

from tgbench.errors import RunTimeoutError, TrainingError
from tgbench.graph import reindex
from tgbench.runner import (RunConfig, evaluation_report, run,
                            run_link_prediction, run_node_classification)
from tgbench.splits import (UnseenNodeSet, build_link_pred_splits,
                            build_node_class_splits, chronological_boundaries,
                            select_unseen_nodes)
from tgbench import synth


def lp_fixture(n_users=40, n_items=25, n_edges=1200, seed=0, mask_seed=0):
    g, _ = reindex(synth.bipartite_stream(n_users, n_items, n_edges, seed=seed,
                                          item_offset=10_000), "heterogeneous")
    b = chronological_boundaries(g)
    unseen = select_unseen_nodes(g, b, seed=mask_seed)
    return g, build_link_pred_splits(g, b, unseen)


def nc_fixture(n_classes=2, seed=3, n_edges=1500):
    g, _ = reindex(synth.labeled_stream(40, n_edges, seed=seed,
                                        n_classes=n_classes), "heterogeneous")
    return g, build_node_class_splits(g, chronological_boundaries(g))


def nc_fixture_with_background():
    """Binary labels with classes 2/3 sprinkled uniformly through the stream."""
    from tgbench.graph import TemporalGraph
    from tgbench.rng import SeededRng
    g, _ = reindex(synth.labeled_stream(40, 2000, seed=3, n_classes=2),
                   "heterogeneous")
    labels = g.labels.copy()
    rng = SeededRng(9)
    idx = rng.choice_without_replacement(np.arange(g.n_edges), g.n_edges // 4)
    half = len(idx) // 2
    labels[idx[:half]] = 2
    labels[idx[half:]] = 3
    g = TemporalGraph(g.src, g.dst, g.timestamps, labels, g.edge_features,
                      bipartite=g.bipartite)
    return g, build_node_class_splits(g, chronological_boundaries(g))


class TestRunConfigValidation:
    def test_defaults_are_valid(self):
        cfg = RunConfig(dataset="demo")
        assert cfg.task == "lp" and cfg.setting == "all"
        assert cfg.seeds() == {"mask": 0, "val": 0, "test": 2, "init": 0}

    def test_rejects_bad_values(self):
        with pytest.raises(TrainingError):
            RunConfig(dataset="d", task="regression")
        with pytest.raises(TrainingError):
            RunConfig(dataset="d", setting="semi-inductive")
        with pytest.raises(TrainingError):
            RunConfig(dataset="d", sampler="adversarial")
        with pytest.raises(TrainingError):
            RunConfig(dataset="d", batch_size=0)
        with pytest.raises(TrainingError):
            RunConfig(dataset="d", repeats=0)
        with pytest.raises(TrainingError):
            RunConfig(dataset="d", timeout_seconds=0.0)

    def test_nc_is_transductive_only(self):
        with pytest.raises(TrainingError, match="transductive"):
            RunConfig(dataset="d", task="nc", setting="inductive")
        RunConfig(dataset="d", task="nc", setting="transductive")
        RunConfig(dataset="d", task="nc")  # "all" collapses to transductive


class TestLinkPredictionRuns:
    def test_identical_configs_reproduce_identical_metrics(self):
        g, sp = lp_fixture()
        cfg = dict(dataset="demo", model="edgebank", repeats=2, max_epochs=3)
        r1 = run_link_prediction(g, sp, RunConfig(**cfg))
        r2 = run_link_prediction(g, sp, RunConfig(**cfg))
        assert json.dumps(r1.metric_values(), sort_keys=True) == \
            json.dumps(r2.metric_values(), sort_keys=True)

    def test_heuristics_run_one_epoch(self):
        g, sp = lp_fixture()
        for model in ("edgebank", "edgebank-window", "time-decay"):
            res = run_link_prediction(
                g, sp, RunConfig(dataset="demo", model=model, repeats=1,
                                 max_epochs=50))
            assert res.epochs_used == 1.0

    def test_all_four_settings_reported(self):
        g, sp = lp_fixture()
        res = run_link_prediction(g, sp, RunConfig(dataset="demo", repeats=1))
        assert set(res.metrics) == {"transductive", "inductive", "new_old",
                                    "new_new"}
        trans = res.metrics["transductive"]
        assert set(trans) == {"auc", "ap"}
        for stats in trans.values():
            assert set(stats) == {"mean", "std", "values"}
            assert len(stats["values"]) == 1

    def test_empty_inductive_partitions_reported_as_none(self):
        g, _ = reindex(synth.bipartite_stream(40, 25, 1200, seed=0,
                                              item_offset=10_000),
                       "heterogeneous")
        b = chronological_boundaries(g)
        sp = build_link_pred_splits(g, b, UnseenNodeSet.empty())
        res = run_link_prediction(g, sp, RunConfig(dataset="demo", repeats=1))
        assert res.metrics["inductive"] is None
        assert res.metrics["new_old"] is None
        assert res.metrics["new_new"] is None
        assert res.metrics["transductive"] is not None

    def test_mean_std_aggregation_over_repeats(self):
        g, sp = lp_fixture()
        res = run_link_prediction(
            g, sp, RunConfig(dataset="demo", model="logistic", repeats=3,
                             max_epochs=2, lr=0.05))
        stats = res.metrics["transductive"]["auc"]
        vals = np.array(stats["values"])
        assert len(vals) == 3
        assert stats["mean"] == pytest.approx(vals.mean())
        assert stats["std"] == pytest.approx(vals.std())

    def test_profiling_fields_populated(self):
        g, sp = lp_fixture()
        res = run_link_prediction(g, sp, RunConfig(dataset="demo", repeats=1))
        assert res.seconds_per_epoch > 0
        assert res.peak_memory_bytes > 0
        assert res.inference_seconds_per_100k > 0

    def test_timeout_raises(self):
        g, sp = lp_fixture()
        cfg = RunConfig(dataset="demo", model="logistic", repeats=3,
                        max_epochs=50, timeout_seconds=1e-9)
        with pytest.raises(RunTimeoutError):
            run_link_prediction(g, sp, cfg)

    def test_sampler_variants_complete(self):
        g, sp = lp_fixture()
        for sampler in ("historical", "inductive"):
            res = run_link_prediction(
                g, sp, RunConfig(dataset="demo", sampler=sampler, repeats=1))
            assert res.metrics["transductive"]["auc"]["mean"] >= 0.0

    def test_task_guard(self):
        g, sp = lp_fixture()
        with pytest.raises(TrainingError):
            run_link_prediction(g, sp, RunConfig(dataset="d", task="nc"))

    def test_evaluation_report_view(self):
        g, sp = lp_fixture()
        res = run_link_prediction(g, sp, RunConfig(dataset="demo", repeats=1))
        rep = evaluation_report(res, "transductive")
        assert rep.auc == res.metrics["transductive"]["auc"]["mean"]
        with pytest.raises(Exception):
            evaluation_report(res, "missing-setting")


class TestNodeClassificationRuns:
    def test_binary_labels_reported_as_auc(self):
        g, sp = nc_fixture(n_classes=2)
        res = run_node_classification(
            g, sp, RunConfig(dataset="demo", task="nc", model="logistic",
                             repeats=1, max_epochs=5, lr=0.05))
        assert set(res.metrics) == {"transductive"}
        assert set(res.metrics["transductive"]) == {"auc"}

    def test_multiclass_reports_weighted_metrics(self):
        g, sp = nc_fixture(n_classes=3)
        res = run_node_classification(
            g, sp, RunConfig(dataset="demo", task="nc", model="logistic",
                             repeats=1, max_epochs=3, lr=0.05,
                             exclude_background=False))
        assert set(res.metrics["transductive"]) == {
            "accuracy", "weighted_precision", "weighted_recall", "weighted_f1"}

    # keeping the background classes means some are never predicted, which
    # legitimately trips the zero-division flag in the weighted metrics
    @pytest.mark.filterwarnings(
        "ignore::tgbench.errors.ZeroDivisionMetricWarning")
    def test_background_exclusion_changes_effective_problem(self):
        # labels {0,1,2,3} with background {2,3} leaves a binary problem
        g, sp = nc_fixture_with_background()
        res = run_node_classification(
            g, sp, RunConfig(dataset="demo", task="nc", model="logistic",
                             repeats=1, max_epochs=3, lr=0.05,
                             background_classes=(2, 3)))
        assert set(res.metrics["transductive"]) == {"auc"}
        kept = run_node_classification(
            g, sp, RunConfig(dataset="demo", task="nc", model="logistic",
                             repeats=1, max_epochs=3, lr=0.05,
                             background_classes=(2, 3),
                             exclude_background=False))
        assert "accuracy" in kept.metrics["transductive"]

    def test_constant_labels_rejected(self):
        g, _ = reindex(synth.bipartite_stream(20, 10, 300, seed=1,
                                              item_offset=500), "heterogeneous")
        sp = build_node_class_splits(g, chronological_boundaries(g))
        with pytest.raises(TrainingError, match="constant"):
            run_node_classification(
                g, sp, RunConfig(dataset="demo", task="nc", model="logistic"))

    def test_deterministic(self):
        g, sp = nc_fixture(n_classes=2)
        cfg = dict(dataset="demo", task="nc", model="logistic", repeats=2,
                   max_epochs=3, lr=0.05)
        r1 = run_node_classification(g, sp, RunConfig(**cfg))
        r2 = run_node_classification(g, sp, RunConfig(**cfg))
        assert json.dumps(r1.metric_values(), sort_keys=True) == \
            json.dumps(r2.metric_values(), sort_keys=True)

    def test_dispatch(self):
        g, sp = nc_fixture(n_classes=2)
        res = run(g, sp, RunConfig(dataset="demo", task="nc", model="logistic",
                                   repeats=1, max_epochs=2, lr=0.05))
        assert "transductive" in res.metrics
