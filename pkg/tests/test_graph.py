import numpy as np
import pytest

from tgbench.errors import (DatasetFormatError, EmptyGraphError,
                            SharedNodeIdWarning)
from tgbench.graph import (TemporalGraph, compute_stats, init_node_features,
                           load_dataset, reindex, temporal_histogram)
from tgbench.rng import SeededRng
from tgbench import synth


def small_graph(bipartite=True):
    return TemporalGraph(src=[7, 42, 7, 42], dst=[7, 9, 9, 7],
                         timestamps=[1.0, 2.0, 3.0, 4.0],
                         bipartite=bipartite)


class TestTemporalGraph:
    def test_sorts_by_timestamp_keeping_row_order_for_ties(self):
        g = TemporalGraph(src=[1, 2, 3, 4], dst=[5, 6, 7, 8],
                          timestamps=[3.0, 1.0, 1.0, 2.0])
        assert g.timestamps.tolist() == [1.0, 1.0, 2.0, 3.0]
        assert g.src.tolist() == [2, 3, 4, 1]  # stable for the tie at t=1

    def test_edge_index_matches_position(self):
        g = small_graph()
        for i in range(g.n_edges):
            assert g.interaction(i).edge_index == i
        assert [it.src for it in g] == g.src.tolist()

    def test_counts(self):
        g = small_graph()
        assert g.n_edges == 4
        assert g.n_src_distinct == 2
        assert g.n_dst_distinct == 2
        assert g.n_nodes == 3  # {7, 42} union {7, 9}

    def test_rejects_mismatched_lengths(self):
        with pytest.raises(DatasetFormatError):
            TemporalGraph(src=[1, 2], dst=[3], timestamps=[0.0, 1.0])

    def test_rejects_negative_ids_and_timestamps(self):
        with pytest.raises(DatasetFormatError):
            TemporalGraph(src=[-1], dst=[2], timestamps=[0.0])
        with pytest.raises(DatasetFormatError):
            TemporalGraph(src=[1], dst=[2], timestamps=[-5.0])

    def test_rejects_nonfinite_features(self):
        with pytest.raises(DatasetFormatError):
            TemporalGraph(src=[1], dst=[2], timestamps=[1.0],
                          edge_features=[[np.inf]])


class TestLoadDataset:
    def write(self, tmp_path, text):
        path = tmp_path / "raw.csv"
        path.write_text(text)
        return path

    def test_parses_jodie_layout(self, tmp_path):
        path = self.write(tmp_path,
                          "user_id,item_id,timestamp,state_label,f0,f1\n"
                          "0,0,0.0,0,0.5,1.5\n"
                          "1,0,10.0,1,-0.25,2.0\n")
        g = load_dataset(path, bipartite=True)
        assert g.n_edges == 2
        assert g.d_e == 2
        assert g.bipartite
        assert g.labels.tolist() == [0, 1]
        assert g.edge_features[1].tolist() == [-0.25, 2.0]

    def test_sorts_rows_by_timestamp(self, tmp_path):
        path = self.write(tmp_path,
                          "user_id,item_id,timestamp,state_label\n"
                          "5,1,7.0,0\n"
                          "6,1,3.0,0\n")
        g = load_dataset(path)
        assert g.src.tolist() == [6, 5]

    def test_identical_bytes_identical_graph(self, tmp_path):
        text = ("user_id,item_id,timestamp,state_label,f0\n"
                "0,1,1.5,0,0.125\n"
                "2,1,2.5,1,0.5\n")
        g1 = load_dataset(self.write(tmp_path, text))
        path2 = tmp_path / "copy.csv"
        path2.write_text(text)
        g2 = load_dataset(path2)
        assert np.array_equal(g1.src, g2.src)
        assert np.array_equal(g1.timestamps, g2.timestamps)
        assert np.array_equal(g1.edge_features, g2.edge_features)

    def test_malformed_row_reports_line_number(self, tmp_path):
        path = self.write(tmp_path,
                          "user_id,item_id,timestamp,state_label\n"
                          "0,1,1.0,0\n"
                          "0,not_a_number,2.0,0\n")
        with pytest.raises(DatasetFormatError):
            load_dataset(path)

    def test_short_row_reports_line_number(self, tmp_path):
        path = self.write(tmp_path,
                          "user_id,item_id,timestamp,state_label\n"
                          "0,1,1.0,0\n"
                          "0,1\n")
        with pytest.raises(DatasetFormatError, match="line 3"):
            load_dataset(path)

    def test_non_integer_id_rejected_with_line(self, tmp_path):
        path = self.write(tmp_path,
                          "user_id,item_id,timestamp,state_label\n"
                          "0.5,1,1.0,0\n")
        with pytest.raises(DatasetFormatError, match="line 2"):
            load_dataset(path)

    def test_unknown_format_rejected(self, tmp_path):
        path = self.write(tmp_path, "user_id,item_id,timestamp,state_label\n")
        with pytest.raises(DatasetFormatError, match="format"):
            load_dataset(path, format="parquet")

    def test_column_remap(self, tmp_path):
        path = self.write(tmp_path,
                          "timestamp,user,item,label\n"
                          "1.0,3,4,0\n")
        g = load_dataset(path, columns={"time": 0, "src": 1, "dst": 2, "label": 3})
        assert g.src.tolist() == [3]
        assert g.dst.tolist() == [4]

    def test_features_survive_single_precision_roundtrip(self, tmp_path):
        path = self.write(tmp_path,
                          "user_id,item_id,timestamp,state_label,f0\n"
                          "0,1,1.0,0,0.1\n")
        g = load_dataset(path)
        assert g.edge_features[0, 0] == np.float32(0.1)


class TestReindex:
    def test_heterogeneous_users_then_items(self):
        with pytest.warns(SharedNodeIdWarning):
            g, m = reindex(small_graph(), kind="heterogeneous")
        assert m.user_map == {7: 1, 42: 2}
        assert m.item_map == {7: 3, 9: 4}
        assert m.n_users == 2 and m.n_items == 2
        assert g.n_nodes == 4
        assert set(g.src) == {1, 2}
        assert set(g.dst) == {3, 4}

    def test_heterogeneous_requires_bipartite(self):
        with pytest.raises(DatasetFormatError):
            reindex(small_graph(bipartite=False), kind="heterogeneous")

    def test_homogeneous_first_appearance(self):
        g = TemporalGraph(src=[10, 10], dst=[3, 8], timestamps=[1.0, 2.0])
        out, m = reindex(g, kind="homogeneous")
        # concatenated sources-then-destinations order: 10, 10, 3, 8
        assert m.user_map == {10: 1, 3: 2, 8: 3}
        assert out.src.tolist() == [1, 1]
        assert out.dst.tolist() == [2, 3]
        assert not out.bipartite

    def test_roundtrip_via_inverse(self):
        raw = synth.bipartite_stream(15, 9, 120, seed=4, item_offset=1000)
        g, m = reindex(raw, kind="heterogeneous")
        inv_user, inv_item = m.inverse()
        back_src = np.array([inv_user[int(u)] for u in g.src])
        back_dst = np.array([inv_item[int(v)] for v in g.dst])
        assert np.array_equal(back_src, raw.src)
        assert np.array_equal(back_dst, raw.dst)

    def test_contiguous_ranges(self):
        raw = synth.bipartite_stream(30, 11, 300, seed=9, item_offset=10 ** 6)
        g, m = reindex(raw, kind="heterogeneous")
        assert sorted(m.user_map.values()) == list(range(1, 31))
        assert sorted(m.item_map.values()) == list(range(31, 42))
        assert g.n_edges == raw.n_edges
        assert np.array_equal(g.timestamps, raw.timestamps)

    def test_homogeneous_merges_shared_ids(self):
        g = TemporalGraph(src=[1, 2], dst=[2, 1], timestamps=[1.0, 2.0])
        out, m = reindex(g, kind="homogeneous")
        assert out.n_nodes == 2
        assert m.n_nodes == 2

    def test_large_stream_id_compaction(self):
        # many raw ids with huge gaps compact to 1..n and keep every edge
        raw = synth.bipartite_stream(5000, 800, 100_000, seed=1,
                                     item_offset=10 ** 9)
        g, m = reindex(raw, kind="heterogeneous")
        assert g.n_edges == 100_000
        assert g.n_nodes == 5800
        assert int(g.src.max()) == 5000
        assert int(g.dst.max()) == 5800

    def test_unknown_kind(self):
        with pytest.raises(DatasetFormatError):
            reindex(small_graph(), kind="directed")

    def test_empty_graph(self):
        g = TemporalGraph(src=[], dst=[], timestamps=[])
        with pytest.raises(EmptyGraphError):
            reindex(g, kind="homogeneous")


class TestNodeFeatures:
    def test_zero_matrix_with_padding_row(self):
        g, _ = reindex(synth.bipartite_stream(6, 3, 30, seed=0,
                                              item_offset=100), "heterogeneous")
        feats = init_node_features(g, dim=172)
        assert feats.values.shape == (g.n_nodes + 1, 172)
        assert not feats.values.any()

    def test_zero_dim_rejected(self):
        g, _ = reindex(synth.bipartite_stream(6, 3, 30, seed=0,
                                              item_offset=100), "heterogeneous")
        with pytest.raises(DatasetFormatError):
            init_node_features(g, dim=0)
        with pytest.raises(DatasetFormatError):
            init_node_features(g, scheme="random")


class TestStats:
    def test_counts_and_ratios(self):
        g = small_graph()
        s = compute_stats(g)
        assert s.n_nodes == 3
        assert s.n_edges == 4
        assert s.avg_degree == pytest.approx(4 / 3)
        assert s.edge_density == pytest.approx(4 / (2 * 2))
        assert (s.time_min, s.time_max) == (1.0, 4.0)

    def test_density_can_exceed_one(self):
        g = TemporalGraph(src=[1, 1, 1], dst=[2, 2, 2],
                          timestamps=[1.0, 2.0, 3.0])
        assert compute_stats(g).edge_density == 3.0

    def test_empty_graph_rejected(self):
        with pytest.raises(EmptyGraphError):
            compute_stats(TemporalGraph(src=[], dst=[], timestamps=[]))


class TestTemporalHistogram:
    def test_counts_sum_and_last_bin_closed(self):
        g = TemporalGraph(src=[1] * 5, dst=[2] * 5,
                          timestamps=[0.0, 1.0, 2.0, 3.0, 4.0])
        h = temporal_histogram(g, bins=4)
        assert h.counts.sum() == 5
        assert h.counts.tolist() == [1, 1, 1, 2]  # t=3 and t=4 share the last bin
        assert len(h.bin_edges) == 5

    def test_equal_width_bins(self):
        rng = SeededRng(3)
        ts = np.sort(rng.uniform(0, 100, size=500))
        g = TemporalGraph(src=[1] * 500, dst=[2] * 500, timestamps=ts)
        h = temporal_histogram(g, bins=7)
        widths = np.diff(h.bin_edges)
        assert np.allclose(widths, widths[0])
        assert h.counts.sum() == 500

    def test_degenerate_span_all_mass_in_bin_zero(self):
        g = TemporalGraph(src=[1, 1, 1], dst=[2, 2, 2],
                          timestamps=[5.0, 5.0, 5.0])
        h = temporal_histogram(g, bins=3)
        assert h.counts.tolist() == [3, 0, 0]
        assert np.all(np.diff(h.bin_edges) > 0)

    def test_csv_layout(self):
        g = small_graph()
        text = temporal_histogram(g, bins=2).to_csv()
        lines = text.strip().split("\n")
        assert lines[0] == "bin_start,bin_end,count"
        assert len(lines) == 3
        start, end, count = lines[1].split(",")
        assert float(end) > float(start)
        assert int(count) >= 0

    def test_invalid_bins(self):
        with pytest.raises(ValueError):
            temporal_histogram(small_graph(), bins=0)
