import json
import math
import subprocess
import sys

import numpy as np
import pytest

from entity_entropy.cli import main
from entity_entropy.genmodel import DocSchedule, GenParams
from entity_entropy.reports import read_csv
from entity_entropy.synthetic import write_synthetic_corpus

FIVE = {
    "alpha": {f"d{i}": 1 for i in range(8)},
    "beta": {"d0": 5},
    "gamma": {"d1": 2, "d2": 1},
    "delta": {"d3": 3, "d4": 3, "d5": 1},
    "eps": {"d9": 1},
}


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def five(corpus_files):
    return corpus_files(FIVE, dates={f"d{i}": i for i in range(10)},
                        categories={"alpha": "PRODUCT", "beta": "PERSON"})


class TestAnalyze:
    def test_outputs(self, five, tmp_path):
        out = tmp_path / "out"
        assert run("analyze", "--corpus", five, "--out", out) == 0
        for name in ("entropy_profiles", "size_entropy", "coverage_rank"):
            assert len(read_csv(out / f"{name}.csv")) == 5
        hist = read_csv(out / "entropy_histogram.csv")
        assert len(hist) == 50
        assert sum(int(r["count"]) for r in hist) == 5
        assert float(hist[-1]["bin_right"]) == pytest.approx(math.log2(9))
        profiles = {r["entity_id"]: r for r in read_csv(out / "entropy_profiles.csv")}
        assert float(profiles["alpha"]["entropy_bits"]) == 3.0
        assert float(profiles["beta"]["entropy_bits"]) == 0.0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["n_entities"] == 5
        assert summary["n_documents"] == 9
        kde = read_csv(out / "entropy_kde.csv")
        x = [float(r["entropy_bits"]) for r in kde]
        y = [float(r["density"]) for r in kde]
        assert np.trapezoid(y, x) == pytest.approx(1.0, rel=0.01)
        cats = read_csv(out / "category_stats.csv")
        assert [c["category"] for c in cats] == ["PERSON", "PRODUCT"]

    def test_empty_corpus(self, corpus_files, tmp_path, capsys):
        assert run("analyze", "--corpus", corpus_files({}), "--out", tmp_path / "o") == 2
        assert "no entities admitted" in capsys.readouterr().err

    def test_filtered_to_empty(self, five, tmp_path):
        assert run("analyze", "--corpus", five, "--min-docs", 99, "--out", tmp_path / "o") == 2

    def test_bad_corpus(self, corpus_files, tmp_path, capsys):
        base = corpus_files(FIVE)
        (base / "facts.jsonl").write_text('{"fact_id": "x", "entity_id": "alpha", "doc_id": "dX"}\n')
        assert run("analyze", "--corpus", base, "--out", tmp_path / "o") == 1
        assert "dangling doc reference" in capsys.readouterr().err

    def test_missing_files(self, tmp_path):
        assert run("analyze", "--corpus", tmp_path / "nowhere", "--out", tmp_path / "o") == 1

    def test_config_defaults_and_flag_override(self, five, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"threshold": 0.5, "bins": 10}))
        out = tmp_path / "o"
        assert run("analyze", "--corpus", five, "--config", cfg, "--bins", 20, "--out", out) == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["coverage_threshold"] == 0.5
        assert len(read_csv(out / "entropy_histogram.csv")) == 20

    def test_figures_opt_in(self, five, tmp_path):
        plain, figs = tmp_path / "plain", tmp_path / "figs"
        run("analyze", "--corpus", five, "--out", plain)
        assert not list(plain.glob("*.png"))
        run("analyze", "--corpus", five, "--out", figs, "--figures")
        assert {p.name for p in figs.glob("*.png")} == {
            "entropy_distribution.png", "size_entropy.png", "coverage_rank.png"}


class TestOverlap:
    def test_clique(self, corpus_files, tmp_path):
        base = corpus_files({"a": {"d": 1}, "b": {"d": 2}, "c": {"d": 1}})
        out = tmp_path / "o"
        assert run("overlap", "--corpus", base, "--out", out) == 0
        assert json.loads((out / "connectivity.json").read_text())["connectivity"] == 1.0

    def test_disjoint(self, corpus_files, tmp_path):
        base = corpus_files({"a": {"x": 1}, "b": {"y": 1}})
        out = tmp_path / "o"
        run("overlap", "--corpus", base, "--out", out)
        assert json.loads((out / "connectivity.json").read_text())["connectivity"] == 0.0
        assert read_csv(out / "overlap_edges.csv") == []

    def test_hub(self, corpus_files, tmp_path):
        tables = {f"h{i}": {"shared": 1, f"own{i}a": 1, f"own{i}b": 1} for i in range(5)}
        tables |= {f"x{i:02d}": {f"solo{i}": 1} for i in range(95)}
        out = tmp_path / "o"
        assert run("overlap", "--corpus", corpus_files(tables), "--top-k", 5, "--out", out) == 0
        report = json.loads((out / "connectivity.json").read_text())
        assert report["connectivity"] == pytest.approx(10 / 4950)
        assert report["top_k"]["connectivity"] == 1.0
        with open(out / "adjacency_top5.csv") as fh:
            assert fh.readline().strip() == "h0,h1,h2,h3,h4"


class TestTemporal:
    def test_series_and_bursts(self, corpus_files, tmp_path):
        base = corpus_files({"e": {"A": 2, "B": 2}}, dates={"A": 0, "B": 5})
        out = tmp_path / "o"
        assert run("temporal", "--corpus", base, "--horizon", 7, "--burst-threshold", 1.0,
                   "--out", out) == 0
        series = [float(r["entropy_bits"]) for r in read_csv(out / "entropy_series.csv")]
        assert series == [0, 0, 0, 0, 0, 1, 1, 1]
        bursts = read_csv(out / "bursts.csv")
        assert [(b["entity_id"], b["day_offset"]) for b in bursts] == [("e", "5")]

    def test_amplified_jump(self, corpus_files, tmp_path):
        docs = {f"B{i}": 1 for i in range(6)}
        base = corpus_files({"e": {"A": 1} | docs}, dates={"A": 0} | {d: 5 for d in docs})
        out = tmp_path / "o"
        run("temporal", "--corpus", base, "--burst-threshold", 1.0, "--out", out)
        (row,) = read_csv(out / "bursts.csv")
        assert float(row["delta_bits"]) == pytest.approx(math.log2(7))

    def test_single_doc_entities_on_origin(self, corpus_files, tmp_path):
        base = corpus_files({"a": {"x": 3}, "b": {"y": 1}, "late": {"z": 1}},
                            dates={"x": 0, "y": 0, "z": 95})
        out = tmp_path / "o"
        run("temporal", "--corpus", base, "--horizon", 90, "--out", out)
        rows = read_csv(out / "early_final.csv")
        assert len(rows) == 3
        assert all(float(r["early"]) == float(r["final"]) == 0.0 for r in rows)

    def test_undated_entities_skipped(self, corpus_files, tmp_path, caplog):
        base = corpus_files({"dated": {"A": 1, "B": 1}, "undated": {"U": 1}},
                            dates={"A": 0, "B": 1})
        out = tmp_path / "o"
        assert run("temporal", "--corpus", base, "--out", out) == 0
        ids = {r["entity_id"] for r in read_csv(out / "entropy_series.csv")}
        assert ids == {"dated"}
        assert "temporal analysis unavailable" in caplog.text

    def test_all_undated(self, corpus_files, tmp_path):
        assert run("temporal", "--corpus", corpus_files({"u": {"U": 1}}), "--out", tmp_path) == 2


class TestSimulate:
    def test_closed_form(self, tmp_path):
        params = tmp_path / "p.json"
        params.write_text(json.dumps({"alpha_e": 0.5}))
        sched = tmp_path / "s.txt"
        sched.write_text(" ".join(["1"] * 100))
        out = tmp_path / "o"
        assert run("simulate", "--params", params, "--schedule", sched, "--mode", "expectation",
                   "--out", out) == 0
        h = [float(r["entropy_bits"]) for r in read_csv(out / "trajectory.csv")]
        np.testing.assert_allclose(h, np.log2(np.arange(1, 101)), atol=1e-9)

    def test_byte_identical(self, tmp_path):
        params = tmp_path / "p.json"
        params.write_text(json.dumps({"alpha_e": 0.3, "alpha_local": 1, "alpha_global": 2,
                                      "alpha_docs": 3}))
        for name in ("a", "b"):
            assert run("simulate", "--params", params, "--days", 60, "--seed", 4,
                       "--out", tmp_path / name) == 0
        for f in ("trajectory.csv", "doc_facts.csv", "doc_schedule.csv", "simulation.json"):
            assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()

    def test_invalid_params(self, tmp_path, capsys):
        params = tmp_path / "p.json"
        params.write_text(json.dumps({"alpha_docs": -1}))
        assert run("simulate", "--params", params, "--days", 5, "--out", tmp_path / "o") == 1
        assert "alpha_docs" in capsys.readouterr().err

    def test_corpus_schedule(self, corpus_files, tmp_path):
        base = corpus_files({"e": {"A": 1, "B": 1, "C": 1}}, dates={"A": 0, "B": 0, "C": 2})
        params = tmp_path / "p.json"
        params.write_text("{}")
        out = tmp_path / "o"
        assert run("simulate", "--params", params, "--schedule", "corpus", "--corpus", base,
                   "--out", out) == 0
        assert [r["documents"] for r in read_csv(out / "doc_schedule.csv")] == ["2", "0", "1"]

    def test_population_right_skewed(self, tmp_path):
        out = tmp_path / "o"
        assert run("simulate", "--population", "heavy-tail", "--days", 120,
                   "--n-entities", 500, "--out", out) == 0
        summary = json.loads((out / "population_summary.json").read_text())
        assert summary["entropy_mean"] > summary["entropy_median"]
        hist = read_csv(out / "population_histogram.csv")
        assert sum(int(r["count"]) for r in hist) == summary["n_admitted"]

    def test_requires_params(self, tmp_path):
        assert run("simulate", "--days", 5, "--out", tmp_path) == 1


@pytest.fixture(scope="module")
def synthetic(tmp_path_factory):
    base = tmp_path_factory.mktemp("synthetic")
    rng = np.random.default_rng(8)
    params = {f"e{i}": GenParams(alpha_e=float(rng.uniform(0.2, 2)),
                                 alpha_local=float(rng.uniform(0, 3)),
                                 alpha_global=float(rng.uniform(0, 3)),
                                 alpha_docs=1000, mu_facts=5.0, sigma_facts=0.05)
              for i in range(3)}
    write_synthetic_corpus(base, params, DocSchedule.constant(2, 181), seed=3)
    return base


class TestFit:
    def test_recovery_and_windows(self, synthetic, tmp_path):
        out = tmp_path / "o"
        assert run("fit", "--corpus", synthetic, "--restarts", 2, "--out", out) == 0
        results = read_csv(out / "fit_results.csv")
        assert len(results) == 9
        for eid in ("e0", "e1", "e2"):
            assert sorted(int(r["train_days"]) for r in results if r["entity_id"] == eid) == [30, 60, 90]
        train = read_csv(out / "fit_summary_train.csv")
        assert [int(r["train_days"]) for r in train] == [30, 60, 90]
        assert all(float(r["mean_rmse"]) < 0.05 for r in train)
        test = read_csv(out / "fit_summary.csv")
        assert [int(r["valid_samples"]) for r in test] == [3, 3, 3]
        assert json.loads((out / "global_params.json").read_text())["fitted_from_corpus"]

    def test_zero_entropy_only(self, corpus_files, tmp_path, capsys):
        base = corpus_files({"a": {"x": 4}, "b": {"y": 2}}, dates={"x": 0, "y": 300})
        assert run("fit", "--corpus", base, "--out", tmp_path / "o") == 2
        assert "no entities eligible" in capsys.readouterr().err


def test_module_entry_point(five, tmp_path):
    proc = subprocess.run([sys.executable, "-m", "entity_entropy", "overlap", "--corpus", str(five),
                           "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "connectivity" in proc.stdout
