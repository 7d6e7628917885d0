import csv
import json

import pytest

from storynets.cli import main
from storynets.netfeat import FEATURE_NAMES


@pytest.fixture(scope="module")
def pipeline(corpus40_csv, corpus40_conllu, tmp_path_factory):
    """One full featurize -> train -> evaluate -> explain run, shared."""
    out = tmp_path_factory.mktemp("pipeline")
    base = ["--corpus", str(corpus40_csv), "--out", str(out)]
    assert main(["featurize", *base,
                 "--conllu-dir", str(corpus40_conllu)]) == 0
    matrix = str(out / "features" / "features_scaled.csv")
    ml = ["--matrix", matrix, "--corpus", str(corpus40_csv),
          "--out", str(out), "--rounds", "25"]
    assert main(["train", *ml]) == 0
    assert main(["evaluate", *ml, "--folds", "4"]) == 0
    assert main(["explain", "--matrix", matrix, "--out", str(out),
                 "--model-file", str(out / "models" / "gbt.json")]) == 0
    return out


class TestFeaturize:
    def test_artifacts(self, pipeline):
        features = pipeline / "features"
        for name in ("features_raw.csv", "features_scaled.csv", "scaling.json"):
            assert (features / name).exists()
        assert len(list((features / "edges").glob("*.tsv"))) == 40
        assert (pipeline / "reports" / "featurize_diagnostics.csv").exists()

    def test_scaled_matrix_is_unit_interval(self, pipeline):
        with open(pipeline / "features" / "features_scaled.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 40
        for row in rows:
            for name in FEATURE_NAMES:
                assert 0.0 <= float(row[name]) <= 1.0

    def test_scaling_json_names_features(self, pipeline):
        scaling = json.loads(
            (pipeline / "features" / "scaling.json").read_text())
        assert scaling["feature_names"] == list(FEATURE_NAMES)
        assert len(scaling["min"]) == 13
        assert len(scaling["max"]) == 13

    def test_missing_conllu_dir_is_input_error(self, corpus40_csv, tmp_path,
                                               capsys):
        rc = main(["featurize", "--corpus", str(corpus40_csv),
                   "--conllu-dir", str(tmp_path / "nowhere"),
                   "--out", str(tmp_path / "out")])
        assert rc == 2
        assert "error:" in capsys.readouterr().err


class TestTrain:
    def test_model_file_shape(self, pipeline):
        model = json.loads((pipeline / "models" / "gbt.json").read_text())
        assert model["feature_names"] == list(FEATURE_NAMES)
        assert model["params"]["rounds"] == 25
        assert model["base_score"] == 0.0

    def test_mean_rating_mode_with_baseline(self, pipeline, corpus40_csv,
                                            tmp_path):
        out = tmp_path / "out"
        rc = main(["train", "--matrix",
                   str(pipeline / "features" / "features_scaled.csv"),
                   "--corpus", str(corpus40_csv), "--out", str(out),
                   "--rating-mode", "mean", "--model", "decision_tree"])
        assert rc == 0
        assert (out / "models" / "decision_tree.json").exists()


class TestEvaluate:
    def test_report_tables(self, pipeline):
        md = (pipeline / "reports" / "classification_report.md").read_text()
        assert "| accuracy |" in md
        assert "macro avg" in md and "weighted avg" in md
        assert "Pooled confusion matrix" in md
        metrics = json.loads(
            (pipeline / "reports" / "cv_metrics.json").read_text())
        assert metrics["folds"] == 4
        assert set(metrics["per_class"]) == {"0", "1", "2"}

    def test_confusion_artifacts(self, pipeline):
        with open(pipeline / "reports" / "confusion_matrix.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert len(rows) == 4  # header + 3 classes
        assert (pipeline / "figures" / "confusion_matrix.svg").exists()


class TestExplain:
    def test_artifacts(self, pipeline):
        assert (pipeline / "reports" / "shap_values.csv").exists()
        assert (pipeline / "reports" / "importance.csv").exists()
        assert (pipeline / "figures" / "importance.svg").exists()
        for k in range(3):
            assert (pipeline / "figures" / f"beeswarm_class{k}.svg").exists()

    def test_importance_covers_all_features(self, pipeline):
        with open(pipeline / "reports" / "importance.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 39
        assert {r["feature"] for r in rows} == set(FEATURE_NAMES)

    def test_baseline_model_not_explainable(self, pipeline, corpus40_csv,
                                            tmp_path, capsys):
        out = tmp_path / "out"
        matrix = str(pipeline / "features" / "features_scaled.csv")
        assert main(["train", "--matrix", matrix, "--corpus",
                     str(corpus40_csv), "--out", str(out),
                     "--model", "random_forest", "--n-trees", "3"]) == 0
        rc = main(["explain", "--matrix", matrix, "--out", str(out),
                   "--model-file", str(out / "models" / "random_forest.json")])
        assert rc == 2
        assert "error:" in capsys.readouterr().err


class TestManifest:
    def test_every_command_recorded(self, pipeline):
        manifest = json.loads((pipeline / "manifest.json").read_text())
        assert {"featurize", "train", "evaluate", "explain"} <= set(manifest)
        record = manifest["featurize"]
        assert record["input_digests"]
        assert "features/features_scaled.csv" in record["outputs"]


class TestAuxiliaryCommands:
    def test_ingest(self, corpus40_csv, tmp_path):
        out = tmp_path / "out"
        assert main(["ingest", "--corpus", str(corpus40_csv),
                     "--out", str(out)]) == 0
        assert (out / "features" / "corpus_normalized.csv").exists()
        summary = json.loads(
            (out / "reports" / "corpus_summary.json").read_text())
        assert summary["stories"] == 40
        assert set(summary["by_author"]) == {"human", "llm"}
        assert "length_test" in summary

    def test_compare_matrix_to_itself(self, pipeline, tmp_path):
        out = tmp_path / "out"
        matrix = str(pipeline / "features" / "features_scaled.csv")
        assert main(["compare", "--matrix-a", matrix, "--matrix-b", matrix,
                     "--label-a", "x", "--label-b", "y",
                     "--out", str(out)]) == 0
        with open(out / "reports" / "comparison.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 13
        assert all(float(r["p_value"]) == 1.0 for r in rows)
        assert (out / "figures" / "comparison.svg").exists()

    def test_distributions(self, corpus40_csv, tmp_path):
        out = tmp_path / "out"
        assert main(["distributions", "--corpus", str(corpus40_csv),
                     "--out", str(out)]) == 0
        for name in ("rating_distribution.csv", "class_distribution.csv"):
            assert (out / "reports" / name).exists()
        for name in ("ratings_full.svg", "ratings_classes.svg"):
            assert (out / "figures" / name).exists()

    def test_report_stitches_artifacts(self, pipeline, corpus40_csv):
        assert main(["ingest", "--corpus", str(corpus40_csv),
                     "--out", str(pipeline)]) == 0
        assert main(["report", "--out", str(pipeline)]) == 0
        text = (pipeline / "reports" / "report.md").read_text()
        assert "## " in text
        assert "classification" in text.lower()

    def test_report_without_artifacts_fails(self, tmp_path, capsys):
        rc = main(["report", "--out", str(tmp_path / "fresh")])
        assert rc == 2
        capsys.readouterr()

    def test_generate_rejects_malformed_prompts(self, tmp_path, capsys):
        prompts = tmp_path / "prompts.txt"
        prompts.write_text("stamp, letter, send\npetrol diesel pump\n")
        rc = main(["generate", "--prompts", str(prompts),
                   "--participants", "1", "--out", str(tmp_path / "out"),
                   "--endpoint", "http://unused.test", "--model-name", "m"])
        assert rc == 2
        assert ":2:" in capsys.readouterr().err

    def test_rate_guards_rating_capacity(self, corpus40_csv, tmp_path,
                                         capsys):
        rc = main(["rate", "--corpus", str(corpus40_csv),
                   "--out", str(tmp_path / "out"),
                   "--endpoint", "http://unused.test", "--model-name", "m"])
        assert rc == 2
        assert "replace" in capsys.readouterr().err


class TestConfigFile:
    def test_section_overrides_flag(self, pipeline, corpus40_csv, tmp_path):
        cfg = tmp_path / "cfg.toml"
        cfg.write_text('[train]\nrounds = 5\nseed = 9\n')
        out = tmp_path / "out"
        assert main(["--config", str(cfg), "train",
                     "--matrix",
                     str(pipeline / "features" / "features_scaled.csv"),
                     "--corpus", str(corpus40_csv), "--out", str(out),
                     "--rounds", "50"]) == 0
        model = json.loads((out / "models" / "gbt.json").read_text())
        assert model["params"]["rounds"] == 5
        assert model["params"]["seed"] == 9

    def test_global_section_applies(self, corpus40_csv, tmp_path):
        cfg = tmp_path / "cfg.toml"
        out = tmp_path / "from-config"
        cfg.write_text(f'[global]\nout = "{out}"\n')
        assert main(["--config", str(cfg), "distributions",
                     "--corpus", str(corpus40_csv)]) == 0
        assert (out / "reports" / "rating_distribution.csv").exists()

    def test_unknown_key_rejected(self, corpus40_csv, tmp_path, capsys):
        cfg = tmp_path / "cfg.toml"
        cfg.write_text('[distributions]\nbananas = 4\n')
        rc = main(["--config", str(cfg), "distributions",
                   "--corpus", str(corpus40_csv),
                   "--out", str(tmp_path / "out")])
        assert rc == 2
        assert "bananas" in capsys.readouterr().err

    def test_other_sections_ignored(self, corpus40_csv, tmp_path):
        cfg = tmp_path / "cfg.toml"
        cfg.write_text('[train]\nrounds = 5\n')
        assert main(["--config", str(cfg), "distributions",
                     "--corpus", str(corpus40_csv),
                     "--out", str(tmp_path / "out")]) == 0


class TestParserBasics:
    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as err:
            main(["--version"])
        assert err.value.code == 0
        assert "storynets" in capsys.readouterr().out

    def test_subcommand_required(self):
        with pytest.raises(SystemExit) as err:
            main([])
        assert err.value.code == 2

    def test_unknown_flag_exits_two(self):
        with pytest.raises(SystemExit) as err:
            main(["ingest", "--corpus", "x.csv", "--frobnicate"])
        assert err.value.code == 2

    def test_missing_corpus_is_input_error(self, tmp_path, capsys):
        rc = main(["ingest", "--corpus", str(tmp_path / "absent.csv"),
                   "--out", str(tmp_path / "out")])
        assert rc == 2
        assert "error:" in capsys.readouterr().err
