import json
import subprocess
import sys

import numpy as np
import pytest

from morsemaps.cli import main
from morsemaps.pipeline import ConfigError, PipelineConfig, compute_run, perturb_run, query_run, render_run, synth_run


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    """A complete synth -> perturb -> compute -> render run."""
    d = tmp_path_factory.mktemp("run")
    synth_run(d, "ackley", 64, 64)
    config = PipelineConfig(noise="uniform-signed", scale=0.6, n=8, seed=7, output_dir=str(d))
    perturb_run(d, config)
    summary = compute_run(d, config)
    render_run(d)
    return d, summary


class TestPipeline:
    def test_summary_reports_nine_labels(self, small_run):
        _, summary = small_run
        assert summary["l"] == 9
        assert summary["counts"]["truth_maxima"] == 9
        assert summary["p_f"] > 0

    def test_artifacts_exist(self, small_run):
        d, _ = small_run
        for name in [
            "ground_truth.mcf1",
            "manifest.json",
            "mean_field.mcf1",
            "seg_mean.msg1",
            "seg_truth.msg1",
            "hierarchy_truth.json",
            "mandatory.json",
            "pmap.pmp1",
            "smap.svm1",
            "smap_meta.json",
            "boundaries.json",
            "run_summary.json",
            "render/pmap.png",
            "render/certainty.png",
            "render/survival.png",
            "render/survival_q.png",
            "render/boundaries.png",
        ]:
            assert (d / name).exists(), name

    def test_boundaries_have_three_kinds(self, small_run):
        d, _ = small_run
        doc = json.loads((d / "boundaries.json").read_text())
        assert set(doc) == {"expected", "meanfield", "truth"}
        assert all(doc[k] for k in doc)

    def test_query_matches_pmap(self, small_run):
        d, _ = small_run
        out = query_run(d, 10, 10)
        assert out["r"] == 10 and out["c"] == 10
        assert sum(out["probabilities"]) == pytest.approx(1.0)
        assert len(out["labels"]) == 9

    def test_recompute_is_byte_identical(self, tmp_path):
        config = PipelineConfig(noise="uniform-signed", scale=0.6, n=5, seed=3)
        paths = []
        for sub in ("a", "b"):
            d = tmp_path / sub
            synth_run(d, "four-gaussians", 48, 48)
            perturb_run(d, config)
            compute_run(d, config)
            render_run(d)
            paths.append(d)
        for name in ("pmap.pmp1", "smap.svm1", "render/pmap.png", "render/survival.png"):
            assert (paths[0] / name).read_bytes() == (paths[1] / name).read_bytes(), name


class TestConfig:
    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigError, match="unknown config keys"):
            PipelineConfig.from_json({"n": 3, "bogus": 1})

    def test_scale_amplitude_exclusive(self):
        with pytest.raises(ConfigError, match="exactly one"):
            PipelineConfig(scale=0.5, amplitude=0.1)

    def test_amplitude_only_config(self):
        cfg = PipelineConfig.from_json({"amplitude": 0.25})
        assert cfg.amplitude == 0.25 and cfg.scale is None

    def test_threshold_validation(self):
        with pytest.raises(ConfigError, match="threshold"):
            PipelineConfig(agreement_thresholds=(0.4,))

    def test_bad_noise_kind(self):
        with pytest.raises(ConfigError, match="noise"):
            PipelineConfig(noise="salt-and-pepper")


class TestCli:
    def test_full_chain_via_argv(self, tmp_path):
        d = str(tmp_path / "r")
        assert main(["synth", "--dir", d, "--fn", "four-gaussians", "--size", "48"]) == 0
        assert main(["perturb", "--dir", d, "--noise", "uniform-signed", "--scale", "0.6", "--n", "4", "--seed", "1"]) == 0
        assert main(["compute", "--dir", d]) == 0
        assert main(["render", "--dir", d]) == 0
        assert main(["query", "--dir", d, "--r", "5", "--c", "5"]) == 0

    def test_query_prints_distribution(self, tmp_path, capsys):
        d = str(tmp_path / "r")
        main(["synth", "--dir", d, "--fn", "four-gaussians", "--size", "48"])
        main(["perturb", "--dir", d, "--noise", "uniform", "--scale", "0.5", "--n", "3", "--seed", "2"])
        main(["compute", "--dir", d])
        capsys.readouterr()
        assert main(["query", "--dir", d, "--r", "0", "--c", "0"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert sum(doc["probabilities"]) == pytest.approx(1.0)

    def test_missing_ground_truth_is_data_error(self, tmp_path, capsys):
        code = main(["perturb", "--dir", str(tmp_path / "empty"), "--noise", "uniform", "--scale", "0.5"])
        assert code == 3
        assert "error: data" in capsys.readouterr().err

    def test_bad_config_file_is_config_error(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text("{\"bogus\": 1}")
        code = main(["compute", "--dir", str(tmp_path), "--config", str(cfg)])
        assert code == 2
        assert "error: config" in capsys.readouterr().err

    def test_compute_without_manifest_is_data_error(self, tmp_path, capsys):
        code = main(["compute", "--dir", str(tmp_path)])
        assert code == 3
        err = capsys.readouterr().err
        assert err.startswith("error: data:") and "\n" not in err.strip()

    def test_console_entrypoint_runs(self):
        out = subprocess.run(
            [sys.executable, "-m", "morsemaps.cli", "--help"], capture_output=True, text=True
        )
        assert out.returncode == 0
        assert "synth" in out.stdout

    def test_query_out_of_range_is_data_error(self, tmp_path, capsys):
        d = str(tmp_path / "r")
        main(["synth", "--dir", d, "--fn", "four-gaussians", "--size", "48"])
        main(["perturb", "--dir", d, "--noise", "uniform", "--scale", "0.5", "--n", "3", "--seed", "2"])
        main(["compute", "--dir", d])
        capsys.readouterr()
        assert main(["query", "--dir", d, "--r", "999", "--c", "0"]) == 3


class TestFallbackOverride:
    def test_l_override_uses_position_clusters(self, tmp_path):
        d = tmp_path / "r"
        synth_run(d, "four-gaussians", 64, 64)
        config = PipelineConfig(noise="uniform-signed", scale=0.6, n=6, seed=4, l_override=4)
        perturb_run(d, config)
        summary = compute_run(d, config)
        assert summary["l_override"] == 4
        doc = query_run(d, 1, 1)
        assert len(doc["labels"]) == 4
