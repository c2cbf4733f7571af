import math

import numpy as np
import pytest

from resetfreq.closed_loop import ClosedLoopConfig
from resetfreq.config import AnalysisConfig, ConfigError, config_from_dict, load_config
from resetfreq.lti import FrfTable, evaluate
from resetfreq.presets import closed_loop_demo, motion_stage_plant

PI = math.pi


def minimal_blocks():
    return {
        "c1": {"gain": 1.0},
        "c2": {"gain": 0.0},
        "c3": {"num": [1.0], "den": [1.0, 1.0]},
        "c4": {"gain": 1.0},
        "cs": {"gain": 1.0},
    }


def minimal_config():
    return {
        "blocks": minimal_blocks(),
        "reset": {"num": [1.0], "den": [1.0, 0.0], "gamma": 0.0},
        "plant": {"num": [1.0], "den": [1.0, 2.0]},
    }


class TestSchema:
    def test_preset_config(self):
        cfg = config_from_dict({"preset": "closed_loop_demo"})
        system = cfg.system()
        assert isinstance(system, ClosedLoopConfig)
        ref = closed_loop_demo()
        assert system.cr.gamma == ref.cr.gamma

    def test_unknown_preset(self):
        with pytest.raises(ConfigError, match="unknown preset"):
            config_from_dict({"preset": "nope"})

    def test_preset_and_blocks_conflict(self):
        data = minimal_config()
        data["preset"] = "closed_loop_demo"
        with pytest.raises(ConfigError, match="not both"):
            config_from_dict(data)

    def test_explicit_config_builds(self):
        cfg = config_from_dict(minimal_config())
        system = cfg.system()
        assert evaluate(system.plant, 0.0) == pytest.approx(0.5)
        assert system.cr.gamma == 0.0

    def test_missing_block_named(self):
        data = minimal_config()
        del data["blocks"]["cs"]
        with pytest.raises(ConfigError, match="cs"):
            config_from_dict(data)

    def test_empty_denominator_rejected(self):
        data = minimal_config()
        data["blocks"]["c3"] = {"num": [1.0], "den": []}
        with pytest.raises(ConfigError, match="c3|den"):
            config_from_dict(data)

    def test_gamma_out_of_range(self):
        data = minimal_config()
        data["reset"]["gamma"] = 1.5
        with pytest.raises(ConfigError, match="gamma"):
            config_from_dict(data)

    def test_block_variant_exclusivity(self):
        data = minimal_config()
        data["blocks"]["c1"] = {"gain": 1.0, "num": [1.0], "den": [1.0]}
        with pytest.raises(ConfigError, match="exactly one"):
            config_from_dict(data)

    def test_frf_plant_allowed_only_for_plant(self, tmp_path):
        w = np.geomspace(1.0, 1e4, 40)
        vals = evaluate(motion_stage_plant(), w)
        path = tmp_path / "frf.csv"
        path.write_text(
            "freq_hz,re,im\n" + "\n".join(
                f"{wi/(2*PI)},{v.real},{v.imag}" for wi, v in zip(w, vals)
            )
        )
        data = minimal_config()
        data["plant"] = {"frf_csv": str(path)}
        system = config_from_dict(data).system()
        assert isinstance(system.plant, FrfTable)

        data2 = minimal_config()
        data2["blocks"]["c1"] = {"frf_csv": str(path)}
        with pytest.raises(ConfigError, match="plant only"):
            config_from_dict(data2).system()

    def test_analysis_defaults_and_frequencies(self):
        cfg = config_from_dict({"preset": "closed_loop_demo"})
        assert cfg.analysis.harmonics == 100
        freqs = cfg.frequencies_rad()
        assert freqs[0] == pytest.approx(2 * PI)
        assert freqs[-1] == pytest.approx(2000 * PI)
        assert freqs.size == cfg.analysis.points

    def test_invalid_range(self):
        with pytest.raises(ConfigError):
            config_from_dict({
                "preset": "closed_loop_demo",
                "analysis": {"f_start_hz": 10.0, "f_end_hz": 1.0},
            })

    def test_extra_keys_rejected(self):
        with pytest.raises(ConfigError):
            config_from_dict({"preset": "closed_loop_demo", "bogus": 1})


class TestLoadConfig:
    def test_yaml_round_trip(self, tmp_path):
        path = tmp_path / "cfg.yaml"
        path.write_text(
            "preset: closed_loop_demo\nanalysis:\n  points: 7\n"
        )
        cfg = load_config(path)
        assert cfg.analysis.points == 7

    def test_missing_file(self):
        with pytest.raises(ConfigError, match="not found"):
            load_config("/nonexistent/path.yaml")

    def test_invalid_yaml(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("preset: [unclosed\n")
        with pytest.raises(ConfigError, match="YAML"):
            load_config(path)

    def test_non_mapping_top_level(self, tmp_path):
        path = tmp_path / "list.yaml"
        path.write_text("- a\n- b\n")
        with pytest.raises(ConfigError, match="mapping"):
            load_config(path)

    def test_bundled_examples_parse(self):
        import pathlib

        root = pathlib.Path(__file__).resolve().parents[1] / "configs"
        for name in ("closed_loop_demo.yaml", "explicit_example.yaml"):
            cfg = load_config(root / name)
            cfg.system()


class TestEquivalence:
    def test_explicit_matches_preset(self):
        import pathlib

        from resetfreq.closed_loop import sensitivity_n

        root = pathlib.Path(__file__).resolve().parents[1] / "configs"
        explicit = load_config(root / "explicit_example.yaml").system()
        preset = closed_loop_demo()
        for w in (10.0, 628.0, 4000.0):
            a = sensitivity_n(preset, 3, w, 21)
            b = sensitivity_n(explicit, 3, w, 21)
            assert b == pytest.approx(a, rel=1e-9)
