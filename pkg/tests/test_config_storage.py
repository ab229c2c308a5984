"""설정 파일 파싱과 CSV 입출력"""
import os

import numpy as np
import pytest

from config import (
    ConfigError,
    ExperimentConfig,
    build_config,
    get_config,
    load_config,
    parse_config_text,
    reset_config,
    set_config,
)
from conftest import save_complex, save_real, write_config
from storage import (
    InputError,
    TableWriter,
    file_digest,
    format_header,
    input_files,
    output_session,
    read_matrix,
    read_real,
    read_vector,
)


class TestParseConfig:

    def test_comments_and_sections(self):
        text = "# 주석\n[network]\nn = 2\n; 또 주석\n\n[run]\nseed = 7\n"
        assert parse_config_text(text) == {"n": "2", "seed": "7"}

    def test_dashes_become_underscores(self):
        assert parse_config_text("step-size = 0.1") == {"step_size": "0.1"}

    def test_duplicate_key_across_sections(self):
        with pytest.raises(ConfigError):
            parse_config_text("[a]\nseed = 1\n[b]\nseed = 2\n")

    def test_line_without_equals(self):
        with pytest.raises(ConfigError):
            parse_config_text("seed 1")


class TestBuildConfig:

    def test_conversions(self):
        config = build_config({
            "mode": "simulate-local",
            "seed": "3",
            "n": "3",
            "measured": "1, 2",
            "threshold": "none",
            "t_large_assumed": "yes",
            "path": "10,00",
        })
        assert config.measured == (1, 2)
        assert config.threshold is None
        assert config.t_large_assumed is True
        assert config.path == ("10", "00")
        assert config.local_measurement

    def test_paths_resolved_against_config_dir(self, tmp_path):
        config = build_config({"mode": "transition", "unitaries": "u_a, /abs/u_b", "p0": "p0.csv"}, str(tmp_path))
        assert config.unitaries == (os.path.join(str(tmp_path), "u_a"), "/abs/u_b")
        assert config.p0 == os.path.join(str(tmp_path), "p0.csv")

    def test_inline_p0_kept(self, tmp_path):
        config = build_config({"mode": "transition", "p0": "0.5,0.5"}, str(tmp_path))
        assert config.p0 == "0.5,0.5"

    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            build_config({"mode": "transition", "colour": "red"})

    def test_bad_value(self):
        with pytest.raises(ConfigError):
            build_config({"mode": "transition", "runs": "many"})

    @pytest.mark.parametrize("mode", ["simulate-global", "simulate-local", "realize", "hitting"])
    def test_seed_required(self, mode):
        with pytest.raises(ConfigError):
            build_config({"mode": mode})

    def test_seed_not_required_for_exact_modes(self):
        assert build_config({"mode": "path-prob"}).seed is None

    def test_counts_positive(self):
        with pytest.raises(ConfigError):
            build_config({"mode": "transition", "steps": "0"})

    def test_thread_default_from_environment(self, monkeypatch):
        monkeypatch.setattr("config.DEFAULT_THREADS", "4")
        assert build_config({"mode": "transition"}).threads == 4
        monkeypatch.setattr("config.DEFAULT_THREADS", "many")
        with pytest.raises(ConfigError):
            build_config({"mode": "transition"})
        assert build_config({"mode": "transition", "threads": "2"}).threads == 2

    def test_require(self):
        config = build_config({"mode": "transition"})
        assert config.missing("unitaries", "n") == ["unitaries", "n"]
        with pytest.raises(ConfigError):
            config.require("unitaries")


class TestLoadConfig:

    def test_flags_override_file(self, tmp_path):
        path = write_config(tmp_path / "run.conf", mode="simulate-global", seed=1, runs=10)
        config = load_config(path, "simulate-global", {"runs": 99, "steps": None})
        assert config.seed == 1
        assert config.runs == 99
        assert config.steps == 1

    def test_mode_mismatch(self, tmp_path):
        path = write_config(tmp_path / "run.conf", mode="realize", seed=1)
        with pytest.raises(ConfigError):
            load_config(path, "hitting")

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(str(tmp_path / "nope.conf"), "transition")

    def test_no_file(self):
        assert load_config(None, "transition").mode == "transition"


class TestConfigContext:

    def test_set_and_reset(self):
        assert get_config() is None
        config = ExperimentConfig(mode="transition")
        token = set_config(config)
        assert get_config() is config
        reset_config(token)
        assert get_config() is None


class TestStorage:

    def test_complex_pair_round_trip(self, tmp_path):
        M = np.array([[1 + 2j, -0.5j], [0.25, 3.0]])
        prefix = save_complex(tmp_path / "m", M)
        np.testing.assert_array_equal(read_matrix(prefix), M)
        np.testing.assert_array_equal(read_matrix(prefix + ".re.csv"), M)
        assert input_files(prefix) == [prefix + ".re.csv", prefix + ".im.csv"]

    def test_real_file(self, tmp_path):
        path = save_real(tmp_path / "w.csv", np.eye(2))
        np.testing.assert_array_equal(read_real(path), np.eye(2))

    def test_read_real_rejects_complex(self, tmp_path):
        prefix = save_complex(tmp_path / "m", [[1j]])
        with pytest.raises(InputError):
            read_real(prefix)

    def test_vector_row_or_column(self, tmp_path):
        row = save_real(tmp_path / "row.csv", [[1, 2, 3]])
        col = save_real(tmp_path / "col.csv", [[1], [2], [3]])
        np.testing.assert_array_equal(read_vector(row), [1, 2, 3])
        np.testing.assert_array_equal(read_vector(col), [1, 2, 3])

    def test_vector_rejects_matrix(self, tmp_path):
        with pytest.raises(InputError):
            read_vector(save_real(tmp_path / "m.csv", np.eye(2)))

    def test_missing_input(self, tmp_path):
        with pytest.raises(InputError):
            read_matrix(str(tmp_path / "absent"))

    def test_garbage_input(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1,2\nthree,4\n", encoding="utf-8")
        with pytest.raises(InputError):
            read_matrix(str(path))

    def test_digest_tracks_content(self, tmp_path):
        path = save_real(tmp_path / "w.csv", np.eye(2))
        first = file_digest(path)
        assert len(first) == 16
        assert file_digest(path) == first
        save_real(path, 2 * np.eye(2))
        assert file_digest(path) != first


class TestTableWriter:

    def test_header_has_no_timestamp(self):
        header = format_header("transition", None, {"u": "abc", "a": "def"})
        assert header == "mode=transition seed=- inputs=a:def,u:abc"

    def test_table_is_readable_back(self, tmp_path):
        writer = TableWriter(str(tmp_path), "mode=test seed=1 inputs=-")
        rows = np.array([[0, 0.1, 0.9], [1, 0.25, 0.75]])
        path = writer.write_table("t.csv", rows, ["t", "a", "b"], int_columns=1)
        lines = open(path, encoding="utf-8").read().splitlines()
        assert lines[0] == "# mode=test seed=1 inputs=-"
        assert lines[1] == "# t,a,b"
        assert lines[2].startswith("0,")
        np.testing.assert_array_equal(read_matrix(path).real, rows)
        assert writer.written == [path]

    def test_column_count_checked(self, tmp_path):
        writer = TableWriter(str(tmp_path), "h")
        with pytest.raises(ValueError):
            writer.write_table("t.csv", np.zeros((2, 2)), ["only"])

    def test_complex_output(self, tmp_path):
        M = np.array([[1j, 2.0], [0.5, -1j]])
        with output_session(str(tmp_path / "out"), "realize", 5, {}) as writer:
            writer.write_complex("fitted_u", M)
        np.testing.assert_array_equal(read_matrix(str(tmp_path / "out" / "fitted_u")), M)
