"""Tests for the flat key = value run configuration."""

import argparse

import pytest

import config
from utils.errors import ConfigError, InvalidInstanceError
from utils.run_config import (
    CONFIG_KEYS,
    add_config_arguments,
    config_from_args,
    load_config,
    read_config_file,
)


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(
        "# example instance\n"
        "mu = 0.5\n"
        "p = 0.7   # prior\n"
        "\n"
        "c2 = 2\n"
        "offsets = -0.1, 0, 0.1\n"
        "use_tail = false\n"
        "seed = 99\n",
        encoding="utf-8",
    )
    return str(path)


class TestReadConfigFile:
    def test_comments_and_blank_lines(self, config_file):
        entries = read_config_file(config_file)
        assert entries["p"] == "0.7"
        assert entries["offsets"] == "-0.1, 0, 0.1"
        assert len(entries) == 6

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            read_config_file(str(tmp_path / "absent.cfg"))

    def test_line_without_equals(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("mu 0.5\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="bad.cfg:1"):
            read_config_file(str(path))

    def test_duplicate_key(self, tmp_path):
        path = tmp_path / "dup.cfg"
        path.write_text("mu = 0.5\nmu = 0.6\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="duplicate"):
            read_config_file(str(path))


class TestLoadConfig:
    def test_defaults(self):
        run = load_config(environ={})
        assert run.params.mu == config.MU
        assert run.params.c2 == config.C2
        assert run.sim.dt == config.DT
        assert run.n_paths == config.N_PATHS
        assert run.estimator == "conditioned"
        assert run.offsets == config.OFFSETS
        assert run.use_tail

    def test_file_values(self, config_file):
        run = load_config(config_file, environ={})
        assert run.params.mu == 0.5
        assert run.params.p == 0.7
        assert run.params.c2 == 2.0
        assert run.offsets == (-0.1, 0.0, 0.1)
        assert not run.use_tail
        assert run.sim.seed == 99

    def test_overrides_win(self, config_file):
        run = load_config(config_file, {"mu": "0.25", "n_paths": "500"}, environ={})
        assert run.params.mu == 0.25
        assert run.n_paths == 500
        assert run.params.p == 0.7

    def test_environment_variable_names_the_file(self, config_file):
        run = load_config(environ={config.CONFIG_ENV_VAR: config_file})
        assert run.params.mu == 0.5

    def test_default_horizon_follows_the_instance(self):
        run = load_config(overrides={"mu": "0.5", "dt": "0.01"}, environ={})
        assert run.sim.t_max == pytest.approx(10_000 * 0.01 * 4)

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "typo.cfg"
        path.write_text("mu = 0.5\nnpaths = 10\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="npaths"):
            load_config(str(path), environ={})

    @pytest.mark.parametrize("key, value", [("mu", "fast"), ("seed", "1.5"), ("use_tail", "maybe"),
                                            ("offsets", "0, x")])
    def test_unparsable_values(self, key, value):
        with pytest.raises(ConfigError, match=key):
            load_config(overrides={key: value}, environ={})

    def test_invalid_instance(self):
        with pytest.raises(InvalidInstanceError, match="c2"):
            load_config(overrides={"c2": "-1"}, environ={})

    @pytest.mark.parametrize("key, value", [("estimator", "naive"), ("workers", "0"), ("x_n", "1"),
                                            ("grid_size", "10"), ("tol", "0")])
    def test_invalid_run_options(self, key, value):
        with pytest.raises(ConfigError):
            load_config(overrides={key: value}, environ={})

    def test_echo_covers_every_key_but_workers(self, config_file):
        echo = load_config(config_file, environ={}).to_dict()
        assert set(echo) == set(CONFIG_KEYS) - {"workers"}
        assert echo["offsets"] == [-0.1, 0.0, 0.1]

    def test_worker_count_does_not_change_the_echo(self):
        one = load_config(overrides={"workers": "1"}, environ={}).to_dict()
        four = load_config(overrides={"workers": "4"}, environ={}).to_dict()
        assert one == four


class TestArguments:
    def test_flags_override_the_file(self, config_file):
        parser = argparse.ArgumentParser()
        add_config_arguments(parser)
        args = parser.parse_args(["--config", config_file, "--n-paths", "300", "--c2=3"])
        run = config_from_args(args)
        assert run.n_paths == 300
        assert run.params.c2 == 3.0
        assert run.params.mu == 0.5

    def test_every_key_has_a_flag(self):
        parser = argparse.ArgumentParser()
        add_config_arguments(parser)
        args = parser.parse_args([])
        assert all(getattr(args, key) is None for key in CONFIG_KEYS)
