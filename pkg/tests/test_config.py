import logging

import pytest

from config import ConfigError, Settings, load_settings, parse_overrides, setup_logging


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "mipnet.env"
    path.write_text(
        "# solver\n"
        "MIP__TIME_LIMIT=30\n"
        "MIP__REL_GAP=0\n"
        "HYPER__EPS=0.02\n"
        "hyper__p=2\n"
        "LP__FEASIBILITY_TOL=1e-8\n"
        "EXPERIMENT__ARMS=relu_sgd, binary_sgd\n"
        "EXPERIMENT__SEEDS=4,5\n"
    )
    return path


class TestLoadSettings:
    def test_defaults(self):
        settings = load_settings()
        assert settings == Settings()
        assert settings.mip.time_limit == 300.0
        assert settings.sgd.epochs == 10_000

    def test_file_values(self, config_file):
        settings = load_settings(config_file)
        assert settings.mip.time_limit == 30.0
        assert settings.mip.rel_gap == 0.0
        assert settings.hyper.eps == 0.02
        assert settings.hyper.P == 2
        assert settings.experiment.arms == ["relu_sgd", "binary_sgd"]
        assert settings.experiment.seeds == [4, 5]

    def test_lp_section_reaches_the_solver(self, config_file):
        settings = load_settings(config_file)
        assert settings.lp.feasibility_tol == 1e-8
        assert settings.mip.lp.feasibility_tol == 1e-8

    def test_overrides_win(self, config_file):
        settings = load_settings(config_file, {"MIP__TIME_LIMIT": "5", "SGD__ACTIVATION": "binary_ste"})
        assert settings.mip.time_limit == 5.0
        assert settings.sgd.activation == "binary_ste"
        assert settings.hyper.eps == 0.02

    def test_empty_value_unsets_optional_field(self):
        assert load_settings(overrides={"HYPER__M": ""}).hyper.M is None
        assert load_settings(overrides={"HYPER__M": "12.5"}).hyper.M == 12.5

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_settings(tmp_path / "absent.env")

    @pytest.mark.parametrize("key", ["MIP__NOPE", "SOLVER__TIME_LIMIT", "TIME_LIMIT", "MIP__LP"])
    def test_unknown_keys(self, key):
        with pytest.raises(ConfigError, match="unknown"):
            load_settings(overrides={key: "1"})

    @pytest.mark.parametrize("key,value", [
        ("MIP__TIME_LIMIT", "-1"),
        ("SGD__ACTIVATION", "tanh"),
        ("EXPERIMENT__ARMS", "no_such_arm"),
        ("HYPER__ALPHA_LB", "2"),
    ])
    def test_invalid_values(self, key, value):
        with pytest.raises(ConfigError):
            load_settings(overrides={key: value})


class TestOverrides:
    def test_parse(self):
        assert parse_overrides(["MIP__SEED=3", " SGD__EPOCHS = 10 "]) == {"MIP__SEED": "3", "SGD__EPOCHS": "10"}

    def test_value_may_contain_equals(self):
        assert parse_overrides(["EXPERIMENT__MODE=a=b"]) == {"EXPERIMENT__MODE": "a=b"}

    @pytest.mark.parametrize("pair", ["MIP__SEED", "=3"])
    def test_malformed(self, pair):
        with pytest.raises(ConfigError):
            parse_overrides([pair])


class TestLogging:
    def test_level_from_environment(self, monkeypatch):
        monkeypatch.setenv("LOG_LEVEL", "warning")
        setup_logging()
        assert logging.getLogger().level == logging.WARNING

    def test_invalid_level_falls_back_to_info(self, monkeypatch):
        monkeypatch.setenv("LOG_LEVEL", "chatty")
        setup_logging()
        assert logging.getLogger().level == logging.INFO
