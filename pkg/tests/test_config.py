import logging

import pytest

from commons.constants import DEFAULT_SEED, DEFAULT_MAX_GROUP_ORDER, DEFAULT_MAX_ORACLE_TERMS, EXIT_INPUT_ERROR
from commons.funcs_common import InputError, ResourceError, VerificationError, print_error_msg, view_config_file, \
    format_complex, complex_to_pair, pair_to_complex, get_elapsed_time_msg
from commons.mgr_config import ConfigManager, SearchBudget

CONF = """[SETTING]
LOG_LEVEL = {log_level}
TOLERANCE = {tolerance}
THREADS = {threads}

[SEARCH]
RANDOM_STARTS = 10
GRID_RESOLUTION = 20
NEWTON_MAX_ITER = 30
LSQ_STARTS = 40
SEED = {seed}
DETERMINISTIC = {deterministic}

[ARCHIVE]
ARCHIVE_PATH = {archive}

[LIMIT]
MAX_GROUP_ORDER = {max_order}
MAX_ORACLE_TERMS = {max_terms}
"""

DEFAULTS = dict(log_level="INFO", tolerance="1e-9", threads="2", seed="7", deterministic="no", archive="store",
                max_order="32", max_terms="5000")


@pytest.fixture
def conf_dir(tmp_path, monkeypatch):
    (tmp_path / "conf").mkdir()
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("NEARGROUP_TOLERANCE", raising=False)
    return tmp_path / "conf"


def _write(conf_dir, name="test.conf", **values):
    (conf_dir / name).write_text(CONF.format(**{**DEFAULTS, **values}), encoding="utf-8")
    return name


def test_default_config(monkeypatch):
    monkeypatch.delenv("NEARGROUP_TOLERANCE", raising=False)
    config = ConfigManager()
    assert config.config_name == "default.conf"
    assert config.log_level == logging.ERROR
    assert config.tolerance == 1e-10
    assert config.seed == DEFAULT_SEED
    assert config.deterministic is True
    assert config.max_group_order == DEFAULT_MAX_GROUP_ORDER
    assert config.max_oracle_terms == DEFAULT_MAX_ORACLE_TERMS


def test_custom_config(conf_dir):
    config = ConfigManager(_write(conf_dir).replace(".conf", ""))
    assert config.config_name == "test.conf"
    assert config.log_level == logging.INFO
    assert config.tolerance == 1e-9
    assert config.threads == 2
    assert config.random_starts == 10
    assert config.seed == 7
    assert config.deterministic is False
    assert config.archive_path == "store"


def test_config_dict(conf_dir):
    config = ConfigManager(_write(conf_dir))
    data = config.get_config_dict()
    assert set(data) == {"config_name", "setting", "search", "archive"}
    assert data["setting"]["log_level"] == "INFO"
    assert data["search"]["deterministic"] == "no"
    assert data["archive"]["max_group_order"] == 32
    assert data["archive"]["max_oracle_terms"] == 5000
    view = view_config_file(data)
    assert "test.conf" in view
    assert "lsq_starts" in view


def test_search_budget(conf_dir):
    budget = ConfigManager(_write(conf_dir)).get_search_budget()
    assert isinstance(budget, SearchBudget)
    assert budget.newton_max_iter == 30
    assert budget.lsq_starts == 40
    assert budget.max_group_order == 32
    assert budget.max_oracle_terms == 5000
    assert budget.provenance() == {"seed": 7, "deterministic": False, "random_starts": 10, "grid_resolution": 20,
                                   "newton_max_iter": 30, "lsq_starts": 40}


def test_empty_values_fall_back(conf_dir):
    config = ConfigManager(_write(conf_dir, log_level="", tolerance="", seed="", deterministic="", archive=""))
    assert config.log_level == logging.ERROR
    assert config.tolerance == 1e-10
    assert config.seed == DEFAULT_SEED
    assert config.deterministic is True
    assert config.archive_path == "archive"


def test_unknown_log_level_is_error(conf_dir):
    assert ConfigManager(_write(conf_dir, log_level="chatty")).log_level == logging.ERROR


def test_tolerance_environment_override(conf_dir, monkeypatch):
    monkeypatch.setenv("NEARGROUP_TOLERANCE", "1e-6")
    assert ConfigManager(_write(conf_dir)).tolerance == 1e-6
    monkeypatch.setenv("NEARGROUP_TOLERANCE", "0.5")
    with pytest.raises(InputError):
        ConfigManager(_write(conf_dir))


@pytest.mark.parametrize("values", [
    {"tolerance": "abc"},
    {"tolerance": "0"},
    {"threads": "0"},
    {"threads": "two"},
    {"seed": "1.5"},
    {"deterministic": "maybe"},
    {"max_order": "-4"},
    {"max_terms": "0"},
    {"max_terms": "1e6"},
])
def test_invalid_values(conf_dir, values):
    with pytest.raises(InputError):
        ConfigManager(_write(conf_dir, **values))


def test_missing_section(conf_dir):
    text = CONF.format(**DEFAULTS).split("[LIMIT]")[0]
    (conf_dir / "short.conf").write_text(text, encoding="utf-8")
    with pytest.raises(InputError) as err:
        ConfigManager("short.conf")
    assert "LIMIT" in err.value.msg


def test_missing_option(conf_dir):
    text = CONF.format(**DEFAULTS).replace("THREADS = 2\n", "")
    (conf_dir / "short.conf").write_text(text, encoding="utf-8")
    with pytest.raises(InputError) as err:
        ConfigManager("short.conf")
    assert "threads" in err.value.msg.lower()


def test_missing_file(conf_dir):
    with pytest.raises(InputError):
        ConfigManager("no_such_config")


def test_error_exit_codes():
    assert InputError("x").exit_code == 2
    assert VerificationError("x").exit_code == 1
    assert ResourceError("x").exit_code == 3


def test_print_error_msg(capsys):
    with pytest.raises(SystemExit) as err:
        print_error_msg("bad input", EXIT_INPUT_ERROR)
    assert err.value.code == EXIT_INPUT_ERROR
    assert "bad input" in capsys.readouterr().out


def test_complex_helpers():
    assert pair_to_complex(complex_to_pair(1 - 2j)) == 1 - 2j
    assert format_complex(0.5, 2) == "0.50"
    assert format_complex(1 - 0.25j, 2) == "1.00-0.25i"
    assert get_elapsed_time_msg(3.5, 1.25) == "Elapsed Time: 2.25 Sec."


def test_empty_oracle_bound_falls_back(conf_dir):
    assert ConfigManager(_write(conf_dir, max_terms="")).max_oracle_terms == DEFAULT_MAX_ORACLE_TERMS
    assert SearchBudget().max_oracle_terms == DEFAULT_MAX_ORACLE_TERMS
