from commons.constants import *
from commons.funcs_common import InputError

import configparser
import logging
import os


def get_value_invalid_msg(config_name, value):
    return f"Configuration value is invalid: [{config_name}] {value}"


def _get_conf_dir():
    """
    conf directory under the working directory, or next to the commons package when the
    working directory has none
    """
    cwd_conf = os.path.join(os.getcwd(), conf_dir_name)
    if os.path.isdir(cwd_conf):
        return cwd_conf
    return os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), conf_dir_name)


class ConfigManager:

    def __init__(self, config_name=None):

        self.conf_dir = _get_conf_dir()

        if config_name is None:
            config_name = default_config_name

        if os.path.splitext(config_name)[1] == "":
            config_name = "".join([config_name, ".conf"])

        self.config_name = config_name

        self.config = configparser.ConfigParser()
        self.config.clear()
        self.config.read(os.path.join(self.conf_dir, self.config_name), encoding="utf-8")

        try:
            self.log_level = self.config.get(SETTING, "LOG_LEVEL")
            self.tolerance = self.config.get(SETTING, "TOLERANCE")
            self.threads = self.config.get(SETTING, "THREADS")

            self.random_starts = self.config.get(SEARCH, "RANDOM_STARTS")
            self.grid_resolution = self.config.get(SEARCH, "GRID_RESOLUTION")
            self.newton_max_iter = self.config.get(SEARCH, "NEWTON_MAX_ITER")
            self.lsq_starts = self.config.get(SEARCH, "LSQ_STARTS")
            self.seed = self.config.get(SEARCH, "SEED")
            self.deterministic = self.config.get(SEARCH, "DETERMINISTIC")

            self.archive_path = self.config.get(ARCHIVE, "ARCHIVE_PATH")

            self.max_group_order = self.config.get(LIMIT, "MAX_GROUP_ORDER")
            self.max_oracle_terms = self.config.get(LIMIT, "MAX_ORACLE_TERMS")

        except configparser.NoOptionError as opterr:
            raise InputError(f"Configuration parameter does not existed: [{opterr.section}] {opterr.option}")

        except configparser.NoSectionError as secerr:
            raise InputError(f"Configuration section does not existed: [{secerr.section}]")

        env_value = os.environ.get(env_tolerance)
        if env_value:
            self.tolerance = env_value

    @property
    def config_name(self):
        return self._config_name

    # config file must exist
    @config_name.setter
    def config_name(self, config_name):
        if os.path.isfile(os.path.join(self.conf_dir, config_name)):
            self._config_name = config_name
        else:
            raise InputError(f"Configuration file ( {config_name} ) does not exist.")

    @property
    def log_level(self):
        return self._log_level

    @log_level.setter
    def log_level(self, log_level):
        if log_level != "":
            log_level_upper = log_level.upper()
            # CRITICAL < ERROR < WARNING < INFO < DEBUG
            if log_level_upper == logging.getLevelName(logging.CRITICAL):
                self._log_level = logging.CRITICAL
            elif log_level_upper == logging.getLevelName(logging.ERROR):
                self._log_level = logging.ERROR
            elif log_level_upper == logging.getLevelName(logging.WARNING):
                self._log_level = logging.WARNING
            elif log_level_upper == logging.getLevelName(logging.INFO):
                self._log_level = logging.INFO
            elif log_level_upper == logging.getLevelName(logging.DEBUG):
                self._log_level = logging.DEBUG
            else:
                self._log_level = logging.ERROR
        else:
            self._log_level = logging.ERROR

    @property
    def tolerance(self):
        return self._tolerance

    @tolerance.setter
    def tolerance(self, tolerance):
        if tolerance == "":
            self._tolerance = DEFAULT_TOLERANCE
            return
        try:
            value = float(tolerance)
        except ValueError:
            raise InputError(get_value_invalid_msg("TOLERANCE", tolerance))
        if not 0 < value < 1e-3:
            raise InputError(get_value_invalid_msg("TOLERANCE", tolerance))
        self._tolerance = value

    @property
    def threads(self):
        return self._threads

    @threads.setter
    def threads(self, threads):
        self._threads = _positive_int_check("THREADS", threads, 1)

    @property
    def random_starts(self):
        return self._random_starts

    @random_starts.setter
    def random_starts(self, random_starts):
        self._random_starts = _positive_int_check("RANDOM_STARTS", random_starts, DEFAULT_RANDOM_STARTS)

    @property
    def grid_resolution(self):
        return self._grid_resolution

    @grid_resolution.setter
    def grid_resolution(self, grid_resolution):
        self._grid_resolution = _positive_int_check("GRID_RESOLUTION", grid_resolution, DEFAULT_GRID_RESOLUTION)

    @property
    def newton_max_iter(self):
        return self._newton_max_iter

    @newton_max_iter.setter
    def newton_max_iter(self, newton_max_iter):
        self._newton_max_iter = _positive_int_check("NEWTON_MAX_ITER", newton_max_iter, DEFAULT_NEWTON_MAX_ITER)

    @property
    def lsq_starts(self):
        return self._lsq_starts

    @lsq_starts.setter
    def lsq_starts(self, lsq_starts):
        self._lsq_starts = _positive_int_check("LSQ_STARTS", lsq_starts, DEFAULT_LSQ_STARTS)

    @property
    def seed(self):
        return self._seed

    @seed.setter
    def seed(self, seed):
        if seed == "":
            self._seed = DEFAULT_SEED
        elif seed.lstrip("-").isdecimal():
            self._seed = int(seed)
        else:
            raise InputError(get_value_invalid_msg("SEED", seed))

    @property
    def deterministic(self):
        return self._deterministic

    @deterministic.setter
    def deterministic(self, deterministic):
        if deterministic == "" or deterministic.upper() in ("YES", "Y", "TRUE", "ON"):
            self._deterministic = True
        elif deterministic.upper() in ("NO", "N", "FALSE", "OFF"):
            self._deterministic = False
        else:
            raise InputError(get_value_invalid_msg("DETERMINISTIC", deterministic))

    @property
    def archive_path(self):
        return self._archive_path

    @archive_path.setter
    def archive_path(self, archive_path):
        self._archive_path = archive_path if archive_path != "" else "archive"

    @property
    def max_group_order(self):
        return self._max_group_order

    @max_group_order.setter
    def max_group_order(self, max_group_order):
        self._max_group_order = _positive_int_check("MAX_GROUP_ORDER", max_group_order, DEFAULT_MAX_GROUP_ORDER)

    @property
    def max_oracle_terms(self):
        return self._max_oracle_terms

    @max_oracle_terms.setter
    def max_oracle_terms(self, max_oracle_terms):
        self._max_oracle_terms = _positive_int_check("MAX_ORACLE_TERMS", max_oracle_terms, DEFAULT_MAX_ORACLE_TERMS)

    def get_config_dict(self):
        return {
            "config_name": self.config_name,
            "setting": {
                "log_level": logging.getLevelName(self.log_level),
                "tolerance": self.tolerance,
                "threads": self.threads
            },
            "search": {
                "random_starts": self.random_starts,
                "grid_resolution": self.grid_resolution,
                "newton_max_iter": self.newton_max_iter,
                "lsq_starts": self.lsq_starts,
                "seed": self.seed,
                "deterministic": "yes" if self.deterministic else "no"
            },
            "archive": {
                "archive_path": self.archive_path,
                "max_group_order": self.max_group_order,
                "max_oracle_terms": self.max_oracle_terms
            }
        }

    def get_search_budget(self):
        return SearchBudget(random_starts=self.random_starts, grid_resolution=self.grid_resolution,
                            newton_max_iter=self.newton_max_iter, lsq_starts=self.lsq_starts,
                            seed=self.seed, deterministic=self.deterministic, threads=self.threads,
                            tolerance=self.tolerance, max_group_order=self.max_group_order,
                            max_oracle_terms=self.max_oracle_terms)


class SearchBudget:
    """
    Search settings handed to the solvers. Built from ConfigManager or directly in tests.
    """

    def __init__(self, random_starts=DEFAULT_RANDOM_STARTS, grid_resolution=DEFAULT_GRID_RESOLUTION,
                 newton_max_iter=DEFAULT_NEWTON_MAX_ITER, lsq_starts=DEFAULT_LSQ_STARTS, seed=DEFAULT_SEED,
                 deterministic=True, threads=1, tolerance=DEFAULT_TOLERANCE,
                 max_group_order=DEFAULT_MAX_GROUP_ORDER, max_oracle_terms=DEFAULT_MAX_ORACLE_TERMS):
        self.random_starts = random_starts
        self.grid_resolution = grid_resolution
        self.newton_max_iter = newton_max_iter
        self.lsq_starts = lsq_starts
        self.seed = seed
        self.deterministic = deterministic
        self.threads = threads
        self.tolerance = tolerance
        self.max_group_order = max_group_order
        self.max_oracle_terms = max_oracle_terms

    def provenance(self):
        return {
            "seed": self.seed,
            "deterministic": self.deterministic,
            "random_starts": self.random_starts,
            "grid_resolution": self.grid_resolution,
            "newton_max_iter": self.newton_max_iter,
            "lsq_starts": self.lsq_starts
        }


def _positive_int_check(config_name, value, default):
    """
    Positive integer check of a search or limit parameter
    :param config_name: key name
    :param value: value read from the file
    :param default: value used when the key is empty
    :return: int value
    """

    if value != "":
        if value.isdecimal() and int(value) >= 1:
            return int(value)
        else:
            raise InputError(get_value_invalid_msg(config_name, value))
    else:
        return default
