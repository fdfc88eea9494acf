import logging
import os


class LoggerManager:

    _logs_dir = "logs"
    _log_file_name = "neargroup.log"
    _log_level = logging.ERROR

    @classmethod
    def set_log_level(cls, log_level):
        cls._log_level = log_level

    @classmethod
    def get_log_level(cls):
        return cls._log_level

    @classmethod
    def set_logs_dir(cls, logs_dir):
        cls._logs_dir = logs_dir

    @classmethod
    def get_logger(cls, module_name):

        logger = logging.getLogger(module_name)
        logger.setLevel(cls._log_level)

        if logger.hasHandlers() is False:

            if not os.path.isdir(cls._logs_dir):
                os.makedirs(cls._logs_dir, exist_ok=True)

            formatter = logging.Formatter("%(asctime)s [%(levelname)s] %(message)s")

            file_handler = logging.FileHandler(os.path.join(cls._logs_dir, cls._log_file_name), encoding="utf-8")
            file_handler.setFormatter(formatter)

            logger.addHandler(file_handler)

        return logger
