"""
This module contains methods to load, verify and build configurations for motionoracle.
"""
import logging
import os
import os.path

from motionoracle.exception import MotionOracleConfigurationError
from motionoracle.util import dict_set_nested
from motionoracle.util import set_dict_defaults
from motionoracle.yaml import YAMLError
from motionoracle.yaml import load as yaml_load
from motionoracle.yaml import parse_scalar


logger = logging.getLogger(__name__)

ENV_PREFIX = "MOTIONORACLE_"

DEFAULT_LOGGING_CONFIG = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "simple": {
            "format": "[%(asctime)s] [%(levelname)s] [%(name)s.%(funcName)s] %(message)s"
        }
    },
    "handlers": {
        "stderr": {
            "class": "logging.StreamHandler",
            "stream": "ext://sys.stderr",
            "level": "DEBUG",
            "formatter": "simple",
        }
    },
    "loggers": {"motionoracle": {"level": "INFO"}},
    "root": {"level": "WARNING", "handlers": ["stderr"]},
}


def _number(value):
    if isinstance(value, bool):
        raise TypeError("{!r} is not a number".format(value))
    return float(value)


def _is_count(value):
    return isinstance(value, int) and not isinstance(value, bool) and value >= 1


class MotionOracleConfig(object):
    """
    A configuration class for motionoracle. Verifies the known sections and
    fills in defaults for everything left out.
    """
    known_sections = ["TRACKER", "ORACLE", "STREAM", "LOGGING"]
    defaults = {
        "TRACKER.max_blobs": 4,
        "TRACKER.birth_cost": 10.0,
        "TRACKER.continuity_bias": 0.9,
        "ORACLE.theta": None,
        "ORACLE.theta_candidates": [0.001, 0.01, 0.1, 1.0],
        "ORACLE.min_segment_length": 4,
        "STREAM.rate": 30.0,
    }

    def __init__(self, config=None):
        """
        Reads a given config and builds the MotionOracleConfig.

        :type config: str | dict | None
        :rtype: motionoracle.config.MotionOracleConfig

        :param config: Can be a file path, a dictionary or None for all defaults
        :return: A verified MotionOracleConfig
        """
        if config is None:
            self._config = {}
        else:
            parsers = [self._load_dict, self._load_yaml]
            for parser in parsers:
                self._config = parser(config)
                if self._config is not None:
                    break
            if self._config is None:
                raise MotionOracleConfigurationError(
                    "Could not load configuration from '{}'".format(config))

        self._verify_dict(self._config)
        self._load_environment(self._config)
        set_dict_defaults(self._config, self.defaults)
        self._verify_values(self._config)

    def _verify_dict(self, conf):
        """
        Check that the configuration only holds known sections.

        :type conf: dict
        :rtype: None
        :raise MotionOracleConfigurationError: if the configuration is incorrect
        """
        if not isinstance(conf, dict):
            raise MotionOracleConfigurationError("Missing configuration or unknown format")

        for key, value in conf.items():
            if key not in MotionOracleConfig.known_sections:
                raise MotionOracleConfigurationError("Unknown section '%s' in config" % key)
            if not isinstance(value, dict):
                raise MotionOracleConfigurationError("Section '%s' must be a mapping" % key)

    def _load_environment(self, conf):
        """
        Applies MOTIONORACLE_<SECTION>_<KEY> environment overrides.
        """
        for path in self.defaults:
            section, key = path.split(".")
            env_name = "{prefix}{section}_{key}".format(
                prefix=ENV_PREFIX, section=section, key=key.upper())
            val = os.environ.get(env_name)
            if val is not None:
                logger.debug("Configuration {} overridden by {}".format(path, env_name))
                dict_set_nested(conf, [section, key], parse_scalar(val))

    def _verify_values(self, conf):
        tracker = conf["TRACKER"]
        if not _is_count(tracker["max_blobs"]):
            raise MotionOracleConfigurationError("TRACKER.max_blobs must be a positive integer")
        try:
            birth_cost = _number(tracker["birth_cost"])
            bias = _number(tracker["continuity_bias"])
        except (TypeError, ValueError) as e:
            raise MotionOracleConfigurationError("TRACKER values must be numbers") from e
        if not 0 < birth_cost < float("inf"):
            raise MotionOracleConfigurationError("TRACKER.birth_cost must be positive and finite")
        if not 0 < bias <= 1:
            raise MotionOracleConfigurationError("TRACKER.continuity_bias must lie in (0, 1]")

        try:
            candidates = [_number(c) for c in conf["ORACLE"]["theta_candidates"]]
            theta = conf["ORACLE"]["theta"]
            theta = None if theta is None else _number(theta)
            rate = _number(conf["STREAM"]["rate"])
        except (TypeError, ValueError) as e:
            raise MotionOracleConfigurationError(
                "ORACLE thresholds and STREAM.rate must be numbers") from e
        if not candidates or any(c < 0 for c in candidates):
            raise MotionOracleConfigurationError(
                "ORACLE.theta_candidates must be a non-empty list of non-negative numbers")
        if theta is not None and theta < 0:
            raise MotionOracleConfigurationError("ORACLE.theta must be non-negative")
        if not _is_count(conf["ORACLE"]["min_segment_length"]):
            raise MotionOracleConfigurationError("ORACLE.min_segment_length must be a positive integer")
        if rate <= 0:
            raise MotionOracleConfigurationError("STREAM.rate must be positive")

    def __getitem__(self, item):
        """
        Returns data bound to the key 'item'.

        :type item: str
        :rtype object

        :param item: key to data
        :return: data bound to key 'item'
        """
        return self._config[item]

    def __setitem__(self, key, value):
        self._config[key] = value

    def __contains__(self, key):
        return key in self._config

    def get(self, item, default=None):
        return self._config.get(item, default)

    @property
    def logging_config(self):
        return self._config.get("LOGGING", DEFAULT_LOGGING_CONFIG)

    def _load_dict(self, config):
        """
        Load config from dict

        :type config: dict
        :rtype: dict
        """
        if isinstance(config, dict):
            return config

        return None

    def _load_yaml(self, config_file):
        """
        Load config from yaml file

        :type config_file: str
        :rtype: dict

        :param config_file: path of the YAML document to load
        :return: Loaded config
        """

        try:
            with open(os.path.abspath(config_file)) as f:
                return yaml_load(f.read()) or {}
        except YAMLError as exc:
            logger.error("Could not parse config as YAML: {}".format(exc))
            if hasattr(exc, 'problem_mark'):
                mark = exc.problem_mark
                logger.error("Error position: ({line}:{column})".format(line=mark.line + 1, column=mark.column + 1))
        except (IOError, TypeError) as e:
            logger.error("Could not open config file: {}".format(e))

        return None
