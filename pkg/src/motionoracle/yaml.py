"""
YAML helpers for configuration and mapping documents.

Documents may pull values from the environment:

    max_blobs: !ENV STAGE_MAX_BLOBS
    mapping: !ENVFILE STAGE_MAPPING_FILE
"""
import os

import yaml as _yaml
from yaml import YAMLError  # noqa: F401


class MotionOracleLoader(_yaml.SafeLoader):
    """SafeLoader with the environment tags registered on it only."""


def _constructor_env_variables(loader, node):
    """
    Resolves the value of the environment variable named by the node.

    :param yaml.Loader loader: the yaml loader
    :param node: the current node in the yaml
    :return: value of the environment variable, itself parsed as a YAML scalar
    """
    raw_value = loader.construct_scalar(node)
    new_value = os.environ.get(raw_value)
    if new_value is None:
        msg = "Cannot construct value from {node}: environment variable {name} is unset".format(
            node=node, name=raw_value
        )
        raise YAMLError(msg)
    return parse_scalar(new_value)


def _constructor_envfile_variables(loader, node):
    """
    Reads the file whose path is held by the environment variable named by the node.

    :param yaml.Loader loader: the yaml loader
    :param node: the current node in the yaml
    :return: contents of the file
    """
    raw_value = loader.construct_scalar(node)
    filepath = os.environ.get(raw_value)
    try:
        with open(filepath, "r") as fd:
            new_value = fd.read()
    except (TypeError, IOError) as e:
        msg = "Cannot construct value from {node}: {path}".format(
            node=node, path=filepath
        )
        raise YAMLError(msg) from e
    return new_value.strip()


def _constructor_tuple_variables(loader, node):
    return tuple(loader.construct_sequence(node))


TAG_ENV = "!ENV"
TAG_ENVFILE = "!ENVFILE"
TAG_TUPLE = "tag:yaml.org,2002:python/tuple"

MotionOracleLoader.add_constructor(TAG_ENV, _constructor_env_variables)
MotionOracleLoader.add_constructor(TAG_ENVFILE, _constructor_envfile_variables)
MotionOracleLoader.add_constructor(TAG_TUPLE, _constructor_tuple_variables)


def load(stream):
    """
    :type stream: str | typing.IO
    :return: the parsed document
    """
    return _yaml.load(stream, Loader=MotionOracleLoader)


def parse_scalar(value):
    """
    Parses a string the way a YAML scalar would be read, so "6" becomes 6
    and "0.5" becomes 0.5. Anything unparseable is returned unchanged.

    :type value: str
    """
    try:
        parsed = _yaml.safe_load(value)
    except YAMLError:
        return value
    if isinstance(parsed, (dict, list)):
        return value
    return parsed


def dump(data, stream=None):
    return _yaml.safe_dump(data, stream, default_flow_style=False, sort_keys=False)
