"""
Python package file for util functions.
"""
import copy
import logging


logger = logging.getLogger(__name__)


def set_dict_defaults(dic, spec):
    """
    Fills missing entries of a nested dict from a spec of dotted paths.

    :type dic: dict
    :type spec: dict[str, object]
    :rtype: dict

    :param dic: the dict to complete, modified in place
    :param spec: mapping of 'SECTION.key' paths to defaults
    :return: the completed dict
    """
    for path, value in spec.items():
        keys = path.split('.')
        try:
            dict_get_nested(dic, keys)
        except KeyError:
            logger.debug("Using default {value} for '{path}'".format(value=value, path=path))
            dict_set_nested(dic, keys, copy.deepcopy(value))
    return dic


def dict_set_nested(dic, keys, value):
    for key in keys[:-1]:
        dic = dic.setdefault(key, {})
    dic[keys[-1]] = value


def dict_get_nested(dic, keys):
    for key in keys[:-1]:
        dic = dic.get(key) or {}
    return dic[keys[-1]]


def lower_median(values):
    """
    The middle element of the sorted values; the lower one of the two middle
    elements for an even count.

    :type values: Sequence[float]
    :rtype: float
    """
    ordered = sorted(values)
    if not ordered:
        raise ValueError("median of an empty sequence")
    return ordered[(len(ordered) - 1) // 2]
