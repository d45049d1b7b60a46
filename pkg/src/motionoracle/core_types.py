"""
Geometric and stream primitives shared by the tracker and the oracle.

Coordinates are meters in a right-handed camera frame: z points out of the
camera, y out of its top and x to its right when facing it.
"""
import math
from dataclasses import dataclass
from dataclasses import field
from typing import Tuple

import numpy as np

from motionoracle.exception import MotionOracleContractError


class _NeverObserved(object):
    """
    Tagged absence of a coordinate. Never takes part in arithmetic.
    """
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NEVER_OBSERVED"

    def __bool__(self):
        return False

    def __reduce__(self):
        return (_NeverObserved, ())


NEVER_OBSERVED = _NeverObserved()


@dataclass(frozen=True)
class Point3:
    x: float
    y: float
    z: float

    def __post_init__(self):
        for name in ("x", "y", "z"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise MotionOracleContractError(
                    "Point3.{name} must be finite, got {value}".format(name=name, value=value))
            object.__setattr__(self, name, value)

    @classmethod
    def from_sequence(cls, seq):
        """
        :type seq: Sequence[float]
        :rtype: Point3
        """
        x, y, z = seq
        return cls(x, y, z)

    def to_list(self):
        return [self.x, self.y, self.z]

    def as_array(self):
        return np.array([self.x, self.y, self.z], dtype=np.float64)


def is_observed(p):
    return p is not None and p is not NEVER_OBSERVED


def distance(a, b):
    """
    Euclidean distance between two observed markers, in meters.

    :type a: Point3
    :type b: Point3
    :rtype: float
    :raise MotionOracleContractError: if either point was never observed
    """
    if not (is_observed(a) and is_observed(b)):
        raise MotionOracleContractError("distance is undefined for a never observed position")
    dx = a.x - b.x
    dy = a.y - b.y
    dz = a.z - b.z
    return math.sqrt(dx * dx + dy * dy + dz * dz)


def feature_distances(frames, v):
    """
    Distances from every row of `frames` to the feature vector `v`.

    :type frames: numpy.ndarray
    :type v: numpy.ndarray
    :rtype: numpy.ndarray
    """
    return np.sqrt(np.sum((frames - v) ** 2, axis=-1))


@dataclass(frozen=True)
class MarkerFrame:
    t: int
    markers: Tuple[Point3, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if int(self.t) != self.t or self.t < 0:
            raise MotionOracleContractError(
                "frame index must be a nonnegative integer, got {}".format(self.t))
        object.__setattr__(self, "t", int(self.t))
        object.__setattr__(self, "markers", tuple(self.markers))

    def __len__(self):
        return len(self.markers)

    def as_array(self):
        """
        :rtype: numpy.ndarray
        :return: markers as an (m, 3) array
        """
        if not self.markers:
            return np.zeros((0, 3), dtype=np.float64)
        return np.array([p.to_list() for p in self.markers], dtype=np.float64)
