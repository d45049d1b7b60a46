"""
Contains help methods and classes to perform tests.
"""
import itertools
import json
import math

import numpy as np

from motionoracle.core_types import MarkerFrame
from motionoracle.core_types import Point3
from motionoracle.simulate import ScenarioSpec
from motionoracle.simulate import simulate
from motionoracle.stream import marker_feature


def make_frame(t, *points):
    return MarkerFrame(t=t, markers=tuple(Point3(*p) for p in points))


def jsonl(records):
    return "".join(json.dumps(r) + "\n" for r in records)


def brute_force_assignment(cost):
    """
    Least total cost over every injective matching of min(n, m) pairs.
    """
    cost = np.asarray(cost, dtype=np.float64)
    n, m = cost.shape
    if n <= m:
        totals = (math.fsum(cost[r, c] for r, c in enumerate(perm))
                  for perm in itertools.permutations(range(m), n))
    else:
        totals = (math.fsum(cost[r, c] for c, r in enumerate(perm))
                  for perm in itertools.permutations(range(n), m))
    return min(totals, default=0.0)


def lowest_index_optimal_matching(cost):
    """
    The optimal matching whose sorted (row, col) pairs come first, by enumeration.
    """
    cost = np.asarray(cost, dtype=np.float64)
    n, m = cost.shape
    if n <= m:
        matchings = (tuple(enumerate(perm)) for perm in itertools.permutations(range(m), n))
    else:
        matchings = (tuple(sorted((r, c) for c, r in enumerate(perm)))
                     for perm in itertools.permutations(range(n), m))
    return min(matchings, key=lambda pairs: (math.fsum(cost[r, c] for r, c in pairs), pairs))


def longest_repeated_suffix(symbols, t):
    """
    Length of the longest suffix of symbols[:t] that also occurs ending earlier.
    """
    best = 0
    for end in range(1, t):
        k = 0
        while k < end and symbols[t - 1 - k] == symbols[end - 1 - k]:
            k += 1
        best = max(best, k)
    return best


class SymbolicFactorOracle(object):
    """
    The classic factor oracle over discrete symbols, for comparing links.
    """

    def __init__(self, word):
        self.trn = [{}]
        self.sfx = [None]
        for symbol in word:
            self._add(symbol)

    def _add(self, symbol):
        t = len(self.trn)
        self.trn.append({})
        self.sfx.append(None)
        self.trn[t - 1][symbol] = t
        k = self.sfx[t - 1]
        while k is not None and symbol not in self.trn[k]:
            self.trn[k][symbol] = t
            k = self.sfx[k]
        self.sfx[t] = 0 if k is None else self.trn[k][symbol]


def gesture_features(kind, duration, seed=0, **params):
    """Feature vectors of a one-marker gesture scenario."""
    frames, truth = simulate(ScenarioSpec(kind=kind, duration=duration, seed=seed, params=params))
    return [marker_feature(frame, 1) for frame in frames], truth
