"""
Online gesture following over a frozen oracle.

Every cluster of the oracle is one gesture candidate. A candidate keeps the
state it is currently matched to (path vector M) and its running distance
(cost vector C). On each incoming frame a candidate may move to any state of
its own cluster or of a cluster reachable by one forward link, whichever is
closest to the frame. The candidate with the least running cost gives the
best match.

Mapping configuration (YAML):

    categorical:
      0: strobe_on
      3: strobe_off
    temporal:
      - name: intro_video
        start: 10
        end: 120
"""
import logging
from dataclasses import dataclass
from dataclasses import field
from typing import Mapping
from typing import Optional
from typing import Tuple

import numpy as np

from motionoracle.core_types import feature_distances
from motionoracle.exception import MotionOracleConfigurationError
from motionoracle.exception import MotionOracleContractError
from motionoracle.logging_util import motionoracle_logging
from motionoracle.yaml import YAMLError
from motionoracle.yaml import load as yaml_load


logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class FollowerState:
    """
    :ivar M: current state of every candidate
    :ivar C: running cost of every candidate
    :ivar best: index of the candidate with the least cost, lowest on ties
    :ivar t: number of consumed input frames
    :ivar added: cost added to every candidate by the last frame
    :ivar best_label: cluster label of the best matched state
    """
    M: np.ndarray
    C: np.ndarray
    best: int
    t: int
    added: np.ndarray
    best_label: int

    @property
    def best_state(self):
        return int(self.M[self.best])

    @property
    def best_cost(self):
        return float(self.C[self.best])


class ActionGraph(object):
    """
    A read-only view of a frozen oracle that answers reachability queries.
    Any number of followers may share one graph.
    """

    def __init__(self, oracle):
        """
        :type oracle: motionoracle.vmo.Oracle
        """
        if oracle.K < 1:
            raise MotionOracleContractError("can not follow an empty oracle")
        self.oracle = oracle.freeze()
        self.stream_id = oracle.stream_id
        self.cluster_arrays = [np.asarray(states, dtype=np.intp) for states in oracle.clusters()]
        self._reachable = {}

    @property
    def K(self):
        return len(self.cluster_arrays)

    def reachable_labels(self, state):
        """
        Labels of the forward link targets of `state` plus its own label.

        :rtype: list[int]
        """
        symbols = self.oracle.symbols
        labels = {symbols[target] for target in self.oracle.trn[state]}
        labels.add(symbols[state])
        return sorted(labels)

    def reachable(self, state):
        """
        :rtype: numpy.ndarray
        :return: sorted states of every cluster reachable from `state`
        """
        states = self._reachable.get(state)
        if states is None:
            states = np.sort(np.concatenate(
                [self.cluster_arrays[label] for label in self.reachable_labels(state)]))
            self._reachable[state] = states
        return states

    def _distances(self, r):
        return feature_distances(self.oracle.frames, self.oracle.check_feature(r))

    def _state(self, M, C, added, t):
        best = int(np.argmin(C))
        return FollowerState(M=M, C=C, best=best, t=t, added=added,
                             best_label=self.oracle.symbols[int(M[best])])

    def init(self, r1):
        """
        Places every candidate on the state of its cluster closest to the
        first input frame.

        :type r1: Sequence[float] | numpy.ndarray
        :rtype: FollowerState
        """
        d = self._distances(r1)
        M = np.empty(self.K, dtype=np.intp)
        C = np.empty(self.K, dtype=np.float64)
        for k, states in enumerate(self.cluster_arrays):
            i = int(np.argmin(d[states]))
            M[k] = states[i]
            C[k] = d[states[i]]
        return self._state(M, C, C.copy(), 1)

    def step(self, st, rt):
        """
        Advances every candidate by one input frame.

        :type st: FollowerState
        :type rt: Sequence[float] | numpy.ndarray
        :rtype: FollowerState
        """
        d = self._distances(rt)
        M = np.empty_like(st.M)
        added = np.empty_like(st.C)
        for k in range(self.K):
            states = self.reachable(int(st.M[k]))
            i = int(np.argmin(d[states]))
            M[k] = states[i]
            added[k] = d[states[i]]
        return self._state(M, st.C + added, added, st.t + 1)


def follower_init(oracle_or_graph, r1):
    """
    :type oracle_or_graph: motionoracle.vmo.Oracle | ActionGraph
    :rtype: FollowerState
    """
    return _as_graph(oracle_or_graph).init(r1)


def track_step(oracle_or_graph, st, rt):
    """
    :type oracle_or_graph: motionoracle.vmo.Oracle | ActionGraph
    :type st: FollowerState
    :rtype: FollowerState
    """
    return _as_graph(oracle_or_graph).step(st, rt)


def _as_graph(oracle_or_graph):
    if isinstance(oracle_or_graph, ActionGraph):
        return oracle_or_graph
    return ActionGraph(oracle_or_graph)


@dataclass(frozen=True)
class TemporalSpan:
    name: str
    start: int
    end: int

    def position(self, state):
        if not self.start <= state <= self.end:
            return None
        if self.start == self.end:
            return 0.0
        return min(1.0, max(0.0, (state - self.start) / (self.end - self.start)))


@dataclass(frozen=True)
class MappingConfig:
    categorical: Mapping[int, str] = field(default_factory=dict)
    temporal: Tuple[TemporalSpan, ...] = ()

    def __post_init__(self):
        names = [span.name for span in self.temporal]
        if len(set(names)) != len(names):
            raise MotionOracleConfigurationError("temporal span names must be unique")
        for span in self.temporal:
            if not 1 <= span.start <= span.end:
                raise MotionOracleConfigurationError(
                    "span '{}' must satisfy 1 <= start <= end".format(span.name))

    @classmethod
    def from_dict(cls, document):
        """
        :type document: dict | None
        :rtype: MappingConfig
        """
        document = document or {}
        if not isinstance(document, dict):
            raise MotionOracleConfigurationError("mapping document must be a mapping")
        unknown = set(document) - {"categorical", "temporal"}
        if unknown:
            raise MotionOracleConfigurationError(
                "unknown mapping sections: {}".format(", ".join(sorted(unknown))))
        try:
            categorical = {int(label): str(event)
                           for label, event in (document.get("categorical") or {}).items()}
            temporal = tuple(TemporalSpan(name=str(span["name"]), start=int(span["start"]),
                                          end=int(span["end"]))
                             for span in document.get("temporal") or [])
        except (AttributeError, KeyError, TypeError, ValueError) as e:
            raise MotionOracleConfigurationError("malformed mapping document: {}".format(e)) from e
        return cls(categorical=categorical, temporal=temporal)

    @classmethod
    def load(cls, path):
        try:
            with open(path) as f:
                return cls.from_dict(yaml_load(f.read()))
        except YAMLError as e:
            raise MotionOracleConfigurationError("Could not parse mapping as YAML: {}".format(e)) from e
        except IOError as e:
            raise MotionOracleConfigurationError("Could not open mapping file: {}".format(e)) from e

    def check_against(self, oracle):
        for label in self.categorical:
            if not 0 <= label < oracle.K:
                raise MotionOracleConfigurationError(
                    "categorical rule for unknown cluster label {}".format(label))
        for span in self.temporal:
            if span.end > oracle.T:
                raise MotionOracleConfigurationError(
                    "span '{name}' ends after the last state {T}".format(name=span.name, T=oracle.T))
        return self


def map_categorical(st, cfg):
    """
    :type st: FollowerState
    :type cfg: MappingConfig
    :rtype: str | None
    :return: the event bound to the cluster of the best match
    """
    return cfg.categorical.get(st.best_label)


def map_temporal(st, cfg):
    """
    :type st: FollowerState
    :type cfg: MappingConfig
    :rtype: tuple[str, float] | None
    :return: the first span holding the best match and the position in it
    """
    for span in cfg.temporal:
        position = span.position(st.best_state)
        if position is not None:
            return span.name, position
    return None


class Follower(object):
    """
    Single-writer wrapper that turns a feature stream into output records.
    """

    def __init__(self, graph, mapping=None):
        """
        :type graph: ActionGraph
        :type mapping: MappingConfig | None
        """
        self.graph = graph
        self.stream_id = graph.stream_id
        self.mapping = mapping or MappingConfig()
        self.state = None
        self._last_scrub = None

    def consume(self, t, feature):
        """
        :type t: int
        :type feature: numpy.ndarray
        :rtype: dict
        """
        if self.state is None:
            self.state = self.graph.init(feature)
        else:
            self.state = self.graph.step(self.state, feature)
        st = self.state

        event = map_categorical(st, self.mapping)
        scrub = map_temporal(st, self.mapping)
        speed = None
        if scrub is not None and self._last_scrub is not None and self._last_scrub[0] == scrub[0]:
            speed = st.best_state - self._last_scrub[1]
        self._last_scrub = (scrub[0], st.best_state) if scrub is not None else None

        if event is not None:
            motionoracle_logging(logger, logging.DEBUG, "event {}".format(event), self, frame=t)
        return {
            "t": t,
            "best": st.best,
            "state": st.best_state,
            "cost": st.best_cost,
            "added": float(st.added[st.best]),
            "event": event,
            "scrub": None if scrub is None else {"timeline": scrub[0], "position": scrub[1]},
            "speed": speed,
            "sequence": self.graph.oracle.sequence_at(st.best_state),
        }


def follow_stream(graph, features, mapping=None):
    """
    :type graph: ActionGraph
    :type features: Iterable[tuple[int, numpy.ndarray]]
    :rtype: Iterator[dict]
    """
    follower = Follower(graph, mapping)
    for t, feature in features:
        yield follower.consume(t, feature)
