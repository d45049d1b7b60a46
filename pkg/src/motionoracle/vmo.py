"""
Variable Markov Oracle over a multivariate time series.

The oracle is built incrementally, one feature vector per state. State 0 is
a virtual root; state t >= 1 stores frame O[t] and its symbol q_t. Symbols
come from suffix links: a frame within `theta` of a forward link target of
the suffix walk inherits that target's symbol, otherwise it opens a new
cluster. Clusters are lists of states sharing one symbol, in increasing
order.
"""
import json
import logging
from typing import NamedTuple

import numpy as np

from motionoracle.core_types import feature_distances
from motionoracle.exception import DimensionError
from motionoracle.exception import ModelFormatError
from motionoracle.exception import MotionOracleContractError
from motionoracle.exception import MotionOracleInputError
from motionoracle.logging_util import motionoracle_logging
from motionoracle.util import lower_median


logger = logging.getLogger(__name__)

MODEL_FORMAT = "motionoracle-vmo"
MODEL_VERSION = 1

_INITIAL_CAPACITY = 64


class ForwardLink(NamedTuple):
    source: int
    label: int
    target: int
    internal: bool


class Segment(NamedTuple):
    """
    States start..end repeat the earlier states source_start..source_end.
    """
    start: int
    end: int
    source_start: int
    source_end: int

    @property
    def length(self):
        return self.end - self.start + 1


class SequenceSpan(NamedTuple):
    name: str
    start: int
    end: int


class Oracle(object):
    """
    :ivar theta: similarity radius deciding whether a frame joins a cluster
    :ivar symbols: q_t per state, None for the root
    :ivar sfx: suffix link per state, None for the root
    :ivar trn: forward link targets per state; the first link out of t-1 is
        the internal one to t, the others are external
    """

    def __init__(self, theta, stream_id=None):
        theta = float(theta)
        if not theta >= 0:
            raise MotionOracleInputError("theta must be non-negative, got {}".format(theta))
        self.theta = theta
        self.stream_id = stream_id
        self.dim = None
        self.symbols = [None]
        self.sfx = [None]
        self.trn = [[]]
        self.sequences = []
        self.metadata = {}
        self.frozen = False
        self._clusters = []
        self._buffer = None

    def __len__(self):
        return self.T

    def __eq__(self, other):
        if not isinstance(other, Oracle):
            return NotImplemented
        return (
            self.theta == other.theta
            and self.dim == other.dim
            and self.symbols == other.symbols
            and self.sfx == other.sfx
            and self.trn == other.trn
            and list(self.sequences) == list(other.sequences)
            and np.array_equal(self.frames, other.frames)
        )

    __hash__ = None

    @property
    def T(self):
        return len(self.sfx) - 1

    @property
    def K(self):
        return len(self._clusters)

    @property
    def frames(self):
        """
        :rtype: numpy.ndarray
        :return: (T + 1, dim) view; row t holds O[t], row 0 is unused
        """
        if self._buffer is None:
            return np.zeros((1, self.dim or 0), dtype=np.float64)
        return self._buffer[:self.T + 1]

    def frame(self, t):
        if not 1 <= t <= self.T:
            raise MotionOracleContractError("state {} is not in 1..{}".format(t, self.T))
        return self._buffer[t].copy()

    def clusters(self):
        """
        :rtype: list[list[int]]
        :return: the state list of every label, indexed by label
        """
        return [list(states) for states in self._clusters]

    def cluster_states(self, label):
        return self._clusters[label]

    def forward_links(self):
        """
        :rtype: list[ForwardLink]
        """
        links = []
        for source, targets in enumerate(self.trn):
            for target in targets:
                links.append(ForwardLink(source=source, label=self.symbols[target],
                                         target=target, internal=target == source + 1))
        return links

    def freeze(self):
        self.frozen = True
        return self

    def check_feature(self, v):
        vec = np.asarray(v, dtype=np.float64).ravel()
        if self.dim is None:
            if vec.size == 0:
                raise DimensionError("feature vectors must not be empty")
        elif vec.size != self.dim:
            raise DimensionError(
                "feature vector has {got} values, oracle frames have {dim}".format(
                    got=vec.size, dim=self.dim))
        if not np.all(np.isfinite(vec)):
            raise MotionOracleInputError("feature vector holds a non-finite value")
        return vec

    def _store(self, t, vec):
        if self._buffer is None:
            self.dim = vec.size
            self._buffer = np.zeros((_INITIAL_CAPACITY, self.dim), dtype=np.float64)
        elif t >= len(self._buffer):
            grown = np.zeros((2 * len(self._buffer), self.dim), dtype=np.float64)
            grown[:len(self._buffer)] = self._buffer
            self._buffer = grown
        self._buffer[t] = vec

    def add_frame(self, v):
        """
        Appends one frame and links it into the oracle.

        :type v: Sequence[float] | numpy.ndarray
        :rtype: int
        :return: the new state index t
        """
        if self.frozen:
            raise MotionOracleContractError("can not add frames to a frozen oracle")
        vec = self.check_feature(v)
        t = self.T + 1
        self._store(t, vec)
        self.sfx.append(None)
        self.trn.append([])
        self.trn[t - 1].append(t)

        suffix = None
        k = self.sfx[t - 1]
        while k is not None:
            targets = self.trn[k]
            d = feature_distances(self._buffer[targets], vec)
            within = np.flatnonzero(d <= self.theta)
            if within.size:
                suffix = min((d[i], targets[i]) for i in within)[1]
                break
            targets.append(t)
            k = self.sfx[k]

        if suffix is None:
            self.sfx[t] = 0
            label = len(self._clusters)
            self._clusters.append([t])
        else:
            self.sfx[t] = suffix
            label = self.symbols[suffix]
            self._clusters[label].append(t)
        self.symbols.append(label)
        return t

    def add_frames(self, frames):
        for v in frames:
            self.add_frame(v)
        return self

    def sequence_at(self, t):
        """
        :return: the name of the stored recording that state t belongs to, or None
        """
        for span in self.sequences:
            if span.start <= t <= span.end:
                return span.name
        return None


def oracle_new(theta, stream_id=None):
    """
    :type theta: float
    :rtype: Oracle
    :return: an oracle holding only the root state
    """
    return Oracle(theta, stream_id=stream_id)


def add_frame(oracle, v):
    return oracle.add_frame(v)


def clusters(oracle):
    return oracle.clusters()


def build_oracle(frames, theta, stream_id=None):
    """
    :type frames: Iterable[Sequence[float]]
    :type theta: float
    :rtype: Oracle
    """
    oracle = Oracle(theta, stream_id=stream_id).add_frames(frames)
    msg = "Built oracle: T={T} K={K} theta={theta}".format(T=oracle.T, K=oracle.K, theta=oracle.theta)
    motionoracle_logging(logger, logging.INFO, msg, oracle)
    return oracle


def repeat_score(oracle):
    """
    Number of states whose suffix link lands on a non-root state.
    """
    return sum(1 for s in oracle.sfx[1:] if s != 0)


def select_threshold(frames, candidates):
    """
    Picks a similarity threshold by building one oracle per candidate.

    Candidates giving a non trivial clustering (1 < K < T) are preferred when
    there is any. Among the eligible ones the highest repeat score wins, and
    ties go to the lower median of the tying candidates.

    :type frames: Sequence[Sequence[float]] | numpy.ndarray
    :type candidates: Iterable[float]
    :rtype: tuple[float, dict[float, int]]
    :return: the chosen theta and the repeat score of every candidate
    """
    candidates = sorted(set(float(c) for c in candidates))
    if not candidates:
        raise MotionOracleInputError("select_threshold needs at least one candidate")
    if candidates[0] < 0:
        raise MotionOracleInputError("threshold candidates must be non-negative")
    frames = np.asarray(frames, dtype=np.float64)

    scores = {}
    nontrivial = []
    for theta in candidates:
        oracle = Oracle(theta).add_frames(frames)
        scores[theta] = repeat_score(oracle)
        if 1 < oracle.K < oracle.T:
            nontrivial.append(theta)
        logger.debug("theta={theta}: score={score} K={K}".format(
            theta=theta, score=scores[theta], K=oracle.K))

    eligible = nontrivial or candidates
    best_score = max(scores[theta] for theta in eligible)
    tying = [theta for theta in eligible if scores[theta] == best_score]
    chosen = lower_median(tying)
    logger.info("Selected theta={theta} (score {score}) out of {n} candidates".format(
        theta=chosen, score=best_score, n=len(candidates)))
    return chosen, scores


def repeated_segments(oracle, min_length=4, min_lag=None):
    """
    Maximal runs of states whose suffix links advance in lock-step.

    :type oracle: Oracle
    :param min_length: shortest run reported
    :param min_lag: smallest distance between a state and its suffix target;
        defaults to min_length so a slowly drifting signal is not reported
        as repeating itself
    :rtype: list[Segment]
    """
    if min_lag is None:
        min_lag = min_length

    def linked(t):
        return oracle.sfx[t] not in (None, 0) and t - oracle.sfx[t] >= min_lag

    segments = []
    start = None
    for t in range(1, oracle.T + 2):
        continues = (
            t <= oracle.T and linked(t) and start is not None
            and oracle.sfx[t] == oracle.sfx[t - 1] + 1
        )
        if continues:
            continue
        if start is not None and t - start >= min_length:
            segments.append(Segment(start=start, end=t - 1,
                                    source_start=oracle.sfx[start], source_end=oracle.sfx[t - 1]))
        start = t if t <= oracle.T and linked(t) else None
    return segments


def principal_projection(oracle):
    """
    Projects the stored frames on their first principal component.

    :rtype: numpy.ndarray
    :return: one value per state 1..T
    """
    if oracle.T == 0:
        return np.zeros(0, dtype=np.float64)
    data = oracle.frames[1:]
    centered = data - data.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    return centered @ vt[0]


def save_model(oracle):
    """
    :type oracle: Oracle
    :rtype: dict
    :return: a JSON-serializable document describing the oracle
    """
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "theta": oracle.theta,
        "dim": oracle.dim,
        "frames": oracle.frames[1:].tolist(),
        "labels": list(oracle.symbols),
        "sfx": list(oracle.sfx),
        "links": [[l.source, l.label, l.target, l.internal] for l in oracle.forward_links()],
        "sequences": [{"name": s.name, "start": s.start, "end": s.end} for s in oracle.sequences],
        "metadata": dict(oracle.metadata),
    }


def _check(condition, message):
    if not condition:
        raise ModelFormatError(message)


def load_model(document, stream_id=None):
    """
    :type document: dict
    :rtype: Oracle
    :raise ModelFormatError: for malformed documents or another format version
    """
    _check(isinstance(document, dict), "model document must be a mapping")
    _check(document.get("format") == MODEL_FORMAT, "not a {} document".format(MODEL_FORMAT))
    _check(document.get("version") == MODEL_VERSION,
           "unsupported model version {!r}".format(document.get("version")))
    try:
        oracle = Oracle(document["theta"], stream_id=stream_id)
        frames = document["frames"]
        labels = document["labels"]
        sfx = document["sfx"]
        links = document["links"]
        T = len(frames)
        _check(len(labels) == T + 1 and len(sfx) == T + 1, "labels and sfx must hold T + 1 entries")
        _check(labels[0] is None and sfx[0] is None, "root state must have no label and no suffix")
        if T:
            _check(isinstance(frames[0], list) and frames[0], "frames must be non-empty lists")
            oracle._store(0, np.zeros(len(frames[0]), dtype=np.float64))
            _check(document["dim"] == oracle.dim, "dim does not match the frames")
            for t, frame in enumerate(frames, start=1):
                oracle._store(t, oracle.check_feature(frame))

        oracle.trn = [[] for _ in range(T + 1)]
        for source, label, target, internal in links:
            _check(0 <= source < target <= T, "link {}->{} out of range".format(source, target))
            _check(labels[target] == label, "link {}->{} has a wrong label".format(source, target))
            _check(bool(internal) == (target == source + 1),
                   "link {}->{} has a wrong internal flag".format(source, target))
            oracle.trn[source].append(target)

        n_labels = max(labels[1:], default=-1) + 1
        oracle._clusters = [[] for _ in range(n_labels)]
        for t in range(1, T + 1):
            _check(isinstance(sfx[t], int) and 0 <= sfx[t] < t, "bad suffix link at state {}".format(t))
            _check(isinstance(labels[t], int) and labels[t] >= 0, "bad label at state {}".format(t))
            _check(oracle.trn[t - 1][:1] == [t], "missing internal link into state {}".format(t))
            oracle._clusters[labels[t]].append(t)
        _check(all(oracle._clusters), "labels must be numbered without gaps")

        oracle.symbols = list(labels)
        oracle.sfx = list(sfx)
        oracle.sequences = [SequenceSpan(s["name"], int(s["start"]), int(s["end"]))
                            for s in document.get("sequences", [])]
        oracle.metadata = dict(document.get("metadata", {}))
    except (KeyError, TypeError, ValueError, MotionOracleInputError) as e:
        if isinstance(e, ModelFormatError):
            raise
        raise ModelFormatError("malformed model document: {}".format(e)) from e
    return oracle.freeze()


def dumps_model(oracle):
    return json.dumps(save_model(oracle))


def loads_model(text, stream_id=None):
    try:
        document = json.loads(text)
    except ValueError as e:
        raise ModelFormatError("model document is not valid JSON: {}".format(e)) from e
    return load_model(document, stream_id=stream_id)


def write_model(oracle, path):
    with open(path, "w") as f:
        f.write(dumps_model(oracle))
    motionoracle_logging(logger, logging.INFO, "Wrote model to {}".format(path), oracle)


def read_model(path):
    with open(path) as f:
        return loads_model(f.read(), stream_id=path)
