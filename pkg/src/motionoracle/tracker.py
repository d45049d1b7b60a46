"""
Identity preserving multi-marker tracker.

Every frame the incoming markers are matched against the blobs of a fixed
size registry with the Kuhn-Munkres solver, and each blob goes through one
of the lifecycle actions:

    living  an alive blob is matched again and its position is updated
    death   an alive blob is left unmatched; its position is frozen
    birth   a dead or never seen blob is matched and becomes alive
    kill    an incoming marker beyond the registry capacity is dropped as noise

A dead blob that stays unmatched gets no event.
"""
import logging
from dataclasses import dataclass
from dataclasses import replace
from enum import Enum
from typing import Optional
from typing import Tuple
from typing import Union

import numpy as np

from motionoracle.assignment import solve_assignment
from motionoracle.core_types import NEVER_OBSERVED
from motionoracle.core_types import MarkerFrame
from motionoracle.core_types import Point3
from motionoracle.core_types import feature_distances
from motionoracle.core_types import is_observed
from motionoracle.exception import FrameOrderError
from motionoracle.exception import MotionOracleInputError
from motionoracle.logging_util import motionoracle_logging


logger = logging.getLogger(__name__)


class BlobState(str, Enum):
    ALIVE = "alive"
    DEAD = "dead"
    UNSEEN = "unseen"


class TrackAction(str, Enum):
    LIVING = "living"
    DEATH = "death"
    BIRTH = "birth"
    KILL = "kill"


@dataclass(frozen=True)
class Blob:
    id: int
    state: BlobState = BlobState.UNSEEN
    last_pos: Union[Point3, type(NEVER_OBSERVED)] = NEVER_OBSERVED
    last_seen_t: Optional[int] = None

    def to_dict(self):
        return {
            "id": self.id,
            "state": self.state.value,
            "pos": self.last_pos.to_list() if is_observed(self.last_pos) else None,
            "last_seen_t": self.last_seen_t,
        }


@dataclass(frozen=True)
class TrackerConfig:
    """
    :param max_blobs: number of identities planned to be on stage
    :param birth_cost: matching cost of a blob that was never seen, in meters
    :param continuity_bias: factor applied to the keep-alive scheme cost
        before it is compared with the joint scheme; 1 disables the bias
    """
    max_blobs: int
    birth_cost: float = 10.0
    continuity_bias: float = 0.9

    def __post_init__(self):
        if int(self.max_blobs) != self.max_blobs or self.max_blobs < 1:
            raise MotionOracleInputError(
                "max_blobs must be a positive integer, got {}".format(self.max_blobs))
        if not 0 < float(self.birth_cost) < float("inf"):
            raise MotionOracleInputError(
                "birth_cost must be positive and finite, got {}".format(self.birth_cost))
        if not 0 < float(self.continuity_bias) <= 1:
            raise MotionOracleInputError(
                "continuity_bias must lie in (0, 1], got {}".format(self.continuity_bias))
        object.__setattr__(self, "max_blobs", int(self.max_blobs))
        object.__setattr__(self, "birth_cost", float(self.birth_cost))
        object.__setattr__(self, "continuity_bias", float(self.continuity_bias))

    @classmethod
    def from_config(cls, config, **overrides):
        """
        :type config: motionoracle.config.MotionOracleConfig
        :param overrides: values that win over the configuration, None is ignored
        """
        values = dict(config["TRACKER"])
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(max_blobs=values["max_blobs"],
                   birth_cost=values["birth_cost"],
                   continuity_bias=values["continuity_bias"])


@dataclass(frozen=True)
class TrackEvent:
    """
    For kill events `id` is the position of the dropped marker within its
    frame, not a registry id.
    """
    id: int
    action: TrackAction
    pos: Optional[Point3] = None

    def to_dict(self):
        event = {"id": self.id, "action": self.action.value}
        if self.pos is not None:
            event["pos"] = self.pos.to_list()
        return event


@dataclass(frozen=True)
class TrackUpdate:
    t: int
    events: Tuple[TrackEvent, ...]
    blobs: Tuple[Blob, ...]

    def to_dict(self):
        return {"t": self.t, "events": [e.to_dict() for e in self.events]}

    def count(self, action):
        return sum(1 for e in self.events if e.action == action)


class Registry(object):
    """
    The fixed capacity set of identity bearing blobs.

    A registry is advanced by a single writer, one frame at a time in frame
    order.
    """

    def __init__(self, config, stream_id=None):
        """
        :type config: TrackerConfig
        :type stream_id: str | None

        :param config: tracker configuration
        :param stream_id: tag used in log lines
        """
        self.config = config
        self.stream_id = stream_id
        self._blobs = [Blob(id=i) for i in range(config.max_blobs)]
        self.last_t = None

    def __len__(self):
        return len(self._blobs)

    def snapshot(self):
        """
        :rtype: tuple[Blob]
        :return: read-only copy of all blob records
        """
        return tuple(self._blobs)

    def ids_in_state(self, *states):
        return [b.id for b in self._blobs if b.state in states]

    def _cost_matrix(self, blob_ids, markers):
        cost = np.empty((len(blob_ids), len(markers)), dtype=np.float64)
        for row, blob_id in enumerate(blob_ids):
            blob = self._blobs[blob_id]
            if blob.state == BlobState.UNSEEN:
                cost[row, :] = self.config.birth_cost
            else:
                cost[row, :] = feature_distances(markers, blob.last_pos.as_array())
        return cost

    def _match(self, blob_ids, markers, marker_cols):
        """
        :return: (assignment of blob id -> marker column, total cost)
        """
        result = solve_assignment(self._cost_matrix(blob_ids, markers[marker_cols]))
        assigned = {blob_ids[r]: marker_cols[c] for r, c in result.pairs}
        return assigned, result.total_cost

    def _drop_surplus(self, markers):
        """
        Matches every blob against all markers and kills what is left over.

        Markers are offered closest to an observed blob first, so among equally
        cheap matchings the markers farthest from every observed blob are killed.
        """
        all_ids = list(range(len(self._blobs)))
        observed = [b.last_pos.as_array() for b in self._blobs if is_observed(b.last_pos)]
        if observed:
            nearest = np.min([feature_distances(markers, p) for p in observed], axis=0)
        else:
            nearest = np.zeros(len(markers))
        order = [int(c) for c in np.argsort(nearest, kind="stable")]
        assigned, _ = self._match(all_ids, markers, order)
        kept = sorted(assigned.values())
        kept_set = set(kept)
        kills = [
            TrackEvent(id=c, action=TrackAction.KILL, pos=Point3.from_sequence(markers[c]))
            for c in range(len(markers)) if c not in kept_set
        ]
        return kept, kills

    def _associate(self, t, markers, cols):
        alive = self.ids_in_state(BlobState.ALIVE)
        dead = self.ids_in_state(BlobState.DEAD, BlobState.UNSEEN)

        if len(cols) <= len(alive):
            assigned, _ = self._match(alive, markers, cols)
            return assigned

        # keep-alive scheme: alive blobs first, dead blobs take the leftovers
        kept_alive, c1a = self._match(alive, markers, cols)
        used = set(kept_alive.values())
        leftover = [c for c in cols if c not in used]
        reborn, c1b = self._match(dead, markers, leftover)
        c1 = c1a + c1b

        # joint scheme: alive and dead blobs compete for every marker
        joint, c2 = self._match(sorted(alive + dead), markers, cols)

        if self.config.continuity_bias * c1 <= c2:
            scheme = dict(kept_alive)
            scheme.update(reborn)
            msg = "keep-alive scheme chosen ({:.4f} vs {:.4f})".format(c1, c2)
        else:
            scheme = joint
            msg = "joint scheme chosen ({:.4f} vs {:.4f})".format(c1, c2)
        motionoracle_logging(logger, logging.DEBUG, msg, self, frame=t)
        return scheme

    def step(self, frame):
        """
        Associates one frame of markers with the registry.

        :type frame: motionoracle.core_types.MarkerFrame
        :rtype: TrackUpdate
        :raise FrameOrderError: if the frame index does not increase
        """
        if self.last_t is not None and frame.t <= self.last_t:
            raise FrameOrderError(
                "frame {t} arrived after frame {last}".format(t=frame.t, last=self.last_t))

        markers = frame.as_array()
        cols = list(range(len(markers)))
        kills = []
        if len(markers) > len(self._blobs):
            cols, kills = self._drop_surplus(markers)

        assigned = self._associate(frame.t, markers, cols)

        events = []
        for blob in self._blobs:
            col = assigned.get(blob.id)
            if blob.state == BlobState.ALIVE:
                if col is None:
                    self._blobs[blob.id] = replace(blob, state=BlobState.DEAD)
                    events.append(TrackEvent(id=blob.id, action=TrackAction.DEATH))
                    continue
                action = TrackAction.LIVING
            elif col is None:
                continue
            else:
                action = TrackAction.BIRTH
            pos = Point3.from_sequence(markers[col])
            self._blobs[blob.id] = replace(blob, state=BlobState.ALIVE, last_pos=pos, last_seen_t=frame.t)
            events.append(TrackEvent(id=blob.id, action=action, pos=pos))
        events.extend(kills)

        self.last_t = frame.t
        update = TrackUpdate(t=frame.t, events=tuple(events), blobs=self.snapshot())
        if kills or update.count(TrackAction.DEATH) or update.count(TrackAction.BIRTH):
            msg = "{births} births, {deaths} deaths, {kills} kills".format(
                births=update.count(TrackAction.BIRTH),
                deaths=update.count(TrackAction.DEATH), kills=len(kills))
            motionoracle_logging(logger, logging.DEBUG, msg, self, frame=frame.t)
        return update


def new_registry(config, stream_id=None):
    """
    :type config: TrackerConfig
    :rtype: Registry
    :return: a registry of config.max_blobs never seen blobs
    """
    registry = Registry(config, stream_id=stream_id)
    motionoracle_logging(logger, logging.INFO,
                         "New registry with {} blobs".format(config.max_blobs), registry)
    return registry


def step(registry, frame):
    """
    :type registry: Registry
    :type frame: motionoracle.core_types.MarkerFrame
    :rtype: TrackUpdate
    """
    return registry.step(frame)


def snapshot(registry):
    """
    :type registry: Registry
    :rtype: tuple[Blob]
    """
    return registry.snapshot()


def track_frames(registry, frames):
    """
    Generator over the updates of a whole stream.

    :type registry: Registry
    :type frames: Iterable[MarkerFrame]
    :rtype: Iterator[TrackUpdate]
    """
    for frame in frames:
        yield registry.step(frame)


__all__ = [
    "Blob", "BlobState", "MarkerFrame", "Registry", "TrackAction", "TrackEvent",
    "TrackUpdate", "TrackerConfig", "new_registry", "snapshot", "step", "track_frames",
]
