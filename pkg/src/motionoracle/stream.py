"""
Line-delimited JSON streams.

Marker frames:      {"t": 0, "markers": [[x, y, z], ...]}
Tracker output:     {"t": 0, "events": [{"id": 0, "action": "birth", "pos": [x, y, z]}, ...]}
Follower output:    {"t": 0, "best": 1, "state": 12, "cost": 0.0, "event": null, "scrub": null, ...}
"""
import json
import logging
import math
import time
from contextlib import contextmanager

import numpy as np

from motionoracle.core_types import MarkerFrame
from motionoracle.core_types import Point3
from motionoracle.exception import FrameFormatError
from motionoracle.exception import FrameOrderError
from motionoracle.exception import MotionOracleInputError
from motionoracle.tracker import TrackAction


logger = logging.getLogger(__name__)

_ACTIONS = {action.value for action in TrackAction}


@contextmanager
def _open_source(source):
    if isinstance(source, str):
        with open(source) as f:
            yield f
    else:
        yield source


def read_jsonl(source):
    """
    Yields (line number, object) for every non blank line.

    :param source: path, open file or iterable of lines
    :rtype: Iterator[tuple[int, dict]]
    """
    with _open_source(source) as lines:
        for lineno, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except ValueError as e:
                raise FrameFormatError("invalid JSON: {}".format(e), lineno) from e
            if not isinstance(obj, dict):
                raise FrameFormatError("expected a JSON object", lineno)
            yield lineno, obj


def _frame_index(obj, lineno):
    t = obj.get("t")
    if isinstance(t, bool) or not isinstance(t, int) or t < 0:
        raise FrameFormatError("'t' must be a nonnegative integer, got {!r}".format(t), lineno)
    return t


def _point(value, lineno):
    if not isinstance(value, list) or len(value) != 3:
        raise FrameFormatError("a marker must be a list [x, y, z], got {!r}".format(value), lineno)
    for c in value:
        if isinstance(c, bool) or not isinstance(c, (int, float)) or not math.isfinite(c):
            raise FrameFormatError("marker coordinates must be finite numbers, got {!r}".format(value), lineno)
    return Point3.from_sequence(value)


def _check_order(t, last_t, lineno):
    if last_t is not None and t <= last_t:
        raise FrameOrderError("line {lineno}: frame {t} follows frame {last}".format(
            lineno=lineno, t=t, last=last_t))


def read_frames(source):
    """
    :param source: path, open file or iterable of lines
    :rtype: Iterator[motionoracle.core_types.MarkerFrame]
    :raise FrameFormatError: for a malformed line
    :raise FrameOrderError: if frame indices do not increase
    """
    return frames_from_records(read_jsonl(source))


def frames_from_records(records):
    last_t = None
    for lineno, obj in records:
        t = _frame_index(obj, lineno)
        _check_order(t, last_t, lineno)
        markers = obj.get("markers", [])
        if not isinstance(markers, list):
            raise FrameFormatError("'markers' must be a list", lineno)
        yield MarkerFrame(t=t, markers=tuple(_point(m, lineno) for m in markers))
        last_t = t


def frame_to_dict(frame):
    return {"t": frame.t, "markers": [p.to_list() for p in frame.markers]}


def write_jsonl(records, sink):
    """
    :type records: Iterable[dict]
    :param sink: open text file
    :return: number of written records
    """
    n = 0
    for record in records:
        sink.write(json.dumps(record))
        sink.write("\n")
        n += 1
    sink.flush()
    return n


def write_frames(frames, sink):
    return write_jsonl((frame_to_dict(frame) for frame in frames), sink)


def read_track_output(source):
    """
    :rtype: Iterator[tuple[int, list[dict]]]
    :return: frame index and validated events of every tracker output line
    """
    return updates_from_records(read_jsonl(source))


def updates_from_records(records):
    last_t = None
    for lineno, obj in records:
        t = _frame_index(obj, lineno)
        _check_order(t, last_t, lineno)
        events = obj.get("events")
        if not isinstance(events, list):
            raise FrameFormatError("'events' must be a list", lineno)
        for event in events:
            if not isinstance(event, dict) or event.get("action") not in _ACTIONS:
                raise FrameFormatError("malformed event {!r}".format(event), lineno)
            if not isinstance(event.get("id"), int) or event["id"] < 0:
                raise FrameFormatError("event id must be a nonnegative integer", lineno)
            if event["action"] != TrackAction.DEATH.value:
                event["pos"] = _point(event.get("pos"), lineno)
        yield t, events
        last_t = t


class FeatureBuilder(object):
    """
    Turns tracker output into feature vectors: blob coordinates concatenated
    in id order, with zeros for blobs that are not alive.
    """

    def __init__(self, n_blobs):
        if n_blobs < 1:
            raise MotionOracleInputError("a feature layout needs at least one blob")
        self.n_blobs = n_blobs
        self._positions = np.zeros((n_blobs, 3), dtype=np.float64)
        self._warned = set()

    @property
    def dim(self):
        return 3 * self.n_blobs

    def update(self, events):
        """
        :type events: Iterable[dict | motionoracle.tracker.TrackEvent]
        :rtype: numpy.ndarray
        """
        for event in events:
            if not isinstance(event, dict):
                event = {"id": event.id, "action": event.action.value, "pos": event.pos}
            action = event["action"]
            if action == TrackAction.KILL.value:
                continue
            blob_id = event["id"]
            if blob_id >= self.n_blobs:
                if blob_id not in self._warned:
                    logger.warning("Blob {id} is outside the {n}-blob feature layout and is ignored".format(
                        id=blob_id, n=self.n_blobs))
                    self._warned.add(blob_id)
                continue
            if action == TrackAction.DEATH.value:
                self._positions[blob_id] = 0.0
            else:
                self._positions[blob_id] = event["pos"].to_list()
        return self._positions.ravel().copy()

    def from_update(self, update):
        """
        :type update: motionoracle.tracker.TrackUpdate
        :rtype: tuple[int, numpy.ndarray]
        """
        return update.t, self.update(update.events)


def marker_feature(frame, n_markers):
    """
    Features straight from marker frames, markers taken in stream order.
    """
    feature = np.zeros((n_markers, 3), dtype=np.float64)
    markers = frame.as_array()[:n_markers]
    feature[:len(markers)] = markers
    return feature.ravel()


def read_features(source, n_blobs=None):
    """
    Reads tracker output or raw marker frames as a feature stream.

    :param source: path, open file or iterable of lines
    :param n_blobs: size of the feature layout; by default the largest blob
        id (or marker count) seen plus one
    :rtype: tuple[int, list[tuple[int, numpy.ndarray]]]
    :return: the layout size and the (t, feature) pairs
    """
    records = list(read_jsonl(source))
    if not records:
        return n_blobs or 0, []
    is_track_output = "events" in records[0][1]

    if is_track_output:
        updates = list(updates_from_records(records))
        if n_blobs is None:
            n_blobs = 1 + max((e["id"] for _, events in updates for e in events
                               if e["action"] != TrackAction.KILL.value), default=0)
        builder = FeatureBuilder(n_blobs)
        return n_blobs, [(t, builder.update(events)) for t, events in updates]

    frames = list(frames_from_records(records))
    if n_blobs is None:
        n_blobs = max(1, max(len(frame) for frame in frames))
    return n_blobs, [(frame.t, marker_feature(frame, n_blobs)) for frame in frames]


def paced(items, rate, clock=time.monotonic, sleep=time.sleep):
    """
    Re-emits items no faster than `rate` per second.
    """
    period = 1.0 / rate
    deadline = clock()
    for item in items:
        now = clock()
        if now < deadline:
            sleep(deadline - now)
        deadline = max(deadline, now) + period
        yield item
