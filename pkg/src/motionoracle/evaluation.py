"""
Scores tracker and follower output against simulated ground truth.
"""
import logging
import math
from dataclasses import asdict
from dataclasses import dataclass
from dataclasses import field
from typing import Dict
from typing import Optional

import numpy as np
from scipy.stats import spearmanr

from motionoracle.exception import MotionOracleInputError
from motionoracle.stream import updates_from_records
from motionoracle.tracker import TrackAction


logger = logging.getLogger(__name__)


@dataclass
class TrackingMetrics:
    """
    :ivar identity_switches: frames at which a blob got matched to another
        true identity than the last one it was matched to, summed over blobs
    :ivar births: births of blobs that had been alive before
    :ivar first_sightings: births of blobs that were never alive before
    :ivar position_error: mean and max distance between reported and clean
        positions, overall and per blob id
    :ivar index_correlation: rank correlation between the matched state and
        the frame index, for follower output
    """
    frames: int = 0
    identity_switches: int = 0
    births: int = 0
    first_sightings: int = 0
    deaths: int = 0
    kills: int = 0
    position_error: Dict[str, dict] = field(default_factory=dict)
    index_correlation: Optional[float] = None

    def to_dict(self):
        return asdict(self)


def _check_aligned(output_ts, truth):
    if len(output_ts) != len(truth):
        raise MotionOracleInputError("output holds {n} frames but the ground truth holds {m}".format(
            n=len(output_ts), m=len(truth)))
    for t, frame in zip(output_ts, truth):
        if t != frame.t:
            raise MotionOracleInputError(
                "output frame {t} is aligned with ground truth frame {truth_t}".format(t=t, truth_t=frame.t))


def _event_fields(event):
    if isinstance(event, dict):
        return event["id"], event["action"], event.get("pos")
    return event.id, event.action.value, event.pos


def _nearest_marker(pos, truth_frame):
    markers = np.asarray(truth_frame.markers, dtype=np.float64).reshape(-1, 3)
    if not len(markers):
        raise MotionOracleInputError(
            "frame {t} reports a blob while the ground truth has no marker".format(t=truth_frame.t))
    d = np.linalg.norm(markers - np.asarray(pos.to_list()), axis=1)
    return int(np.argmin(d))


def _error_stats(errors):
    values = np.asarray(errors, dtype=np.float64)
    return {"mean": float(values.mean()), "max": float(values.max()), "count": int(len(values))}


def eval_tracking(updates, truth):
    """
    :param updates: (t, events) pairs as read by
        `motionoracle.stream.read_track_output`, or TrackUpdate objects
    :type truth: Sequence[motionoracle.simulate.TruthFrame]
    :rtype: TrackingMetrics
    :raise MotionOracleInputError: if the streams are not aligned frame by frame
    """
    updates = [(u.t, u.events) if hasattr(u, "events") else u for u in updates]
    _check_aligned([t for t, _ in updates], truth)

    metrics = TrackingMetrics(frames=len(updates))
    identity = {}
    errors = {}
    for (t, events), truth_frame in zip(updates, truth):
        for event in events:
            blob_id, action, pos = _event_fields(event)
            if action == TrackAction.KILL.value:
                metrics.kills += 1
                continue
            if action == TrackAction.DEATH.value:
                metrics.deaths += 1
                continue
            if action == TrackAction.BIRTH.value:
                if blob_id in identity:
                    metrics.births += 1
                else:
                    metrics.first_sightings += 1

            i = _nearest_marker(pos, truth_frame)
            true_id = truth_frame.ids[i]
            if blob_id in identity and identity[blob_id] != true_id:
                metrics.identity_switches += 1
                logger.debug("frame {t}: blob {id} switched from identity {old} to {new}".format(
                    t=t, id=blob_id, old=identity[blob_id], new=true_id))
            identity[blob_id] = true_id
            clean = truth_frame.clean[i]
            errors.setdefault(blob_id, []).append(math.dist(pos.to_list(), clean))

    if errors:
        metrics.position_error = {
            "overall": _error_stats([e for values in errors.values() for e in values]),
            "per_blob": {str(blob_id): _error_stats(values) for blob_id, values in sorted(errors.items())},
        }
    logger.info("Tracking: {switches} identity switches, {births} births, {deaths} deaths, "
                "{kills} kills over {frames} frames".format(switches=metrics.identity_switches,
                                                            births=metrics.births, deaths=metrics.deaths,
                                                            kills=metrics.kills, frames=metrics.frames))
    return metrics


def index_correlation(states, reference):
    """
    Spearman rank correlation, None when either series is constant.
    """
    if len(states) < 2:
        return None
    if np.ptp(np.asarray(states)) == 0 or np.ptp(np.asarray(reference)) == 0:
        return None
    rho = spearmanr(states, reference)[0]
    return None if math.isnan(rho) else float(rho)


def eval_following(records, truth):
    """
    :param records: follower output records
    :type truth: Sequence[motionoracle.simulate.TruthFrame]
    :rtype: TrackingMetrics
    """
    records = list(records)
    _check_aligned([r["t"] for r in records], truth)
    metrics = TrackingMetrics(frames=len(records))
    metrics.index_correlation = index_correlation([r["state"] for r in records],
                                                  [frame.t for frame in truth])
    logger.info("Following: index correlation {rho} over {frames} frames".format(
        rho=metrics.index_correlation, frames=metrics.frames))
    return metrics


def evaluate(records, truth):
    """
    Scores any output stream: follower records carry "best", tracker
    records carry "events".

    :type records: Sequence[dict]
    :rtype: TrackingMetrics
    """
    records = list(records)
    if records and "best" in records[0]:
        return eval_following(records, truth)
    return eval_tracking(list(updates_from_records(enumerate(records, start=1))), truth)
