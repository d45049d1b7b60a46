"""
Seeded synthetic scenarios for the tracker and the follower.

    cross     markers pass each other in depth, swapping sides
    occlude   some markers vanish for a window and reappear near where they left
    rebirth   some markers are covered at the start and appear later
    noise     spurious markers are added to every frame
    gesture   markers follow one parametric gesture, optionally time warped
    concat    several gestures back to back, followed by a warped repeat of one

Marker order within a frame is shuffled; the ground truth records the true
identity of every marker in frame order.
"""
import logging
from dataclasses import dataclass
from dataclasses import field
from typing import List
from typing import Optional

import numpy as np

from motionoracle.core_types import MarkerFrame
from motionoracle.core_types import Point3
from motionoracle.exception import ScenarioError


logger = logging.getLogger(__name__)

KINDS = ("cross", "occlude", "rebirth", "noise", "gesture", "concat")

STAGE_LOW = np.array([-2.0, 0.0, 1.0])
STAGE_HIGH = np.array([2.0, 2.0, 4.0])


@dataclass(frozen=True)
class ScenarioSpec:
    """
    :ivar kind: one of KINDS
    :ivar duration: number of frames; frames per gesture for `concat`
    :ivar rate: frames per second, metadata only
    :ivar params: kind specific parameters, see the generators below
    """
    kind: str
    duration: int
    rate: float = 30.0
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ScenarioError("unknown scenario kind '{}', expected one of {}".format(
                self.kind, ", ".join(KINDS)))
        if int(self.duration) != self.duration or self.duration < 1:
            raise ScenarioError("duration must be a positive integer, got {}".format(self.duration))
        if not self.rate > 0:
            raise ScenarioError("rate must be positive, got {}".format(self.rate))

    def param(self, name, default):
        value = self.params.get(name)
        return default if value is None else value


@dataclass(frozen=True)
class TruthFrame:
    """
    :ivar ids: true identity of every observed marker, in frame order; -1 for clutter
    :ivar clean: noise free position of every observed marker
    :ivar index: position of the frame inside its gesture, for gesture scenarios
    :ivar gesture: gesture the frame was sampled from
    """
    t: int
    ids: List[int]
    markers: List[List[float]]
    clean: List[List[float]]
    index: Optional[int] = None
    gesture: Optional[int] = None

    def to_dict(self):
        record = {"t": self.t, "ids": self.ids, "markers": self.markers, "clean": self.clean}
        if self.index is not None:
            record["index"] = self.index
        if self.gesture is not None:
            record["gesture"] = self.gesture
        return record

    @classmethod
    def from_dict(cls, record):
        return cls(t=record["t"], ids=list(record["ids"]), markers=record["markers"],
                   clean=record.get("clean", record["markers"]),
                   index=record.get("index"), gesture=record.get("gesture"))


class _Recorder(object):
    def __init__(self, rng):
        self.rng = rng
        self.frames = []
        self.truth = []

    def emit(self, t, ids, clean, observed, index=None, gesture=None):
        order = self.rng.permutation(len(ids))
        ids = [int(ids[i]) for i in order]
        clean = [list(map(float, clean[i])) for i in order]
        observed = [list(map(float, observed[i])) for i in order]
        self.frames.append(MarkerFrame(t=t, markers=tuple(Point3.from_sequence(p) for p in observed)))
        self.truth.append(TruthFrame(t=t, ids=ids, markers=observed, clean=clean,
                                     index=index, gesture=gesture))


def _jitter(rng, shape, amount):
    if amount <= 0:
        return np.zeros(shape)
    return rng.uniform(-amount, amount, size=shape)


def _line_up(n, spacing):
    """Markers side by side along x, centered on stage."""
    xs = (np.arange(n) - (n - 1) / 2.0) * spacing
    return np.stack([xs, np.full(n, 1.0), np.full(n, 2.5)], axis=1)


def _sway(base, t, rate, amplitude, phases):
    """Slow motion around a base position."""
    w = 2 * np.pi * 0.25 / rate
    offset = np.stack([np.sin(w * t + phases), np.cos(w * t + phases), np.zeros_like(phases)], axis=1)
    return base + amplitude * offset


def _cross(spec, rec):
    n = int(spec.param("markers", 2))
    separation = float(spec.param("separation", 0.6))
    near, far = float(spec.param("near", 1.5)), float(spec.param("far", 3.5))
    jitter = float(spec.param("jitter", 0.002))
    base = _line_up(n, separation)
    for t in range(spec.duration):
        s = t / max(1, spec.duration - 1)
        clean = base.copy()
        for i in range(n):
            clean[i, 2] = near + (far - near) * (s if i % 2 == 0 else 1 - s)
        rec.emit(t, range(n), clean, clean + _jitter(rec.rng, clean.shape, jitter))


def _visible_sway(spec, rec, hidden_at):
    n = int(spec.param("markers", 4))
    spacing = float(spec.param("spacing", 0.6))
    amplitude = float(spec.param("amplitude", 0.05))
    jitter = float(spec.param("jitter", 0.002))
    base = _line_up(n, spacing)
    phases = rec.rng.uniform(0, 2 * np.pi, size=n)
    for t in range(spec.duration):
        clean = _sway(base, t, spec.rate, amplitude, phases)
        observed = clean + _jitter(rec.rng, clean.shape, jitter)
        visible = [i for i in range(n) if not hidden_at(t, i)]
        rec.emit(t, visible, clean[visible], observed[visible])


def _occlude(spec, rec):
    n = int(spec.param("markers", 4))
    hidden = int(spec.param("hidden", 2))
    start = int(spec.param("start", spec.duration // 3))
    end = int(spec.param("end", 2 * spec.duration // 3))
    if not 0 <= hidden <= n or not 0 <= start <= end:
        raise ScenarioError("occlude needs 0 <= hidden <= markers and start <= end")
    # inner markers are the ones covered
    first = (n - hidden) // 2
    covered = set(range(first, first + hidden))
    _visible_sway(spec, rec, lambda t, i: start <= t < end and i in covered)


def _rebirth(spec, rec):
    n = int(spec.param("markers", 4))
    hidden = int(spec.param("hidden", 2))
    appear = int(spec.param("appear", max(1, spec.duration // 2)))
    if not 0 <= hidden <= n:
        raise ScenarioError("rebirth needs 0 <= hidden <= markers")
    covered = set(range(n - hidden, n))
    _visible_sway(spec, rec, lambda t, i: t < appear and i in covered)


def _noise(spec, rec):
    n = int(spec.param("markers", 2))
    count = int(spec.param("noise_count", 1))
    spacing = float(spec.param("spacing", 0.6))
    amplitude = float(spec.param("amplitude", 0.05))
    jitter = float(spec.param("jitter", 0.002))
    base = _line_up(n, spacing)
    phases = rec.rng.uniform(0, 2 * np.pi, size=n)
    for t in range(spec.duration):
        clean = _sway(base, t, spec.rate, amplitude, phases)
        observed = clean + _jitter(rec.rng, clean.shape, jitter)
        clutter = rec.rng.uniform(STAGE_LOW, STAGE_HIGH, size=(count, 3))
        ids = list(range(n)) + [-1] * count
        rec.emit(t, ids, np.vstack([clean, clutter]), np.vstack([observed, clutter]))


def gesture_curve(gesture, s, n_markers=1):
    """
    Positions of every marker at phase s in [0, 1] of one gesture. Gestures
    are half turns of a slanted arc, two meters apart along x.

    :rtype: numpy.ndarray
    :return: (n_markers, 3) positions
    """
    radius, height = 0.5, 0.5
    direction = 1.0 if gesture % 2 == 0 else -1.0
    center = np.array([2.0 * gesture - 2.0, 1.0, 2.5])
    arc = np.array([
        radius * np.cos(np.pi * s),
        radius * np.sin(np.pi * s) * (1.0 + 0.2 * gesture),
        direction * height * (s - 0.5),
    ])
    offsets = np.stack([np.zeros(n_markers), 0.3 * np.arange(n_markers), np.zeros(n_markers)], axis=1)
    return center + arc + offsets


def sample_gesture(gesture, length, warp=1.0, n_markers=1):
    """
    :param length: number of frames
    :param warp: exponent applied to the phase; 1 is the nominal timing
    :rtype: tuple[list[numpy.ndarray], list[int]]
    :return: clean positions and the nominal index of every frame
    """
    positions, indices = [], []
    for i in range(length):
        s = (i / max(1, length - 1)) ** warp
        positions.append(gesture_curve(gesture, s, n_markers))
        indices.append(int(round(s * (length - 1))))
    return positions, indices


def _emit_gesture(spec, rec, t0, gesture, length, warp):
    n = int(spec.param("markers", 1))
    noise = float(spec.param("noise", 0.0))
    positions, indices = sample_gesture(gesture, length, warp, n)
    for offset, (clean, index) in enumerate(zip(positions, indices)):
        observed = clean + (rec.rng.normal(0.0, noise, size=clean.shape) if noise > 0 else 0.0)
        # gesture markers keep their identity order so features line up
        rec.emit(t0 + offset, range(n), clean, observed, index=index, gesture=gesture)
        rec.truth[-1], rec.frames[-1] = _unshuffled(rec.truth[-1], rec.frames[-1])
    return t0 + length


def _unshuffled(truth, frame):
    order = np.argsort(truth.ids, kind="stable")
    markers = [truth.markers[i] for i in order]
    truth = TruthFrame(t=truth.t, ids=[truth.ids[i] for i in order], markers=markers,
                       clean=[truth.clean[i] for i in order], index=truth.index, gesture=truth.gesture)
    frame = MarkerFrame(t=frame.t, markers=tuple(Point3.from_sequence(p) for p in markers))
    return truth, frame


def _gesture(spec, rec):
    _emit_gesture(spec, rec, 0, int(spec.param("gesture", 0)), spec.duration,
                  float(spec.param("warp", 1.0)))


def _concat(spec, rec):
    count = int(spec.param("count", 3))
    repeat = int(spec.param("repeat", 0))
    warp = float(spec.param("warp", 1.2))
    if count < 1 or not 0 <= repeat < count:
        raise ScenarioError("concat needs count >= 1 and 0 <= repeat < count")
    t = 0
    for gesture in range(count):
        t = _emit_gesture(spec, rec, t, gesture, spec.duration, 1.0)
    _emit_gesture(spec, rec, t, repeat, spec.duration, warp)


_GENERATORS = {
    "cross": _cross,
    "occlude": _occlude,
    "rebirth": _rebirth,
    "noise": _noise,
    "gesture": _gesture,
    "concat": _concat,
}


def simulate(spec):
    """
    :type spec: ScenarioSpec
    :rtype: tuple[list[motionoracle.core_types.MarkerFrame], list[TruthFrame]]
    """
    rec = _Recorder(np.random.default_rng(spec.seed))
    _GENERATORS[spec.kind](spec, rec)
    logger.info("Simulated {kind} scenario: {n} frames (seed {seed})".format(
        kind=spec.kind, n=len(rec.frames), seed=spec.seed))
    return rec.frames, rec.truth
