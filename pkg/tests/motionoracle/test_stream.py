import io
import json

import numpy as np
import pytest

from motionoracle.core_types import MarkerFrame
from motionoracle.core_types import Point3
from motionoracle.exception import FrameFormatError
from motionoracle.exception import FrameOrderError
from motionoracle.exception import MotionOracleInputError
from motionoracle.stream import FeatureBuilder
from motionoracle.stream import marker_feature
from motionoracle.stream import paced
from motionoracle.stream import read_features
from motionoracle.stream import read_frames
from motionoracle.stream import read_jsonl
from motionoracle.stream import read_track_output
from motionoracle.stream import write_frames
from motionoracle.stream import write_jsonl
from motionoracle.tracker import TrackerConfig
from motionoracle.tracker import new_registry
from tests.util import jsonl
from tests.util import make_frame


class FakeClock(object):
    def __init__(self):
        self.now = 0.0
        self.sleeps = []

    def __call__(self):
        return self.now

    def sleep(self, seconds):
        self.sleeps.append(seconds)
        self.now += seconds


class TestReadFrames:
    def test_single_frame(self):
        frames = list(read_frames(['{"t": 0, "markers": [[0.1, 1.2, 2.0]]}']))
        assert frames == [MarkerFrame(t=0, markers=(Point3(0.1, 1.2, 2.0),))]

    def test_empty_input(self):
        assert list(read_frames(io.StringIO(""))) == []

    def test_blank_lines_are_skipped(self):
        frames = list(read_frames(["\n", '{"t": 0, "markers": []}\n', "  \n", '{"t": 2}\n']))
        assert [(f.t, len(f)) for f in frames] == [(0, 0), (2, 0)]

    @pytest.mark.parametrize("second", [1, 0])
    def test_frame_index_must_increase(self, second):
        lines = ['{"t": 1}', '{"t": ' + str(second) + '}']
        with pytest.raises(FrameOrderError) as excinfo:
            list(read_frames(lines))
        assert "line 2" in str(excinfo.value)

    @pytest.mark.parametrize("line", [
        "not json",
        "[1, 2, 3]",
        '{"markers": []}',
        '{"t": -1, "markers": []}',
        '{"t": true, "markers": []}',
        '{"t": 0, "markers": {}}',
        '{"t": 0, "markers": [[0, 0]]}',
        '{"t": 0, "markers": [[0, 0, "z"]]}',
        '{"t": 0, "markers": [[0, 0, NaN]]}',
    ])
    def test_malformed_line(self, line):
        with pytest.raises(FrameFormatError) as excinfo:
            list(read_frames(['{"t": 0, "markers": []}', line.replace('"t": 0', '"t": 5')]))
        assert excinfo.value.lineno == 2

    def test_read_from_path(self, tmpdir):
        path = tmpdir.join("frames.jsonl")
        path.write(jsonl([{"t": 0, "markers": [[0, 0, 1]]}, {"t": 1, "markers": []}]))
        assert [f.t for f in read_frames(str(path))] == [0, 1]

    def test_write_and_read_back(self):
        frames = [make_frame(0, (0.5, 1.0, 2.0), (1.0, 1.0, 2.0)), make_frame(3)]
        sink = io.StringIO()
        assert write_frames(frames, sink) == 2
        assert list(read_frames(io.StringIO(sink.getvalue()))) == frames

    def test_serializing_what_was_read_reproduces_the_input(self):
        text = jsonl([{"t": 0, "markers": [[0.0, 0.0, 2.0]]},
                      {"t": 4, "markers": [[1.5, -0.25, 3.0], [0.0, 1.0, 2.0]]}])
        sink = io.StringIO()
        write_frames(read_frames(io.StringIO(text)), sink)
        assert sink.getvalue() == text

    def test_write_jsonl_writes_one_object_per_line(self):
        sink = io.StringIO()
        write_jsonl([{"t": 0}, {"t": 1}], sink)
        assert [json.loads(line) for line in sink.getvalue().splitlines()] == [{"t": 0}, {"t": 1}]

    def test_read_jsonl_reports_line_numbers(self):
        assert [lineno for lineno, _ in read_jsonl(["{}", "", "{}"])] == [1, 3]


class TestTrackOutput:
    def test_positions_become_points(self):
        lines = [jsonl([{"t": 0, "events": [{"id": 0, "action": "birth", "pos": [1, 2, 3]}]},
                        {"t": 1, "events": [{"id": 0, "action": "death"}]}])]
        updates = list(read_track_output(io.StringIO(lines[0])))
        assert updates[0] == (0, [{"id": 0, "action": "birth", "pos": Point3(1, 2, 3)}])
        assert updates[1] == (1, [{"id": 0, "action": "death"}])

    @pytest.mark.parametrize("record", [
        {"t": 0},
        {"t": 0, "events": [{"id": 0, "action": "teleport", "pos": [0, 0, 0]}]},
        {"t": 0, "events": [{"id": -1, "action": "birth", "pos": [0, 0, 0]}]},
        {"t": 0, "events": [{"id": 0, "action": "living"}]},
    ])
    def test_malformed_events(self, record):
        with pytest.raises(FrameFormatError):
            list(read_track_output([json.dumps(record)]))


class TestFeatures:
    def test_builder_places_blobs_by_id(self):
        builder = FeatureBuilder(2)
        feature = builder.update([{"id": 1, "action": "birth", "pos": Point3(1, 2, 3)}])
        assert feature.tolist() == [0, 0, 0, 1, 2, 3]
        feature = builder.update([{"id": 0, "action": "birth", "pos": Point3(4, 5, 6)},
                                  {"id": 1, "action": "death"}])
        assert feature.tolist() == [4, 5, 6, 0, 0, 0]

    def test_builder_ignores_kills_and_unknown_blobs(self):
        builder = FeatureBuilder(1)
        feature = builder.update([{"id": 0, "action": "kill", "pos": Point3(9, 9, 9)},
                                  {"id": 3, "action": "birth", "pos": Point3(1, 1, 1)}])
        assert feature.tolist() == [0, 0, 0]

    def test_builder_from_tracker_update(self):
        registry = new_registry(TrackerConfig(max_blobs=1))
        t, feature = FeatureBuilder(1).from_update(registry.step(make_frame(4, (1, 2, 3))))
        assert t == 4
        assert feature.tolist() == [1, 2, 3]

    def test_builder_needs_a_blob(self):
        with pytest.raises(MotionOracleInputError):
            FeatureBuilder(0)

    def test_marker_feature_pads_and_truncates(self):
        frame = make_frame(0, (1, 2, 3), (4, 5, 6))
        assert marker_feature(frame, 3).tolist() == [1, 2, 3, 4, 5, 6, 0, 0, 0]
        assert marker_feature(frame, 1).tolist() == [1, 2, 3]

    def test_features_from_tracker_output(self):
        source = io.StringIO(jsonl([
            {"t": 0, "events": [{"id": 1, "action": "birth", "pos": [1, 2, 3]},
                                {"id": 7, "action": "kill", "pos": [0, 0, 0]}]},
            {"t": 1, "events": [{"id": 1, "action": "death"}]},
        ]))
        n_blobs, features = read_features(source)
        assert n_blobs == 2
        assert [t for t, _ in features] == [0, 1]
        assert features[0][1].tolist() == [0, 0, 0, 1, 2, 3]
        assert not np.any(features[1][1])

    def test_features_from_marker_frames(self):
        source = io.StringIO(jsonl([
            {"t": 0, "markers": [[1, 2, 3], [4, 5, 6]]},
            {"t": 1, "markers": [[7, 8, 9]]},
        ]))
        n_blobs, features = read_features(source)
        assert n_blobs == 2
        assert features[1][1].tolist() == [7, 8, 9, 0, 0, 0]

    def test_features_with_a_fixed_layout(self):
        source = io.StringIO(jsonl([{"t": 0, "markers": [[1, 2, 3]]}]))
        n_blobs, features = read_features(source, n_blobs=3)
        assert n_blobs == 3
        assert features[0][1].shape == (9,)

    def test_features_of_an_empty_stream(self):
        assert read_features(io.StringIO("")) == (0, [])


class TestPaced:
    def test_items_are_spaced_by_the_period(self):
        clock = FakeClock()
        items = list(paced(range(3), 10.0, clock=clock, sleep=clock.sleep))
        assert items == [0, 1, 2]
        assert clock.sleeps == pytest.approx([0.1, 0.1])

    def test_slow_producer_is_not_delayed(self):
        clock = FakeClock()

        def slow():
            for i in range(3):
                clock.now += 1.0
                yield i

        assert list(paced(slow(), 10.0, clock=clock, sleep=clock.sleep)) == [0, 1, 2]
        assert clock.sleeps == []
