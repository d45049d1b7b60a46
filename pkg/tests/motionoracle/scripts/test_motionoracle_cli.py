import json
import logging
import os

import pytest
from click.testing import CliRunner

from motionoracle.scripts.motionoracle_cli import EXIT_CONTRACT_VIOLATION
from motionoracle.scripts.motionoracle_cli import EXIT_INPUT_ERROR
from motionoracle.scripts.motionoracle_cli import cli
from motionoracle.vmo import oracle_new
from motionoracle.vmo import read_model
from motionoracle.vmo import write_model


def read_records(path):
    with open(path) as f:
        return [json.loads(line) for line in f if line.strip()]


def read_text(path):
    with open(path) as f:
        return f.read()


@pytest.fixture(autouse=True)
def restore_logging():
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)
    logging.getLogger("motionoracle").setLevel(logging.NOTSET)


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def workdir(tmpdir):
    class Paths(object):
        def __getattr__(self, name):
            return str(tmpdir.join(name.replace("_", ".", 1)))
    return Paths()


def invoke(runner, *args):
    result = runner.invoke(cli, [str(a) for a in args], catch_exceptions=False)
    return result


@pytest.fixture
def recorded(runner, workdir):
    """A simulated two gesture recording, its tracker output and a model learned from it."""
    assert invoke(runner, "simulate", "--kind", "concat", "--frames", 30, "--count", 2, "--repeat", 1,
                  "--seed", 1, "--output", workdir.frames_jsonl, "--truth", workdir.truth_jsonl).exit_code == 0
    assert invoke(runner, "track", "--input", workdir.frames_jsonl, "--output", workdir.track_jsonl,
                  "--max-blobs", 1).exit_code == 0
    assert invoke(runner, "build", "--input", workdir.track_jsonl, "--theta", 0.08,
                  "--model", workdir.model_json).exit_code == 0
    return workdir


class TestSimulateAndTrack:
    def test_simulate_writes_frames_and_truth(self, recorded):
        frames = read_records(recorded.frames_jsonl)
        truth = read_records(recorded.truth_jsonl)
        assert len(frames) == len(truth) == 90
        assert set(frames[0]) == {"t", "markers"}
        assert truth[0]["gesture"] == 0

    def test_simulate_is_deterministic(self, runner, workdir):
        for name in (workdir.first_jsonl, workdir.second_jsonl):
            result = invoke(runner, "simulate", "--kind", "noise", "--frames", 20, "--seed", 7,
                            "--noise-count", 2, "--output", name)
            assert result.exit_code == 0
        assert read_text(workdir.first_jsonl) == read_text(workdir.second_jsonl)

    def test_track_is_deterministic(self, runner, recorded):
        invoke(runner, "track", "--input", recorded.frames_jsonl, "--output", recorded.again_jsonl,
               "--max-blobs", 1)
        assert read_text(recorded.again_jsonl) == read_text(recorded.track_jsonl)

    def test_track_output(self, recorded):
        updates = read_records(recorded.track_jsonl)
        assert [u["t"] for u in updates] == list(range(90))
        assert updates[0]["events"][0]["action"] == "birth"
        assert all(u["events"][0]["action"] == "living" for u in updates[1:])

    def test_eval_tracking(self, runner, recorded):
        result = invoke(runner, "eval", "--truth", recorded.truth_jsonl, "--output", recorded.track_jsonl,
                        "--report", recorded.report_json)
        assert result.exit_code == 0
        report = json.loads(read_text(recorded.report_json))
        assert report["frames"] == 90
        assert report["identity_switches"] == 0
        assert report["first_sightings"] == 1

    def test_occlusion_end_to_end(self, runner, workdir):
        invoke(runner, "simulate", "--kind", "occlude", "--frames", 60, "--start", 20, "--end", 40,
               "--output", workdir.frames_jsonl, "--truth", workdir.truth_jsonl)
        invoke(runner, "track", "--input", workdir.frames_jsonl, "--output", workdir.track_jsonl)
        invoke(runner, "eval", "--truth", workdir.truth_jsonl, "--output", workdir.track_jsonl,
               "--report", workdir.report_json)
        report = json.loads(read_text(workdir.report_json))
        assert (report["identity_switches"], report["deaths"], report["births"]) == (0, 2, 2)


class TestBuildAndFollow:
    def test_model_holds_the_recording(self, recorded):
        oracle = read_model(recorded.model_json)
        assert oracle.T == 90
        assert oracle.theta == 0.08
        assert oracle.metadata["n_blobs"] == 1
        assert [(s.start, s.end) for s in oracle.sequences] == [(1, 90)]

    def test_replaying_the_recording_costs_nothing(self, runner, recorded):
        result = invoke(runner, "follow", "--model", recorded.model_json, "--input", recorded.track_jsonl,
                        "--output", recorded.follow_jsonl)
        assert result.exit_code == 0
        records = read_records(recorded.follow_jsonl)
        assert len(records) == 90
        assert all(r["added"] == 0.0 for r in records)
        assert all(r["cost"] == 0.0 for r in records)
        assert [r["state"] for r in records[:60]] == list(range(1, 61))
        assert {r["sequence"] for r in records} == {recorded.track_jsonl}

    def test_follow_with_mapping_and_pacing(self, runner, recorded):
        with open(recorded.mapping_yaml, "w") as f:
            f.write("categorical:\n  0: lights\ntemporal:\n  - name: intro\n    start: 1\n    end: 30\n")
        result = invoke(runner, "follow", "--model", recorded.model_json, "--input", recorded.track_jsonl,
                        "--mapping", recorded.mapping_yaml, "--realtime", "--rate", 1000,
                        "--output", recorded.follow_jsonl)
        assert result.exit_code == 0
        records = read_records(recorded.follow_jsonl)
        assert records[0]["event"] == "lights"
        assert records[0]["scrub"] == {"timeline": "intro", "position": 0.0}
        assert records[29]["scrub"] == {"timeline": "intro", "position": 1.0}
        assert records[30]["scrub"] is None

    def test_live_matches_track_then_follow(self, runner, recorded):
        invoke(runner, "follow", "--model", recorded.model_json, "--input", recorded.track_jsonl,
               "--output", recorded.follow_jsonl)
        result = invoke(runner, "live", "--input", recorded.frames_jsonl, "--model", recorded.model_json,
                        "--queue-size", 2, "--output", recorded.live_jsonl)
        assert result.exit_code == 0
        assert read_text(recorded.live_jsonl) == read_text(recorded.follow_jsonl)

    def test_eval_following(self, runner, recorded):
        invoke(runner, "follow", "--model", recorded.model_json, "--input", recorded.track_jsonl,
               "--output", recorded.follow_jsonl)
        invoke(runner, "eval", "--truth", recorded.truth_jsonl, "--output", recorded.follow_jsonl,
               "--report", recorded.report_json)
        report = json.loads(read_text(recorded.report_json))
        assert report["index_correlation"] > 0

    def test_build_from_several_recordings(self, runner, recorded):
        result = invoke(runner, "build", "--input", recorded.track_jsonl, "--input", recorded.frames_jsonl,
                        "--theta", 0.08, "--model", recorded.both_json)
        assert result.exit_code == 0
        oracle = read_model(recorded.both_json)
        assert oracle.T == 180
        assert [(s.name, s.start, s.end) for s in oracle.sequences] == [
            (recorded.track_jsonl, 1, 90), (recorded.frames_jsonl, 91, 180)]

    def test_build_with_a_threshold_sweep(self, runner, recorded):
        result = invoke(runner, "build", "--input", recorded.track_jsonl, "--theta-sweep", "0.001,0.08,10",
                        "--model", recorded.swept_json)
        assert result.exit_code == 0
        oracle = read_model(recorded.swept_json)
        assert oracle.theta in (0.001, 0.08, 10.0)
        assert set(oracle.metadata["theta_scores"]) == {"0.001", "0.08", "10.0"}

    def test_build_takes_the_threshold_from_the_config(self, runner, recorded):
        with open(recorded.config_yaml, "w") as f:
            f.write("ORACLE:\n  theta: 0.5\n")
        result = invoke(runner, "--config", recorded.config_yaml, "build", "--input", recorded.track_jsonl,
                        "--model", recorded.configured_json)
        assert result.exit_code == 0
        assert read_model(recorded.configured_json).theta == 0.5

    def test_segments_report(self, runner, recorded):
        result = invoke(runner, "segments", "--model", recorded.model_json, "--projection",
                        "--output", recorded.segments_json)
        assert result.exit_code == 0
        report = json.loads(read_text(recorded.segments_json))
        assert set(report) == {"T", "K", "theta", "segments", "sequences", "projection"}
        assert report["T"] == 90
        assert len(report["projection"]) == 90
        assert report["sequences"] == [{"name": recorded.track_jsonl, "start": 1, "end": 90}]
        for segment in report["segments"]:
            assert segment["length"] == segment["end"] - segment["start"] + 1 >= 4


class TestExitCodes:
    def test_malformed_frames(self, runner, workdir):
        with open(workdir.frames_jsonl, "w") as f:
            f.write('{"t": 0, "markers": []}\n{"t": 1, "markers": [[0, 0]]}\n')
        result = invoke(runner, "track", "--input", workdir.frames_jsonl, "--output", workdir.track_jsonl)
        assert result.exit_code == EXIT_INPUT_ERROR
        assert "line 2" in result.output

    def test_unordered_frames(self, runner, workdir):
        with open(workdir.frames_jsonl, "w") as f:
            f.write('{"t": 3, "markers": []}\n{"t": 1, "markers": []}\n')
        result = invoke(runner, "track", "--input", workdir.frames_jsonl, "--output", workdir.track_jsonl)
        assert result.exit_code == EXIT_INPUT_ERROR

    def test_truncated_model(self, runner, recorded):
        with open(recorded.model_json) as f:
            document = f.read()
        with open(recorded.model_json, "w") as f:
            f.write(document[:len(document) // 2])
        result = invoke(runner, "follow", "--model", recorded.model_json, "--input", recorded.track_jsonl)
        assert result.exit_code == EXIT_INPUT_ERROR
        assert "Error:" in result.output

    def test_mapping_for_an_unknown_cluster(self, runner, recorded):
        with open(recorded.mapping_yaml, "w") as f:
            f.write("categorical:\n  99: lights\n")
        result = invoke(runner, "follow", "--model", recorded.model_json, "--input", recorded.track_jsonl,
                        "--mapping", recorded.mapping_yaml)
        assert result.exit_code == EXIT_INPUT_ERROR

    def test_conflicting_threshold_options(self, runner, recorded):
        result = invoke(runner, "build", "--input", recorded.track_jsonl, "--theta", 0.1,
                        "--theta-sweep", "0.1,0.2", "--model", recorded.other_json)
        assert result.exit_code == EXIT_INPUT_ERROR
        assert not os.path.exists(recorded.other_json)

    def test_build_from_an_empty_recording(self, runner, workdir):
        with open(workdir.empty_jsonl, "w"):
            pass
        result = invoke(runner, "build", "--input", workdir.empty_jsonl, "--theta", 0.1,
                        "--model", workdir.model_json)
        assert result.exit_code == EXIT_INPUT_ERROR

    def test_invalid_scenario_parameters(self, runner, workdir):
        result = invoke(runner, "simulate", "--kind", "occlude", "--frames", 10, "--markers", 2,
                        "--hidden", 3, "--output", workdir.frames_jsonl)
        assert result.exit_code == EXIT_INPUT_ERROR

    def test_broken_config_file(self, runner, workdir):
        with open(workdir.config_yaml, "w") as f:
            f.write("TRACKER: [max_blobs\n")
        result = invoke(runner, "--config", workdir.config_yaml, "simulate", "--kind", "cross",
                        "--frames", 5, "--output", workdir.frames_jsonl)
        assert result.exit_code == EXIT_INPUT_ERROR

    def test_following_an_empty_model_breaks_the_contract(self, runner, workdir):
        write_model(oracle_new(0.1), workdir.model_json)
        with open(workdir.frames_jsonl, "w") as f:
            f.write('{"t": 0, "markers": [[0, 1, 2]]}\n')
        result = invoke(runner, "follow", "--model", workdir.model_json, "--input", workdir.frames_jsonl)
        assert result.exit_code == EXIT_CONTRACT_VIOLATION

    def test_unknown_scenario_kind_is_an_input_error(self, runner, workdir):
        result = invoke(runner, "simulate", "--kind", "juggle", "--frames", 10)
        assert result.exit_code == EXIT_INPUT_ERROR
        assert "unknown scenario kind" in result.output

    def test_version(self, runner):
        result = invoke(runner, "--version")
        assert result.exit_code == 0
        assert "motionoracle" in result.output
