import functools
import json
import logging
import logging.config

import click
import numpy as np

from .. import __version__
from ..action_graph import ActionGraph
from ..action_graph import MappingConfig
from ..action_graph import follow_stream
from ..config import MotionOracleConfig
from ..evaluation import evaluate
from ..exception import MotionOracleConfigurationError
from ..exception import MotionOracleContractError
from ..exception import MotionOracleInputError
from ..pipeline import live_stages
from ..pipeline import run_pipeline
from ..simulate import KINDS
from ..simulate import ScenarioSpec
from ..simulate import TruthFrame
from ..simulate import simulate as run_simulation
from ..stream import paced
from ..stream import read_features
from ..stream import read_frames
from ..stream import read_jsonl
from ..stream import write_frames
from ..stream import write_jsonl
from ..tracker import TrackerConfig
from ..tracker import new_registry
from ..tracker import track_frames
from ..vmo import SequenceSpan
from ..vmo import build_oracle
from ..vmo import principal_projection
from ..vmo import read_model
from ..vmo import repeated_segments
from ..vmo import select_threshold
from ..vmo import write_model


logger = logging.getLogger(__name__)

EXIT_INPUT_ERROR = 1
EXIT_CONTRACT_VIOLATION = 2


def _exit_codes(func):
    """
    Maps library errors onto the exit codes of the command line.
    """
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            return func(*args, **kwargs)
        except MotionOracleContractError as e:
            logger.error("Contract violation: {}".format(e))
            click.echo("Error: {}".format(e), err=True)
            ctx.exit(EXIT_CONTRACT_VIOLATION)
        except (MotionOracleInputError, MotionOracleConfigurationError, IOError) as e:
            logger.error("{}".format(e))
            click.echo("Error: {}".format(e), err=True)
            ctx.exit(EXIT_INPUT_ERROR)
    return wrapper


def _configure_logging(config, verbose, quiet):
    logging.config.dictConfig(config.logging_config)
    if verbose:
        logging.getLogger("motionoracle").setLevel(logging.DEBUG)
    elif quiet:
        logging.getLogger("motionoracle").setLevel(logging.WARNING)


def _stream_name(f):
    return getattr(f, "name", None) or "<stream>"


def _load_mapping(path, oracle):
    if path is None:
        return MappingConfig()
    return MappingConfig.load(path).check_against(oracle)


def _model_layout(oracle):
    return int(oracle.metadata.get("n_blobs") or oracle.dim // 3)


def _tracker_config(config, max_blobs, birth_cost, bias):
    return TrackerConfig.from_config(config, max_blobs=max_blobs, birth_cost=birth_cost,
                                     continuity_bias=bias)


@click.group()
@click.version_option(__version__, prog_name="motionoracle")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="YAML configuration file.")
@click.option("-v", "--verbose", is_flag=True, default=False, help="Log per-frame details.")
@click.option("-q", "--quiet", is_flag=True, default=False, help="Only log warnings and errors.")
@click.pass_context
def cli(ctx, config_path, verbose, quiet):
    """Real-time marker tracking and gesture following."""
    try:
        config = MotionOracleConfig(config_path)
    except MotionOracleConfigurationError as e:
        click.echo("Error: {}".format(e), err=True)
        ctx.exit(EXIT_INPUT_ERROR)
    _configure_logging(config, verbose, quiet)
    ctx.obj = config


@cli.command()
@click.option("--input", "source", type=click.File("r"), default="-", help="Marker frames.")
@click.option("--output", type=click.File("w"), default="-", help="Tracker events.")
@click.option("--max-blobs", type=click.INT, default=None, help="Registry capacity.")
@click.option("--birth-cost", type=click.FLOAT, default=None, help="Matching cost of a never seen blob.")
@click.option("--bias", type=click.FLOAT, default=None, help="Continuity bias in (0, 1].")
@click.pass_obj
@_exit_codes
def track(config, source, output, max_blobs, birth_cost, bias):
    """Assign stable identities to the markers of every frame."""
    registry = new_registry(_tracker_config(config, max_blobs, birth_cost, bias),
                            stream_id=_stream_name(source))
    updates = track_frames(registry, read_frames(source))
    write_jsonl((update.to_dict() for update in updates), output)


def _parse_sweep(value):
    try:
        return [float(v) for v in value.split(",") if v.strip()]
    except ValueError as e:
        raise MotionOracleInputError("--theta-sweep must be a comma separated list of numbers") from e


@cli.command()
@click.option("--input", "sources", type=click.File("r"), multiple=True, required=True,
              help="Tracker output or marker frames; repeat to stitch several recordings.")
@click.option("--theta", type=click.FLOAT, default=None, help="Similarity threshold.")
@click.option("--theta-sweep", default=None, help="Comma separated threshold candidates.")
@click.option("--model", type=click.Path(dir_okay=False, writable=True), required=True,
              help="Where to write the model.")
@click.option("--max-blobs", type=click.INT, default=None, help="Size of the feature layout.")
@click.pass_obj
@_exit_codes
def build(config, sources, theta, theta_sweep, model, max_blobs):
    """Learn an oracle from one or more recordings."""
    if theta is not None and theta_sweep is not None:
        raise MotionOracleInputError("--theta and --theta-sweep are mutually exclusive")

    recordings = []
    for source in sources:
        n_blobs, features = read_features(source, max_blobs)
        recordings.append((_stream_name(source), n_blobs, [feature for _, feature in features]))
    n_blobs = max(n for _, n, _ in recordings)
    if not any(frames for _, _, frames in recordings):
        raise MotionOracleInputError("no frames to build a model from")

    frames, sequences = [], []
    for name, n, recording in recordings:
        if not recording:
            logger.warning("Recording {} holds no frames".format(name))
            continue
        start = len(frames) + 1
        # recordings with fewer blobs are zero filled up to the common layout
        frames.extend(np.pad(f, (0, 3 * (n_blobs - n))) for f in recording)
        sequences.append(SequenceSpan(name=name, start=start, end=len(frames)))

    scores = None
    if theta is None:
        theta = config["ORACLE"]["theta"]
    if theta_sweep is not None or theta is None:
        candidates = _parse_sweep(theta_sweep) if theta_sweep else config["ORACLE"]["theta_candidates"]
        theta, scores = select_threshold(frames, candidates)

    oracle = build_oracle(frames, theta, stream_id=model)
    oracle.sequences = sequences
    oracle.metadata["n_blobs"] = n_blobs
    if scores is not None:
        oracle.metadata["theta_scores"] = {repr(k): v for k, v in scores.items()}
    write_model(oracle, model)
    click.echo(json.dumps({"theta": oracle.theta, "T": oracle.T, "K": oracle.K}), err=True)


@cli.command()
@click.option("--model", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--input", "source", type=click.File("r"), default="-",
              help="Tracker output or marker frames.")
@click.option("--mapping", type=click.Path(exists=True, dir_okay=False), default=None,
              help="YAML mapping of clusters and state spans.")
@click.option("--output", type=click.File("w"), default="-")
@click.option("--realtime", is_flag=True, default=False, help="Pace the output at the stream rate.")
@click.option("--rate", type=click.FLOAT, default=None, help="Frames per second for --realtime.")
@click.pass_obj
@_exit_codes
def follow(config, model, source, mapping, output, realtime, rate):
    """Follow an input stream through the gestures of a model."""
    oracle = read_model(model)
    graph = ActionGraph(oracle)
    mapping = _load_mapping(mapping, oracle)
    _, features = read_features(source, _model_layout(oracle))
    if realtime:
        features = paced(features, rate or config["STREAM"]["rate"])
    write_jsonl(follow_stream(graph, features, mapping), output)


@cli.command()
@click.option("--kind", required=True, help="Scenario: {}.".format(", ".join(KINDS)))
@click.option("--frames", type=click.INT, required=True, help="Frames, or frames per gesture for concat.")
@click.option("--seed", type=click.INT, default=0)
@click.option("--rate", type=click.FLOAT, default=None)
@click.option("--markers", type=click.INT, default=None, help="Number of true markers.")
@click.option("--hidden", type=click.INT, default=None, help="Markers covered (occlude, rebirth).")
@click.option("--start", type=click.INT, default=None, help="First covered frame (occlude).")
@click.option("--end", type=click.INT, default=None, help="First frame after the cover (occlude).")
@click.option("--appear", type=click.INT, default=None, help="Frame the covered markers appear (rebirth).")
@click.option("--noise-count", type=click.INT, default=None, help="Spurious markers per frame (noise).")
@click.option("--noise", type=click.FLOAT, default=None, help="Coordinate noise deviation (gesture, concat).")
@click.option("--jitter", type=click.FLOAT, default=None, help="Uniform jitter amplitude.")
@click.option("--gesture", type=click.INT, default=None, help="Gesture number (gesture).")
@click.option("--warp", type=click.FLOAT, default=None, help="Time warp exponent (gesture, concat).")
@click.option("--count", type=click.INT, default=None, help="Number of gestures (concat).")
@click.option("--repeat", type=click.INT, default=None, help="Gesture repeated at the end (concat).")
@click.option("--output", type=click.File("w"), default="-")
@click.option("--truth", type=click.File("w"), default=None, help="Where to write the ground truth.")
@click.pass_obj
@_exit_codes
def simulate(config, kind, frames, seed, rate, output, truth, **params):
    """Generate a synthetic marker stream."""
    spec = ScenarioSpec(kind=kind, duration=frames, rate=rate or config["STREAM"]["rate"], seed=seed,
                        params={k: v for k, v in params.items() if v is not None})
    marker_frames, truth_frames = run_simulation(spec)
    write_frames(marker_frames, output)
    if truth is not None:
        write_jsonl((frame.to_dict() for frame in truth_frames), truth)


@cli.command(name="eval")
@click.option("--truth", type=click.File("r"), required=True)
@click.option("--output", "scored", type=click.File("r"), required=True,
              help="Tracker or follower output to score.")
@click.option("--report", type=click.File("w"), default="-")
@_exit_codes
def eval_command(truth, scored, report):
    """Score an output stream against ground truth."""
    truth_frames = [TruthFrame.from_dict(obj) for _, obj in read_jsonl(truth)]
    metrics = evaluate([obj for _, obj in read_jsonl(scored)], truth_frames)
    report.write(json.dumps(metrics.to_dict(), indent=2, sort_keys=True))
    report.write("\n")


@cli.command()
@click.option("--model", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--min-length", type=click.INT, default=None)
@click.option("--min-lag", type=click.INT, default=None)
@click.option("--projection", is_flag=True, default=False,
              help="Add the first principal component of every state.")
@click.option("--output", type=click.File("w"), default="-")
@click.pass_obj
@_exit_codes
def segments(config, model, min_length, min_lag, projection, output):
    """Report repeated intervals of a model."""
    oracle = read_model(model)
    if min_length is None:
        min_length = config["ORACLE"]["min_segment_length"]
    report = {
        "T": oracle.T,
        "K": oracle.K,
        "theta": oracle.theta,
        "segments": [dict(s._asdict(), length=s.length)
                     for s in repeated_segments(oracle, min_length=min_length, min_lag=min_lag)],
        "sequences": [s._asdict() for s in oracle.sequences],
    }
    if projection:
        report["projection"] = principal_projection(oracle).tolist()
    output.write(json.dumps(report, indent=2))
    output.write("\n")


@cli.command()
@click.option("--input", "source", type=click.File("r"), default="-", help="Marker frames.")
@click.option("--model", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--max-blobs", type=click.INT, default=None, help="Registry capacity.")
@click.option("--birth-cost", type=click.FLOAT, default=None)
@click.option("--bias", type=click.FLOAT, default=None)
@click.option("--mapping", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--output", type=click.File("w"), default="-")
@click.option("--queue-size", type=click.IntRange(min=1), default=8, help="Frames buffered between stages.")
@click.pass_obj
@_exit_codes
def live(config, source, model, max_blobs, birth_cost, bias, mapping, output, queue_size):
    """Track raw marker frames and follow them in one threaded pass."""
    oracle = read_model(model)
    graph = ActionGraph(oracle)
    n_blobs = _model_layout(oracle)
    if max_blobs is None and "n_blobs" in oracle.metadata:
        max_blobs = n_blobs
    registry = new_registry(_tracker_config(config, max_blobs, birth_cost, bias),
                            stream_id=_stream_name(source))
    stages = live_stages(registry, graph, n_blobs, _load_mapping(mapping, oracle))
    write_jsonl(run_pipeline(read_frames(source), stages, maxsize=queue_size), output)
