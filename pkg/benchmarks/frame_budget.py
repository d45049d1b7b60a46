"""
Measures the per-frame cost of tracking and following, and how closely the
follower keeps up with a time-warped gesture.

    python benchmarks/frame_budget.py --frames 600 --max-blobs 10 --oracle-frames 3000 \
        --report frame_budget.json --table doc/benchmark_results.md

The report holds latency statistics in milliseconds for one tracker step and
one follower step, the share of frames that fit the frame budget at the
stream rate, the size of the followed oracle, and the rank correlation
between matched states and time for a clean and a noisy replay. `--table`
also writes the measured values as a markdown table.
"""
import json
import logging
import platform
import time

import click
import numpy as np

from motionoracle.action_graph import ActionGraph
from motionoracle.action_graph import Follower
from motionoracle.evaluation import index_correlation
from motionoracle.simulate import ScenarioSpec
from motionoracle.simulate import simulate
from motionoracle.stream import marker_feature
from motionoracle.tracker import TrackerConfig
from motionoracle.tracker import new_registry
from motionoracle.vmo import build_oracle


logger = logging.getLogger("motionoracle.benchmarks")

GESTURE_FRAMES = 60
THETA = 0.08
# concat stores its gestures and one warped repeat
ORACLE_GESTURES = 9


def _stats(latencies, budget_ms):
    values = np.asarray(latencies)
    return {
        "mean": float(np.mean(values)),
        "std": float(np.std(values)),
        "p50": float(np.percentile(values, 50)),
        "p95": float(np.percentile(values, 95)),
        "max": float(np.max(values)),
        "within_budget": float(np.mean(values <= budget_ms)),
    }


def _gesture_features(spec, n_markers=1):
    frames, _ = simulate(spec)
    return [marker_feature(frame, n_markers) for frame in frames]


def gesture_replay(noise_fraction, seed):
    """
    Follows a warped gesture through an oracle holding several gestures.

    :param noise_fraction: noise deviation as a share of each coordinate's range
    :return: rank correlation between matched states and time
    """
    stored = _gesture_features(ScenarioSpec(kind="concat", duration=GESTURE_FRAMES, seed=seed,
                                            params={"count": 3, "repeat": 0, "warp": 1.2}))
    graph = ActionGraph(build_oracle(stored, THETA))
    live = np.asarray(_gesture_features(ScenarioSpec(kind="gesture", duration=70, seed=seed,
                                                     params={"gesture": 1, "warp": 1.2})))
    if noise_fraction > 0:
        rng = np.random.default_rng(seed)
        live = live + rng.normal(0.0, noise_fraction * np.ptp(live, axis=0), size=live.shape)
    follower = Follower(graph)
    states = [follower.consume(t, feature)["state"] for t, feature in enumerate(live)]
    return index_correlation(states, list(range(len(states))))


def track_latencies(n_frames, max_blobs, clutter, seed):
    frames, _ = simulate(ScenarioSpec(kind="noise", duration=n_frames, seed=seed,
                                      params={"markers": max_blobs, "noise_count": clutter}))
    registry = new_registry(TrackerConfig(max_blobs=max_blobs))
    track_ms = []
    for frame in frames:
        start = time.perf_counter()
        registry.step(frame)
        track_ms.append((time.perf_counter() - start) * 1000)
    return track_ms


def follow_latencies(n_frames, n_markers, oracle_frames, seed):
    """
    Follows a warped gesture through an oracle of about `oracle_frames` states
    holding one cluster per stored gesture.

    :return: the step latencies and the oracle
    """
    per_gesture = max(2, oracle_frames // (ORACLE_GESTURES + 1))
    stored = _gesture_features(ScenarioSpec(kind="concat", duration=per_gesture, seed=seed,
                                            params={"count": ORACLE_GESTURES, "repeat": 0,
                                                    "warp": 1.2, "markers": n_markers}),
                               n_markers)
    oracle = build_oracle(stored, THETA)
    live = _gesture_features(ScenarioSpec(kind="gesture", duration=n_frames, seed=seed,
                                          params={"gesture": 1, "warp": 1.2, "markers": n_markers}),
                             n_markers)
    follower = Follower(ActionGraph(oracle))
    follow_ms = []
    for t, feature in enumerate(live):
        start = time.perf_counter()
        follower.consume(t, feature)
        follow_ms.append((time.perf_counter() - start) * 1000)
    return follow_ms, oracle


def markdown_table(results):
    track, follow = results["track_step_ms"], results["follow_step_ms"]
    rows = [
        ("tracker step p50 (ms)", "{:.3f}".format(track["p50"])),
        ("follower step p50 (ms)", "{:.3f}".format(follow["p50"])),
        ("tracker + follower p50 (ms)", "{:.3f}".format(results["step_p50_ms"])),
        ("frames within the {:.1f} ms budget".format(results["budget_ms"]),
         "{:.1%}".format(min(track["within_budget"], follow["within_budget"]))),
        ("oracle states / clusters", "{T} / {K}".format(**results["oracle"])),
        ("index correlation, clean replay", "{:.4f}".format(results["index_correlation"]["clean"])),
        ("index correlation, 1% noise", "{:.4f}".format(results["index_correlation"]["noise_1pct"])),
    ]
    lines = [
        "Measured with `{}` on {}, Python {}.".format(results["command"], results["machine"],
                                                     results["python"]),
        "",
        "| Measure | Value |",
        "| ------- | ----- |",
    ]
    lines.extend("| {} | {} |".format(name, value) for name, value in rows)
    return "\n".join(lines) + "\n"


@click.command()
@click.option("--frames", type=click.IntRange(min=4), default=600)
@click.option("--max-blobs", type=click.IntRange(min=1), default=10, help="Markers per frame and registry size.")
@click.option("--clutter", type=click.IntRange(min=0), default=0, help="Spurious markers added to every frame.")
@click.option("--oracle-frames", type=click.IntRange(min=20), default=3000)
@click.option("--rate", type=click.FLOAT, default=30.0)
@click.option("--seed", type=click.INT, default=0)
@click.option("--report", type=click.File("w"), default="-")
@click.option("--table", type=click.File("w"), default=None, help="Also write a markdown table.")
def main(frames, max_blobs, clutter, oracle_frames, rate, seed, report, table):
    logging.basicConfig(level=logging.INFO)
    budget_ms = 1000.0 / rate
    track_ms = track_latencies(frames, max_blobs, clutter, seed)
    follow_ms, oracle = follow_latencies(frames, max_blobs, oracle_frames, seed)
    results = {
        "command": "frame_budget.py --frames {} --max-blobs {} --clutter {} --oracle-frames {} --seed {}".format(
            frames, max_blobs, clutter, oracle_frames, seed),
        "machine": platform.machine() or "unknown",
        "python": platform.python_version(),
        "frames": frames,
        "max_blobs": max_blobs,
        "budget_ms": budget_ms,
        "oracle": {"T": oracle.T, "K": oracle.K},
        "track_step_ms": _stats(track_ms, budget_ms),
        "follow_step_ms": _stats(follow_ms, budget_ms),
        "step_p50_ms": float(np.percentile(np.add(track_ms, follow_ms), 50)),
        "index_correlation": {
            "clean": gesture_replay(0.0, seed),
            "noise_1pct": gesture_replay(0.01, seed),
        },
    }
    logger.info("Tracker step: {:.3f} ms median, follower step: {:.3f} ms median, oracle T={} K={}".format(
        results["track_step_ms"]["p50"], results["follow_step_ms"]["p50"], oracle.T, oracle.K))
    report.write(json.dumps(results, indent=2))
    report.write("\n")
    if table is not None:
        table.write(markdown_table(results))


if __name__ == "__main__":
    main()
