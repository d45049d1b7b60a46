"""
A linear pipeline of stages running on worker threads.

Each stage is a function from an iterator of items to an iterator of items
and runs on its own thread. Stages are linked by bounded queues, so a slow
stage holds back the ones before it and items keep their order. An
exception in any stage stops the whole pipeline and is raised again to the
consumer.
"""
import logging
import queue
import threading

from motionoracle.action_graph import Follower
from motionoracle.stream import FeatureBuilder
from motionoracle.tracker import track_frames


logger = logging.getLogger(__name__)

_DONE = object()
_POLL = 0.1


class _Failure(object):
    def __init__(self, error):
        self.error = error


class _Stage(threading.Thread):
    def __init__(self, name, func, inbox, outbox, stop):
        super().__init__(name="motionoracle-{}".format(name), daemon=True)
        self.func = func
        self.inbox = inbox
        self.outbox = outbox
        self.stop = stop
        self.failed = None

    def _put(self, item):
        return _put(self.outbox, item, self.stop)

    def _items(self):
        while not self.stop.is_set():
            try:
                item = self.inbox.get(timeout=_POLL)
            except queue.Empty:
                continue
            if item is _DONE:
                return
            if isinstance(item, _Failure):
                self.failed = item
                return
            yield item

    def run(self):
        try:
            for item in self.func(self._items()):
                if not self._put(item):
                    return
        except Exception as e:
            logger.debug("Stage {name} failed: {error}".format(name=self.name, error=e))
            self._put(_Failure(e))
            return
        self._put(self.failed or _DONE)


def _put(outbox, item, stop):
    while not stop.is_set():
        try:
            outbox.put(item, timeout=_POLL)
            return True
        except queue.Full:
            continue
    return False


def _feed(source, outbox, stop):
    try:
        for item in source:
            if not _put(outbox, item, stop):
                return
    except Exception as e:
        logger.debug("Pipeline source failed: {}".format(e))
        _put(outbox, _Failure(e), stop)
        return
    _put(outbox, _DONE, stop)


def run_pipeline(source, stages, maxsize=8):
    """
    :param source: iterable feeding the first stage, read on its own thread
    :param stages: (name, function) pairs applied in order
    :param maxsize: capacity of every queue between two stages
    :rtype: Iterator
    :return: the items leaving the last stage, in order
    """
    stop = threading.Event()
    queues = [queue.Queue(maxsize=maxsize) for _ in range(len(stages) + 1)]
    threads = [threading.Thread(target=_feed, args=(source, queues[0], stop),
                                name="motionoracle-source", daemon=True)]
    threads.extend(_Stage(name, func, queues[i], queues[i + 1], stop)
                   for i, (name, func) in enumerate(stages))
    for thread in threads:
        thread.start()
    logger.debug("Pipeline started with {} stages".format(len(stages)))

    sink = queues[-1]
    try:
        while True:
            item = sink.get()
            if item is _DONE:
                break
            if isinstance(item, _Failure):
                raise item.error
            yield item
    finally:
        stop.set()
        for thread in threads:
            thread.join(timeout=1.0)


def live_stages(registry, graph, n_blobs, mapping=None):
    """
    Stages tracking raw marker frames and following the tracked blobs.

    :type registry: motionoracle.tracker.Registry
    :type graph: motionoracle.action_graph.ActionGraph
    :rtype: list[tuple[str, Callable]]
    """
    builder = FeatureBuilder(n_blobs)
    follower = Follower(graph, mapping)

    def track(frames):
        return track_frames(registry, frames)

    def features(updates):
        for update in updates:
            yield builder.from_update(update)

    def follow(items):
        for t, feature in items:
            yield follower.consume(t, feature)

    return [("track", track), ("features", features), ("follow", follow)]
