"""
Log lines tagged with the stream being processed and, for per-frame
messages, the frame index:

    [take1.jsonl] Built oracle: T=240 K=3 theta=0.08
    [take1.jsonl t=41] 2 births, 0 deaths, 0 kills
"""
LOG_FMT = "[{id}] {message}"
FRAME_LOG_FMT = "[{id} t={frame}] {message}"


def get_stream_id(obj):
    return getattr(obj, "stream_id", None) or "UNKNOWN"


def motionoracle_logging(logger, level, message, obj, frame=None, **kwargs):
    """
    Logs a message tagged with the stream ID of a registry, oracle or follower.

    Nothing is formatted when the level is disabled, so per-frame calls cost
    little on a quiet logger.

    :type logger: logging.Logger
    :type level: int
    :type message: str
    :type frame: int | None

    :param obj: the object whose stream is being processed
    :param frame: index of the frame the message is about
    :param kwargs: passed on to Logger.log, e.g. exc_info=True
    """
    if not logger.isEnabledFor(level):
        return
    stream_id = get_stream_id(obj)
    if frame is None:
        logline = LOG_FMT.format(id=stream_id, message=message)
    else:
        logline = FRAME_LOG_FMT.format(id=stream_id, frame=frame, message=message)
    logger.log(level, logline, **kwargs)
