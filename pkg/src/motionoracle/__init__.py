# -*- coding: utf-8 -*-
"""motionoracle: marker identity tracking and online gesture following."""

from .version import version as __version__  # noqa: F401
