"""
    plsga.utils
    -----------

    Generic helper modules: configuration base classes, logging formatters and timers.
"""
from __future__ import absolute_import
from .pyutils import *  # NOQA
