# encoding: utf-8

from __future__ import absolute_import, division, print_function, unicode_literals

import logging

from dkb.constants import get_setting


class RequireLoggingEnabled(logging.Filter):
    """
    Passes records only while ``DKB_LOGGING`` is on. Attach it to the ``dkb``
    logger from ``settings.LOGGING``::

        'filters': {'dkb_enabled': {'()': 'dkb.utils.log.RequireLoggingEnabled'}},
        'loggers': {'dkb': {'handlers': ['console'], 'filters': ['dkb_enabled']}},
    """

    def filter(self, record):
        return bool(get_setting('DKB_LOGGING', True))
