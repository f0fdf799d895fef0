# encoding: utf-8

from __future__ import absolute_import, division, print_function, unicode_literals

SECRET_KEY = "Please do not spew DeprecationWarnings"

INSTALLED_APPS = []

# Settings for running tests.
DKB_LOGGING = True
DKB_THREADS = 1
DKB_SILENTLY_FAIL = True

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'filters': {
        'dkb_enabled': {
            '()': 'dkb.utils.log.RequireLoggingEnabled',
        },
    },
    'handlers': {
        'null': {
            'class': 'logging.NullHandler',
        },
    },
    'loggers': {
        'dkb': {
            'handlers': ['null'],
            'filters': ['dkb_enabled'],
            'level': 'DEBUG',
            'propagate': False,
        },
    },
}
