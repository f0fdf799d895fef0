# encoding: utf-8

from __future__ import absolute_import, division, print_function, unicode_literals

from django.conf import settings
from django.core.exceptions import ImproperlyConfigured


def get_setting(name, default):
    """
    Reads ``name`` from the Django settings, falling back to ``default`` when
    no settings module has been configured.
    """
    try:
        return getattr(settings, name, default)
    except ImproperlyConfigured:
        return default


def get_bound(name, default):
    value = get_setting(name, default)

    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise ImproperlyConfigured("The '%s' setting must be a non-negative integer, got %r." % (name, value))

    return value


# Exploration bounds, used when the caller passes none.
DEFAULT_MAX_DEPTH = get_bound('DKB_MAX_DEPTH', 8)
DEFAULT_MAX_STATES = get_bound('DKB_MAX_STATES', 10000)
DEFAULT_FRESH_POOL = get_bound('DKB_FRESH_POOL', 8)
DEFAULT_THREADS = get_bound('DKB_THREADS', 1) or 1

FRESH_PREFIX = get_setting('DKB_FRESH_PREFIX', 'n')

# Prefix marking existential variables in guards and query text.
EXISTENTIAL_PREFIX = '_'
WILDCARD_NAME = '_'

# Fresh existential variables introduced by rewriting and blocking queries.
REWRITE_VAR_PREFIX = '_v'
BLOCKING_VAR_PREFIX = '_z'


def strict_functionality():
    return bool(get_setting('DKB_STRICT_FUNCTIONALITY', False))


def silently_fail():
    return bool(get_setting('DKB_SILENTLY_FAIL', True))
