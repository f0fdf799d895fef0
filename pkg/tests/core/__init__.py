# encoding: utf-8

from __future__ import absolute_import, division, print_function, unicode_literals

import io
import os

FIXTURES_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'fixtures')


def fixture_path(name):
    return os.path.join(FIXTURES_DIR, name)


def read_fixture(name):
    with io.open(fixture_path(name), encoding='utf-8') as handle:
        return handle.read()


def load_document(name):
    from dkb.parser import parse_dkb
    return parse_dkb(read_fixture(name))
