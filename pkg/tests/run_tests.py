#!/usr/bin/env python
# encoding: utf-8

from __future__ import absolute_import, division, print_function, unicode_literals

import sys
from os.path import abspath, dirname

import coverage
import pytest


def run_all(argv=None):
    # always measure coverage when running tests through setup.py
    if argv is None:
        argv = ['--verbose']

    cov = coverage.Coverage(source=['dkb'])
    cov.erase()
    cov.start()

    try:
        status = pytest.main(list(argv) + [abspath(dirname(__file__))])
    finally:
        cov.stop()
        cov.save()
        cov.report()

    sys.exit(status)

if __name__ == '__main__':
    run_all(sys.argv[1:])
