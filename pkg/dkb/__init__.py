# -*- coding: utf-8 -*-

__author__ = """Dynamic KB contributors"""
__email__ = 'dkb@example.org'
__version__ = '0.1.0'
