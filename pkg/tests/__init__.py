# -*- coding: utf-8 -*-
from __future__ import absolute_import

import os

os.environ['DJANGO_SETTINGS_MODULE'] = 'tests.settings'


import django
django.setup()
