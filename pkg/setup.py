#!/usr/bin/env python
# -*- coding: utf-8 -*-

from setuptools import setup

with open('README.rst') as readme_file:
    readme = readme_file.read()

with open('HISTORY.rst') as history_file:
    history = history_file.read()

requirements = [
    'Django>=1.8',
]

test_requirements = [
    'pytest',
    'hypothesis',
    'mock',
    'coverage',
]

setup(
    name='dynamic-knowledge-bases',
    version='0.1.0',
    description="Verification of actions over DL-Lite knowledge bases, with blocking queries and partial runs.",
    long_description=readme + '\n\n' + history,
    author="Dynamic KB contributors",
    author_email='dkb@example.org',
    packages=[
        'dkb',
        'dkb.utils',
    ],
    package_dir={'dkb': 'dkb'},
    include_package_data=True,
    install_requires=requirements,
    entry_points={
        'console_scripts': [
            'dkb=dkb.cli:run',
        ],
    },
    license="BSD license",
    zip_safe=False,
    keywords='dkb description-logics dl-lite knowledge-bases verification',
    classifiers=[
        'Development Status :: 2 - Pre-Alpha',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: BSD License',
        'Natural Language :: English',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.6',
        'Programming Language :: Python :: 3.7',
        'Programming Language :: Python :: 3.8',
    ],
    test_suite='tests.run_tests.run_all',
    tests_require=test_requirements
)
