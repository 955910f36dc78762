# -*- coding: utf-8 -*-
#
# RERO PHONREC
# Copyright (C) 2023 RERO
#
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU Affero General Public License as published by
# the Free Software Foundation, version 3 of the License.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE. See the
# GNU Affero General Public License for more details.
#
# You should have received a copy of the GNU Affero General Public License
# along with this program. If not, see <http://www.gnu.org/licenses/>.

"""
Multilingual phoneme recognizer with phoneme embeddings composed from
articulatory attributes, with zero-shot transfer to unseen inventories.
"""

import os

from setuptools import find_packages, setup

readme = open('README.rst').read()

packages = find_packages(exclude=['tests', 'tests.*', 'scripts'])


# Get the version string. Cannot be done with import!
g = {}
with open(os.path.join('rero_phonrec', 'version.py'), 'rt') as fp:
    exec(fp.read(), g)
    version = g['__version__']

setup(
    name='rero-phonrec',
    version=version,
    description=__doc__,
    long_description=readme,
    keywords='rero-phonrec phoneme recognition CTC articulatory attributes',
    license='AGPL',
    author='RERO',
    author_email='software@rero.ch',
    url='https://github.com/rero/rero-phonrec',
    packages=packages,
    zip_safe=False,
    include_package_data=True,
    package_data={
        'rero_phonrec.features': ['data/*.csv'],
        'rero_phonrec.training': ['data/*.yml'],
    },
    platforms='any',
    python_requires='>=3.8',
    install_requires=[
        'numpy>=1.22',
        'scipy>=1.8',
        'click>=7.1',
        'PyYAML>=5.3.1',
    ],
    extras_require={
        'tests': [
            'pytest>=6.2',
            'pytest-cov>=2.10',
            'pydocstyle>=5.1',
            'isort>=5.6',
            'mock>=2.0.0',
            'autoflake>=1.3.1',
        ],
    },
    entry_points={
        'console_scripts': [
            'rero-phonrec = rero_phonrec.cli:cli',
        ],
    },
    classifiers=[
        'Environment :: Console',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: GNU Affero General Public License v3',
        'Operating System :: OS Independent',
        'Programming Language :: Python',
        'Topic :: Scientific/Engineering :: Artificial Intelligence',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.8',
        'Development Status :: 3 - Alpha',
    ],
)
