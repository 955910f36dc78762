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

"""Utilities."""

import hashlib
import json
import unicodedata

import click
import numpy as np
import yaml

from .config import RunConfig


def nfd(text):
    """Unicode NFD normalisation of IPA strings."""
    return unicodedata.normalize('NFD', text.strip())


def get_rng(seed):
    """Seeded numpy random generator."""
    return np.random.default_rng(seed)


def create_md5(record):
    """Create md5 for a JSON compatible record."""
    data_md5 = hashlib.md5(
        json.dumps(record, sort_keys=True, ensure_ascii=False).encode('utf-8')
    ).hexdigest()
    return data_md5


def progressbar(items, length=0, verbose=False, label=None):
    """Verbose progress bar."""
    if verbose:
        with click.progressbar(
                items, label=label or str(length), length=length
        ) as progressbar_items:
            for item in progressbar_items:
                yield item
    else:
        for item in items:
            yield item


class JsonLinesWriter(object):
    """Line delimited JSON writer."""

    def __init__(self, filename, mode='w'):
        """Constructor.

        :param filename: File name of the file to be written.
        :param mode: ``a`` appends to an existing file.
        """
        self.count = 0
        self.file_handle = open(filename, mode, encoding='utf-8')

    def __enter__(self):
        """Context manager entry."""
        return self

    def __exit__(self, *args):
        """Context manager exit."""
        self.close()

    def write(self, data):
        """Write one record as a line.

        :param data: JSON data to write into the file.
        """
        self.file_handle.write(
            json.dumps(data, separators=(',', ':'), ensure_ascii=False))
        self.file_handle.write('\n')
        self.file_handle.flush()
        self.count += 1

    def close(self):
        """Close file."""
        if self.file_handle:
            self.file_handle.close()
            self.file_handle = None


def read_json_lines(file_name):
    """Read records written by :class:`JsonLinesWriter`."""
    with open(file_name, encoding='utf-8') as handle:
        for line in handle:
            if line.strip():
                yield json.loads(line)


def run_options(func):
    """Add the run configuration options to a command."""
    options = [
        click.option('-c', '--config', 'config_file',
                     type=click.Path(exists=True, dir_okay=False),
                     help='YAML run configuration.'),
        click.option('--preset', 'preset', type=click.Choice(['full']),
                     help='Full scale settings.'),
        click.option('--seed', 'seed', type=int, help='Random seed.'),
        click.option('--workers', 'workers', type=int,
                     help='Evaluation workers.'),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def resolve_run_config(config_file=None, preset=None, **flags):
    """Resolved RunConfig, configuration errors are usage errors."""
    try:
        return RunConfig.load(config_file=config_file, preset=preset,
                              **flags)
    except (ValueError, OSError) as err:
        raise click.UsageError(str(err))
    except yaml.YAMLError as err:
        raise click.UsageError(f'Bad configuration file: {err}')
