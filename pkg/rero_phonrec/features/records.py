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

"""Feature database rows reading."""

import csv


class RowsError:
    """Base class for errors while reading rows."""

    class MalformedRow(Exception):
        """Row does not match the header."""


class RowIterator(object):
    """Iterator to get rows of a PHOIBLE style CSV stream."""

    def __init__(self, stream, exceptions=True):
        """Constructor.

        :param stream: text stream with a header row.
        :param exceptions: raise on malformed rows instead of skipping them.
        """
        self._reader = csv.reader(stream, delimiter=',', quotechar='"')
        self.exceptions = exceptions
        self.errors = []
        try:
            self.header = [name.strip() for name in next(self._reader)]
        except StopIteration:
            self.header = []
        self.line = 1

    def __iter__(self):
        """To support iteration."""
        for cells in self._reader:
            self.line += 1
            if not cells or not any(cell.strip() for cell in cells):
                continue
            if len(cells) != len(self.header):
                error = RowsError.MalformedRow(
                    f'line {self.line}: {len(cells)} columns, '
                    f'header has {len(self.header)}')
                if self.exceptions:
                    raise error
                self.errors.append(error)
                continue
            yield dict(zip(self.header, cells))


class RowsCount(RowIterator):
    """Rows with their line number."""

    def __iter__(self):
        """To support iteration."""
        for row in super().__iter__():
            yield row, self.line
