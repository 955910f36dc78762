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

"""Run logger with identifiers and finding codes."""

import logging
from functools import partialmethod

from .config import LOGGER_FORMAT, LOGGER_NAME


class LoggerError:
    """Base class for errors in the Logger packages."""

    class InvalidFileName(Exception):
        """The given file name is not correct."""


class IdentifierFilter(logging.Filter):
    """Default identifier and error code of records logged without them."""

    def filter(self, record):
        """Add missing attributes."""
        record.id = getattr(record, 'id', '')
        record.error = getattr(record, 'error', '')
        return True


class Logger:
    """Log of a training run.

    Every line has an identifier (utterance id, step or IPA string), a level,
    a code and a message.
    """

    def __init__(self, name=LOGGER_NAME, log_output_file=None,
                 log_console=True, log_level=logging.INFO, log_master=True):
        """Constructor.

        :param name: logger name.
        :param log_output_file: name of the output file.
        :param log_console: print messages on the console.
        :param log_level: level of the log messages.
        :param log_master: configure handlers for this logger.
        """
        self.name = name
        self.logger = logging.getLogger(name)
        if not log_master:
            return
        self.logger.setLevel(log_level)
        if log_output_file is not None:
            try:
                handler = logging.FileHandler(log_output_file, mode='w',
                                              encoding='UTF-8')
            except OSError as err:
                raise LoggerError.InvalidFileName(
                    f'Output file: {log_output_file} cannot be created.'
                ) from err
            self._add_handler(handler)
        if log_console:
            self._add_handler(logging.StreamHandler(), log_level)

    def _add_handler(self, handler, level=logging.NOTSET):
        handler.setLevel(level)
        handler.setFormatter(logging.Formatter(LOGGER_FORMAT))
        handler.addFilter(IdentifierFilter())
        self.logger.addHandler(handler)

    def __enter__(self):
        """Context manager entry."""
        return self

    def __exit__(self, *args):
        """Context manager exit."""
        self.close()

    def close(self):
        """Close and remove all handlers."""
        for handler in self.logger.handlers[:]:
            handler.close()
            self.logger.removeHandler(handler)

    def log_id(self, level, id, error, message):
        """Message for an identifier.

        :param level: level name, ``info`` or ``WARNING`` for example.
        """
        self.logger.log(logging.getLevelName(level.upper()), message,
                        extra={'id': id, 'error': error})

    debug_id = partialmethod(log_id, 'debug')
    info_id = partialmethod(log_id, 'info')
    warning_id = partialmethod(log_id, 'warning')
    error_id = partialmethod(log_id, 'error')

    def info(self, error, message):
        """Info message without identifier."""
        self.info_id('', error, message)

    def warning(self, error, message):
        """Warning message without identifier."""
        self.warning_id('', error, message)

    def error(self, error, message):
        """Error message without identifier."""
        self.error_id('', error, message)
