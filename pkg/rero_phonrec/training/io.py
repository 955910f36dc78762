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

"""Binary feature frames and checkpoint files.

Frames: ``AFRM``, version, rows and columns as little-endian unsigned 32 bit
integers, then the values as little-endian 32 bit floats, row-major.

Checkpoints: ``ALPH``, version, metadata length, JSON metadata, then every
array of the metadata ``arrays`` manifest as little-endian 32 bit floats.
"""

import json
import struct
from collections import OrderedDict

import numpy as np

from .records import TrainingError

FRAMES_MAGIC = b'AFRM'
FRAMES_VERSION = 1
CHECKPOINT_MAGIC = b'ALPH'
CHECKPOINT_VERSION = 1
_FRAMES_HEADER = struct.Struct('<4sIII')
_CHECKPOINT_HEADER = struct.Struct('<4sII')
_FLOAT = np.dtype('<f4')


def write_frames(file_name, frames):
    """Write a [T0, F] matrix as 32 bit floats."""
    frames = np.asarray(frames)
    if frames.ndim != 2:
        raise TrainingError.BadFormat(f'frames must be 2-D: {frames.shape}')
    with open(file_name, 'wb') as handle:
        handle.write(_FRAMES_HEADER.pack(FRAMES_MAGIC, FRAMES_VERSION,
                                         *frames.shape))
        handle.write(frames.astype(_FLOAT).tobytes(order='C'))


def _frames_header(handle, file_name):
    header = handle.read(_FRAMES_HEADER.size)
    if len(header) != _FRAMES_HEADER.size:
        raise TrainingError.BadFormat(f'{file_name}: truncated header')
    magic, version, rows, cols = _FRAMES_HEADER.unpack(header)
    if magic != FRAMES_MAGIC or version != FRAMES_VERSION:
        raise TrainingError.BadFormat(
            f'{file_name}: not a frames file version {FRAMES_VERSION}')
    return rows, cols


def read_frames_shape(file_name):
    """Rows and columns of a frames file."""
    with open(file_name, 'rb') as handle:
        return _frames_header(handle, file_name)


def read_frames(file_name):
    """Frames as 64 bit floats."""
    with open(file_name, 'rb') as handle:
        rows, cols = _frames_header(handle, file_name)
        payload = handle.read()
    if len(payload) != rows * cols * _FLOAT.itemsize:
        raise TrainingError.BadFormat(f'{file_name}: truncated frames')
    return np.frombuffer(payload, dtype=_FLOAT).reshape(rows, cols) \
        .astype(np.float64)


def write_checkpoint(file_name, metadata, arrays):
    """Write metadata and named arrays.

    :param metadata: JSON serializable mapping.
    :param arrays: ordered name to array mapping.
    """
    metadata = dict(metadata)
    metadata['arrays'] = [[name, list(np.shape(array))]
                          for name, array in arrays.items()]
    encoded = json.dumps(metadata, ensure_ascii=False,
                         sort_keys=True).encode('utf-8')
    with open(file_name, 'wb') as handle:
        handle.write(_CHECKPOINT_HEADER.pack(
            CHECKPOINT_MAGIC, CHECKPOINT_VERSION, len(encoded)))
        handle.write(encoded)
        for array in arrays.values():
            handle.write(np.asarray(array).astype(_FLOAT).tobytes(order='C'))


def read_checkpoint(file_name):
    """Metadata and ordered arrays as 64 bit floats."""
    with open(file_name, 'rb') as handle:
        header = handle.read(_CHECKPOINT_HEADER.size)
        if len(header) != _CHECKPOINT_HEADER.size:
            raise TrainingError.BadFormat(f'{file_name}: truncated header')
        magic, version, length = _CHECKPOINT_HEADER.unpack(header)
        if magic != CHECKPOINT_MAGIC or version != CHECKPOINT_VERSION:
            raise TrainingError.BadFormat(
                f'{file_name}: not a checkpoint version {CHECKPOINT_VERSION}')
        try:
            metadata = json.loads(handle.read(length).decode('utf-8'))
        except ValueError as error:
            raise TrainingError.BadFormat(f'{file_name}: {error}')
        payload = handle.read()
    arrays = OrderedDict()
    offset = 0
    for name, shape in metadata['arrays']:
        count = int(np.prod(shape, dtype=np.int64))
        size = count * _FLOAT.itemsize
        if offset + size > len(payload):
            raise TrainingError.BadFormat(f'{file_name}: truncated {name}')
        arrays[name] = np.frombuffer(
            payload, dtype=_FLOAT, count=count, offset=offset) \
            .reshape(shape).astype(np.float64)
        offset += size
    if offset != len(payload):
        raise TrainingError.BadFormat(f'{file_name}: trailing data')
    return metadata, arrays
