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

"""Utterances and manifest files."""

import os
from dataclasses import dataclass

from ..utils import nfd


class TrainingError:
    """Base class for errors in data preparation and training."""

    class EmptyLanguages(Exception):
        """No language with utterances."""

    class UtteranceTooLarge(Exception):
        """Utterance footprint above the batch element budget."""

    class SpecInvalid(Exception):
        """Inconsistent synthetic corpus specification."""

    class BadFormat(Exception):
        """Unreadable manifest, frames or checkpoint file."""


@dataclass
class Utterance:
    """Feature frames of an utterance and its phoneme transcription.

    Frames are read from ``frames_path`` on first access.
    """

    id: str
    language_id: str
    phonemes: list
    frames_path: str = None
    data: object = None

    def __post_init__(self):
        """Normalize the transcription."""
        self.phonemes = [nfd(ipa) for ipa in self.phonemes]
        if not self.phonemes:
            raise TrainingError.BadFormat(f'{self.id}: empty transcription')

    @property
    def frames(self):
        """Feature frames, [T0, F]."""
        if self.data is None:
            from .io import read_frames
            self.data = read_frames(self.frames_path)
        return self.data

    @property
    def shape(self):
        """Frames dimensions without keeping the frames."""
        if self.data is not None:
            return self.data.shape
        from .io import read_frames_shape
        return read_frames_shape(self.frames_path)


def read_manifest(file_name):
    """Utterances of a manifest.

    Lines are ``id<TAB>language<TAB>frames_path<TAB>ipa ipa ...``, relative
    frame paths are resolved from the manifest directory.
    """
    base = os.path.dirname(os.path.abspath(file_name))
    utterances = []
    with open(file_name, encoding='utf-8') as manifest:
        for line_number, line in enumerate(manifest, 1):
            line = line.rstrip('\n')
            if not line.strip() or line.startswith('#'):
                continue
            cells = line.split('\t')
            if len(cells) != 4:
                raise TrainingError.BadFormat(
                    f'{file_name} line {line_number}: {len(cells)} columns')
            utterance_id, language_id, frames_path, transcription = cells
            utterances.append(Utterance(
                id=utterance_id,
                language_id=language_id,
                phonemes=transcription.split(),
                frames_path=os.path.join(base, frames_path)
            ))
    return utterances


def write_manifest(file_name, utterances):
    """Write utterances, frame paths relative to the manifest directory."""
    base = os.path.dirname(os.path.abspath(file_name))
    with open(file_name, 'w', encoding='utf-8') as manifest:
        for utterance in utterances:
            frames_path = os.path.relpath(utterance.frames_path, base)
            manifest.write(
                f'{utterance.id}\t{utterance.language_id}\t{frames_path}\t'
                f'{" ".join(utterance.phonemes)}\n')
