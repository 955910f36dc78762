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

"""Synthetic phonology corpora.

Every (sub-)segment emits a few frames around the sum of one basis vector
per attribute value, so recognizers can only learn through attributes.
"""

import os
from dataclasses import dataclass, field

import numpy as np
import yaml

from .io import write_frames
from .records import TrainingError, Utterance, write_manifest
from ..config import FEATURES_ATTRIBUTES, MODEL_CONV_CONTEXT, \
    SYNTH_FRAME_DIM, SYNTH_FRAMES_PER_SEGMENT, SYNTH_NOISE
from ..features.api import ATTRIBUTE_VALUES, Contour, FeatureDatabase, \
    FeatureDbError, FeatureSchema, Inventory, Segment, \
    attribute_value_census, first_value_vector, render_database
from ..features.mapping import split_segment
from ..utils import get_rng, nfd

#: Bundled default corpus specification.
DEFAULT_SPEC = os.path.join(os.path.dirname(__file__), 'data',
                            'default_synth.yml')
#: Seconds of speech per feature frame, used for the hours column.
FRAME_SECONDS = 0.02


@dataclass
class LanguageSpec:
    """A synthetic language."""

    id: str
    utterances: int
    phonemes: list
    allophones: dict = field(default_factory=dict)
    name: str = ''
    family: str = ''


@dataclass
class SynthSpec:
    """Synthetic corpus description."""

    segments: dict
    languages: list
    zero_shot: LanguageSpec = None
    templates: dict = field(default_factory=dict)
    frame_dim: int = SYNTH_FRAME_DIM
    noise: float = SYNTH_NOISE
    frames_per_segment: tuple = SYNTH_FRAMES_PER_SEGMENT
    phonemes_per_utterance: tuple = (3, 7)
    test_fraction: float = 0.1

    @classmethod
    def from_dict(cls, data):
        """Specification from parsed YAML."""
        data = dict(data)
        try:
            data['languages'] = [LanguageSpec(**language)
                                 for language in data.get('languages', [])]
            if data.get('zero_shot'):
                data['zero_shot'] = LanguageSpec(**data['zero_shot'])
            for key in ('frames_per_segment', 'phonemes_per_utterance'):
                if key in data:
                    data[key] = tuple(data[key])
            return cls(**data)
        except TypeError as error:
            raise TrainingError.SpecInvalid(str(error))

    def attribute_cells(self, ipa):
        """Contour cell of every bundled attribute for a segment."""
        definition = dict(self.segments[ipa])
        template = definition.pop('template', None)
        cells = {name: '0' for name in FEATURES_ATTRIBUTES}
        if template:
            try:
                cells.update(self.templates[template])
            except KeyError:
                raise TrainingError.SpecInvalid(
                    f'{ipa}: unknown template {template}')
        unknown = set(definition) - set(FEATURES_ATTRIBUTES)
        if unknown:
            raise TrainingError.SpecInvalid(
                f'{ipa}: unknown attributes {", ".join(sorted(unknown))}')
        cells.update(definition)
        return {name: str(value) for name, value in cells.items()}

    @property
    def all_languages(self):
        """Training languages and the zero-shot language."""
        return self.languages + ([self.zero_shot] if self.zero_shot else [])


def load_spec(file_name=None):
    """Specification from a YAML file, the bundled default by default."""
    with open(file_name or DEFAULT_SPEC, encoding='utf-8') as handle:
        return SynthSpec.from_dict(yaml.safe_load(handle))


def build_database(spec, schema=None):
    """Feature database of every language of a specification."""
    schema = schema or FeatureSchema()
    database = FeatureDatabase(schema=FeatureSchema(
        attribute_names=tuple(FEATURES_ATTRIBUTES),
        excluded=schema.excluded))
    for ipa in spec.segments:
        try:
            attributes = {name: Contour.parse(cell) for name, cell in
                          spec.attribute_cells(ipa).items()}
        except FeatureDbError.UnknownValue as error:
            raise TrainingError.SpecInvalid(f'{ipa}: {error}')
        segment = Segment(ipa=ipa, attributes=attributes)
        database.segments[segment.ipa] = segment
    for number, language in enumerate(spec.all_languages, 1):
        inventory = Inventory(language_id=language.id, name=language.name,
                              inventory_id=str(number))
        for ipa in language.phonemes:
            inventory.phonemes.append(_segment(database, language, ipa))
        for ipa, phones in (language.allophones or {}).items():
            phones = [nfd(phone) for phone in phones]
            for phone in phones:
                _segment(database, language, phone)
            if nfd(ipa) not in inventory:
                raise TrainingError.SpecInvalid(
                    f'{language.id}: allophones of unknown phoneme {ipa}')
            inventory.allophones[nfd(ipa)] = phones
        database.inventories[language.id] = inventory
    return database


def _segment(database, language, ipa):
    try:
        return database.segment(ipa)
    except FeatureDbError.UnknownSegment:
        raise TrainingError.SpecInvalid(
            f'{language.id}: no segment definition for {ipa}')


def validate_spec(spec, database):
    """Check a specification against its database.

    :raises TrainingError.SpecInvalid: on the first problem found.
    """
    if not spec.languages:
        raise TrainingError.SpecInvalid('no training language')
    low, high = spec.frames_per_segment
    if low < 2 or high < low:
        raise TrainingError.SpecInvalid(
            f'bad frames per segment: {spec.frames_per_segment}')
    low, high = spec.phonemes_per_utterance
    if low < 1 or high < low:
        raise TrainingError.SpecInvalid(
            f'bad phonemes per utterance: {spec.phonemes_per_utterance}')
    if not 0 <= spec.test_fraction < 1:
        raise TrainingError.SpecInvalid(
            f'bad test fraction: {spec.test_fraction}')
    for language in spec.all_languages:
        if language.utterances < 1 or not language.phonemes:
            raise TrainingError.SpecInvalid(f'{language.id}: empty language')
    if spec.zero_shot:
        census = attribute_value_census(
            database, [language.id for language in spec.languages])
        schema = database.schema
        for phoneme in database.inventory(spec.zero_shot.id).phonemes:
            for pair in zip(schema.effective,
                            first_value_vector(phoneme, schema)):
                if pair not in census:
                    raise TrainingError.SpecInvalid(
                        f'{phoneme.ipa}: unattested value '
                        f'{pair[0]}={pair[1].render()}')


def novel_phonemes(spec):
    """Zero-shot phonemes absent from every training language."""
    seen = {nfd(ipa) for language in spec.languages
            for ipa in language.phonemes}
    return [nfd(ipa) for ipa in spec.zero_shot.phonemes
            if nfd(ipa) not in seen]


def basis_vectors(schema, frame_dim, rng):
    """One random direction per effective attribute value."""
    scale = 1.0 / np.sqrt(len(schema.effective))
    return {(name, value): rng.normal(0.0, scale, size=frame_dim)
            for name in schema.effective for value in ATTRIBUTE_VALUES}


def segment_means(segment, basis, schema):
    """Frame means of every sub-segment of a segment."""
    return [sum(basis[name, part.attributes[name].first]
                for name in schema.effective)
            for part in split_segment(segment, schema)]


@dataclass
class SynthCorpus:
    """Generated utterances with their database."""

    spec: SynthSpec
    database: FeatureDatabase
    train: list = field(default_factory=list)
    test: list = field(default_factory=list)
    zero_shot: list = field(default_factory=list)

    @property
    def training_languages(self):
        """Identifiers of the training languages."""
        return [language.id for language in self.spec.languages]

    def languages_table(self):
        """Language, family and hours of training speech rows."""
        frames = {}
        for utterance in self.train:
            frames[utterance.language_id] = frames.get(
                utterance.language_id, 0) + utterance.frames.shape[0]
        return [
            (language.id, language.family,
             frames.get(language.id, 0) * FRAME_SECONDS / 3600.0)
            for language in self.spec.all_languages
        ]


def _merges(phone, ipa, inventory, means):
    """Test the frames of a phoneme would run on from the previous phone.

    The same phoneme twice, or an allophone starting with the frames ending
    ``phone``, leaves no boundary between the two.
    """
    if phone is None:
        return False
    if phone in inventory.allophones_of(ipa):
        return True
    return any(np.array_equal(means[phone][-1], means[allophone][0])
               for allophone in inventory.allophones_of(ipa))


def synth_corpus(spec, seed, context=MODEL_CONV_CONTEXT):
    """Generate a corpus.

    Each utterance is padded with ``context - 1`` silence frames so the
    convolution front-end keeps one output frame per input frame.
    Adjacent phonemes always have a frame boundary, see :func:`_merges`;
    single phoneme inventories repeat their phoneme.

    :param spec: SynthSpec.
    :param seed: random seed, the corpus is a function of it.
    :param context: convolution context of the recognizers to train.
    :return: SynthCorpus
    """
    database = build_database(spec)
    validate_spec(spec, database)
    schema = database.schema
    rng = get_rng(seed)
    basis = basis_vectors(schema, spec.frame_dim, rng)
    means = {ipa: segment_means(segment, basis, schema)
             for ipa, segment in database.segments.items()}
    corpus = SynthCorpus(spec=spec, database=database)
    low, high = spec.phonemes_per_utterance
    frame_low, frame_high = spec.frames_per_segment
    padding = context - 1
    for language in spec.all_languages:
        inventory = database.inventory(language.id)
        utterances = []
        for number in range(language.utterances):
            length = int(rng.integers(low, high + 1))
            phonemes = []
            chunks = [np.zeros((padding // 2, spec.frame_dim))]
            phone = None
            for _ in range(length):
                candidates = [
                    ipa for ipa in inventory.phoneme_ipas
                    if not _merges(phone, ipa, inventory, means)
                ] or inventory.phoneme_ipas
                ipa = candidates[int(rng.integers(0, len(candidates)))]
                phonemes.append(ipa)
                phones = inventory.allophones_of(ipa)
                phone = phones[int(rng.integers(0, len(phones)))]
                for mean in means[phone]:
                    count = int(rng.integers(frame_low, frame_high + 1))
                    chunks.append(np.tile(mean, (count, 1)))
            chunks.append(np.zeros((padding - padding // 2, spec.frame_dim)))
            frames = np.concatenate(chunks)
            frames = frames + rng.normal(0.0, spec.noise, size=frames.shape) \
                if spec.noise else frames
            utterances.append(Utterance(
                id=f'{language.id}-{number:05d}', language_id=language.id,
                phonemes=phonemes, data=frames.astype(np.float32)
                .astype(np.float64)))
        if spec.zero_shot and language.id == spec.zero_shot.id:
            corpus.zero_shot = utterances
            continue
        held_out = int(round(len(utterances) * spec.test_fraction))
        corpus.train.extend(utterances[held_out:])
        corpus.test.extend(utterances[:held_out])
    return corpus


def write_corpus(corpus, directory):
    """Write database, manifests, frames and the language table.

    :return: mapping of written file kinds to paths.
    """
    frames_directory = os.path.join(directory, 'frames')
    os.makedirs(frames_directory, exist_ok=True)
    paths = {
        'database': os.path.join(directory, 'features.csv'),
        'languages': os.path.join(directory, 'languages.tsv'),
    }
    with open(paths['database'], 'w', encoding='utf-8', newline='') as out:
        render_database(corpus.database, out)
    for split in ('train', 'test', 'zero_shot'):
        utterances = getattr(corpus, split)
        for utterance in utterances:
            utterance.frames_path = os.path.join(
                frames_directory, f'{utterance.id}.afrm')
            write_frames(utterance.frames_path, utterance.frames)
        paths[split] = os.path.join(directory, f'{split}.tsv')
        write_manifest(paths[split], utterances)
    with open(paths['languages'], 'w', encoding='utf-8') as out:
        out.write('language\tfamily\thours\n')
        for language_id, family, hours in corpus.languages_table():
            out.write(f'{language_id}\t{family}\t{hours:.6f}\n')
    return paths
